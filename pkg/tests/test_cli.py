import json
import subprocess
import sys

import pytest

from hdelaunay.cli import ConfigError, RunConfig, main
from hdelaunay.export import obj_euler_characteristic

EUCLID = {"kappa": 0, "tau": 0, "degenerate_ok": True}


def _run(tmp_path, capsys, cmd, cfg, *extra, out=None):
    path = tmp_path / "cfg.json"
    path.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
    argv = [cmd, "--config", str(path), *extra]
    if out:
        argv += ["--out", str(tmp_path / out)]
    code = main(argv)
    return code, capsys.readouterr()


def test_validate_exit_codes(tmp_path, capsys):
    ok = {"space": {"kappa": -1, "tau": 0}, "h": {"kind": "constant", "H0": 1}}
    bad = {"space": {"kappa": -1, "tau": 0}, "h": {"kind": "constant", "H0": 0.4}}
    assert _run(tmp_path, capsys, "validate", ok)[0] == 0
    code, io = _run(tmp_path, capsys, "validate", bad)
    assert code == 1 and json.loads(io.out)["ok"] is False
    code, io = _run(tmp_path, capsys, "validate", "{not json")
    assert code == 2 and "malformed JSON" in io.err


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        main(["validate"])
    assert e.value.code == 2
    cfg = {"space": {"kappa": 0, "tau": 1}, "h": {"kind": "constant", "H0": 1}, "bogus": 1}
    assert _run(tmp_path, capsys, "validate", cfg)[0] == 2
    cfg = {"space": {"kappa": 0, "tau": 1}, "h": {"kind": "constant", "H0": 1}}
    assert _run(tmp_path, capsys, "validate", cfg, "--rtol", "-1")[0] == 2
    assert _run(tmp_path, capsys, "validate", {**cfg, "h": {"kind": "wavy"}})[0] == 2


def test_domain_error_exits_one(tmp_path, capsys):
    cfg = {"space": {"kappa": 0, "tau": 0}, "h": {"kind": "constant", "H0": 1},
           "seed": {"kind": "axis"}}
    code, io = _run(tmp_path, capsys, "classify", cfg)
    assert code == 1 and "DomainError" in io.err


def test_classify_sphere_and_nodoid(tmp_path, capsys):
    cfg = {"space": EUCLID, "h": {"kind": "constant", "H0": 1}, "seed": {"kind": "axis"}}
    code, io = _run(tmp_path, capsys, "classify", cfg)
    d = json.loads(io.out)
    assert code == 0 and d["tag"] == "Sphere" and d["r0"] == pytest.approx(1.0, abs=1e-10)
    cfg["seed"] = {"kind": "equilibrium"}
    assert json.loads(_run(tmp_path, capsys, "classify", cfg)[1].out)["tag"] == "Cylinder"
    cfg["seed"] = {"kind": "y0", "x0": 1.5}
    code, io = _run(tmp_path, capsys, "classify", cfg, out="nod.csv")
    assert code == 0 and json.loads(io.out)["tag"] == "Nodoid"
    assert (tmp_path / "nod.csv").read_text().startswith("s,x,z,theta,nu,eps,H_residual\n")
    assert json.loads((tmp_path / "nod.csv.events.json").read_text())


def test_classify_ambiguous_seed_exits_one(tmp_path, capsys):
    cfg = {"space": EUCLID, "h": {"kind": "constant", "H0": 1},
           "seed": {"kind": "y0", "x0": 0.5}}
    code, io = _run(tmp_path, capsys, "classify", cfg)
    assert code == 1 and "AmbiguousSeedError" in io.err


def test_profile_is_deterministic(tmp_path, capsys):
    cfg = {"space": {"kappa": 0, "tau": 1}, "h": {"kind": "constant", "H0": 1},
           "seed": {"kind": "state", "x": 0.7, "theta": 1.0}, "stop": {"y0_crossings": 3}}
    code, io = _run(tmp_path, capsys, "profile", cfg)
    again = _run(tmp_path, capsys, "profile", cfg)[1].out
    assert code == 0 and io.out == again
    assert len(io.out.splitlines()) > 10


def test_profile_flags_override_config(tmp_path, capsys):
    cfg = {"space": {"kappa": 0, "tau": 1}, "h": {"kind": "constant", "H0": 1},
           "seed": {"kind": "state", "x": 0.7, "theta": 1.0}}
    code, io = _run(tmp_path, capsys, "profile", cfg, "--arc-budget", "0.5", out="p.csv")
    assert code == 0 and json.loads(io.out)["status"] == "budget"
    last = (tmp_path / "p.csv").read_text().splitlines()[-1]
    assert float(last.split(",")[0]) == pytest.approx(0.5)


def test_phase_plot(tmp_path, capsys):
    cfg = {"space": {"kappa": 0, "tau": 1}, "h": {"kind": "constant", "H0": 1},
           "plot": {"eps": -1, "seeds": [{"kind": "y0", "x0": 0.3, "eps": -1}]}}
    code, io = _run(tmp_path, capsys, "phase-plot", cfg, out="a.svg")
    svg = (tmp_path / "a.svg").read_text()
    assert code == 0 and svg.startswith("<svg") and 'class="orbit"' in svg
    _run(tmp_path, capsys, "phase-plot", cfg, out="b.svg")
    assert (tmp_path / "b.svg").read_text() == svg


def test_mesh_sphere(tmp_path, capsys):
    cfg = {"space": EUCLID, "h": {"kind": "constant", "H0": 1}, "seed": {"kind": "axis"},
           "mesh": {"closed": True}}
    code, _ = _run(tmp_path, capsys, "mesh", cfg, "--angular-res", "12", out="s.obj")
    assert code == 0
    assert obj_euler_characteristic((tmp_path / "s.obj").read_text()) == 2


def test_mesh_from_csv_and_open_profile_refusal(tmp_path, capsys):
    cfg = {"space": EUCLID, "h": {"kind": "constant", "H0": 1}, "seed": {"kind": "y0", "x0": 0.3}}
    _run(tmp_path, capsys, "classify", cfg, out="u.csv")
    cfg = {"space": EUCLID, "h": {"kind": "constant", "H0": 1},
           "mesh": {"profile_csv": str(tmp_path / "u.csv"), "closed": True}}
    code, io = _run(tmp_path, capsys, "mesh", cfg, out="u.obj")
    assert code == 1 and "closed" in io.err
    cfg["mesh"]["closed"] = False
    assert _run(tmp_path, capsys, "mesh", cfg, out="u.obj")[0] == 0


def test_torus_search(tmp_path, capsys):
    base = {"space": {"kappa": 0, "tau": 1}, "h": {"kind": "constant", "H0": 1}}
    code, io = _run(tmp_path, capsys, "torus-search", base)
    assert code == 1 and json.loads(io.out)["nonexistence_check"] is True
    code, io = _run(tmp_path, capsys, "torus-search",
                    {**base, "space": {"kappa": 4, "tau": 0.5}})
    assert code == 1 and json.loads(io.out)["refused"] is True
    cfg = {**base, "torus": {"H0": 1, "x1": 0.8, "delta": 1e-4}}
    code, io = _run(tmp_path, capsys, "torus-search", cfg, out="t.csv")
    rep = json.loads(io.out)
    assert code == 0 and abs(rep["gap"]) < 1e-9 and rep["closes"] is True
    assert rep["profile_ref"].endswith("t.csv") and (tmp_path / "t.csv").exists()


def test_run_config_roundtrip_is_byte_identical():
    raw = {"space": {"kappa": -1, "tau": 1}, "h": {"kind": "table", "knots": [[0, 1], [1, 2]]},
           "seed": {"kind": "y0", "x0": 1.2, "eps": -1}, "integration": {"rtol": 1e-9},
           "mesh": {"angular_res": 32}, "torus": {"H0": 1, "x1": 0.8, "delta": 0.01}}
    once = RunConfig.from_dict(raw).emit()
    assert RunConfig.parse(once).emit() == once
    assert json.loads(once)["integration"]["atol"] == 1e-14


def test_run_config_rejects_bad_values():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"space": {"kappa": 0, "tau": 1}, "h": {"kind": "constant", "H0": 1},
                             "integration": {"atol": 0}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"space": {"kappa": "zero", "tau": 1}, "h": {"kind": "constant"}})


def test_console_script_is_installed(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"space": {"kappa": 1, "tau": 0}, "h": {"kind": "constant",
                                                                       "H0": 1}}))
    r = subprocess.run([sys.executable, "-m", "hdelaunay.cli", "validate", "--config", str(path)],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["ok"] is True
