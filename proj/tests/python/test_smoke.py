import math
import os
from pathlib import Path

import numpy as np
import pytest

import marangoni as mg

SOURCE = Path(os.environ.get("MARANGONI_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def small(tmp_path, extra=""):
    c = mg.Config.parse(
        "nx = 12\nny = 12\nt_end = 0.02\nkappa = quad:0.1,0.1\nic_phi = bubble\n"
        "ic_theta = gaussian_theta2(0.8,0.15)\nsnapshot_every = 10\n" + extra
    )
    c.output_dir = str(tmp_path / "run")
    return c


def test_config_round_trip():
    c = mg.Config.parse("nx = 20\nny = 10\nt_end = 0.3\ndt = 2.5e-4\n")
    assert (c.nx, c.ny, c.dt, c.total_steps()) == (20, 10, 2.5e-4, 1200)
    once = c.serialize()
    assert mg.Config.parse(once).serialize() == once


def test_config_error_is_value_error():
    with pytest.raises(ValueError, match="line 2"):
        mg.Config.parse("nx = 8\nb = 0\n")


def test_double_well_and_kirchhoff():
    w, wp = mg.double_well(0.5, 0.1)
    assert w == pytest.approx((0.25 - 1) ** 2 / 0.04)
    assert wp == pytest.approx((0.125 - 0.5) / 0.01)
    assert mg.kirchhoff(0.3, "constant:2") == pytest.approx(0.6)
    for s in (-0.7, 0.0, 0.4):
        assert mg.inverse_kirchhoff(mg.kirchhoff(s, "exp:0.5,0.8"), "exp:0.5,0.8") == pytest.approx(s, abs=1e-12)


def test_thresholds_closed_form():
    c = mg.Config.parse("c1 = 1\nc2 = 1\nc3 = 1\ncP = 1\nlambda0 = 1\na = 2\nb = 1\nmu = constant:1\nkappa = constant:1\n")
    t = mg.thresholds(c)
    assert t["theta1"] == pytest.approx(0.5)
    assert 0 < t["theta2"] <= t["theta1"]
    assert not t["estimated"]


def test_run_and_audit(tmp_path):
    c = small(tmp_path)
    code, log = mg.run(c)
    assert code == mg.EXIT_SUCCESS, log
    rows = mg.read_diagnostics(str(tmp_path / "run" / "diagnostics.csv"))
    assert len(rows) == c.total_steps() + 1
    assert all(r["energy_law_residual"] <= r["energy_law_tol"] for r in rows[1:])
    rep = mg.audit(c.output_dir)
    assert rep["ok"], rep["checks"]
    assert rep["flagged_steps"] == []


def test_simulation_matches_run(tmp_path):
    c = small(tmp_path)
    assert mg.run(c)[0] == 0
    rows = mg.read_diagnostics(str(tmp_path / "run" / "diagnostics.csv"))
    sim = mg.Simulation(c)
    assert sim.phi.shape == (12, 12)
    assert sim.u.shape == (12, 13)
    assert sim.v.shape == (13, 12)
    sim.step(c.total_steps())
    assert sim.t == pytest.approx(c.t_end)
    d = sim.diagnostics()
    assert d["total_energy"] == pytest.approx(rows[-1]["total_energy"], rel=1e-12)
    assert sim.max_principle_ok()
    assert np.all(np.abs(sim.phi) <= 1 + 1e-8)


def test_stability_violation(tmp_path):
    c = mg.Config.parse("nx = 64\nny = 64\nt_end = 0.01\nmu = constant:1\nkappa = constant:0.001\n")
    c.output_dir = str(tmp_path / "bad")
    code, log = mg.run(c)
    assert code == mg.EXIT_CONFIG
    assert "viscous bound" in log
    with pytest.raises(ValueError):
        mg.Simulation(c)


def test_steady_kink():
    w = math.sqrt(2) * 0.1
    c = mg.Config.parse("nx = 32\nny = 8\nly = 0.25\neps = 0.1\nphi_b = tanh_x\nic_phi = constant(0)\n")
    x = (np.arange(32) + 0.5) / 32
    exact = np.tile(np.tanh((x - 0.5) / w), (8, 1))
    r = mg.solve_steady(c, exact)
    assert r["converged"]
    assert r["residual"] <= 1e-10
    assert np.max(np.abs(r["phi"] - exact)) < 0.05
    with pytest.raises(ValueError, match="shape"):
        mg.solve_steady(c, exact[:, :4])


def test_equilibrium_config():
    c = mg.Config.load(str(SOURCE / "configs" / "equilibrium.cfg"))
    sim = mg.Simulation(c)
    e0 = sim.diagnostics()["total_energy"]
    sim.step(5)
    assert sim.diagnostics()["total_energy"] == pytest.approx(e0, abs=1e-12)
