"""Smoke tests for the python bindings and the CLI entry point."""

import csv
import os
import subprocess

import numpy as np
import pytest

import _rbrm as rbrm

SCENARIO_DIR = os.environ.get("RBRM_SCENARIO_DIR", "scenarios")
FIG2 = os.path.join(SCENARIO_DIR, "fig2.json")
CLI = os.environ.get("RBRM_CLI", "")


def test_eig_extremes_identity():
    lo, hi = rbrm.eig_extremes(np.eye(3))
    assert lo == 1.0 and hi == 1.0
    lo, hi = rbrm.eig_extremes(np.diag([2.0, 5.0]))
    assert (lo, hi) == (2.0, 5.0)


def test_invert_pd_and_is_psd():
    inv = rbrm.invert_pd(np.diag([2.0, 4.0]))
    assert inv[0, 0] == pytest.approx(0.5)
    assert rbrm.is_psd(np.zeros((2, 2)))
    assert not rbrm.is_psd(np.diag([1.0, -0.1]))


def test_worked_two_sensor_step():
    sensors = [(0.5, np.eye(2)), (0.5, np.eye(2))]
    stoch = rbrm.bound_step_stochastic(1.0, 1.0, 0.0, sensors)
    simp = rbrm.bound_step_simplified(1.0, 1.0, 0.0, sensors)
    unif = rbrm.bound_step_uniform(1.0, 1.0, 0.0, 1.0, 0.25)
    assert stoch == pytest.approx(0.25 + 0.125 + 0.125 + 0.25 / 3.0, abs=1e-14)
    assert simp == pytest.approx(0.75, abs=1e-14)
    assert unif == pytest.approx(0.625, abs=1e-14)
    assert stoch <= simp and stoch <= unif


def test_propagate_sequence_open_loop():
    steps = [(1.0, 0.1, [])] * 4
    trace = rbrm.propagate_bound_sequence(0.5, steps, "stochastic")
    assert trace == pytest.approx([0.5, 0.6, 0.7, 0.8, 0.9])


def test_horizon_closed_form_open_loop():
    value = rbrm.bound_horizon_closed_form(1.0, 0.25, 0.5, 4, 4, 0.8)
    assert value == pytest.approx(0.8 + 4 * 0.25, rel=1e-12)


def test_subset_coeffs_bitmask_order():
    coeffs = rbrm.subset_coeffs([np.eye(2), np.eye(2)], 1.0, 0.0)
    assert len(coeffs) == 4
    assert coeffs[0] == (0.0, 1.0)
    assert coeffs[3][0] == pytest.approx(2.0)


def test_plan_and_simulate_fig2():
    robust = rbrm.plan(FIG2, "rbrm")
    baseline = rbrm.plan(FIG2, "brm-trace")
    assert robust["laser_measurement_count"] >= 1
    assert baseline["laser_measurement_count"] == 0

    metrics = rbrm.simulate(FIG2, robust["node_ids"], trials=100, seed=3)
    assert metrics["failures"] == 0
    bound = np.array(metrics["bound"])
    mc = np.array(metrics["mc_mean_max_eig"])
    err = np.array(metrics["mc_stderr_max_eig"])
    assert np.all(mc <= bound + 3.0 * err + 1e-12)

    exact = rbrm.exact_expectation_small(FIG2, robust["node_ids"], horizon=3)
    assert len(exact) == 4
    assert np.all(np.array(exact) <= bound[:4] + 1e-12)


@pytest.mark.skipif(not CLI, reason="CLI path not provided")
def test_cli_exit_codes(tmp_path):
    out = tmp_path / "plan.json"
    ok = subprocess.run(
        [CLI, "plan", "--scenario", FIG2, "--planner", "rbrm", "--out", str(out)],
        capture_output=True,
    )
    assert ok.returncode == 0 and out.exists()

    missing = subprocess.run(
        [CLI, "plan", "--scenario", "does_not_exist.json", "--out", str(out)],
        capture_output=True,
    )
    assert missing.returncode == 2

    sim_out = tmp_path / "metrics.csv"
    sim = subprocess.run(
        [CLI, "simulate", "--scenario", FIG2, "--path", str(out), "--trials", "5",
         "--seed", "1", "--out", str(sim_out)],
        capture_output=True,
    )
    assert sim.returncode == 0
    rows = list(csv.DictReader(sim_out.open()))
    assert rows and set(rows[0]) == {
        "t", "bound", "mc_mean_max_eig", "mc_stderr_max_eig", "mc_mean_trace",
        "mc_stderr_trace", "trials", "failures",
    }
