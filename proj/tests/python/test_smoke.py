import json
import os
import pathlib

import numpy as np
import pytest

import memdyn

SCENARIOS = pathlib.Path(
    os.environ.get("MEMDYN_SCENARIO_DIR", pathlib.Path(__file__).resolve().parents[2] / "scenarios")
)


def test_matrix_exp_matches_diagonal():
    d = np.diag([0.5, -1.0 + 2.0j])
    np.testing.assert_allclose(memdyn.matrix_exp(d), np.diag(np.exp(np.diag(d))), atol=1e-14)


def test_column_stacking():
    x = np.arange(4).reshape(2, 2).astype(complex)
    np.testing.assert_array_equal(memdyn.vectorize(x), x.flatten(order="F"))


def test_depolarizing_semigroup_is_cptp():
    lam = memdyn.semigroup_propagator(memdyn.depolarizing_generator(2, 1.0), 0.7)
    rep = memdyn.is_cptp(lam)
    assert rep["is_cptp"]
    assert rep["min_choi_eigenvalue"] > -1e-12


def test_kraus_channel():
    g = 0.3
    k0 = np.array([[1, 0], [0, np.sqrt(1 - g)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(g)], [0, 0]], dtype=complex)
    np.testing.assert_allclose(
        memdyn.superop_from_kraus([k0, k1]), memdyn.amplitude_damping_channel(g), atol=1e-15
    )


def test_werner_negativity():
    for p in (0.2, 0.4, 0.9):
        rep = memdyn.werner_asymptote_check(p)
        assert rep["negativity"] == pytest.approx(max(0.0, (3 * p - 1) / 4), abs=1e-12)
        assert (rep["verdict"] == "entangled") == (p > 1 / 3)


def test_identity_mixture_asymptote_remembers_state():
    phi = memdyn.bell_basis()[0]
    rho = np.outer(phi, phi.conj())
    lim = memdyn.asymptotic_identity_mixture(memdyn.depolarizing_generator(4, 1.0), 0.4)
    out = memdyn.devectorize(lim @ memdyn.vectorize(rho))
    np.testing.assert_allclose(out, 0.6 * np.eye(4) / 4 + 0.4 * rho, atol=1e-9)
    assert memdyn.negativity(out, [2, 2]) == pytest.approx(0.05, abs=1e-9)


def test_volterra_matches_closed_form():
    gen = memdyn.depolarizing_generator(2, 1.0)
    psi = np.array([0.8, 0.36 + 0.48j])
    rho0 = np.outer(psi, psi.conj())
    times, states = memdyn.volterra_identity_mixture(gen, 0.25, rho0, 2.0, 1e-3)
    assert len(times) == len(states) == 2001
    lam = memdyn.identity_mixture_propagator(gen, 0.25, times[-1])
    ref = memdyn.devectorize(lam @ memdyn.vectorize(rho0))
    assert np.abs(states[-1] - ref).max() < 1e-7


def test_numerical_laplace_of_exponential():
    val = memdyn.numerical_laplace(lambda t: np.array([[np.exp(-2 * t)]], dtype=complex), 1.0)
    assert abs(val[0, 0] - 1 / 3) < 1e-10


def test_invalid_inputs_raise():
    with pytest.raises(ValueError):
        memdyn.validate_state(np.eye(2))
    with pytest.raises(ValueError):
        memdyn.identity_mixture_propagator(memdyn.depolarizing_generator(2, 1.0), 1.5, 1.0)


def test_scenario_validation_reports_paths():
    doc = json.loads((SCENARIOS / "werner_asymptote.json").read_text())
    doc["evolution"]["p"] = 1.5
    errors = memdyn.validate_scenario(json.dumps(doc))
    assert [path for path, _ in errors] == [".evolution.p"]
    assert memdyn.validate_scenario((SCENARIOS / "werner_asymptote.json").read_text()) == []


def test_run_and_sweep(tmp_path):
    res = memdyn.run_scenario(SCENARIOS / "werner_asymptote.json", tmp_path)
    assert res["passed"]
    assert res["metrics"]["asymptote.negativity"] == pytest.approx(0.05, abs=1e-8)
    assert (tmp_path / "werner_asymptote.summary.json").exists()
    rows = memdyn.sweep_scenario(SCENARIOS / "block_projection_sweep.json", "eps", [0.25, 0.5, 1.0])
    assert [r[2] for r in rows] == ["entangled", "entangled", "separable"]
    assert rows[0][1] > rows[1][1] > rows[2][1]
