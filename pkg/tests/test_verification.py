import json
import math

import numpy as np
import pytest
from scipy import integrate

from conftest import FACTOR_SYSTEMS, FLAT, KC, PT, RMII, interior_energies, sys_id
from ladderfn import (
    AlgebraViolationError,
    InvalidInputError,
    RosenMorseII,
    StencilError,
    appendix_scan,
    ladder_value,
    poisson_bracket_fd,
    verify_gha,
    verify_representation,
)
from ladderfn import verification
from ladderfn.factor_algebra import FactorSpec, split_form
from ladderfn.verification import default_appendix_grids, phase_advance, time_integral


def test_canonical_bracket():
    for x, p in ((0.3, -1.2), (5.0, 40.0), (-2.0, 0.0)):
        assert poisson_bracket_fd(lambda x, p: x, lambda x, p: p, x, p) == pytest.approx(1.0, abs=1e-10)
        assert poisson_bracket_fd(RMII.hamiltonian, RMII.hamiltonian, x, p) == pytest.approx(0.0, abs=1e-10)


def test_bracket_example_rmii():
    x = 0.1
    p = math.sqrt(RMII.gap(-3.0, x))
    A = lambda xx, pp: ladder_value(RMII, -1, xx, pp)
    br = complex(poisson_bracket_fd(RMII.hamiltonian, A, x, p))
    assert br / complex(A(x, p)) == pytest.approx(2.763932j, abs=1e-6)


def _analytic_case():
    F = lambda x, p: np.sin(x) * p**2
    G = lambda x, p: np.exp(x) * p
    exact = lambda x, p: np.cos(x) * p**2 * np.exp(x) - 2 * np.sin(x) * p * np.exp(x) * p
    return F, G, exact


def test_bracket_second_order_convergence():
    F, G, exact = _analytic_case()
    x, p = 0.7, 1.3
    errs = [abs(poisson_bracket_fd(F, G, x, p, h=h) - exact(x, p)) for h in (1e-2, 5e-3, 2.5e-3)]
    for coarse, fine in zip(errs, errs[1:]):
        assert 3.5 < coarse / fine < 4.5


def test_bracket_fourth_order():
    F, G, exact = _analytic_case()
    x, p = 0.7, 1.3
    errs = [abs(poisson_bracket_fd(F, G, x, p, h=h, order=4) - exact(x, p)) for h in (2e-2, 1e-2)]
    assert 12 < errs[0] / errs[1] < 20
    with pytest.raises(InvalidInputError):
        poisson_bracket_fd(F, G, x, p, order=3)


def test_stencil_error():
    with pytest.raises(StencilError):
        poisson_bracket_fd(KC.hamiltonian, KC.hamiltonian, 1e-7, 1.0, h=0.1)


def test_verify_gha_examples():
    report = verify_gha(RMII, -3.0, n_samples=50)
    assert report.passed
    assert report.first_failure() is None
    assert all(r >= 0 for r in (report.alpha_residual, report.delta_residual, report.beta_spread))
    assert verify_gha(KC, -13.0, n_samples=50).passed
    flat = verify_gha(FLAT, -4.0)
    assert flat.passed
    assert flat.beta_estimate == pytest.approx(4.0, rel=1e-6)


@pytest.mark.parametrize("sys", FACTOR_SYSTEMS + [FLAT], ids=sys_id)
def test_verify_gha_on_random_energies(sys):
    for E in interior_energies(sys, 10, fraction=0.8, rng=21):
        report = verify_gha(sys, E, n_samples=20, seed=3)
        assert report.passed, report.to_dict()


def test_verify_gha_signatures_reported():
    report = verify_gha(RMII, -3.0)
    table = {name: (exp, got) for name, exp, got in report.signature_checks}
    assert table["f-1"] == (1, 1)
    assert table["A+1"] == (-1, -1)


def test_verify_gha_input_checks():
    with pytest.raises(InvalidInputError):
        verify_gha(RMII, -3.0, n_samples=5)
    with pytest.raises(InvalidInputError):
        verify_gha(RMII, -1.0)


def test_verify_gha_raises_on_gross_violation(monkeypatch):
    real = verification.alpha_closed
    monkeypatch.setattr(verification, "alpha_closed", lambda sys, E: 1.01 * real(sys, E))
    with pytest.raises(AlgebraViolationError) as info:
        verify_gha(RMII, -3.0)
    assert "x" in info.value.worst


def test_report_json_roundtrip():
    report = verify_gha(KC, -13.0, n_samples=10)
    data = json.loads(report.to_json())
    assert data["system"] == "kc"
    assert data["passed"] is True
    assert data["energy"] == -13.0


def test_representation_examples():
    assert verify_representation(RMII, -1, -3.0, 1) <= 1e-6
    assert verify_representation(KC, -1, -13.0, -1) <= 1e-6
    with pytest.raises(InvalidInputError):
        verify_representation(RMII, -1, -3.0, 0)


@pytest.mark.parametrize("sys", FACTOR_SYSTEMS + [FLAT], ids=sys_id)
def test_antiperiodic_phase_advance(sys):
    E = sys.window.grid(5)[2]
    for eps in (1, -1):
        for eta in (1, -1):
            assert phase_advance(sys, eps, E, eta) == pytest.approx(eps * eta * math.pi, abs=1e-6)


@pytest.mark.parametrize("sys,E", [(RMII, -3.0), (KC, -13.0), (FLAT, -4.0), (PT, -1.0)], ids=str)
def test_time_integral_matches_quad(sys, E):
    xm, xp = sys.turning_points(E)
    # 1/sqrt(E - V) = w(x) / sqrt(gap_ratio), with the algebraic weight handled by QUADPACK
    f = lambda x: 1.0 / math.sqrt(float(sys.gap_ratio(E, xm, xp, x - xm, xp - x)))
    ref, _ = integrate.quad(f, xm, xp, weight="alg", wvar=(-0.5, -0.5), epsabs=0, epsrel=1e-13)
    assert float(time_integral(sys, E)(math.pi)) == pytest.approx(ref, rel=1e-11)


def test_appendix_scan_rmii():
    a, _ = split_form(RMII, FactorSpec("F", -1), 0.0, -3.0)
    assert a == pytest.approx(1.618034, abs=1e-6)
    E_grid, x_grid = default_appendix_grids(RMII)
    assert len(E_grid) >= 200 and len(x_grid) >= 200
    assert np.max(np.abs(x_grid)) >= 20
    report = appendix_scan(RMII, E_grid, x_grid)
    assert report.passed
    assert report.metrics["max_identity_error"] <= 1e-9
    assert report.metrics["min_a_minus1"] > 0


def test_appendix_scan_kc():
    report = appendix_scan(KC, *default_appendix_grids(KC))
    assert report.passed and report.metrics["min_a_plus1"] > 0


def test_appendix_scan_other_rm_parameters():
    for sys in (RosenMorseII(0.5, 1.0), RosenMorseII(3.0, 4.0), PT):
        assert appendix_scan(sys, *default_appendix_grids(sys)).passed


def test_appendix_scan_reports_violation(monkeypatch):
    real = verification.split_form

    def bad(sys, spec, x, E):
        a, b = real(sys, spec, x, E)
        return (a - 1.0 if spec.epsilon == -1 else a), b

    monkeypatch.setattr(verification, "split_form", bad)
    with pytest.raises(AlgebraViolationError) as info:
        appendix_scan(RMII, *default_appendix_grids(RMII, 20, 20))
    assert {"x", "E"} <= set(info.value.worst)
