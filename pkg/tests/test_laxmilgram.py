import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsforms import CoerciveFormOnV, GalerkinPair, cea_error_bound, galerkin_solution, lm_solve
from qsforms.errors import NotCoerciveError, NotSectorialError
from qsforms.laxmilgram import bounds, dual_map, sector_cauchy_schwarz_check

from instances import cnormal, random_coercive, random_galerkin_data


def test_bounds_examples():
    M, alpha = bounds(np.diag([1.0, 3.0]))
    assert (M, alpha) == pytest.approx((3.0, 1.0))
    M, alpha = bounds(np.array([[1, 1j], [1j, 1]]))
    assert alpha == pytest.approx(1.0)
    assert M == pytest.approx(math.sqrt(2.0))


def test_not_coercive():
    with pytest.raises(NotCoerciveError):
        CoerciveFormOnV(np.diag([1.0, 0.0]))
    with pytest.raises(NotCoerciveError):
        CoerciveFormOnV(np.array([[0, 1], [-1, 0]]))


def test_lm_solve_identity(rng):
    eta = cnormal(rng, 4)
    np.testing.assert_allclose(lm_solve(CoerciveFormOnV(np.eye(4)), eta), eta)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_lm_solve_riesz_identity(seed):
    rng = np.random.default_rng(seed)
    r = int(rng.integers(1, 10))
    form = CoerciveFormOnV(random_coercive(rng, r))
    eta = cnormal(rng, r)
    u = lm_solve(form, eta)
    for _ in range(3):
        v = cnormal(rng, r)
        assert abs(form.value(u, v) - np.vdot(v, eta)) <= 1e-10 * form.M * np.linalg.norm(u) * np.linalg.norm(v)
    assert np.linalg.norm(u) <= np.linalg.norm(eta) / form.alpha * (1 + 1e-10)


def test_dual_map_is_adjoint(rng):
    J = cnormal(rng, 3, 5)
    eta, w = cnormal(rng, 3), cnormal(rng, 5)
    # (J' eta)(w) = eta(J w)
    assert np.vdot(w, dual_map(J) @ eta) == pytest.approx(np.vdot(J @ w, eta))


def test_galerkin_projection_recovers_exact_on_full_space(rng):
    A = random_coercive(rng, 5)
    pair = GalerkinPair(CoerciveFormOnV(A), CoerciveFormOnV(A), np.eye(5))
    eta = cnormal(rng, 5)
    u, uc = galerkin_solution(pair, eta)
    np.testing.assert_allclose(u, uc, atol=1e-12)
    rep = cea_error_bound(pair, eta)
    assert rep.exact_sq <= 1e-20 * np.linalg.norm(u) ** 2 + 1e-30
    assert rep.c == pytest.approx(1.0)


def test_galerkin_pair_rejects_bad_defect(rng):
    A = random_coercive(rng, 4)
    J = cnormal(rng, 4, 3)
    Ac = J.conj().T @ A @ J - 0.5 * np.eye(3) + 5 * np.eye(3) * 0
    with pytest.raises((NotSectorialError, NotCoerciveError)):
        GalerkinPair(CoerciveFormOnV(A), CoerciveFormOnV(Ac + 0.0), J)


def test_sector_cauchy_schwarz(rng):
    for theta in (0.0, 0.4, 1.2):
        C = cnormal(rng, 5, 4)
        W = np.diag(rng.uniform(-1, 1, 5))
        B = C.conj().T @ (np.eye(5) + 1j * math.tan(theta) * W) @ C
        ok, worst = sector_cauchy_schwarz_check(B, theta, samples=2000, rng=rng)
        assert ok and worst <= 1 + 1e-9


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_cea_bound_property(seed):
    rng = np.random.default_rng(seed)
    A, Ac, J = random_galerkin_data(rng)
    pair = GalerkinPair(CoerciveFormOnV(A), CoerciveFormOnV(Ac), J)
    eta = cnormal(rng, A.shape[0])
    cands = [cnormal(rng, Ac.shape[0]) for _ in range(5)]
    rep = cea_error_bound(pair, eta, cands)
    assert rep.holds(1e-9)
    assert np.all(rep.re_bounds <= rep.abs_bounds * (1 + 1e-12) + 1e-300)
