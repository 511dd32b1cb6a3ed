"""Lax-Milgram solves on ``V`` and the Cea-type bound with a sectorial defect.

Antilinear functionals on ``V`` are stored as their Riesz vectors: ``eta``
represents ``v -> <eta, v>_V = v^H eta``.  Under this identification the
Lax-Milgram operator of ``a`` is the matrix itself and the dual of
``J: V_check -> V`` is ``J^H``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ContractError, NotCoerciveError
from .forms import FormInH, Sector, fit_minimal_angle, require_sectorial
from .linalg import as_cmatrix, hermitian_part, norm2, norm_est


def bounds(Atilde) -> tuple[float, float]:
    """Boundedness and coercivity constants ``(M, alpha)`` of a form on ``V``."""
    A = as_cmatrix(Atilde, "Atilde")
    if A.shape[0] != A.shape[1]:
        raise ContractError("Atilde must be square")
    if A.size == 0:
        return 0.0, math.inf
    return norm2(A), float(np.linalg.eigvalsh(hermitian_part(A))[0])


@dataclass(frozen=True, eq=False)
class CoerciveFormOnV:
    Atilde: np.ndarray
    M: float = field(init=False)
    alpha: float = field(init=False)

    def __post_init__(self):
        A = as_cmatrix(self.Atilde, "Atilde")
        object.__setattr__(self, "Atilde", A)
        M, alpha = bounds(A)
        if A.size and not alpha > 1e-14 * M:
            raise NotCoerciveError(f"not coercive: alpha = {alpha:.3g}, M = {M:.3g}")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "alpha", alpha)

    @property
    def dim(self) -> int:
        return self.Atilde.shape[0]

    def value(self, x, y=None) -> complex:
        y = x if y is None else y
        return complex(np.vdot(y, self.Atilde @ x))


def lm_solve(form: CoerciveFormOnV, eta) -> np.ndarray:
    """Solve ``a(u, v) = <eta, v>`` for all ``v``, i.e. ``Atilde u = eta``."""
    if not form.alpha > 0:
        raise NotCoerciveError(f"not coercive: alpha = {form.alpha:.3g}")
    eta = np.asarray(eta, dtype=np.complex128)
    if form.dim == 0:
        return np.zeros(eta.shape, dtype=np.complex128)
    return np.linalg.solve(form.Atilde, eta)


def dual_map(Jmap) -> np.ndarray:
    """``J'`` with ``J' eta = eta o J``; under Riesz identification ``J^H``."""
    return np.asarray(Jmap, dtype=np.complex128).conj().T


@dataclass(frozen=True, eq=False)
class GalerkinPair:
    """Big form ``a`` on ``V``, small form on ``V_check`` and ``J: V_check -> V``.

    ``theta`` is a sector angle of the defect ``b(w, v) = a_check(w, v) - a(Jw, Jv)``.
    When omitted it is fitted (smallest angle to 1e-6).
    """

    big: CoerciveFormOnV
    small: CoerciveFormOnV
    Jmap: np.ndarray
    theta: float | None = None

    def __post_init__(self):
        J = as_cmatrix(self.Jmap, "Jmap")
        if J.shape != (self.big.dim, self.small.dim):
            raise ContractError(f"Jmap must be {self.big.dim}x{self.small.dim}, got {J.shape}")
        object.__setattr__(self, "Jmap", J)
        defect = FormInH(self.defect_matrix, np.eye(self.small.dim))
        scale = max(self.small.M, norm_est(J.conj().T @ self.big.Atilde @ J))
        if self.theta is None:
            object.__setattr__(self, "theta", fit_minimal_angle(defect, 0.0, scale=scale))
        else:
            require_sectorial(defect, Sector(self.theta, 0.0), scale)

    @property
    def defect_matrix(self) -> np.ndarray:
        J = self.Jmap
        return self.small.Atilde - J.conj().T @ self.big.Atilde @ J

    @property
    def c(self) -> float:
        return 1.0 + math.tan(self.theta)


def galerkin_solution(pair: GalerkinPair, eta):
    """``u = A^-1 eta`` on ``V`` and ``u_check = A_check^-1 J' eta`` on ``V_check``."""
    u = lm_solve(pair.big, eta)
    ucheck = lm_solve(pair.small, dual_map(pair.Jmap) @ np.asarray(eta, dtype=np.complex128))
    return u, ucheck


def sector_cauchy_schwarz_check(b_matrix, theta: float, samples: int = 10_000, rng=None):
    """Sample ``|b(w, v)| / (c sqrt(Re b(w)) sqrt(Re b(v)))`` with ``c = 1 + tan(theta)``.

    Returns ``(passes, worst_ratio)``; passes iff the worst ratio is at most
    ``1 + 1e-9``.
    """
    B = as_cmatrix(b_matrix, "b_matrix")
    n = B.shape[0]
    require_sectorial(FormInH(B, np.eye(n)), Sector(theta, 0.0))
    if n == 0:
        return True, 0.0
    rng = np.random.default_rng(rng)
    W = rng.standard_normal((n, samples)) + 1j * rng.standard_normal((n, samples))
    Vs = rng.standard_normal((n, samples)) + 1j * rng.standard_normal((n, samples))
    bwv = np.einsum("is,is->s", Vs.conj(), B @ W)
    R = hermitian_part(B)
    rew = np.einsum("is,is->s", W.conj(), R @ W).real
    rev = np.einsum("is,is->s", Vs.conj(), R @ Vs).real
    denom = (1.0 + math.tan(theta)) * np.sqrt(np.clip(rew, 0, None) * np.clip(rev, 0, None))
    ok = denom > 1e-300
    worst = float(np.max(np.abs(bwv[ok]) / denom[ok])) if ok.any() else 0.0
    return worst <= 1.0 + 1e-9, worst


@dataclass(frozen=True, eq=False)
class CeaReport:
    exact_sq: float
    abs_bounds: np.ndarray
    re_bounds: np.ndarray
    best_index: int
    scale: float
    M: float
    alpha: float
    c: float

    @property
    def best_abs_bound(self) -> float:
        return float(self.abs_bounds[self.best_index])

    def holds(self, rtol: float = 1e-9) -> bool:
        slack = rtol * self.scale
        return bool(
            np.all(self.exact_sq <= self.re_bounds + slack)
            and np.all(self.re_bounds <= self.abs_bounds + slack)
        )


def default_candidate(pair: GalerkinPair, u) -> np.ndarray:
    """``V``-orthogonal projection of ``u`` onto ``ran J``, as coefficients in ``V_check``."""
    if pair.small.dim == 0:
        return np.zeros(0, dtype=np.complex128)
    return scipy.linalg.lstsq(pair.Jmap, u, lapack_driver="gelsy")[0]


def cea_error_bound(pair: GalerkinPair, eta, candidates=None) -> CeaReport:
    """Error ``||u - J u_check||_V^2`` against both Cea-type bounds per candidate.

    For a candidate ``v``::

        abs_bound(v) = (M/alpha)^2 ||u - J v||^2 + c^2/(2 alpha) |b(v)|
        re_bound(v)  = (M/alpha)^2 ||u - J v||^2 + c^2/(2 alpha) Re b(v)

    The minimum over a finite candidate set only bounds the infimum over
    ``V_check`` from above.  With ``candidates=None`` the projection of ``u``
    onto ``ran J`` is used.
    """
    u, ucheck = galerkin_solution(pair, eta)
    J = pair.Jmap
    if candidates is None:
        candidates = [default_candidate(pair, u)]
    if len(candidates) == 0:
        raise ContractError("candidates must be nonempty")
    M, alpha, c = pair.big.M, pair.big.alpha, pair.c
    if not alpha > 0:
        raise NotCoerciveError(f"not coercive: alpha = {alpha:.3g}")
    B = pair.defect_matrix
    exact_sq = float(np.linalg.norm(u - J @ ucheck) ** 2)
    abs_b, re_b = [], []
    for v in candidates:
        v = np.asarray(v, dtype=np.complex128)
        first = (M / alpha) ** 2 * float(np.linalg.norm(u - J @ v) ** 2)
        bv = complex(np.vdot(v, B @ v))
        abs_b.append(first + c**2 / (2 * alpha) * abs(bv))
        re_b.append(first + c**2 / (2 * alpha) * bv.real)
    abs_b, re_b = np.array(abs_b), np.array(re_b)
    scale = (M / alpha) ** 2 * float(np.linalg.norm(u) ** 2)
    return CeaReport(exact_sq, abs_b, re_b, int(np.argmin(abs_b)), scale, M, alpha, c)
