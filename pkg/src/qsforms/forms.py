"""Sesquilinear forms in a Hilbert space and sector tests.

A *form in H* is a pair ``(a, j)``: a sesquilinear form ``a`` on
``dom(a) = C^m`` stored as ``F`` (``a(x, y) = y^H F x``) and a linear map
``j: C^m -> H = C^d`` stored as ``J``.  Membership of the numerical range in
a closed sector is decided exactly through three Hermitian PSD tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, NotSectorialError
from .linalg import as_cmatrix, hermitian_part, norm_est, skew_part

PSD_TOL = 1e-10
GRAM_TOL = 1e-8
HALF_PI = math.pi / 2
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Sector:
    """The shifted closed sector ``gamma + closure(Sigma_theta)``."""

    theta: float
    gamma: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.theta < HALF_PI) or not math.isfinite(self.gamma):
            raise ContractError(f"invalid sector theta={self.theta!r}, gamma={self.gamma!r}")

    @property
    def c(self) -> float:
        """The sectorial Cauchy-Schwarz constant ``1 + tan(theta)``."""
        return 1.0 + math.tan(self.theta)


@dataclass(frozen=True, eq=False)
class FormInH:
    """A form ``(a, j)`` in ``H``; see the module docstring for the convention."""

    F: np.ndarray
    J: np.ndarray

    def __post_init__(self):
        F = as_cmatrix(self.F, "F")
        if F.shape[0] != F.shape[1]:
            raise ContractError(f"F must be square, got {F.shape}")
        J = as_cmatrix(self.J, "J")
        if J.shape[1] != F.shape[0]:
            raise ContractError(f"J has {J.shape[1]} columns but dom(a) has dimension {F.shape[0]}")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "J", J)

    @property
    def m(self) -> int:
        return self.F.shape[0]

    @property
    def d(self) -> int:
        return self.J.shape[0]

    def value(self, x, y=None) -> complex:
        """``a(x, y)``; ``a(x) = a(x, x)`` when ``y`` is omitted."""
        x = np.asarray(x)
        y = x if y is None else np.asarray(y)
        return complex(np.vdot(y, self.F @ x))

    def shifted(self, mu: float) -> "FormInH":
        """The form ``a + mu <j., j.>_H`` with the same ``j``."""
        return FormInH(self.F + mu * (self.J.conj().T @ self.J), self.J)

    def to_json(self) -> dict:
        from .io import matrix_to_json

        return {"m": self.m, "d": self.d, "F": matrix_to_json(self.F), "J": matrix_to_json(self.J)}

    @classmethod
    def from_json(cls, obj: dict) -> "FormInH":
        from .io import form_from_json

        return form_from_json(obj)


@dataclass(frozen=True, eq=False)
class SectorCheckReport:
    passes: bool
    margin: float
    witness: np.ndarray | None = field(default=None)
    failing_test: str | None = None


def sigma_membership(z: complex, theta: float, slack: float = 0.0) -> bool:
    """Is ``z`` in the closed sector of half-angle ``theta``?

    The boundary rays count as inside.  ``slack`` relaxes the defining
    inequality ``|Im z| <= tan(theta) Re z`` additively (for tests).
    """
    if not 0.0 <= theta < HALF_PI:
        raise ContractError(f"theta={theta!r} outside [0, pi/2)")
    z = complex(z)
    if z == 0:
        return True
    if z.real > 0 and abs(math.atan2(z.imag, z.real)) <= theta * (1 + 4 * _EPS):
        return True
    return abs(z.imag) <= math.tan(theta) * z.real + slack and z.real >= -slack


def sector_distance(z: complex, theta: float) -> float:
    """Euclidean distance from ``z`` to the closed sector (0 inside)."""
    z = complex(z)
    if z == 0:
        return 0.0
    phi = abs(math.atan2(z.imag, z.real))
    if phi <= theta * (1 + 4 * _EPS):
        return 0.0
    if phi - theta >= HALF_PI:
        return abs(z)
    return abs(z) * math.sin(phi - theta)


def real_part(F) -> np.ndarray:
    """Matrix of ``Re a``: ``(Re a)(x, y) = (a(x, y) + conj(a(y, x))) / 2``."""
    F = as_cmatrix(F, "F")
    if F.shape[0] != F.shape[1]:
        raise ContractError(f"F must be square, got {F.shape}")
    return hermitian_part(F)


def _sector_matrices(Fp: np.ndarray, theta: float):
    # unit normals of the two boundary rays: the signed distance of z to the
    # supporting line is sin(theta) Re z +- cos(theta) Im z
    R = hermitian_part(Fp)
    T = skew_part(Fp)
    s, c = math.sin(theta), math.cos(theta)
    return {"re": R, "upper": s * R + c * T, "lower": s * R - c * T}


def sector_verify(form: FormInH, sector: Sector, scale: float = 0.0) -> SectorCheckReport:
    """Decide ``a(u) - gamma ||j u||^2 in closure(Sigma_theta)`` for all ``u``.

    Equivalent to positive semidefiniteness of ``Re F'`` and of the two
    boundary-normal combinations ``sin(t) Re F' +- cos(t) Im F'`` where
    ``F' = F - gamma J^H J``.  ``margin`` is the smallest eigenvalue among
    the three, divided by ``max(||F||, ||F'||, scale)``.  Pass ``scale`` when
    ``F`` is a difference of larger forms, so that round-off in the
    difference is judged against the size of the forms themselves.
    """
    if form.m == 0:
        return SectorCheckReport(True, 0.0)
    Fp = form.F - sector.gamma * (form.J.conj().T @ form.J)
    scale = max(norm_est(form.F), norm_est(Fp), scale) or 1.0
    worst, witness, which = math.inf, None, None
    mats = _sector_matrices(Fp, sector.theta)
    for name, H in mats.items():
        w0 = np.linalg.eigvalsh(H)[0]
        if w0 < worst:
            worst, which = w0, name
    margin = worst / scale
    if margin >= -PSD_TOL:
        return SectorCheckReport(True, margin)
    witness = np.linalg.eigh(mats[which])[1][:, 0]
    return SectorCheckReport(False, margin, witness, which)


def semi_inner_gram(form: FormInH, gamma: float) -> np.ndarray:
    """Gram matrix of ``Re a(x, y) + (1 - gamma) <j x, j y>_H``."""
    G = real_part(form.F + (1.0 - gamma) * (form.J.conj().T @ form.J))
    if G.size:
        w = np.linalg.eigvalsh(G)
        if w[0] < -GRAM_TOL * max(abs(w[0]), abs(w[-1])):
            raise NotSectorialError(
                f"not quasi-sectorial with vertex {gamma}: Gram eigenvalue {w[0]:.3g}"
            )
    return G


def fit_minimal_angle(form: FormInH, gamma: float, tol: float = 1e-6, scale: float = 0.0) -> float:
    """Smallest angle (to ``tol``) for which :func:`sector_verify` passes.

    Raises :class:`NotSectorialError` if even ``pi/2 - tol`` fails.
    """
    lo, hi = 0.0, HALF_PI - tol
    if sector_verify(form, Sector(lo, gamma), scale).passes:
        return 0.0
    top = sector_verify(form, Sector(hi, gamma), scale)
    if not top.passes:
        raise NotSectorialError(f"not quasi-sectorial with vertex {gamma} for any angle", top)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if sector_verify(form, Sector(mid, gamma), scale).passes:
            hi = mid
        else:
            lo = mid
    return hi


def require_sectorial(form: FormInH, sector: Sector, scale: float = 0.0) -> SectorCheckReport:
    rep = sector_verify(form, sector, scale)
    if not rep.passes:
        raise NotSectorialError(
            f"form fails sector test ({rep.failing_test}) for theta={sector.theta:.6g}, "
            f"gamma={sector.gamma:.6g}: margin {rep.margin:.3g}",
            rep,
        )
    return rep


def normalize_vertex(form: FormInH, sector: Sector, target: float = 1.0):
    """Shift ``a`` by ``(target - gamma) <j., j.>`` so the vertex becomes ``target``.

    The angle is unchanged because ``a(u) - gamma ||j u||^2`` is.
    """
    return form.shifted(target - sector.gamma), Sector(sector.theta, target)
