"""Linear relations associated with quasi-sectorial forms.

The relation is ``A = A1 (+) ({0} x H0)`` with ``H1 = closure(ran j)``,
``H0 = H1^perp`` and ``A1`` an m-sectorial operator on ``H1``.  It is
reached through its resolvent ``(lam + A)^-1 = j~ (A~ + lam j~^H j~)^-1 j~^H``
on the completed space; ``A1`` is then recovered on ``H1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .completion import CompletedForm, complete
from .errors import ContractError, NotCoerciveError, ResolventSetError
from .forms import FormInH, Sector
from .linalg import column_space, hermitian_part, norm2

H1_CUT = 1e-12
ORACLE_MAX_DIM = 40


@dataclass(frozen=True, eq=False)
class LinearRelationRep:
    P1: np.ndarray
    A1: np.ndarray
    gamma: float
    basisH1: np.ndarray

    @property
    def d(self) -> int:
        return self.P1.shape[0]

    @property
    def h(self) -> int:
        return self.basisH1.shape[1]

    def operator_part(self) -> np.ndarray:
        """``A1`` as a d x d matrix acting on ``H1`` and vanishing on ``H0``."""
        B = self.basisH1
        return B @ self.A1 @ B.conj().T

    def resolvent(self, lam: float) -> np.ndarray:
        if not lam > -self.gamma:
            raise ResolventSetError(f"lambda={lam} is not > -gamma={-self.gamma}")
        B = self.basisH1
        if self.h == 0:
            return np.zeros((self.d, self.d), dtype=np.complex128)
        return B @ np.linalg.solve(lam * np.eye(self.h) + self.A1, B.conj().T)


def _shifted_resolvent(cf: CompletedForm, lam: float) -> np.ndarray:
    Jt = cf.Jtilde
    d = Jt.shape[0]
    if cf.r == 0:
        return np.zeros((d, d), dtype=np.complex128)
    A_lam = cf.Atilde + lam * (Jt.conj().T @ Jt)
    alpha = np.linalg.eigvalsh(hermitian_part(A_lam))[0]
    if not alpha > 0:
        raise NotCoerciveError(f"internal: shifted completed form not coercive (alpha={alpha:.3g})")
    return Jt @ np.linalg.solve(A_lam, Jt.conj().T)


def resolvent(form: FormInH, sector: Sector, lam: float, check: bool = True) -> np.ndarray:
    """``(lam + A)^-1`` for the relation ``A`` associated with ``(a, j)``.

    Defined for real ``lam > -gamma``.  The result annihilates ``H0`` and has
    range in ``H1``.
    """
    if not lam > -sector.gamma:
        raise ResolventSetError(f"lambda={lam} is not > -gamma={-sector.gamma}")
    return _shifted_resolvent(complete(form, sector, check=check), lam)


def associated_relation(form: FormInH, sector: Sector, check: bool = True) -> LinearRelationRep:
    """The relation ``A`` associated with ``(a, j)`` in ``(P1, A1)`` form.

    The form is shifted to vertex 0, its resolvent at ``lam = 1`` restricted to
    ``H1`` is inverted, and ``gamma`` is added back.
    """
    gamma = sector.gamma
    cf = complete(form.shifted(-gamma), Sector(sector.theta, 0.0), check=check)
    R0 = _shifted_resolvent(cf, 1.0)
    B = column_space(cf.Jtilde, H1_CUT)
    h = B.shape[1]
    R0_h = B.conj().T @ R0 @ B
    A1 = np.linalg.inv(R0_h) - (1.0 - gamma) * np.eye(h) if h else np.zeros((0, 0), dtype=np.complex128)
    return LinearRelationRep(B @ B.conj().T, A1, gamma, B)


@dataclass(frozen=True, eq=False)
class GraphOracle:
    """Orthonormal basis (2d x k) of ``{(x, y) : (x, y) in A}`` in ``H x H``."""

    basis: np.ndarray
    d: int

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def graph_oracle(form: FormInH, sector: Sector | None = None, max_dim: int = ORACLE_MAX_DIM) -> GraphOracle:
    """Brute-force graph of the associated relation, without completion.

    ``(x, y) in A`` iff some ``w in dom(a)`` has ``J w = x`` and
    ``a(w, z) = <y, J z>`` for all ``z``, i.e. ``F w = J^H y``.  Quotienting
    by the seminorm kernel does not change this set, so the solution space
    of the block system is projected to its ``(x, y)`` part directly.
    ``sector`` is accepted for interface symmetry and not needed.
    """
    m, d = form.m, form.d
    if m > max_dim or d > max_dim:
        raise ContractError(f"graph_oracle refuses dimensions m={m}, d={d} > {max_dim}")
    F, J = form.F, form.J
    Z = np.zeros
    system = np.block(
        [
            [J, -np.eye(d), Z((d, d))],
            [F, Z((m, d)), -J.conj().T],
        ]
    )
    N = scipy.linalg.null_space(system, rcond=1e-11)
    XY = N[m:, :]
    return GraphOracle(column_space(XY, 1e-9), d)


def resolvent_graph(R: np.ndarray, lam: float) -> np.ndarray:
    """Basis of ``{(R h, h - lam R h)}``, the graph of ``A`` induced by ``R = (lam + A)^-1``."""
    d = R.shape[0]
    return np.vstack([R, np.eye(d) - lam * R])


def relation_membership(rep: LinearRelationRep, x, y, tol: float = 1e-9) -> bool:
    """``(x, y) in A1 (+) ({0} x H0)``: ``x in H1`` and ``P1 y = A1 x``."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if np.linalg.norm(rep.P1 @ x - x) > tol * max(nx, 1e-300) and nx > 0:
        return False
    Ax = rep.operator_part() @ x
    scale = max(ny, norm2(rep.A1) * nx, 1e-300)
    return bool(np.linalg.norm(rep.P1 @ y - Ax) <= tol * scale)
