"""Degenerate strongly continuous semigroups generated by ``-A``.

``T(t) = T1(t) (+) 0`` where ``T1(t) = exp(-t A1)`` on ``H1``; in particular
``T(0) = P`` is the orthogonal projection onto ``H1`` and ``T`` vanishes on
``H0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .linalg import matrix_exp
from .relation import LinearRelationRep, associated_relation


@dataclass(frozen=True, eq=False)
class DegenerateSemigroup:
    P: np.ndarray
    A1: np.ndarray
    basisH1: np.ndarray


def from_relation(rep: LinearRelationRep) -> DegenerateSemigroup:
    return DegenerateSemigroup(rep.P1, rep.A1, rep.basisH1)


def evaluate(sg: DegenerateSemigroup, t: float) -> np.ndarray:
    """``T(t) = B exp(-t A1) B^H``."""
    if not t >= 0:
        raise ContractError(f"t must be >= 0, got {t}")
    B = sg.basisH1
    if t == 0:
        return sg.P.copy()
    if B.shape[1] == 0:
        return np.zeros_like(sg.P)
    return B @ matrix_exp(sg.A1, -t) @ B.conj().T


def chebyshev_grid(t_max: float = 1.0, points: int = 33) -> np.ndarray:
    """Chebyshev-Lobatto points on ``[0, t_max]``, endpoints included, ascending."""
    k = np.arange(points)
    return t_max * (1 - np.cos(np.pi * k / max(points - 1, 1))) / 2


class _Trajectory:
    # T(t) x for many t, reusing one eigendecomposition when A1 is diagonalizable
    def __init__(self, sg: DegenerateSemigroup):
        self.sg = sg
        self.h = sg.basisH1.shape[1]
        self.eig = None
        if self.h:
            w, V = np.linalg.eig(sg.A1)
            cond = np.linalg.cond(V)
            if cond < 1e6:
                self.eig = (w, V, np.linalg.inv(V))

    def apply(self, t: float, X: np.ndarray) -> np.ndarray:
        sg = self.sg
        if t == 0:
            return sg.P @ X
        if self.h == 0:
            return np.zeros_like(X)
        B = sg.basisH1
        c = B.conj().T @ X
        if self.eig is not None:
            w, V, Vinv = self.eig
            c = V @ (np.exp(-t * w)[:, None] * (Vinv @ c))
        else:
            c = matrix_exp(sg.A1, -t) @ c
        return B @ c


def semigroup_convergence(problem, probes, t_grid=None, check: bool = True) -> list[dict]:
    """``max_t ||T_n(t) x - T(t) x||`` over ``t_grid`` for every member and probe.

    Rows are ``{"n", "probe_index", "sup_err"}`` with ``n`` the 1-based
    member index.  The finite grid gives a lower bound for the true sup.
    """
    t_grid = chebyshev_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    X = np.column_stack([np.asarray(p, dtype=np.complex128) for p in probes])
    base = _Trajectory(from_relation(associated_relation(problem.base, problem.sector, check=check)))
    ref = [base.apply(t, X) for t in t_grid]
    rows = []
    for n in range(1, problem.N + 1):
        member = problem.member_form(n)
        traj = _Trajectory(from_relation(associated_relation(member, problem.member_sector(n), check=check)))
        sup = np.zeros(X.shape[1])
        for t, Tx in zip(t_grid, ref):
            sup = np.maximum(sup, np.linalg.norm(traj.apply(t, X) - Tx, axis=0))
        rows.extend({"n": n, "probe_index": i, "sup_err": float(s)} for i, s in enumerate(sup))
    return rows
