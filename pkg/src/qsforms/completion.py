"""Completion of ``(dom(a), <.,.>_{a,j})`` realized as a Gram quotient.

``V = C^r`` carries the standard inner product; ``q`` is the matrix ``Q``
(r x m) with ``Q^H Q = G``.  The kernel of the seminorm is dropped with a
relative eigenvalue cut, so exact and numerically tiny null directions are
treated alike.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, WellDefinednessError
from .forms import FormInH, Sector, require_sectorial, semi_inner_gram
from .linalg import norm_est, nullspace_split

NULL_CUT = 1e-12
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class CompletedForm:
    Q: np.ndarray
    Qpinv: np.ndarray
    Atilde: np.ndarray
    Jtilde: np.ndarray
    gamma: float
    residual_form: float
    residual_j: float

    @property
    def r(self) -> int:
        return self.Q.shape[0]

    @property
    def m(self) -> int:
        return self.Q.shape[1]

    @property
    def d(self) -> int:
        return self.Jtilde.shape[0]

    def to_json(self) -> dict:
        from .io import matrix_to_json

        return {
            "r": self.r,
            "m": self.m,
            "d": self.d,
            "gamma": self.gamma,
            "Q": matrix_to_json(self.Q),
            "Atilde": matrix_to_json(self.Atilde),
            "Jtilde": matrix_to_json(self.Jtilde),
            "residual_form": self.residual_form,
            "residual_j": self.residual_j,
        }


def complete(form: FormInH, sector: Sector, check: bool = True) -> CompletedForm:
    """Build ``(V, q)`` and the extensions of ``a`` and ``j`` to ``V``.

    With ``check=False`` the sector test is skipped; the Gram matrix must
    still be PSD for the given vertex.
    """
    if check:
        require_sectorial(form, sector)
    G = semi_inner_gram(form, sector.gamma)
    U, lam = nullspace_split(G, NULL_CUT, psd_tol=1e-8)
    root = np.sqrt(lam)
    Q = root[:, None] * U.conj().T
    Qpinv = U / root[None, :]
    Atilde = Qpinv.conj().T @ form.F @ Qpinv
    Jtilde = form.J @ Qpinv
    res_F = norm_est(form.F - Q.conj().T @ Atilde @ Q)
    res_J = norm_est(form.J - Jtilde @ Q)
    if res_F > RESIDUAL_TOL * norm_est(form.F) or res_J > RESIDUAL_TOL * norm_est(form.J):
        raise WellDefinednessError(
            "form/j not well-defined on quotient",
            {"residual_form": res_F, "residual_j": res_J},
        )
    return CompletedForm(Q, Qpinv, Atilde, Jtilde, sector.gamma, res_F, res_J)


def extend_operator(L, completed: CompletedForm) -> np.ndarray:
    """Continuous extension ``L~`` of ``L: dom(a) -> C^w`` to ``V`` (``L~ Q = L``)."""
    L = np.asarray(L, dtype=np.complex128)
    if L.ndim != 2 or L.shape[1] != completed.m:
        raise ContractError(f"L must have {completed.m} columns, got shape {L.shape}")
    Lt = L @ completed.Qpinv
    res = norm_est(L - Lt @ completed.Q)
    if res > RESIDUAL_TOL * norm_est(L):
        raise WellDefinednessError("not seminorm-continuous", {"residual": res})
    return Lt
