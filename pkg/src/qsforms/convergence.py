"""Resolvent convergence for a sequence of forms dominating a base form.

Member ``n`` is a form ``a_n`` on ``dom(a_n) = C^{m_n}`` together with an
injective inclusion ``iota_n: dom(a_n) -> dom(a)``; its map into ``H`` is
``j o iota_n``.  The hypotheses are

* ``a_n(u) - a(u)`` lies in the closed sector of angle ``theta`` (checked
  exactly by :func:`check_unif_est`), and
* every core vector ``u`` is approximated: ``inf_v ||u - v||_a^2 +
  |a_n(v) - a(v)| -> 0`` (an upper bound is :func:`approximation_defect`).

Member indices are 1-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .completion import CompletedForm, complete, extend_operator
from .errors import ContractError, ResolventSetError
from .forms import FormInH, Sector, SectorCheckReport, fit_minimal_angle, sector_verify
from .laxmilgram import CoerciveFormOnV, GalerkinPair, cea_error_bound, default_candidate
from .linalg import as_cmatrix, norm2, norm_est
from .relation import _shifted_resolvent, resolvent

INJECTIVITY_TOL = 1e-10


class FormSequenceProblem:
    """Base form ``(a, j)``, sector data and members ``(F_n, iota_n)``."""

    def __init__(self, base: FormInH, sector: Sector, members, core_basis=None):
        self.base = base
        self.sector = sector
        checked = []
        for i, (Fn, iota) in enumerate(members, start=1):
            Fn = np.asarray(Fn, dtype=np.complex128)
            iota = np.asarray(iota, dtype=np.complex128)
            if Fn.size == 0:
                Fn = np.zeros((0, 0), dtype=np.complex128)
            if iota.size == 0:
                iota = np.zeros((base.m, 0), dtype=np.complex128)
            if Fn.ndim != 2 or Fn.shape[0] != Fn.shape[1]:
                raise ContractError(f"member {i}: F_n must be square")
            if iota.shape != (base.m, Fn.shape[0]):
                raise ContractError(f"member {i}: iota must be {base.m}x{Fn.shape[0]}, got {iota.shape}")
            if iota.shape[1] and np.linalg.svd(iota, compute_uv=False)[-1] <= INJECTIVITY_TOL:
                raise ContractError(f"member {i}: iota is not injective")
            checked.append((as_cmatrix(Fn, "F_n"), iota))
        self.members = checked
        if core_basis is not None:
            core_basis = as_cmatrix(core_basis, "core_basis")
            if core_basis.shape[0] != base.m:
                raise ContractError("core_basis must have m rows")
        self.core_basis = core_basis
        self._member_cache: dict = {}

    @property
    def N(self) -> int:
        return len(self.members)

    def member(self, n: int):
        if not 1 <= n <= self.N:
            raise ContractError(f"member index {n} outside 1..{self.N}")
        return self.members[n - 1]

    def member_form(self, n: int) -> FormInH:
        Fn, iota = self.member(n)
        return FormInH(Fn, self.base.J @ iota)

    def defect_matrix(self, n: int) -> np.ndarray:
        """Matrix of ``a_n(u) - a(iota_n u)`` on ``dom(a_n)``."""
        Fn, iota = self.member(n)
        return Fn - iota.conj().T @ self.base.F @ iota

    def core(self) -> np.ndarray:
        if self.core_basis is None:
            return np.eye(self.base.m, dtype=np.complex128)
        return self.core_basis

    @cached_property
    def base_angle(self) -> float:
        return fit_minimal_angle(self.base, self.sector.gamma)

    def member_sector(self, n: int) -> Sector:
        """A sector of ``(a_n, j|)`` with the base vertex.

        Under the uniform estimate ``max(theta, base angle)`` works; otherwise
        the member's own minimal angle is fitted.
        """
        if n not in self._member_cache:
            gamma = self.sector.gamma
            cand = Sector(max(self.sector.theta, self.base_angle), gamma)
            if not sector_verify(self.member_form(n), cand).passes:
                cand = Sector(fit_minimal_angle(self.member_form(n), gamma), gamma)
            self._member_cache[n] = cand
        return self._member_cache[n]

    @cached_property
    def completed_base(self) -> CompletedForm:
        return complete(self.base, self.sector)


def check_unif_est(problem: FormSequenceProblem, n: int) -> SectorCheckReport:
    """Sector test of the defect ``a_n - a|`` with angle ``theta``, vertex 0."""
    Fn, iota = problem.member(n)
    D = problem.defect_matrix(n)
    scale = max(norm_est(Fn), norm_est(iota.conj().T @ problem.base.F @ iota))
    return sector_verify(FormInH(D, np.eye(D.shape[0])), Sector(problem.sector.theta, 0.0), scale)


def _approximation_defects(problem: FormSequenceProblem, U: np.ndarray, n: int):
    Q = problem.completed_base.Q
    _, iota = problem.member(n)
    QU = Q @ U
    if iota.shape[1] == 0:
        return np.linalg.norm(QU, axis=0) ** 2, np.zeros((0, U.shape[1]), dtype=np.complex128)
    Vstar = scipy.linalg.lstsq(Q @ iota, QU, lapack_driver="gelsy")[0]
    quad = np.linalg.norm(QU - Q @ iota @ Vstar, axis=0) ** 2
    D = problem.defect_matrix(n)
    defect = np.abs(np.einsum("ik,ik->k", Vstar.conj(), D @ Vstar))
    return quad + defect, Vstar


def approximation_defect(problem: FormSequenceProblem, u, n: int):
    """Upper bound of ``inf_v ||u - iota_n v||_a^2 + |a_n(v) - a(iota_n v)|``.

    ``v_star`` minimizes the quadratic part in the ``<.,.>_{a,j}`` seminorm;
    returns ``(value, v_star)``.
    """
    u = np.asarray(u, dtype=np.complex128).reshape(-1, 1)
    vals, V = _approximation_defects(problem, u, n)
    return float(vals[0]), V[:, 0]


@dataclass
class ConvergenceReport:
    lam: float
    records: list = field(default_factory=list)

    CSV_HEADER = ["n", "sector_margin", "defect_max", "strong_err_max", "op_norm_err", "cea_lhs", "cea_rhs"]

    def rows(self) -> list[dict]:
        return [{k: rec[k] for k in self.CSV_HEADER} for rec in self.records]

    def column(self, key: str) -> np.ndarray:
        return np.array([rec[key] for rec in self.records])

    def to_json(self) -> dict:
        out = []
        for rec in self.records:
            row = {k: rec[k] for k in self.CSV_HEADER}
            row["strong_errors"] = [float(e) for e in rec["strong_errors"]]
            row["defects"] = [float(e) for e in rec["defects"]]
            row["unif_est_passes"] = rec["unif_est_passes"]
            out.append(row)
        return {"lambda": self.lam, "records": out}


def _transfer_setup(problem: FormSequenceProblem, n: int, lam: float):
    if not lam > -problem.sector.gamma:
        raise ResolventSetError(f"lambda={lam} is not > -gamma={-problem.sector.gamma}")
    cf = problem.completed_base
    Jt = cf.Jtilde
    big = CoerciveFormOnV(cf.Atilde + lam * (Jt.conj().T @ Jt))
    _, iota = problem.member(n)
    cfn = complete(problem.member_form(n), problem.member_sector(n))
    Jtn = cfn.Jtilde
    small = CoerciveFormOnV(cfn.Atilde + lam * (Jtn.conj().T @ Jtn))
    # J_n o q_n = q o iota_n
    Jn = extend_operator(cf.Q @ iota, cfn)
    return big, small, Jn, Jt


def factorized_resolvent_difference(problem: FormSequenceProblem, n: int, lam: float = 1.0) -> np.ndarray:
    """``(lam + A_n)^-1 - (lam + A)^-1`` as ``j~ (J_n A_n^-1 J_n' - A^-1) k~``."""
    big, small, Jn, Jt = _transfer_setup(problem, n, lam)
    d = Jt.shape[0]
    if big.dim == 0:
        return np.zeros((d, d), dtype=np.complex128)
    K = Jt.conj().T
    inner = -np.linalg.solve(big.Atilde, K)
    if small.dim:
        inner = inner + Jn @ np.linalg.solve(small.Atilde, Jn.conj().T @ K)
    return Jt @ inner


def cea_transfer_bound(problem: FormSequenceProblem, n: int, eta, lam: float = 1.0, candidates=None):
    """``(lhs, rhs)`` of the Cea-type bound transported to ``V``.

    ``lhs = ||A^-1 eta - J_n A_n^-1 J_n' eta||_V^2`` for the forms shifted by
    ``lam <j., j.>``; ``rhs`` is the smallest bound over the candidate set
    (default: the projection of ``A^-1 eta`` onto ``ran J_n``).
    """
    big, small, Jn, _ = _transfer_setup(problem, n, lam)
    eta = np.asarray(eta, dtype=np.complex128)
    if big.dim == 0:
        return 0.0, 0.0
    if small.dim == 0:
        u = np.linalg.solve(big.Atilde, eta)
        val = float(np.linalg.norm(u) ** 2)
        return val, (big.M / big.alpha) ** 2 * val
    pair = GalerkinPair(big, small, Jn)
    rep = cea_error_bound(pair, eta, candidates)
    return rep.exact_sq, rep.best_abs_bound


def resolvent_errors(problem: FormSequenceProblem, lam: float = 1.0, probes=None, cea: bool = True,
                     check: bool = True) -> ConvergenceReport:
    """Strong and operator-norm resolvent errors for every member.

    ``cea_lhs``/``cea_rhs`` use ``eta = k~ x`` for the first probe.
    """
    if not lam > -problem.sector.gamma:
        raise ResolventSetError(f"lambda={lam} is not > -gamma={-problem.sector.gamma}")
    d = problem.base.d
    X = np.eye(d, 1, dtype=np.complex128) if probes is None else np.column_stack(
        [np.asarray(p, dtype=np.complex128) for p in probes])
    R = _shifted_resolvent(problem.completed_base, lam)
    RX = R @ X
    core = problem.core()
    report = ConvergenceReport(lam)
    eta = problem.completed_base.Jtilde.conj().T @ X[:, 0]
    for n in range(1, problem.N + 1):
        unif = check_unif_est(problem, n)
        Rn = resolvent(problem.member_form(n), problem.member_sector(n), lam, check=check)
        strong = np.linalg.norm(Rn @ X - RX, axis=0)
        defects, _ = _approximation_defects(problem, core, n)
        lhs = rhs = math.nan
        if cea:
            lhs, rhs = cea_transfer_bound(problem, n, eta, lam)
        report.records.append({
            "n": n,
            "sector_margin": float(unif.margin),
            "unif_est_passes": bool(unif.passes),
            "defects": defects,
            "defect_max": float(np.max(defects)) if defects.size else 0.0,
            "strong_errors": strong,
            "strong_err_max": float(np.max(strong)),
            "op_norm_err": norm2(Rn - R),
            "cea_lhs": float(lhs),
            "cea_rhs": float(rhs),
        })
    return report
