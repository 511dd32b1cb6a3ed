"""Canned experiments: Galerkin and Dirichlet-subdomain schedules on 1-D
meshes, rotating (pairwise transversal) subspaces and an absorption
perturbation that probes the uniform sector estimate.

For the finite-element experiments ``H`` is the coordinate space of the
interior hats orthonormalized with respect to the mass matrix: ``J`` is the
upper Cholesky factor, so ``||J u||`` is the L2 norm of the interpolant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convergence import FormSequenceProblem
from .errors import ContractError
from .forms import FormInH, Sector
from .io import SchemaError, _get
from .linalg import matrix_exp

MAX_DIM = 2048
KINDS = ("galerkin-1d", "dirichlet-1d", "rotating-subspaces", "absorption")


@dataclass(frozen=True, eq=False)
class Mesh1D:
    """Nodes ``x_0 < ... < x_{n+1}``; the two end nodes carry the Dirichlet condition."""

    nodes: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise ContractError("a mesh needs at least 2 nodes")
        if not np.all(np.diff(x) > 0):
            raise ContractError("mesh nodes must be strictly increasing")
        object.__setattr__(self, "nodes", x)

    @classmethod
    def uniform(cls, n_interior: int, length: float = 1.0) -> "Mesh1D":
        return cls(np.linspace(0.0, length, n_interior + 2))

    @property
    def n_interior(self) -> int:
        return self.nodes.size - 2

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    @property
    def boundary(self) -> np.ndarray:
        flags = np.zeros(self.nodes.size, dtype=bool)
        flags[[0, -1]] = True
        return flags


def stiffness_mass(mesh: Mesh1D):
    """P1 stiffness and mass matrices on the interior hats.

    On a uniform mesh with width ``h``: stiffness ``tridiag(-1, 2, -1)/h`` and
    mass ``h tridiag(1, 4, 1)/6``.
    """
    h = np.diff(mesh.nodes)
    hl, hr = h[:-1], h[1:]
    n = mesh.n_interior
    K = np.diag(1 / hl + 1 / hr)
    M = np.diag((hl + hr) / 3)
    if n > 1:
        off = hr[:-1]
        K += np.diag(-1 / off, 1) + np.diag(-1 / off, -1)
        M += np.diag(off / 6, 1) + np.diag(off / 6, -1)
    return K, M


def mass_factor(M) -> np.ndarray:
    """``J`` with ``J^H J = M``."""
    return np.linalg.cholesky(M).conj().T


def assemble_dirichlet_1d(mesh: Mesh1D) -> FormInH:
    """Dirichlet form ``int f' conj(g')`` on interior hats, mapped into mass-orthonormal ``H``."""
    if mesh.n_interior > MAX_DIM:
        raise ContractError(f"mesh exceeds the dense size guard {MAX_DIM}")
    K, M = stiffness_mass(mesh)
    return FormInH(K.astype(np.complex128), mass_factor(M).astype(np.complex128))


def smallest_dirichlet_eigenvalue(mesh: Mesh1D) -> float:
    import scipy.linalg

    K, M = stiffness_mass(mesh)
    return float(scipy.linalg.eigh(K, M, eigvals_only=True, subset_by_index=[0, 0])[0])


def hats_inside(mesh: Mesh1D, lo: float, hi: float, tol: float = 1e-12) -> np.ndarray:
    """Indices of interior hats whose closed support lies in the open ``(lo, hi)``."""
    x = mesh.nodes
    scale = tol * (x[-1] - x[0])
    left, right = x[:-2], x[2:]
    return np.nonzero((left > lo + scale) & (right < hi - scale))[0]


def _pad_rows(J: np.ndarray, extra: int) -> np.ndarray:
    if not extra:
        return J
    return np.vstack([J, np.zeros((extra, J.shape[1]), dtype=J.dtype)])


def dirichlet_subdomain_problem(fine: Mesh1D, schedule, h0_dim: int = 0, gamma: float = 0.0) -> FormSequenceProblem:
    """Members are the restrictions of the Dirichlet form to hats supported in ``Omega_k``.

    ``h0_dim`` appends that many coordinates to ``H`` orthogonal to ``ran j``
    (a non-densely defined base form).
    """
    base = assemble_dirichlet_1d(fine)
    base = FormInH(base.F, _pad_rows(base.J, h0_dim))
    a, b = fine.nodes[0], fine.nodes[-1]
    members = []
    for lo, hi in schedule:
        if lo < a or hi > b:
            raise ContractError(f"sub-interval ({lo}, {hi}) is not inside ({a}, {b})")
        idx = hats_inside(fine, lo, hi)
        iota = np.zeros((fine.n_interior, idx.size), dtype=np.complex128)
        iota[idx, np.arange(idx.size)] = 1.0
        members.append((iota.T @ base.F @ iota, iota))
    return FormSequenceProblem(base, Sector(0.0, gamma), members)


def dyadic_schedule(k_max: int, length: float = 1.0):
    """``Omega_k = (L/k, L - L/k)`` for ``k = 2, 4, 8, ..., k_max``."""
    ks = []
    k = 2
    while k <= k_max:
        ks.append(k)
        k *= 2
    return ks, [(length / k, length - length / k) for k in ks]


def prolongation(coarse: Mesh1D, fine: Mesh1D) -> np.ndarray:
    """Coarse interior hats evaluated at fine interior nodes (exact for nested meshes)."""
    P = np.empty((fine.n_interior, coarse.n_interior))
    for i in range(coarse.n_interior):
        e = np.zeros(coarse.nodes.size)
        e[i + 1] = 1.0
        P[:, i] = np.interp(fine.interior, coarse.nodes, e)
    return P


def galerkin_problem(levels: int, N: int, gamma: float = 0.0) -> FormSequenceProblem:
    """Nested Galerkin spaces: ``2^n - 1`` coarse hats inside ``2^levels - 1`` fine hats."""
    if N > levels:
        raise ContractError("N must not exceed the number of mesh levels")
    fine = Mesh1D.uniform(2**levels - 1)
    base = assemble_dirichlet_1d(fine)
    members = []
    for n in range(1, N + 1):
        iota = prolongation(Mesh1D.uniform(2**n - 1), fine).astype(np.complex128)
        members.append((iota.T @ base.F @ iota, iota))
    return FormSequenceProblem(base, Sector(0.0, gamma), members)


def _rotating_base(d: int, rng: np.random.Generator, skew: float):
    mu = (np.pi * np.arange(1, d + 1)) ** 2
    W = rng.standard_normal((d, d))
    W = (W + W.T) / 2
    W /= np.linalg.norm(W, 2)
    root = np.sqrt(mu)
    F = root[:, None] * (np.eye(d) + 1j * skew * W) * root[None, :]
    return F


def rotating_subspace_problem(d: int, N: int, seed: int = 0, magnitude: float = 1.0,
                              skew: float = 0.5) -> FormSequenceProblem:
    """Galerkin restrictions to dimension-growing, rotated coordinate subspaces.

    The base form on ``H = C^d`` (``j`` the identity) is
    ``D^(1/2) (I + i*skew*W) D^(1/2)`` with ``D = diag((pi k)^2)`` and ``W`` a
    seeded real symmetric matrix of unit norm.  Member ``n`` is spanned by
    ``exp(X magnitude/n)`` applied to the first ``min(n + 1, d // 2)`` unit
    vectors, for one seeded anti-Hermitian ``X`` of unit norm.  Dimensions
    stay at most ``d/2``, so two members generically intersect only in
    ``{0}``.  The core is spanned by the first ``d // 4`` unit vectors.
    """
    if d < 2:
        raise ContractError("d must be >= 2")
    rng = np.random.default_rng(seed)
    F = _rotating_base(d, rng, skew)
    base = FormInH(F, np.eye(d, dtype=np.complex128))
    X = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    X = (X - X.conj().T) / 2
    X /= np.linalg.norm(X, 2)
    members = []
    for n in range(1, N + 1):
        k = min(n + 1, d // 2)
        iota = matrix_exp(X, magnitude / n)[:, :k]
        members.append((iota.conj().T @ F @ iota, iota))
    core = np.eye(d, max(d // 4, 1), dtype=np.complex128)
    return FormSequenceProblem(base, Sector(math.atan(skew), 0.0), members, core)


def absorption_problem(fine: Mesh1D, theta0: float, eps_schedule, theta: float = math.pi / 4,
                       gamma: float = 0.0) -> FormSequenceProblem:
    """``a_n = a + eps_n e^{i theta0} <j., j.>`` on the full domain.

    The defect lies on the ray ``arg = theta0``, so the uniform estimate with
    angle ``theta`` holds iff ``theta0 <= theta``.
    """
    if not 0 <= theta0 < math.pi / 2:
        raise ContractError("theta0 must lie in [0, pi/2)")
    base = assemble_dirichlet_1d(fine)
    Mmat = base.J.conj().T @ base.J
    eye = np.eye(base.m, dtype=np.complex128)
    members = [(base.F + eps * np.exp(1j * theta0) * Mmat, eye) for eps in eps_schedule]
    return FormSequenceProblem(base, Sector(theta, gamma), members)


def principal_angle_matrix(problem: FormSequenceProblem) -> np.ndarray:
    """Smallest principal angle between ``ran iota_n`` and ``ran iota_m`` (n != m)."""
    from .linalg import principal_angles

    N = problem.N
    out = np.full((N, N), np.nan)
    bases = [np.linalg.qr(iota)[0] if iota.shape[1] else iota for _, iota in problem.members]
    for i in range(N):
        for k in range(i + 1, N):
            ang = principal_angles(bases[i], bases[k])
            out[i, k] = out[k, i] = ang.min() if ang.size else np.pi / 2
    return out


def intersection_basis(bases, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of the intersection of the column spans of ``bases``."""
    import scipy.linalg

    cur = scipy.linalg.orth(bases[0])
    for B in bases[1:]:
        B = scipy.linalg.orth(B)
        if cur.shape[1] == 0 or B.shape[1] == 0:
            return cur[:, :0]
        # x = cur a = B b  <=>  [cur, -B] (a, b) = 0
        N = scipy.linalg.null_space(np.hstack([cur, -B]), rcond=tol)
        cur = scipy.linalg.orth(cur @ N[: cur.shape[1]]) if N.size else cur[:, :0]
    return cur


def legacy_core_basis(problem: FormSequenceProblem) -> np.ndarray:
    """Span of the vectors lying in (almost) every member domain.

    The older sufficient condition asks that ``union_k intersect_{n >= k}
    dom(a_n)`` (intersected with ``{u : a_n(u) -> a(u)}``) be a core.  On a
    finite schedule the tails are read as ``k <= n <= N`` with at least two
    members; they grow with ``k``, so the union is the last tail
    ``ran iota_{N-1} cap ran iota_N``.  For restrictions of ``a`` the limit
    condition holds trivially on that set.
    """
    if problem.N < 2:
        raise ContractError("need at least two members")
    return intersection_basis([problem.members[-2][1], problem.members[-1][1]])


def legacy_core_condition(problem: FormSequenceProblem, tol: float = 1e-8) -> bool:
    """Does the legacy set contain the core (i.e. is it a core in finite dimension)?"""
    L = legacy_core_basis(problem)
    C = problem.core()
    resid = C - L @ (L.conj().T @ C)
    return bool(np.linalg.norm(resid) <= tol * max(np.linalg.norm(C), 1e-300))


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    d: int
    N: int
    lam: float = 1.0
    theta: float = 0.0
    gamma: float = 0.0
    theta0: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError("kind", f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if not 1 <= self.d <= MAX_DIM:
            raise SchemaError("d", f"must lie in 1..{MAX_DIM}")
        if self.N < 1:
            raise SchemaError("N", "must be >= 1")
        if not 0 <= self.theta < math.pi / 2:
            raise SchemaError("theta", "must lie in [0, pi/2)")
        if self.kind == "absorption" and self.theta0 is None:
            raise SchemaError("theta0", "required for kind 'absorption'")

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentSpec":
        kind = _get(obj, "kind", str)
        if not isinstance(kind, str):
            raise SchemaError("kind", "expected a string")
        theta0 = obj.get("theta0")
        if theta0 is not None:
            theta0 = _get(obj, "theta0", float)
        return cls(
            kind=kind,
            d=_get(obj, "d", int),
            N=_get(obj, "N", int),
            lam=_get(obj, "lambda", float),
            theta=_get(obj, "theta", float),
            gamma=_get(obj, "gamma", float),
            theta0=theta0,
            seed=_get(obj, "seed", int),
        )

    def to_json(self) -> dict:
        out = {"kind": self.kind, "d": self.d, "N": self.N, "lambda": self.lam,
               "theta": self.theta, "gamma": self.gamma, "seed": self.seed}
        if self.theta0 is not None:
            out["theta0"] = self.theta0
        return out


def build(spec: ExperimentSpec, n_probes: int = 5):
    """``(problem, probes)`` for an experiment spec; probes are seeded unit vectors in ``H``."""
    if spec.kind == "dirichlet-1d":
        _, sched = dyadic_schedule(2**spec.N)
        problem = dirichlet_subdomain_problem(Mesh1D.uniform(spec.d), sched, gamma=spec.gamma)
    elif spec.kind == "galerkin-1d":
        levels = int(round(math.log2(spec.d + 1)))
        if 2**levels - 1 != spec.d:
            raise SchemaError("d", "galerkin-1d needs d = 2^L - 1")
        problem = galerkin_problem(levels, spec.N, gamma=spec.gamma)
    elif spec.kind == "rotating-subspaces":
        problem = rotating_subspace_problem(spec.d, spec.N, spec.seed)
    else:
        eps = [1.0 / n for n in range(1, spec.N + 1)]
        problem = absorption_problem(Mesh1D.uniform(spec.d), spec.theta0, eps, theta=spec.theta, gamma=spec.gamma)
    return problem, seeded_probes(problem.base.d, n_probes, spec.seed)


def seeded_probes(d: int, count: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng([seed, 1])
    out = []
    for _ in range(count):
        x = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        out.append(x / np.linalg.norm(x))
    return out
