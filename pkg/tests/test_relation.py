import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsforms import FormInH, Sector, associated_relation, graph_oracle, resolvent
from qsforms.errors import ContractError, ResolventSetError
from qsforms.forms import normalize_vertex
from qsforms.linalg import norm2, principal_angles
from qsforms.relation import relation_membership, resolvent_graph

from instances import cnormal, random_quasi_sectorial

# H = C^2, V = C, j(u) = (u, 0), a(u, v) = u conj(v)
EMBED = FormInH([[1.0]], [[1.0], [0.0]])


def test_embedding_example():
    R = resolvent(EMBED, Sector(0.0, 0.0), 1.0)
    np.testing.assert_allclose(R, np.diag([0.5, 0.0]), atol=1e-15)
    rep = associated_relation(EMBED, Sector(0.0, 0.0))
    assert rep.h == 1
    np.testing.assert_allclose(rep.P1, np.diag([1.0, 0.0]), atol=1e-15)
    np.testing.assert_allclose(rep.A1, [[1.0]], atol=1e-14)
    # the multivalued part is {0} x H0
    assert relation_membership(rep, [0, 0], [0, 1])
    assert relation_membership(rep, [2, 0], [2, 7])
    assert not relation_membership(rep, [0, 1], [0, 0])
    assert not relation_membership(rep, [1, 0], [2, 0])


def test_identity_resolvent():
    R = resolvent(FormInH(np.eye(3), np.eye(3)), Sector(0.0, 0.0), 1.0)
    np.testing.assert_allclose(R, 0.5 * np.eye(3), atol=1e-15)


def test_resolvent_set():
    with pytest.raises(ResolventSetError):
        resolvent(EMBED, Sector(0.0, 0.5), -0.5)
    rep = associated_relation(EMBED, Sector(0.0, 0.0))
    with pytest.raises(ResolventSetError):
        rep.resolvent(-1.0)


def test_graph_oracle_embedding():
    g = graph_oracle(EMBED)
    # pairs ((u, 0), (u, s)) for u, s in C
    assert g.dim == 2
    ref = np.array([[1, 0], [0, 0], [1, 0], [0, 1]], dtype=complex)
    assert principal_angles(g.basis, ref).max() <= 1e-12


def test_graph_oracle_refuses_large():
    with pytest.raises(ContractError):
        graph_oracle(FormInH(np.eye(41), np.eye(41)))


def _normalized(seed):
    rng = np.random.default_rng(seed)
    form, sector = random_quasi_sectorial(rng)
    return normalize_vertex(form, sector, 1.0)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_graph_matches_oracle(seed):
    form, sector = _normalized(seed)
    R = resolvent(form, sector, 1.0)
    oracle = graph_oracle(form)
    G = resolvent_graph(R, 1.0)
    assert oracle.dim == form.d
    assert principal_angles(G, oracle.basis).max() <= 1e-8


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_resolvent_identity(seed):
    form, sector = _normalized(seed)
    lams = (0.5, 1.0, 2.0)
    Rs = {lam: resolvent(form, sector, lam) for lam in lams}
    for lam in lams:
        for mu in lams:
            lhs = Rs[lam] - Rs[mu]
            rhs = (mu - lam) * Rs[lam] @ Rs[mu]
            scale = max(norm2(Rs[lam]), norm2(Rs[mu])) ** 2
            assert norm2(lhs - rhs) <= 1e-9 * max(scale, 1e-300)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_relation_rep_matches_resolvent(seed):
    form, sector = _normalized(seed)
    rep = associated_relation(form, sector)
    R = resolvent(form, sector, 1.0)
    assert norm2(rep.resolvent(1.0) - R) <= 1e-9 * max(norm2(R), 1e-300)
    # graph pairs from the resolvent are members of the relation
    rng = np.random.default_rng(seed)
    h = cnormal(rng, form.d)
    assert relation_membership(rep, R @ h, h - R @ h, tol=1e-7)
