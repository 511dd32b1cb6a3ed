"""Finite-dimensional quasi-sectorial forms, their linear relations and
resolvent/semigroup convergence for sequences of forms dominating a fixed one.

Convention: a sesquilinear form is stored as a square matrix ``F`` with
``a(x, y) = y^H F x``, i.e. linear in the first argument and conjugate-linear
in the second.  The quadratic form is ``a(u) = a(u, u)``.
"""

from .completion import CompletedForm, complete, extend_operator
from .convergence import (
    ConvergenceReport,
    FormSequenceProblem,
    approximation_defect,
    cea_transfer_bound,
    check_unif_est,
    resolvent_errors,
)
from .forms import (
    FormInH,
    Sector,
    SectorCheckReport,
    fit_minimal_angle,
    real_part,
    sector_verify,
    semi_inner_gram,
    sigma_membership,
)
from .laxmilgram import (
    CoerciveFormOnV,
    GalerkinPair,
    bounds,
    cea_error_bound,
    dual_map,
    galerkin_solution,
    lm_solve,
    sector_cauchy_schwarz_check,
)
from .relation import (
    GraphOracle,
    LinearRelationRep,
    associated_relation,
    graph_oracle,
    relation_membership,
    resolvent,
)
from .semigroup import DegenerateSemigroup, evaluate, from_relation, semigroup_convergence

__version__ = "0.1.0"
