"""Command-line front end.

Exit codes: 0 success, 2 a hypothesis check failed (no convergence claim is
made), 1 any other error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .completion import complete
from .convergence import ConvergenceReport, FormSequenceProblem, cea_transfer_bound, check_unif_est, resolvent_errors
from .errors import QSFormsError
from .forms import FormInH, Sector, sector_verify
from .io import SchemaError, dumps, form_from_json, load_json, matrix_to_json, problem_from_json, vector_to_json, write_csv
from .relation import resolvent
from .semigroup import chebyshev_grid, semigroup_convergence

log = logging.getLogger("qsforms")

EXIT_OK, EXIT_ERROR, EXIT_HYPOTHESIS = 0, 1, 2


class HypothesisViolation(Exception):
    def __init__(self, payload):
        super().__init__("hypothesis violated")
        self.payload = payload


def _common(p: argparse.ArgumentParser):
    p.add_argument("--out", type=Path, help="write the result here instead of stdout")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--quiet", action="store_true")


def _sector_args(p):
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsforms", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("check", help="sector test of a form, or the uniform estimate of a sequence")
    p.add_argument("file", nargs="?", type=Path)
    p.add_argument("--spec", type=Path)
    _sector_args(p)
    _common(p)

    p = sub.add_parser("complete", help="quotient completion of a form")
    p.add_argument("file", type=Path)
    _sector_args(p)
    _common(p)

    p = sub.add_parser("resolvent", help="(lambda + A)^-1 of the associated relation")
    p.add_argument("file", type=Path)
    _sector_args(p)
    _common(p)

    p = sub.add_parser("cea", help="transported Cea bound for each member of a sequence")
    p.add_argument("--spec", type=Path, required=True)
    _common(p)

    p = sub.add_parser("converge", help="resolvent convergence report for a sequence")
    p.add_argument("--spec", type=Path, required=True)
    p.add_argument("--probes", type=int, default=5)
    _common(p)

    p = sub.add_parser("semigroup", help="semigroup sup-errors over a time grid")
    p.add_argument("--spec", type=Path, required=True)
    p.add_argument("--t-max", type=float, default=1.0)
    p.add_argument("--t-points", type=int, default=33)
    p.add_argument("--probes", type=int, default=5)
    _common(p)

    p = sub.add_parser("demo", help="run a canned experiment")
    p.add_argument("kind", choices=ex.KINDS)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--k-max", type=int, default=None, help="dirichlet-1d: largest k (power of two)")
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--theta0", type=float, default=None)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--probes", type=int, default=5)
    _common(p)
    return parser


def _load_form(path: Path, args):
    doc = load_json(path)
    form = form_from_json(doc)
    theta = args.theta if args.theta is not None else doc.get("theta", 0.0)
    gamma = args.gamma if args.gamma is not None else doc.get("gamma", 0.0)
    try:
        sector = Sector(float(theta), float(gamma))
    except (QSFormsError, TypeError, ValueError) as exc:
        raise SchemaError("theta", str(exc)) from None
    return form, sector


def _load_sequence(path: Path, args, n_probes: int = 5):
    """A sequence problem from either an experiment spec or an explicit problem document."""
    doc = load_json(path)
    if isinstance(doc, dict) and "kind" in doc:
        spec = ex.ExperimentSpec.from_json(doc)
        if args.seed is not None:
            spec = ex.ExperimentSpec(**{**spec.__dict__, "seed": args.seed})
        problem, probes = ex.build(spec, n_probes)
        lam = spec.lam
    else:
        problem = problem_from_json(doc)
        seed = 0 if args.seed is None else args.seed
        probes = ex.seeded_probes(problem.base.d, n_probes, seed)
        lam = 1.0
    if args.lam is not None:
        lam = args.lam
    return problem, probes, lam


def _require_hypotheses(problem: FormSequenceProblem):
    rows = []
    for n in range(1, problem.N + 1):
        rep = check_unif_est(problem, n)
        rows.append({"n": n, "passes": rep.passes, "margin": rep.margin,
                     "witness": None if rep.witness is None else vector_to_json(rep.witness)})
    if not all(r["passes"] for r in rows):
        raise HypothesisViolation({"hypothesis": "uniform sector estimate", "theta": problem.sector.theta,
                                   "members": rows})
    return rows


def _emit(args, payload, rows=None, header=None):
    fmt = args.fmt or ("csv" if rows is not None else "json")
    text = write_csv(rows, header) if fmt == "csv" and rows is not None else dumps(payload) + "\n"
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


def _report_rows(report: ConvergenceReport):
    return report.rows(), ConvergenceReport.CSV_HEADER


def cmd_check(args):
    if args.spec is not None:
        problem, _, _ = _load_sequence(args.spec, args)
        rows = _require_hypotheses(problem)
        _emit(args, {"hypothesis": "uniform sector estimate", "members": rows})
        return EXIT_OK
    if args.file is None:
        raise SchemaError("file", "a form file or --spec is required")
    form, sector = _load_form(args.file, args)
    rep = sector_verify(form, sector)
    payload = {"passes": rep.passes, "margin": rep.margin, "theta": sector.theta, "gamma": sector.gamma,
               "failing_test": rep.failing_test,
               "witness": None if rep.witness is None else vector_to_json(rep.witness)}
    if rep.witness is not None:
        z = form.value(rep.witness) - sector.gamma * np.linalg.norm(form.J @ rep.witness) ** 2
        payload["witness_value"] = [z.real, z.imag]
    if not rep.passes:
        raise HypothesisViolation(payload)
    _emit(args, payload)
    return EXIT_OK


def cmd_complete(args):
    form, sector = _load_form(args.file, args)
    _emit(args, complete(form, sector).to_json())
    return EXIT_OK


def cmd_resolvent(args):
    form, sector = _load_form(args.file, args)
    lam = 1.0 if args.lam is None else args.lam
    R = resolvent(form, sector, lam)
    if (args.fmt or "json") == "csv":
        rows = [{"row": i, "col": k, "re": float(R[i, k].real), "im": float(R[i, k].imag)}
                for i in range(R.shape[0]) for k in range(R.shape[1])]
        _emit(args, None, rows, ["row", "col", "re", "im"])
    else:
        _emit(args, {"lambda": lam, "d": R.shape[0], "R": matrix_to_json(R)})
    return EXIT_OK


def cmd_cea(args):
    problem, probes, lam = _load_sequence(args.spec, args)
    _require_hypotheses(problem)
    eta = problem.completed_base.Jtilde.conj().T @ probes[0]
    rows = []
    for n in range(1, problem.N + 1):
        lhs, rhs = cea_transfer_bound(problem, n, eta, lam)
        rows.append({"n": n, "lhs": lhs, "rhs": rhs, "holds": bool(lhs <= rhs + 1e-9 * max(rhs, 1.0))})
    _emit(args, {"lambda": lam, "records": rows}, rows, ["n", "lhs", "rhs", "holds"])
    return EXIT_OK


def _converge(args, problem, probes, lam):
    _require_hypotheses(problem)
    report = resolvent_errors(problem, lam, probes)
    rows, header = _report_rows(report)
    _emit(args, report.to_json(), rows, header)
    return EXIT_OK


def cmd_converge(args):
    problem, probes, lam = _load_sequence(args.spec, args, args.probes)
    return _converge(args, problem, probes, lam)


def cmd_semigroup(args):
    problem, probes, _ = _load_sequence(args.spec, args, args.probes)
    _require_hypotheses(problem)
    rows = semigroup_convergence(problem, probes, chebyshev_grid(args.t_max, args.t_points))
    _emit(args, {"t_max": args.t_max, "t_points": args.t_points, "records": rows}, rows,
          ["n", "probe_index", "sup_err"])
    return EXIT_OK


DEMO_DEFAULTS = {
    "dirichlet-1d": {"d": 127, "theta": 0.0},
    "galerkin-1d": {"d": 127, "N": 6, "theta": 0.0},
    "rotating-subspaces": {"d": 48, "N": 24, "theta": math.atan(0.5)},
    "absorption": {"d": 127, "N": 16, "theta": math.pi / 4, "theta0": math.pi / 8},
}


def cmd_demo(args):
    dflt = DEMO_DEFAULTS[args.kind]
    d = args.d if args.d is not None else dflt["d"]
    if args.kind == "dirichlet-1d":
        k_max = args.k_max if args.k_max is not None else 16
        N = int(round(math.log2(k_max)))
        if 2**N != k_max:
            raise SchemaError("k-max", "must be a power of two")
    else:
        N = args.N if args.N is not None else dflt["N"]
    spec = ex.ExperimentSpec(
        kind=args.kind, d=d, N=N, lam=1.0 if args.lam is None else args.lam,
        theta=args.theta if args.theta is not None else dflt["theta"], gamma=args.gamma,
        theta0=args.theta0 if args.theta0 is not None else dflt.get("theta0"),
        seed=0 if args.seed is None else args.seed,
    )
    problem, probes = ex.build(spec, args.probes)
    return _converge(args, problem, probes, spec.lam)


COMMANDS = {
    "check": cmd_check,
    "complete": cmd_complete,
    "resolvent": cmd_resolvent,
    "cea": cmd_cea,
    "converge": cmd_converge,
    "semigroup": cmd_semigroup,
    "demo": cmd_demo,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.cmd](args)
    except HypothesisViolation as hv:
        sys.stdout.write(dumps(hv.payload) + "\n")
        log.warning("hypothesis violated; no convergence claim is made")
        return EXIT_HYPOTHESIS
    except SchemaError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_ERROR
    except (QSFormsError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
