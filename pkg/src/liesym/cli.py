"""Command-line front end.

Exit codes: 0 verified/constructed, 1 refuted, 2 undecided, 3 usage error.
Expressions use the input DSL; PDEs and algebras can also be drawn from the
case catalog with ``case:<id>``.  The audit seed comes from --seed or the
LIESYM_SEED environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from typing import Dict, List, Optional

from .expr import ExprError, SymbolTable, rat, substitute, sym
from . import dsl
from .jets import VectorField, dcr_symbols
from .pde import DCRInstance, EvolutionPDE, build_dcr
from .symmetry import Verdict, find_symmetries, is_symmetry
from .algebra import LieAlgebra, check_closure, identify, structure_constants
from .optimal import (DEFAULT_SAMPLES, DEFAULT_SEED, ParamSpec,
                      SubalgebraRep, construct_optimal_system,
                      verify_candidate_system)
from .reduction import ClosedFormSolution, reduce_pde, transform_solution, \
    verify_solution
from .equivalence import are_equivalent, normalize_coefficient, remove_drift
from .catalog import load_catalog, run_regression
from .report import Report

USAGE_ERROR = 3


class UsageError(Exception):
    pass


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("LIESYM_SEED")
    return int(env) if env else DEFAULT_SEED


def _parse_params(spec: Optional[str]) -> Dict[str, str]:
    out: Dict[str, str] = {}
    if not spec:
        return out
    for part in spec.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise UsageError(f"--params entries need name=value, got {part!r}")
        name, value = part.split("=", 1)
        out[name.strip()] = value.strip()
    return out


def _table_with(params: Dict[str, str]) -> SymbolTable:
    table = dcr_symbols()
    for name in params:
        if not table.declared(name):
            table.parameter(name)
    return table


def _resolve_pde(args, params: Dict[str, str]):
    """PDE from 'case:<id>' or a DSL string; returns (pde, table)."""
    text = args.pde
    table = _table_with(params)
    bindings = {k: dsl.parse(v, table) for k, v in params.items()}
    if text.startswith("case:"):
        catalog = load_catalog(getattr(args, "catalog", None))
        cid = text[5:]
        if cid not in catalog:
            raise UsageError(f"unknown case id {cid!r}")
        case = catalog[cid]
        inst = case.instance()
        if bindings:
            inst = inst.instantiate(bindings)
        return build_dcr(inst, table), table
    rhs = dsl.parse_pde(text, table)
    if bindings:
        rhs = substitute(rhs, bindings)
    return EvolutionPDE(rhs=rhs, table=table), table


def _resolve_algebra(args, params: Dict[str, str]) -> LieAlgebra:
    spec = args.algebra
    table = _table_with(params)
    bindings = {k: dsl.parse(v, table) for k, v in params.items()}
    if spec.startswith("case:"):
        catalog = load_catalog(getattr(args, "catalog", None))
        cid = spec[5:]
        if cid not in catalog:
            raise UsageError(f"unknown case id {cid!r}")
        fields = catalog[cid].fields(bindings={k: str(v)
                                               for k, v in params.items()})
        return structure_constants(fields)
    fields = [dsl.parse_vector_field(part.strip(), table)
              for part in spec.split(";") if part.strip()]
    if bindings:
        from .expr import substitute as sub

        fields = [VectorField(sub(f.xi_t, bindings), sub(f.xi_x, bindings),
                              sub(f.eta, bindings)) for f in fields]
    return structure_constants(fields)


def _parse_instance(spec: str, table: SymbolTable) -> DCRInstance:
    vals = {}
    for part in spec.split(","):
        if not part.strip():
            continue
        name, value = part.split("=", 1)
        vals[name.strip()] = dsl.parse(value.strip(), table)
    defaults = {"m": sym("m"), "p": sym("p"), "b0": rat(0), "b1": rat(0),
                "c0": rat(0), "c1": rat(0)}
    defaults.update(vals)
    return DCRInstance(**defaults)


def _load_candidates(path: str, dim: int) -> List[SubalgebraRep]:
    """Candidate file: one representative per line, comma-separated DSL
    coefficients over the algebra basis; an optional '| name kind' suffix
    declares a free parameter (kind: any, nonzero, positive)."""
    out = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            param_spec = None
            if "|" in line:
                line, pdecl = line.split("|", 1)
                bits = pdecl.split()
                if not bits:
                    raise UsageError("empty parameter declaration")
                name = bits[0]
                kind = bits[1] if len(bits) > 1 else "any"
                param_spec = ParamSpec(name, kind)
            table = SymbolTable()
            if param_spec:
                table.parameter(param_spec.name)
            coeffs = [dsl.parse(c.strip(), table)
                      for c in line.split(",")]
            if len(coeffs) != dim:
                raise UsageError(
                    f"candidate needs {dim} coefficients, got {len(coeffs)}")
            out.append(SubalgebraRep(tuple(coeffs),
                                     (param_spec,) if param_spec else ()))
    return out


def _verdict_exit(verdict: str) -> int:
    good = ("symmetry", "solution", "equivalent", "verified", "constructed",
            "conjugate", "pass", "clean")
    bad = ("not-symmetry", "not-solution", "not-equivalent", "refuted",
           "not-conjugate", "fail", "flagged")
    if verdict in good:
        return 0
    if verdict in bad:
        return 1
    return 2


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_verify_symmetry(args) -> Report:
    params = _parse_params(args.params)
    pde, table = _resolve_pde(args, params)
    field = dsl.parse_vector_field(args.field, table)
    v = is_symmetry(pde, field)
    verdict = {Verdict.SYMMETRY: "symmetry",
               Verdict.NOT_SYMMETRY: "not-symmetry",
               Verdict.UNDECIDED: "undecided"}[v.verdict]
    rep = Report("verify-symmetry",
                 inputs={"pde": dsl.render(pde.rhs), "field": args.field,
                         "params": params},
                 verdict=verdict,
                 certificates={"residual": v.residual})
    rep.add(f"residual: {dsl.render(v.residual)}")
    rep.exit_code = _verdict_exit(verdict)
    return rep


def cmd_find_symmetries(args) -> Report:
    params = _parse_params(args.params)
    pde, table = _resolve_pde(args, params)
    result = find_symmetries(pde, bound=args.bound)
    closure = check_closure(result.fields) if len(result) > 1 else None
    rep = Report("find-symmetries",
                 inputs={"pde": dsl.render(pde.rhs), "bound": args.bound,
                         "params": params},
                 verdict="constructed",
                 certificates={
                     "count": len(result),
                     "generators": [dsl.render_field(f) for f in result.fields],
                     "closed": closure.closed if closure else True,
                 })
    rep.add(f"found {len(result)} generators:")
    for f in result.fields:
        rep.add(f"  {dsl.render_field(f)}")
    if closure is not None and not closure.closed:
        rep.add(f"bracket closure violations: {closure.violations}")
    rep.exit_code = 0
    return rep


def cmd_normalize(args) -> Report:
    table = dcr_symbols()
    inst = _parse_instance(args.instance, table)
    if args.drift:
        out, witness = remove_drift(inst)
        label = "drift removal"
    else:
        out, witness = normalize_coefficient(inst, args.target)
        label = f"normalize {args.target}"
    rep = Report("normalize",
                 inputs={"instance": inst.to_record(),
                         "target": "b0-drift" if args.drift else args.target},
                 verdict="constructed",
                 certificates={"result": out.to_record(),
                               "witness": witness.to_record()})
    rep.add(f"{label}: {out.to_record()}")
    rep.add(f"witness: {witness.to_record()}")
    return rep


def cmd_equiv(args) -> Report:
    table = dcr_symbols()
    a = _parse_instance(args.a, table)
    b = _parse_instance(args.b, table)
    res = are_equivalent(a, b)
    verdict = "equivalent" if res.equivalent else res.verdict
    rep = Report("equiv",
                 inputs={"a": a.to_record(), "b": b.to_record()},
                 verdict=verdict,
                 certificates={"witness": res.witness.to_record()
                               if res.witness else None,
                               "detail": res.detail})
    rep.add(res.detail)
    rep.exit_code = _verdict_exit(verdict)
    return rep


def cmd_bracket_table(args) -> Report:
    params = _parse_params(args.params)
    L = _resolve_algebra(args, params)
    entries = {}
    for i in range(L.dim):
        for j in range(i + 1, L.dim):
            entries[f"[e{i + 1},e{j + 1}]"] = list(L.c[i][j])
    rep = Report("bracket-table",
                 inputs={"algebra": args.algebra, "params": params},
                 verdict="constructed",
                 certificates={"dim": L.dim, "brackets": entries})
    for k, v in entries.items():
        rep.add(f"{k} = ({', '.join(dsl.render(e) for e in v)})")
    return rep


def cmd_identify(args) -> Report:
    params = _parse_params(args.params)
    L = _resolve_algebra(args, params)
    ident = identify(L)
    verdict = "verified" if ident.status == "identified" else "undecided"
    rep = Report("identify",
                 inputs={"algebra": args.algebra, "params": params},
                 verdict=verdict,
                 certificates={
                     "label": ident.display,
                     "witness": ident.witness,
                     "invariants": {
                         "derived_dims": list(ident.invariants.derived_dims),
                         "center_dim": ident.invariants.center_dim,
                         "killing_signature":
                             list(ident.invariants.killing_signature),
                     } if ident.invariants else None,
                 })
    rep.add(f"label: {ident.display}")
    if ident.witness:
        from .report import _plain

        rep.add(f"basis-change witness rows: {_plain(ident.witness)}")
    rep.exit_code = 0 if ident.status == "identified" else 2
    return rep


def cmd_optimal_system(args) -> Report:
    params = _parse_params(args.params)
    L = _resolve_algebra(args, params)
    ident = identify(L)
    reps = construct_optimal_system(L, ident)
    audit = verify_candidate_system(L, reps, n_samples=args.samples,
                                    seed=_seed(args), ident=ident)
    verdict = "constructed" if audit.ok else "refuted"
    rep = Report("optimal-system",
                 inputs={"algebra": args.algebra, "params": params,
                         "samples": args.samples},
                 verdict=verdict,
                 seed=_seed(args),
                 certificates={
                     "label": ident.display,
                     "classes": [r.render() for r in reps],
                     "audit": {"pairs": len(audit.conjugate_pairs),
                               "gaps": len(audit.gaps),
                               "undecided_rate": audit.undecided_rate},
                 })
    rep.add(f"algebra: {ident.display}")
    rep.add(f"{len(reps)} classes:")
    for r in reps:
        rep.add(f"  {r.render()}")
    rep.add(audit.summary())
    rep.exit_code = 0 if audit.ok else 1
    return rep


def cmd_audit_system(args) -> Report:
    params = _parse_params(args.params)
    L = _resolve_algebra(args, params)
    candidates = _load_candidates(args.candidates, L.dim)
    audit = verify_candidate_system(L, candidates, n_samples=args.samples,
                                    seed=_seed(args))
    verdict = "clean" if audit.ok else "flagged"
    rep = Report("audit-system",
                 inputs={"algebra": args.algebra,
                         "candidates": args.candidates,
                         "count": len(candidates)},
                 verdict=verdict,
                 seed=_seed(args),
                 certificates={
                     "pairs": [[i, j, w.describe()]
                               for i, j, w in audit.conjugate_pairs],
                     "gaps": [[i, [str(x) for x in vec], sig]
                              for i, vec, sig in audit.gaps[:20]],
                     "gap_count": len(audit.gaps),
                     "duplicates": audit.duplicates[:20],
                     "undecided_rate": audit.undecided_rate,
                 })
    rep.add(audit.summary())
    for i, j, w in audit.conjugate_pairs:
        rep.add(f"conjugate pair: candidates {i} and {j} via {w.describe()}")
    rep.exit_code = 0 if audit.ok else 1
    return rep


def cmd_reduce(args) -> Report:
    params = _parse_params(args.params)
    pde, table = _resolve_pde(args, params)
    field = dsl.parse_vector_field(args.field, table)
    ansatz = reduce_pde(pde, field)
    rep = Report("reduce",
                 inputs={"pde": dsl.render(pde.rhs), "field": args.field},
                 verdict="constructed",
                 certificates={
                     "omega": ansatz.omega,
                     "multiplier": ansatz.multiplier,
                     "ode": ansatz.ode,
                     "factor": ansatz.factor,
                     "certificate_zero": ansatz.certificate.is_zero_literal,
                 })
    rep.add(f"invariant: w = {dsl.render(ansatz.omega)}")
    rep.add(f"ansatz: u = ({dsl.render(ansatz.multiplier)}) * phi(w)")
    rep.add(f"reduced ODE: {dsl.render(ansatz.ode)} = 0")
    rep.add(f"extracted factor: {dsl.render(ansatz.factor)}")
    return rep


def cmd_verify_solution(args) -> Report:
    params = _parse_params(args.params)
    pde, table = _resolve_pde(args, params)
    sol = ClosedFormSolution(dsl.parse(args.sol, table))
    v = verify_solution(pde, sol)
    rep = Report("verify-solution",
                 inputs={"pde": dsl.render(pde.rhs), "sol": args.sol},
                 verdict=v.verdict,
                 certificates={"residual": v.residual})
    rep.add(f"residual: {dsl.render(v.residual)}")
    rep.exit_code = _verdict_exit(v.verdict)
    return rep


def cmd_transform_solution(args) -> Report:
    params = _parse_params(args.params)
    pde, table = _resolve_pde(args, params)
    sol = ClosedFormSolution(dsl.parse(args.sol, table))
    field = dsl.parse_vector_field(args.field, table)
    eps = dsl.parse(args.epsilon, table)
    out = transform_solution(sol, field, eps)
    v = verify_solution(pde, out)
    rep = Report("transform-solution",
                 inputs={"pde": dsl.render(pde.rhs), "sol": args.sol,
                         "field": args.field, "epsilon": args.epsilon},
                 verdict=v.verdict,
                 certificates={"transformed": out.expr,
                               "residual": v.residual})
    rep.add(f"transformed solution: u = {dsl.render(out.expr)}")
    rep.add(f"verification: {v.verdict}")
    rep.exit_code = _verdict_exit(v.verdict)
    return rep


def cmd_regress(args) -> Report:
    catalog = load_catalog(args.catalog)
    report = run_regression(catalog, case_ids=args.cases or None,
                            seed=_seed(args), audit_samples=args.samples,
                            jobs=args.jobs)
    verdict = "pass" if report.ok else "fail"
    rep = Report("regress",
                 inputs={"catalog": args.catalog or "builtin",
                         "jobs": args.jobs, "samples": args.samples},
                 verdict=verdict,
                 seed=_seed(args),
                 certificates={
                     "total": len(report.results),
                     "failed": [r.line() for r in report.failures()],
                 })
    rep.add(report.summary())
    rep.exit_code = 0 if report.ok else 1
    return rep


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liesym",
        description="Exact Lie-symmetry toolkit for "
                    "diffusion-convection-reaction equations")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, pde=False, algebra=False):
        p.add_argument("--params", help="name=value,... (rationals or "
                                        "symbolic names)")
        p.add_argument("--seed", type=int, help="audit seed "
                                                "(default LIESYM_SEED or "
                                                f"{DEFAULT_SEED})")
        p.add_argument("--catalog", help="case catalog file")
        p.add_argument("--out", help="write the structured JSON report here")
        if pde:
            p.add_argument("--pde", required=True,
                           help="'u_t = <expr>' or case:<id>")
        if algebra:
            p.add_argument("--algebra", required=True,
                           help="semicolon-separated fields or case:<id>")

    p = sub.add_parser("verify-symmetry", help="invariance check")
    common(p, pde=True)
    p.add_argument("--field", required=True)
    p.set_defaults(func=cmd_verify_symmetry)

    p = sub.add_parser("find-symmetries", help="polynomial-ansatz search")
    common(p, pde=True)
    p.add_argument("--bound", type=int, default=2)
    p.set_defaults(func=cmd_find_symmetries)

    p = sub.add_parser("normalize", help="coefficient normalization")
    common(p)
    p.add_argument("--instance", required=True, help="m=2,p=1,c1=4,...")
    p.add_argument("--target", default="c1",
                   choices=["b0", "b1", "c0", "c1"])
    p.add_argument("--drift", action="store_true",
                   help="remove the linear drift instead")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("equiv", help="equivalence of two instances")
    common(p)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("bracket-table", help="structure constants")
    common(p, algebra=True)
    p.set_defaults(func=cmd_bracket_table)

    p = sub.add_parser("identify", help="match against the class catalog")
    common(p, algebra=True)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("optimal-system",
                       help="construct and audit the optimal system")
    common(p, algebra=True)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.set_defaults(func=cmd_optimal_system)

    p = sub.add_parser("audit-system", help="audit a candidate list")
    common(p, algebra=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.set_defaults(func=cmd_audit_system)

    p = sub.add_parser("reduce", help="symmetry reduction to an ODE")
    common(p, pde=True)
    p.add_argument("--field", required=True)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("verify-solution", help="substitute and test")
    common(p, pde=True)
    p.add_argument("--sol", required=True)
    p.set_defaults(func=cmd_verify_solution)

    p = sub.add_parser("transform-solution",
                       help="one-parameter group action on a solution")
    common(p, pde=True)
    p.add_argument("--sol", required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--epsilon", required=True)
    p.set_defaults(func=cmd_transform_solution)

    p = sub.add_parser("regress", help="run the catalog regression")
    common(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--samples", type=int, default=300)
    p.add_argument("--cases", nargs="*", help="restrict to these case ids")
    p.set_defaults(func=cmd_regress)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0,) else 0
    start = time.time()
    try:
        report = args.func(args)
    except (UsageError, FileNotFoundError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except ExprError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    print(report.human())
    print(f"elapsed: {time.time() - start:.3f}s")
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(report.to_json())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
