"""``fclear`` command line: solve, enumerate, compile, oracle, evaluate, depgraph, showcase.

Exit status is 0 on success, 1 on domain errors (no solution, failed check,
constraint violations) and 2 on usage or parse errors.  Structured results go
to standard output as JSON with sorted keys; diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io
from .depgraph import SystemClass, build_dependency_graph, classify_graph
from .errors import FClearError, ValidationError
from .model import DEFAULT_TOL, check_clearing, evaluate_state
from .objectives import OBJECTIVES, canonical_objective, evaluate_objective
from .reductions import (
    build_showcase,
    compile_decision,
    compile_objective,
    compile_pareto_suboptimal,
    compile_representative,
    graph_oracle,
    optimum,
    parse_graph,
)
from .solver import enumerate_binary_solutions, enumerate_default_sets, iterate_to_fixpoint


class UsageError(Exception):
    pass


def _rates_by_label(system, r) -> dict:
    return {system.label(i): float(x) for i, x in enumerate(r)}


def _emit(args, payload: dict) -> None:
    text = io.dumps(payload)
    sys.stdout.write(text)
    if getattr(args, "out", None) and args.command not in ("compile", "showcase", "depgraph"):
        Path(args.out).write_text(text)


def _load_graph(path):
    return parse_graph(Path(path).read_text())


def cmd_solve(args) -> int:
    system = io.load_system(args.system)
    if args.method == "picard":
        r0 = io.load_rates(system, args.rates) if args.rates else None
        rep = iterate_to_fixpoint(system, r0, args.damping, args.max_iter, args.eps)
        payload = {"status": rep.status.value, "iterations": rep.iterations, "residual": rep.residual}
        if rep.converged:
            st = evaluate_state(system, rep.rates)
            payload["rates"] = _rates_by_label(system, rep.rates)
            payload["equity"] = _rates_by_label(system, st.equity)
        _emit(args, payload)
        return 0 if rep.converged else 1
    sols = enumerate_default_sets(system, args.eps)
    payload = io.solutions_to_dict(system, sols)
    _emit(args, payload)
    return 0 if len(sols) else 1


def cmd_enumerate(args) -> int:
    compiled, system = io.load_compiled(args.system)
    if compiled is not None and compiled.drivers and args.method != "default-sets":
        sols = enumerate_binary_solutions(compiled, args.eps)
    else:
        sols = enumerate_default_sets(system, args.eps)
    if args.report == "all":
        _emit(args, io.solutions_to_dict(system, sols))
    elif args.report == "summary":
        from .solver import solution_space_summary

        summ = solution_space_summary(system, sols.solutions, args.eps)
        _emit(args, {
            "count": len(sols),
            "continuum": sols.continuum,
            "essentialClasses": summ.essential_classes,
            "paretoFront": [sols.labels[i] for i in summ.pareto_front],
        })
    else:
        if compiled is None or compiled.objective not in OBJECTIVES:
            raise UsageError("--report best needs a compiled system with an objective manifest")
        if not len(sols):
            print("no solutions found", file=sys.stderr)
            return 1
        value, label = optimum(compiled, sols, args.eps)
        _emit(args, {
            "objective": compiled.objective,
            "best": value,
            "label": label,
            "nodes": sorted(compiled.decode(label)) if compiled.graph_drivers else None,
            "solutions": len(sols),
        })
    return 0 if len(sols) else 1


def cmd_compile(args) -> int:
    G = _load_graph(args.graph)
    obj = args.objective.replace("_", "-").lower()
    extra = {}
    if obj == "decision":
        if args.k is None:
            raise UsageError("decision needs --k")
        compiled = compile_decision(G, args.k, bounded=args.bounded, modified=args.modified,
                                    alpha=args.alpha, beta=args.beta)
    elif obj == "representative":
        if args.k is None:
            raise UsageError("representative needs --k")
        compiled, r, r2 = compile_representative(G, args.k, args.m_g, args.multiplier, bounded=args.bounded)
        extra = {"r": r, "r2": r2}
    elif obj in ("pareto", "pareto-suboptimal"):
        if args.k is None:
            raise UsageError("pareto needs --k")
        compiled, r = compile_pareto_suboptimal(G, args.k, args.alpha, args.beta)
        extra = {"r": r}
    else:
        compiled = compile_objective(G, canonical_objective(args.objective), args.multiplier,
                                     bounded=args.bounded, modified=args.modified,
                                     alpha=args.alpha, beta=args.beta)
    payload = {"banks": compiled.system.n, "objective": compiled.objective, "c": compiled.c,
               "drivers": len(compiled.drivers)}
    if args.out:
        side = io.save_compiled(compiled, args.out)
        payload["system"] = str(args.out)
        payload["manifest"] = str(side)
        for name, vec in extra.items():
            p = Path(args.out).with_name(Path(args.out).stem + f".{name}.json")
            p.write_text(io.dumps(io.rates_to_dict(compiled.system, vec)))
            payload[name] = str(p)
    _emit(args, payload)
    return 0


def cmd_oracle(args) -> int:
    G = _load_graph(args.graph)
    res = graph_oracle(G, args.problem)
    _emit(args, {"problem": args.problem, "value": res.value, "witness": sorted(z + 1 for z in res.witness)})
    return 0


def cmd_evaluate(args) -> int:
    compiled, system = io.load_compiled(args.system)
    r = io.load_rates(system, args.rates)
    verdict = check_clearing(system, r, args.eps)
    payload = {"clearing": verdict.ok, "firstViolation": None if verdict.ok else system.label(verdict.first_violation)}
    if args.objective:
        kind = canonical_objective(args.objective)
        if compiled is not None and compiled.objective == kind:
            val = compiled.evaluate(r, tol=args.eps, verify=False) if verdict.ok else None
        else:
            node = system.index(args.node) if args.node else None
            pair = tuple(system.index(x) for x in args.pair) if args.pair else None
            val = evaluate_objective(system, r, kind, node=node, pair=pair, tol=args.eps, verify=False) if verdict.ok else None
        if val is not None:
            payload.update(objective=val.kind, value=val.value, direction=val.direction)
    st = evaluate_state(system, r)
    payload["equity"] = _rates_by_label(system, st.equity)
    _emit(args, payload)
    return 0 if verdict.ok else 1


def cmd_depgraph(args) -> int:
    system = io.load_system(args.system)
    dg = build_dependency_graph(system, args.aggregate)
    cls = classify_graph(dg)
    labels = [system.label(i) for i in range(system.n)]
    if args.out:
        Path(args.out).write_text(dg.to_text(labels))
    if args.check == "edges":
        sys.stdout.write(dg.to_text(labels))
        return 0
    print(cls.describe(labels))
    if args.check == "red-cycle":
        return 1 if cls.kind is SystemClass.GENERAL else 0
    return 0


def cmd_showcase(args) -> int:
    key = args.kind.replace("-", "").replace("_", "").lower()
    names = {"infinite": "InfiniteSolutions", "exponential": "ExponentialSolutions", "fouroptima": "FourOptima"}
    compiled = build_showcase(names.get(key, args.kind), g=args.g, h=args.h)
    payload = {"kind": compiled.objective, "banks": compiled.system.n, "drivers": len(compiled.drivers)}
    if args.out:
        payload["manifest"] = str(io.save_compiled(compiled, args.out))
        payload["system"] = str(args.out)
    _emit(args, payload)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fclear", description="Clearing workbench for debt/CDS financial networks.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, system=True):
        if system:
            sp.add_argument("--system", required=True, help="system JSON file")
        sp.add_argument("--eps", type=float, default=DEFAULT_TOL, help="clearing tolerance")
        sp.add_argument("--out", help="write results to this file")

    s = sub.add_parser("solve", help="find a clearing vector")
    common(s)
    s.add_argument("--method", choices=("picard", "default-sets"), default="picard")
    s.add_argument("--damping", type=float, default=1.0)
    s.add_argument("--max-iter", type=int, default=10000)
    s.add_argument("--rates", help="starting rate vector (JSON)")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("enumerate", help="enumerate clearing vectors")
    common(e)
    e.add_argument("--method", choices=("drivers", "default-sets"), default="drivers")
    e.add_argument("--report", choices=("all", "best", "summary"), default="all")
    e.set_defaults(func=cmd_enumerate)

    c = sub.add_parser("compile", help="compile a graph into a financial system")
    common(c, system=False)
    c.add_argument("--graph", required=True)
    c.add_argument("--objective", required=True,
                   help="objective name, or decision / representative / pareto")
    c.add_argument("--multiplier", type=int, default=1, help="replication count m (m_c for representative)")
    c.add_argument("--m-g", type=int, default=2, help="generating gadgets for representative")
    c.add_argument("--bounded", action="store_true")
    c.add_argument("--modified", action="store_true", help="use red-cycle-free branching gadgets")
    c.add_argument("--alpha", type=float, default=1.0)
    c.add_argument("--beta", type=float, default=1.0)
    c.add_argument("--k", type=int)
    c.set_defaults(func=cmd_compile)

    o = sub.add_parser("oracle", help="exact MaxIS / MinIDS by subset enumeration")
    common(o, system=False)
    o.add_argument("--graph", required=True)
    o.add_argument("--problem", choices=("maxis", "minids"), default="maxis")
    o.set_defaults(func=cmd_oracle)

    v = sub.add_parser("evaluate", help="check a rate vector and score it")
    common(v)
    v.add_argument("--rates", required=True)
    v.add_argument("--objective")
    v.add_argument("--node")
    v.add_argument("--pair", nargs=2)
    v.set_defaults(func=cmd_evaluate)

    d = sub.add_parser("depgraph", help="colored dependency graph and class")
    common(d)
    d.add_argument("--check", choices=("class", "red-cycle", "edges"), default="class")
    d.add_argument("--aggregate", choices=("contract", "creditor"), default="contract")
    d.set_defaults(func=cmd_depgraph)

    w = sub.add_parser("showcase", help="emit a showcase system")
    common(w, system=False)
    w.add_argument("--kind", required=True, help="infinite | exponential | four-optima")
    w.add_argument("--g", type=int, default=1)
    w.add_argument("--h", type=float)
    w.set_defaults(func=cmd_showcase)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "damping") and not 0 < args.damping <= 1:
        parser.error("--damping must lie in (0, 1]")
    if args.eps <= 0:
        parser.error("--eps must be positive")
    try:
        return args.func(args)
    except (UsageError, ValidationError, FileNotFoundError) as exc:
        print(f"fclear: {exc}", file=sys.stderr)
        return 2
    except (FClearError, KeyError) as exc:
        print(f"fclear: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return 1


def run(argv=None) -> int:
    """Entry point that maps argparse's exit into a return code."""
    try:
        return main(argv)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
