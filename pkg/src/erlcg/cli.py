"""Command-line entry point: solve, gen, bench and verify."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .atoms import desc_lit_str
from .bench import PRESET_GRIDS, load_grid, run_bench, save_instance, generate, write_report
from .model import ModelError, load_model
from .search import Solver, SolverConfig, parse_ext
from .verify import read_trace, verify_explanations, verify_nogoods

EXIT_OK, EXIT_UNKNOWN, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser():
    p = _Parser(prog="erlcg", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve a model file")
    s.add_argument("--model", required=True)
    s.add_argument("--ext", default="all", help="none, all, or a comma list of linear,lex,table,disj")
    s.add_argument("--psum-interval", type=int, default=None)
    s.add_argument("--psum-order", choices=["struct", "random", "coeff"], default="struct")
    s.add_argument("--heuristic", choices=["fixed", "vsids"], default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-conflicts", type=int, default=None)
    s.add_argument("--timeout-ms", type=int, default=None)
    s.add_argument("--stats", help="write the stats document (JSON) here")
    s.add_argument("--trace", help="write the run trace here")
    s.add_argument("--no-lift", action="store_true", help="keep linear explanations unweakened")
    s.add_argument("--verify-explanations", action="store_true")
    s.add_argument("--verify-nogoods", action="store_true")

    g = sub.add_parser("gen", help="generate a benchmark instance")
    g.add_argument("family", choices=["knapsack", "alldiff-chain", "disjunctive"])
    g.add_argument("--n", type=int, required=True, help="items, chain length or tasks")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="output file (stdout when omitted)")

    b = sub.add_parser("bench", help="run a configuration grid")
    b.add_argument("--grid", required=True, help=f"grid JSON file or preset ({', '.join(PRESET_GRIDS)})")
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--jobs", type=int, default=None, help="worker processes (overrides the grid)")

    v = sub.add_parser("verify", help="check the explanations and nogoods of a run trace")
    v.add_argument("--model", required=True)
    v.add_argument("--run-trace", required=True)
    v.add_argument("--ext", default="all", help="extension families used by the traced run")
    v.add_argument("--psum-interval", type=int, default=None)
    v.add_argument("--psum-order", choices=["struct", "random", "coeff"], default="struct")
    v.add_argument("--seed", type=int, default=0)
    return p


def _config(a, **kw):
    return SolverConfig(ext=parse_ext(a.ext), psum_interval=a.psum_interval, psum_order=a.psum_order,
                        seed=a.seed, **kw)


def _report(name, rep):
    print(f"{name}: checked {rep['checked']} passed {rep['passed']} failed {rep['failed']} "
          f"refused {rep['refused']}")
    for f in rep["failures"][:5]:
        print(f"  failure: {f}")


def cmd_solve(a):
    m = load_model(a.model)
    cfg = _config(a, heuristic=a.heuristic, max_conflicts=a.max_conflicts, timeout_ms=a.timeout_ms,
                  trace=bool(a.trace), log_explanations=bool(a.trace) or a.verify_explanations,
                  log_nogoods=a.verify_nogoods, lift=not a.no_lift)
    sv = Solver(m, cfg)
    r = sv.solve()
    print(f"status {r.status}")
    if r.best_objective is not None:
        print(f"objective {r.best_objective}")
    if r.best_assignment is not None:
        print("solution " + " ".join(f"{k}={v}" for k, v in r.best_assignment.items()))
    print(f"fails {r.stats['fails']} decisions {r.stats['decisions']} wall_ms {r.stats['wall_ms']}")
    if a.stats:
        with open(a.stats, "w") as f:
            json.dump(r.stats, f, indent=1, sort_keys=True)
    if a.trace:
        s = sv.eng
        with open(a.trace, "w") as f:
            for line in s.trace:
                f.write(line + "\n")
            for cid, body, head in s.expl_log:
                f.write(f"E\t{cid}\t{_clause_text(s, body, head)}\n")
    bad = 0
    if a.verify_explanations:
        rep = verify_explanations(sv.model, sv.eng.expl_log)
        _report("explanations", rep)
        bad += rep["failed"] + rep["refused"]
    if a.verify_nogoods:
        rep = verify_nogoods(sv.model, sv.nogood_log)
        _report("nogoods", rep)
        bad += rep["failed"] + rep["refused"]
    if bad:
        return EXIT_INTERNAL
    return EXIT_UNKNOWN if r.status == "UNKNOWN" else EXIT_OK


def _clause_text(s, body, head):
    lhs = " & ".join(desc_lit_str(d, p, s.names) for d, p in body) or "true"
    return f"{lhs} -> {desc_lit_str(*head, s.names)}"


def cmd_gen(a):
    m = generate(a.family, a.n, a.seed)
    if a.out:
        save_instance(m, a.out)
    else:
        from .model import dump_model
        sys.stdout.write(dump_model(m))
    return EXIT_OK


def cmd_bench(a):
    families, configs, seeds, jobs = load_grid(a.grid)
    if a.jobs is not None:
        jobs = a.jobs
    rows, cells = run_bench(families, configs, seeds, jobs=jobs)
    print(write_report(rows, cells, configs, a.out), end="")
    return EXIT_OK


def cmd_verify(a):
    from .search import prepare
    m = prepare(load_model(a.model), _config(a))
    expl, ngs = read_trace(m, a.run_trace)
    r1 = verify_explanations(m, expl)
    r2 = verify_nogoods(m, ngs)
    _report("explanations", r1)
    _report("nogoods", r2)
    return EXIT_INTERNAL if (r1["failed"] or r2["failed"]) else EXIT_OK


def main(argv=None):
    a = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return {"solve": cmd_solve, "gen": cmd_gen, "bench": cmd_bench, "verify": cmd_verify}[a.cmd](a)
    except (ModelError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:  # anything else is a solver bug
        logging.exception("internal error: %s", e)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
