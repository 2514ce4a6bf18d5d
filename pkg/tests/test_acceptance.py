"""Acceptance criteria 1-9, one PASS/FAIL line each (collected in the terminal summary).

Criteria 4-6 read the knapsack-30 runs under results/acceptance/ (written by
results/run_acceptance.sh through the bench harness). The runs take hours on
one CPU, so they are not repeated here; instead the fastest run of every
configuration is solved again and must reproduce its recorded fails count.
When the runs are missing they are regenerated, which is slow.
"""
import os
import time
from itertools import product

import pytest

from erlcg.bench import BenchRow, RunConfig, effective_fails, generate, geomean, load_grid, read_rows, run_bench, \
    run_one, write_report
from erlcg.search import SolverConfig, Solver, parse_ext, solve
from erlcg.verify import (
    GENERALITY_EXAMPLES, HEAD_X4_LE_4, brute_force, more_general, verify_explanations,
    verify_nogoods,
)

from conftest import clause_text, scripted

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
RESULTS = os.path.join(ROOT, "results")
ACCEPT = os.path.join(RESULTS, "acceptance")
ORACLE_GUARD = 1 << 22  # search nodes; disjunctive-5 seed 3 needs about 1.7M
GRID_KEYS = ["ext1", "ext5", "ext10", "ext20", "ext50", "basic", "random1"]

# oracle suite: 110 knapsack, 83 disjunctive and 7 alldiff-chain instances
ORACLE_INSTANCES = ([("knapsack", n, sd) for n in (6, 8, 10, 12, 14) for sd in range(1, 23)]
                    + [("disjunctive", n, sd) for n in (2, 3, 4, 5) for sd in range(1, 22)][:83]
                    + [("alldiff-chain", n, 0) for n in range(4, 11)])
# (ext, interval, order, heuristic); interval None keeps the model's own
ORACLE_CONFIGS = ([("none", None, "struct", h) for h in ("fixed", "vsids")]
                  + list(product(["all"], [1, 5], ["struct", "random"], ["fixed", "vsids"]))
                  + [(e, None, "struct", "fixed") for e in ("linear", "disj", "lex,table")])


def _line(report, k, ok, detail):
    report(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def _cfg(ext, interval, order, heuristic, seed, **kw):
    return SolverConfig(ext=parse_ext(ext), psum_interval=interval, psum_order=order, heuristic=heuristic,
                        seed=seed, **kw)


# -- 1 -------------------------------------------------------------------------------


def test_criterion_1_worked_example(ex1, report):
    t0 = time.perf_counter()
    decs = ["x1>=1", "x2>=2", "x3>=3"]
    sv, conflict = scripted(ex1, decs, ext="none", lift=False)
    basic = clause_text(sv.eng, sv.db.analyze(conflict).lits)
    sv, conflict = scripted(ex1, decs, ext="linear")
    s = sv.eng
    s.begin_analysis()
    chain = []
    for text in ["x4<=4", "P[c0:3]>=11", "P[c0:2]>=2"]:
        l = sv.lit(text)
        chain.append(" & ".join(sorted(s.lit_str(b) for b in s.antecedents(l))) + " -> " + text)
    ext = clause_text(s, sv.db.analyze(conflict).lits)
    dt = time.perf_counter() - t0
    ok = (sorted(basic.split(" -> ")[0].split(" & ")) == ["x1>=1", "x2>=2", "x3>=3"]
          and basic.endswith("-> false")
          and ext == "P[c0:3]>=11 -> false"
          and chain == ["P[c0:3]>=11 -> x4<=4", "P[c0:2]>=2 & x3>=3 -> P[c0:3]>=11", "x2>=1 -> P[c0:2]>=2"]
          and dt < 1.0)
    assert _line(report, 1, ok, f"basic [{basic}], extended [{ext}], chain {chain}, {dt:.2f}s")


# -- 2 and 7 -------------------------------------------------------------------------


@pytest.fixture(scope="module")
def oracle_suite():
    t0 = time.perf_counter()
    runs = []
    for i, (fam, n, sd) in enumerate(ORACLE_INSTANCES):
        m = generate(fam, n, sd)
        ref = brute_force(m, guard=ORACLE_GUARD)
        for c in ORACLE_CONFIGS:
            r = solve(m, _cfg(*c, seed=i))
            runs.append(((fam, n, sd), c, (ref.status, ref.best_objective), (r.status, r.best_objective)))
    return runs, time.perf_counter() - t0


def test_criterion_2_oracle_equivalence(oracle_suite, report):
    runs, dt = oracle_suite
    bad = [r for r in runs if r[2] != r[3]]
    n_inst = len({r[0] for r in runs})
    ok = n_inst >= 200 and not bad and dt < 300
    detail = (f"{n_inst} instances x {len(ORACLE_CONFIGS)} configs, {len(runs) - len(bad)}/{len(runs)} agree "
              f"with brute_force, {dt:.0f}s")
    assert _line(report, 2, ok, detail), bad[:5]


def test_criterion_7_extension_toggling(oracle_suite, report):
    runs, _ = oracle_suite
    by_inst = {}
    for inst, _, _, got in runs:
        by_inst.setdefault(inst, set()).add(got)
    split = [k for k, v in by_inst.items() if len(v) > 1]
    ok = not split
    assert _line(report, 7, ok, f"{len(by_inst) - len(split)}/{len(by_inst)} instances give one status and "
                                f"optimum across ext none/all/linear/disj/lex,table"), split[:5]


# -- 3 -------------------------------------------------------------------------------

SOUND_INSTANCES = ([("knapsack", n, sd) for n in (6, 8, 10) for sd in (1, 2, 3)]
                   + [("alldiff-chain", n, 0) for n in (4, 5, 6, 7)]
                   + [("disjunctive", n, sd) for n in (2, 3, 4) for sd in (1, 2, 3)])


def test_criterion_3_soundness(report):
    t0 = time.perf_counter()
    tot = {"explanations": [0, 0, 0], "nogoods": [0, 0, 0]}
    for i, (fam, n, sd) in enumerate(SOUND_INSTANCES):
        m = generate(fam, n, sd)
        for c in [("none", None, "struct", "fixed"), ("all", 1, "struct", "fixed"), ("all", 1, "random", "vsids")]:
            sv = Solver(m, _cfg(*c, seed=i, log_explanations=True, log_nogoods=True))
            sv.solve()
            for key, rep in [("explanations", verify_explanations(sv.model, sv.eng.expl_log)),
                             ("nogoods", verify_nogoods(sv.model, sv.nogood_log))]:
                for j, f in enumerate(("passed", "failed", "refused")):
                    tot[key][j] += rep[f]
    dt = time.perf_counter() - t0
    ok = all(v[1] == 0 and v[2] == 0 and v[0] > 0 for v in tot.values()) and dt < 600
    detail = ", ".join(f"{k} {v[0]} passed {v[1]} failed {v[2]} refused" for k, v in tot.items())
    assert _line(report, 3, ok, f"{len(SOUND_INSTANCES)} instances x 3 configs: {detail}, {dt:.0f}s")


# -- 4, 5, 6 -------------------------------------------------------------------------


@pytest.fixture(scope="module")
def knapsack30():
    """geomean fails per config label, plus the replay check of recorded runs."""
    means, replays = {}, []
    for key in GRID_KEYS:
        grid = os.path.join(RESULTS, "grids", f"knapsack30-{key}.json")
        families, configs, seeds, jobs = load_grid(grid)
        rc = configs[0]
        csv_path = os.path.join(ACCEPT, key, "runs.csv")
        if not os.path.exists(csv_path):
            rows, cells = run_bench(families, configs, seeds, jobs=jobs)
            write_report(rows, cells, configs, os.path.join(ACCEPT, key))
        rows = read_rows(csv_path)
        assert len(rows) == len(seeds) and all(r["status"] != "ERROR" for r in rows)
        means[rc.label] = geomean(_effective(r, rc) for r in rows)
        fastest = min(rows, key=lambda r: float(r["time_ms"]))
        fam, size, sd = fastest["instance"].rsplit("-", 2)
        again = run_one(fam, int(size), int(sd), rc)
        replays.append((rc.label, fastest["instance"], int(fastest["fails"]) == again.fails
                        and fastest["status"] == again.status))
    return means, replays


def _effective(row, rc: RunConfig):
    br = BenchRow(row["family"], row["instance"], row["config"], int(row["fails"]), float(row["time_ms"]),
                  row["status"], None)
    return effective_fails(br, rc)


def _replays_ok(replays, labels):
    return all(ok for lab, _, ok in replays if lab in labels)


def test_criterion_4_search_reduction(knapsack30, report):
    means, replays = knapsack30
    b, e = means["basic"], means["ext@1"]
    ok = e <= b / 10 and _replays_ok(replays, {"basic", "ext@1"})
    assert _line(report, 4, ok, f"knapsack-30 geomean fails basic {b:.0f} (runs capped at 50000 count at the cap), "
                                f"ext@1 {e:.0f}, ratio {b / e:.1f}x (need >= 10x), replays {replays}")


def test_criterion_5_interval_trend(knapsack30, report):
    means, replays = knapsack30
    labels = [f"ext@{k}" for k in (1, 5, 10, 20, 50)]
    f = [means[l] for l in labels]
    mono = all(f[j] * 1.2 >= f[i] for i in range(len(f)) for j in range(i + 1, len(f)))
    ok = f[0] < f[-1] and mono and _replays_ok(replays, set(labels))
    seq = " -> ".join(f"{x:.0f}" for x in f)
    assert _line(report, 5, ok, f"geomean fails over intervals 1, 5, 10, 20, 50: {seq}")


def test_criterion_6_ordering(knapsack30, report):
    means, replays = knapsack30
    st, rnd = means["ext@1"], means["random@1"]
    ok = st <= 0.5 * rnd and _replays_ok(replays, {"ext@1", "random@1"})
    assert _line(report, 6, ok, f"geomean fails struct {st:.0f}, random {rnd:.0f} (runs capped at 10000 count "
                                f"at the cap), ratio {st / rnd:.2f} (need <= 0.5)")


# -- 8 -------------------------------------------------------------------------------


def test_criterion_8_determinism(report):
    cases = [("knapsack", 12, 3), ("knapsack", 14, 5), ("disjunctive", 4, 2), ("disjunctive", 5, 3),
             ("alldiff-chain", 8, 0)]
    cfgs = [("none", None, "struct", "vsids"), ("all", 1, "random", "vsids"), ("all", 5, "coeff", "fixed")]
    diffs, n = [], 0
    for (fam, size, sd), c in product(cases, cfgs):
        m = generate(fam, size, sd)
        a, b = (solve(m, _cfg(*c, seed=11)).stats for _ in range(2))
        a.pop("wall_ms"), b.pop("wall_ms")
        n += 1
        if a != b:
            diffs.append((fam, size, sd, c))
    ok = not diffs
    assert _line(report, 8, ok, f"{n - len(diffs)}/{n} (model, config, seed) pairs give identical stats twice"), diffs


# -- 9 -------------------------------------------------------------------------------


def test_criterion_9_generality(report):
    doms = {x: list(range(8)) for x in range(4)}
    got = [more_general((b1, HEAD_X4_LE_4), (b2, HEAD_X4_LE_4), doms) for b1, b2, _ in GENERALITY_EXAMPLES]
    want = [v for _, _, v in GENERALITY_EXAMPLES]
    ok = got == want and len({v for v in want}) == 3
    assert _line(report, 9, ok, "verdicts " + ", ".join(v.name for v in got))
