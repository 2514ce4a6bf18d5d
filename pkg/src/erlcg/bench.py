"""Instance generators, the configuration-grid runner and fails aggregation."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

from .model import ModelInstance, dump_model, parse_model
from .search import SolverConfig, parse_ext, solve

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 (Steele, Lea and Flood): a 64-bit splittable generator.

    Seed 0 yields 0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F, ...
    """

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] by rejection (no modulo bias)."""
        span = hi - lo + 1
        limit = (1 << 64) - ((1 << 64) % span)
        while True:
            r = self.next()
            if r < limit:
                return lo + r % span


# ----------------------------------------------------------------------------
# generators


def gen_knapsack(n: int, seed: int) -> ModelInstance:
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = SplitMix64(seed)
    items = []
    for i in range(n):
        w = rng.randint(1, 100)
        p = max(1, w + rng.randint(-10, 10))
        items.append((w, p, i))
    cap = (sum(w for w, _, _ in items) + 1) // 2
    items.sort(key=lambda t: (-Fraction(t[1], t[0]), t[2]))
    names = [f"x{i + 1}" for i in range(n)]
    doc = {
        "vars": [{"name": nm, "lb": 0, "ub": 1} for nm in names],
        "constraints": [{"type": "linear_le", "coeffs": [w for w, _, _ in items], "vars": names, "bound": cap}],
        "objective": {"sense": "max", "coeffs": [p for _, p, _ in items], "vars": names},
        "search": {"heuristic": "fixed", "order": names, "value_choice": "max"},
    }
    return parse_model(json.dumps(doc))


def gen_alldiff_chain(n: int) -> ModelInstance:
    if n < 3:
        raise ValueError("n must be at least 3")
    names = [f"x{i + 1}" for i in range(n)]
    doc = {
        "vars": [{"name": nm, "lb": 1, "ub": 5} for nm in names],
        "constraints": [{"type": "alldiff", "vars": names[i:i + 3]} for i in range(n - 2)],
        "objective": {"sense": "min", "coeffs": [1] * n, "vars": names},
        "search": {"heuristic": "fixed", "order": names, "value_choice": "min"},
    }
    return parse_model(json.dumps(doc))


def gen_disjunctive(ntasks: int, seed: int) -> ModelInstance:
    """One machine; minimizes the makespan through ``slack = H - makespan``.

    Coefficients must stay positive, so ``s_i + d_i <= end`` is written as
    ``s_i + slack <= H - d_i`` and slack is maximized.
    """
    if ntasks < 2:
        raise ValueError("ntasks must be at least 2")
    rng = SplitMix64(seed)
    ds = [rng.randint(3, 10) for _ in range(ntasks)]
    H = math.ceil(Fraction(13, 10) * sum(ds))
    names = [f"s{i + 1}" for i in range(ntasks)]
    vars_ = [{"name": nm, "lb": 0, "ub": H - d} for nm, d in zip(names, ds)]
    vars_.append({"name": "slack", "lb": 0, "ub": H})
    cons = [{"type": "disjunctive", "starts": names, "durations": ds}]
    for nm, d in zip(names, ds):
        cons.append({"type": "linear_le", "coeffs": [1, 1], "vars": [nm, "slack"], "bound": H - d})
    doc = {
        "vars": vars_,
        "constraints": cons,
        "objective": {"sense": "max", "coeffs": [1], "vars": ["slack"]},
        "search": {"heuristic": "fixed", "order": names + ["slack"], "value_choice": "min"},
    }
    return parse_model(json.dumps(doc))


def makespan_of(m: ModelInstance, slack: int) -> int:
    """Makespan encoded by an objective value of a gen_disjunctive model."""
    return m.vars[m.var_id("slack")].ub - slack


def generate(family: str, size: int, seed: int) -> ModelInstance:
    if family == "knapsack":
        return gen_knapsack(size, seed)
    if family in ("alldiff-chain", "alldiff"):
        return gen_alldiff_chain(size)
    if family == "disjunctive":
        return gen_disjunctive(size, seed)
    raise ValueError(f"unknown family {family!r}")


# ----------------------------------------------------------------------------
# grid runner


@dataclass
class RunConfig:
    label: str = "ext@1"
    ext: str = "all"
    psum_interval: Optional[int] = 1
    psum_order: str = "struct"
    heuristic: Optional[str] = None
    seed: int = 0
    max_conflicts: Optional[int] = 1_000_000
    timeout_ms: Optional[int] = None

    def solver_config(self) -> SolverConfig:
        return SolverConfig(ext=parse_ext(self.ext), psum_interval=self.psum_interval,
                            psum_order=self.psum_order, heuristic=self.heuristic, seed=self.seed,
                            max_conflicts=self.max_conflicts, timeout_ms=self.timeout_ms)


@dataclass
class BenchRow:
    family: str
    instance: str
    config: str
    fails: int
    time_ms: float
    status: str
    objective: Optional[int]
    stats: dict = field(default_factory=dict)


CSV_HEADER = ["family", "instance", "config", "ext", "psum_interval", "psum_order", "heuristic", "seed",
              "status", "objective", "fails", "time_ms", "decisions", "propagations", "restarts",
              "psum_created", "psum_collected", "nogoods_learned", "nogoods_deleted"]


def run_one(family, size, inst_seed, rc: RunConfig) -> BenchRow:
    name = f"{family}-{size}-{inst_seed}"
    try:
        m = generate(family, size, inst_seed)
        r = solve(m, rc.solver_config())
        st = r.stats
        return BenchRow(family, name, rc.label, st["fails"], st["wall_ms"], r.status, r.best_objective, st)
    except Exception as e:  # a crashed run is recorded, not fatal
        log.warning("run %s/%s crashed: %s", name, rc.label, e)
        return BenchRow(family, name, rc.label, 0, 0.0, "ERROR", None, {"error": str(e)})


def geomean(xs):
    """Geometric mean; values below 1 count as 1 so that zero-fail runs are defined."""
    xs = list(xs)
    if not xs:
        return float("nan")
    return math.exp(sum(math.log(max(x, 1)) for x in xs) / len(xs))


def effective_fails(row: BenchRow, rc: RunConfig):
    """Fails as counted in the means: runs stopped by a limit count at the cap."""
    if row.status == "UNKNOWN" and rc.max_conflicts is not None:
        return max(row.fails, rc.max_conflicts)
    return row.fails


def run_bench(families, configs, seeds, jobs=1):
    """Run every (family, size) x seed x config; returns (rows, cells).

    ``cells`` maps (family label, config label) to the geometric-mean fails,
    the geometric-mean time and the count of runs that hit a limit.
    """
    tasks = [(fam, size, sd, rc) for fam, size in families for sd in seeds for rc in configs]
    if jobs == 1:
        rows = [run_one(*t) for t in tasks]
    else:
        from joblib import Parallel, delayed
        rows = Parallel(n_jobs=jobs)(delayed(run_one)(*t) for t in tasks)
    by_label = {rc.label: rc for rc in configs}
    cells = {}
    for fam, size in families:
        key = f"{fam}-{size}"
        for rc in configs:
            sel = [r for r in rows if r.instance.startswith(key + "-") and r.config == rc.label]
            errs = [r for r in sel if r.status == "ERROR"]
            if errs:
                log.warning("%s/%s: %d crashed run(s) excluded from the means", key, rc.label, len(errs))
            ok = [r for r in sel if r.status != "ERROR"]
            cells[(key, rc.label)] = {
                "fails": geomean(effective_fails(r, by_label[r.config]) for r in ok),
                "time_ms": geomean(r.time_ms for r in ok),
                "limit_hits": sum(r.status == "UNKNOWN" for r in ok),
                "runs": len(ok),
            }
    return rows, cells


def write_rows(rows, configs, path):
    by_label = {rc.label: rc for rc in configs}
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_HEADER)
        for r in rows:
            rc = by_label[r.config]
            st = r.stats
            w.writerow([r.family, r.instance, r.config, rc.ext, rc.psum_interval, rc.psum_order,
                        rc.heuristic or "", rc.seed, r.status,
                        "" if r.objective is None else r.objective, r.fails, r.time_ms]
                       + [st.get(k, "") for k in CSV_HEADER[12:]])


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def render_table(cells, configs):
    fams = sorted({k for k, _ in cells})
    labels = [rc.label for rc in configs]
    width = max([12] + [len(l) for l in labels]) + 2
    head = "family".ljust(18) + "".join(l.rjust(width) for l in labels)
    lines = ["geometric-mean fails (runs stopped by a limit count at the cap)", head, "-" * len(head)]
    for fam in fams:
        cells_ = []
        for l in labels:
            c = cells[(fam, l)]
            txt = f"{c['fails']:.1f}" + ("*" if c["limit_hits"] else "")
            cells_.append(txt.rjust(width))
        lines.append(fam.ljust(18) + "".join(cells_))
    if any(c["limit_hits"] for c in cells.values()):
        lines.append("* at least one run hit the conflict or time limit")
    return "\n".join(lines) + "\n"


def plot_cells(cells, configs, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fams = sorted({k for k, _ in cells})
    labels = [rc.label for rc in configs]
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(labels) * len(fams)), 3.5))
    width = 0.8 / max(1, len(labels))
    for i, l in enumerate(labels):
        xs = [j + i * width for j in range(len(fams))]
        ax.bar(xs, [cells[(f, l)]["fails"] for f in fams], width, label=l)
    ax.set_xticks([j + 0.4 - width / 2 for j in range(len(fams))])
    ax.set_xticklabels(fams)
    ax.set_yscale("log")
    ax.set_ylabel("geometric-mean fails")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ----------------------------------------------------------------------------
# grids


def _cfgs(*items):
    return [RunConfig(**it) for it in items]


PRESET_GRIDS = {
    "smoke": {
        "families": [["knapsack", 15], ["alldiff-chain", 8], ["disjunctive", 4]],
        "seeds": [1, 2],
        "configs": [{"label": "basic", "ext": "none", "psum_interval": None},
                    {"label": "ext@1", "ext": "all", "psum_interval": 1}],
    },
    "table1": {
        "families": [["knapsack", 15], ["knapsack", 20], ["knapsack", 25], ["knapsack", 30]],
        "seeds": list(range(1, 21)),
        "configs": [{"label": "basic", "ext": "none", "psum_interval": None},
                    {"label": "ext@1", "ext": "all", "psum_interval": 1}],
    },
    "table2": {
        "families": [["knapsack", 30]],
        "seeds": list(range(1, 21)),
        "configs": [{"label": f"ext@{k}", "ext": "all", "psum_interval": k} for k in (1, 5, 10, 20, 50)]
        + [{"label": "basic", "ext": "none", "psum_interval": None}],
    },
    "table3": {
        "families": [["knapsack", 30]],
        "seeds": list(range(1, 21)),
        "configs": [{"label": f"{o}", "ext": "all", "psum_interval": 1, "psum_order": o}
                    for o in ("struct", "random", "coeff")],
    },
}


def load_grid(spec):
    """A preset name or the path of a JSON grid document."""
    if spec in PRESET_GRIDS:
        g = PRESET_GRIDS[spec]
    else:
        with open(spec) as f:
            g = json.load(f)
    families = [(f, int(n)) for f, n in g["families"]]
    seeds = [int(s) for s in g["seeds"]]
    base = g.get("defaults", {})
    configs = [RunConfig(**{**base, **c}) for c in g["configs"]]
    return families, configs, seeds, int(g.get("jobs", 1))


def write_report(rows, cells, configs, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    write_rows(rows, configs, os.path.join(out_dir, "runs.csv"))
    table = render_table(cells, configs)
    with open(os.path.join(out_dir, "table.txt"), "w") as f:
        f.write(table)
    with open(os.path.join(out_dir, "cells.json"), "w") as f:
        json.dump([{"family": k[0], "config": k[1], **v} for k, v in cells.items()], f, indent=1)
    plot_cells(cells, configs, os.path.join(out_dir, "fails.png"))
    return table


def save_instance(m: ModelInstance, path):
    with open(path, "w") as f:
        f.write(dump_model(m))


__all__ = ["SplitMix64", "gen_knapsack", "gen_alldiff_chain", "gen_disjunctive", "generate",
           "RunConfig", "BenchRow", "run_bench", "geomean", "render_table", "load_grid", "asdict"]
