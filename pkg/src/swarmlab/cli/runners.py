"""Experiment protocols behind the command line.

Each runner takes a validated :class:`~swarmlab.cli.config.Config`, executes
its repeats (optionally in worker processes) and writes CSV and text files
into the output directory. Every file opens with the resolved configuration
as a comment block, so it can be fed back to ``--config`` to regenerate it.
Workers return plain data and the parent writes files in run order, so
output bytes do not depend on ``--jobs``.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable

import numpy as np

from ..benchmarks import (BENCH_SETUPS, DTLZ_DEFAULT_VARS, ObjectiveId, distance_to_front,
                          dtlz_objective, single_objective)
from ..core import BoundaryPolicy, RunStats, SearchSpace, make_rng, run_seed
from ..ga import GaConfig, ga_run
from ..linesearch import LsConfig, ls_run
from ..moea import MoeaConfig, PFModel, diversity_metric2, extract_population, nsga2_run, polyploid_run
from ..motor import PARAM_MAX, PARAM_MIN, PARAM_NAMES, TRUE_VECTOR, SupplyWaveform
from ..motor.sim import IdentificationProblem, make_reference, percent_deviation, write_reference_csv
from ..pso import PsoConfig, Topology, influence_experiment, pso_run
from .. import schema as sch
from .config import HEADER_MARK, Config, ConfigError, parse_config, validate

log = logging.getLogger("swarmlab")


# output helpers -------------------------------------------------------------------

def header(cfg: Config) -> str:
    lines = [f"# {HEADER_MARK}"]
    for ln in cfg.to_ini().splitlines():
        lines.append(f"# {ln}" if ln else "#")
    return "\n".join(lines) + "\n"


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def write_csv(path: Path, cfg: Config, columns, rows) -> Path:
    parts = [header(cfg), ",".join(columns) + "\n"]
    parts.extend(",".join(fmt(v) for v in row) + "\n" for row in rows)
    path.write_text("".join(parts), encoding="utf-8", newline="\n")
    return path


def write_text(path: Path, cfg: Config, body: str) -> Path:
    path.write_text(header(cfg) + body, encoding="utf-8", newline="\n")
    return path


def aligned(head, rows) -> str:
    cells = [[str(h) for h in head]] + [[c if isinstance(c, str) else fmt_short(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(head))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells) + "\n"


def fmt_short(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "-"
    return f"{v:.4g}"


def map_runs(worker: Callable, cfg: Config, n: int) -> list:
    """Run ``worker(ini_text, index)`` for each repeat, in order."""
    text = cfg.to_ini()
    jobs = min(cfg.get("experiment", "jobs"), n)
    if jobs <= 1:
        return [worker(text, i) for i in range(n)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, [text] * n, range(n)))


def _reload(text: str) -> Config:
    cfg = parse_config(text)
    validate(cfg)
    return cfg


def checkpoints(stats: RunStats, every: int) -> tuple[np.ndarray, np.ndarray]:
    marks = np.arange(every, stats.total_evals + 1, every)
    return marks, stats.best_at_evals(marks)


# optimizer construction -------------------------------------------------------------

def _pso_config(cfg: Config, kind: str, default_w: float) -> PsoConfig:
    algo = cfg.get("optimizer", "algorithm")
    common = dict(swarm_size=cfg.get("optimizer", "swarm_size"), chi=cfg.get("optimizer", "chi"),
                  phi1=cfg.get("optimizer", "phi1"), phi2=cfg.get("optimizer", "phi2"))
    if algo == "cpso":
        min_default = 4 if kind == "ident" else 5
        pc = PsoConfig.clubs_based(
            default_level=cfg.get("optimizer", "default_level"),
            w=cfg.get("optimizer", "w", default_w),
            min_level=cfg.get("optimizer", "min_level") if cfg.is_set("optimizer", "min_level") else min_default,
            max_level=cfg.get("optimizer", "max_level"),
            rr=cfg.get("optimizer", "rr"),
            n_clubs=cfg.get("optimizer", "clubs"),
            **common)
    else:
        topo = Topology.GBEST if algo == "gbest" else Topology.LBEST_RING
        pc = PsoConfig(w=cfg.get("optimizer", "w", 0.729), topology=topo, **common)
    ri = cfg.get("optimizer", "random_inertia")
    return pc if ri is None else pc.with_(random_inertia=ri)


def _ga_config(cfg: Config) -> GaConfig:
    base = GaConfig()
    o = lambda k, d: cfg.get("optimizer", k, d)  # noqa: E731
    return GaConfig(pop_size=o("pop_size", base.pop_size), p_c=o("p_c", base.p_c),
                    eta_c=o("eta_c", base.eta_c), p_m=o("p_m", base.p_m),
                    eta_m=o("eta_m", base.eta_m), tournament_size=o("tournament_size", 2))


def run_optimizer(cfg: Config, kind: str, objective, space: SearchSpace, budget: int,
                  rng: np.random.Generator, default_w: float = 0.729):
    """Returns (RunStats, best_x, best_f)."""
    algo = cfg.get("optimizer", "algorithm")
    if algo in ("cpso", "gbest", "lbest"):
        r = pso_run(objective, space, _pso_config(cfg, kind, default_w), budget, rng)
        return r.stats, r.best_x, r.best_f
    if algo == "ga":
        r = ga_run(objective, space, _ga_config(cfg), budget, rng)
        return r.stats, r.best.genome, r.best.fitness
    if algo == "ls":
        r = ls_run(objective, space, LsConfig(budget, step_fraction=cfg.get("optimizer", "step_fraction")), rng)
        return r.stats, r.best_x, r.best_f
    raise ConfigError(f"unsupported optimizer {algo!r}")


# bench -------------------------------------------------------------------------------

def _bench_problem(cfg: Config):
    try:
        oid = ObjectiveId(cfg.get("problem", "function"))
    except ValueError:
        raise ConfigError(f"unknown function {cfg.get('problem', 'function')!r}") from None
    if oid not in BENCH_SETUPS:
        raise ConfigError(f"{oid.value} is not a single-objective benchmark")
    setup = BENCH_SETUPS[oid]
    dims = cfg.get("problem", "dims", setup.dims)
    vmax = setup.vmax if cfg.get("optimizer", "vmax") else None
    space = SearchSpace.box(setup.init_lo, setup.init_hi, dims, vmax=vmax)
    closeness = cfg.get("problem", "closeness", setup.closeness)
    return oid, setup, space, closeness


def _bench_worker(text: str, i: int) -> dict:
    cfg = _reload(text)
    oid, setup, space, closeness = _bench_problem(cfg)
    budget = cfg.get("experiment", "budget", 200_000)
    seed = run_seed(cfg.get("experiment", "seed"), i)
    stats, _, best = run_optimizer(cfg, "bench", single_objective(oid, space.dims), space, budget,
                                   make_rng(seed), default_w=setup.w_clubs)
    marks, vals = checkpoints(stats, cfg.get("experiment", "checkpoint"))
    return {"seed": seed, "final": best, "hit": stats.iterations_to_closeness(closeness),
            "evals": stats.total_evals, "iterations": int(stats.iterations[-1]),
            "marks": marks, "series": vals, "stats": stats}


def run_bench(cfg: Config, out: Path) -> list[Path]:
    from ..core import summarize_runs

    oid, setup, space, closeness = _bench_problem(cfg)
    n = cfg.get("experiment", "repeats")
    results = map_runs(_bench_worker, cfg, n)
    name = cfg.name
    files = [
        write_csv(out / f"{name}_runs.csv", cfg,
                  ["run", "seed", "final_best", "iterations_to_closeness", "evaluations"],
                  [(i, r["seed"], r["final"], r["hit"], r["evals"]) for i, r in enumerate(results)]),
        write_csv(out / f"{name}_series.csv", cfg, ["run", "evaluations", "best"],
                  [(i, int(e), v) for i, r in enumerate(results) for e, v in zip(r["marks"], r["series"])]),
    ]
    s = summarize_runs([r["stats"] for r in results], closeness)
    body = (f"{oid.value}, {space.dims} dims, optimizer {cfg.get('optimizer', 'algorithm')}, "
            f"closeness {closeness:g}, {n} runs\n\n")
    body += aligned(["mean", "median", "std", "min", "max"],
                    [[s.final_mean, s.final_median, s.final_std, s.final_min, s.final_max]])
    body += "\niterations to closeness\n"
    body += aligned(["avg", "med", "max", "min", "suc%"], [[s.avg, s.median, s.max, s.min, s.success_rate]])
    files.append(write_text(out / f"{name}_summary.txt", cfg, body))
    return files


# moo ---------------------------------------------------------------------------------

def _moo_problem(cfg: Config):
    try:
        oid = ObjectiveId(cfg.get("problem", "function"))
    except ValueError:
        raise ConfigError(f"unknown function {cfg.get('problem', 'function')!r}") from None
    if not oid.is_dtlz:
        raise ConfigError(f"{oid.value} is not a DTLZ problem")
    M = cfg.get("problem", "objectives")
    n = cfg.get("problem", "variables", DTLZ_DEFAULT_VARS[oid])
    if n - M + 1 < 1:
        raise ConfigError("variables must be at least objectives")
    return oid, M, n


def _moea_config(cfg: Config) -> MoeaConfig:
    o = lambda k, d: cfg.get("optimizer", k, d)  # noqa: E731
    ploidy = o("ploidy", 2) if cfg.get("optimizer", "algorithm") == "polyploid" else 1
    return MoeaConfig(pop_size=o("pop_size", 100), ploidy=ploidy, p_c=o("p_c", 1.0),
                      eta_c=o("eta_c", 20.0), p_m=cfg.get("optimizer", "p_m"), eta_m=o("eta_m", 15.0),
                      sbx_exchange=cfg.get("optimizer", "sbx_exchange"))


def decimate(snaps, every: int):
    """First snapshot at or beyond each multiple of ``every`` evaluations."""
    out = []
    nxt = 0
    for ev, F in snaps:
        if ev >= nxt:
            out.append((ev, F))
            nxt = (ev // every + 1) * every
    return out


def _moo_worker(text: str, i: int) -> dict:
    cfg = _reload(text)
    oid, M, n = _moo_problem(cfg)
    budget = cfg.get("experiment", "budget", 50_000)
    seed = run_seed(cfg.get("experiment", "seed"), i)
    objective = dtlz_objective(oid, M, cfg.get("problem", "alpha"))
    mc = _moea_config(cfg)
    runner = polyploid_run if cfg.get("optimizer", "algorithm") == "polyploid" else nsga2_run
    res = runner(objective, n, mc, budget, make_rng(seed), oid=oid, keep_snapshots=True)
    pf = PFModel.build(oid, M)
    rows = []
    for ev, F in decimate(res.snapshots, cfg.get("experiment", "checkpoint")):
        rows.append((int(ev), float(np.mean(distance_to_front(oid, F, True))),
                     float(np.mean(distance_to_front(oid, F, False))), diversity_metric2(F, pf)))
    extra = extract_population(res.population, objective, oid) if res.population is not None else None
    return {"seed": seed, "rows": rows, "extract": extra, "evals": int(res.evals[-1])}


def run_moo(cfg: Config, out: Path) -> list[Path]:
    oid, M, n = _moo_problem(cfg)
    reps = cfg.get("experiment", "repeats")
    results = map_runs(_moo_worker, cfg, reps)
    name = cfg.name
    files = [write_csv(out / f"{name}_series.csv", cfg,
                       ["run", "evaluations", "avg_distance", "avg_distance_raw", "diversity"],
                       [(i,) + row for i, r in enumerate(results) for row in r["rows"]])]
    finals = np.array([r["rows"][-1][1:] for r in results])
    body = (f"{oid.value}, M={M}, n={n}, optimizer {cfg.get('optimizer', 'algorithm')}, "
            f"{reps} runs\n\n")
    body += aligned(["run", "seed", "evaluations", "distance", "raw distance", "diversity"],
                    [[i, r["seed"], r["evals"]] + list(r["rows"][-1][1:]) for i, r in enumerate(results)])
    body += "\n" + aligned(["", "distance", "raw distance", "diversity"],
                           [["average"] + list(finals.mean(axis=0)),
                            ["std. dev."] + list(finals.std(axis=0, ddof=1) if reps > 1 else [0.0] * 3)])
    if results[0]["extract"] is not None:
        ex = [r["extract"] for r in results]
        body += "\nextracted population\n" + aligned(
            ["original pop.", "new pop.", "%dominated"],
            [[np.mean([e["avg_distance_original"] for e in ex]),
              np.mean([e["avg_distance_extracted"] for e in ex]),
              np.mean([e["pct_dominated"] for e in ex])]])
    files.append(write_text(out / f"{name}_summary.txt", cfg, body))
    return files


# ident -------------------------------------------------------------------------------

def _ident_setup(cfg: Config):
    supply = SupplyWaveform(cfg.get("problem", "amplitude"), cfg.get("problem", "frequency"))
    T = cfg.get("problem", "T")
    samples = cfg.get("problem", "samples")
    if not T > 0 or samples < 1:
        raise ConfigError("[problem] T must be positive and samples at least 1")
    return supply, T, samples


def _ident_worker(text: str, i: int) -> dict:
    cfg = _reload(text)
    supply, T, samples = _ident_setup(cfg)
    ref = make_reference(supply=supply, T=T, samples=samples)
    problem = IdentificationProblem(ref, supply, leak_split=cfg.get("problem", "leak_split"))
    seed = run_seed(cfg.get("experiment", "seed"), i)
    budget = cfg.get("experiment", "budget", 10_000)
    if cfg.get("optimizer", "algorithm") == "truth":
        f = problem.fitness(TRUE_VECTOR)
        stats = RunStats(np.array([0]), np.array([1]), np.array([f]))
        best_x, best_f = TRUE_VECTOR.copy(), f
    else:
        space = SearchSpace(PARAM_MIN, PARAM_MAX, boundary_policy=BoundaryPolicy.CLAMP_LOWER_ONLY)
        stats, best_x, best_f = run_optimizer(cfg, "ident", problem, space, budget, make_rng(seed),
                                              default_w=1.458)
    marks, vals = checkpoints(stats, cfg.get("experiment", "checkpoint"))
    return {"seed": seed, "final": best_f, "x": np.asarray(best_x), "failed": problem.failed,
            "evals": stats.total_evals, "marks": marks, "series": vals}


def run_ident(cfg: Config, out: Path) -> list[Path]:
    supply, T, samples = _ident_setup(cfg)
    name = cfg.name
    ref = make_reference(supply=supply, T=T, samples=samples)
    ref_path = out / f"{name}_reference.csv"
    write_reference_csv(ref, ref_path, HEADER_MARK + "\n" + cfg.to_ini().rstrip("\n"))
    reps = cfg.get("experiment", "repeats")
    results = map_runs(_ident_worker, cfg, reps)
    dev_names = [f"dev_{p}" for p in PARAM_NAMES]
    files = [ref_path,
             write_csv(out / f"{name}_runs.csv", cfg,
                       ["run", "seed", "final_fitness", "failed_evals", "evaluations", *PARAM_NAMES, *dev_names],
                       [(i, r["seed"], r["final"], r["failed"], r["evals"], *r["x"],
                         *percent_deviation(r["x"], TRUE_VECTOR)) for i, r in enumerate(results)]),
             write_csv(out / f"{name}_series.csv", cfg, ["run", "evaluations", "best"],
                       [(i, int(e), v) for i, r in enumerate(results) for e, v in zip(r["marks"], r["series"])])]
    finals = np.array([r["final"] for r in results])
    devs = np.array([percent_deviation(r["x"], TRUE_VECTOR) for r in results])
    body = (f"identification, optimizer {cfg.get('optimizer', 'algorithm')}, T={T:g} s, "
            f"{samples} samples, {reps} runs\n\n")
    body += aligned(["average", "std. dev.", "min", "max"],
                    [[finals.mean(), finals.std(ddof=1) if reps > 1 else 0.0, finals.min(), finals.max()]])
    body += "\naverage percentage deviation\n" + aligned(list(PARAM_NAMES), [list(devs.mean(axis=0))])
    files.append(write_text(out / f"{name}_summary.txt", cfg, body))
    return files


# schema / influence ---------------------------------------------------------------

def run_schema(cfg: Config, out: Path) -> list[Path]:
    g = lambda k: cfg.get("schema", k)  # noqa: E731
    common = dict(xi0=g("xi0"), p_c=g("p_c"), p_m=g("p_m"), m=g("m"), N=g("N"))
    try:
        if g("table") == "ratio":
            rows = sch.ratio_rows(delta=g("delta"), order=g("order"), **common)
            label = "ratio"
        else:
            rows = sch.shape_rows(ratio=g("ratio"), **common)
            label = "(delta, o)"
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    kw = dict(rounding=g("rounding"), takeover=g("takeover"), label=label)
    text = sch.format_table(rows, **kw)
    csv_text = sch.table_csv(rows, **kw)
    name = cfg.name
    p1 = write_text(out / f"{name}.txt", cfg, text)
    p2 = out / f"{name}.csv"
    p2.write_text(header(cfg) + csv_text, encoding="utf-8", newline="\n")
    return [p1, p2]


def _influence_worker(text: str, i: int) -> dict:
    cfg = _reload(text)
    g = lambda k: cfg.get("influence", k)  # noqa: E731
    seed = run_seed(cfg.get("experiment", "seed"), i)
    curves = {}
    for m in g("levels"):
        base = PsoConfig.clubs_based(default_level=m, w=g("w"), min_level=m, max_level=m, rr=1,
                                     n_clubs=g("clubs"))
        curves[m] = influence_experiment(m, g("dims"), make_rng(seed), g("iterations"),
                                         g("particles"), g("clubs"), cfg=base)
    return curves


def run_influence(cfg: Config, out: Path) -> list[Path]:
    g = lambda k: cfg.get("influence", k)  # noqa: E731
    levels = g("levels")
    if any(not 1 <= m <= g("clubs") for m in levels):
        raise ConfigError("[influence] levels must lie in 1..clubs")
    if g("iterations") < 0:
        raise ConfigError("[influence] iterations must be non-negative")
    reps = cfg.get("experiment", "repeats")
    results = map_runs(_influence_worker, cfg, reps)
    mean = {m: np.mean([r[m] for r in results], axis=0) for m in levels}
    iters = g("iterations")
    name = cfg.name
    p1 = write_csv(out / f"{name}.csv", cfg, ["iteration"] + [f"avg_m{m}" for m in levels],
                   [(t,) + tuple(mean[m][t] for m in levels) for t in range(iters + 1)])
    show = [t for t in (0, 1, 5, 10, 25, 50, 75, 100) if t <= iters]
    body = f"average particle value, {reps} runs, {g('dims')} dims\n\n"
    body += aligned(["iteration"] + [f"m={m}" for m in levels],
                    [[t] + [mean[m][t] for m in levels] for t in show])
    return [p1, write_text(out / f"{name}.txt", cfg, body)]


RUNNERS = {"bench": run_bench, "moo": run_moo, "ident": run_ident, "schema": run_schema,
           "influence": run_influence}
