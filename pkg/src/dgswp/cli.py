"""Command-line experiment driver.

Usage: ``dgswp <command> [--config PATH] [--seed N] [--out DIR] [--threads N] [--set key=value ...]``
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time

import numpy as np

from . import __version__, config as config_mod, svg
from .coupling_sampler import CouplingSampler, PairBatch
from .experiments import (DEFAULTS, STEIN, as_tuple, chunks, flow_summary, hflow_instance,
                          inputs_hash, load_points, optimizer_config, plan_instance, flow_instance,
                          run_ablation, run_bench, run_flows, run_hflows, run_plan, trace_rows)
from .gswp import set_workers
from .measures import RngStream, as_generator
from .projectors import linear, mlp_init_he, random_direction

log = logging.getLogger("dgswp")

SCHEMAS = """\
output files (CSV, UTF-8, one header row):
  plan       costs.csv          method,cost,ratio_to_exact
             plan_<method>.csv  i,j,mass
             curve_<method>.csv t,h,norm_theta
             plan.svg, curves.svg
  ablate-vr  curves.csv         t,vr_mean,vr_q25,vr_q75,naive_mean,naive_q25,naive_q75
             final.csv          seed,vr,naive
             variance.csv       coord,var_vr,var_naive
             ablation.svg
  flow/hflow trace_<method>.csv step,log10_W2,objective
             final_<method>.csv x0,...,x{d-1},weight
             summary.csv        method,initial_log10_W2,final_log10_W2
             flow.svg, final.svg
  couple     pairs.csv          x0_0,...,x0_{d-1},x1_0,...,x1_{d-1},cost
             pair_index.csv     src_index,tgt_index
  bench      bench.csv          budget,seconds,method,iterations,log10_W2
every run also writes manifest.json (resolved config, version, inputs hash,
file list) and timings.json (wall-clock seconds; not reproducible bit-for-bit,
nor is bench.csv).
"""


def _jsonable(cfg):
    return {k: list(v) if isinstance(v, tuple) else v for k, v in sorted(cfg.items())}


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _manifest(out, command, cfg, digest, timings):
    with open(os.path.join(out, "timings.json"), "w", encoding="utf-8") as fh:
        json.dump(timings, fh, indent=2, sort_keys=True)
    files = sorted(f for f in os.listdir(out) if f != "manifest.json")
    doc = {"command": command, "version": __version__, "config": _jsonable(cfg),
           "inputs_sha256": digest, "outputs": files}
    with open(os.path.join(out, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_plan(cfg, out):
    start = time.perf_counter()
    res = run_plan(cfg)
    exact = res.costs["exact"]
    rows = [(k, v, v / exact if exact > 0 else float("nan")) for k, v in res.costs.items()]
    _write_csv(os.path.join(out, "costs.csv"), ["method", "cost", "ratio_to_exact"], rows)
    for name, plan in res.plans.items():
        plan.to_csv(os.path.join(out, f"plan_{name}.csv"))
    for name, trace in res.traces.items():
        _write_csv(os.path.join(out, f"curve_{name}.csv"), ["t", "h", "norm_theta"], trace_rows(trace))
    svg.scatter_with_plan(os.path.join(out, "plan.svg"), res.source.points, res.target.points,
                          res.plans["dgswp_mlp"], "lifted plan, mlp slice")
    svg.line_plot(os.path.join(out, "curves.svg"),
                  {k: (np.arange(len(t.h)), t.h) for k, t in res.traces.items()},
                  "objective during optimization", "iteration", "ambient cost")
    for name, cost, ratio in rows:
        log.info("%-14s %.6f  (x%.4f of exact)", name, cost, ratio)
    log.info("smoothed-plan cost of the mlp slice: %.6f", res.smoothed_cost)
    return inputs_hash(res.source, res.target), {"total": time.perf_counter() - start}


def cmd_ablate_vr(cfg, out):
    start = time.perf_counter()
    res = run_ablation(cfg)
    steps = res.curves["vr"].shape[1]
    cols = []
    for k in ("vr", "naive"):
        c = res.curves[k]
        cols += [c.mean(axis=0), np.quantile(c, 0.25, axis=0), np.quantile(c, 0.75, axis=0)]
    _write_csv(os.path.join(out, "curves.csv"),
               ["t", "vr_mean", "vr_q25", "vr_q75", "naive_mean", "naive_q25", "naive_q75"],
               [(t, *(col[t] for col in cols)) for t in range(steps)])
    seeds = int(cfg["seed"]) + np.arange(len(res.final["vr"]))
    _write_csv(os.path.join(out, "final.csv"), ["seed", "vr", "naive"],
               zip(seeds.tolist(), res.final["vr"], res.final["naive"]))
    _write_csv(os.path.join(out, "variance.csv"), ["coord", "var_vr", "var_naive"],
               zip(range(len(res.variance["vr"])), res.variance["vr"], res.variance["naive"]))
    t = np.arange(steps)
    svg.line_plot(os.path.join(out, "ablation.svg"),
                  {"with control variate": (t, cols[0]), "naive": (t, cols[3])},
                  "mean objective over seeds", "iteration", "ambient cost")
    log.info("final mean cost: vr %.4f, naive %.4f", res.final["vr"].mean(), res.final["naive"].mean())
    log.info("coordinates where the control variate lowers variance: %.1f%%", 100 * res.frac_vr_lower)
    mu, nu = plan_instance(cfg)
    return inputs_hash(mu, nu), {"total": time.perf_counter() - start}


def _write_flows(res, out, title):
    timings = {}
    for name, tr in res.traces.items():
        tr.to_csv(os.path.join(out, f"trace_{name}.csv"))
        tr.final.to_csv(os.path.join(out, f"final_{name}.csv"))
        timings[name] = tr.elapsed
    _write_csv(os.path.join(out, "summary.csv"), ["method", "initial_log10_W2", "final_log10_W2"],
               flow_summary(res.traces))
    svg.line_plot(os.path.join(out, "flow.svg"),
                  {k: (tr.steps, np.log10(np.maximum(tr.w2, 1e-300))) for k, tr in res.traces.items()},
                  title, "outer step", "log10 W2")
    first = next(iter(res.traces.values()))
    svg.scatter_with_plan(os.path.join(out, "final.svg"), first.final.points, res.target.points,
                          title=f"final particles ({next(iter(res.traces))})")
    for name, a, b in flow_summary(res.traces):
        log.info("%-16s log10 W2 %.3f -> %.3f", name, a, b)
    return timings


def cmd_flow(cfg, out):
    res = run_flows(cfg)
    timings = _write_flows(res, out, "Euclidean flow")
    return inputs_hash(res.source, res.target), timings


def cmd_hflow(cfg, out):
    res = run_hflows(cfg)
    timings = _write_flows(res, out, "Poincare-ball flow")
    return inputs_hash(res.source, res.target), timings


def cmd_couple(cfg, out):
    if not cfg["source"] or not cfg["target"]:
        raise config_mod.ConfigError("couple needs source=PATH and target=PATH (CSV point files)")
    mu, nu = load_points(cfg["source"]), load_points(cfg["target"])
    if mu.n != nu.n or mu.dim != nu.dim:
        raise ValueError(f"point files differ in shape: {mu.points.shape} vs {nu.points.shape}")
    seed, p = int(cfg["seed"]), float(cfg["p"])
    if cfg["projector"] == "mlp":
        layers = (mu.dim,) + tuple(int(k) for k in as_tuple(cfg["mlp.layers"]))[1:]
        proj = mlp_init_he(layers, RngStream(seed, 4), cfg["mlp.activation"])
    elif cfg["projector"] == "linear":
        proj = linear(random_direction(mu.dim, RngStream(seed, 4)))
    else:
        raise config_mod.ConfigError(f"unknown projector {cfg['projector']!r}")
    start = time.perf_counter()
    sampler = CouplingSampler(proj, optimizer_config(cfg, int(cfg["steps_per_call"]), STEIN), p,
                              as_generator(RngStream(seed, STEIN)))
    parts = chunks(mu.n, int(cfg["aggregate"]))
    if int(cfg["warmup"]) > 0:
        sampler.warmup(mu.points[parts[0]], nu.points[parts[0]], int(cfg["warmup"]))
    batches = []
    for idx in parts:
        b = sampler(mu.points[idx], nu.points[idx])
        batches.append(PairBatch(b.x0, b.x1, idx[b.src_index], idx[b.tgt_index], b.pair_cost,
                                 b.plan_cost, b.theta_id, b.plan))
    joined = PairBatch(np.vstack([b.x0 for b in batches]), np.vstack([b.x1 for b in batches]),
                       np.concatenate([b.src_index for b in batches]),
                       np.concatenate([b.tgt_index for b in batches]),
                       np.concatenate([b.pair_cost for b in batches]),
                       float(np.mean([b.plan_cost for b in batches])), batches[-1].theta_id,
                       batches[-1].plan)
    joined.to_csv(os.path.join(out, "pairs.csv"))
    _write_csv(os.path.join(out, "pair_index.csv"), ["src_index", "tgt_index"],
               zip(joined.src_index.tolist(), joined.tgt_index.tolist()))
    log.info("%d pairs, mean pair cost %.6f, slice %s", len(joined), joined.mean_cost, joined.theta_id)
    return inputs_hash(mu, nu), {"total": time.perf_counter() - start}


def cmd_bench(cfg, out):
    res = run_bench(cfg)
    _write_csv(os.path.join(out, "bench.csv"), ["budget", "seconds", "method", "iterations", "log10_W2"],
               [(r.budget, r.seconds, r.method, r.iterations, r.log10_w2) for r in res.rows])
    for (a, b), lead in zip(res.pairs(), res.leaders):
        log.info("%.2fs  min-SWGG %5d it %.3f | DGSWP %4d it %.3f  -> %s",
                 a.seconds, a.iterations, a.log10_w2, b.iterations, b.log10_w2, lead)
    mu, nu = flow_instance(dict(cfg, source="hypercube", target="swiss_roll"))
    return inputs_hash(mu, nu), {"budgets": [r.seconds for r in res.rows[::2]]}


COMMANDS = {
    "plan": (cmd_plan, "exact OT, min-SWGG and DGSWP plans on Gaussians -> moons"),
    "ablate-vr": (cmd_ablate_vr, "control-variate ablation of the gradient estimator"),
    "flow": (cmd_flow, "Euclidean particle flows, hypercube -> swiss roll"),
    "hflow": (cmd_hflow, "particle flows on the Poincare ball, wrapped normals"),
    "couple": (cmd_couple, "pair two CSV point files through a lifted slice plan"),
    "bench": (cmd_bench, "min-SWGG vs DGSWP(linear) at matched wall-clock budgets"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dgswp", description=__doc__.splitlines()[0],
                                     epilog=SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"dgswp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        keys = "config keys (defaults):\n" + config_mod.dump(DEFAULTS[name])
        sp = sub.add_parser(name, help=help_text, description=help_text,
                            epilog=keys + "\n" + SCHEMAS,
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.add_argument("--config", metavar="PATH", help="flat 'key = value' config file")
        sp.add_argument("--seed", type=int, help="base seed (overrides the config)")
        sp.add_argument("--out", metavar="DIR", default=None, help="output directory (default runs/<command>)")
        sp.add_argument("--threads", type=int, default=1, help="worker threads for plan evaluations")
        sp.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key; repeatable")
        sp.add_argument("-q", "--quiet", action="store_true")
    return parser


def resolve_config(command, args) -> dict:
    layers = []
    if args.config:
        layers.append(config_mod.load(args.config))
    layers.append(config_mod.parse_overrides(args.overrides))
    if args.seed is not None:
        layers.append({"seed": args.seed})
    return config_mod.resolve(DEFAULTS[command], *layers)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(args.command, args)
    except (config_mod.ConfigError, OSError) as exc:
        parser.exit(2, f"dgswp: error: {exc}\n")
    if args.threads < 1:
        parser.exit(2, "dgswp: error: --threads must be >= 1\n")
    set_workers(args.threads)
    out = args.out or os.path.join("runs", args.command)
    os.makedirs(out, exist_ok=True)
    func = COMMANDS[args.command][0]
    try:
        digest, timings = func(cfg, out)
    except (config_mod.ConfigError, ValueError) as exc:
        parser.exit(2, f"dgswp: error: {exc}\n")
    _manifest(out, args.command, cfg, digest, timings)
    log.info("wrote %s", out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
