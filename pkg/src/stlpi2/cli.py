"""Command-line runner: ``stlpi2 run | compare | monitor``.

Exit status is 0 on success, 1 for invalid input (configs, formulas, files)
and 2 when a run fails at runtime.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import yaml

from . import experiments, io, plots, scenarios
from .pi2 import Pi2Error
from .scenarios import ConfigError
from .sim import SimulationError
from .stl import StlSyntaxError, WindowError, parse_formula, robustness, to_text

OUT_ENV = "STLPI2_OUT"


class UsageError(ValueError):
    pass


def _default_out() -> Path:
    return Path(os.environ.get(OUT_ENV, "runs"))


def resolve(ref: str) -> scenarios.ScenarioConfig:
    """Builtin name, scenario file, or run manifest."""
    if ref.endswith(".json") and Path(ref).is_file():
        return scenarios.from_dict(io.read_manifest(ref)["config"])
    return scenarios.resolve(ref)


def _scenario_ref(args) -> str:
    ref = args.scenario_opt or args.scenario
    if not ref:
        raise UsageError("no scenario given (positional or --scenario)")
    return ref


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _say(args, msg: str) -> None:
    if not getattr(args, "quiet", False):
        print(msg, flush=True)


# ---------------------------------------------------------------------------
# run

def _emit_run(outcome: experiments.Outcome, out: Path, with_plots: bool) -> dict:
    cfg, problem, res = outcome.config, outcome.problem, outcome.result
    law = experiments.subtask_law(cfg, problem)
    traj = outcome.trajectory()
    summary = outcome.summary()
    io.write_history(out / "history.jsonl", res.history)
    io.write_trajectory(out / "trajectory.csv", traj, law)
    io.write_atomic(out / "scenario.yaml", _yaml(cfg))
    io.write_manifest(out / "manifest.json", scenarios.to_dict(cfg), outcome.seed, summary)
    if with_plots:
        table = scenarios.predicate_table(cfg)
        plots.overhead(out / "plots" / "overhead.svg", traj, list(table.values()), cfg.name)
        plots.funnels(out / "plots" / "funnels.svg", traj, law)
        plots.convergence(out / "plots" / "convergence.svg", res.history,
                          (res.initial_cost, res.initial_rho), problem.rho_min)
    return summary


def _yaml(cfg) -> str:
    return yaml.safe_dump(scenarios.to_dict(cfg), sort_keys=False)


def cmd_run(args) -> int:
    base_cfg = resolve(_scenario_ref(args))
    cfg = experiments.configure(
        base_cfg, seed=args.seed, base=args.base, iterations=args.iterations,
        samples=args.samples, nesterov=False if args.no_nesterov else None,
    )
    out = Path(args.out) if args.out else (
        _default_out() / f"{cfg.name}-{cfg.base.kind}-seed{cfg.pi2.master_seed}")

    def progress(rec):
        _say(args, f"k={rec.k:3d} lambda={rec.lam:10.1f} min J={rec.min_J:10.4f} "
                   f"C={rec.cost:8.4f} rho={rec.rho:8.4f}")

    outcome = experiments.execute(cfg, progress=progress)
    s = _emit_run(outcome, out, args.plots)
    first = s["first_satisfied"]
    print(f"{cfg.name} [{cfg.base.kind}] seed={cfg.pi2.master_seed}: "
          f"C={s['final_cost']:.4f} rho={s['final_rho']:.4f} "
          f"(initial C={s['initial_cost']:.4f} rho={s['initial_rho']:.4f}; "
          f"first satisfied at k={first if first is not None else 'never'}) -> {out}")
    return 0


# ---------------------------------------------------------------------------
# compare

def cmd_compare(args) -> int:
    cfg = resolve(_scenario_ref(args))
    if args.iterations is not None:
        cfg = experiments.configure(cfg, iterations=args.iterations)
    bases = [b.strip() for b in args.bases.split(",") if b.strip()]
    for b in bases:
        if b not in ("ppc", "lin", "zero"):
            raise UsageError(f"unknown base {b!r}")
    nest = {"on": [True], "off": [False], "both": [True, False]}[args.nesterov]
    samples = [int(v) for v in _floats(args.samples)] if args.samples else [cfg.pi2.N]
    cmins = _floats(args.cmin) if args.cmin else [cfg.pi2.Cmin]
    vlist = experiments.variants(bases, nest, samples, cmins)
    _say(args, f"{len(vlist)} variant(s) x {args.repeats} repeat(s)")
    results = experiments.compare(cfg, vlist, args.repeats, first_seed=args.seed or 0,
                                  eval_rollouts=args.eval_rollouts, jobs=args.jobs)
    out = Path(args.out) if args.out else _default_out() / f"{cfg.name}-compare"
    K = cfg.pi2.K

    def key(v):
        return [v.base, int(v.nesterov), v.samples, float(v.Cmin)]

    io.write_table(out / "curves.csv", ["base", "nesterov", "N", "Cmin", "k", "mean_C", "mean_rho"],
                   (key(v) + [k, float(r["mean_cost"][k]), float(r["mean_rho"][k])]
                    for v, r in results.items() for k in range(len(r["mean_cost"]))))
    io.write_table(out / "runs.csv", ["base", "nesterov", "N", "Cmin", "seed", "final_C",
                                      "final_rho", "first_satisfied"],
                   (key(v) + [seed, float(s["final_cost"]), float(s["final_rho"]),
                              "" if s["first_satisfied"] is None else s["first_satisfied"]]
                    for v, r in results.items() for seed, s in zip(r["seeds"], r["runs"])))
    noise_rows = []
    for v, r in results.items():
        for seed, nz in zip(r["seeds"], r["noise"]):
            if nz is None:
                continue
            c, rho = np.array(nz[0]), np.array(nz[1])
            noise_rows.append(key(v) + [seed, float(np.nanmean(c)), float(np.nanstd(c)),
                                        float(np.nanmean(rho)), float(np.nanstd(rho))])
    if noise_rows:
        io.write_table(out / "noise.csv", ["base", "nesterov", "N", "Cmin", "seed", "C_mean",
                                           "C_std", "rho_mean", "rho_std"], noise_rows)
    rows = []
    print(f"{'variant':40s} {'first sat.':>10s} {'final C':>9s} {'final rho':>10s}")
    for v, r in results.items():
        fs = experiments.first_satisfaction(r["runs"], K)
        fc = float(np.mean([s["final_cost"] for s in r["runs"]]))
        fr = float(np.mean([s["final_rho"] for s in r["runs"]]))
        rows.append(key(v) + [fs, fc, fr])
        print(f"{v.label:40s} {fs:10.2f} {fc:9.4f} {fr:10.4f}")
    io.write_table(out / "summary.csv", ["base", "nesterov", "N", "Cmin", "mean_first_satisfied",
                                         "mean_final_C", "mean_final_rho"], rows)
    for row in noise_rows:
        print(f"noise {row[0].upper()} seed={row[4]}: C={row[5]:.3f}+-{row[6]:.3f} "
              f"rho={row[7]:.4f}+-{row[8]:.4f}")
    if args.plots:
        plots.curves(out / "plots" / "curves.svg",
                     {v.label: (r["mean_cost"], r["mean_rho"]) for v, r in results.items()},
                     cfg.rho_min)
    _say(args, f"-> {out}")
    return 0


# ---------------------------------------------------------------------------
# monitor

def _subformulas(phi):
    seen, out = set(), []
    for node in phi.walk():
        text = to_text(node)
        if text not in seen:
            seen.add(text)
            out.append((text, node))
    return out


def cmd_monitor(args) -> int:
    traj_path = Path(args.trajectory)
    ref = args.scenario_opt
    if ref is None:
        sibling = traj_path.parent / "manifest.json"
        if not sibling.is_file():
            raise UsageError("no --scenario given and no manifest.json next to the trajectory")
        ref = str(sibling)
    cfg = resolve(ref)
    table = scenarios.predicate_table(cfg)
    phi = parse_formula(args.formula, table)
    traj = io.read_trajectory(traj_path)
    for text, node in _subformulas(phi):
        try:
            value = repr(robustness(node, traj, traj.t0))
        except WindowError:
            value = "undefined"
        print(f"{value:>20s}  {text}")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stlpi2", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def scenario_args(sp):
        sp.add_argument("scenario", nargs="?", help="builtin name, scenario file or run manifest")
        sp.add_argument("--scenario", dest="scenario_opt", metavar="REF")

    r = sub.add_parser("run", help="optimize a policy for one scenario")
    scenario_args(r)
    r.add_argument("--seed", type=int)
    r.add_argument("--base", choices=("ppc", "lin", "zero"))
    r.add_argument("--iterations", type=int)
    r.add_argument("--samples", type=int)
    r.add_argument("--no-nesterov", action="store_true")
    r.add_argument("--out", help=f"run directory (default ${OUT_ENV}/<scenario>-<base>-seed<k>)")
    r.add_argument("--plots", action="store_true", help="also write SVG plots")
    r.add_argument("--quiet", action="store_true")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="repeat runs over base laws and hyperparameters")
    scenario_args(c)
    c.add_argument("--repeats", type=int, default=20)
    c.add_argument("--seed", type=int, default=0, help="seed of the first repeat")
    c.add_argument("--bases", default="ppc,lin")
    c.add_argument("--nesterov", choices=("on", "off", "both"), default="both")
    c.add_argument("--samples", help="comma-separated N values (default: scenario's)")
    c.add_argument("--cmin", help="comma-separated Cmin scales (default: scenario's)")
    c.add_argument("--iterations", type=int)
    c.add_argument("--eval-rollouts", type=int, default=30)
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--out")
    c.add_argument("--plots", action="store_true")
    c.add_argument("--quiet", action="store_true")
    c.set_defaults(func=cmd_compare)

    m = sub.add_parser("monitor", help="robustness of a formula on a trajectory file")
    m.add_argument("formula")
    m.add_argument("trajectory")
    m.add_argument("--scenario", dest="scenario_opt", metavar="REF",
                   help="where predicates come from (default: manifest next to the trajectory)")
    m.set_defaults(func=cmd_monitor)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (Pi2Error, SimulationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, StlSyntaxError, UsageError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
