"""Command-line entry point: ``run``, ``oracle``, ``gen-data``, ``train``."""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import bench
from .domains import NAMES, build
from .errors import RaeUpomError
from .model import TaskInstance
from .utility import Kind


def _float(x: str) -> float:
    return math.inf if x.lower() in ("inf", "infinity") else float(x)


def _load_config(path) -> dict:
    """JSON object whose keys are flag names (dashes or underscores)."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise SystemExit(f"cannot read config {path}: {e}")
    if not isinstance(data, dict):
        raise SystemExit(f"config {path} must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="raeupom", description="Acting and planning with operational models.")
    p.add_argument("--config", help="JSON file supplying values for any flag")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment sweep and write a CSV")
    r.add_argument("--domain", choices=NAMES, default="toy")
    r.add_argument("--mode", nargs="+", choices=bench.MODES, default=["reactive"])
    r.add_argument("--utility", default="efficiency", choices=["efficiency", "success-ratio", "eff", "sr"])
    r.add_argument("--nro", nargs="+", type=int, default=[50], help="rollouts per Select (several for a sweep)")
    r.add_argument("--dmax", type=_float, default=math.inf)
    r.add_argument("--C", type=float, default=1.0)
    r.add_argument("--heuristic", choices=["h0", "hd", "learned"], default="h0")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--problems", type=int, default=5)
    r.add_argument("--runs", type=int, default=20)
    r.add_argument("--difficulty", type=float, default=1.0)
    r.add_argument("--cutoff", type=float, default=1800.0, help="wall-clock seconds per run")
    r.add_argument("--wall-clock", action="store_true", help="record wall_ms (makes CSVs run-dependent)")
    r.add_argument("--method-model")
    r.add_argument("--param-model", action="append", default=[])
    r.add_argument("--heur-model")
    r.add_argument("--out", help="CSV path (default: $%s/<domain>.csv)" % bench.OUT_ENV)
    r.add_argument("--plots", help="directory for summary CSV/SVG charts")

    o = sub.add_parser("oracle", help="exact method utilities on a domain's default problem")
    o.add_argument("--domain", choices=NAMES, default="toy")
    o.add_argument("--task", required=True)
    o.add_argument("--args", nargs="*", default=[], help="task arguments as JSON literals")
    o.add_argument("--utility", default="efficiency", choices=["efficiency", "success-ratio", "eff", "sr"])

    g = sub.add_parser("gen-data", help="generate training records")
    g.add_argument("--domain", choices=NAMES, default="toy")
    g.add_argument("--procedure", choices=["lm1", "lm2", "lmi", "lh"], required=True)
    g.add_argument("--tasks", type=int, default=100)
    g.add_argument("--nro", type=int, default=50)
    g.add_argument("--utility", default="efficiency", choices=["efficiency", "success-ratio", "eff", "sr"])
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    t = sub.add_parser("train", help="train a model from a record file")
    t.add_argument("--domain", choices=NAMES)
    t.add_argument("--procedure", choices=["lm1", "lm2", "lmi", "lh"], required=True)
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True, help="model file (for lmi: a directory)")
    t.add_argument("--epochs", type=int, default=100)
    t.add_argument("--lr", type=float, default=0.05)
    t.add_argument("--batch", type=int, default=16)
    t.add_argument("--hidden", type=int)
    t.add_argument("--k", type=int, default=10, help="utility intervals for lh")
    t.add_argument("--seed", type=int, default=0)
    return p


def parse(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = _load_config(args.config)
        # re-parse with the file's values as defaults so explicit flags still win
        for action in parser._subparsers._group_actions[0].choices.values():
            action.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def cmd_run(a) -> int:
    summaries = []
    base = a.out
    modes = [a.mode] if isinstance(a.mode, str) else list(a.mode)
    nro_list = [a.nro] if isinstance(a.nro, int) else list(a.nro)
    cells = []
    for mode in modes:
        for n in ([0] if mode in ("reactive", "learned") else nro_list):
            # n_ro = 0 is the purely reactive base case
            cell = ("reactive", 0) if n == 0 and mode in ("plan", "plan+lh") else (mode, n)
            if cell not in cells:
                cells.append(cell)
    for mode, n in cells:
        cfg = bench.ExperimentConfig(
            domain=a.domain, mode=mode, utility=a.utility, n_ro=n, d_max=a.dmax, C=a.C,
            heuristic=a.heuristic, n_problems=a.problems, runs_per_problem=a.runs, seed=a.seed,
            wall_cutoff=a.cutoff, difficulty=a.difficulty, record_wall=a.wall_clock,
            method_model=a.method_model, param_models=a.param_model, heur_model=a.heur_model,
        )
        if base and len(cells) == 1:
            cfg.out = base
        elif base:
            stem = Path(base)
            cfg.out = str(stem.with_name(f"{stem.stem}_{mode.replace('+', '_')}_{cfg.effective_n_ro}{stem.suffix}"))
        else:
            cfg.out = str(bench.default_out_dir() / f"{a.domain}_{mode.replace('+', '_')}_{cfg.effective_n_ro}_s{a.seed}.csv")
        path, rows, _ = bench.run_experiment(cfg)
        summaries.extend(rows)
        print(f"wrote {path}")
    summary = bench.compute_metrics(summaries)
    for row in summary:
        print(f"{row['mode']:>8} n_ro={row['n_ro']:<4} efficiency={row['efficiency']:.4f}±{row['efficiency_hw']:.4f} "
              f"success={row['success_ratio']:.3f}±{row['success_ratio_hw']:.3f} "
              f"retry={row['retry_ratio']:.3f}±{row['retry_ratio_hw']:.3f}")
    if a.plots:
        bench.emit_summary_plots(summary, a.plots)
        bench.write_summary(summary, Path(a.plots) / "summary.csv")
    return 0


def cmd_oracle(a) -> int:
    from .oracle import utility_table

    bundle = build(a.domain)
    problem = bundle.default_problem()
    s = problem.initial_state(bundle.domain)
    targs = tuple(_literal(x) for x in a.args)
    kind = Kind.parse(a.utility)
    for m, v in utility_table(bundle.domain, TaskInstance(a.task, targs), s, kind):
        print(f"{m}\t{v!r}")
    return 0


def _literal(x: str):
    try:
        v = json.loads(x)
    except json.JSONDecodeError:
        return x
    return tuple(v) if isinstance(v, list) else v


def cmd_gen_data(a) -> int:
    from .learning import generate_records, save_records
    from .planner import PlanConfig

    mode = "mi" if a.procedure == "lmi" else a.procedure
    recs = generate_records(build(a.domain), a.tasks, PlanConfig(n_ro=a.nro, utility=a.utility), mode, a.seed)
    save_records(recs, a.out)
    print(f"wrote {len(recs)} records to {a.out}")
    return 0


def cmd_train(a) -> int:
    from .learning import TrainConfig, load_records, train_heuristic_model, train_method_model, train_param_models

    recs = load_records(a.data)
    domain = build(a.domain).domain if a.domain else None
    cfg = TrainConfig(lr=a.lr, epochs=a.epochs, batch_size=a.batch, seed=a.seed)
    if a.procedure in ("lm1", "lm2"):
        model = train_method_model(recs, domain, cfg, a.hidden)
        model.save(a.out)
        print(f"validation accuracy {model.history.val_acc[-1]:.3f}; wrote {a.out}")
    elif a.procedure == "lh":
        model = train_heuristic_model(recs, domain, a.k, cfg, a.hidden)
        model.save(a.out)
        print(f"validation accuracy {model.history.val_acc[-1]:.3f}; wrote {a.out}")
    else:
        out = Path(a.out)
        out.mkdir(parents=True, exist_ok=True)
        for target, model in train_param_models(recs, domain, cfg, a.hidden).items():
            path = out / (target.replace("/", "__") + ".json")
            model.save(path)
            print(f"{target}: validation accuracy {model.history.val_acc[-1]:.3f}; wrote {path}")
    return 0


COMMANDS = {"run": cmd_run, "oracle": cmd_oracle, "gen-data": cmd_gen_data, "train": cmd_train}


def main(argv=None) -> int:
    args = parse(argv)
    try:
        return COMMANDS[args.command](args)
    except RaeUpomError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
