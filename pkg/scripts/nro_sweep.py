"""Efficiency, success ratio and retry ratio as n_ro grows, rescaled by the
purely reactive case (n_ro = 0)."""
import argparse
import math
from pathlib import Path

from raeupom.bench import ExperimentConfig, compute_metrics, emit_summary_plots, run_experiment, write_summary


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--domain", default="snr")
    ap.add_argument("--nro", nargs="+", type=int, default=[0, 5, 10, 50])
    ap.add_argument("--utility", default="efficiency")
    ap.add_argument("--dmax", type=float, default=math.inf)
    ap.add_argument("--heuristic", default="h0", choices=["h0", "hd"])
    ap.add_argument("--problems", type=int, default=10)
    ap.add_argument("--runs", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/sweep")
    a = ap.parse_args()

    out = Path(a.out) / a.domain
    rows = []
    for n in a.nro:
        mode = "reactive" if n == 0 else "plan"
        cfg = ExperimentConfig(domain=a.domain, mode=mode, utility=a.utility, n_ro=max(n, 1), d_max=a.dmax,
                               heuristic=a.heuristic, n_problems=a.problems, runs_per_problem=a.runs, seed=a.seed,
                               out=str(out / f"nro_{n}.csv"))
        rows += run_experiment(cfg)[1]
    summary = compute_metrics(rows)
    print("n_ro  efficiency(rel)  success(rel)  retries(rel)")
    for s in summary:
        print(f"{s['n_ro']:>4}  {s['efficiency']:.4f} ({s.get('efficiency_rel', float('nan')):.2f})  "
              f"{s['success_ratio']:.3f} ({s.get('success_ratio_rel', float('nan')):.2f})  "
              f"{s['retry_ratio']:.2f} ({s.get('retry_ratio_rel', float('nan')):.2f})")
    emit_summary_plots(summary, out)
    write_summary(summary, out / "summary.csv")


if __name__ == "__main__":
    main()
