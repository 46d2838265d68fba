"""Reactive acting vs. acting with UPOM on each domain (desk scale).

Prints efficiency, success ratio and retry ratio with 95% half-widths and
writes per-cell CSVs plus summary charts under --out.
"""
import argparse
from pathlib import Path

from raeupom.bench import ExperimentConfig, compute_metrics, emit_summary_plots, run_experiment, write_summary


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--domains", nargs="+", default=["fetch", "snr", "nav"])
    ap.add_argument("--problems", type=int, default=10)
    ap.add_argument("--runs", type=int, default=5)
    ap.add_argument("--nro", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/trends")
    a = ap.parse_args()

    out = Path(a.out)
    for domain in a.domains:
        rows = []
        for mode, utility in (("reactive", "efficiency"), ("plan", "efficiency"), ("plan", "success-ratio")):
            cfg = ExperimentConfig(domain=domain, mode=mode, utility=utility, n_ro=a.nro, n_problems=a.problems,
                                   runs_per_problem=a.runs, seed=a.seed,
                                   out=str(out / f"{domain}_{mode}_{utility}.csv"))
            rows += run_experiment(cfg)[1]
        summary = compute_metrics(rows)
        print(f"== {domain}")
        for s in summary:
            print(f"  {s['mode']:>8} {s['utility']:>13}  eff {s['efficiency']:.4f}±{s['efficiency_hw']:.4f}  "
                  f"success {s['success_ratio']:.3f}±{s['success_ratio_hw']:.3f}  "
                  f"retries {s['retry_ratio']:.2f}±{s['retry_ratio_hw']:.2f}")
        emit_summary_plots(summary, out / domain)
        write_summary(summary, out / domain / "summary.csv")


if __name__ == "__main__":
    main()
