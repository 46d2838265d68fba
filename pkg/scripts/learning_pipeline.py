"""Offline learning end to end: collect UPOM decisions, train LearnM (and
LearnMI / LearnH where the domain has free parameters), then compare acting
with the learned policy, reactive acting, and planning with a learned
heuristic."""
import argparse
from pathlib import Path

from raeupom.bench import ExperimentConfig, compute_metrics, run_experiment
from raeupom.domains import build
from raeupom.learning import generate_records, save_records, train_heuristic_model, train_method_model, train_param_models
from raeupom.learning.mlp import TrainConfig
from raeupom.planner import PlanConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--domain", default="nav")
    ap.add_argument("--tasks", type=int, default=100, help="training root tasks")
    ap.add_argument("--nro", type=int, default=50)
    ap.add_argument("--epochs", type=int, default=100)
    ap.add_argument("--problems", type=int, default=10)
    ap.add_argument("--runs", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/learning")
    a = ap.parse_args()

    out = Path(a.out) / a.domain
    out.mkdir(parents=True, exist_ok=True)
    bundle = build(a.domain)
    pc = PlanConfig(n_ro=a.nro)
    tc = TrainConfig(epochs=a.epochs, seed=a.seed)

    lm2 = generate_records(bundle, a.tasks, pc, "lm2", a.seed)
    save_records(lm2, out / "lm2.jsonl")
    method = train_method_model(lm2, bundle.domain, tc)
    method.save(out / "method.json")
    print(f"LearnM: {len(lm2)} records, validation accuracy {method.history.val_acc[-1]:.3f}")

    params = []
    mi = generate_records(bundle, a.tasks, pc, "mi", a.seed + 1)
    if mi:
        for target, model in train_param_models(mi, bundle.domain, tc).items():
            path = out / (target.replace("/", "__") + ".json")
            model.save(path)
            params.append(str(path))
            print(f"LearnMI {target}: validation accuracy {model.history.val_acc[-1]:.3f}")

    lh = generate_records(bundle, a.tasks, pc, "lh", a.seed + 2)
    heur = train_heuristic_model(lh, bundle.domain, 10, tc)
    heur.save(out / "heuristic.json")
    print(f"LearnH: {len(lh)} records, validation accuracy {heur.history.val_acc[-1]:.3f}")

    rows = []
    common = dict(domain=a.domain, n_problems=a.problems, runs_per_problem=a.runs, seed=a.seed + 100)
    for mode in ("reactive", "learned", "plan+lh"):
        cfg = ExperimentConfig(mode=mode, n_ro=a.nro, method_model=str(out / "method.json"), param_models=params,
                               heur_model=str(out / "heuristic.json"), out=str(out / f"{mode}.csv"), d_max=5, **common)
        rows += run_experiment(cfg)[1]
    for s in compute_metrics(rows):
        print(f"{s['mode']:>8}  eff {s['efficiency']:.4f}±{s['efficiency_hw']:.4f}  "
              f"success {s['success_ratio']:.3f}  retries {s['retry_ratio']:.2f}")


if __name__ == "__main__":
    main()
