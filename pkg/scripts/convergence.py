"""How often UPOM's choice matches the exact optimum as n_ro grows, on Toy
and on random static micro-domains, against the exhaustive oracle."""
import argparse
import random

from raeupom.domains import build
from raeupom.model import TaskInstance
from raeupom.oracle import gen_micro_domain, optimal_method, utility_table
from raeupom.planner import PlanConfig, plan_select
from raeupom.stack import EMPTY
from raeupom.utility import Kind


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nro", nargs="+", type=int, default=[10, 100, 1000])
    ap.add_argument("--domains", type=int, default=20, help="number of micro-domains with a real choice")
    ap.add_argument("--runs", type=int, default=5)
    ap.add_argument("--utility", default="efficiency")
    a = ap.parse_args()
    kind = Kind.parse(a.utility)

    toy = build("toy").domain
    best_toy, _ = optimal_method(toy, TaskInstance("t"), toy.new_state(), kind)
    micro, s = [], 0
    while len(micro) < a.domains:
        d, tau, st = gen_micro_domain(s)
        tab = utility_table(d, tau, st, kind)
        vals = [v for _, v in tab]
        if len(vals) > 1 and max(vals) - min(vals) > 1e-12:
            micro.append((d, tau, st, {m.identity for m, v in tab if v >= max(vals) - 1e-12}))
        s += 1

    print("n_ro   toy   micro")
    for n in a.nro:
        cfg = PlanConfig(n_ro=n, utility=kind)
        toy_rate = sum(plan_select(toy.new_state(), TaskInstance("t"), EMPTY, cfg, toy, random.Random(i)).identity
                       == best_toy.identity for i in range(100)) / 100
        hits = sum(plan_select(st, tau, EMPTY, cfg, d, random.Random(r)).identity in good
                   for d, tau, st, good in micro for r in range(a.runs))
        print(f"{n:>5}  {toy_rate:.2f}  {hits / (len(micro) * a.runs):.2f}")


if __name__ == "__main__":
    main()
