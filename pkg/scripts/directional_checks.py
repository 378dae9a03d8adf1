"""Desk-scale directional comparisons with Welch t-tests.

Runs stationary B=1/2/5, non-stationary B=1 and the scrambled B=5 control
at K=0 (10 runs x 5 landscapes, 10,000 generations each) and prints the
comparisons. Takes roughly 15-25 minutes on one core.
"""

import argparse
import time

from rbnedit.experiments import PRESETS, run_sweep
from rbnedit.records import ExperimentSpec
from rbnedit.stats import NotComputable, welch_t_test


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    base = ExperimentSpec(mode="stationary", K=0, seed=args.seed, log_every=1000, **PRESETS["desk"])
    cells = {
        "stationary B=1": base.with_(B=1),
        "stationary B=2": base.with_(B=2),
        "stationary B=5": base.with_(B=5),
        "nonstationary B=1": base.with_(mode="nonstationary", B=1),
        "scrambled B=5": base.with_(B=5, scramble_control=True),
    }
    fit, pct = {}, {}
    for name, spec in cells.items():
        t0 = time.time()
        recs = run_sweep([spec], args.jobs).records
        fit[name] = [r.result.final_fitness for r in recs]
        pct[name] = [r.result.final_pct_grna for r in recs]
        print(f"{name:20s} fitness={sum(fit[name]) / len(recs):.4f} "
              f"%gRNA={sum(pct[name]) / len(recs):.4f} ({time.time() - t0:.0f}s)", flush=True)

    for what, data, a, b in [
        ("fitness", fit, "stationary B=1", "stationary B=5"),
        ("%gRNA", pct, "stationary B=5", "stationary B=2"),
        ("%gRNA", pct, "nonstationary B=1", "stationary B=1"),
        ("fitness", fit, "stationary B=5", "scrambled B=5"),
    ]:
        try:
            t, df, p = welch_t_test(data[a], data[b])
            print(f"{what}: {a} vs {b}: t={t:.3f} df={df:.1f} p={p:.4g}")
        except NotComputable as exc:
            print(f"{what}: {a} vs {b}: not computable ({exc})")


if __name__ == "__main__":
    main()
