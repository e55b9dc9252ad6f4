"""Regenerate the sweep data behind the sum-SE figures as CSV files.

Each figure is one sweep of one variable with everything else at the
Table-2 defaults (SNR = 0 dB, Gamma = 0 dB, N = 16).  Figures that the
paper draws for two RIS sizes are run at N = 16 and N = 32.

    python scripts/run_figures.py --out results --trials 50 fig3 fig4
    python scripts/run_figures.py --out results --trials 5          # all figures
"""
import argparse
import time
from pathlib import Path

from riscr.config import ScenarioConfig, load_config
from riscr.harness import emit_csv, run_sweep

FIGURES = {
    "fig2": ("N", [16, 32, 48, 64], (None,)),
    "fig3": ("snr", [-10, -5, 0, 5, 10, 15, 20], (16, 32)),
    "fig4": ("gamma", [-10, -5, 0, 5, 10, 15, 20], (16, 32)),
    "fig6": ("Nr", [2, 4, 8, 16], (16,)),
    "fig7": ("M", [2, 3, 4, 5, 6], (16, 32)),
    "fig8": ("dris", [10, 30, 50, 70, 90], (16,)),
    "fig9": ("Nt", [16, 32, 60, 128], (16, 32)),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("figures", nargs="*", default=sorted(FIGURES), choices=sorted(FIGURES))
    ap.add_argument("--config", help="INI scenario file overriding the defaults")
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results")
    args = ap.parse_args(argv)

    base = load_config(args.config) if args.config else ScenarioConfig()
    if args.trials is not None:
        base = base.replace(trials=args.trials)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.figures:
        variable, values, ris_sizes = FIGURES[name]
        for n in ris_sizes:
            cfg = base if n is None else base.replace(N=n)
            t0 = time.perf_counter()
            res = run_sweep(cfg, variable, values, workers=args.workers)
            path = out / (f"{name}.csv" if n is None else f"{name}_N{n}.csv")
            emit_csv(res, path)
            print(f"{path}: {len(res)} rows in {time.perf_counter() - t0:.0f}s")


if __name__ == "__main__":
    main()
