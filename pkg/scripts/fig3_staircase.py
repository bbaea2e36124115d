"""Average final cell against gamma for the sigmoid pulse pair.

Runs the sweep from a config, writes sweep.csv/sweep.svg and prints the
detected transitions, plateau spreads and midpoint fidelities.
"""

import argparse
from pathlib import Path

from wsladder.cli import load_config, sweep_from_config, write_sweep_outputs
from wsladder.sweep import SweepResult, boundary_gamma, detect_transitions, plateau_deviation, plateau_midpoints, variance_peaks

ROOT = Path(__file__).resolve().parents[1]


def summarize(result: SweepResult, delta: float):
    print("transitions (k, gamma, predicted, rel. error):")
    for k, g in detect_transitions(result):
        b = boundary_gamma(k, delta)
        print(f"  {k}  {g:8.3f}  {b:8.3f}  {abs(g - b) / b:.4f}")
    print("plateau spread (cell, max - min):")
    for cell, dev in plateau_deviation(result, 0.2 * delta).items():
        print(f"  {cell}  {dev:.4f}")
    print("midpoints (cell, gamma, mean cell, fidelity):")
    for cell, row in plateau_midpoints(result):
        print(f"  {cell}  {row.gamma:8.3f}  {row.mean_cell:.4f}  {row.fidelity:.4f}")
    print("variance peaks (k, gamma, variance):")
    for k, g, v in variance_peaks(result):
        print(f"  {k}  {g:8.3f}  {v:.4f}")


def main(default_config="fig3_staircase.json"):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=ROOT / "configs" / default_config)
    ap.add_argument("--out", default=None)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--n-sites", type=int, default=None, help="override n_sites from the config")
    args = ap.parse_args()
    cfg = load_config(args.config)
    if args.n_sites is not None:
        cfg.n_sites = args.n_sites
    out = Path(args.out or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = sweep_from_config(cfg, workers=args.workers)
    write_sweep_outputs(cfg, out, result)
    print(f"wrote {out / 'sweep.csv'} ({len(result.rows)} rows)")
    summarize(result, cfg.delta)


if __name__ == "__main__":
    main()
