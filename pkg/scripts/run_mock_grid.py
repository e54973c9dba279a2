"""Run the mock grid end to end, then audit it.

Usage: python scripts/run_mock_grid.py [--config configs/mock_grid.toml] [--out runs/mock]
"""

import argparse
import sys
import time
from pathlib import Path

from reqgrid.analysis import analyze
from reqgrid.config import load_config
from reqgrid.report import emit_report
from reqgrid.runner import audit, run_grid
from reqgrid.synthetic import write_synthetic_corpora

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=str(ROOT / "configs" / "mock_grid.toml"))
    ap.add_argument("--out", default=str(ROOT / "runs" / "mock"))
    ap.add_argument("--resume", action="store_true")
    args = ap.parse_args()

    if not (ROOT / "data" / "promise.csv").exists():
        write_synthetic_corpora(ROOT / "data")
    cfg = load_config(args.config)
    t0 = time.perf_counter()
    grid = run_grid(cfg, args.out, resume=args.resume,
                    progress=lambda i, n, r: print(f"\r{i}/{n}", end="", flush=True))
    print(f"\n{len(grid.results)} settings in {time.perf_counter() - t0:.1f}s")
    emit_report(grid.results, analyze(grid.results), args.out)
    problems = audit(args.out)
    print("audit:", "OK" if not problems else f"{len(problems)} mismatches")
    return 1 if problems else 0


if __name__ == "__main__":
    sys.exit(main())
