"""Regenerate the Q tables shipped in src/mddrisk/data."""

import argparse
import time
from pathlib import Path

from mddrisk.theory import DEFAULT_X_GRID, calibrate_qtable

DATA = Path(__file__).resolve().parents[1] / "src" / "mddrisk" / "data"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--replicates", type=int, default=20_000)
    parser.add_argument("--seed", type=int, default=20240601)
    parser.add_argument("--out-dir", type=Path, default=DATA)
    args = parser.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for i, kind in enumerate(("positive", "negative")):
        start = time.perf_counter()
        table = calibrate_qtable(kind, DEFAULT_X_GRID, args.replicates, args.seed + i)
        table.save(args.out_dir / f"qtable_{kind}")
        print(f"{kind}: {len(table.x)} knots in {time.perf_counter() - start:.0f}s, warnings={table.metadata['warnings']}")


if __name__ == "__main__":
    main()
