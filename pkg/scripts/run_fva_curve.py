"""Sweep the long-put funding adjustment against the unsecured spread.

Writes out/fva_curve.csv with one row per (financing case, spread) pair,
ready for external plotting.  The four financing cases: fully unsecured
hedge funding, zero haircut with a 50 bp repo spread, 35% haircut with
50 bp, and 35% haircut with 150 bp.
"""

from pathlib import Path

from fva_pricer.cli import main

OUT = Path(__file__).resolve().parent.parent / "out"

if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    main([
        "fva-curve",
        "--kind", "put",
        "--spot", "100", "--strike", "100", "--expiry", "2",
        "--rate", "0.10", "--vol", "0.5",
        "--spread-max", "0.04", "--spread-step", "0.0025",
        "--output", str(OUT / "fva_curve.csv"),
    ], standalone_mode=False)
    print(f"wrote {OUT / 'fva_curve.csv'}")
