"""Netted versus synthetic spread curves for the four standard strategies.

Writes out/netting_<strategy>.csv, one file per strategy, sweeping expiry.
Funding setup: 300 bp unsecured spread, 50 bp repo / stock-borrow spread,
25% repo and 15% stock-borrow haircuts.
"""

from pathlib import Path

from fva_pricer.cli import main

OUT = Path(__file__).resolve().parent.parent / "out"

CASES = {
    "bull": "95,105",
    "straddle": "100",
    "strangle": "95,105",
    "strip": "100",
}

if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    for strategy, strikes in CASES.items():
        target = OUT / f"netting_{strategy}.csv"
        main([
            "netting",
            "--strategy", strategy, "--strikes", strikes,
            "--expiries", "0.25,0.5,1,2,3",
            "--spot", "100", "--rate", "0.10", "--vol", "0.5",
            "--borrow-spread", "0.03",
            "--repo-spread", "0.005", "--rebate-spread", "-0.005",
            "--repo-haircut", "0.25", "--sec-haircut", "0.15",
            "--nodes", "800", "--dt", "0.02",
            "--output", str(target),
        ], standalone_mode=False)
        print(f"wrote {target}")
