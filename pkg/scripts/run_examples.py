"""Analyze every fixture tuple and print a one-line summary for each."""

import argparse
import json
from pathlib import Path

from jspec.criteria import AnalysisOptions, analyze
from jspec.io import parse_tuple, report_to_dict

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", type=Path, default=None, help="also write all reports to this file")
    args = ap.parse_args(argv)

    reports = {}
    for path in sorted(FIXTURES.glob("*.json")):
        t = parse_tuple(path)
        r = analyze(t, AnalysisOptions(seed=args.seed))
        dims = [B.shape[1] for B in r.subspaces()]
        print(f"{path.stem:28s} n={t.n} N={t.N} {r.mode:11s} components={r.decomposition.profile()} "
              f"{'reducible' if r.reducible else 'irreducible':11s} subspace dims={dims} "
              f"[{r.timing.get('total', 0.0):.2f} s]")
        reports[path.stem] = report_to_dict(r)
    if args.json is not None:
        args.json.write_text(json.dumps(reports, indent=1, default=str) + "\n")


if __name__ == "__main__":
    main()
