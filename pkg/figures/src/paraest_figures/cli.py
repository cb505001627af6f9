"""render-figures: regenerate the study figures from a harness output directory."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import KINDS, FigureSpec, render


def _specs_for(kind: str, in_dir: Path, out_dir: Path) -> list[FigureSpec]:
    ts = sorted(str(p) for p in in_dir.glob("timeseries_i*.csv"))
    comp = sorted(str(p) for p in in_dir.glob("components_i*.csv"))
    cmp_ = sorted(str(p) for p in in_dir.glob("comparison_i*.csv"))
    acc = [str(in_dir / f"accumulation_{k}.csv")
           for k in ("ones", "random", "large_initial")
           if (in_dir / f"accumulation_{k}.csv").exists()]
    table = {"errors": ts, "components": comp, "comparison": cmp_,
             "loglog_effectivity": ts, "accumulation": acc}
    inputs = table[kind]
    if not inputs:
        return []
    return [FigureSpec(kind=kind, inputs=inputs,
                       output=str(out_dir / f"{kind}.svg"))]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="render-figures")
    parser.add_argument("--in", dest="in_dir", required=True,
                        help="harness output directory with the CSV files")
    parser.add_argument("--out", dest="out_dir", required=True)
    parser.add_argument("--kind", choices=KINDS, action="append", default=None,
                        help="repeatable; defaults to every kind with inputs present")
    args = parser.parse_args(argv)

    in_dir, out_dir = Path(args.in_dir), Path(args.out_dir)
    explicit = args.kind is not None
    kinds = args.kind or list(KINDS)
    rendered = []
    for kind in kinds:
        for spec in _specs_for(kind, in_dir, out_dir):
            try:
                rendered.append(render(spec))
            except Exception as exc:
                print(f"{kind}: {exc}", file=sys.stderr)
                if explicit:
                    return 2
    if not rendered:
        print(f"no inputs for kinds {kinds} in {in_dir}", file=sys.stderr)
        return 1
    for path in rendered:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
