"""Regenerate the benchmark BEP curve grids as CSV files.

Thin wrapper over the ``reproduce-fig`` subcommand so both grids land in
files with one invocation instead of shell redirection per figure.
"""

import argparse
import contextlib
import io
import pathlib
import sys

from dpskdiv.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--figure", choices=("1", "2", "all"), default="all")
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()

    figures = ("1", "2") if args.figure == "all" else (args.figure,)
    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    for fig in figures:
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = cli_main(["reproduce-fig", "--figure", fig])
        if code != 0:
            print(f"figure {fig}: exit code {code}", file=sys.stderr)
            return code
        path = out_dir / f"figure{fig}.csv"
        path.write_text(buf.getvalue())
        rows = len(buf.getvalue().strip().splitlines()) - 1
        print(f"wrote {path} ({rows} rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
