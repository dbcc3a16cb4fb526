"""`wesad_convert --in <subject file> --out <dir>`"""

from __future__ import annotations

import argparse
import sys

from .convert import MissingStream, UnreadableArchive, convert_subject


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wesad_convert",
        description="Convert a WESAD subject pickle into wrist PPG, label, "
        "and chest RR interval CSVs.",
    )
    parser.add_argument("--in", dest="input", required=True, metavar="SUBJECT_FILE")
    parser.add_argument("--out", dest="out_dir", required=True, metavar="DIR")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        written = convert_subject(args.input, args.out_dir)
    except (MissingStream, UnreadableArchive) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
