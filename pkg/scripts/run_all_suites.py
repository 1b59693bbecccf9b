"""Run every suite on its default objects and write one JSON report.

Usage: python3 scripts/run_all_suites.py --out reports/all.json [--method fd] [--level 2]
"""
import argparse
import sys

from sphere_jacobi.report_cli import RunConfig, run_suite, write_atomic


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="reports/all.json")
    parser.add_argument("--method", default="fd", choices=["analytic", "fd"])
    parser.add_argument("--level", type=int, default=2)
    args = parser.parse_args()

    report = run_suite(RunConfig("all", level=args.level, method=args.method, out=args.out))
    write_atomic(args.out, report.to_json() + "\n")
    for key, seconds in report.timing.items():
        print(f"{key:<40}{seconds:>8.1f}s")
    s = report.summary
    print(f"total={s['total']} passed={s['passed']} failed={s['failed']} skipped={s['skipped']} -> {args.out}")
    return 0 if report.all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
