"""Run the verification suite on bundled or given configurations and save JSON reports.

    python3 scripts/run_verification.py                 # every bundled config
    python3 scripts/run_verification.py my.json --out reports/
"""
import argparse
import sys
import time
from pathlib import Path

from finslerjet.config import bundled_config_path, load_config
from finslerjet.errors import ConfigError
from finslerjet.verify import run_suite


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("configs", nargs="*", help="config files (default: all bundled)")
    ap.add_argument("--out", default="reports", help="directory for the JSON reports")
    args = ap.parse_args(argv)

    paths = [Path(p) for p in args.configs] or sorted(bundled_config_path("").glob("*.json"))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = []
    for path in paths:
        try:
            cfg = load_config(path)
        except ConfigError as exc:
            summary.append((path.stem, "config error", 0.0, str(exc)))
            continue
        t0 = time.perf_counter()
        report = run_suite(cfg)
        dt = time.perf_counter() - t0
        (out / f"{path.stem}.json").write_text(report.to_json())
        bad = [c.name + ("" if c.m is None else f"[m={c.m:g}]")
               for c in report.checks if c.status in ("fail", "error")]
        gated = sum(c.status == "precondition-failed" for c in report.checks)
        detail = ", ".join(bad) + (f" (+{gated} precondition-failed)" if gated else "")
        summary.append((path.stem, "PASS" if report.passed else "FAIL", dt, detail))

    w = max(len(s[0]) for s in summary)
    for name, status, dt, detail in summary:
        print(f"{name:<{w}}  {status:<12} {dt:6.1f} s  {detail}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
