"""Tabulate D and det g_hat along a circle of directions and locate their zeros.

Default: flat metric, phi = -x, m = -2, x = (1, 0, 0), y(t) = (-cos t, sin t, 0);
both zeros sit where cos^2 t = 2/3.
"""
import argparse
import sys

import numpy as np

from finslerjet.config import ScanSpec, bundled_config_path, load_config
from finslerjet.kropina import circle_path, nondegeneracy_scan
from finslerjet.verify import scan_nondegeneracy


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(bundled_config_path("flat-degenerate.json")))
    ap.add_argument("--m", type=float, help="exponent (default: the config's m)")
    ap.add_argument("--steps", type=int, default=21, help="rows in the printed table")
    args = ap.parse_args(argv)

    cfg = load_config(args.config)
    model = cfg.model()
    scan = cfg.scan or ScanSpec((1.0, 0.0, 0.0), (-1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
    m = cfg.m if args.m is None else args.m

    ts = np.linspace(scan.t_min, scan.t_max, args.steps)
    print(f"{'t':>8} {'cos^2 t':>10} {'D':>12} {'det g_hat':>12}")
    for t, D, det in nondegeneracy_scan(model, circle_path(scan.x, scan.y0, scan.y1, ts), m):
        print(f"{t:8.3f} {np.cos(t) ** 2:10.5f} {D:12.5f} {det:12.5f}")

    res = scan_nondegeneracy(model, scan, m, 1)
    for name in ("roots_D", "roots_det"):
        roots = res[name]
        print(f"{name:<10}", ", ".join(f"t={t:+.12f} (cos^2 t={np.cos(t) ** 2:.12f})" for t in roots)
              or "none")
    print("paired" if res["roots_paired"] else "NOT paired",
          f"violations={len(res['violations'])}", "PASS" if res["pass"] else "FAIL")
    return 0 if res["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
