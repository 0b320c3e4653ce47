"""Acceptance criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are collected in the
terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""
import dataclasses
import json
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_KEY, Q0, example_model, flat_model
from finslerjet import verify
from finslerjet.cli import main as cli_main
from finslerjet.config import bundled_config_path, from_dict, load_config
from finslerjet.geometry import local_geometry
from finslerjet.kropina import context, fhat_model
from finslerjet.verify import Verifier, sample

M_VALUES = (2.0, 3.0, 0.5, -2.0)
MODELS = ("example", "flat")


def example_cfg():
    return load_config(bundled_config_path("example.json"))


def flat_cfg():
    data = json.loads(bundled_config_path("flat-kropina.json").read_text())
    data["m"], data["m_values"] = 2, list(M_VALUES)
    return from_dict(data)


@pytest.fixture(scope="module")
def verifiers():
    return {"example": Verifier(example_cfg()), "flat": Verifier(flat_cfg())}


@pytest.fixture
def record(request):
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, {})

    def rec(num, title, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {num:2d}  {title}: {detail}"
        lines[num] = line
        print(line)
        assert ok, line
    return rec



def _worst(results, attr="max_rel_err"):
    return max(getattr(r, attr) or 0.0 for r in results)


def test_criterion_01_worked_example(record):
    t0 = time.perf_counter()
    model = example_model()
    cfg = example_cfg()
    pts = sample(model, dataclasses.replace(cfg.sample, count=50, seed=101))
    worst = worst_phi = 0.0
    for p in pts:
        loc = local_geometry(model, p, 4)
        x1 = p.x[0]
        _, y2, y3 = p.y
        expect = {
            ("g", 1, 1): 3 * x1**2 * y2 / y3,
            ("g", 1, 2): -1.5 * x1**2 * y2**2 / y3**2,
            ("g", 2, 2): x1**2 * y2**3 / y3**3,
            ("C", 1, 1, 1): 1.5 * x1**2 / y3,
            ("C", 1, 1, 2): -1.5 * x1**2 * y2 / y3**2,
            ("C", 1, 2, 2): 1.5 * x1**2 * y2**2 / y3**3,
            ("C", 2, 2, 2): -1.5 * x1**2 * y2**3 / y3**4,
        }
        for key, val in expect.items():
            got = (loc.g if key[0] == "g" else loc.cartan)[key[1:]]
            worst = max(worst, abs(got - val) / abs(val))
        worst_phi = max(worst_phi, abs(loc.Phi_jet.value - x1 * p.y[0]) / abs(x1 * p.y[0]))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and worst_phi <= 1e-10 and dt < 5.0
    record(1, "worked example", ok,
           f"50 pts, g/C rel {worst:.1e}, Phi rel {worst_phi:.1e}, {dt:.2f} s")


def test_criterion_02_concurrency(verifiers, record):
    ex = verifiers["example"].concurrency[0]
    fl = verifiers["flat"].concurrency[0]
    ok = (abs(abs(ex.c) - 1) <= 1e-8 and ex.h_residual <= 1e-8
          and ex.cartan_contraction <= 1e-10
          and abs(fl.c + 1) <= 1e-12 and fl.h_residual <= 1e-12)
    record(2, "concurrency", ok,
           f"example c={ex.c:+.12f} h_res={ex.h_residual:.1e} phiC={ex.cartan_contraction:.1e}; "
           f"flat c={fl.c:+.12f} h_res={fl.h_residual:.1e}")


def test_criterion_03_lemma_suite(verifiers, record):
    res = [verifiers[k].run_check("lemma") for k in MODELS]
    keys = set(res[0].notes["max_rel_by_identity"])
    ok = (all(r.passed and r.points_evaluated == 100 for r in res)
          and _worst(res) <= 1e-8 and len(keys) == 8)
    record(3, "concurrency identities", ok,
           f"{len(keys)} identities x 100 pts x 2 models, worst rel {_worst(res):.1e}")


KROPINA_4 = ("kropina-ell", "kropina-hbar", "kropina-metric", "kropina-cartan",
             "kropina-spray", "kropina-nonlinear", "barthel")


def test_criterion_04_kropina_identities(record):
    local_geometry.cache_clear()
    verify._predicted.cache_clear()
    t0 = time.perf_counter()
    vs = {"example": Verifier(example_cfg()), "flat": Verifier(flat_cfg())}
    res = [vs[k].run_check(name, m) for k in MODELS for m in M_VALUES for name in KROPINA_4]
    dt = time.perf_counter() - t0
    # hand-verified anchor
    khat = fhat_model(flat_model(), 1)
    loc = local_geometry(khat, Q0, 4)
    ctx = context(flat_model(), Q0, 1)
    anchor = (np.allclose(loc.g, np.diag([1, 2, 2]), atol=1e-12)
              and np.allclose(loc.ell, [-1, 0, 0], atol=1e-12)
              and np.allclose(loc.spray, [-0.5, 0, 0], atol=1e-12)
              and abs(ctx.Psi1 - 2) <= 1e-12 and abs(ctx.Psi2 - 1) <= 1e-12)
    ok = (all(r.passed for r in res) and min(r.points_evaluated for r in res) >= 100
          and _worst(res) <= 1e-6 and anchor and dt < 60.0)
    record(4, "Kropina identities", ok,
           f"{len(res)} checks, >= {min(r.points_evaluated for r in res)} pts each, "
           f"worst rel {_worst(res):.1e}, anchor {'ok' if anchor else 'FAILED'}, {dt:.1f} s")


def test_criterion_05_sign_resolution(verifiers, record):
    res = [verifiers[k].run_check("barthel", m, sigma=-1) for k in MODELS for m in M_VALUES]
    least = min(r.max_rel_err for r in res)
    ok = all(r.status == "fail" for r in res) and least > 1e-2
    record(5, "sign resolution (sigma = -1 fails)", ok,
           f"{len(res)} runs all fail, smallest rel err {least:.2f}")


def test_criterion_06_curvature(verifiers, record):
    res = [verifiers[k].run_check("curvature", m) for k in MODELS for m in M_VALUES]
    st = [verifiers[k].run_check("fn-selftest") for k in MODELS]
    parts = [s.notes["max_rel_by_identity"] for s in st]
    nj = max(p["N_J = 0"] for p in parts)
    eq = max(p["[JW, JZ] = J[W, JZ] + J[JW, Z]"] for p in parts)
    ok = (all(r.passed and r.points_evaluated == 25 for r in res) and _worst(res) <= 1e-6
          and nj <= 1e-9 and eq <= 1e-9)
    record(6, "curvature relation", ok,
           f"25 pts x {len(res)}, worst rel {_worst(res):.1e}; N_J {nj:.1e}, "
           f"[JW,JZ] identity {eq:.1e}")


def test_criterion_07_berwald(verifiers, record):
    hor = [verifiers[k].run_check("berwald-horizontal", m) for k in MODELS for m in M_VALUES]
    ver = [verifiers[k].run_check("berwald-vertical", m) for k in MODELS for m in M_VALUES]
    nfields = len(hor[0].notes["fields"])
    ok = (all(r.passed and r.points_evaluated == 25 for r in hor + ver) and nfields == 3
          and _worst(hor) <= 1e-6 and _worst(ver, "max_abs_err") <= 1e-12)
    record(7, "Berwald relations", ok,
           f"{nfields} fields x 25 pts, horizontal rel {_worst(hor):.1e}, "
           f"vertical abs {_worst(ver, 'max_abs_err'):.1e}")


def test_criterion_08_nondegeneracy_scan(record):
    v = Verifier(load_config(bundled_config_path("flat-degenerate.json")))
    res = v.run_check("nondegeneracy")
    scan = res.notes["scan"]
    off = max((abs(np.cos(t) ** 2 - 2 / 3) for t in scan["roots_D"] + scan["roots_det"]),
              default=np.inf)
    ok = res.passed and len(scan["roots_D"]) == 2 and scan["roots_paired"] and off <= 1e-6
    record(8, "non-degeneracy scan", ok,
           f"roots t={[round(t, 10) for t in scan['roots_D']]}, |cos^2 t - 2/3| <= {off:.1e}, "
           f"{len(scan['violations'])} violations")


def test_criterion_09_not_projective(verifiers, record):
    res = [verifiers[k].run_check("projective", m) for k in MODELS for m in M_VALUES]
    ratio = min(r.notes["min_transverse_ratio"] for r in res)
    pts = min(r.points_evaluated for r in res)
    ok = all(r.passed for r in res) and pts >= 100 and ratio >= 1e-6
    record(9, "sprays not projectively related", ok,
           f">= {pts} generic pts per run, smallest transverse ratio {ratio:.2e}")


def test_criterion_10_not_concurrent(verifiers, record):
    res = [verifiers[k].run_check("not-concurrent", m) for k in MODELS for m in M_VALUES]
    h = min(r.notes["h_residual_hat"] for r in res)
    ok = h > 1e-3
    record(10, "phi not concurrent for F_hat", ok,
           f"{len(res)} runs, smallest h_residual {h:.2e}")


def test_criterion_11_factorization(verifiers, record):
    res = [verifiers[k].run_check("ar-factorization", m) for k in MODELS for m in M_VALUES]
    ok = (all(r.passed for r in res) and min(r.points_evaluated for r in res) >= 100
          and _worst(res) <= 1e-8)
    record(11, "zeta_hat a_hat = g_hat", ok, f"{len(res)} runs, worst rel {_worst(res):.1e}")


def test_criterion_12_infrastructure(verifiers, record, tmp_path, capsys):
    fd = [verifiers[k].run_check("fd-oracle") for k in MODELS]
    fd_ok = all(r.passed for r in fd) and _worst(fd) <= 1e-4
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    cfg = str(bundled_config_path("flat-degenerate.json"))
    cli_main(["verify", "--config", cfg, "--out", str(a), "--no-timestamp"])
    cli_main(["verify", "--config", cfg, "--out", str(b), "--no-timestamp"])
    small = dataclasses.replace(example_cfg(), checks=("concurrency", "kropina-metric"))
    same = (a.read_bytes() == b.read_bytes()
            and verify.run_suite(small).to_json() == verify.run_suite(small).to_json())
    codes = (cli_main(["verify", "--config", str(bundled_config_path("example.json"))]),
             cli_main(["verify", "--config", str(bundled_config_path("flat-parallel.json"))]),
             cli_main(["verify", "--config", str(bundled_config_path("invalid-m.json"))]))
    capsys.readouterr()
    ok = fd_ok and same and codes == (0, 1, 2)
    record(12, "infrastructure", ok,
           f"FD rel {_worst(fd):.1e}, reports byte-identical {same}, exit codes {codes}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
