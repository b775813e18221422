"""The twelve acceptance criteria at their stated tolerances, one pass/fail line each.

Run under pytest (lines appear in the terminal summary) or directly:
``python3 tests/test_acceptance.py``.
"""

import json
import math
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from orliczmorrey.field import Grid, indicator_ball, log_field, random_bumps, step_field, uniform_grid
from orliczmorrey.harness import suites
from orliczmorrey.harness.experiments import run_experiment
from orliczmorrey.operators import (RadialWeight, RieszConfig, WeightSpec, commutator, commutator_at,
                                    fractional_maximal, hardy_best_constant, maximal_domination_constant, riesz_at,
                                    riesz_potential, verify_hardy)

RESULTS = []
SPANNE = {"p": 2.0, "q": 4.0, "lambda": 0.4, "mu": 0.8}


def _finish(num, title, ok, detail, elapsed, limit):
    in_time = limit is None or elapsed < limit
    passed = bool(ok and in_time)
    budget = "" if limit is None else f" (limit {limit:g} s)"
    line = f"[{'PASS' if passed else 'FAIL'}] {num:2d}. {title}: {detail}; {elapsed:.2f} s{budget}"
    RESULTS.append(line)
    print(line)
    return passed, line


def _timed(fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    return ok, detail, time.perf_counter() - t0


def c1():
    default = suites.char_norm_identity(dims=(1, 2), scale=1, tol=0.01)
    fine = suites.char_norm_identity(dims=(1, 2), scale=4, tol=0.0025)
    ok = default["status"] == "holds" and fine["status"] == "holds"
    return ok, f"worst rel err {default['value']:.2e} (<= 1%), {fine['value']:.2e} at 4x (<= 0.25%)"


def c2():
    rec = suites.lp_consistency(trials=100, tol=1e-9)
    return rec["status"] == "holds", f"worst rel err {rec['value']:.1e} over {rec['samples']} fields (<= 1e-9)"


def c3():
    rec = suites.sandwich(slack=1e-6, count=200)
    ok = rec["status"] == "holds"
    return ok, f"worst excess {rec['value']:.1e}, power-2 equality ratio {rec['equality_ratio_power2']:.12f}"


def c4():
    rec = suites.holder(trials=1000, tol=1e-9)
    ok = rec["status"] == "holds" and rec["samples"] >= 1000 and rec["equality_ratio"] >= 0.999
    return ok, (f"worst ratio {rec['value']:.4f} over {rec['samples']} triples, "
                f"equality witness {rec['equality_ratio']:.9f}")


def c5():
    g = uniform_grid(1, 4.0, 4096)
    chi = indicator_ball(g, 0.0, 1.0)
    v0, v2 = riesz_at(chi, 0.5, [0.0, 2.0])
    e0 = abs(v0 - 4.0) / 4.0
    e2 = abs(v2 - 2 * (math.sqrt(3) - 1)) / (2 * (math.sqrt(3) - 1))
    # dilation: I(χ_{[-2,2]}) on the doubled grid equals 2^{1/2} I(χ_{[-1,1]})
    a = riesz_potential(chi, RieszConfig(0.5, "convolution")).values
    coarse = Grid((4096,), 16.0 / 4096, -8.0)
    b = riesz_potential(indicator_ball(coarse, 0.0, 2.0), RieszConfig(0.5, "convolution")).values
    ed = float(np.max(np.abs(b - math.sqrt(2) * a) / np.abs(math.sqrt(2) * a)))
    ok = e0 <= 5e-3 and e2 <= 5e-3 and ed <= 1e-3
    return ok, f"rel err at 0: {e0:.1e}, at 2: {e2:.1e} (<= 0.5%); dilation {ed:.1e} (<= 1e-3)"


def c6():
    g = uniform_grid(1, 2.0, 2048)
    worst = 0.0
    count = 0
    for alpha in (0.25, 0.5):
        C = maximal_domination_constant(1, alpha)
        for seed in range(20):
            f = random_bumps(g, seed=1000 + seed, count=6)
            M = fractional_maximal(f, alpha).values
            I = riesz_potential(f, RieszConfig(alpha, "convolution")).values
            pos = I > 0
            worst = max(worst, float(np.max(M[pos] / (C * I[pos]))))
            assert np.all(M[~pos] == 0)
            count += 1
    return worst <= 1.05, f"max M/(v^(a-1) I) = {worst:.4f} over {count} fields (<= 1.05)"


def c7():
    plain = WeightSpec(RadialWeight(-2.0), RadialWeight(0.0), RadialWeight(1.0))
    logv = WeightSpec(RadialWeight(-2.0), RadialWeight(0.0), RadialWeight(1.0), True)
    B, _ = hardy_best_constant(plain)
    BL, _ = hardy_best_constant(logv)
    v = verify_hardy(plain)
    sharp = v.value / B
    ok = abs(B - 1) <= 1e-6 and abs(BL - 2) <= 1e-6 and sharp >= 0.95 and v.ok
    return ok, f"B = {B:.10f}, log B = {BL:.10f}, step-search ratio {sharp:.6f}"


def c8():
    rep = run_experiment({"scenario": "condition_scan", "seed": 3,
                          "sweep": {"tuples": 50, "cianchi_tuples": 20}})
    nz = len(rep["zygmund_vs_spanne"])
    nc = len(rep["cianchi"])
    ok = rep["agree_zygmund"] and rep["agree_cianchi"] and nz == 100 and nc == 20
    holds = sum(r["spanne"] == "holds" for r in rep["zygmund_vs_spanne"]) // 2
    return ok, (f"zygmund/spanne agree on {nz // 2} tuples x 2 variants ({holds} in regime), "
                f"cianchi dichotomy on {nc} tuples")


def c9():
    base = {"seed": 7, "n": 1, "alpha": 0.25, "model": SPANNE, "resolutions": [2048, 4096]}
    loc = run_experiment({"scenario": "local_estimate", **base})
    bnd = run_experiment({"scenario": "riesz_boundedness", **base})
    ok = (loc["status"] == "holds" and bnd["status"] == "holds" and bnd["in_hypothesis"]
          and loc["drift"] <= 0.10 and bnd["drift"] <= 0.10)
    cl = [p["constant"] for p in loc["per_resolution"]]
    cb = [p["constant"] for p in bnd["per_resolution"]]
    return ok, (f"local {cl[0]:.4f} -> {cl[1]:.4f} (drift {loc['drift']:.2%}), "
                f"boundedness {cb[0]:.4f} -> {cb[1]:.4f} (drift {bnd['drift']:.2%})")


def c10():
    g = uniform_grid(1, 4.0, 4096)
    f = random_bumps(uniform_grid(1, 4.0, 1024), seed=5)
    const = f.with_values(np.full(f.shape, -1.75))
    zero = bool(np.all(commutator(const, f, RieszConfig(0.25)).values == 0.0))
    v = commutator_at(step_field(g), indicator_ball(g, 0.0, 1.0), 0.5, [1.0], b_at=1.0)[0]
    exact = 2 * (math.sqrt(2) - 1)
    err = abs(v - exact) / exact
    rep = run_experiment({"scenario": "commutator_boundedness", "seed": 7, "n": 1, "alpha": 0.25, "model": SPANNE,
                          "b": {"kind": "log"}, "resolutions": [2048, 4096]})
    ok = zero and err <= 0.01 and rep["status"] == "holds" and rep["drift"] <= 0.10
    cs = [p["constant"] for p in rep["per_resolution"]]
    return ok, (f"constant b exact zero: {zero}; step oracle rel err {err:.1e} (<= 1%); "
                f"ratio {cs[0]:.4f} -> {cs[1]:.4f} (drift {rep['drift']:.2%})")


def c11():
    drift = suites.bmo_log_drift(resolutions=(1024, 2048, 4096), drift_bound=0.10)
    avg = suites.log_average_check(cells=4096, tol=0.01)
    ok = drift["status"] == "holds" and avg["status"] == "holds"
    return ok, (f"drift quotient {drift['value']:.4f} (refinement drift {drift['drift']:.2%}); "
                f"ball average rel err {avg['value']:.1e} (<= 1%)")


def c12():
    spec_dir = Path(__file__).resolve().parent.parent / "specs"
    specs = [spec_dir / "riesz_spanne.json", spec_dir / "hardy.json"]
    same = True
    with tempfile.TemporaryDirectory() as d:
        for spec in specs:
            outs = []
            for k in range(2):
                out = Path(d) / f"{spec.stem}_{k}.json"
                res = subprocess.run([sys.executable, "-m", "orliczmorrey", "experiment", "run", str(spec),
                                      "--out", str(out)], capture_output=True, text=True)
                if res.returncode != 0:
                    return False, f"{spec.name}: exit {res.returncode}: {res.stderr.strip()}"
                outs.append(out.read_bytes())
            same &= outs[0] == outs[1]
    return same, f"byte-identical reports for {', '.join(s.name for s in specs)}"


CRITERIA = [
    (1, "characteristic-function norm identity", c1, 10),
    (2, "L_p consistency", c2, 5),
    (3, "sandwich inequality", c3, 5),
    (4, "Hoelder inequality", c4, 30),
    (5, "Riesz potential oracle", c5, 30),
    (6, "pointwise domination of M_alpha", c6, 60),
    (7, "Hardy best constant", c7, 10),
    (8, "condition consistency", c8, 60),
    (9, "local estimate and boundedness", c9, 300),
    (10, "commutator", c10, 300),
    (11, "BMO log drift", c11, None),
    (12, "determinism", c12, None),
]


@pytest.mark.parametrize("num,title,fn,limit", CRITERIA, ids=[f"criterion_{c[0]:02d}" for c in CRITERIA])
def test_criterion(num, title, fn, limit):
    ok, detail, elapsed = _timed(fn)
    passed, line = _finish(num, title, ok, detail, elapsed, limit)
    assert passed, line


if __name__ == "__main__":
    failed = 0
    for num, title, fn, limit in CRITERIA:
        ok, detail, elapsed = _timed(fn)
        failed += not _finish(num, title, ok, detail, elapsed, limit)[0]
    sys.exit(1 if failed else 0)
