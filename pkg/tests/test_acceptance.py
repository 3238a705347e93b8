"""Acceptance criteria 1-9, one PASS/FAIL line and timing per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they are also
printed with output capture disabled, so plain ``pytest`` shows them.
"""

import contextlib
import math
import time

import numpy as np
import pytest

from besovkit.harness import make_fields, run_all
from besovkit.harness.report import SANDWICH_CAP
from besovkit.mmspace import estimate_geometry, from_points, generate, random_cloud
from besovkit.rearrange import k_classical, maximal, rearrangement
from besovkit.rispace import RiSpec, associate, fundamental_function, parse_ri
from besovkit.smoothness import bmo_norm, modulus, shift_modulus
from besovkit.svparam import ParamSpec, SVFn, boyd_indices, extension_indices, grid_nodes, tilde_norm
from conftest import brute_bmo, truncation_scan_K

VERIFY_BUDGET = 600.0


@contextlib.contextmanager
def criterion(capsys, number: int, title: str, budget: float | None = None, elapsed: float = 0.0):
    """Time the block, print one PASS/FAIL line, and fail the test on a blown budget.

    ``elapsed`` adds time already spent in a fixture that belongs to this criterion.
    """
    t0 = time.perf_counter() - elapsed
    status, detail = "PASS", ""
    try:
        yield
    except BaseException as exc:
        status, detail = "FAIL", f" ({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})"
        raise
    finally:
        dt = time.perf_counter() - t0
        if status == "PASS" and budget is not None and dt > budget:
            status, detail = "FAIL", f" (runtime above {budget:g} s)"
        with capsys.disabled():
            print(f"\n[criterion {number}] {status} {title} in {dt:.2f} s{detail}")
    if budget is not None:
        assert dt <= budget, f"criterion {number} took {dt:.1f} s, budget {budget} s"


def weighted_sort_star(values, weights, s):
    """f*(s) by sorting |f| in decreasing order and reading the cumulative weights."""
    a = np.abs(np.asarray(values, dtype=float))
    order = np.argsort(-a, kind="stable")
    a, cum = a[order], np.cumsum(np.asarray(weights, dtype=float)[order])
    idx = np.searchsorted(cum, np.atleast_1d(s), side="right")
    return np.where(idx < a.size, a[np.minimum(idx, a.size - 1)], 0.0)


def test_c1_rearrangement_oracle(capsys):
    rng = np.random.default_rng(2024)
    with criterion(capsys, 1, "rearrangement oracle on 200 random spaces", budget=10.0):
        for _ in range(200):
            n = int(rng.integers(1, 65))
            # dyadic weights and quarter-integer values keep every sum exact
            w = rng.integers(1, 9, n) / 64.0
            space = from_points(rng.random((n, 2)), weights=w)
            f = np.round(rng.normal(size=n) * 8) / 4
            g = np.round(rng.normal(size=n) * 8) / 4
            pf = rearrangement(space, f)
            grid = np.union1d(pf.breakpoints, np.linspace(0, space.total_mass * 1.25, 97))
            np.testing.assert_array_equal(pf.star(grid), weighted_sort_star(f, w, grid))
            taus = np.union1d([0.0], np.concatenate([np.abs(f), np.abs(f) + 0.125]))
            brute = np.array([w[np.abs(f) > tau].sum() for tau in taus])
            np.testing.assert_array_equal(pf.distribution(taus), brute)
            pg, ps = rearrangement(space, g), rearrangement(space, f + g)
            t = grid[grid > 0]
            assert np.all(maximal(ps, t) <= maximal(pf, t) + maximal(pg, t) + 1e-12)
            assert np.all(ps.star(2 * t) <= pf.star(t) + pg.star(t))


def small_instances():
    """Every battery-style space with at most 8 points, with all canonical fields."""
    spaces = [generate(f"circle:{n}") for n in range(2, 9)]
    spaces += [generate(f"random:{n}:{seed}:2") for n in range(2, 9) for seed in range(3)]
    spaces += [generate("torus:2")]
    for s in spaces:
        for name, f in make_fields(s, seed=0).items():
            yield s, name, f


def test_c2_k_functional_exactness(capsys):
    with criterion(capsys, 2, "K-functional equals truncation scan on <=8-point instances", budget=5.0):
        count = 0
        for s, _, f in small_instances():
            prof = rearrangement(s, f)
            t = np.concatenate([np.geomspace(1e-3, 10 * s.total_mass, 25), s.weights, np.cumsum(s.weights)])
            got = k_classical(prof, t, p_exp=1)
            ref = np.array([truncation_scan_K(f, s.weights, ti) for ti in t])
            np.testing.assert_allclose(got, ref, rtol=0, atol=1e-8)
            count += 1
        assert count >= 100


def test_c3_euclidean_anchor(capsys):
    N = 4096
    with criterion(capsys, 3, "p-modulus against the shift modulus on circle:4096", budget=60.0):
        s = generate(f"circle:{N}")
        x = np.arange(N) / N
        f = np.sin(2 * np.pi * x) + 0.3 * np.sin(10 * np.pi * x)
        t = np.geomspace(2.0**-8, 2.0**-3, 16)
        for p in (1.0, 2.0):
            calE = modulus(s, f, parse_ri("L1"), t, "calE", p).values
            omega = np.array([shift_modulus(f, int(math.floor(ti * N)), p, 1.0 / N) for ti in t])
            ratio = calE / omega
            assert ratio.max() / ratio.min() <= 4.0
            assert ratio.min() >= 1 / 8 and ratio.max() <= 8.0


def test_c4_geometry_estimation(capsys):
    with criterion(capsys, 4, "geometry of the 64x64 torus", budget=30.0):
        s = generate("torus:64")
        rep = estimate_geometry(s, radii=np.geomspace(2.0**-5, 2.0**-2, 12))
        assert 1.85 <= rep.k <= 2.15 and 1.85 <= rep.n <= 2.15
        assert 3.5 <= rep.C_D <= 8.0
        exact = min(s.weights[s.dist[x] < 1.0].sum() for x in range(s.point_count))
        assert rep.kappa == exact and rep.kappa > 0


def test_c5_closed_form_parameters(capsys):
    with criterion(capsys, 5, "closed-form parameter checks", budget=10.0):
        t = grid_nodes()
        for alpha in (0.5, 1.0):
            for q in (1.0, 2.0):
                for t0 in (1e-2, 1.0, 30.0):
                    got = tilde_norm(ParamSpec.lebesgue(q), (t, t**alpha), (0.0, t0))
                    assert got == pytest.approx(t0**alpha * (alpha * q) ** (-1 / q), rel=1e-3)
        for q in (1.0, 1.5, 2.0, 4.0):
            lo, hi = boyd_indices(ParamSpec.lebesgue(q))
            assert abs(lo - 1 / q) <= 0.02 and abs(hi - 1 / q) <= 0.02
        ell = SVFn(1.0, 1.0)
        lo, hi = extension_indices(lambda s: s**0.5 * ell(s))
        assert abs(lo - 0.5) <= 0.02 and abs(hi - 0.5) <= 0.02
        pts = np.geomspace(1e-3, 1e3, 20)
        for p in (1.0, 1.5, 2.0, 3.0, math.inf):
            X = RiSpec.lebesgue(p)
            prod = fundamental_function(X, pts) * fundamental_function(associate(X), pts)
            np.testing.assert_allclose(prod, pts, rtol=1e-12)


def test_c8_bmo_oracle(capsys):
    rng = np.random.default_rng(8)
    spaces = [random_cloud(48, seed=k) for k in range(3)] + [generate("circle:48")]
    cases = [(s, f, cut) for s in spaces for f in [rng.normal(size=48), *make_fields(s, seed=1).values()]
             for cut in (1.0, 0.25)]
    expected = [brute_bmo(s, f, cut) for s, f, cut in cases]
    # the budget covers the implementation; the oracle above runs untimed
    with criterion(capsys, 8, "bmo against exhaustive ball enumeration on 48 points", budget=5.0):
        got = [bmo_norm(s, f, cut) for s, f, cut in cases]
        for g, e in zip(got, expected):
            assert g == pytest.approx(e, rel=1e-12, abs=1e-15)


@pytest.fixture(scope="module")
def default_runs(tmp_path_factory):
    """Two record-mode runs into fresh baseline stores, then a compare-mode re-run."""
    root = tmp_path_factory.mktemp("verify")
    cfg = {"profile": "default", "seed": 0}
    out = {}
    for key, bl in (("first", "bl_a"), ("second", "bl_b"), ("compare", "bl_a")):
        t0 = time.perf_counter()
        report, code = run_all(cfg, baseline_dir=root / bl, out_dir=root / key)
        out[key] = (report, code, time.perf_counter() - t0)
    return out


def test_c6_sandwich(capsys, default_runs):
    with criterion(capsys, 6, "K-functional sandwich constants on the default battery",
                   elapsed=default_runs["first"][2] + default_runs["compare"][2]):
        first, _, _ = default_runs["first"]
        compare, code, _ = default_runs["compare"]
        assert first["mode"] == "record" and compare["mode"] == "compare"
        sand = [s for s in first["summary"] if s["check_id"].startswith("sandwich.")]
        assert {s["check_id"] for s in sand} == {"sandwich.C1", "sandwich.C2"}
        assert all(s["violations"] == 0 and s["constant"] <= SANDWICH_CAP for s in sand)
        again = [s for s in compare["summary"] if s["check_id"].startswith("sandwich.")]
        assert all(s["pass"] and s["constant"] <= 1.1 * s["baseline"] for s in again)
        with capsys.disabled():
            for s in sand:
                print(f"  {s['check_id']} {s['battery']}: C = {s['constant']:.4g}")


def test_c7_inequality_suite(capsys, default_runs):
    with criterion(capsys, 7, "inequality suite on the default battery", budget=VERIFY_BUDGET,
                   elapsed=default_runs["first"][2]):
        first, code_first, dt = default_runs["first"]
        compare, code, _ = default_runs["compare"]
        assert code_first == 0 and code == 0
        expected = {"emm", "param_convex", "anterior", "the1", "inclusi", "contt", "morrey",
                    "interp", "reiteration"}
        seen = {s["check_id"] for s in first["summary"]}
        assert all(any(c.startswith(e) for c in seen) for e in expected)
        assert "anterior.submult" in seen
        cases = {c for c in seen if c.startswith("inclusi.")}
        assert {"inclusi.i", "inclusi.ii", "inclusi.iv"} <= cases
        assert any(c.startswith("inclusi.iii") for c in cases)
        for rep in (first, compare):
            for s in rep["summary"]:
                assert s["violations"] == 0 and s["nonfinite"] == 0, s
                assert isinstance(s["constant"], float) and math.isfinite(s["constant"])
        assert all(s["pass"] and s["constant"] <= 1.1 * s["baseline"] for s in compare["summary"])
        with capsys.disabled():
            print(f"  {len(seen)} check ids, {len(first['records'])} records, one verify run {dt:.1f} s")


def test_c9_determinism(capsys, default_runs):
    with criterion(capsys, 9, "identical report hashes for two runs with one seed",
                   elapsed=default_runs["first"][2] + default_runs["second"][2]):
        a, _, _ = default_runs["first"]
        b, _, _ = default_runs["second"]
        assert a["timestamp"] is not None
        assert a["report_hash"] == b["report_hash"]
        assert a["records"] == b["records"]
