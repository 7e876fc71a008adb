"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are collected and echoed in the pytest terminal summary (see
conftest.py) so they show up even when output capture is on.
"""

import json
import math
import time

import numpy as np
from scipy import stats

from glptest.cli import main
from glptest.data import summarize_column
from glptest.glp import comeans, derive_seed, glp_statistic, glp_test, p_asymptotic
from glptest.kernel import feature_map, gram
from glptest.lpbasis import build_basis
from glptest.sim import ScenarioSpec, TestConfig, calibrate_null, estimate_power, generate
from glptest.spectral import laplacian, ncut_value

from oracles import (
    copula_integral,
    matched_accuracy,
    set_partitions,
    standardized_mood,
    standardized_wilcoxon,
    table_to_labels,
)

RESULTS = []


def record(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def t1(values):
    return build_basis(summarize_column(values), values, 1).values[:, 0]


def test_c01_closed_form_basis():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for i in range(1000):
        n = int(rng.integers(4, 501))
        if i % 2 == 0:
            n1 = int(rng.integers(1, n))
            x = rng.permutation(np.repeat([0.0, 1.0], [n1, n - n1]))
            closed = np.where(x == 0, -math.sqrt((n - n1) / n1), math.sqrt(n1 / (n - n1)))
        else:
            x = rng.normal(size=n) * rng.uniform(0.1, 100)
            r = stats.rankdata(x)
            closed = math.sqrt(12 / (n * n - 1)) * (r - (n + 1) / 2)
        worst = max(worst, float(np.max(np.abs(t1(x) - closed))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 10
    record(1, ok, f"max |T1 - closed form| = {worst:.2e} (tol 1e-10), {elapsed:.1f}s (< 10s)")
    assert ok


def test_c02_wilcoxon_identity():
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(4, 301))
        n1 = int(rng.integers(1, n))
        y = rng.permutation(np.repeat([1, 2], [n1, n - n1]))
        x = rng.normal(size=n) + 0.5 * (y == 2) * rng.normal()
        lp11 = np.mean(t1(y) * t1(x))
        gap = abs(math.sqrt(n - 1) * lp11 - standardized_wilcoxon(x, y))
        worst = max(worst, gap)
    ok = worst <= 1e-10
    record(2, ok, f"max |sqrt(n-1) LP[1,1] - Wilcoxon| = {worst:.2e} (tol 1e-10)")
    assert ok


def test_c03_mood_identity():
    rng = np.random.default_rng(103)
    gaps = {}
    for n in (20, 100, 500):
        x = rng.normal(size=n)
        y = rng.permutation(np.repeat([1, 2], [n // 2, n - n // 2]))
        t2 = build_basis(summarize_column(x), x, 2).values[:, 1]
        ratio = math.sqrt(n - 1) * np.mean(t1(y) * t2) / standardized_mood(x, y)
        gaps[n] = abs(ratio - 1)
    # gaps are at rounding level; treat differences under 1e-9 as ties
    monotone = gaps[100] <= gaps[20] + 1e-9 and gaps[500] <= gaps[100] + 1e-9
    ok = gaps[500] <= 0.01 and monotone
    detail = ", ".join(f"n={n}: |ratio-1|={g:.1e}" for n, g in gaps.items())
    record(3, ok, f"{detail} (need <= 0.01 at n=500, non-increasing)")
    assert ok


def test_c04_parseval():
    rng = np.random.default_rng(104)
    worst, done = 0.0, 0
    while done < 100:
        k = int(rng.integers(2, 5))
        table = rng.integers(0, 12, size=(k, k))
        if np.any(table.sum(axis=0) == 0) or np.any(table.sum(axis=1) == 0):
            continue
        y, z = table_to_labels(table.tolist())
        worst = max(worst, abs(glp_statistic(comeans(y, z)) - copula_integral(table.tolist())))
        done += 1
    ok = worst <= 1e-8
    record(4, ok, f"max |sum LP^2 - copula integral| = {worst:.2e} over 100 tables (tol 1e-8)")
    assert ok


def test_c05_table_p_values():
    cases = [(0.209, 72, 1.04e-4, 0.02), (0.145, 50, 0.007, 0.05), (0.131, 50, 0.011, 0.05)]
    parts, ok = [], True
    for stat, n, target, tol in cases:
        p = p_asymptotic(stat, n, 1)
        good = abs(p - target) <= tol * target
        ok &= good
        parts.append(f"{stat}/{n} -> {p:.3g} (target {target:g} +-{tol:.0%})")
    record(5, ok, "; ".join(parts))
    assert ok


def _null_rates():
    rates = {}
    for d in (10, 100):
        spec = ScenarioSpec("location", d, [50, 50], {"shift": 0.0}, seed=derive_seed(106, d))
        rates[d] = estimate_power(spec, TestConfig(seed=derive_seed(206, d)), 500).power
    return rates


def _null_ks():
    """sqrt(n) LP[1,1] over 2000 shuffles of Y against the fixed communities of one null draw."""
    data = generate(ScenarioSpec("location", 10, [100, 100], {"shift": 0.0}, seed=306))
    z = glp_test(data, 1, seed=406).z.z
    rng = np.random.default_rng(506)
    vals = np.array([
        math.sqrt(data.n) * comeans(rng.permutation(data.y), z).values[0, 0] for _ in range(2000)
    ])
    return stats.kstest(vals, "norm")


def test_c06_null_calibration():
    start = time.perf_counter()
    rates = _null_rates()
    ks = _null_ks()
    cal = calibrate_null(10, 100, 100, replications=100, b=1000, seed=606)
    med = cal.summary()["median_abs"]
    elapsed = time.perf_counter() - start
    size_ok = all(0.02 <= r <= 0.09 for r in rates.values())
    ks_ok = ks.pvalue > 0.001
    med_ok = med <= 0.05
    ok = size_ok and ks_ok and med_ok and elapsed < 600
    record(
        6, ok,
        f"size d=10: {rates[10]:.3f}, d=100: {rates[100]:.3f} [0.02, 0.09] "
        f"{'ok' if size_ok else 'FAIL'}; KS D={ks.statistic:.4f} p={ks.pvalue:.1e} (> 1e-3) "
        f"{'ok' if ks_ok else 'FAIL'}; median |p_asym - p_perm| = {med:.3f} (<= 0.05) "
        f"{'ok' if med_ok else 'FAIL'}; {elapsed:.0f}s",
    )
    assert ok


def test_c07_power_location():
    spec = ScenarioSpec("location", 100, [100, 100], {"shift": 0.5}, seed=107)
    power = estimate_power(spec, TestConfig(order=1, seed=207), 100).power
    ok = power >= 0.9
    record(7, ok, f"location power = {power:.2f} (>= 0.9)")
    assert ok


def test_c08_power_scale():
    spec = ScenarioSpec("scale", 500, [100, 100], {"variance": 1.5}, seed=108)
    power = estimate_power(spec, TestConfig(order=2, seed=208), 100).power
    ok = power >= 0.8
    record(8, ok, f"scale power (order 2) = {power:.2f} (>= 0.8)")
    assert ok


def test_c09_contamination_robustness():
    base = ScenarioSpec("contaminated_location", 500, [100, 100], {"shift": 0.5, "eta": 0.0}, seed=109)
    clean = estimate_power(base, TestConfig(seed=209), 100).power
    dirty = estimate_power(base.with_(params={"eta": 0.1}), TestConfig(seed=209), 100).power
    ok = abs(clean - dirty) <= 0.15
    record(9, ok, f"power clean = {clean:.2f}, eta=0.1 = {dirty:.2f}, gap {abs(clean - dirty):.2f} (<= 0.15)")
    assert ok


def test_c10_relaxation_bound():
    rng = np.random.default_rng(110)
    worst_identity, worst_excess, partitions = 0.0, -np.inf, 0
    for _ in range(50):
        n = int(rng.integers(3, 9))
        k = int(rng.integers(2, min(n, 4) + 1))
        w = gram(feature_map(rng.normal(size=(n, 6)), 1)).w
        lap = laplacian(w)
        top = np.sort(np.linalg.eigvalsh(lap))[::-1][:k].sum()
        deg = w.sum(axis=1)
        for labels in set_partitions(n, k):
            labels = np.asarray(labels)
            psi = np.zeros((n, k))
            for g in range(k):
                inside = labels == g
                psi[inside, g] = np.sqrt(deg[inside] / deg[inside].sum())
            gain = k - ncut_value(w, labels)
            worst_identity = max(worst_identity, abs(gain - np.trace(psi.T @ lap @ psi)))
            worst_excess = max(worst_excess, gain - top)
            partitions += 1
    ok = worst_identity <= 1e-8 and worst_excess <= 1e-8
    record(
        10, ok,
        f"{partitions} partitions: max |k - NCut - Tr| = {worst_identity:.1e}, "
        f"max (k - NCut - top-k sum) = {worst_excess:.1e} (<= 0)",
    )
    assert ok


def test_c11_three_sample_recovery():
    good = 0
    accs = []
    for seed in range(20):
        spec = ScenarioSpec("location", 500, [25, 25, 25], {"shifts": [0.0, 1.5, 3.0]}, seed=1100 + seed)
        data = generate(spec)
        res = glp_test(data, 1, seed=seed)
        acc = matched_accuracy(data.y, res.z.z)
        accs.append(acc)
        good += acc >= 0.95 and res.p_asymptotic < 0.001
    ok = good >= 18
    record(11, ok, f"{good}/20 seeds with accuracy >= 0.95 and p < 0.001 (min accuracy {min(accs):.2f}) (need >= 18)")
    assert ok


def test_c12_determinism(tmp_path, capsys):
    rng = np.random.default_rng(112)
    x = np.vstack([rng.normal(0, 1, (20, 6)), rng.normal(0.7, 1, (20, 6))])
    data_csv = tmp_path / "d.csv"
    data_csv.write_text(
        "y," + ",".join(f"x{j}" for j in range(6)) + "\n"
        + "".join(f"{'ab'[i >= 20]}," + ",".join(f"{v:.6f}" for v in row) + "\n" for i, row in enumerate(x))
    )
    scen = tmp_path / "s.json"
    scen.write_text(json.dumps({"name": "location", "dims": [5], "n_per_group": [12, 12], "params": {"shift": 0.5}}))
    commands = {
        "test": ["test", "-i", data_csv, "--label", "y", "--order", "1", "--permutations", "1000", "--seed", "7"],
        "chart": ["chart", "-i", data_csv, "--label", "y", "-B", "200"],
        "power": ["power", "--scenario", scen, "--reps", "5"],
        "calibrate": ["calibrate", "--d", "4", "--n1", "8", "--n2", "8", "--reps", "4", "-B", "100"],
    }
    same = {}
    for name, argv in commands.items():
        outs = []
        for _ in range(2):
            assert main([str(a) for a in argv] + ["--format", "json"]) == 0
            outs.append(capsys.readouterr().out)
        same[name] = outs[0] == outs[1] and len(outs[0]) > 0
    ok = all(same.values())
    record(12, ok, "byte-identical JSON: " + ", ".join(f"{k}={'yes' if v else 'NO'}" for k, v in same.items()))
    assert ok
