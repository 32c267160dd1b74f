"""Acceptance criteria, one test per criterion; each prints a PASS/FAIL line."""

import time
from decimal import Decimal
from fractions import Fraction

import numpy as np

from fixtures import redundant_dataset, tree_fixtures
from l0smooth.closed_form import (
    UniformParams,
    concentrated_offset,
    gaussian_l0_radius,
    sigma_for_alpha,
    uniform_pointwise_numeric,
    uniform_radius,
    uniform_radius_numeric,
)
from l0smooth.evaluation import (
    AucInstance,
    PredictionRecord,
    acc_at_r,
    adversarial_auc,
    clean_auc,
    clopper_pearson_lower,
)
from l0smooth.noise import NoiseParams
from l0smooth.oracle import brute_regions, brute_rho, brute_tree_adversary, exhaustive_tree_prob
from l0smooth.pointwise import certified_radius, mass_pairs, rho, rho_inverse
from l0smooth.regions import build_region_table, cardinality
from l0smooth.thresholds import build_cert_table, threshold_bigint
from l0smooth.tree import dp_adversary, predict_prob, robust_label_prob, train

F = Fraction
HALF = F(1, 2)
SWEEP = [(d, K, a) for d in range(1, 6) for K in (1, 2) for a in (20, 50, 80)]
TREE_FIXTURES = tree_fixtures(200, seed=2024)


def test_c01_region_counts_match_enumeration(verdict):
    start = time.perf_counter()
    cases = bad = 0
    for d in range(1, 7):
        for K in (1, 2, 3):
            params = NoiseParams(d, K, 80)
            for r in range(d + 1):
                brute = brute_regions(params, r).as_dict()
                for u in range(d + 1):
                    for v in range(d + 1):
                        cases += 1
                        bad += cardinality(params, r, u, v) != brute.get((u, v), 0)
    secs = time.perf_counter() - start
    verdict(1, "region cardinalities equal brute-force classification", bad == 0 and secs < 60,
            f"{cases} cases, {bad} mismatches, {secs:.1f} s")


def test_c02_rho_matches_enumeration(verdict):
    start = time.perf_counter()
    cases = bad = 0
    for d, K, a in SWEEP:
        params = NoiseParams(d, K, a)
        for r in range(d + 1):
            regions = mass_pairs(build_region_table(params, r))
            for k in range(17):
                cases += 1
                bad += rho(regions, F(k, 16))[0] != brute_rho(params, r, F(k, 16))
    secs = time.perf_counter() - start
    verdict(2, "exact rho equals per-outcome greedy fill", bad == 0 and secs < 120,
            f"{cases} cases, {bad} mismatches, {secs:.1f} s")


def test_c03_threshold_error_bound(verdict):
    cases = bad = unit_bad = 0
    worst = F(0)
    for d, K, a in SWEEP:
        params = NoiseParams(d, K, a)
        extra = F(a, 100) ** d
        for r in range(d + 1):
            exact = rho_inverse(mass_pairs(build_region_table(params, r)), HALF)
            for c in (6, 20):
                cases += 1
                err = F(Decimal(threshold_bigint(params, r, c))) - exact
                bad += not 0 <= err <= F(1, 10**c) + extra
                worst = max(worst, err)
                unit_err = F(Decimal(threshold_bigint(params, r, c, residual="unit"))) - exact
                unit_bad += not 0 <= unit_err <= F(1, 10**c) + extra
    print(f"note: whole-outcome residual rounding exceeds the same bound in {unit_bad} of {cases} cases")
    verdict(3, "0 <= bigint threshold - exact <= 10^-c + alpha^d", bad == 0,
            f"{cases} cases, {bad} violations, max error {float(worst):.3g}")


def test_c04_anchor_thresholds(verdict):
    got80 = threshold_bigint(NoiseParams(1, 1, 80), 1, 6)
    got50 = threshold_bigint(NoiseParams(1, 1, 50), 1, 6)
    exact = rho_inverse(mass_pairs(build_region_table(NoiseParams(1, 1, 80), 1)), HALF)
    ok = got80 == "0.875000" and exact == F(7, 8) and got50 == "0.500000"
    verdict(4, "hand anchors d=1 K=1 r=1", ok, f"alpha'=80 -> {got80}, alpha'=50 -> {got50}")


def test_c05_binary_784_monotone_and_fast(verdict):
    start = time.perf_counter()
    table = build_cert_table(NoiseParams(784, 1, 80), 10, workers=1)
    secs = time.perf_counter() - start
    values = [table.threshold(r) for r in range(11)]
    ok = values == sorted(values) and secs < 60
    verdict(5, "d=784 thresholds non-decreasing in r, single-worker build < 60 s", ok,
            f"{secs:.2f} s, r=10 -> {table.rows[10]}")


def test_c06_radius7_attainable(verdict):
    t7 = F(Decimal(threshold_bigint(NoiseParams(784, 1, 80), 7)))
    cp_max = clopper_pearson_lower(100_000, 100_000, 0.999)
    ok = t7 < F("0.99988") and t7 < F(cp_max)
    verdict(6, "rho_7^-1(0.5) below the best Clopper-Pearson bound at n=100,000", ok,
            f"threshold {float(t7):.8f}, stated bound 0.99988, (1-C)^(1/n) = {cp_max:.8f}")


def test_c07_uniform_closed_forms(verdict):
    worst_closed = worst_numeric = 0.0
    for gamma in (0.25, 1.0, 3.0):
        for d in (1, 2, 5, 50):
            params = UniformParams(gamma, d)
            for p in np.linspace(0.5005, 1.0, 100):
                l1 = uniform_radius(params, p, 1)
                linf = uniform_radius(params, p, "inf")
                worst_closed = max(worst_closed, abs(l1 - (2 * p * gamma - gamma)),
                                   abs(linf - (2 * gamma - 2 * gamma * (1.5 - p) ** (1 / d))))
                for q, closed in ((1, l1), ("inf", linf)):
                    worst_numeric = max(worst_numeric, abs(uniform_radius_numeric(params, p, q) - closed))
                    rho_at = uniform_pointwise_numeric(params, p, concentrated_offset(params, closed, q))
                    worst_numeric = max(worst_numeric, abs(rho_at - 0.5))
    ok = worst_closed <= 1e-12 and worst_numeric <= 1e-9
    verdict(7, "uniform-noise closed forms and numeric minimization agree", ok,
            f"closed-form error {worst_closed:.1e}, numeric error {worst_numeric:.1e}")


def test_c08_discrete_dominates_gaussian(verdict):
    grid = np.linspace(0.5, 0.9999, 52)[1:-1]
    cases = bad = 0
    for a in (60, 70, 80, 90):
        sigma = sigma_for_alpha(a / 100)
        for d in (20, 100):
            table = build_cert_table(NoiseParams(d, 1, a), d)
            for p in grid:
                # radius d already covers the whole input space, so larger
                # Gaussian radii are compared against d
                g = min(gaussian_l0_radius(sigma, float(p)), d)
                disc = certified_radius(F(float(p)), table)
                cases += 1
                bad += disc is None or disc < g
    verdict(8, "discrete radius >= Gaussian-derived l0 radius at matched alpha", bad == 0,
            f"{cases} cases, {bad} violations")


def test_c09_tree_oracles(verdict):
    start = time.perf_counter()
    pred_bad = dp_bad = pred_cases = 0
    for tree, x, r in TREE_FIXTURES:
        if len(tree.used_features()) <= 10:
            pred_cases += 1
            pred_bad += predict_prob(tree, x) != exhaustive_tree_prob(tree, x)
        dp_bad += dp_adversary(tree, x, r).root[r] != brute_tree_adversary(tree, x, r)
    secs = time.perf_counter() - start
    ok = pred_bad == 0 and dp_bad == 0 and secs < 120
    verdict(9, "tree prediction and DP adversary equal exhaustive search", ok,
            f"{pred_cases} prediction and {len(TREE_FIXTURES)} DP fixtures, "
            f"{pred_bad + dp_bad} mismatches, {secs:.1f} s")


def test_c10_tree_bound_never_looser(verdict):
    bad = 0
    gaps = []
    for tree, x, r in TREE_FIXTURES:
        p = predict_prob(tree, x)
        generic = rho(mass_pairs(build_region_table(tree.params, r)), p)[0]
        adv = dp_adversary(tree, x, r).root[r]
        bad += adv < generic
        gaps.append(float(adv - generic))
    verdict(10, "adv[root, r] >= rho_r(predict_prob) on every tree fixture", bad == 0,
            f"{bad} violations, mean gap {np.mean(gaps):.3f}")


def test_c11_adversarial_auc(verdict):
    rng = np.random.default_rng(11)
    fixtures = bad = 0
    for _ in range(100):
        instances = []
        for positive in (True, True, True, False, False, False):
            clean = F(int(rng.integers(0, 9)), 8)
            shift = F(int(rng.integers(0, 5)), 8)
            adv = max(F(0), clean - shift) if positive else min(F(1), clean + shift)
            instances.append(AucInstance(clean, adv, positive))
        fixtures += 1
        base = clean_auc(instances)
        previous = None
        for k in range(7):
            exact = adversarial_auc(instances, k)
            greedy = adversarial_auc(instances, k, "greedy")
            bad += exact > greedy + 1e-12 or exact > base + 1e-12
            bad += previous is not None and exact > previous + 1e-12
            previous = exact
    verdict(11, "exhaustive AUC <= greedy and clean, non-increasing in k", bad == 0,
            f"{fixtures} fixtures with n=m=3, k=0..6, {bad} violations")


def test_c12_synthetic_end_to_end(verdict):
    print("criterion 12: the image-benchmark numbers (mu(R)=3.456, MNIST/ImageNet ACC@r rows, "
          "0.954/0.926 exhaustive-search accuracies) need trained CNN/ResNet models and are not "
          "reproduced; this synthetic tree run stands in for them")
    # depth 5 needs 31 distinct features, so the label signal is spread over 31 copies
    d, a = 36, 80
    params = NoiseParams(d, 1, a)
    X, y = redundant_dataset(200, d, 31, seed=7)
    X_test, y_test = redundant_dataset(100, d, 31, seed=8)
    tree = train(X, y, params, max_depth=5)
    table = build_cert_table(params, 3)
    records = []
    robust = {r: 0 for r in (1, 2, 3)}
    for i, (x, label) in enumerate(zip(X_test, y_test)):
        p1 = predict_prob(tree, x)
        predicted = 1 if p1 > HALF else 0
        records.append(PredictionRecord(f"{i:03d}", int(label), predicted=predicted,
                                        p_exact=p1 if predicted else 1 - p1))
        worst = robust_label_prob(tree, x, int(label), 3)
        for r in robust:
            robust[r] += worst[r] > HALF
    rows = []
    ok = True
    for r in (1, 2, 3):
        generic = acc_at_r(records, table, r)
        exact = robust[r] / len(records)
        ok &= generic <= exact
        rows.append(f"r={r}: generic {generic:.2f} <= DP {exact:.2f}")
    verdict(12, "synthetic run: generic ACC@r <= DP-exact robust accuracy "
                "(image-benchmark figures not reproducible at desk scale)", ok, "; ".join(rows))
