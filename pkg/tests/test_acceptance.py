"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (the lines are repeated in the
terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""

import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from helpers import ACCEPTANCE, rotated_block  # noqa: E402
from ogmmerge.grid import embed, interior_gaps  # noqa: E402
from ogmmerge.merge import MergeConfig, estimate_solution, merge_maps_end_to_end  # noqa: E402
from ogmmerge.ogm_vector import classify_groups  # noqa: E402
from ogmmerge.pipeline import MergeSolution, apply_two_step, closed_form_transform, gate_and_sort  # noqa: E402
from ogmmerge.raster import conditional_blur  # noqa: E402
from ogmmerge.rfid import TagEstimate  # noqa: E402
from ogmmerge.sim import (corridor_scenario, diffusion_experiment, evaluate_pair, localization_trial,  # noqa: E402
                          ogm_vector_experiment, simulate_pair)

BIAS = 0.05  # m, per-tag range bias of the "realistic tag noise" pairs


def report(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def check_ogm_vector_statistics():
    angles, seconds = ogm_vector_experiment(runs=200)
    mean, std, slowest = float(np.mean(angles)), float(np.std(angles)), float(np.max(seconds))
    ok = abs(mean + 45.0) <= 0.5 and std <= 1.0 and slowest <= 5.0
    return report(1, "OGM vector statistics", ok,
                  f"mean {mean:.4f} deg, std {std:.4f} deg, slowest run {slowest:.2f} s over 200 runs")


def check_method_ordering():
    rows, ok = [], True
    for seed in range(5):
        result = evaluate_pair(corridor_scenario(seed, range_bias_sigma=BIAS), seed=seed).methods
        m1, m2, m3 = (result[m].mse for m in (1, 2, 3))
        ok &= m1 > m2 > m3 and m3 <= 10.0
        rows.append(f"{m1:.2f}>{m2:.2f}>{m3:.2f}")
    return report(2, "MSE ordering #1 > #2 > #3 and #3 <= 10 px^2", ok, "; ".join(rows))


def check_rotation_accuracy():
    errors = []
    for seed in range(50):
        result = evaluate_pair(corridor_scenario(seed, range_bias_sigma=BIAS), methods=(2,), seed=seed)
        errors.append(result.methods[2].rotation_error)
    within = int(np.sum(np.array(errors) <= 1.0))
    return report(3, "method #2 rotation within 1 deg", within >= 45,
                  f"{within}/50 pairs, worst {max(errors):.3f} deg")


def check_localization():
    good, monotone = 0, 0
    for seed in range(100):
        error, prob, trace = localization_trial(seed, standoff=1.0, n=300)
        good += error <= 0.15 and prob >= 0.90
        monotone += len(trace) == 4 and all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))
    ok = good >= 95 and monotone == 100
    return report(4, "RFID localization convergence", ok,
                  f"{good}/100 within 15 cm at p >= 0.90, {monotone}/100 monotone traces")


def check_rounding_artifacts():
    block = rotated_block()
    before = int(interior_gaps(block).sum())
    after = int(interior_gaps(conditional_blur(block)).sum())
    return report(5, "rounding gaps before and after conditional blur", before >= 1 and after == 0,
                  f"{before} gap cells before, {after} after")


def check_diffusion():
    scenario = corridor_scenario(0, range_bias_sigma=BIAS)
    data = simulate_pair(scenario)
    stable = diffusion_experiment(scenario, rounds=5, conditional=True, data=data)
    spread = diffusion_experiment(scenario, rounds=5, conditional=False, data=data)

    def change(counts):
        return max(abs(c - counts[0]) for c in counts[1:]) / counts[0]

    ok = change(stable) <= 0.05 and change(spread) > 0.05
    return report(6, "diffusion control over 5 merges", ok,
                  f"conditional {100 * change(stable):.2f}%, unconditional {100 * change(spread):.2f}%")


def check_algebraic_equivalence():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        theta, dtheta = rng.uniform(-180, 180), rng.uniform(-10, 10)
        solution = MergeSolution("icp_refined", theta, tuple(rng.uniform(0, 700, 2)), tuple(rng.uniform(0, 700, 2)),
                                 icp=(*rng.uniform(-5, 5, 2), dtheta))
        points = rng.uniform(0, 700, (100, 2))
        diff = apply_two_step(points, solution) - closed_form_transform(solution).apply(points)
        worst = max(worst, float(np.abs(diff).max()))
    return report(7, "two-step vs closed-form transform", worst <= 1e-9,
                  f"max difference {worst:.2e} cells over 1000 x 100")


def check_worked_examples():
    groups = classify_groups([2, 90, -1, -89, 179, 79])
    classified = ([g.index for g in groups.g1], [g.gradient for g in groups.g1],
                  [g.index for g in groups.g2], [g.gradient for g in groups.g2])
    groups_ok = classified == ([0, 2, 4], [2.0, -1.0, -1.0], [1, 3, 5], [90.0, 91.0, 79.0])
    probs = {5: (0.82, 0.92), 7: (0.99, 0.76), 9: (0.91, 0.92)}
    t1 = [TagEstimate(i, (i, 0), a) for i, (a, _) in probs.items()]
    t2 = [TagEstimate(i, (0, i), b) for i, (_, b) in probs.items()]
    order = gate_and_sort(t1, t2).tag_ids
    return report(8, "worked examples", groups_ok and order == (9, 5, 7),
                  f"G1 {classified[1]}, G2 {classified[3]}, tag order {order}")


def padded(bundle, shape=(600, 700)):
    """The bundle on a canvas of at least ``shape`` cells; added cells are unexplored."""
    size = (max(shape[0], bundle.occupancy.height), max(shape[1], bundle.occupancy.width))
    coverage = None if bundle.coverage is None else embed(bundle.coverage, (0, 0), size)
    return replace(bundle, occupancy=embed(bundle.occupancy, (0, 0), size), coverage=coverage)


def check_timing():
    d1, d2 = simulate_pair(corridor_scenario(0, range_bias_sigma=BIAS))
    b1, b2 = padded(d1.bundle()), padded(d2.bundle())
    estimate_solution(b1, b2, 1)  # warm-up
    method1 = min(estimate_solution(b1, b2, 1).elapsed_ms for _ in range(20))
    start = time.perf_counter()
    merge_maps_end_to_end(b1, b2, 3, MergeConfig())
    method3 = time.perf_counter() - start
    ok = method1 <= 10.0 and method3 <= 60.0
    return report(9, "timing", ok, f"method #1 {method1:.3f} ms, method #3 end to end {method3:.2f} s "
                  f"on {b1.occupancy.width}x{b1.occupancy.height} and {b2.occupancy.width}x{b2.occupancy.height}")


CHECKS = (check_ogm_vector_statistics, check_method_ordering, check_rotation_accuracy, check_localization,
          check_rounding_artifacts, check_diffusion, check_algebraic_equivalence, check_worked_examples,
          check_timing)


def test_criterion_1_ogm_vector_statistics():
    assert check_ogm_vector_statistics()


def test_criterion_2_method_ordering():
    assert check_method_ordering()


def test_criterion_3_rotation_accuracy():
    assert check_rotation_accuracy()


def test_criterion_4_localization_convergence():
    assert check_localization()


def test_criterion_5_rounding_artifacts():
    assert check_rounding_artifacts()


def test_criterion_6_diffusion_control():
    assert check_diffusion()


def test_criterion_7_algebraic_equivalence():
    assert check_algebraic_equivalence()


def test_criterion_8_worked_examples():
    assert check_worked_examples()


def test_criterion_9_timing():
    assert check_timing()


if __name__ == "__main__":
    results = [check() for check in CHECKS]
    sys.exit(0 if all(results) else 1)
