"""Acceptance suite: one test per release criterion, at pinned tolerances.

Each test prints a single PASS line (run with -s to see them live) and
asserts its stated runtime budget.  Budgets are generous; the numerical
tolerances are the binding part.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import simpson

from cherrywine import (
    InfoCache,
    MarginalModel,
    PairCopulaAssignment,
    build_tcherry_greedy,
    cherry_to_vine,
    count_regular_vines,
    enumerate_cherry_wines,
    exhaustive_tcherry,
    gaussian_copula,
    h_function,
    kl_formula,
    tcherry_from_cluster_set,
    tcherry_from_junction,
    tree_weight,
    validate_junction_tree,
    validate_tcherry_tree,
    validate_vine,
    vine_density,
)
from cherrywine.cli import main
from cherrywine.greedy import enumerate_tcherry_structures
from cherrywine.paircopula import INDEP
from cherrywine.vine import VineEdge, VineStructure
from conftest import FULL6_LEVELS, discretized
from oracles import (
    brute_count_regular_vines,
    direct_kl_bits,
    factorizing_joint,
    h_by_finite_difference,
    max_spanning_tree,
    random_joint,
    random_junction_tree,
)

WORKED_CLUSTERS = [(1, 2, 3), (2, 3, 4), (2, 3, 6), (3, 4, 5)]


def worked_tree():
    return tcherry_from_junction(WORKED_CLUSTERS, [(0, 1), (1, 2), (1, 3)], 3)


def report(name, elapsed, budget, extra=""):
    print(f"ACCEPTANCE PASS {name} ({elapsed:.2f}s / budget {budget:.0f}s){extra}")
    assert elapsed < budget


def test_criterion_01_worked_example_factorization():
    t0 = time.time()
    choice = {3: ("deletions", (((1, 2, 3), 3), ((2, 3, 6), 3), ((3, 4, 5), 3)))}
    wine = cherry_to_vine(worked_tree(), choice)
    assert {e.pair for e in wine.level(1)} == {(1, 2), (2, 3), (2, 6), (3, 4), (4, 5)}
    assert {e.label() for e in wine.level(2)} == {"1,3|2", "3,6|2", "2,4|3", "3,5|4"}
    # and the same structure arises from the plain enumeration
    assert any(
        {e.label() for e in w.level(1)} == FULL6_LEVELS[1]
        and {e.label() for e in w.level(2)} == FULL6_LEVELS[2]
        for w in enumerate_cherry_wines(worked_tree())
    )
    report("criterion 1 (worked-example factorization)", time.time() - t0, 1.0)


def test_criterion_02_variant_count():
    t0 = time.time()
    wines = enumerate_cherry_wines(worked_tree())
    assert len(wines) == 8
    keys = {frozenset(w.all_edges()) for w in wines}
    assert len(keys) == 8
    report("criterion 2 (eight vine variants)", time.time() - t0, 1.0)


def test_criterion_03_regular_vine_count():
    t0 = time.time()
    assert count_regular_vines(6) == 23040
    for d in (2, 3, 4):
        assert count_regular_vines(d) == brute_count_regular_vines(d)
    report("criterion 3 (regular-vine counts)", time.time() - t0, 1.0)


def test_criterion_04_kl_identity():
    t0 = time.time()
    rng = np.random.default_rng(41)
    worst = 0.0
    for _ in range(100):
        jt, d = random_junction_tree(rng, d_max=5)
        assert validate_junction_tree(jt).ok
        ranges = tuple(int(rng.integers(2, 5)) for _ in range(d))
        joint = random_joint(rng, ranges)
        closed = kl_formula(jt, joint)
        direct = direct_kl_bits(joint, jt)
        worst = max(worst, abs(closed - direct))
        assert abs(closed - direct) < 1e-9
        assert closed >= -1e-12
    for _ in range(30):
        d = int(rng.integers(3, 6))
        k = int(rng.integers(2, d + 1))
        trees = list(enumerate_tcherry_structures(d, k))
        tree = trees[int(rng.integers(0, len(trees)))]
        ranges = tuple(int(rng.integers(2, 5)) for _ in range(d))
        joint = factorizing_joint(tree, ranges, rng)
        assert abs(kl_formula(tree, joint)) < 1e-12
    report(
        "criterion 4 (KL closed form)",
        time.time() - t0,
        30.0,
        f" worst |closed-direct|={worst:.2e}",
    )


def test_criterion_05_weight_kl_duality():
    t0 = time.time()
    rng = np.random.default_rng(42)
    for _ in range(10):
        joint = random_joint(rng, tuple(int(rng.integers(2, 4)) for _ in range(5)))

        memo = {}

        def info(K, _joint=joint, _memo=memo):
            key = tuple(sorted(K))
            if key not in _memo:
                _memo[key] = _joint.info(key)
            return _memo[key]

        for k in (2, 3, 4):
            trees = list(enumerate_tcherry_structures(5, k))
            weights = [tree_weight(t, info) for t in trees]
            kls = [info(tuple(range(1, 6))) - w for w in weights]
            direct_check = kl_formula(trees[0], joint)
            assert abs(direct_check - kls[0]) < 1e-12
            assert int(np.argmax(weights)) == int(np.argmin(kls))
            # spot-check the duality against the direct divergence as well
            best = int(np.argmax(weights))
            assert direct_kl_bits(joint, trees[best]) <= (
                min(direct_kl_bits(joint, trees[i]) for i in (0, len(trees) // 2))
                + 1e-9
            )
    report("criterion 5 (weight/KL duality)", time.time() - t0, 60.0)


def test_criterion_06_chow_liu_equivalence():
    t0 = time.time()
    checked = 0
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)
        d = int(rng.integers(3, 7))
        n = int(rng.integers(40, 120))
        vals = rng.normal(size=(n, d))
        vals[:, 1] += rng.uniform(0.5, 2.0) * vals[:, 0]
        ds = discretized(vals, int(rng.integers(3, 6)))
        cache = InfoCache(ds)
        pair_weights = {
            (i, j): cache((i, j))
            for i in range(1, d + 1)
            for j in range(i + 1, d + 1)
        }
        if len(set(pair_weights.values())) != len(pair_weights):
            continue  # ties: criterion only binds for unique weights
        result = build_tcherry_greedy(ds, 2, cache=cache)
        _, best_edges = max_spanning_tree(d, lambda e: pair_weights[e])
        assert set(result.tree.clusters) == set(best_edges)
        checked += 1
    assert checked >= 45
    report(
        "criterion 6 (Chow-Liu equivalence)",
        time.time() - t0,
        30.0,
        f" seeds checked={checked}/50",
    )


def test_criterion_07_greedy_validity_and_bound():
    t0 = time.time()
    rng = np.random.default_rng(43)
    gaps = []
    for trial in range(100):
        d = 4 + trial % 4  # 25 instances each of d = 4..7
        n = int(rng.integers(30, 80))
        vals = rng.normal(size=(n, d))
        for j in range(1, d):
            if rng.random() < 0.5:
                vals[:, j] += rng.uniform(0.3, 1.5) * vals[:, j - 1]
        ds = discretized(vals, 3)
        result = build_tcherry_greedy(ds, 3)
        assert validate_tcherry_tree(result.tree).ok
        assert validate_junction_tree(result.tree).ok
        _, opt = exhaustive_tcherry(ds, 3)
        assert result.total_weight <= opt + 1e-9
        gaps.append(opt - result.total_weight)
    gaps = np.array(gaps)
    extra = (
        f" gap mean={gaps.mean():.4f} max={gaps.max():.4f} "
        f"zero-gap={int((gaps < 1e-9).sum())}/100"
    )
    report("criterion 7 (greedy validity and bound)", time.time() - t0, 300.0, extra)


def test_criterion_08_vine_density_correctness():
    t0 = time.time()
    rng = np.random.default_rng(44)

    # independence assignment: exact product of marginal densities
    tree = tcherry_from_junction([(1, 2, 3)], [], 3)
    wine = cherry_to_vine(tree)
    marg = MarginalModel.standard_normal(3)
    pts = rng.normal(size=(1000, 3))
    dens = vine_density(wine, PairCopulaAssignment(), marg, pts)
    product = np.ones(1000)
    for i in range(3):
        product = product * marg.pdfs[i](pts[:, i])
    assert np.array_equal(dens, product)

    # d=2 gaussian vine equals the closed-form bivariate normal density
    rho = 0.65
    v2 = VineStructure(2, ((VineEdge((1, 2)),),))
    assign2 = PairCopulaAssignment({VineEdge((1, 2)): gaussian_copula(rho)})
    marg2 = MarginalModel.standard_normal(2)
    mvn = stats.multivariate_normal(cov=[[1.0, rho], [rho, 1.0]])
    grid2 = [(x, y) for x in (-2.0, 0.0, 2.0) for y in (-1.5, 0.5, 2.5)]
    for point in grid2:
        assert vine_density(v2, assign2, marg2, point) == pytest.approx(
            mvn.pdf(point), abs=1e-9
        )

    # d=3 gaussian vine integrates to 1 by Simpson quadrature on [-5, 5]^3
    assign3 = PairCopulaAssignment(
        {
            wine.level(1)[0]: gaussian_copula(0.5),
            wine.level(1)[1]: gaussian_copula(-0.3),
            wine.level(2)[0]: gaussian_copula(0.4),
        }
    )
    n = 61
    axis = np.linspace(-5.0, 5.0, n)
    mesh = np.array(np.meshgrid(axis, axis, axis, indexing="ij"))
    cube = vine_density(wine, assign3, marg, mesh.reshape(3, -1).T).reshape(n, n, n)
    mass = simpson(simpson(simpson(cube, x=axis), x=axis), x=axis)
    assert mass == pytest.approx(1.0, abs=1e-2)
    report(
        "criterion 8 (vine density correctness)",
        time.time() - t0,
        120.0,
        f" quadrature mass={mass:.6f}",
    )


def test_criterion_09_h_function_oracle():
    t0 = time.time()
    worst = 0.0
    for rho in (-0.95, -0.6, -0.2, 0.0, 0.3, 0.75, 0.95):
        pc = gaussian_copula(rho)
        for u in np.linspace(0.08, 0.92, 6):
            for v in np.linspace(0.08, 0.92, 6):
                fd = h_by_finite_difference(float(u), float(v), rho)
                err = abs(h_function(pc, u, v) - fd)
                worst = max(worst, err)
                assert err < 1e-6
    report(
        "criterion 9 (h-function vs finite differences)",
        time.time() - t0,
        10.0,
        f" worst={worst:.2e}",
    )


TRUE_CLUSTERS = {(1, 2, 3), (2, 3, 4), (2, 3, 6), (3, 4, 5)}


def simulate_cherry_gaussian(rng, n):
    """Gaussian sample whose Markov network is the worked-example tree."""
    x2 = rng.normal(size=n)
    x3 = rng.normal(size=n)
    x1 = x2 + x3 + 0.4 * rng.normal(size=n)
    x4 = 0.9 * (x2 + x3) + 0.55 * rng.normal(size=n)
    x6 = 0.8 * (x2 + x3) + 0.8 * rng.normal(size=n)
    x5 = 0.9 * x4 + 0.5 * x3 + 0.7 * rng.normal(size=n)
    return np.column_stack([x1, x2, x3, x4, x5, x6])


def test_criterion_10_structure_recovery(tmp_path, capsys):
    t0 = time.time()
    hits = 0
    csv = tmp_path / "sim.csv"
    out = tmp_path / "model.json"
    from cherrywine.cli import load_model, model_tree

    for seed in range(50):
        rng = np.random.default_rng(seed)
        np.savetxt(csv, simulate_cherry_gaussian(rng, 5000), delimiter=",")
        code = main(
            ["fit", "--input", str(csv), "--k", "3", "--bins", "8",
             "--output", str(out)]
        )
        assert code == 0
        tree = model_tree(load_model(str(out)))
        if set(tree.clusters) == TRUE_CLUSTERS:
            hits += 1
    capsys.readouterr()  # drop accumulated fit logs
    assert hits >= 45
    report(
        "criterion 10 (structure recovery)",
        time.time() - t0,
        300.0,
        f" recovered={hits}/50",
    )


def test_criterion_11_deterministic_model_files(tmp_path):
    t0 = time.time()
    rng = np.random.default_rng(45)
    csv = tmp_path / "data.csv"
    np.savetxt(csv, simulate_cherry_gaussian(rng, 400), delimiter=",")
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        code = main(
            ["fit", "--input", str(csv), "--k", "3", "--bins", "6",
             "--output", str(out), "--fit-pairs", "gaussian"]
        )
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    report("criterion 11 (bit-identical model files)", time.time() - t0, 60.0)
