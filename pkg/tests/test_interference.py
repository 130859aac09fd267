import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netfx.errors import NoClosedFormError
from netfx.interference import (CustomFeature, FeatureSpec, FracTreatedParents, InteractionNetwork,
                                ThresholdTreatedParents, compute_features, degree_centrality_feature,
                                degree_scaling_slope, dependency_graph, loglog_slope, max_degree,
                                parents_set, read_network, second_order_set, write_network)
from netfx.sem import FamilyPartition, Lattice2d, gen_erdos_renyi

FRAC = FeatureSpec.parse("frac-parents")
SECOND = FeatureSpec.parse("frac-parents-of-parents")
ALL_KINDS = FeatureSpec.parse("frac-parents,frac-parents-of-parents,threshold-parents:0.5")


def random_network(rng, n, p):
    adj = (rng.random((n, n)) < p).astype(int)
    np.fill_diagonal(adj, 0)
    return InteractionNetwork(adj)


def one_based(s):
    return {i + 1 for i in s}


class TestNetwork:
    def test_parents_three_units(self, net3):
        assert one_based(parents_set(net3, 1)) == {1, 3}
        assert one_based(parents_set(net3, 0)) == {3}

    def test_parents_empty(self):
        assert parents_set(InteractionNetwork.empty(4), 2) == set()

    def test_second_order(self, net6):
        assert one_based(second_order_set(net6, 0)) == {2, 6}
        assert second_order_set(net6, 4) == set()
        assert second_order_set(net6, 3) == set()

    def test_out_of_range(self, net3):
        with pytest.raises(IndexError):
            parents_set(net3, 3)
        with pytest.raises(IndexError):
            InteractionNetwork.from_edges(3, [(0, 5)])

    def test_self_loop_rejected(self):
        with pytest.raises(ValueError):
            InteractionNetwork.from_edges(3, [(1, 1)])

    def test_adjacency_matches_edges(self, net6):
        dense = net6.adjacency.toarray()
        assert {tuple(e) for e in net6.edges()} == {tuple(e) for e in np.argwhere(dense)}

    def test_file_roundtrip(self, tmp_path, net6):
        path = tmp_path / "net.tsv"
        write_network(net6, path)
        text = path.read_text().splitlines()
        assert text[0] == "# n_units=6" and "5\t1" in text
        assert read_network(path) == net6

    def test_file_missing_header(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("1\t2\n")
        with pytest.raises(ValueError):
            read_network(path)


class TestFeatures:
    def test_fraction_three_units(self, net3):
        x = compute_features(net3, [1, 0, 1], FRAC)
        assert np.array_equal(x[:, 0], [1.0, 1.0, 0.0])

    def test_threshold_three_units(self, net3):
        x = compute_features(net3, [1, 0, 1], FeatureSpec((ThresholdTreatedParents(0.5),)))
        assert np.array_equal(x[:, 0], [1.0, 1.0, 0.0])

    def test_all_zero_treatment(self, net6):
        assert not compute_features(net6, np.zeros(6), ALL_KINDS).any()

    def test_fill_for_parentless_units(self, net6):
        spec = FeatureSpec((FracTreatedParents(fill=0.25),))
        x = compute_features(net6, np.ones(6), spec)[:, 0]
        assert x[3] == 0.25 and x[5] == 0.25 and x[0] == 1.0

    def test_dimension_and_value_errors(self, net3):
        with pytest.raises(ValueError):
            compute_features(net3, [1, 0], FRAC)
        with pytest.raises(ValueError):
            compute_features(net3, [1, 0, 2], FRAC)

    def test_batch_matches_single(self, net6):
        rng = np.random.default_rng(0)
        w = (rng.random((6, 7)) < 0.5).astype(float)
        batch = compute_features(net6, w, ALL_KINDS)
        for b in range(7):
            assert np.array_equal(batch[:, :, b], compute_features(net6, w[:, b], ALL_KINDS))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_invariant_to_non_affectors(self, seed):
        rng = np.random.default_rng(seed)
        net = random_network(rng, 9, 0.25)
        w = (rng.random(9) < 0.5).astype(float)
        x = compute_features(net, w, ALL_KINDS)
        aff = ALL_KINDS.affector_matrix(net).toarray()
        for i in range(9):
            w2 = w.copy()
            outside = np.flatnonzero(aff[i] == 0)
            w2[outside] = (rng.random(outside.size) < 0.5)
            assert np.array_equal(compute_features(net, w2, ALL_KINDS)[i], x[i])

    def test_fraction_mean_is_treatment_probability(self):
        rng = np.random.default_rng(3)
        net = InteractionNetwork.from_edges(5, [(1, 0), (2, 0), (3, 1), (0, 2), (4, 3), (0, 4), (2, 4)])
        theta = 0.3
        w = (rng.random((5, 20000)) < theta).astype(float)
        x = compute_features(net, w, FRAC)[:, 0, :]
        se = x.std(axis=1, ddof=1) / np.sqrt(x.shape[1])
        assert np.all(np.abs(x.mean(axis=1) - theta) <= 3 * se)

    def test_threshold_expectation_matches_simulation(self):
        rng = np.random.default_rng(4)
        net = random_network(rng, 8, 0.4)
        kind = ThresholdTreatedParents(0.5)
        w = (rng.random((8, 40000)) < 0.35).astype(float)
        x = kind.evaluate(net, w)
        se = x.std(axis=1, ddof=1) / np.sqrt(x.shape[1]) + 1e-12
        assert np.all(np.abs(x.mean(axis=1) - kind.expectation(net, 0.35)) <= 3.5 * se)

    def test_custom_without_expectation(self, net3):
        f = CustomFeature("copy", lambda net: net.parent_matrix(), lambda net, w: net.parent_matrix() @ w)
        with pytest.raises(NoClosedFormError):
            f.expectation(net3, 0.5)

    def test_custom_rejects_self_affector(self, net3):
        f = CustomFeature("self", lambda net: np.eye(3), lambda net, w: w)
        with pytest.raises(ValueError):
            f.affectors(net3)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            FeatureSpec.parse("frac-friends")


def brute_dependency(net, spec):
    """Dependency graph from single-treatment perturbations (exhaustive, small n)."""
    n = net.n_units
    aff = np.zeros((n, n), dtype=bool)
    # every treatment vector, flipping one unit at a time
    ws = ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(float).T
    base = compute_features(net, ws, spec)
    for j in range(n):
        w2 = ws.copy()
        w2[j] = 1 - w2[j]
        aff[:, j] = np.any(compute_features(net, w2, spec) != base, axis=(1, 2))
    np.fill_diagonal(aff, False)
    d = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            shared = aff[i] & aff[j]
            shared[[i, j]] = False
            d[i, j] = aff[i, j] or aff[j, i] or shared.any()
    return d


class TestDependencyGraph:
    def test_six_units_second_order(self, net6):
        d = dependency_graph(net6, SECOND)
        assert [(i + 1, j + 1) for i, j in d.edges()] == [(1, 2), (1, 6), (2, 6), (3, 5)]
        assert max_degree(d) == 2
        assert list(d.degrees()) == [2, 2, 1, 0, 1, 2]

    def test_empty_network(self):
        d = dependency_graph(InteractionNetwork.empty(5), FRAC)
        assert d.edges() == [] and max_degree(d) == 0

    def test_three_units_complete(self, net3):
        assert dependency_graph(net3, FRAC).edges() == [(0, 1), (0, 2), (1, 2)]

    def test_complete_graph_degree(self):
        net = InteractionNetwork(np.ones((4, 4)) - np.eye(4))
        assert max_degree(dependency_graph(net, FRAC)) == 3

    def test_perturbation_oracle(self):
        rng = np.random.default_rng(8)
        for trial in range(40):
            n = int(rng.integers(3, 11))
            net = random_network(rng, n, float(rng.uniform(0.05, 0.4)))
            for spec in (FRAC, SECOND):
                expected = brute_dependency(net, spec)
                assert np.array_equal(dependency_graph(net, spec).to_dense(), expected), trial

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(2, 30), st.floats(0.0, 0.6))
    def test_symmetric_zero_diagonal(self, seed, n, p):
        net = random_network(np.random.default_rng(seed), n, p)
        d = dependency_graph(net, ALL_KINDS)
        dense = d.to_dense()
        assert d.is_symmetric() and np.array_equal(dense, dense.T) and not dense.diagonal().any()

    def test_dense_and_sparse_paths_agree(self):
        rng = np.random.default_rng(2)
        sparse_net = gen_erdos_renyi(300, 0.005, rng)
        dense_net = gen_erdos_renyi(300, 0.05, rng)
        for net in (sparse_net, dense_net):
            a = FRAC.affector_matrix(net).toarray().astype(int)
            ref = ((a + a.T + a @ a.T) > 0)
            np.fill_diagonal(ref, False)
            assert np.array_equal(dependency_graph(net, FRAC).to_dense(), ref)

    def test_degree_centrality_feature_is_global(self):
        # in-degrees 0, 1, 2, 3 are all distinct, so every pair interacts
        net = InteractionNetwork.from_edges(4, [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)])
        d = dependency_graph(net, FeatureSpec((degree_centrality_feature(),)))
        assert max_degree(d) == net.n_units - 1

    def test_bounded_degree_networks(self):
        spec2 = FeatureSpec.parse("frac-parents,frac-parents-of-parents")
        lattice = [max_degree(dependency_graph(Lattice2d()(s * s), spec2)) for s in (4, 8, 16, 32)]
        assert all(b <= a for a, b in zip(lattice[1:], lattice[2:]))
        rng = np.random.default_rng(1)
        fam = [max_degree(dependency_graph(FamilyPartition()(n, rng), FRAC)) for n in (50, 200, 800, 3200)]
        assert max(fam) <= 5


class TestSlopes:
    def test_loglog_exact(self):
        x = np.array([10, 20, 40, 80])
        slope, _ = loglog_slope(x, 3 * x ** 0.5)
        assert slope == pytest.approx(0.5, abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            loglog_slope([10, 10], [1, 2])

    def test_deterministic_and_parallel_equal(self):
        gen = FamilyPartition()
        a = degree_scaling_slope(gen, FRAC, [20, 40, 80], reps=3, seed=4)
        b = degree_scaling_slope(gen, FRAC, [20, 40, 80], reps=3, seed=4, n_jobs=2)
        assert np.array_equal(a.max_degrees, b.max_degrees) and a.slope == b.slope

    def test_requires_ascending_sizes(self):
        with pytest.raises(ValueError):
            degree_scaling_slope(FamilyPartition(), FRAC, [40, 20], reps=1)
