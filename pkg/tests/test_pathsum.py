import numpy as np
import pytest

from gqm.decoherence import check_axioms, coarse_grain_D
from gqm.exceptions import EnumerationSizeError, PartitionError
from gqm.hilbert import DensityState, Hamiltonian
from gqm.histories import CoarseGrainingMap
from gqm.pathsum import (
    LatticeModel,
    build_D_pathsum,
    enumerate_paths,
    hopping_hamiltonian,
    merge_partition,
    operator_equivalence_oracle,
    path_amplitude,
    predicate_partition,
    region_partition,
)

from helpers import oracle_D_pathsum, random_density, random_hermitian

BALANCED = np.array([[1, -1j], [-1j, 1]]) / np.sqrt(2)


def static_model(m, n, weights):
    return LatticeModel(m, n, 0.5, Hamiltonian.zero(m), DensityState(np.diag(weights)))


def random_model(rng, m=None, n=None):
    m = int(rng.integers(2, 6)) if m is None else m
    n = int(rng.integers(1, 5)) if n is None else n
    while m ** (n + 1) > 4000:
        n -= 1
    return LatticeModel(m, n, float(rng.uniform(0.1, 1.0)), Hamiltonian(random_hermitian(rng, m)),
                        DensityState(random_density(rng, m)))


def hops(path):
    return sum(a != b for a, b in zip(path, path[1:]))


def test_balanced_propagator():
    m = LatticeModel.balanced_hop()
    np.testing.assert_allclose(m.propagator, BALANCED, atol=1e-15)
    assert path_amplitude(m, (0, 1)) == pytest.approx(-1j / np.sqrt(2), abs=1e-15)


def test_identity_propagator_amplitudes():
    m = static_model(3, 2, [1, 0, 0])
    assert path_amplitude(m, (1, 1, 1)) == 1
    assert path_amplitude(m, (1, 2, 1)) == 0


def test_empty_product():
    m = LatticeModel(3, 0, 0.2, Hamiltonian(np.diag([1.0, 2, 3])), DensityState(np.eye(3) / 3))
    assert path_amplitude(m, (2,)) == 1


def test_amplitude_bounds_and_errors():
    rng = np.random.default_rng(0)
    m = random_model(rng, 3, 3)
    for p in enumerate_paths(m):
        assert abs(path_amplitude(m, p)) <= 1 + 1e-12
    with pytest.raises(IndexError):
        path_amplitude(m, (0, 1, 3, 0))
    with pytest.raises(ValueError):
        path_amplitude(m, (0, 1))


def test_enumeration_is_lexicographic_and_capped():
    m = static_model(2, 2, [1, 0])
    assert [tuple(p) for p in enumerate_paths(m)] == [
        (0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1),
        (1, 0, 0), (1, 0, 1), (1, 1, 0), (1, 1, 1),
    ]
    big = static_model(10, 6, [1] + [0] * 9)
    with pytest.raises(EnumerationSizeError):
        enumerate_paths(big)


def test_region_partition_counts():
    m = static_model(2, 2, [1, 0])
    assert region_partition(m, {}).class_sizes() == {(): 8}
    assert region_partition(m, {2: [[0], [1]]}).class_sizes() == {(0,): 4, (1,): 4}
    m3 = static_model(3, 1, [1, 0, 0])
    assert region_partition(m3, {1: [[0, 1], [2]]}).class_sizes() == {(0,): 6, (1,): 3}


def test_region_partition_errors():
    m = static_model(3, 2, [1, 0, 0])
    with pytest.raises(PartitionError):
        region_partition(m, {1: [[0, 1], [1, 2]]})
    with pytest.raises(PartitionError):
        region_partition(m, {1: [[0], [1]]})
    with pytest.raises(PartitionError):
        region_partition(m, {5: [[0, 1, 2]]})


def test_region_classifier_agrees_with_codes():
    rng = np.random.default_rng(1)
    m = random_model(rng, 3, 2)
    part = region_partition(m, {0: [[0], [1, 2]], 2: [[0, 2], [1]]})
    for i, p in enumerate(enumerate_paths(m)):
        assert part.labels[part.codes[i]] == part.classifier(p)


def test_predicate_visits_site_zero():
    m = static_model(2, 1, [1, 0])
    part = predicate_partition(m, lambda p: 0 in p)
    assert set(part.members(m, True)) == {(0, 0), (0, 1), (1, 0)}
    assert part.members(m, False) == [(1, 1)]


def test_predicate_constant():
    m = static_model(2, 2, [1, 0])
    assert predicate_partition(m, lambda p: "x").class_sizes() == {"x": 8}


def test_predicate_hop_count():
    m = static_model(2, 2, [1, 0])
    # Paths 000, 111 hop 0 times; 001, 011, 100, 110 once; 010, 101 twice.
    assert predicate_partition(m, hops).class_sizes() == {0: 2, 1: 4, 2: 2}


def test_static_model_final_slice_partition():
    w = [0.5, 0.3, 0.2]
    m = static_model(3, 2, w)
    d = build_D_pathsum(m, region_partition(m, {2: [[0], [1], [2]]}))
    np.testing.assert_allclose(d.entries, np.diag(w), atol=1e-15)


def test_balanced_hop_final_site():
    m = LatticeModel.balanced_hop()
    d = build_D_pathsum(m, region_partition(m, {1: [[0], [1]]}))
    np.testing.assert_allclose(d.entries, np.diag([0.5, 0.5]), atol=1e-15)


def test_single_class_is_unit():
    rng = np.random.default_rng(2)
    for _ in range(5):
        m = random_model(rng)
        d = build_D_pathsum(m, region_partition(m, {}))
        np.testing.assert_allclose(d.entries, [[1.0]], atol=1e-10)


def test_matches_literal_double_path_sum():
    rng = np.random.default_rng(3)
    for _ in range(6):
        m = random_model(rng, int(rng.integers(2, 4)), int(rng.integers(1, 3)))
        part = predicate_partition(m, hops)
        labels, expected = oracle_D_pathsum(m, hops)
        d = build_D_pathsum(m, part)
        assert list(d.index_labels) == labels
        np.testing.assert_allclose(d.entries, expected, atol=1e-12)


def test_ring_preset_interference_value():
    # Frozen for the lattice-ring-4 fixture via the literal double path sum.
    m = LatticeModel(4, 3, 0.4, hopping_hamiltonian(4), DensityState(np.diag([1.0, 0, 0, 0])))
    regions = {1: [[0, 1], [2, 3]], 3: [[0, 1], [2, 3]]}
    part = region_partition(m, regions)
    labels, expected = oracle_D_pathsum(m, part.classifier)
    d = build_D_pathsum(m, part)
    np.testing.assert_allclose(d.entries, expected, atol=1e-13)
    off = np.abs(expected[~np.eye(4, dtype=bool)])
    assert off.max() == pytest.approx(0.17926255311105, abs=1e-12)


def test_pathsum_axioms_and_superposition():
    rng = np.random.default_rng(4)
    for _ in range(10):
        m = random_model(rng)
        regions = {int(s): [[q] for q in range(m.sites)] for s in rng.choice(m.slice_count + 1, 2, replace=False)}
        part = region_partition(m, regions)
        d = build_D_pathsum(m, part)
        extra = CoarseGrainingMap({lab: int(rng.integers(0, 3)) for lab in part.labels})
        r = check_axioms(d, (m, part), [extra])
        assert r.passed, r
        assert r.superposition_residual <= 1e-10


def test_merging_commutes_with_pathsum():
    rng = np.random.default_rng(5)
    for _ in range(10):
        m = random_model(rng)
        part = predicate_partition(m, lambda p: (p[0], hops(p)))
        cg = CoarseGrainingMap({lab: lab[1] % 2 for lab in part.labels})
        direct = build_D_pathsum(m, merge_partition(part, cg))
        folded = coarse_grain_D(build_D_pathsum(m, part), cg)
        assert direct.index_labels == folded.index_labels
        np.testing.assert_allclose(direct.entries, folded.entries, atol=1e-12)


def test_predicate_refines_region():
    rng = np.random.default_rng(6)
    m = random_model(rng, 3, 3)
    regions = {2: [[0], [1, 2]]}
    region = build_D_pathsum(m, region_partition(m, regions))
    pred = build_D_pathsum(m, predicate_partition(m, lambda p: (int(p[2] != 0), hops(p))))
    folded = coarse_grain_D(pred, CoarseGrainingMap({lab: (lab[0],) for lab in pred.index_labels}))
    pos = folded.position
    order = [pos[lab] for lab in region.index_labels]
    np.testing.assert_allclose(folded.entries[np.ix_(order, order)], region.entries, atol=1e-12)


def test_oracle_static():
    m = static_model(3, 2, [0.2, 0.3, 0.5])
    assert operator_equivalence_oracle(m, {1: [[0, 2], [1]], 2: [[0], [1, 2]]}) <= 1e-15


def test_oracle_ring():
    m = LatticeModel(4, 3, 0.4, hopping_hamiltonian(4), DensityState(np.diag([0.4, 0.3, 0.2, 0.1])))
    assert operator_equivalence_oracle(m, {1: [[0, 1], [2, 3]], 3: [[0], [1, 2], [3]]}) <= 1e-10


def test_oracle_balanced_final_slice():
    m = LatticeModel.balanced_hop()
    assert operator_equivalence_oracle(m, {1: [[0], [1]]}) <= 1e-15


def test_oracle_unconstrained_and_initial_slice():
    rng = np.random.default_rng(7)
    m = random_model(rng, 3, 2)
    assert operator_equivalence_oracle(m, {}) <= 1e-12
    assert operator_equivalence_oracle(m, {0: [[0], [1, 2]], 2: [[1], [0, 2]]}) <= 1e-12


def test_model_validation():
    with pytest.raises(ValueError):
        LatticeModel(2, 1, 0.0, Hamiltonian.zero(2), DensityState(np.eye(2) / 2))
    with pytest.raises(ValueError):
        LatticeModel(3, 1, 0.1, Hamiltonian.zero(2), DensityState(np.eye(2) / 2))
