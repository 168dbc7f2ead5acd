import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acesketch.exceptions import ContractViolation, DomainError
from acesketch.srp import MAX_K_BITS, SrpFamily, collision_probabilities, collision_probability


def expand(seed, t, d):
    # the documented derivation, written out independently of the library
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(t,))
    return np.random.Generator(np.random.PCG64(ss)).standard_normal(d)


def test_bit_of_own_direction_is_one():
    fam = SrpFamily(5, k_bits=3, num_tables=4, seed=3)
    for table in range(4):
        for bit in range(3):
            assert fam.srp_bit(table, bit, fam.direction(table, bit)) == 1


def test_zero_vector_maps_to_one():
    fam = SrpFamily(4, k_bits=6, num_tables=3, seed=1)
    assert fam.srp_bit(0, 0, np.zeros(4)) == 1
    assert fam.meta_hash(2, np.zeros(4)) == 2**6 - 1


def test_bits_follow_first_component_frozen():
    # seed 7, d=2: first components -0.630, 1.402, 0.039
    fam = SrpFamily(2, k_bits=3, num_tables=1, seed=7)
    assert [fam.srp_bit(0, b, [1.0, 0.0]) for b in range(3)] == [0, 1, 1]
    for b in range(3):
        np.testing.assert_array_equal(fam.direction(0, b), expand(7, b, 2))


def test_meta_hash_of_e1_frozen():
    # seed 11, d=3, K=4: signs of first components give 0111 and 0100
    fam = SrpFamily(3, k_bits=4, num_tables=2, seed=11)
    e1 = np.array([1.0, 0.0, 0.0])
    assert fam.meta_hash(0, e1) == 7
    assert fam.meta_hash(1, e1) == 4
    np.testing.assert_array_equal(fam.hash(e1), [7, 4])


def test_meta_hash_bit_order_msb_first(rng):
    fam = SrpFamily(6, k_bits=5, num_tables=3, seed=9)
    x = rng.normal(size=6)
    for table in range(3):
        bits = [fam.srp_bit(table, b, x) for b in range(5)]
        assert fam.meta_hash(table, x) == int("".join(map(str, bits)), 2)


def test_k1_range(rng):
    fam = SrpFamily(3, k_bits=1, num_tables=20, seed=0)
    assert set(fam.hash_many(rng.normal(size=(50, 3))).ravel()) <= {0, 1}


@settings(max_examples=50, deadline=None)
@given(scale=st.floats(min_value=1e-3, max_value=1e3), seed=st.integers(0, 2**32))
def test_positive_scaling_invariance(scale, seed):
    fam = SrpFamily(4, k_bits=8, num_tables=5, seed=seed)
    x = np.random.default_rng(seed).normal(size=4)
    np.testing.assert_array_equal(fam.hash(x), fam.hash(scale * x))


def test_regenerate_mode_matches_cache(rng):
    X = rng.normal(size=(30, 7))
    cached = SrpFamily(7, 6, 4, seed=21)
    lean = SrpFamily(7, 6, 4, seed=21, cache_projections=False)
    np.testing.assert_array_equal(cached.hash_many(X), lean.hash_many(X))
    assert lean.projection_bytes() == 0
    assert cached.projection_bytes() == 6 * 4 * 7 * 8
    assert cached.meta_hash(3, X[0]) == lean.meta_hash(3, X[0])


def test_equal_configs_hash_identically(rng):
    X = rng.normal(size=(1000, 8))
    a = SrpFamily(8, 12, 6, seed=2024)
    b = SrpFamily(8, 12, 6, seed=2024)
    assert a == b
    np.testing.assert_array_equal(a.hash_many(X), b.hash_many(X))
    assert not np.array_equal(a.hash_many(X), SrpFamily(8, 12, 6, seed=2025).hash_many(X))


def test_single_and_batch_paths_agree(rng):
    fam = SrpFamily(9, 10, 7, seed=5)
    X = rng.normal(size=(40, 9))
    batch = fam.hash_many(X)
    for i, x in enumerate(X):
        np.testing.assert_array_equal(fam.hash(x), batch[i])
        assert fam.meta_hash(3, x) == batch[i, 3]


@pytest.mark.parametrize(
    "kwargs",
    [dict(dim=0), dict(k_bits=0), dict(k_bits=MAX_K_BITS + 1), dict(num_tables=0), dict(noise_scale=-1.0), dict(seed=-1)],
)
def test_bad_configuration(kwargs):
    args = dict(dim=3, k_bits=4, num_tables=2, seed=0)
    args.update(kwargs)
    with pytest.raises(ContractViolation):
        SrpFamily(**args)


def test_dimension_mismatch_names_lengths():
    fam = SrpFamily(3, 4, 2)
    with pytest.raises(ContractViolation, match="expected length 3, got 4"):
        fam.hash(np.ones(4))
    with pytest.raises(ContractViolation):
        fam.srp_bit(0, 0, np.ones(2))
    with pytest.raises(ContractViolation):
        fam.srp_bit(2, 0, np.ones(3))
    with pytest.raises(ContractViolation):
        fam.srp_bit(0, 4, np.ones(3))


def test_collision_probability_known_angles():
    x = np.array([1.0, 2.0, -0.5])
    assert collision_probability(x, x) == 1.0
    assert collision_probability(x, -x) == 0.0
    assert collision_probability([1.0, 0.0], [0.0, 3.0]) == pytest.approx(0.5, abs=1e-15)
    assert collision_probability([1.0, 0.0], [1.0, 1.0]) == pytest.approx(0.75)


def test_collision_probability_clamps_rounding():
    x = np.array([0.1, 0.2, 0.3]) * 3.0
    assert collision_probability(x, x * (1 + 1e-16)) == 1.0
    assert not math.isnan(collision_probability(x, x))


def test_collision_probability_zero_vector():
    with pytest.raises(DomainError):
        collision_probability([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(DomainError):
        collision_probabilities([1.0, 0.0], np.zeros((2, 2)))


def test_vectorised_probabilities_match(rng):
    q = rng.normal(size=5)
    X = rng.normal(size=(20, 5))
    expected = [collision_probability(q, x) for x in X]
    np.testing.assert_allclose(collision_probabilities(q, X), expected, rtol=0, atol=1e-14)


def test_k_bit_collision_rate(rng):
    # M independent tables; agreement of whole K-bit buckets ~ p**K
    K, M = 3, 40_000
    fam = SrpFamily(6, k_bits=K, num_tables=M, seed=77)
    x, y = rng.normal(size=6), rng.normal(size=6)
    p = collision_probability(x, y) ** K
    h = fam.hash_many(np.vstack([x, y]))
    rate = np.mean(h[0] == h[1])
    assert abs(rate - p) < 3 * math.sqrt(p * (1 - p) / M)


def test_noise_reduces_self_collision(rng):
    M = 20_000
    x = rng.normal(size=5)
    x /= np.linalg.norm(x)
    rates = []
    for sigma in (0.1, 0.5, 2.0):
        fam = SrpFamily(5, k_bits=1, num_tables=M, seed=3, noise_scale=sigma, noise_seed=99)
        rates.append(np.mean(fam.hash(x) == fam.hash(x)))
    assert rates[0] < 1.0
    assert rates[0] > rates[1] > rates[2]


def test_noise_stream_is_seeded(rng):
    x = rng.normal(size=4)
    a = SrpFamily(4, 8, 10, seed=1, noise_scale=0.3, noise_seed=5)
    b = SrpFamily(4, 8, 10, seed=1, noise_scale=0.3, noise_seed=5)
    np.testing.assert_array_equal(a.hash(x), b.hash(x))
    np.testing.assert_array_equal(a.hash(x), b.hash(x))
