import numpy as np
import pytest

from msep_precoding import (
    PrecodingInstance,
    PskAlphabet,
    count_symbol_errors,
    generate_channel,
    hard_detect,
    to_complex,
    to_real,
    transmit,
)

from conftest import random_instance


def test_to_real_examples():
    assert np.array_equal(to_real([1 + 2j]), [1.0, 2.0])
    assert np.array_equal(to_real([1j, -1]), [0.0, 1.0, -1.0, 0.0])


def test_to_complex_examples():
    assert np.array_equal(to_complex([0.0, 1.0]), [1j])
    assert np.array_equal(to_complex([1.0, 0.0, 0.0, -1.0]), [1.0, -1j])


def test_to_complex_rejects_odd_length():
    with pytest.raises(ValueError):
        to_complex([1.0, 2.0, 3.0])


def test_round_trip_identity(rng):
    for _ in range(100):
        m = int(rng.integers(1, 9))
        v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        assert np.array_equal(to_complex(to_real(v)), v)
        w = rng.standard_normal(2 * m)
        assert np.array_equal(to_real(to_complex(w)), w)


def test_alphabet_points():
    for order in (2, 3, 4, 8, 16):
        alph = PskAlphabet(order, 0.7)
        pts = alph.points
        assert pts.shape == (order,)
        assert np.allclose(np.abs(pts), 0.7, atol=1e-14)
        ang = np.angle(pts) % (2 * np.pi)
        assert np.all(np.diff(ang) > 0)
        assert len(np.unique(np.round(pts, 12))) == order
        assert np.allclose(
            pts, 0.7 * np.exp(1j * np.pi * (2 * np.arange(order) + 1) / order)
        )


def test_alphabet_validation():
    with pytest.raises(ValueError):
        PskAlphabet(1)
    with pytest.raises(ValueError):
        PskAlphabet(4, 0.0)


def test_hard_detect_sectors():
    qpsk = PskAlphabet(4)
    # angle ~5.7 degrees lies in [0, 90), the sector of exp(j*pi/4)
    assert hard_detect(1 + 0.1j, qpsk) == 0
    assert hard_detect(-1 + 0.1j, qpsk) == 1


def test_hard_detect_own_point():
    for order in (2, 3, 4, 8):
        alph = PskAlphabet(order, 2.5)
        for i in range(order):
            assert hard_detect(alph.point(i), alph) == i


def test_hard_detect_ties_to_lowest_index():
    qpsk = PskAlphabet(4)
    assert hard_detect(0j, qpsk) == 0
    assert hard_detect(1.0 + 0j, qpsk) == 0  # boundary between sectors 3 and 0
    assert hard_detect(1j, qpsk) == 0  # boundary between sectors 0 and 1
    assert hard_detect(-1.0 + 0j, qpsk) == 1


def test_hard_detect_scale_invariance(rng):
    alph = PskAlphabet(8)
    z = rng.standard_normal(200) + 1j * rng.standard_normal(200)
    base = hard_detect(z, alph)
    for c in (0.5, 3.0, 10.0):
        assert np.array_equal(hard_detect(c * z, alph), base)


def test_hard_detect_partitions_plane():
    # every angle maps to exactly one index; sectors tile [0, 2pi)
    for order in (3, 4, 8):
        alph = PskAlphabet(order)
        ang = np.linspace(0.001, 2 * np.pi - 0.001, 1000)
        idx = hard_detect(np.exp(1j * ang), alph)
        # independent oracle: nearest point by angular distance
        diff = np.abs(
            (ang[:, None] - np.angle(alph.points)[None, :] + np.pi) % (2 * np.pi) - np.pi
        )
        assert np.array_equal(idx, np.argmin(diff, axis=1))


def test_generate_channel_shape_and_seed(rng):
    h = generate_channel(2, 3, 1.0, np.random.default_rng(7))
    assert h.shape == (2, 3)
    again = generate_channel(2, 3, 1.0, np.random.default_rng(7))
    assert np.array_equal(h, again)


def test_generate_channel_second_moment():
    rng = np.random.default_rng(99)
    h = generate_channel(100, 1000, 1.3, rng)
    power = np.abs(h) ** 2
    # Var(|h|^2) = sigma_g^4 for complex Gaussian entries
    se = 1.3 ** 2 / np.sqrt(power.size)
    assert abs(power.mean() - 1.3 ** 2) < 3 * se


def test_generate_channel_validation(rng):
    with pytest.raises(ValueError):
        generate_channel(2, 3, 0.0, rng)
    with pytest.raises(ValueError):
        generate_channel(0, 3, 1.0, rng)


def test_transmit_noiseless_and_shape(rng):
    inst = PrecodingInstance(np.array([[1.0, 0.0]]), np.array([0]), 0.5, 4, 4)
    x = np.array([0.3 + 0.1j, -0.2j])
    sample = transmit(inst, x, rng, noise=False)
    assert np.array_equal(sample.z, sample.y)
    assert np.array_equal(sample.w, [0.0])
    assert sample.y[0] == x[0]


def test_transmit_dimension_check(rng):
    inst = random_instance(rng, k=2, m=3)
    with pytest.raises(ValueError):
        transmit(inst, np.ones(4, dtype=complex), rng)


def test_transmit_noise_variance():
    rng = np.random.default_rng(11)
    inst = PrecodingInstance(np.ones((10, 1), dtype=complex), np.zeros(10, dtype=int), 0.7, 4, 4)
    x = np.array([1.0 + 0j])
    draws = np.concatenate(
        [transmit(inst, x, rng).z - 1.0 for _ in range(10_000)]
    )
    power = np.abs(draws) ** 2
    se = 0.7 ** 2 / np.sqrt(power.size)
    assert abs(power.mean() - 0.7 ** 2) < 3 * se


def test_count_errors_exact_and_rotated(rng):
    inst = random_instance(rng, k=4, m=3)
    alph = inst.data_alphabet
    on_points = alph.points[inst.s]
    assert count_symbol_errors(inst.s, on_points, alph) == 0
    assert count_symbol_errors(inst.s, -on_points, alph) == 4


def test_count_errors_vs_loop_oracle(rng):
    alph = PskAlphabet(8)
    for _ in range(20):
        s = rng.integers(0, 8, 5)
        z = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        expected = 0
        for k in range(5):
            ang = np.angle(z[k]) % (2 * np.pi)
            sector = int(ang // (2 * np.pi / 8)) % 8
            expected += int(sector != s[k])
        assert count_symbol_errors(s, z, alph) == expected


def test_instance_validation(rng):
    H = generate_channel(2, 3, 1.0, rng)
    with pytest.raises(ValueError):
        PrecodingInstance(H, np.array([0, 4]), 1.0, 4, 4)  # index out of range
    with pytest.raises(ValueError):
        PrecodingInstance(H, np.array([0, 1]), 0.0, 4, 4)  # sigma
    with pytest.raises(ValueError):
        PrecodingInstance(H, np.array([0]), 1.0, 4, 4)  # length mismatch


def test_tx_alphabet_power(rng):
    inst = random_instance(rng, k=2, m=5)
    pts = inst.tx_alphabet.points
    assert np.allclose(np.abs(pts), 1 / np.sqrt(5))
    x = pts[rng.integers(0, 4, 5)]
    assert abs(np.linalg.norm(x) - 1.0) < 1e-12
