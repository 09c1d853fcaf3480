import numpy as np
import pytest

from msep_precoding import PrecodingInstance, generate_channel, snr_to_sigma


def random_instance(rng, k=2, m=3, alpha_s=4, alpha_x=4, snr_db=10.0):
    H = generate_channel(k, m, 1.0, rng)
    s = rng.integers(0, alpha_s, k)
    return PrecodingInstance(H, s, snr_to_sigma(snr_db), alpha_s, alpha_x)


def hull_interior_point(rng, instance, shrink=0.9):
    """Random strictly interior point of the transmit hull (real coords)."""
    pts = instance.tx_alphabet.points
    weights = rng.dirichlet(np.ones(instance.alpha_x), size=instance.n_antennas)
    x = shrink * (weights @ pts)
    out = np.empty(2 * instance.n_antennas)
    out[0::2] = x.real
    out[1::2] = x.imag
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
