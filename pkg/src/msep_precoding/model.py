"""Domain primitives for the phase-quantized MU-MIMO downlink.

PSK alphabets, the interleaved real-valued coordinate map, Rayleigh channel
generation, the AWGN transmit step, and hard detection with symbol-error
counting.  Everything here is pure given its inputs; random draws always go
through an explicitly passed ``numpy.random.Generator`` so experiments are
bit-reproducible (derive per-task generators with ``np.random.default_rng``
seeded on a list like ``[seed, point, channel]``).

Conventions
-----------
* A PSK alphabet of order ``a`` has points ``amplitude * exp(1j*pi*(2i+1)/a)``
  for ``i = 0..a-1``; angles are strictly increasing in ``[0, 2*pi)`` and
  symbols are referred to by the 0-based index ``i``.
* Transmit vectors use per-entry amplitude ``1/sqrt(M)`` so ``||x||^2 = 1``
  and ``SNR = 1/sigma_w**2``.
* The real-valued description of a complex length-M vector interleaves
  real and imaginary parts: ``[Re x_1, Im x_1, ..., Re x_M, Im x_M]``.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PskAlphabet",
    "PrecodingInstance",
    "ReceivedSample",
    "to_real",
    "to_complex",
    "hard_detect",
    "generate_channel",
    "transmit",
    "count_symbol_errors",
]


@dataclass(frozen=True)
class PskAlphabet:
    """PSK constellation: ``order`` points of modulus ``amplitude``."""

    order: int
    amplitude: float = 1.0
    _points: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.order < 2:
            raise ValueError(f"PSK order must be >= 2, got {self.order}")
        if not self.amplitude > 0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")
        angles = np.pi * (2.0 * np.arange(self.order) + 1.0) / self.order
        pts = self.amplitude * np.exp(1j * angles)
        pts.setflags(write=False)
        object.__setattr__(self, "_points", pts)

    @property
    def points(self) -> np.ndarray:
        """All constellation points, index order, read-only."""
        return self._points

    def point(self, i: int) -> complex:
        return complex(self._points[i])

    @property
    def angles(self) -> np.ndarray:
        return np.angle(self._points) % (2.0 * np.pi)


@dataclass(frozen=True)
class PrecodingInstance:
    """One precoding problem: channel, data-symbol indices, noise level.

    ``H`` is the K x M complex channel, ``s`` holds 0-based indices into the
    order-``alpha_s`` data alphabet, and ``sigma_w`` is the standard
    deviation of the complex noise sample.
    """

    H: np.ndarray
    s: np.ndarray
    sigma_w: float
    alpha_s: int
    alpha_x: int

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex)
        s = np.asarray(self.s, dtype=int)
        if H.ndim != 2 or H.shape[0] < 1 or H.shape[1] < 1:
            raise ValueError(f"H must be a K x M matrix with K,M >= 1, got shape {H.shape}")
        if s.shape != (H.shape[0],):
            raise ValueError(f"s must have length K={H.shape[0]}, got shape {s.shape}")
        if not self.sigma_w > 0:
            raise ValueError(f"sigma_w must be positive, got {self.sigma_w}")
        if self.alpha_s < 2 or self.alpha_x < 2:
            raise ValueError("alphabet orders must be >= 2")
        if np.any(s < 0) or np.any(s >= self.alpha_s):
            raise ValueError("s entries must index the data alphabet")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "s", s)

    @property
    def n_users(self) -> int:
        return self.H.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.H.shape[1]

    @property
    def data_alphabet(self) -> PskAlphabet:
        return PskAlphabet(self.alpha_s, 1.0)

    @property
    def tx_alphabet(self) -> PskAlphabet:
        """Transmit alphabet, amplitude 1/sqrt(M) so the vector has unit power."""
        return PskAlphabet(self.alpha_x, 1.0 / np.sqrt(self.n_antennas))

    @property
    def s_values(self) -> np.ndarray:
        """Complex data symbols selected by the index vector ``s``."""
        return self.data_alphabet.points[self.s]


@dataclass(frozen=True)
class ReceivedSample:
    """Noisy receive vector ``z = y + w`` with its noiseless part and noise."""

    z: np.ndarray
    y: np.ndarray
    w: np.ndarray


def to_real(x) -> np.ndarray:
    """Interleave a complex vector into [Re x_1, Im x_1, ..., Re x_M, Im x_M]."""
    x = np.asarray(x, dtype=complex)
    out = np.empty(2 * x.shape[-1], dtype=float)
    out[0::2] = x.real
    out[1::2] = x.imag
    return out


def to_complex(x_r) -> np.ndarray:
    """Inverse of :func:`to_real`; the input length must be even."""
    x_r = np.asarray(x_r, dtype=float)
    if x_r.shape[-1] % 2 != 0:
        raise ValueError(f"real-valued vector must have even length, got {x_r.shape[-1]}")
    return x_r[0::2] + 1j * x_r[1::2]


def hard_detect(z, alphabet: PskAlphabet):
    """Map received samples to symbol indices by angular sector.

    The decision region of point ``i`` is the circular sector of width
    ``2*pi/order`` centered on its angle; magnitude is ignored.  Samples
    exactly on a sector boundary (and z = 0) resolve to the lower of the
    two adjacent indices.
    """
    z = np.asarray(z)
    a = np.angle(z) % (2.0 * np.pi)
    u = a * (alphabet.order / (2.0 * np.pi))
    idx = np.floor(u).astype(int) % alphabet.order
    on_boundary = u == np.floor(u)
    if np.any(on_boundary):
        lower = np.minimum(idx, (idx - 1) % alphabet.order)
        idx = np.where(on_boundary, np.where(idx == 0, 0, lower), idx)
    if z.ndim == 0:
        return int(idx)
    return idx


def generate_channel(n_users: int, n_antennas: int, sigma_g: float, rng) -> np.ndarray:
    """Draw an i.i.d. Rayleigh-fading channel matrix.

    Entries are circularly-symmetric complex Gaussian with E|h|^2 = sigma_g**2
    (real and imaginary parts each N(0, sigma_g**2 / 2)).
    """
    if n_users < 1 or n_antennas < 1:
        raise ValueError("channel dimensions must be >= 1")
    if not sigma_g > 0:
        raise ValueError(f"sigma_g must be positive, got {sigma_g}")
    scale = sigma_g / np.sqrt(2.0)
    re = rng.standard_normal((n_users, n_antennas))
    im = rng.standard_normal((n_users, n_antennas))
    return scale * (re + 1j * im)


def transmit(instance: PrecodingInstance, x, rng, noise: bool = True) -> ReceivedSample:
    """Propagate ``x`` through the channel and add complex AWGN.

    With ``noise=False`` the noise vector is exactly zero (useful for
    noiseless sanity checks); otherwise ``w_k ~ CN(0, sigma_w**2)`` i.i.d.
    """
    x = np.asarray(x, dtype=complex)
    if x.shape != (instance.n_antennas,):
        raise ValueError(
            f"x must have length M={instance.n_antennas}, got shape {x.shape}"
        )
    y = instance.H @ x
    if noise:
        scale = instance.sigma_w / np.sqrt(2.0)
        k = instance.n_users
        w = scale * (rng.standard_normal(k) + 1j * rng.standard_normal(k))
    else:
        w = np.zeros(instance.n_users, dtype=complex)
    return ReceivedSample(z=y + w, y=y, w=w)


def count_symbol_errors(s, z, alphabet: PskAlphabet) -> int:
    """Number of entries of ``z`` hard-detected to an index different from ``s``.

    ``z`` may carry leading batch dimensions; ``s`` broadcasts against them.
    """
    s = np.asarray(s, dtype=int)
    z = np.asarray(z)
    if z.shape[-1] != s.shape[-1]:
        raise ValueError(f"length mismatch: s has {s.shape[-1]} entries, z has {z.shape[-1]}")
    detected = hard_detect(z, alphabet)
    return int(np.count_nonzero(detected != s))
