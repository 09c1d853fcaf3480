"""Symbol-error-probability design criteria in real-valued form.

Two criteria are supported:

* ``qmsep`` (QPSK data only): the exact per-user correct-detection
  probability factors into independent real and imaginary half-plane
  events, giving the objective
  ``g(x) = -sum_k [log Phi(m_Rk) + log Phi(m_Ik)]`` where the margins
  ``m_Rk, m_Ik`` are sign-corrected real/imaginary parts of the received
  signal scaled by ``sqrt(2)/sigma_w``.

* ``ubmsep`` (any PSK order): a union bound over the two sector edges.
  With the received sample rotated so the intended symbol sits on the
  positive real axis, the two signed edge distances per user are
  ``d1 = Re sin(theta) - Im cos(theta)`` and
  ``d2 = Re sin(theta) + Im cos(theta)`` (``theta = pi/alpha_s``), and the
  objective is ``g(x) = -sum_k log(erf(d1k/sigma_w) + erf(d2k/sigma_w))``,
  taken as +inf whenever some user's erf sum is non-positive.

Both objectives are evaluated through constant real matrices acting on the
interleaved real description ``x_r``; the builders assemble those matrices
once per problem instance.  Analytic gradients and Hessians are provided
for the interior-point solver, and the closed-form per-user SEP (exact for
QPSK, union bound otherwise) is exposed for quality-of-service checks.
"""

from dataclasses import dataclass

import numpy as np

from .model import PrecodingInstance, to_real
from .special import erf, erfc, log_norm_cdf, mills_ratio_inv, norm_cdf

TWO_OVER_SQRT_PI = 2.0 / np.sqrt(np.pi)

__all__ = [
    "QmsepData",
    "UbmsepData",
    "UbmsepDomainError",
    "build_qmsep",
    "build_ubmsep",
    "build_objective",
    "qmsep_objective",
    "ubmsep_objective",
    "objective_value",
    "qmsep_gradient",
    "ubmsep_gradient",
    "qmsep_hessian",
    "ubmsep_hessian",
    "mddt",
    "sep_qmsep",
    "sep_ubmsep_bound",
    "sep_for",
    "QmsepForm",
    "UbmsepForm",
    "make_form",
]


class UbmsepDomainError(ValueError):
    """Raised when a union-bound derivative is requested outside its domain.

    ``user_index`` identifies the first user whose erf sum is non-positive.
    """

    def __init__(self, user_index: int):
        self.user_index = int(user_index)
        super().__init__(
            f"union-bound objective not differentiable: erf sum <= 0 for user {user_index}"
        )


def _real_part_rows(C: np.ndarray) -> np.ndarray:
    """Rows r with r @ x_r = Re{C x}: interleave [Re c, -Im c] per column."""
    k, m = C.shape
    out = np.empty((k, 2 * m))
    out[:, 0::2] = C.real
    out[:, 1::2] = -C.imag
    return out


def _imag_part_rows(C: np.ndarray) -> np.ndarray:
    """Rows r with r @ x_r = Im{C x}: interleave [Im c, Re c] per column."""
    k, m = C.shape
    out = np.empty((k, 2 * m))
    out[:, 0::2] = C.imag
    out[:, 1::2] = C.real
    return out


@dataclass(frozen=True)
class QmsepData:
    """Precomputed matrices for the exact QPSK criterion.

    ``re_rows @ x_r`` and ``im_rows @ x_r`` are the per-user margins
    ``sqrt(2)/sigma_w * sign(Re s_k) * Re{h_k x}`` and the imaginary-part
    counterpart.
    """

    re_rows: np.ndarray
    im_rows: np.ndarray
    sign_re: np.ndarray
    sign_im: np.ndarray
    channel: np.ndarray
    s_values: np.ndarray
    sigma_w: float

    @property
    def n_users(self) -> int:
        return self.channel.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.channel.shape[1]

    criterion = "qmsep"


@dataclass(frozen=True)
class UbmsepData:
    """Precomputed matrices for the union-bound criterion.

    ``rotated_channel`` is ``diag(conj(s)) H``; multiplying it by ``x``
    yields the received samples rotated so every intended symbol lies on
    the positive real axis.  ``edge_rows_1 @ x_r`` and ``edge_rows_2 @ x_r``
    are the two sector-edge margins divided by ``sigma_w``.
    """

    rot_re_rows: np.ndarray
    rot_im_rows: np.ndarray
    edge_rows_1: np.ndarray
    edge_rows_2: np.ndarray
    rotated_channel: np.ndarray
    channel: np.ndarray
    s_values: np.ndarray
    sigma_w: float
    theta: float

    @property
    def n_users(self) -> int:
        return self.channel.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.channel.shape[1]

    criterion = "ubmsep"


def build_qmsep(instance: PrecodingInstance) -> QmsepData:
    """Assemble the exact-QPSK objective data; requires ``alpha_s == 4``."""
    if instance.alpha_s != 4:
        raise ValueError(
            f"the exact criterion is defined for QPSK data only (alpha_s=4), "
            f"got alpha_s={instance.alpha_s}"
        )
    s_vals = instance.s_values
    sign_re = np.sign(s_vals.real)
    sign_im = np.sign(s_vals.imag)
    scale = np.sqrt(2.0) / instance.sigma_w
    re_rows = scale * sign_re[:, None] * _real_part_rows(instance.H)
    im_rows = scale * sign_im[:, None] * _imag_part_rows(instance.H)
    return QmsepData(
        re_rows=re_rows,
        im_rows=im_rows,
        sign_re=sign_re,
        sign_im=sign_im,
        channel=instance.H,
        s_values=s_vals,
        sigma_w=instance.sigma_w,
    )


def build_ubmsep(instance: PrecodingInstance) -> UbmsepData:
    """Assemble the union-bound objective data for any PSK order."""
    theta = np.pi / instance.alpha_s
    s_vals = instance.s_values
    rotated = np.conj(s_vals)[:, None] * instance.H
    rot_re = (np.sin(theta) / instance.sigma_w) * _real_part_rows(rotated)
    rot_im = (np.cos(theta) / instance.sigma_w) * _imag_part_rows(rotated)
    return UbmsepData(
        rot_re_rows=rot_re,
        rot_im_rows=rot_im,
        edge_rows_1=rot_re - rot_im,
        edge_rows_2=rot_re + rot_im,
        rotated_channel=rotated,
        channel=instance.H,
        s_values=s_vals,
        sigma_w=instance.sigma_w,
        theta=theta,
    )


def build_objective(instance: PrecodingInstance, criterion: str):
    if criterion == "qmsep":
        return build_qmsep(instance)
    if criterion == "ubmsep":
        return build_ubmsep(instance)
    raise ValueError(f"unknown criterion {criterion!r}")


def qmsep_objective(data: QmsepData, x_r):
    """Negative log-probability of all users detecting correctly.

    ``x_r`` may carry leading batch dimensions; the result is a scalar for
    a single vector and an array for a batch.  Always finite.
    """
    x_r = np.asarray(x_r, dtype=float)
    m_re = x_r @ data.re_rows.T
    m_im = x_r @ data.im_rows.T
    val = -(log_norm_cdf(m_re).sum(axis=-1) + log_norm_cdf(m_im).sum(axis=-1))
    return float(val) if x_r.ndim == 1 else val


def ubmsep_objective(data: UbmsepData, x_r):
    """Union-bound objective; +inf where some user's erf sum is <= 0."""
    x_r = np.asarray(x_r, dtype=float)
    q = erf(x_r @ data.edge_rows_1.T) + erf(x_r @ data.edge_rows_2.T)
    bad = np.any(q <= 0.0, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = -np.sum(np.log(np.where(q > 0.0, q, 1.0)), axis=-1)
    val = np.where(bad, np.inf, val)
    return float(val) if x_r.ndim == 1 else val


def objective_value(data, x_r):
    """Criterion-agnostic objective evaluation."""
    if data.criterion == "qmsep":
        return qmsep_objective(data, x_r)
    return ubmsep_objective(data, x_r)


def qmsep_gradient(data: QmsepData, x_r) -> np.ndarray:
    x_r = np.asarray(x_r, dtype=float)
    r_re = mills_ratio_inv(data.re_rows @ x_r)
    r_im = mills_ratio_inv(data.im_rows @ x_r)
    return -(data.re_rows.T @ r_re + data.im_rows.T @ r_im)


def qmsep_hessian(data: QmsepData, x_r) -> np.ndarray:
    """Analytic Hessian; positive semi-definite everywhere."""
    x_r = np.asarray(x_r, dtype=float)
    m_re = data.re_rows @ x_r
    m_im = data.im_rows @ x_r
    r_re = mills_ratio_inv(m_re)
    r_im = mills_ratio_inv(m_im)
    # curvature of -log Phi(m) is r*(m + r) with r = pdf/CDF, nonnegative
    c_re = r_re * (m_re + r_re)
    c_im = r_im * (m_im + r_im)
    hess = (data.re_rows * c_re[:, None]).T @ data.re_rows
    hess += (data.im_rows * c_im[:, None]).T @ data.im_rows
    return _symmetrize(hess)


def _ubmsep_parts(data: UbmsepData, x_r):
    m1 = data.edge_rows_1 @ x_r
    m2 = data.edge_rows_2 @ x_r
    q = erf(m1) + erf(m2)
    bad = np.nonzero(q <= 0.0)[0]
    if bad.size:
        raise UbmsepDomainError(bad[0])
    e1 = TWO_OVER_SQRT_PI * np.exp(-m1 * m1)
    e2 = TWO_OVER_SQRT_PI * np.exp(-m2 * m2)
    return m1, m2, q, e1, e2


def ubmsep_gradient(data: UbmsepData, x_r) -> np.ndarray:
    x_r = np.asarray(x_r, dtype=float)
    _, _, q, e1, e2 = _ubmsep_parts(data, x_r)
    p_rows = e1[:, None] * data.edge_rows_1 + e2[:, None] * data.edge_rows_2
    return -(p_rows.T @ (1.0 / q))


def ubmsep_hessian(data: UbmsepData, x_r) -> np.ndarray:
    """Analytic Hessian; PSD on the region where both edge margins are >= 0."""
    x_r = np.asarray(x_r, dtype=float)
    m1, m2, q, e1, e2 = _ubmsep_parts(data, x_r)
    p_rows = e1[:, None] * data.edge_rows_1 + e2[:, None] * data.edge_rows_2
    hess = (p_rows * (1.0 / (q * q))[:, None]).T @ p_rows
    w1 = 2.0 * e1 * m1 / q
    w2 = 2.0 * e2 * m2 / q
    hess += (data.edge_rows_1 * w1[:, None]).T @ data.edge_rows_1
    hess += (data.edge_rows_2 * w2[:, None]).T @ data.edge_rows_2
    return _symmetrize(hess)


def _symmetrize(h: np.ndarray) -> np.ndarray:
    upper = np.triu(h)
    return upper + np.triu(h, 1).T


def mddt(data: UbmsepData, x):
    """Per-user signed distances to the two decision-sector edges.

    Returned in natural (unscaled) units; dividing by ``sigma_w`` recovers
    the margins produced by the edge row matrices.
    """
    x = np.asarray(x, dtype=complex)
    w = data.rotated_channel @ x
    sin_t, cos_t = np.sin(data.theta), np.cos(data.theta)
    d1 = w.real * sin_t - w.imag * cos_t
    d2 = w.real * sin_t + w.imag * cos_t
    return d1, d2


def sep_qmsep(data: QmsepData, x) -> np.ndarray:
    """Exact per-user symbol error probability under QPSK data and AWGN."""
    x_r = to_real(np.asarray(x, dtype=complex))
    m_re = data.re_rows @ x_r
    m_im = data.im_rows @ x_r
    return 1.0 - norm_cdf(m_re) * norm_cdf(m_im)


def sep_ubmsep_bound(data: UbmsepData, x, clip: bool = True) -> np.ndarray:
    """Union-bound per-user symbol error probability.

    The raw two-edge sum lies in [0, 2]; by default it is clipped to [0, 1]
    for use against QoS targets.  Pass ``clip=False`` for the raw value.
    """
    x_r = to_real(np.asarray(x, dtype=complex))
    pe = 0.5 * (erfc(data.edge_rows_1 @ x_r) + erfc(data.edge_rows_2 @ x_r))
    return np.minimum(pe, 1.0) if clip else pe


def sep_for(data, x) -> np.ndarray:
    """Per-user SEP under the criterion the data was built for."""
    if data.criterion == "qmsep":
        return sep_qmsep(data, x)
    return sep_ubmsep_bound(data, x)


class QmsepForm:
    """Exact-criterion objective restricted to the trailing free coordinates.

    With a fixed real prefix ``prefix_r`` of length ``2p`` the margins become
    ``W v + offset`` where ``W`` holds the trailing columns of the row
    matrices; value/gradient/Hessian are taken with respect to ``v``.
    """

    criterion = "qmsep"
    has_margin_constraints = False

    def __init__(self, data: QmsepData, prefix_r=None):
        prefix_r = np.zeros(0) if prefix_r is None else np.asarray(prefix_r, dtype=float)
        n_fixed = prefix_r.shape[0]
        self.n_free = 2 * data.n_antennas - n_fixed
        self.w_re = data.re_rows[:, n_fixed:]
        self.w_im = data.im_rows[:, n_fixed:]
        self.off_re = data.re_rows[:, :n_fixed] @ prefix_r
        self.off_im = data.im_rows[:, :n_fixed] @ prefix_r

    def value(self, v):
        m_re = self.w_re @ v + self.off_re
        m_im = self.w_im @ v + self.off_im
        return float(-(log_norm_cdf(m_re).sum() + log_norm_cdf(m_im).sum()))

    def gradient(self, v):
        r_re = mills_ratio_inv(self.w_re @ v + self.off_re)
        r_im = mills_ratio_inv(self.w_im @ v + self.off_im)
        return -(self.w_re.T @ r_re + self.w_im.T @ r_im)

    def hessian(self, v):
        m_re = self.w_re @ v + self.off_re
        m_im = self.w_im @ v + self.off_im
        r_re = mills_ratio_inv(m_re)
        r_im = mills_ratio_inv(m_im)
        c_re = r_re * (m_re + r_re)
        c_im = r_im * (m_im + r_im)
        hess = (self.w_re * c_re[:, None]).T @ self.w_re
        hess += (self.w_im * c_im[:, None]).T @ self.w_im
        return _symmetrize(hess)

    def strictly_feasible_start(self, v):
        return True


class UbmsepForm:
    """Union-bound objective over the trailing free coordinates.

    Also exposes the nonnegative-margin rows that make the objective convex:
    the feasible region adds ``margin_rows @ v + margin_offsets >= 0``.
    """

    criterion = "ubmsep"
    has_margin_constraints = True

    def __init__(self, data: UbmsepData, prefix_r=None):
        prefix_r = np.zeros(0) if prefix_r is None else np.asarray(prefix_r, dtype=float)
        n_fixed = prefix_r.shape[0]
        self.n_free = 2 * data.n_antennas - n_fixed
        self.w1 = data.edge_rows_1[:, n_fixed:]
        self.w2 = data.edge_rows_2[:, n_fixed:]
        self.off1 = data.edge_rows_1[:, :n_fixed] @ prefix_r
        self.off2 = data.edge_rows_2[:, :n_fixed] @ prefix_r

    @property
    def margin_rows(self) -> np.ndarray:
        return np.vstack([self.w1, self.w2])

    @property
    def margin_offsets(self) -> np.ndarray:
        return np.concatenate([self.off1, self.off2])

    def _parts(self, v):
        m1 = self.w1 @ v + self.off1
        m2 = self.w2 @ v + self.off2
        q = erf(m1) + erf(m2)
        bad = np.nonzero(q <= 0.0)[0]
        if bad.size:
            raise UbmsepDomainError(bad[0])
        return m1, m2, q

    def value(self, v):
        m1 = self.w1 @ v + self.off1
        m2 = self.w2 @ v + self.off2
        q = erf(m1) + erf(m2)
        if np.any(q <= 0.0):
            return np.inf
        return float(-np.log(q).sum())

    def gradient(self, v):
        m1, m2, q = self._parts(v)
        e1 = TWO_OVER_SQRT_PI * np.exp(-m1 * m1)
        e2 = TWO_OVER_SQRT_PI * np.exp(-m2 * m2)
        p_rows = e1[:, None] * self.w1 + e2[:, None] * self.w2
        return -(p_rows.T @ (1.0 / q))

    def hessian(self, v):
        m1, m2, q = self._parts(v)
        e1 = TWO_OVER_SQRT_PI * np.exp(-m1 * m1)
        e2 = TWO_OVER_SQRT_PI * np.exp(-m2 * m2)
        p_rows = e1[:, None] * self.w1 + e2[:, None] * self.w2
        hess = (p_rows * (1.0 / (q * q))[:, None]).T @ p_rows
        hess += (self.w1 * (2.0 * e1 * m1 / q)[:, None]).T @ self.w1
        hess += (self.w2 * (2.0 * e2 * m2 / q)[:, None]).T @ self.w2
        return _symmetrize(hess)

    def strictly_feasible_start(self, v):
        m1 = self.w1 @ v + self.off1
        m2 = self.w2 @ v + self.off2
        return bool(np.all(m1 > 0.0) and np.all(m2 > 0.0))


def make_form(data, prefix_r=None):
    """Objective form over the free coordinates after an optional fixed prefix."""
    if data.criterion == "qmsep":
        return QmsepForm(data, prefix_r)
    return UbmsepForm(data, prefix_r)
