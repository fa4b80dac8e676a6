"""Monte-Carlo BER of guarded block transmission with a per-block LMMSE receiver."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, stats

from . import DomainError, NumericalError
from .basis import (DEFAULT_PS_HALF_BANDWIDTH, Domain, FrameLayout, SignalingBasis,
                    assemble_frame, build_basis)
from .channel import ChannelSpec, apply_channel, channel_matrix, impulse_response, redraw_phases

DEFAULT_SNR_GRID = tuple(float(s) for s in range(0, 40, 5))


def qpsk_map(bits) -> np.ndarray:
    """Gray QPSK, ``(b0, b1) -> ((1 - 2 b0) + 1j (1 - 2 b1)) / sqrt(2)``."""
    bits = np.asarray(bits, dtype=np.int8)
    if bits.size % 2:
        raise DomainError(f"QPSK needs an even number of bits, got {bits.size}")
    pairs = bits.reshape(-1, 2)
    return ((1 - 2 * pairs[:, 0]) + 1j * (1 - 2 * pairs[:, 1])) / np.sqrt(2)


def qpsk_demap(symbols) -> np.ndarray:
    symbols = np.asarray(symbols)
    bits = np.empty((symbols.size, 2), dtype=np.int8)
    bits[:, 0] = symbols.real.ravel() < 0
    bits[:, 1] = symbols.imag.ravel() < 0
    return bits.ravel()


def noise_variance(snr_db: float) -> float:
    return 10.0 ** (-snr_db / 10.0)


def awgn(signal, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Add circular complex Gaussian noise of variance ``10**(-snr_db/10)`` per sample."""
    signal = np.asarray(signal, dtype=complex)
    sigma = np.sqrt(noise_variance(snr_db) / 2.0)
    noise = rng.standard_normal(signal.shape) + 1j * rng.standard_normal(signal.shape)
    return signal + sigma * noise


def lmmse_equalize(block_channel, observation, noise_var: float) -> np.ndarray:
    """``(H^H H + noise_var I)^{-1} H^H z``; columns of ``observation`` are solved together.

    With ``noise_var == 0`` this is the zero-forcing (least-squares) solution
    and a rank-deficient ``H`` raises :class:`NumericalError`.
    """
    if noise_var < 0:
        raise DomainError(f"noise_var must be >= 0, got {noise_var}")
    H = np.asarray(block_channel)
    gram = H.conj().T @ H
    rhs = H.conj().T @ np.asarray(observation)
    if noise_var > 0:
        gram = gram + noise_var * np.eye(gram.shape[0])
    try:
        cho = linalg.cho_factor(gram, check_finite=False)
        return linalg.cho_solve(cho, rhs, check_finite=False)
    except linalg.LinAlgError as exc:
        if noise_var > 0:
            return linalg.solve(gram, rhs, assume_a="her")
        raise NumericalError(f"zero-forcing system is singular: {exc}") from exc


@dataclass(frozen=True)
class SimConfig:
    domain: Domain
    utilization: float
    channel: ChannelSpec
    layout: FrameLayout = field(default_factory=FrameLayout)
    snr_grid_db: tuple = DEFAULT_SNR_GRID
    num_frames: int = 100
    seed: int = 0
    equalizer: str = "LMMSE"
    redraw_channel: bool = True
    ps_half_bandwidth: float = DEFAULT_PS_HALF_BANDWIDTH

    def __post_init__(self):
        if not self.snr_grid_db:
            raise DomainError("SNR grid must not be empty")
        if self.num_frames < 1:
            raise DomainError("num_frames must be >= 1")
        if self.equalizer != "LMMSE":
            raise DomainError(f"unsupported equalizer {self.equalizer!r}")


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    error_count: int
    bit_count: int

    @property
    def ber(self) -> float:
        return self.error_count / self.bit_count

    def wilson_interval(self, confidence: float = 0.95) -> tuple[float, float]:
        ci = stats.binomtest(self.error_count, self.bit_count).proportion_ci(confidence, "wilson")
        return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class BerCurve:
    points: tuple
    domain: str
    utilization: float
    channel_id: str
    seed: int
    used_dims: int

    def ber_at(self, snr_db: float) -> float:
        for p in self.points:
            if abs(p.snr_db - snr_db) < 1e-9:
                return p.ber
        raise KeyError(snr_db)


def diagonal_block(spec: ChannelSpec, layout: FrameLayout, block_index: int) -> np.ndarray:
    """``H_{l,l}``: rows and columns of the full-frame channel restricted to block ``l``."""
    n = layout.block_length
    start = layout.block_start(block_index)
    if spec.delay_only:
        lags = np.arange(-(n - 1), n)
        g = impulse_response(spec, lags)
        idx = np.arange(n)[:, None] - np.arange(n)[None, :] + (n - 1)
        return g[idx]
    # Doppler makes the block depend on its absolute position in the frame.
    H = channel_matrix(spec, layout.total_length)
    return H[start : start + n, start : start + n]


def _transmit_scale(basis: SignalingBasis) -> float:
    # Unit average energy per block sample with unit-energy symbols.
    return np.sqrt(basis.block_length / basis.used_dims)


def _frame_errors(config: SimConfig, basis: SignalingBasis, rng: np.random.Generator):
    layout = config.layout
    m, n, L = basis.used_dims, basis.block_length, layout.num_blocks
    spec = redraw_phases(config.channel, rng) if config.redraw_channel else config.channel
    bits = rng.integers(0, 2, size=2 * m * L, dtype=np.int8)
    symbols = qpsk_map(bits).reshape(L, m)
    scale = _transmit_scale(basis)
    blocks = [scale * (basis.matrix @ d) for d in symbols]
    received = apply_channel(spec, assemble_frame(layout, blocks))

    starts = np.array([layout.block_start(l) for l in range(L)])
    window = starts[:, None] + np.arange(n)[None, :]
    P = basis.matrix
    if spec.delay_only:
        h_eq = [scale * (P.conj().T @ diagonal_block(spec, layout, 0) @ P)] * L
    else:
        h_eq = [scale * (P.conj().T @ diagonal_block(spec, layout, l) @ P) for l in range(L)]

    errors = []
    for snr in config.snr_grid_db:
        var = noise_variance(snr)
        y = awgn(received, snr, rng)
        z = P.conj().T @ y[window].T  # (m, L)
        if spec.delay_only:
            est = lmmse_equalize(h_eq[0], z, var).T
        else:
            est = np.stack([lmmse_equalize(h_eq[l], z[:, l], var) for l in range(L)])
        errors.append(int(np.count_nonzero(qpsk_demap(est.ravel()) != bits)))
    return np.array(errors, dtype=np.int64)


def run_ber(config: SimConfig, threads: int = 1) -> BerCurve:
    """Monte-Carlo BER over ``config.num_frames`` independent frames.

    Each frame draws its own channel phases, bits and noise from a child of
    ``SeedSequence(config.seed)``, so the curve does not depend on ``threads``.
    """
    basis = build_basis(config.domain, config.layout.block_length, config.utilization,
                        config.ps_half_bandwidth)
    children = np.random.SeedSequence(config.seed).spawn(config.num_frames)

    def one(ss):
        return _frame_errors(config, basis, np.random.default_rng(ss))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_frame = list(pool.map(one, children))
    else:
        per_frame = [one(ss) for ss in children]
    errors = np.sum(per_frame, axis=0)
    bits_per_point = 2 * basis.used_dims * config.layout.num_blocks * config.num_frames
    points = tuple(BerPoint(float(s), int(e), bits_per_point)
                   for s, e in zip(config.snr_grid_db, errors))
    return BerCurve(points, Domain(config.domain).value, basis.utilization, config.channel.name,
                    config.seed, basis.used_dims)
