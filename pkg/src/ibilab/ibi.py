"""Exact inter-block interference energy and its prolate upper bound.

For a delay-only channel the interference that block ``j`` leaks into the
matched-filter output of block ``l`` is ``P^H H_{l,j} P``.  Because each
single-path delay operator is Toeplitz, its ``(r, s)`` entry is a sinc-weighted
sum over the cross-correlation ``c_rs`` of the two waveforms, and the
expected IBI energy of waveform ``r`` is the quadratic form
``sum_s c_rs^H G c_rs`` with a real kernel ``G`` that depends only on the
channel and the frame layout.  The bound has the same shape with a kernel
built from prolate eigenvalues.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import DomainError
from .basis import Domain, FrameLayout, SignalingBasis, build_basis, DEFAULT_PS_HALF_BANDWIDTH
from .channel import ChannelSpec, delay_matrix, sinc
from .prolate import generate_dpss

log = logging.getLogger(__name__)

# Shift operators run at the full normalized band.
OPERATOR_HALF_BANDWIDTH = 0.5


@dataclass(frozen=True)
class CrossCorrelation:
    """``values[q + N - 1] = sum_n conj(p_r[n]) p_s[n - q]`` for ``|q| < N``."""

    values: np.ndarray
    row_index: int = 0
    col_index: int = 0

    @property
    def half_width(self) -> int:
        return (self.values.size - 1) // 2

    def at(self, q: int) -> complex:
        return self.values[q + self.half_width]


@dataclass
class IbiReport:
    per_waveform_energy: np.ndarray
    domain: str
    utilization: float
    channel_id: str
    layout: FrameLayout
    seed: int | None = None
    bound_energy: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def total_energy(self) -> float:
        return float(np.sum(self.per_waveform_energy))

    @property
    def used_dims(self) -> int:
        return int(self.per_waveform_energy.size)

    @property
    def s2ibi_db(self) -> float:
        return _to_db(np.mean(self.per_waveform_energy))

    @property
    def s2ibi_lower_bound_db(self) -> float | None:
        if self.bound_energy is None:
            return None
        return _to_db(self.bound_energy / self.used_dims)


def _to_db(energy) -> float:
    energy = float(energy)
    if energy <= 0:
        return float("inf")
    return -10.0 * np.log10(energy)


def cross_correlation(p_r, p_s, row_index: int = 0, col_index: int = 0) -> CrossCorrelation:
    p_r = np.asarray(p_r)
    p_s = np.asarray(p_s)
    if p_r.shape != p_s.shape or p_r.ndim != 1:
        raise DomainError(f"waveform shapes differ: {p_r.shape} vs {p_s.shape}")
    values = np.convolve(np.conj(p_r), p_s[::-1])
    return CrossCorrelation(values, row_index, col_index)


def cross_correlation_tensor(P: np.ndarray, rows=None) -> np.ndarray:
    """All-pairs cross-correlations, shape ``(2N - 1, len(rows), M)``.

    Entry ``[q + N - 1, i, s]`` is ``c_{rows[i], s}[q]``.
    """
    n, m = P.shape
    k = 2 * n - 1
    if rows is None:
        rows = np.arange(m)
    F = np.fft.fft(P, n=k, axis=0)
    a = np.fft.ifft(np.conj(F[:, rows])[:, :, None] * F[:, None, :], axis=0)
    # a[q] = sum_n conj(p_r[n]) p_s[n + q]; c_rs[q] = a[-q].
    lags = np.arange(-(n - 1), n)
    return a[(-lags) % k]


def bandlimited_shift(seq, shift: float, window: int,
                      half_bandwidth: float = OPERATOR_HALF_BANDWIDTH) -> np.ndarray:
    """Band-limited fractional shift sampled on ``[-window, window]``.

    ``seq`` is centered (odd length, middle sample at index 0). The output is
    ``out[k] = sum_q seq[q] sinc(2W (q - shift - k))``, which at ``W = 0.5`` is
    the plain sinc interpolation sum.
    """
    seq = np.asarray(seq)
    if seq.ndim != 1 or seq.size % 2 == 0:
        raise DomainError("seq must be a 1-D centered sequence of odd length")
    if window < 1:
        raise DomainError(f"window must be >= 1, got {window}")
    half = (seq.size - 1) // 2
    q = np.arange(-half, half + 1)
    k = np.arange(-window, window + 1)
    kernel = sinc(2 * half_bandwidth * (q[None, :] - shift - k[:, None]))
    return kernel @ seq


class TailEnergy(NamedTuple):
    energy: float
    truncation: float


def tail_energy(seq, inner_half_width: int) -> TailEnergy:
    """Energy of a centered sequence outside ``[-N_t, N_t]``.

    ``truncation`` is the larger end-sample energy ``|seq[+-T]|^2``, a cue that
    the window was too short to capture the tail.
    """
    seq = np.asarray(seq)
    half = (seq.size - 1) // 2
    if not (0 <= inner_half_width < half):
        raise DomainError(f"inner half-width {inner_half_width} must be below window {half}")
    k = np.arange(-half, half + 1)
    power = np.abs(seq) ** 2
    return TailEnergy(float(power[np.abs(k) > inner_half_width].sum()),
                      float(max(power[0], power[-1])))


def interference_kernel(spec: ChannelSpec, layout: FrameLayout, victim: int | None = None,
                        fractional_only: bool = False) -> np.ndarray:
    """Real ``(2N-1) x (2N-1)`` kernel ``G`` with ``E_r = sum_s c_rs^H G c_rs``.

    Sums ``|h_p|^2 k k^T`` over paths and interfering blocks ``j != victim``,
    with ``k[q] = sinc(q - tau_p - (j - victim) * stride)``.
    """
    n = layout.block_length
    if victim is None:
        victim = layout.num_blocks // 2
    offsets = np.array([j - victim for j in range(layout.num_blocks) if j != victim])
    if offsets.size == 0:
        return np.zeros((2 * n - 1, 2 * n - 1))
    lags = np.arange(-(n - 1), n)
    G = np.zeros((lags.size, lags.size))
    for p in spec.paths:
        if fractional_only and not p.is_fractional:
            continue
        weight = abs(p.gain) ** 2
        cols = sinc(lags[:, None] - p.delay - offsets[None, :] * layout.stride)
        G += weight * (cols @ cols.T)
    return G


def _quadratic_rows(P: np.ndarray, kernel: np.ndarray, cols: int | None = None,
                    chunk: int = 16) -> np.ndarray:
    """``out[r] = sum_{s < cols} c_rs^H kernel c_rs`` for every column ``r < cols``."""
    m = P.shape[1] if cols is None else cols
    P = P[:, :m]
    out = np.empty(m)
    for start in range(0, m, chunk):
        rows = np.arange(start, min(start + chunk, m))
        C = cross_correlation_tensor(P, rows).reshape(kernel.shape[0], -1)
        v = np.einsum("ij,ij->j", C.conj(), kernel @ C).real
        out[rows] = v.reshape(rows.size, m).sum(axis=1)
    return out


def _check_consistent(basis: SignalingBasis, layout: FrameLayout):
    if basis.block_length != layout.block_length:
        raise DomainError(f"basis block length {basis.block_length} != layout {layout.block_length}")
    if layout.guard_mode != "zp":
        raise DomainError("IBI analysis assumes zero-prefix guards")


def ibi_energy_exact(basis: SignalingBasis, layout: FrameLayout, spec: ChannelSpec,
                     victim: int | None = None, kernel: np.ndarray | None = None) -> IbiReport:
    """Expected IBI energy per used waveform for unit-variance i.i.d. symbols.

    Path gains are treated as uncorrelated, so single-path contributions add
    in power. The victim defaults to the center block of the frame.
    """
    _check_consistent(basis, layout)
    if not spec.delay_only:
        raise DomainError("exact IBI is defined for delay-only channels")
    if kernel is None:
        kernel = interference_kernel(spec, layout, victim)
    energy = _quadratic_rows(basis.matrix, kernel)
    return IbiReport(energy, basis.domain.value, basis.utilization, spec.name, layout, spec.seed,
                     diagnostics={"victim": layout.num_blocks // 2 if victim is None else victim,
                                  "signal_reference": "unit symbol energy, mean over used waveforms"})


def ibi_energy_direct(basis: SignalingBasis, layout: FrameLayout, spec: ChannelSpec,
                      victim: int | None = None) -> np.ndarray:
    """Per-waveform IBI energy from explicit full-frame delay matrices (small frames only)."""
    _check_consistent(basis, layout)
    if victim is None:
        victim = layout.num_blocks // 2
    P = basis.matrix
    n = layout.block_length
    rows = slice(layout.block_start(victim), layout.block_start(victim) + n)
    energy = np.zeros(basis.used_dims)
    for p in spec.paths:
        H = delay_matrix(layout.total_length, p.delay)
        for j in range(layout.num_blocks):
            if j == victim:
                continue
            cols = slice(layout.block_start(j), layout.block_start(j) + n)
            lam = P.conj().T @ H[rows, cols] @ P
            energy += abs(p.gain) ** 2 * np.sum(np.abs(lam) ** 2, axis=1)
    return energy


def truncation_check(basis: SignalingBasis, layout: FrameLayout, spec: ChannelSpec,
                     extra_blocks: int = 4) -> float:
    """S2IBI change (dB) when the frame grows by ``extra_blocks``."""
    base = ibi_energy_exact(basis, layout, spec).s2ibi_db
    bigger = FrameLayout(layout.num_blocks + extra_blocks, layout.block_length,
                         layout.guard_length, layout.guard_mode)
    return abs(ibi_energy_exact(basis, bigger, spec).s2ibi_db - base)


@lru_cache(maxsize=64)
def _prolate_bound_kernel(guarded_half_width: int, block_length: int,
                          operator_half_bandwidth: float) -> np.ndarray:
    """``S_e diag(lam (1 - lam)) S_e^T / W^2`` over even-index DPSS samples."""
    np_ = guarded_half_width
    length = 4 * np_ + 1
    dpss = generate_dpss(length, 0.5 * operator_half_bandwidth, length)
    lam = dpss.eigenvalues
    n = block_length
    lags = np.arange(-(n - 1), n)
    # Centered sample 2q of a length-(4N_p+1) sequence; lags beyond 2N_p fall off the support.
    idx = 2 * np_ + 2 * lags
    valid = (idx >= 0) & (idx < length)
    S_even = np.zeros((lags.size, length))
    S_even[valid] = dpss.sequences[idx[valid]]
    weights = lam * (1.0 - lam)
    return (S_even * weights) @ S_even.T / operator_half_bandwidth**2


def bound_kernel(spec: ChannelSpec, layout: FrameLayout,
                 operator_half_bandwidth: float = OPERATOR_HALF_BANDWIDTH) -> np.ndarray:
    n = layout.block_length
    K = np.zeros((2 * n - 1, 2 * n - 1))
    for p in spec.paths:
        if not p.is_fractional:
            continue
        # Tail boundary sits one sample inside the guarded stride so that the
        # nearest leaked sample (lag stride - floor(tau)) is part of the tail.
        np_ = (n - 1) + layout.guard_length - int(np.floor(p.delay))
        if np_ < n - 1:
            raise DomainError(f"integer part of delay {p.delay} exceeds the guard {layout.guard_length}")
        K += abs(p.gain) ** 2 * _prolate_bound_kernel(np_, n, float(operator_half_bandwidth))
    return K


def ibi_bound(basis: SignalingBasis, layout: FrameLayout, spec: ChannelSpec,
              subset_size: int | None = None, kernel: np.ndarray | None = None) -> float:
    """Prolate upper bound on the total IBI energy of the first ``subset_size`` waveforms.

    Integer-delay paths are skipped; a channel with no fractional path
    yields 0 (the bound is vacuous and logged).
    """
    _check_consistent(basis, layout)
    m = basis.used_dims if subset_size is None else subset_size
    if not (1 <= m <= basis.used_dims):
        raise DomainError(f"subset_size must lie in [1, {basis.used_dims}], got {subset_size}")
    if not any(p.is_fractional for p in spec.paths):
        log.info("channel %s has no fractional paths; IBI bound is 0", spec.name)
        return 0.0
    if kernel is None:
        kernel = bound_kernel(spec, layout)
    return float(_quadratic_rows(basis.matrix, kernel, cols=m).sum())


def s2ibi_sweep(domains, utilizations, spec: ChannelSpec, layout: FrameLayout,
                with_bound: bool = True, ps_half_bandwidth: float = DEFAULT_PS_HALF_BANDWIDTH,
                threads: int = 1) -> list[IbiReport]:
    """One report per ``(domain, eta)`` cell, in that nested order."""
    G = interference_kernel(spec, layout)
    B = bound_kernel(spec, layout) if with_bound else None
    fractional = any(p.is_fractional for p in spec.paths)
    cells = [(Domain(d), float(eta)) for d in domains for eta in utilizations]

    def run(cell):
        domain, eta = cell
        basis = build_basis(domain, layout.block_length, eta, ps_half_bandwidth)
        report = ibi_energy_exact(basis, layout, spec, kernel=G)
        report.diagnostics["requested_utilization"] = eta
        if domain is Domain.PS:
            report.diagnostics["ps_half_bandwidth"] = ps_half_bandwidth
        if with_bound:
            report.bound_energy = ibi_bound(basis, layout, spec, kernel=B) if fractional else 0.0
        return report

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run, cells))
    return [run(c) for c in cells]


def half_shift_conjecture(basis: SignalingBasis, inner_half_width: int,
                          shifts=(0.1, 0.2, 0.3, 0.4), window: int | None = None,
                          max_pairs: int | None = None) -> dict:
    """Compare tail energies of shifted cross-correlations against the half-sample shift.

    Returns the tail energies per shift (summed over waveform pairs) and the
    list of pairs where some shift beat 0.5. Violations are logged, not raised.
    """
    n = basis.block_length
    if window is None:
        window = 4 * n
    P = basis.matrix
    m = basis.used_dims
    pairs = [(r, s) for r in range(m) for s in range(m)]
    if max_pairs is not None:
        pairs = pairs[:max_pairs]
    all_shifts = tuple(shifts) + (0.5,)
    totals = {t: 0.0 for t in all_shifts}
    violations = []
    for r, s in pairs:
        c = cross_correlation(P[:, r], P[:, s], r, s).values
        tails = {t: tail_energy(bandlimited_shift(c, t, window), inner_half_width).energy
                 for t in all_shifts}
        for t in all_shifts:
            totals[t] += tails[t]
        worst = max(tails[t] for t in shifts)
        if worst > tails[0.5] * (1 + 1e-9) + 1e-30:
            violations.append((r, s))
    if violations:
        log.warning("half-shift conjecture violated for %d of %d pairs", len(violations), len(pairs))
    return {"tail_energy": totals, "violations": violations, "pairs": len(pairs)}
