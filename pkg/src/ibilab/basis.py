"""Orthonormal signaling bases and guarded frame layout."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import DomainError
from .prolate import generate_dpss

# Design half-bandwidth of the prolate basis. Sequences are ranked by
# concentration in [-W, W]; nulling the tail of the ranking removes the
# near-Nyquist dimensions that fractional delays smear across blocks.
DEFAULT_PS_HALF_BANDWIDTH = 0.48


class Domain(str, enum.Enum):
    TD = "TD"
    FD = "FD"
    PS = "PS"


@dataclass(frozen=True)
class SignalingBasis:
    domain: Domain
    block_length: int
    used_dims: int
    matrix: np.ndarray
    ps_half_bandwidth: float | None = None

    @property
    def utilization(self) -> float:
        return self.used_dims / self.block_length


@dataclass(frozen=True)
class FrameLayout:
    num_blocks: int = 21
    block_length: int = 129
    guard_length: int = 16
    guard_mode: str = "zp"

    def __post_init__(self):
        if self.num_blocks < 1 or self.block_length < 1 or self.guard_length < 0:
            raise DomainError(f"invalid frame layout {self}")
        if self.guard_mode not in ("zp", "cp"):
            raise DomainError(f"guard_mode must be 'zp' or 'cp', got {self.guard_mode!r}")
        if self.guard_mode == "cp" and self.guard_length > self.block_length:
            raise DomainError("cyclic prefix longer than the block")

    @property
    def stride(self) -> int:
        return self.block_length + self.guard_length

    @property
    def total_length(self) -> int:
        return self.num_blocks * self.stride

    def block_start(self, index: int) -> int:
        return index * self.stride + self.guard_length


def used_dimensions(block_length: int, utilization: float) -> int:
    if not (0 < utilization <= 1):
        raise DomainError(f"utilization must lie in (0, 1], got {utilization}")
    return max(1, int(round(utilization * block_length)))


def _centered_frequencies(n: int) -> np.ndarray:
    return np.rint(np.fft.fftshift(np.fft.fftfreq(n)) * n).astype(int)


def build_basis(domain, block_length: int, utilization: float,
                ps_half_bandwidth: float = DEFAULT_PS_HALF_BANDWIDTH) -> SignalingBasis:
    """Build the ``N x M`` modulation matrix for ``domain``, ``M = round(eta * N)``.

    TD keeps the first ``M`` unit impulses. FD keeps the first ``M`` unitary
    DFT columns in ascending signed-frequency order, so the nulled columns
    are the highest positive frequencies. PS keeps the ``M`` most concentrated
    DPSS of length ``N`` and half-bandwidth ``ps_half_bandwidth``.
    """
    domain = Domain(domain)
    if block_length < 2:
        raise DomainError(f"block_length must be >= 2, got {block_length}")
    n = block_length
    m = used_dimensions(n, utilization)
    if domain is Domain.TD:
        mat = np.eye(n, m, dtype=complex)
        return SignalingBasis(domain, n, m, mat)
    if domain is Domain.FD:
        freqs = _centered_frequencies(n)[:m]
        mat = np.exp(2j * np.pi * np.outer(np.arange(n), freqs) / n) / np.sqrt(n)
        return SignalingBasis(domain, n, m, mat)
    dpss = generate_dpss(n, ps_half_bandwidth, m)
    return SignalingBasis(domain, n, m, dpss.sequences.astype(complex), float(ps_half_bandwidth))


def modulate(basis: SignalingBasis, symbols) -> np.ndarray:
    symbols = np.asarray(symbols)
    if symbols.shape[0] != basis.used_dims:
        raise DomainError(f"expected {basis.used_dims} symbols, got {symbols.shape[0]}")
    return basis.matrix @ symbols


def demodulate(basis: SignalingBasis, received_block) -> np.ndarray:
    received_block = np.asarray(received_block)
    if received_block.shape[0] != basis.block_length:
        raise DomainError(f"expected a block of {basis.block_length} samples, got {received_block.shape[0]}")
    return basis.matrix.conj().T @ received_block


def assemble_frame(layout: FrameLayout, blocks) -> np.ndarray:
    """Concatenate ``[g, b_0, g, b_1, ...]`` where ``g`` is a zero or cyclic prefix."""
    if len(blocks) != layout.num_blocks:
        raise DomainError(f"expected {layout.num_blocks} blocks, got {len(blocks)}")
    frame = np.zeros(layout.total_length, dtype=complex)
    d = layout.guard_length
    for i, b in enumerate(blocks):
        b = np.asarray(b)
        if b.shape != (layout.block_length,):
            raise DomainError(f"block {i} has shape {b.shape}, expected ({layout.block_length},)")
        start = layout.block_start(i)
        frame[start : start + layout.block_length] = b
        if layout.guard_mode == "cp" and d:
            frame[start - d : start] = b[-d:]
    return frame


def extract_block(layout: FrameLayout, frame, block_index: int) -> np.ndarray:
    if not (0 <= block_index < layout.num_blocks):
        raise DomainError(f"block_index {block_index} outside [0, {layout.num_blocks})")
    frame = np.asarray(frame)
    if frame.shape[0] != layout.total_length:
        raise DomainError(f"frame length {frame.shape[0]} != {layout.total_length}")
    start = layout.block_start(block_index)
    return frame[start : start + layout.block_length]


def export_csv(basis: SignalingBasis, path) -> None:
    """Write the basis with interleaved real/imaginary columns."""
    m = basis.matrix
    out = np.empty((m.shape[0], 2 * m.shape[1]))
    out[:, 0::2] = m.real
    out[:, 1::2] = m.imag
    header = ",".join(f"re{k},im{k}" for k in range(m.shape[1]))
    np.savetxt(path, out, delimiter=",", fmt="%.17g", header=header, comments="")
