"""Discrete doubly-dispersive channels with fractional delays."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import linalg, signal

from . import DomainError

PRNG_NAME = "numpy.random.PCG64"

# Delays closer than this to an integer are treated as integer taps.
INTEGER_TOL = 1e-9


@dataclass(frozen=True)
class PathSpec:
    gain: complex
    delay: float
    doppler: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.delay):
            raise DomainError(f"path delay must be finite, got {self.delay}")
        if self.delay < 0:
            raise DomainError(f"path delay must be >= 0, got {self.delay}")
        if not np.isfinite(abs(self.gain)):
            raise DomainError("path gain must be finite")

    @property
    def is_fractional(self) -> bool:
        return abs(self.delay - round(self.delay)) > INTEGER_TOL


@dataclass(frozen=True)
class ChannelSpec:
    """Ordered specular paths; gains are rescaled to unit power if ``normalize_power``."""

    paths: tuple
    normalize_power: bool = True
    seed: int | None = None
    name: str = "custom"

    def __post_init__(self):
        paths = tuple(self.paths)
        if not paths:
            raise DomainError("a channel needs at least one path")
        if self.normalize_power:
            power = sum(abs(p.gain) ** 2 for p in paths)
            if power <= 0:
                raise DomainError("cannot normalize a channel with zero power")
            scale = 1.0 / np.sqrt(power)
            paths = tuple(PathSpec(p.gain * scale, p.delay, p.doppler) for p in paths)
        object.__setattr__(self, "paths", paths)

    @property
    def gains(self) -> np.ndarray:
        return np.array([p.gain for p in self.paths], dtype=complex)

    @property
    def delays(self) -> np.ndarray:
        return np.array([p.delay for p in self.paths], dtype=float)

    @property
    def dopplers(self) -> np.ndarray:
        return np.array([p.doppler for p in self.paths], dtype=float)

    @property
    def delay_only(self) -> bool:
        return all(p.doppler == 0 for p in self.paths)

    @property
    def max_integer_delay(self) -> int:
        return int(max(np.floor(p.delay + INTEGER_TOL) for p in self.paths))

    def with_gains(self, gains) -> "ChannelSpec":
        paths = tuple(PathSpec(complex(g), p.delay, p.doppler) for g, p in zip(gains, self.paths))
        return ChannelSpec(paths, normalize_power=False, seed=self.seed, name=self.name)

    def to_json(self) -> str:
        doc = {
            "paths": [
                {"gain_re": float(np.real(p.gain)), "gain_im": float(np.imag(p.gain)),
                 "delay": float(p.delay), "doppler": float(p.doppler)}
                for p in self.paths
            ],
            "normalized": bool(self.normalize_power),
            "seed": self.seed,
            "name": self.name,
            "prng": PRNG_NAME,
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ChannelSpec":
        doc = json.loads(text)
        paths = tuple(
            PathSpec(complex(p["gain_re"], p.get("gain_im", 0.0)), float(p["delay"]),
                     float(p.get("doppler", 0.0)))
            for p in doc["paths"]
        )
        # Stored gains are already normalized, so renormalizing is a no-op up to rounding.
        return cls(paths, normalize_power=bool(doc.get("normalized", False)),
                   seed=doc.get("seed"), name=doc.get("name", "custom"))


def sinc(x) -> np.ndarray:
    """Normalized sinc that is exactly zero at nonzero integers."""
    x = np.asarray(x, dtype=float)
    out = np.sinc(x)
    out[(x == np.rint(x)) & (x != 0)] = 0.0
    return out


def delay_matrix(size: int, delay: float) -> np.ndarray:
    """Toeplitz fractional-delay operator, entry ``(l, k) = sinc(l - k - delay)``."""
    if size < 1:
        raise DomainError(f"size must be >= 1, got {size}")
    if delay < 0:
        raise DomainError(f"delay must be >= 0, got {delay}")
    lags = np.arange(size)
    col = sinc(lags - delay)
    row = sinc(-lags - delay)
    return linalg.toeplitz(col, row).astype(complex)


def doppler_matrix(size: int, doppler: float) -> np.ndarray:
    if size < 1:
        raise DomainError(f"size must be >= 1, got {size}")
    return np.diag(np.exp(2j * np.pi * np.arange(size) * doppler))


def channel_matrix(spec: ChannelSpec, size: int) -> np.ndarray:
    """Dense ``sum_p h_p D(nu_p) T(tau_p)`` of shape ``(size, size)``."""
    H = np.zeros((size, size), dtype=complex)
    rows = np.arange(size)
    for p in spec.paths:
        T = delay_matrix(size, p.delay)
        if p.doppler:
            T = np.exp(2j * np.pi * rows * p.doppler)[:, None] * T
        H += p.gain * T
    return H


def impulse_response(spec: ChannelSpec, lags) -> np.ndarray:
    """Delay-only response ``g[k] = sum_p h_p sinc(k - tau_p)`` at integer ``lags``."""
    lags = np.asarray(lags, dtype=float)
    return sinc(lags[:, None] - spec.delays[None, :]) @ spec.gains


def apply_channel(spec: ChannelSpec, x: np.ndarray) -> np.ndarray:
    """Compute ``channel_matrix(spec, len(x)) @ x`` without forming the matrix when possible."""
    x = np.asarray(x, dtype=complex)
    n = x.size
    if not spec.delay_only:
        return channel_matrix(spec, n) @ x
    lags = np.arange(-(n - 1), n)
    g = impulse_response(spec, lags)
    full = signal.fftconvolve(g, x)
    # y[l] = sum_k g[l - k] x[k]; g starts at lag -(n-1).
    return full[n - 1 : 2 * n - 1]


def exponential_profile(decay_rate: float, tap_spacing: float, max_delay: float,
                        seed: int, normalize: bool = True, name: str | None = None) -> ChannelSpec:
    """Exponential power-delay profile with i.i.d. uniform tap phases.

    Taps sit at ``0, tap_spacing, ..., max_delay`` with ``|h(n)| = exp(-decay_rate * n)``.
    """
    if decay_rate <= 0 or tap_spacing <= 0:
        raise DomainError("decay_rate and tap_spacing must be positive")
    if max_delay < tap_spacing:
        raise DomainError("max_delay must be >= tap_spacing")
    count = int(np.floor(max_delay / tap_spacing + 1e-9)) + 1
    delays = np.round(np.arange(count) * tap_spacing, 12)
    if delays.size == 0:
        raise DomainError("empty tap set")
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2 * np.pi, size=count)
    gains = np.exp(-decay_rate * delays) * np.exp(1j * phases)
    paths = tuple(PathSpec(complex(g), float(d), 0.0) for g, d in zip(gains, delays))
    if name is None:
        name = f"exp{decay_rate:g}_step{tap_spacing:g}_max{max_delay:g}"
    return ChannelSpec(paths, normalize_power=normalize, seed=seed, name=name)


def redraw_phases(spec: ChannelSpec, rng: np.random.Generator) -> ChannelSpec:
    """Same tap magnitudes and delays, fresh uniform phases."""
    mags = np.abs(spec.gains)
    phases = rng.uniform(0.0, 2 * np.pi, size=mags.size)
    return spec.with_gains(mags * np.exp(1j * phases))
