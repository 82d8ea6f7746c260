"""Simulated nonlinear direct-detection link.

The link is a seeded Wiener-Hammerstein cascade:

    transmit FIR -> memoryless polynomial g(u) = u + a2*u^2 + a3*u^3
                 -> receive FIR -> additive white Gaussian noise

Noise power is set from the mean power of the actual (distorted) waveform,
so ``snr_db`` is exact for the signal as transmitted, not for the nominal
constellation. ``snr_db = inf`` disables noise entirely.

Two named presets are artifact constants: LINEAR_MILD, which a linear
decision-feedback equalizer nearly closes, and NONLINEAR_REFERENCE, which
leaves a substantial nonlinear penalty for linear equalizers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import random_gaussian


@dataclass(frozen=True)
class ChannelConfig:
    """FIR taps, polynomial coefficients, noise level and noise seed."""

    h_pre: tuple[float, ...]
    a2: float
    a3: float
    h_post: tuple[float, ...]
    snr_db: float
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "h_pre", tuple(float(t) for t in self.h_pre))
        object.__setattr__(self, "h_post", tuple(float(t) for t in self.h_post))
        for name in ("h_pre", "h_post"):
            taps = getattr(self, name)
            if len(taps) < 1:
                raise ValueError(f"{name} needs at least one tap")
            if not all(math.isfinite(t) for t in taps):
                raise ValueError(f"{name} taps must be finite")
        if not all(math.isfinite(v) for v in (self.a2, self.a3)):
            raise ValueError("polynomial coefficients must be finite")
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ValueError("snr_db must be finite or +inf (noise disabled)")

    @property
    def noise_enabled(self) -> bool:
        return self.snr_db != math.inf


@dataclass(frozen=True)
class ChannelPreset:
    name: str
    config: ChannelConfig


LINEAR_MILD = ChannelPreset(
    "LINEAR_MILD",
    ChannelConfig(h_pre=(1.0, 0.25), a2=0.0, a3=0.0, h_post=(1.0,), snr_db=18.0, seed=0),
)

NONLINEAR_REFERENCE = ChannelPreset(
    "NONLINEAR_REFERENCE",
    ChannelConfig(
        h_pre=(1.0, 0.35, 0.1), a2=0.08, a3=0.06, h_post=(1.0, 0.2), snr_db=18.0, seed=0
    ),
)

PRESETS = {p.name: p for p in (LINEAR_MILD, NONLINEAR_REFERENCE)}


def get_preset(name: str) -> ChannelConfig:
    """Look up a named preset configuration."""
    try:
        return PRESETS[name].config
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise ValueError(f"unknown channel preset {name!r} (known: {known})") from None


def apply_fir(x, h) -> np.ndarray:
    """Causal linear convolution truncated to the input length."""
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    if x.size == 0 or h.size == 0:
        raise ValueError("apply_fir requires nonempty signal and taps")
    return np.convolve(x, h)[: x.size]


def apply_nonlinearity(x, a2: float, a3: float) -> np.ndarray:
    """Elementwise y = x + a2*x**2 + a3*x**3."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("apply_nonlinearity requires a nonempty signal")
    if not np.isfinite(x).all():
        raise ValueError("signal must be finite")
    return x + a2 * x * x + a3 * x * x * x


def add_awgn(x, snr_db: float, seed: int) -> np.ndarray:
    """Add white Gaussian noise at the given SNR relative to mean(x**2)."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("add_awgn requires a nonempty signal")
    if snr_db == math.inf:
        return x.copy()
    if math.isnan(snr_db) or snr_db == -math.inf:
        raise ValueError("snr_db must be finite or +inf")
    power = float(np.mean(x * x))
    if power == 0.0:
        raise ValueError("signal power is zero, SNR undefined")
    sigma = math.sqrt(power / 10.0 ** (snr_db / 10.0))
    return x + sigma * random_gaussian(seed, x.size)


def simulate_channel(cfg: ChannelConfig, tx) -> np.ndarray:
    """Run a symbol sequence through the full cascade; output length = input length."""
    tx = np.asarray(tx, dtype=float)
    if tx.size == 0:
        raise ValueError("transmit sequence must be nonempty")
    y = apply_fir(tx, cfg.h_pre)
    y = apply_nonlinearity(y, cfg.a2, cfg.a3)
    y = apply_fir(y, cfg.h_post)
    return add_awgn(y, cfg.snr_db, cfg.seed)
