"""PAM4 bit mapping, hard-decision slicing, error counting and FEC verdicts.

Bit pairs map to the normalized amplitude grid {-3, -1, +1, +3} with the
Gray labeling

    00 -> -3,  01 -> -1,  11 -> +1,  10 -> +3

so adjacent levels differ in exactly one bit. The slicer decides with
thresholds at -2, 0, +2; a sample landing exactly on a threshold resolves
toward the level closer to zero (the tie at 0 resolves to +1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import random_bits

PAM4_LEVELS = (-3.0, -1.0, 1.0, 3.0)

KP4_FEC_LIMIT = 2.2e-4
HD_FEC_LIMIT = 3.8e-3
SD_FEC_LIMIT = 2e-2

# level for bit pair (b0, b1), indexed by 2*b0 + b1
_LEVEL_BY_PAIR = np.array([-3.0, -1.0, 3.0, 1.0])
# bit pair for level, indexed by (level + 3) / 2
_PAIR_BY_LEVEL = np.array([[0, 0], [0, 1], [1, 1], [1, 0]], dtype=np.uint8)


@dataclass(frozen=True)
class FecVerdict:
    """Pass/fail against the pre-correction FEC thresholds."""

    ber: float
    passes_kp4: bool  # 2.2e-4
    passes_hd: bool  # 3.8e-3
    passes_sd: bool  # 2e-2


def generate_bits(seed: int, n_bits: int) -> np.ndarray:
    """Deterministic pseudo-random bit sequence of even length >= 2."""
    if n_bits < 2 or n_bits % 2 != 0:
        raise ValueError(f"n_bits must be even and >= 2, got {n_bits}")
    return random_bits(seed, n_bits)


def _check_bits(bits) -> np.ndarray:
    b = np.asarray(bits)
    if b.ndim != 1:
        raise ValueError("bit sequence must be one-dimensional")
    if b.size and not np.isin(b, (0, 1)).all():
        raise ValueError("bit sequence may contain only 0 and 1")
    return b.astype(np.uint8)


def bits_to_pam4(bits) -> np.ndarray:
    """Map an even-length bit sequence to PAM4 amplitudes (2 bits/symbol)."""
    b = _check_bits(bits)
    if b.size % 2 != 0:
        raise ValueError(f"bit count must be even, got {b.size}")
    pairs = b.reshape(-1, 2)
    return _LEVEL_BY_PAIR[2 * pairs[:, 0].astype(np.intp) + pairs[:, 1]]


def pam4_to_bits(symbols) -> np.ndarray:
    """Exact inverse of :func:`bits_to_pam4`."""
    s = np.asarray(symbols, dtype=float)
    if s.ndim != 1:
        raise ValueError("symbol sequence must be one-dimensional")
    if s.size and not np.isin(s, PAM4_LEVELS).all():
        raise ValueError("symbols must lie on the grid {-3, -1, +1, +3}")
    idx = ((s + 3.0) / 2.0).astype(np.intp)
    return _PAIR_BY_LEVEL[idx].reshape(-1)


def slice_pam4(samples) -> np.ndarray:
    """Nearest-level decisions with thresholds at -2, 0, +2."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1:
        raise ValueError("sample sequence must be one-dimensional")
    if x.size and not np.isfinite(x).all():
        raise ValueError("samples must be finite")
    return np.select([x < -2.0, x < 0.0, x <= 2.0], [-3.0, -1.0, 1.0], default=3.0)


def slice_level(value: float) -> float:
    """Scalar slicer with the same thresholds and tie rules as slice_pam4."""
    if not np.isfinite(value):
        raise ValueError("sample must be finite")
    if value < -2.0:
        return -3.0
    if value < 0.0:
        return -1.0
    if value <= 2.0:
        return 1.0
    return 3.0


def bit_error_rate(reference, decided) -> float:
    """Fraction of differing positions between two equal-length bit sequences."""
    a = _check_bits(reference)
    b = _check_bits(decided)
    if a.size == 0:
        raise ValueError("bit sequences must be nonempty")
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return int(np.count_nonzero(a != b)) / a.size


def fec_verdict(ber: float) -> FecVerdict:
    """Compare a BER against the KP4 / HD / SD thresholds (inclusive)."""
    if not (0.0 <= ber <= 1.0):
        raise ValueError(f"ber must lie in [0, 1], got {ber}")
    return FecVerdict(
        ber=float(ber),
        passes_kp4=ber <= KP4_FEC_LIMIT,
        passes_hd=ber <= HD_FEC_LIMIT,
        passes_sd=ber <= SD_FEC_LIMIT,
    )
