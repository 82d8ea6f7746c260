"""Deterministic pseudo-random streams with a fixed, documented algorithm.

All randomness in the library comes from a counter-mode splitmix64 stream
(an xorshift-multiply mixer, Steele et al. style), chosen over platform RNGs
so that a seed pins the exact output sequence everywhere:

    state(i)  = (seed + i * GOLDEN) mod 2**64          for i = 1, 2, ...
    output(i) = mix64(state(i))

where ``mix64`` is the splitmix64 finalizer

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

with all arithmetic mod 2**64. Because the state is an affine function of the
counter, whole streams vectorize with numpy uint64 arithmetic.

Derived values:

* bits        -- the top bit of each output word
* uniforms    -- (output >> 11) * 2**-53, in [0, 1)
* gaussians   -- Box-Muller on consecutive uniform pairs (u1, u2):
                 r = sqrt(-2 ln(1 - u1)), z = r*cos(2*pi*u2), r*sin(2*pi*u2)
* child seeds -- mix64(seed + (stream + 1) * SPLIT) for a stream index
"""

from __future__ import annotations

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15  # 2**64 / golden ratio, odd
_SPLIT = 0xD6E8FEB86659FD93  # odd constant for seed derivation
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """Splitmix64 finalizer on a single 64-bit word (mod 2**64)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def splitmix64(seed: int, n: int) -> np.ndarray:
    """First ``n`` output words of the stream for ``seed``, as uint64."""
    if n < 0:
        raise ValueError(f"stream length must be >= 0, got {n}")
    idx = np.arange(1, n + 1, dtype=np.uint64)
    return _mix64_array(np.uint64(seed & _MASK) + idx * np.uint64(_GOLDEN))


def derive_seed(seed: int, stream: int) -> int:
    """Child seed for an independent stream, e.g. bits vs. channel noise."""
    if stream < 0:
        raise ValueError(f"stream index must be >= 0, got {stream}")
    return mix64(seed + (stream + 1) * _SPLIT)


def random_bits(seed: int, n: int) -> np.ndarray:
    """``n`` equiprobable bits (top bit of each stream word), dtype uint8."""
    return (splitmix64(seed, n) >> np.uint64(63)).astype(np.uint8)


def random_uniform(seed: int, n: int) -> np.ndarray:
    """``n`` float64 uniforms in [0, 1), 53-bit resolution."""
    return (splitmix64(seed, n) >> np.uint64(11)) * 2.0**-53


def random_gaussian(seed: int, n: int) -> np.ndarray:
    """``n`` standard-normal float64 variates via Box-Muller."""
    if n < 0:
        raise ValueError(f"stream length must be >= 0, got {n}")
    pairs = (n + 1) // 2
    u = random_uniform(seed, 2 * pairs)
    u1, u2 = u[0::2], u[1::2]
    # 1 - u1 lies in (0, 1], so the log argument is never zero
    r = np.sqrt(-2.0 * np.log1p(-u1))
    theta = (2.0 * np.pi) * u2
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(theta)
    z[1::2] = r * np.sin(theta)
    return z[:n]
