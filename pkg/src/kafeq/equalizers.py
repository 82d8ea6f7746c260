"""Adaptive equalizers over sliding tap vectors of the received signal.

Three filters share the same tap-vector front end:

* kernel LMS (KLMS): online learning with a growing dictionary. Each training
  step stores the input vector c(i) and the coefficient mu*e(i); the predictor
  is f(c') = sum_j mu*e(j) * G(c(j), c'). The feature-space weight vector is
  never formed -- the dictionary plus coefficients are its exact dual
  representation, and prediction is a single kernel-weighted sum.
* linear LMS (a feed-forward equalizer), the classic stochastic-gradient
  filter the kernel variant extends.
* DFE-LMS: feed-forward taps on received samples minus feedback taps on past
  symbol decisions; training is genie-aided (true past symbols fed back),
  inference is decision-directed with frozen weights.

Training is inherently sequential (each step depends on all prior steps), so
state objects are single-owner and mutated in place by their training loop.
A trained state is treated as frozen: equalization never mutates it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .kernel import GaussianKernel
from .pam import slice_level

# calibrated on the NONLINEAR_REFERENCE preset at the default 10-tap window
DEFAULT_KLMS_MU = 0.25
DEFAULT_KLMS_ALPHA = 0.005
DEFAULT_LINEAR_MU = 5e-4


@dataclass(frozen=True)
class TapVectorizer:
    """Sliding-window extractor aligning tap vectors to the desired symbol.

    The vector for output index i is signal[i - center_offset : i -
    center_offset + n_taps], zero-padded where the window leaves the signal.
    The default offset centers the window on the target symbol.
    """

    n_taps: int
    center_offset: int | None = None

    def __post_init__(self):
        if self.n_taps < 1:
            raise ValueError(f"n_taps must be >= 1, got {self.n_taps}")
        if self.center_offset is None:
            object.__setattr__(self, "center_offset", self.n_taps // 2)
        if not 0 <= self.center_offset < self.n_taps:
            raise ValueError(
                f"center_offset must lie in [0, {self.n_taps}), got {self.center_offset}"
            )


def make_tap_vectors(signal, v: TapVectorizer) -> np.ndarray:
    """All tap vectors of a signal as a (len(signal), n_taps) array."""
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise ValueError("signal must be one-dimensional")
    if x.size < v.n_taps:
        raise ValueError(f"signal length {x.size} is shorter than n_taps {v.n_taps}")
    pad_left = v.center_offset
    pad_right = v.n_taps - 1 - v.center_offset
    padded = np.concatenate([np.zeros(pad_left), x, np.zeros(pad_right)])
    return sliding_window_view(padded, v.n_taps)


@dataclass(frozen=True)
class KlmsParams:
    """Step size, kernel bandwidth, input dimension and training length."""

    mu: float = DEFAULT_KLMS_MU
    alpha: float = DEFAULT_KLMS_ALPHA
    n_taps: int = 10
    train_len: int = 20_000

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.n_taps < 1:
            raise ValueError(f"n_taps must be >= 1, got {self.n_taps}")
        if self.train_len < 1:
            raise ValueError(f"train_len must be >= 1, got {self.train_len}")


class KlmsState:
    """Growing dictionary of stored input vectors and their coefficients.

    Entry j holds the training vector c(j) and the coefficient mu*e(j); the
    two sequences always have equal length, one entry per training step.
    """

    def __init__(self, params: KlmsParams):
        self.params = params
        self.kernel = GaussianKernel(params.alpha)
        cap = 16
        self._vectors = np.empty((cap, params.n_taps))
        self._coefficients = np.empty(cap)
        self._size = 0

    def __len__(self) -> int:
        return self._size

    @property
    def dictionary(self) -> np.ndarray:
        return self._vectors[: self._size]

    @property
    def coefficients(self) -> np.ndarray:
        return self._coefficients[: self._size]

    def reserve(self, n: int) -> None:
        """Grow capacity so ``n`` total entries fit without reallocation."""
        if n > self._vectors.shape[0]:
            vecs = np.empty((n, self.params.n_taps))
            coefs = np.empty(n)
            vecs[: self._size] = self._vectors[: self._size]
            coefs[: self._size] = self._coefficients[: self._size]
            self._vectors = vecs
            self._coefficients = coefs

    def _append(self, c: np.ndarray, coefficient: float) -> None:
        if self._size == self._vectors.shape[0]:
            self.reserve(2 * self._size)
        self._vectors[self._size] = c
        self._coefficients[self._size] = coefficient
        self._size += 1


def klms_predict(state: KlmsState, c_prime) -> float:
    """Kernel-weighted sum over the dictionary; 0 for an empty dictionary."""
    c = np.asarray(c_prime, dtype=float)
    if c.shape != (state.params.n_taps,):
        raise ValueError(
            f"query must have {state.params.n_taps} taps, got shape {c.shape}"
        )
    if state._size == 0:
        return 0.0
    k = state.kernel.evaluate_batch(state.dictionary, c)
    return float(np.dot(state.coefficients, k))


def klms_train_step(state: KlmsState, c_i, x_i: float) -> float:
    """One online step: predict, compute the error, store the new entry.

    Returns the a-priori error e(i) = x(i) - f(c(i)); the state gains exactly
    one dictionary entry with coefficient mu*e(i).
    """
    c = np.asarray(c_i, dtype=float)
    e = x_i - klms_predict(state, c)
    state._append(c, state.params.mu * e)
    return e


def klms_train(received, desired, params: KlmsParams, vectorizer: TapVectorizer | None = None):
    """Train on the first ``train_len`` samples; returns (state, mse_curve).

    mse_curve[i] is the squared a-priori error of step i; the final
    dictionary size equals train_len.
    """
    v = vectorizer if vectorizer is not None else TapVectorizer(params.n_taps)
    if v.n_taps != params.n_taps:
        raise ValueError(f"vectorizer taps {v.n_taps} != params taps {params.n_taps}")
    r = np.asarray(received, dtype=float)
    d = np.asarray(desired, dtype=float)
    if r.size < params.train_len or d.size < params.train_len:
        raise ValueError(
            f"need at least train_len={params.train_len} aligned samples, "
            f"got received={r.size}, desired={d.size}"
        )
    windows = make_tap_vectors(r, v)
    state = KlmsState(params)
    state.reserve(params.train_len)
    errors = np.empty(params.train_len)
    for i in range(params.train_len):
        errors[i] = klms_train_step(state, windows[i], d[i])
    return state, errors * errors


def klms_equalize(state: KlmsState, received, vectorizer: TapVectorizer | None = None) -> np.ndarray:
    """Apply a trained state to every tap vector of a signal (weights frozen)."""
    if len(state) == 0:
        raise ValueError("cannot equalize with an untrained (empty) state")
    v = vectorizer if vectorizer is not None else TapVectorizer(state.params.n_taps)
    windows = make_tap_vectors(received, v)
    out = np.empty(windows.shape[0])
    for i in range(windows.shape[0]):
        out[i] = klms_predict(state, windows[i])
    return out


class LmsState:
    """Linear feed-forward filter weights plus the LMS step size."""

    def __init__(self, n_taps: int, mu: float = DEFAULT_LINEAR_MU):
        if n_taps < 1:
            raise ValueError(f"n_taps must be >= 1, got {n_taps}")
        if not (math.isfinite(mu) and mu > 0):
            raise ValueError(f"mu must be positive, got {mu}")
        self.weights = np.zeros(n_taps)
        self.mu = mu

    @property
    def n_taps(self) -> int:
        return self.weights.size


def lms_train_step(state: LmsState, c_i, x_i: float) -> float:
    """e = x - w.c, then w += mu*e*c. Returns the a-priori error."""
    c = np.asarray(c_i, dtype=float)
    if c.shape != state.weights.shape:
        raise ValueError(f"input must have {state.n_taps} taps, got shape {c.shape}")
    e = x_i - float(np.dot(state.weights, c))
    state.weights += (state.mu * e) * c
    return e


def lms_train(received, desired, *, n_taps: int, mu: float = DEFAULT_LINEAR_MU,
              train_len: int, vectorizer: TapVectorizer | None = None):
    """Train a linear FFE on the first ``train_len`` samples; (state, mse_curve)."""
    v = vectorizer if vectorizer is not None else TapVectorizer(n_taps)
    r = np.asarray(received, dtype=float)
    d = np.asarray(desired, dtype=float)
    if train_len < 1 or r.size < train_len or d.size < train_len:
        raise ValueError("insufficient aligned samples for the requested train_len")
    windows = make_tap_vectors(r, v)
    state = LmsState(n_taps, mu)
    errors = np.empty(train_len)
    for i in range(train_len):
        errors[i] = lms_train_step(state, windows[i], d[i])
    return state, errors * errors


def lms_equalize(state: LmsState, received, vectorizer: TapVectorizer | None = None) -> np.ndarray:
    """Filter a signal with frozen weights.

    Uses the same per-window dot product as the training step, so a DFE with
    zero feedback taps reproduces this output exactly.
    """
    v = vectorizer if vectorizer is not None else TapVectorizer(state.n_taps)
    windows = make_tap_vectors(received, v)
    w = state.weights
    return np.array([float(np.dot(w, windows[i])) for i in range(windows.shape[0])])


class DfeState:
    """Feed-forward taps on received samples, feedback taps on past decisions."""

    def __init__(self, n_fft: int, n_fbt: int, mu: float = DEFAULT_LINEAR_MU):
        if n_fft < 1:
            raise ValueError(f"n_fft must be >= 1, got {n_fft}")
        if n_fbt < 0:
            raise ValueError(f"n_fbt must be >= 0, got {n_fbt}")
        if not (math.isfinite(mu) and mu > 0):
            raise ValueError(f"mu must be positive, got {mu}")
        self.ff_weights = np.zeros(n_fft)
        self.fb_weights = np.zeros(n_fbt)
        self.mu = mu

    @property
    def n_fft(self) -> int:
        return self.ff_weights.size

    @property
    def n_fbt(self) -> int:
        return self.fb_weights.size


def dfe_train_step(state: DfeState, ff_window, past_decisions, x_i: float,
                   mode: str = "train"):
    """One DFE step; returns (error, decision).

    y = ff.window - fb.past. In "train" mode the error target is the true
    symbol x_i and ``past_decisions`` is expected to hold true past symbols
    (genie-aided); in "dd" mode the target is the sliced decision and
    ``past_decisions`` holds previous sliced decisions, most recent first.
    Both weight vectors update by the LMS rule with their own input vectors.
    """
    if mode not in ("train", "dd"):
        raise ValueError(f"mode must be 'train' or 'dd', got {mode!r}")
    u = np.asarray(ff_window, dtype=float)
    p = np.asarray(past_decisions, dtype=float)
    if u.shape != state.ff_weights.shape:
        raise ValueError(f"feed-forward window must have {state.n_fft} taps")
    if p.shape != state.fb_weights.shape:
        raise ValueError(f"feedback vector must have {state.n_fbt} taps")
    y = float(np.dot(state.ff_weights, u)) - float(np.dot(state.fb_weights, p))
    decision = slice_level(y)
    target = x_i if mode == "train" else decision
    e = target - y
    state.ff_weights += (state.mu * e) * u
    state.fb_weights -= (state.mu * e) * p
    return e, decision


def dfe_train(received, desired, *, n_fft: int, n_fbt: int,
              mu: float = DEFAULT_LINEAR_MU, train_len: int,
              vectorizer: TapVectorizer | None = None):
    """Genie-aided training over the first ``train_len`` samples; (state, mse_curve)."""
    v = vectorizer if vectorizer is not None else TapVectorizer(n_fft)
    r = np.asarray(received, dtype=float)
    d = np.asarray(desired, dtype=float)
    if train_len < 1 or r.size < train_len or d.size < train_len:
        raise ValueError("insufficient aligned samples for the requested train_len")
    windows = make_tap_vectors(r, v)
    state = DfeState(n_fft, n_fbt, mu)
    past = np.zeros(n_fbt)
    errors = np.empty(train_len)
    for i in range(train_len):
        errors[i], _ = dfe_train_step(state, windows[i], past, d[i], mode="train")
        if n_fbt:
            past[1:] = past[:-1]
            past[0] = d[i]
    return state, errors * errors


def dfe_equalize(state: DfeState, received, vectorizer: TapVectorizer | None = None,
                 initial_decisions=None):
    """Decision-directed pass with frozen weights; returns (soft, decisions).

    ``initial_decisions`` seeds the feedback delay line (most recent first);
    it defaults to zeros.
    """
    v = vectorizer if vectorizer is not None else TapVectorizer(state.n_fft)
    windows = make_tap_vectors(received, v)
    n = windows.shape[0]
    if initial_decisions is None:
        past = np.zeros(state.n_fbt)
    else:
        past = np.asarray(initial_decisions, dtype=float).copy()
        if past.shape != (state.n_fbt,):
            raise ValueError(f"initial_decisions must have {state.n_fbt} entries")
    ff = state.ff_weights
    fb = state.fb_weights
    n_fbt = state.n_fbt
    soft = np.empty(n)
    decisions = np.empty(n)
    for i in range(n):
        y = float(np.dot(ff, windows[i])) - float(np.dot(fb, past))
        d = slice_level(y)
        soft[i] = y
        decisions[i] = d
        if n_fbt:
            past[1:] = past[:-1]
            past[0] = d
    return soft, decisions
