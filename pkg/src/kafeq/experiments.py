"""Measurement protocols: single runs, tap sweeps, learning curves, multi-channel
tables and per-iteration cost measurement.

Every stochastic choice derives from ``master_seed``: the bit stream uses
``derive_seed(master_seed, STREAM_BITS)``, channel noise uses
``derive_seed(master_seed, STREAM_NOISE)``, and emulated channel instance i
uses the master seed itself for i = 0 and ``derive_seed(master_seed,
CORE_STREAM_BASE + i)`` otherwise, so a one-instance run degenerates exactly
to a single run. BER is always measured on held-out symbols: the test
segment starts after the largest configured training length, and training
targets never overlap it. Training-segment MSE feeds the learning curves;
held-out BER feeds the verdicts.
"""

from __future__ import annotations

import gc
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ChannelConfig, get_preset, simulate_channel
from .equalizers import (
    KlmsParams,
    KlmsState,
    LmsState,
    TapVectorizer,
    dfe_equalize,
    dfe_train,
    klms_equalize,
    klms_train,
    klms_train_step,
    lms_equalize,
    lms_train,
    lms_train_step,
    make_tap_vectors,
)
from .pam import FecVerdict, bit_error_rate, bits_to_pam4, fec_verdict, generate_bits, pam4_to_bits, slice_pam4
from .rng import derive_seed

STREAM_BITS = 1
STREAM_NOISE = 2
CORE_STREAM_BASE = 16

MSE_SMOOTHING_WINDOW = 500
MSE_DB_FLOOR = 1e-10  # -100 dB guard for zero error

EQUALIZER_NAMES = ("none", "lms", "dfe", "klms")


@dataclass(frozen=True)
class LmsSettings:
    taps: int = 43
    mu: float = 5e-4
    train_len: int = 100_000


@dataclass(frozen=True)
class DfeSettings:
    fft: int = 43
    fbt: int = 15
    mu: float = 5e-4
    train_len: int = 100_000


@dataclass(frozen=True)
class CoreSettings:
    """Emulated parallel channel instances with per-instance SNR offsets."""

    count: int = 7
    offsets_db: tuple[float, ...] = (-1.0, -2.0 / 3.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0)
    seeds: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "offsets_db", tuple(float(o) for o in self.offsets_db))
        if self.seeds is not None:
            object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.count < 1:
            raise ValueError(f"core count must be >= 1, got {self.count}")
        if len(self.offsets_db) != self.count:
            raise ValueError(
                f"need one SNR offset per core: count={self.count}, "
                f"offsets={len(self.offsets_db)}"
            )
        if self.seeds is not None and len(self.seeds) != self.count:
            raise ValueError("cores.seeds must match cores.count when given")

    def seed_for(self, index: int, master_seed: int) -> int:
        if self.seeds is not None:
            return self.seeds[index]
        if index == 0:
            return master_seed
        return derive_seed(master_seed, CORE_STREAM_BASE + index)


@dataclass(frozen=True)
class ExperimentConfig:
    channel: ChannelConfig
    preset_name: str | None = None
    n_symbols: int = 200_000
    master_seed: int = 1
    klms: KlmsParams = field(default_factory=KlmsParams)
    lms: LmsSettings = field(default_factory=LmsSettings)
    dfe: DfeSettings = field(default_factory=DfeSettings)
    sweep_taps: tuple[int, ...] = (2, 4, 6, 8, 10, 14)
    cores: CoreSettings = field(default_factory=CoreSettings)

    def __post_init__(self):
        object.__setattr__(self, "sweep_taps", tuple(int(t) for t in self.sweep_taps))
        if self.n_symbols < 2:
            raise ValueError(f"n_symbols must be >= 2, got {self.n_symbols}")
        if any(t < 1 for t in self.sweep_taps):
            raise ValueError("sweep tap counts must be >= 1")

    @property
    def test_start(self) -> int:
        return max(self.klms.train_len, self.lms.train_len, self.dfe.train_len)

    def validate_budget(self, held_out: bool = True) -> None:
        """Check the symbol budget covers every training segment.

        BER-measuring runs additionally require a nonempty held-out segment
        (training targets and measured symbols never overlap).
        """
        limit = self.n_symbols - 1 if held_out else self.n_symbols
        for name, tl in (("klms", self.klms.train_len), ("lms", self.lms.train_len),
                         ("dfe", self.dfe.train_len)):
            if tl > limit:
                what = "leaves no held-out symbols" if held_out else "exceeds the symbol budget"
                raise ValueError(f"{name}.train_len={tl} {what} (n_symbols={self.n_symbols})")


def from_preset(name: str, **overrides) -> ExperimentConfig:
    """Experiment configuration on a named channel preset."""
    return ExperimentConfig(channel=get_preset(name), preset_name=name, **overrides)


@dataclass(frozen=True)
class EqualizerResult:
    name: str
    ber: float
    verdict: FecVerdict
    train_len: int
    n_test: int


@dataclass(frozen=True)
class SweepRow:
    taps: int
    ber: float
    verdict: FecVerdict


@dataclass(frozen=True)
class CoreResult:
    core: int  # 1-based
    snr_db: float
    seed: int
    results: dict[str, EqualizerResult]


@dataclass(frozen=True)
class TimingFit:
    slope_ns: float
    intercept_ns: float
    r2: float


@dataclass(frozen=True)
class TimingReport:
    klms_blocks: tuple[tuple[int, float], ...]  # (center iteration, mean step ns)
    lms_blocks: tuple[tuple[int, float], ...]
    klms_fit: TimingFit
    lms_block_ratio: float  # max/min of block means
    steps: int
    klms_dict_entries: int  # dictionary length after `steps` steps


@dataclass(frozen=True)
class MseCurves:
    """Raw and smoothed training MSE per equalizer, in dB."""

    window: int
    raw_db: dict[str, np.ndarray]
    smoothed_db: dict[str, np.ndarray]


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    test_start: int
    test_end: int
    results: dict[str, EqualizerResult]
    mse: MseCurves | None = None
    sweep: tuple[SweepRow, ...] | None = None
    cores: tuple[CoreResult, ...] | None = None
    timing: TimingReport | None = None


def moving_average(x, window: int) -> np.ndarray:
    """Trailing moving average; output length = len(x) - window + 1."""
    x = np.asarray(x, dtype=float)
    if window < 1 or window > x.size:
        raise ValueError(f"window must lie in [1, {x.size}], got {window}")
    return np.convolve(x, np.ones(window) / window, mode="valid")


def to_db(mse) -> np.ndarray:
    """10*log10 of a squared-error curve, floored at -100 dB."""
    return 10.0 * np.log10(np.maximum(np.asarray(mse, dtype=float), MSE_DB_FLOOR))


def _mse_curves(raw: dict[str, np.ndarray], window: int = MSE_SMOOTHING_WINDOW) -> MseCurves:
    raw_db = {}
    smoothed_db = {}
    for name, curve in raw.items():
        raw_db[name] = to_db(curve)
        w = min(window, curve.size)
        smoothed_db[name] = to_db(moving_average(curve, w))
    return MseCurves(window=window, raw_db=raw_db, smoothed_db=smoothed_db)


def prepare_data(cfg: ExperimentConfig):
    """Bits, symbols and channel output for a config's master seed."""
    bits = generate_bits(derive_seed(cfg.master_seed, STREAM_BITS), 2 * cfg.n_symbols)
    tx = bits_to_pam4(bits)
    chan = replace(cfg.channel, seed=derive_seed(cfg.master_seed, STREAM_NOISE))
    rx = simulate_channel(chan, tx)
    return bits, tx, rx


def _held_out_ber(decisions: np.ndarray, ref_bits: np.ndarray) -> float:
    return bit_error_rate(ref_bits, pam4_to_bits(decisions))


def run_single(cfg: ExperimentConfig) -> ExperimentReport:
    """Simulate, train every equalizer, measure held-out BER and verdicts.

    The unequalized path (raw channel output into the slicer) is reported
    under the name "none". Equalizers see a margin of received samples
    before the test segment so their tap windows have real context at the
    boundary; none of those symbols is ever a training target again.
    """
    cfg.validate_budget(held_out=True)
    bits, tx, rx = prepare_data(cfg)
    t0 = cfg.test_start
    n = cfg.n_symbols
    ref_bits = bits[2 * t0 :]
    n_test = n - t0
    results: dict[str, EqualizerResult] = {}
    raw_mse: dict[str, np.ndarray] = {}

    def record(name: str, decisions: np.ndarray, train_len: int) -> None:
        ber = _held_out_ber(decisions, ref_bits)
        results[name] = EqualizerResult(
            name=name, ber=ber, verdict=fec_verdict(ber), train_len=train_len, n_test=n_test
        )

    record("none", slice_pam4(rx[t0:]), 0)

    lms_state, lms_mse = lms_train(
        rx, tx, n_taps=cfg.lms.taps, mu=cfg.lms.mu, train_len=cfg.lms.train_len
    )
    m = min(cfg.lms.taps, t0)
    lms_out = lms_equalize(lms_state, rx[t0 - m : n])[m:]
    record("lms", slice_pam4(lms_out), cfg.lms.train_len)
    raw_mse["lms"] = lms_mse

    dfe_state, dfe_mse = dfe_train(
        rx, tx, n_fft=cfg.dfe.fft, n_fbt=cfg.dfe.fbt, mu=cfg.dfe.mu, train_len=cfg.dfe.train_len
    )
    m = min(cfg.dfe.fft, t0)
    warm = None
    if cfg.dfe.fbt:
        known = tx[max(t0 - m - cfg.dfe.fbt, 0) : t0 - m][::-1]
        warm = np.zeros(cfg.dfe.fbt)
        warm[: known.size] = known
    _, dfe_dec = dfe_equalize(dfe_state, rx[t0 - m : n], initial_decisions=warm)
    record("dfe", dfe_dec[m:], cfg.dfe.train_len)
    raw_mse["dfe"] = dfe_mse

    klms_state, klms_mse = klms_train(rx, tx, cfg.klms)
    m = min(cfg.klms.n_taps, t0)
    klms_out = klms_equalize(klms_state, rx[t0 - m : n])[m:]
    record("klms", slice_pam4(klms_out), cfg.klms.train_len)
    raw_mse["klms"] = klms_mse

    return ExperimentReport(
        config=cfg,
        test_start=t0,
        test_end=n,
        results=results,
        mse=_mse_curves(raw_mse),
    )


def run_tap_sweep(cfg: ExperimentConfig) -> ExperimentReport:
    """One full run per KLMS tap count, sharing data and channel realization."""
    if not cfg.sweep_taps:
        raise ValueError("sweep tap list is empty")
    rows = []
    base = None
    for taps in cfg.sweep_taps:
        point = replace(cfg, klms=replace(cfg.klms, n_taps=taps))
        report = run_single(point)
        r = report.results["klms"]
        rows.append(SweepRow(taps=taps, ber=r.ber, verdict=r.verdict))
        if base is None:
            base = report
    return ExperimentReport(
        config=cfg,
        test_start=base.test_start,
        test_end=base.test_end,
        results=base.results,
        mse=base.mse,
        sweep=tuple(rows),
    )


def run_mse_comparison(cfg: ExperimentConfig) -> ExperimentReport:
    """Training learning curves for KLMS and DFE at their own train lengths."""
    cfg.validate_budget(held_out=False)
    _, tx, rx = prepare_data(cfg)
    _, klms_mse = klms_train(rx, tx, cfg.klms)
    _, dfe_mse = dfe_train(
        rx, tx, n_fft=cfg.dfe.fft, n_fbt=cfg.dfe.fbt, mu=cfg.dfe.mu, train_len=cfg.dfe.train_len
    )
    return ExperimentReport(
        config=cfg,
        test_start=cfg.test_start,
        test_end=cfg.n_symbols,
        results={},
        mse=_mse_curves({"klms": klms_mse, "dfe": dfe_mse}),
    )


def run_multicore(cfg: ExperimentConfig) -> ExperimentReport:
    """Independent full run per emulated channel instance."""
    core_rows = []
    for i in range(cfg.cores.count):
        seed = cfg.cores.seed_for(i, cfg.master_seed)
        snr = cfg.channel.snr_db + cfg.cores.offsets_db[i]
        sub = replace(cfg, channel=replace(cfg.channel, snr_db=snr), master_seed=seed)
        report = run_single(sub)
        core_rows.append(CoreResult(core=i + 1, snr_db=snr, seed=seed, results=report.results))
    return ExperimentReport(
        config=cfg,
        test_start=cfg.test_start,
        test_end=cfg.n_symbols,
        results=core_rows[0].results,
        cores=tuple(core_rows),
    )


def _blocked(samples_ns: np.ndarray, block: int, trim: float = 0.05):
    """Per-block trimmed means of per-step timings; (center, mean) pairs."""
    blocks = []
    n_blocks = samples_ns.size // block
    for b in range(n_blocks):
        chunk = np.sort(samples_ns[b * block : (b + 1) * block])
        k = int(block * trim)
        kept = chunk[k : block - k] if block - 2 * k >= 1 else chunk
        blocks.append((b * block + block // 2 + 1, float(np.mean(kept))))
    return tuple(blocks)


def _linear_fit(blocks) -> TimingFit:
    x = np.array([b[0] for b in blocks], dtype=float)
    y = np.array([b[1] for b in blocks], dtype=float)
    a = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(a, y, rcond=None)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return TimingFit(slope_ns=float(slope), intercept_ns=float(intercept), r2=r2)


def measure_complexity(cfg: ExperimentConfig, block: int = 200,
                       repeats: int = 3) -> ExperimentReport:
    """Per-step wall time of the two training loops, block-averaged.

    Each loop runs ``repeats`` full passes; a block's cost is the minimum
    across passes of its within-pass trimmed mean, which suppresses one-sided
    scheduler and frequency noise. KLMS cost grows with the dictionary, so
    its block costs are fitted with a straight line in the iteration index;
    LMS cost is dimension-bound, so its blocks are summarized by their
    max/min ratio. Storage growth is structural: one dictionary entry per
    step.
    """
    if block < 100:
        raise ValueError(f"timing blocks need >= 100 steps, got {block}")
    steps = cfg.klms.train_len
    if steps < 10_000:
        raise ValueError(f"need >= 10000 steps for stable timing, got {steps}")
    if steps > cfg.n_symbols:
        raise ValueError(
            f"klms.train_len={steps} exceeds the symbol budget (n_symbols={cfg.n_symbols})"
        )
    _, tx, rx = prepare_data(cfg)

    klms_windows = make_tap_vectors(rx, TapVectorizer(cfg.klms.n_taps))
    lms_windows = make_tap_vectors(rx, TapVectorizer(cfg.lms.taps))

    def klms_pass():
        state = KlmsState(cfg.klms)
        state.reserve(steps)
        ns = np.empty(steps)
        for i in range(steps):
            t0 = time.perf_counter_ns()
            klms_train_step(state, klms_windows[i], tx[i])
            ns[i] = time.perf_counter_ns() - t0
        return ns, state

    def lms_pass():
        state = LmsState(cfg.lms.taps, cfg.lms.mu)
        ns = np.empty(steps)
        for i in range(steps):
            t0 = time.perf_counter_ns()
            lms_train_step(state, lms_windows[i], tx[i])
            ns[i] = time.perf_counter_ns() - t0
        return ns, state

    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        lms_pass()  # warm-up outside the measured passes
        lms_block_runs = [_blocked(lms_pass()[0], block) for _ in range(repeats)]
        klms_runs = [klms_pass() for _ in range(repeats)]
    finally:
        if gc_was_enabled:
            gc.enable()
    klms_block_runs = [_blocked(ns, block) for ns, _ in klms_runs]
    final_state = klms_runs[-1][1]

    def per_block_min(runs):
        centers = [b[0] for b in runs[0]]
        mins = np.min(np.array([[b[1] for b in run] for run in runs]), axis=0)
        return tuple((c, float(m)) for c, m in zip(centers, mins))

    klms_blocks = per_block_min(klms_block_runs)
    lms_blocks = per_block_min(lms_block_runs)
    lms_means = [b[1] for b in lms_blocks]
    timing = TimingReport(
        klms_blocks=klms_blocks,
        lms_blocks=lms_blocks,
        klms_fit=_linear_fit(klms_blocks),
        lms_block_ratio=max(lms_means) / min(lms_means),
        steps=steps,
        klms_dict_entries=len(final_state),
    )
    return ExperimentReport(
        config=cfg,
        test_start=cfg.test_start,
        test_end=cfg.n_symbols,
        results={},
        timing=timing,
    )
