"""Binary waveform and trained-state files, JSON reports, CSV emission.

Waveform file (magic ``KAF1``)::

    bytes 0..3    magic "KAF1"
    bytes 4..7    version, uint32 little-endian (currently 1)
    bytes 8..15   sample count, uint64 little-endian
    then          count float64 samples, IEEE-754 little-endian

State file (magic ``KAFS``) shares the 8-byte magic+version prefix, then a
kind byte (1 = klms, 2 = lms, 3 = dfe) and a kind-specific block; the KLMS
block stores the full dictionary and coefficient sequence, which together
are the complete trained state. All round trips are bit-exact.

CSV columns are fixed:

    sweep      taps,ber,kp4,hd,sd
    multicore  core,equalizer,ber,kp4,hd,sd
    mse.*      sample,mse_db_raw,mse_db_smoothed
    timing.*   iter_block,mean_step_ns

Floats are written with their shortest round-trip representation; FEC flags
are 1/0.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .channel import ChannelConfig
from .equalizers import DfeState, KlmsParams, KlmsState, LmsState, TapVectorizer
from .experiments import (
    EQUALIZER_NAMES,
    CoreResult,
    CoreSettings,
    DfeSettings,
    EqualizerResult,
    ExperimentConfig,
    ExperimentReport,
    LmsSettings,
    MseCurves,
    SweepRow,
    TimingFit,
    TimingReport,
)
from .pam import FecVerdict

WAVE_MAGIC = b"KAF1"
STATE_MAGIC = b"KAFS"
FORMAT_VERSION = 1

_KIND_KLMS = 1
_KIND_LMS = 2
_KIND_DFE = 3


class FileFormatError(ValueError):
    """Bad magic, unsupported version, truncation or malformed content."""


class MissingSectionError(ValueError):
    """Report does not contain the requested section."""


def write_waveform(path, samples) -> None:
    x = np.asarray(samples, dtype="<f8")
    if x.ndim != 1:
        raise ValueError("waveform must be one-dimensional")
    with open(path, "wb") as f:
        f.write(struct.pack("<4sIQ", WAVE_MAGIC, FORMAT_VERSION, x.size))
        f.write(x.tobytes())


def read_waveform(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 16:
        raise FileFormatError(f"{path}: truncated header ({len(data)} bytes)")
    magic, version, count = struct.unpack_from("<4sIQ", data, 0)
    if magic != WAVE_MAGIC:
        raise FileFormatError(f"{path}: bad magic {magic!r} (expected {WAVE_MAGIC!r})")
    if version != FORMAT_VERSION:
        raise FileFormatError(f"{path}: unsupported version {version}")
    expected = 16 + 8 * count
    if len(data) < expected:
        raise FileFormatError(
            f"{path}: truncated payload (declared {count} samples, "
            f"file holds {(len(data) - 16) // 8})"
        )
    if len(data) > expected:
        raise FileFormatError(f"{path}: {len(data) - expected} trailing bytes")
    return np.frombuffer(data, dtype="<f8", offset=16, count=count).astype(float)


def save_state(path, state, vectorizer: TapVectorizer) -> None:
    """Persist a trained equalizer state together with its window alignment."""
    with open(path, "wb") as f:
        f.write(struct.pack("<4sI", STATE_MAGIC, FORMAT_VERSION))
        if isinstance(state, KlmsState):
            p = state.params
            f.write(struct.pack("<BIIddQQ", _KIND_KLMS, p.n_taps, vectorizer.center_offset,
                                p.mu, p.alpha, p.train_len, len(state)))
            f.write(np.ascontiguousarray(state.dictionary, dtype="<f8").tobytes())
            f.write(np.ascontiguousarray(state.coefficients, dtype="<f8").tobytes())
        elif isinstance(state, LmsState):
            f.write(struct.pack("<BIId", _KIND_LMS, state.n_taps,
                                vectorizer.center_offset, state.mu))
            f.write(state.weights.astype("<f8").tobytes())
        elif isinstance(state, DfeState):
            f.write(struct.pack("<BIIId", _KIND_DFE, state.n_fft, state.n_fbt,
                                vectorizer.center_offset, state.mu))
            f.write(state.ff_weights.astype("<f8").tobytes())
            f.write(state.fb_weights.astype("<f8").tobytes())
        else:
            raise ValueError(f"cannot persist state of type {type(state).__name__}")


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.off = 0
        self.path = path

    def unpack(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.off + size > len(self.data):
            raise FileFormatError(f"{self.path}: truncated (need {size} more bytes)")
        out = struct.unpack_from(fmt, self.data, self.off)
        self.off += size
        return out

    def floats(self, n: int) -> np.ndarray:
        size = 8 * n
        if self.off + size > len(self.data):
            raise FileFormatError(f"{self.path}: truncated float block")
        out = np.frombuffer(self.data, dtype="<f8", offset=self.off, count=n).astype(float)
        self.off += size
        return out

    def done(self):
        if self.off != len(self.data):
            raise FileFormatError(f"{self.path}: {len(self.data) - self.off} trailing bytes")


def load_state(path):
    """Load a persisted state; returns (state, vectorizer)."""
    r = _Reader(Path(path).read_bytes(), path)
    magic, version = r.unpack("<4sI")
    if magic != STATE_MAGIC:
        raise FileFormatError(f"{path}: bad magic {magic!r} (expected {STATE_MAGIC!r})")
    if version != FORMAT_VERSION:
        raise FileFormatError(f"{path}: unsupported version {version}")
    (kind,) = r.unpack("<B")
    if kind == _KIND_KLMS:
        n_taps, offset, mu, alpha, train_len, count = r.unpack("<IIddQQ")
        state = KlmsState(KlmsParams(mu=mu, alpha=alpha, n_taps=n_taps, train_len=train_len))
        state.reserve(max(count, 1))
        vectors = r.floats(count * n_taps).reshape(count, n_taps)
        coefficients = r.floats(count)
        r.done()
        state._vectors[:count] = vectors
        state._coefficients[:count] = coefficients
        state._size = count
        return state, TapVectorizer(n_taps, offset)
    if kind == _KIND_LMS:
        n_taps, offset, mu = r.unpack("<IId")
        state = LmsState(n_taps, mu)
        state.weights[:] = r.floats(n_taps)
        r.done()
        return state, TapVectorizer(n_taps, offset)
    if kind == _KIND_DFE:
        n_fft, n_fbt, offset, mu = r.unpack("<IIId")
        state = DfeState(n_fft, n_fbt, mu)
        state.ff_weights[:] = r.floats(n_fft)
        state.fb_weights[:] = r.floats(n_fbt)
        r.done()
        return state, TapVectorizer(n_fft, offset)
    raise FileFormatError(f"{path}: unknown state kind {kind}")


# ---------------------------------------------------------------------------
# JSON reports

def _config_to_dict(cfg: ExperimentConfig) -> dict:
    return {
        "preset": cfg.preset_name,
        "channel": {
            "h_pre": list(cfg.channel.h_pre),
            "a2": cfg.channel.a2,
            "a3": cfg.channel.a3,
            "h_post": list(cfg.channel.h_post),
            "snr_db": cfg.channel.snr_db,
            "seed": cfg.channel.seed,
        },
        "n_symbols": cfg.n_symbols,
        "master_seed": cfg.master_seed,
        "klms": {"mu": cfg.klms.mu, "alpha": cfg.klms.alpha,
                 "taps": cfg.klms.n_taps, "train_len": cfg.klms.train_len},
        "lms": {"taps": cfg.lms.taps, "mu": cfg.lms.mu, "train_len": cfg.lms.train_len},
        "dfe": {"fft": cfg.dfe.fft, "fbt": cfg.dfe.fbt, "mu": cfg.dfe.mu,
                "train_len": cfg.dfe.train_len},
        "sweep_taps": list(cfg.sweep_taps),
        "cores": {"count": cfg.cores.count,
                  "offsets_db": list(cfg.cores.offsets_db),
                  "seeds": list(cfg.cores.seeds) if cfg.cores.seeds is not None else None},
    }


def _config_from_dict(d: dict) -> ExperimentConfig:
    ch = d["channel"]
    return ExperimentConfig(
        channel=ChannelConfig(h_pre=tuple(ch["h_pre"]), a2=ch["a2"], a3=ch["a3"],
                              h_post=tuple(ch["h_post"]), snr_db=ch["snr_db"],
                              seed=ch["seed"]),
        preset_name=d["preset"],
        n_symbols=d["n_symbols"],
        master_seed=d["master_seed"],
        klms=KlmsParams(mu=d["klms"]["mu"], alpha=d["klms"]["alpha"],
                        n_taps=d["klms"]["taps"], train_len=d["klms"]["train_len"]),
        lms=LmsSettings(**d["lms"]),
        dfe=DfeSettings(**d["dfe"]),
        sweep_taps=tuple(d["sweep_taps"]),
        cores=CoreSettings(count=d["cores"]["count"],
                           offsets_db=tuple(d["cores"]["offsets_db"]),
                           seeds=tuple(d["cores"]["seeds"]) if d["cores"]["seeds"] else None),
    )


def _verdict_to_dict(v: FecVerdict) -> dict:
    return {"ber": v.ber, "kp4": v.passes_kp4, "hd": v.passes_hd, "sd": v.passes_sd}


def _result_to_dict(r: EqualizerResult) -> dict:
    return {"name": r.name, "ber": r.ber, "verdict": _verdict_to_dict(r.verdict),
            "train_len": r.train_len, "n_test": r.n_test}


def _result_from_dict(d: dict) -> EqualizerResult:
    v = d["verdict"]
    return EqualizerResult(
        name=d["name"], ber=d["ber"],
        verdict=FecVerdict(ber=v["ber"], passes_kp4=v["kp4"], passes_hd=v["hd"],
                           passes_sd=v["sd"]),
        train_len=d["train_len"], n_test=d["n_test"],
    )


def report_to_dict(report: ExperimentReport) -> dict:
    d = {
        "config": _config_to_dict(report.config),
        "test_start": report.test_start,
        "test_end": report.test_end,
        "results": {k: _result_to_dict(v) for k, v in report.results.items()},
        "mse": None,
        "sweep": None,
        "cores": None,
        "timing": None,
    }
    if report.mse is not None:
        d["mse"] = {
            "window": report.mse.window,
            "raw_db": {k: np.asarray(v).tolist() for k, v in report.mse.raw_db.items()},
            "smoothed_db": {k: np.asarray(v).tolist()
                            for k, v in report.mse.smoothed_db.items()},
        }
    if report.sweep is not None:
        d["sweep"] = [{"taps": row.taps, "ber": row.ber,
                       "verdict": _verdict_to_dict(row.verdict)} for row in report.sweep]
    if report.cores is not None:
        d["cores"] = [{"core": c.core, "snr_db": c.snr_db, "seed": c.seed,
                       "results": {k: _result_to_dict(v) for k, v in c.results.items()}}
                      for c in report.cores]
    if report.timing is not None:
        t = report.timing
        d["timing"] = {
            "klms_blocks": [list(b) for b in t.klms_blocks],
            "lms_blocks": [list(b) for b in t.lms_blocks],
            "klms_fit": {"slope_ns": t.klms_fit.slope_ns,
                         "intercept_ns": t.klms_fit.intercept_ns, "r2": t.klms_fit.r2},
            "lms_block_ratio": t.lms_block_ratio,
            "steps": t.steps,
            "klms_dict_entries": t.klms_dict_entries,
        }
    return d


def report_from_dict(d: dict) -> ExperimentReport:
    def _verdict(v):
        return FecVerdict(ber=v["ber"], passes_kp4=v["kp4"], passes_hd=v["hd"],
                          passes_sd=v["sd"])

    mse = None
    if d.get("mse") is not None:
        m = d["mse"]
        mse = MseCurves(
            window=m["window"],
            raw_db={k: np.asarray(v) for k, v in m["raw_db"].items()},
            smoothed_db={k: np.asarray(v) for k, v in m["smoothed_db"].items()},
        )
    sweep = None
    if d.get("sweep") is not None:
        sweep = tuple(SweepRow(taps=r["taps"], ber=r["ber"], verdict=_verdict(r["verdict"]))
                      for r in d["sweep"])
    cores = None
    if d.get("cores") is not None:
        cores = tuple(
            CoreResult(core=c["core"], snr_db=c["snr_db"], seed=c["seed"],
                       results={k: _result_from_dict(v) for k, v in c["results"].items()})
            for c in d["cores"]
        )
    timing = None
    if d.get("timing") is not None:
        t = d["timing"]
        timing = TimingReport(
            klms_blocks=tuple(tuple(b) for b in t["klms_blocks"]),
            lms_blocks=tuple(tuple(b) for b in t["lms_blocks"]),
            klms_fit=TimingFit(slope_ns=t["klms_fit"]["slope_ns"],
                               intercept_ns=t["klms_fit"]["intercept_ns"],
                               r2=t["klms_fit"]["r2"]),
            lms_block_ratio=t["lms_block_ratio"],
            steps=t["steps"],
            klms_dict_entries=t["klms_dict_entries"],
        )
    return ExperimentReport(
        config=_config_from_dict(d["config"]),
        test_start=d["test_start"],
        test_end=d["test_end"],
        results={k: _result_from_dict(v) for k, v in d["results"].items()},
        mse=mse,
        sweep=sweep,
        cores=cores,
        timing=timing,
    )


def save_report(path, report: ExperimentReport) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report_to_dict(report), f, indent=1)
        f.write("\n")


def load_report(path) -> ExperimentReport:
    try:
        with open(path, "r", encoding="utf-8") as f:
            d = json.load(f)
    except json.JSONDecodeError as e:
        raise FileFormatError(f"{path}: not a valid report file ({e})") from None
    try:
        return report_from_dict(d)
    except (KeyError, TypeError) as e:
        raise FileFormatError(f"{path}: malformed report structure ({e!r})") from None


# ---------------------------------------------------------------------------
# CSV emission

def _f(x: float) -> str:
    return repr(float(x))


def _flags(v: FecVerdict) -> str:
    return f"{int(v.passes_kp4)},{int(v.passes_hd)},{int(v.passes_sd)}"


def emit_csv(report: ExperimentReport, kind: str, path) -> None:
    """Render one report section to CSV; raises MissingSectionError if absent."""
    lines: list[str]
    if kind == "sweep":
        if not report.sweep:
            raise MissingSectionError("report has no sweep section")
        lines = ["taps,ber,kp4,hd,sd"]
        lines += [f"{r.taps},{_f(r.ber)},{_flags(r.verdict)}" for r in report.sweep]
    elif kind == "multicore":
        if not report.cores:
            raise MissingSectionError("report has no multicore section")
        lines = ["core,equalizer,ber,kp4,hd,sd"]
        for c in report.cores:
            for name in EQUALIZER_NAMES:
                if name in c.results:
                    r = c.results[name]
                    lines.append(f"{c.core},{name},{_f(r.ber)},{_flags(r.verdict)}")
    elif kind.startswith("mse."):
        name = kind[4:]
        if report.mse is None or name not in report.mse.raw_db:
            raise MissingSectionError(f"report has no MSE curve for {name!r}")
        raw = np.asarray(report.mse.raw_db[name])
        sm = np.asarray(report.mse.smoothed_db[name])
        w = raw.size - sm.size + 1  # effective window (curves shorter than the
        # nominal window are smoothed over their full length)
        lines = ["sample,mse_db_raw,mse_db_smoothed"]
        for i in range(raw.size):
            smoothed = _f(sm[i - w + 1]) if i + 1 >= w else ""
            lines.append(f"{i + 1},{_f(raw[i])},{smoothed}")
    elif kind.startswith("timing."):
        name = kind[7:]
        if report.timing is None:
            raise MissingSectionError("report has no timing section")
        if name == "klms":
            blocks = report.timing.klms_blocks
        elif name == "lms":
            blocks = report.timing.lms_blocks
        else:
            raise MissingSectionError(f"no timing table for {name!r}")
        lines = ["iter_block,mean_step_ns"]
        lines += [f"{int(b[0])},{_f(b[1])}" for b in blocks]
    else:
        raise MissingSectionError(f"unknown CSV kind {kind!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
