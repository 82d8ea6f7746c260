"""Command-line front end.

Subcommands: simulate, train, equalize, sweep, mse, multicore, complexity,
report. Results go to files; diagnostics go to stderr with a machine-readable
prefix. Exit codes: 0 success, 1 configuration error (including usage), 2
data or file-format error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .equalizers import (
    KlmsState,
    LmsState,
    TapVectorizer,
    dfe_equalize,
    dfe_train,
    klms_equalize,
    klms_train,
    lms_equalize,
    lms_train,
)
from .experiments import (
    ExperimentConfig,
    measure_complexity,
    prepare_data,
    run_mse_comparison,
    run_multicore,
    run_tap_sweep,
)
from .fileio import FileFormatError, emit_csv, load_report, load_state, read_waveform, save_report, save_state, write_waveform
from .pam import bit_error_rate, fec_verdict, pam4_to_bits, slice_pam4
from .runconfig import ConfigError, default_config, parse_config_text


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise _UsageError(message)


def _diag(kind: str, message: str) -> None:
    print(f"kafeq: {kind}: {message}", file=sys.stderr)


def _derived_path(path: str, tag: str) -> Path:
    p = Path(path)
    return p.with_name(p.stem + "." + tag + p.suffix)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="run configuration file")
    p.add_argument("--preset", metavar="NAME", help="channel preset override")
    p.add_argument("--seed", type=int, metavar="N", help="master seed override")
    p.add_argument("--n", type=int, metavar="N", help="total symbols override")
    p.add_argument("--taps", metavar="N[,N...]", help="tap count (list for sweep)")
    p.add_argument("--klms.taps", dest="klms_taps", type=int, metavar="N")
    p.add_argument("--klms.alpha", dest="klms_alpha", type=float, metavar="X")
    p.add_argument("--klms.mu", dest="klms_mu", type=float, metavar="X")
    p.add_argument("--klms.train_len", dest="klms_train_len", type=int, metavar="N")
    p.add_argument("--lms.taps", dest="lms_taps", type=int, metavar="N")
    p.add_argument("--lms.mu", dest="lms_mu", type=float, metavar="X")
    p.add_argument("--lms.train_len", dest="lms_train_len", type=int, metavar="N")
    p.add_argument("--dfe.fft", dest="dfe_fft", type=int, metavar="N")
    p.add_argument("--dfe.fbt", dest="dfe_fbt", type=int, metavar="N")
    p.add_argument("--dfe.mu", dest="dfe_mu", type=float, metavar="X")
    p.add_argument("--dfe.train_len", dest="dfe_train_len", type=int, metavar="N")


def _parse_taps_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t.strip()) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"--taps expects integers, got {text!r}") from None


def _build_config(args, taps_role: str | None = None) -> ExperimentConfig:
    """Defaults, then config file, then command-line overrides."""
    if args.config is not None:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config file: {e}") from None
        cfg = parse_config_text(text)
    else:
        cfg = default_config()
    try:
        if args.preset is not None:
            from .channel import get_preset

            cfg = replace(cfg, channel=get_preset(args.preset), preset_name=args.preset)
        if args.n is not None:
            cfg = replace(cfg, n_symbols=args.n)
        if args.seed is not None:
            cfg = replace(cfg, master_seed=args.seed)
        klms_over = {}
        if args.klms_taps is not None:
            klms_over["n_taps"] = args.klms_taps
        if args.klms_alpha is not None:
            klms_over["alpha"] = args.klms_alpha
        if args.klms_mu is not None:
            klms_over["mu"] = args.klms_mu
        if args.klms_train_len is not None:
            klms_over["train_len"] = args.klms_train_len
        if klms_over:
            cfg = replace(cfg, klms=replace(cfg.klms, **klms_over))
        lms_over = {}
        if args.lms_taps is not None:
            lms_over["taps"] = args.lms_taps
        if args.lms_mu is not None:
            lms_over["mu"] = args.lms_mu
        if args.lms_train_len is not None:
            lms_over["train_len"] = args.lms_train_len
        if lms_over:
            cfg = replace(cfg, lms=replace(cfg.lms, **lms_over))
        dfe_over = {}
        if args.dfe_fft is not None:
            dfe_over["fft"] = args.dfe_fft
        if args.dfe_fbt is not None:
            dfe_over["fbt"] = args.dfe_fbt
        if args.dfe_mu is not None:
            dfe_over["mu"] = args.dfe_mu
        if args.dfe_train_len is not None:
            dfe_over["train_len"] = args.dfe_train_len
        if dfe_over:
            cfg = replace(cfg, dfe=replace(cfg.dfe, **dfe_over))
        if args.taps is not None:
            taps = _parse_taps_list(args.taps)
            if taps_role == "sweep":
                cfg = replace(cfg, sweep_taps=taps)
            else:
                if len(taps) != 1:
                    raise ConfigError("--taps takes a single value here")
                cfg = replace(cfg, klms=replace(cfg.klms, n_taps=taps[0]))
        return cfg
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _cmd_simulate(args) -> int:
    cfg = _build_config(args)
    _, tx, rx = prepare_data(cfg)
    write_waveform(args.out, rx)
    write_waveform(_derived_path(args.out, "clean"), tx)
    return 0


def _load_training_data(args):
    rx = read_waveform(args.infile)
    tx = read_waveform(args.desired)
    if rx.size != tx.size:
        raise ValueError(
            f"received and desired waveforms differ in length ({rx.size} vs {tx.size})"
        )
    return rx, tx


def _cmd_train(args) -> int:
    cfg = _build_config(args)
    rx, tx = _load_training_data(args)
    if args.equalizer == "klms":
        params = cfg.klms
        if params.train_len > rx.size:
            raise ValueError(
                f"klms.train_len={params.train_len} exceeds waveform length {rx.size}"
            )
        state, _ = klms_train(rx, tx, params)
        v = TapVectorizer(params.n_taps)
    elif args.equalizer == "lms":
        s = cfg.lms
        if s.train_len > rx.size:
            raise ValueError(
                f"lms.train_len={s.train_len} exceeds waveform length {rx.size}"
            )
        state, _ = lms_train(rx, tx, n_taps=s.taps, mu=s.mu, train_len=s.train_len)
        v = TapVectorizer(s.taps)
    else:
        s = cfg.dfe
        if s.train_len > rx.size:
            raise ValueError(
                f"dfe.train_len={s.train_len} exceeds waveform length {rx.size}"
            )
        state, _ = dfe_train(rx, tx, n_fft=s.fft, n_fbt=s.fbt, mu=s.mu, train_len=s.train_len)
        v = TapVectorizer(s.fft)
    save_state(args.out, state, v)
    return 0


def _cmd_equalize(args) -> int:
    state, v = load_state(args.state)
    if args.taps is not None:
        taps = _parse_taps_list(args.taps)
        if len(taps) != 1 or taps[0] != v.n_taps:
            raise ValueError(
                f"tap dimension mismatch: state has {v.n_taps} taps, "
                f"flags request {args.taps}"
            )
    rx = read_waveform(args.infile)
    if isinstance(state, KlmsState):
        soft = klms_equalize(state, rx, v)
        decisions = slice_pam4(soft)
        name = "klms"
    elif isinstance(state, LmsState):
        soft = lms_equalize(state, rx, v)
        decisions = slice_pam4(soft)
        name = "lms"
    else:
        soft, decisions = dfe_equalize(state, rx, v)
        name = "dfe"
    if args.out is not None:
        write_waveform(args.out, soft)
    if args.report is not None:
        if args.desired is None:
            raise ConfigError("--report requires --desired for the reference bits")
        tx = read_waveform(args.desired)
        ber = bit_error_rate(pam4_to_bits(tx), pam4_to_bits(decisions))
        verdict = fec_verdict(ber)
        Path(args.report).write_text(
            "equalizer,ber,kp4,hd,sd\n"
            f"{name},{ber!r},{int(verdict.passes_kp4)},{int(verdict.passes_hd)},"
            f"{int(verdict.passes_sd)}\n",
            encoding="utf-8",
        )
    return 0


def _cmd_sweep(args) -> int:
    cfg = _build_config(args, taps_role="sweep")
    report = run_tap_sweep(cfg)
    emit_csv(report, "sweep", args.out)
    if args.report is not None:
        save_report(args.report, report)
    return 0


def _cmd_mse(args) -> int:
    cfg = _build_config(args)
    report = run_mse_comparison(cfg)
    emit_csv(report, "mse.klms", _derived_path(args.out, "klms"))
    emit_csv(report, "mse.dfe", _derived_path(args.out, "dfe"))
    if args.report is not None:
        save_report(args.report, report)
    return 0


def _cmd_multicore(args) -> int:
    cfg = _build_config(args)
    report = run_multicore(cfg)
    emit_csv(report, "multicore", args.out)
    if args.report is not None:
        save_report(args.report, report)
    return 0


def _cmd_complexity(args) -> int:
    cfg = _build_config(args)
    report = measure_complexity(cfg)
    emit_csv(report, "timing.klms", _derived_path(args.out, "klms"))
    emit_csv(report, "timing.lms", _derived_path(args.out, "lms"))
    if args.report is not None:
        save_report(args.report, report)
    return 0


def _cmd_report(args) -> int:
    report = load_report(args.infile)
    emit_csv(report, args.kind, args.out)
    return 0


def _make_parser() -> _Parser:
    parser = _Parser(prog="kafeq", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("simulate", parents=[], help="write a clean/received waveform pair")
    _add_common(p)
    p.add_argument("--out", required=True, metavar="PATH",
                   help="received waveform path (clean symbols go to *.clean)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("train", help="fit an equalizer on a waveform pair")
    _add_common(p)
    p.add_argument("--equalizer", required=True, choices=["klms", "lms", "dfe"])
    p.add_argument("--in", dest="infile", required=True, metavar="PATH",
                   help="received waveform")
    p.add_argument("--desired", required=True, metavar="PATH", help="clean symbol waveform")
    p.add_argument("--out", required=True, metavar="PATH", help="state file to write")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("equalize", help="apply a persisted state to a waveform")
    _add_common(p)
    p.add_argument("--state", required=True, metavar="PATH")
    p.add_argument("--in", dest="infile", required=True, metavar="PATH")
    p.add_argument("--desired", metavar="PATH", help="clean symbols for BER measurement")
    p.add_argument("--out", metavar="PATH", help="equalized waveform to write")
    p.add_argument("--report", metavar="PATH", help="BER/verdict CSV to write")
    p.set_defaults(func=_cmd_equalize)

    for name, func, out_help in (
        ("sweep", _cmd_sweep, "sweep CSV (taps,ber,kp4,hd,sd)"),
        ("mse", _cmd_mse, "base CSV path (*.klms / *.dfe files are written)"),
        ("multicore", _cmd_multicore, "per-core CSV"),
        ("complexity", _cmd_complexity, "base CSV path (*.klms / *.lms files are written)"),
    ):
        p = sub.add_parser(name, help=f"run the {name} experiment")
        _add_common(p)
        p.add_argument("--out", required=True, metavar="PATH", help=out_help)
        p.add_argument("--report", metavar="PATH", help="full JSON report to write")
        p.set_defaults(func=func)

    p = sub.add_parser("report", help="render a persisted JSON report to CSV")
    p.add_argument("--in", dest="infile", required=True, metavar="PATH")
    p.add_argument("--kind", required=True,
                   choices=["sweep", "multicore", "mse.klms", "mse.dfe",
                            "timing.klms", "timing.lms"])
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = _make_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            parser.print_usage(sys.stderr)
            _diag("config-error", "a subcommand is required")
            return 1
        return args.func(args)
    except _UsageError as e:
        parser.print_usage(sys.stderr)
        _diag("config-error", str(e))
        return 1
    except ConfigError as e:
        _diag("config-error", str(e))
        return 1
    except FileFormatError as e:
        _diag("data-error", str(e))
        return 2
    except (ValueError, OSError) as e:
        _diag("data-error", str(e))
        return 2


if __name__ == "__main__":
    sys.exit(main())
