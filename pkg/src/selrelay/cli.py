"""Command-line front end.

Exit codes: 0 success, 1 usage, 2 numeric/validation failure, 3 I/O.
"""

from __future__ import annotations

import argparse
import sys
import time
from collections import defaultdict
from typing import List, Optional, Sequence

from . import analytic as an
from .chanmodel import NetworkConfig, OutageSpec, Scheme, db_to_linear
from .montecarlo import SimMode
from .quadrature import QuadratureError
from .specfun import ConvergenceError, DomainError
from .sweep import CsvFormatError, SweepSpec, analytic_value, format_csv, mc_result, parse_grid, quadrature_value, read_csv, run_sweep
from .validation import run_validation

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

_MODES = {"semi": SimMode.SEMI_ANALYTIC, "genie": SimMode.SYMBOL_GENIE, "df": SimMode.SYMBOL_DF}
_PRELOG = {"half": an.CapacityConvention.HALF, "full": an.CapacityConvention.FULL}

# figure presets: trials for BER/outage and for capacity, fixed seed
PRESET_TRIALS = 10**6
PRESET_CAP_TRIALS = 10**5
PRESET_SEED = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> List[int]:
    out = []
    for part in text.split(","):
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _float_list(text: str) -> List[float]:
    return [float(p) for p in text.split(",")]


def _add_common(p: argparse.ArgumentParser, grid: bool = True) -> None:
    p.add_argument("--scheme", default=None, help="sr|scr|asr, comma separated")
    p.add_argument("--metric", default=None, help="ber|outage|capacity, comma separated")
    p.add_argument("--nr", type=_int_list, default=None, help="relay counts, e.g. 1,2,4 or 1-4")
    p.add_argument("--gbar0-db", type=float, default=None, help="mean S-D SNR in dB")
    p.add_argument("--gbar1-db", type=float, default=None, help="mean relay-link SNR in dB")
    if grid:
        p.add_argument("--snr-db", default=None, help="start:stop:step grid applied to the swept link(s)")
        p.add_argument("--sweep-link", choices=["both", "gbar0", "gbar1"], default="both")
    p.add_argument("--rate", type=_float_list, default=None, help="target rate(s) R in bits/s/Hz")
    p.add_argument("--mode", choices=sorted(_MODES), default="semi")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--prelog", choices=sorted(_PRELOG), default="half")
    p.add_argument("--streams", type=int, default=8)
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="selrelay", description="Selection relaying performance: closed forms, quadrature, Monte Carlo.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate one operating point")
    _add_common(p, grid=False)
    p.add_argument("--quad", action="store_true", help="also evaluate the quadrature oracle")

    p = sub.add_parser("sweep", help="grid sweep to CSV")
    _add_common(p)
    p.add_argument("--sources", default="analytic", help="analytic,quadrature,mc")
    p.add_argument("--out", default=None, help="output CSV path (default stdout)")

    for name, desc in (("fig2", "SCR BER vs SNR, N_R=1..4"), ("fig3", "SR BER vs SNR, N_R=1..4"),
                       ("fig4", "ASR BER vs SNR, N_R=1..4"), ("fig5", "SCR and SR capacity vs N_R")):
        p = sub.add_parser(name, help=f"preset: {desc}")
        p.add_argument("--out", default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--seed", type=int, default=PRESET_SEED)
        p.add_argument("--no-mc", action="store_true", help="analytic rows only")
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("validate", help="closed form / quadrature / Monte Carlo agreement report")
    p.add_argument("--nr", type=_int_list, default=[1, 2, 3, 4])
    p.add_argument("--snr-db", default="0:20:5")
    p.add_argument("--rate", type=_float_list, default=[0.5, 1.0])
    p.add_argument("--trials", type=int, default=10**6)
    p.add_argument("--cap-trials", type=int, default=10**5)
    p.add_argument("--asr-trials", type=int, default=None, help="default: 10 x --trials")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--streams", type=int, default=8)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--quiet", action="store_true", help="print failures and summary only")

    p = sub.add_parser("slope", help="diversity order from a sweep CSV")
    p.add_argument("csv")
    p.add_argument("--scheme", default=None)
    p.add_argument("--nr", type=_int_list, default=None)
    p.add_argument("--metric", default="ber")
    p.add_argument("--source", default="analytic")
    p.add_argument("--window-db", type=float, default=10.0, help="fit over the top WINDOW dB of each curve")
    p.add_argument("--min-db", type=float, default=None)
    p.add_argument("--max-db", type=float, default=None)
    return parser


def _schemes(text: Optional[str]) -> List[Scheme]:
    if text is None:
        raise UsageError("--scheme is required")
    try:
        return [Scheme(s.strip().lower()) for s in text.split(",")]
    except ValueError:
        raise UsageError(f"unknown scheme in {text!r}") from None


def _metrics(text: Optional[str]) -> List[str]:
    if text is None:
        raise UsageError("--metric is required")
    return [m.strip().lower() for m in text.split(",")]


def cmd_eval(args) -> int:
    schemes = _schemes(args.scheme)
    metrics = _metrics(args.metric)
    if len(schemes) != 1 or len(metrics) != 1:
        raise UsageError("eval takes a single --scheme and --metric")
    scheme, metric = schemes[0], metrics[0]
    if metric not in ("ber", "outage", "capacity"):
        raise UsageError(f"unknown metric {metric!r}")
    nrs = args.nr or [1]
    if len(nrs) != 1:
        raise UsageError("eval takes a single --nr")
    if scheme.uses_direct_path and args.gbar0_db is None:
        raise UsageError(f"scheme {scheme.value} needs --gbar0-db")
    rate = None
    if metric == "outage":
        if not args.rate or len(args.rate) != 1:
            raise UsageError("outage needs a single --rate")
        rate = args.rate[0]
    g1_db = 10.0 if args.gbar1_db is None else args.gbar1_db
    g0_db = args.gbar0_db if scheme.uses_direct_path else None
    cfg = NetworkConfig(nrs[0], db_to_linear(g1_db), None if g0_db is None else db_to_linear(g0_db))
    conv = _PRELOG[args.prelog]

    g0_txt = "NA" if g0_db is None else f"{g0_db:g}"
    print(f"scheme={scheme.value} metric={metric} n_relays={cfg.n_relays} gbar0_db={g0_txt} gbar1_db={g1_db:g}"
          + (f" rate={rate:g}" if rate is not None else "")
          + (f" prelog={conv.value}" if metric == "capacity" else ""))
    ref = analytic_value(scheme, metric, cfg, rate, conv)
    if ref is not None:
        label = "numeric" if scheme is Scheme.ASR else "analytic"
        print(f"{label:<11s} {ref:.6g}")
    if args.quad or ref is None:
        q = quadrature_value(scheme, metric, cfg, rate, conv)
        delta = "" if ref is None else f"  rel_delta={abs(q - ref) / abs(ref) if ref else abs(q - ref):.2e}"
        print(f"{'quadrature':<11s} {q:.6g}{delta}")
        ref = q if ref is None else ref
    if args.trials is not None:
        spec = SweepSpec(schemes=[scheme], metrics=[metric], n_relays=nrs, snr_db=[g1_db],
                         rates=[rate] if rate is not None else [0.5], mode=_MODES[args.mode], trials=args.trials,
                         seed=args.seed, conv=conv, sources=["mc"], streams=args.streams, workers=args.workers,
                         link="gbar1", gbar0_db=g0_db)
        res = mc_result(scheme, metric, cfg, rate, spec)
        mode = f" mode={args.mode}" if metric == "ber" else ""
        print(f"{'mc':<11s} {res.estimate:.6g} +/- {res.std_error:.2g}  z={res.z_score(ref):+.2f}"
              f"  trials={res.n_trials} seed={res.seed}{mode}")
    return EXIT_OK


def _sweep_spec(args) -> SweepSpec:
    if args.snr_db is None:
        raise UsageError("--snr-db start:stop:step is required")
    try:
        grid = parse_grid(args.snr_db)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sources = [s.strip() for s in args.sources.split(",")]
    trials = args.trials if args.trials is not None else PRESET_TRIALS
    try:
        return SweepSpec(
            schemes=_schemes(args.scheme), metrics=_metrics(args.metric), n_relays=args.nr or [1],
            snr_db=grid, link=args.sweep_link, gbar0_db=args.gbar0_db, gbar1_db=args.gbar1_db,
            rates=args.rate or [0.5], mode=_MODES[args.mode], trials=trials, seed=args.seed,
            conv=_PRELOG[args.prelog], sources=sources, streams=args.streams, workers=args.workers,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(text: str, out: Optional[str]) -> int:
    if out is None:
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"error: cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_sweep(spec: SweepSpec, out: Optional[str]) -> int:
    return _emit(format_csv(run_sweep(spec)), out)


def preset_spec(name: str, trials: Optional[int] = None, seed: int = PRESET_SEED, mc: bool = True,
                workers: int = 1) -> List[SweepSpec]:
    sources = ["analytic", "mc"] if mc else ["analytic"]
    if name in ("fig2", "fig3", "fig4"):
        scheme = {"fig2": Scheme.SCR, "fig3": Scheme.SR, "fig4": Scheme.ASR}[name]
        return [SweepSpec(schemes=[scheme], metrics=["ber"], n_relays=[1, 2, 3, 4], snr_db=parse_grid("0:30:2"),
                          trials=trials or PRESET_TRIALS, seed=seed, sources=sources, workers=workers)]
    return [SweepSpec(schemes=[Scheme.SCR, Scheme.SR], metrics=["capacity"], n_relays=list(range(1, 11)),
                      snr_db=[0.0, 5.0, 10.0, 15.0, 20.0], trials=trials or PRESET_CAP_TRIALS, seed=seed,
                      sources=sources, workers=workers)]


def cmd_preset(args) -> int:
    specs = preset_spec(args.command, args.trials, args.seed, not args.no_mc, args.workers)
    rows = [row for spec in specs for row in run_sweep(spec)]
    return _emit(format_csv(rows), args.out)


def cmd_validate(args) -> int:
    try:
        grid = parse_grid(args.snr_db)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    start = time.perf_counter()
    report = run_validation(args.nr, grid, args.rate, args.trials, args.cap_trials, args.asr_trials, args.seed,
                            args.streams, args.workers,
                            progress=None if args.quiet else (lambda m: print(f"... {m}", file=sys.stderr)))
    for line in report.lines():
        if args.quiet and line.startswith("  [") and "[FAIL]" not in line:
            continue
        print(line)
    print(f"elapsed: {time.perf_counter() - start:.1f} s")
    return EXIT_OK if report.ok else EXIT_NUMERIC


def cmd_slope(args) -> int:
    try:
        with open(args.csv, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read {args.csv}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        rows = read_csv(text)
    except CsvFormatError as exc:
        print(f"error: {args.csv}: {exc}", file=sys.stderr)
        return EXIT_IO
    curves = defaultdict(list)
    for r in rows:
        if r.metric != args.metric or r.source != args.source:
            continue
        if args.scheme and r.scheme != args.scheme:
            continue
        if args.nr and r.n_relays not in args.nr:
            continue
        curves[(r.scheme, r.n_relays, r.mode, r.rate)].append(r)
    if not curves:
        print("error: no matching curves in the CSV", file=sys.stderr)
        return EXIT_USAGE
    for (scheme, nr, mode, rate), pts in sorted(curves.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        swept_g1 = len({p.gbar1_db for p in pts}) > 1
        xy = sorted(((p.gbar1_db if swept_g1 else p.gbar0_db), p.value) for p in pts)
        xy = [(x, v) for x, v in xy
              if (args.min_db is None or x >= args.min_db) and (args.max_db is None or x <= args.max_db)]
        order = an.diversity_order_estimate(xy, args.window_db)
        expected = nr if scheme == "sr" else nr + 1
        print(f"scheme={scheme} n_relays={nr} source={args.source} points={len(xy)} "
              f"window={xy[-1][0] - args.window_db:g}-{xy[-1][0]:g} dB order={order:.3f} "
              f"expected={expected} deviation={order - expected:+.3f}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return EXIT_USAGE
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "sweep":
            return cmd_sweep(_sweep_spec(args), args.out)
        if args.command in ("fig2", "fig3", "fig4", "fig5"):
            return cmd_preset(args)
        if args.command == "validate":
            return cmd_validate(args)
        return cmd_slope(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except an.StabilityError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, DomainError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, ConvergenceError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
