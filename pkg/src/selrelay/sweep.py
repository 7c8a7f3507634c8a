"""Grid sweeps over scheme x metric x N_R x SNR, and the CSV format they produce."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from . import analytic as an
from .chanmodel import NetworkConfig, OutageSpec, Scheme, db_to_linear
from .montecarlo import MIN_TRIALS, SimMode, estimate_ber, estimate_capacity, estimate_outage
from .quadrature import Density, IntegralSpec, Kernel, integrate

__all__ = [
    "CSV_HEADER",
    "SOURCES",
    "METRICS",
    "SweepSpec",
    "SweepRow",
    "parse_grid",
    "run_sweep",
    "format_csv",
    "read_csv",
    "CsvFormatError",
]

CSV_HEADER = ["scheme", "metric", "n_relays", "gbar0_db", "gbar1_db", "rate", "mode",
              "source", "value", "stderr", "trials", "seed"]
METRICS = ("ber", "outage", "capacity")
SOURCES = ("analytic", "quadrature", "mc")
NA = "NA"
QUAD_RTOL = 1e-10


class CsvFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_grid(text: str) -> List[float]:
    """``start:stop:step`` (stop inclusive), or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"grid must be start:stop:step, got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if not step > 0:
        raise ValueError(f"grid step must be positive, got {step}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    if count < 1:
        raise ValueError(f"empty grid {text!r}")
    return [round(start + k * step, 10) for k in range(count)]


@dataclass
class SweepSpec:
    """Everything a sweep needs. ``link`` selects which mean(s) follow the SNR grid."""

    schemes: Sequence[Scheme]
    metrics: Sequence[str]
    n_relays: Sequence[int]
    snr_db: Sequence[float]
    link: str = "both"
    gbar0_db: Optional[float] = None
    gbar1_db: Optional[float] = None
    rates: Sequence[float] = (0.5,)
    mode: SimMode = SimMode.SEMI_ANALYTIC
    trials: int = 10**6
    seed: int = 1
    conv: an.CapacityConvention = an.CapacityConvention.HALF
    sources: Sequence[str] = ("analytic",)
    streams: int = 8
    workers: int = 1

    def __post_init__(self):
        if not self.schemes or not self.metrics or not self.n_relays or not self.snr_db:
            raise ValueError("sweep grids must be non-empty")
        if self.link not in ("both", "gbar0", "gbar1"):
            raise ValueError(f"link must be both, gbar0 or gbar1, got {self.link!r}")
        if self.link == "gbar0" and self.gbar1_db is None:
            raise ValueError("sweeping gbar0 alone needs a fixed gbar1")
        if self.link == "gbar1" and self.gbar0_db is None and any(s.uses_direct_path for s in self.schemes):
            raise ValueError("SCR/ASR sweeps over gbar1 alone need a fixed gbar0")
        for m in self.metrics:
            if m not in METRICS:
                raise ValueError(f"unknown metric {m!r}")
        for s in self.sources:
            if s not in SOURCES:
                raise ValueError(f"unknown source {s!r}")
        if "outage" in self.metrics and not self.rates:
            raise ValueError("outage sweeps need at least one rate")
        if "mc" in self.sources and self.trials < MIN_TRIALS:
            raise ValueError(f"simulation needs trials >= {MIN_TRIALS}")

    def link_db(self, snr: float) -> Tuple[Optional[float], float]:
        if self.link == "both":
            return snr, snr
        if self.link == "gbar0":
            return snr, self.gbar1_db
        return self.gbar0_db, snr


@dataclass
class SweepRow:
    scheme: str
    metric: str
    n_relays: int
    gbar0_db: Optional[float]
    gbar1_db: float
    rate: Optional[float]
    mode: Optional[str]
    source: str
    value: float
    stderr: Optional[float] = None
    trials: Optional[int] = None
    seed: Optional[int] = None

    def cells(self) -> List[str]:
        return [
            self.scheme, self.metric, str(self.n_relays), _num(self.gbar0_db), _num(self.gbar1_db),
            _num(self.rate), self.mode or NA, self.source, _num(self.value), _num(self.stderr),
            NA if self.trials is None else str(self.trials), NA if self.seed is None else str(self.seed),
        ]


def _num(x: Optional[float]) -> str:
    return NA if x is None else "%.10e" % x


def analytic_value(scheme: Scheme, metric: str, cfg: NetworkConfig, rate: Optional[float],
                   conv: an.CapacityConvention) -> Optional[float]:
    """Closed form (numeric for ASR BER); None where no closed form exists."""
    if metric == "ber":
        return {Scheme.SR: an.ber_sr, Scheme.SCR: an.ber_scr, Scheme.ASR: an.ber_asr_numeric}[scheme](cfg)
    if scheme is Scheme.ASR:
        return None
    if metric == "outage":
        fn = an.outage_scr if scheme is Scheme.SCR else an.outage_sr
        return fn(cfg, OutageSpec(rate))
    fn = an.capacity_scr if scheme is Scheme.SCR else an.capacity_sr
    return fn(cfg, conv)


_DENSITY = {Scheme.SR: Density.PDF_GAMMA1, Scheme.SCR: Density.PDF_BETA, Scheme.ASR: Density.PDF_MAX}


def quadrature_value(scheme: Scheme, metric: str, cfg: NetworkConfig, rate: Optional[float],
                     conv: an.CapacityConvention) -> float:
    dens = _DENSITY[scheme]
    if metric == "ber":
        spec = IntegralSpec(Kernel.BER, dens)
    elif metric == "outage":
        spec = IntegralSpec(Kernel.OUTAGE_INDICATOR, dens, upper=OutageSpec(rate).threshold)
    else:
        spec = IntegralSpec(Kernel.CAPACITY, dens, prelog=conv.prelog)
    return integrate(spec, cfg, QUAD_RTOL).value


def mc_result(scheme: Scheme, metric: str, cfg: NetworkConfig, rate: Optional[float], spec: SweepSpec):
    if metric == "ber":
        return estimate_ber(scheme, spec.mode, cfg, spec.trials, spec.seed, spec.streams, spec.workers)
    if metric == "outage":
        return estimate_outage(scheme, cfg, OutageSpec(rate), spec.trials, spec.seed, spec.streams, spec.workers)
    return estimate_capacity(scheme, cfg, spec.conv, spec.trials, spec.seed, spec.streams, spec.workers)


def run_sweep(spec: SweepSpec) -> Iterator[SweepRow]:
    """Yield rows in (scheme, metric, N_R, SNR, rate, source) order."""
    for scheme in spec.schemes:
        for metric in spec.metrics:
            rates: Sequence[Optional[float]] = spec.rates if metric == "outage" else (None,)
            for nr in spec.n_relays:
                for snr in spec.snr_db:
                    g0_db, g1_db = spec.link_db(snr)
                    if not scheme.uses_direct_path:
                        g0_db = None
                    cfg = NetworkConfig(nr, db_to_linear(g1_db), None if g0_db is None else db_to_linear(g0_db))
                    for rate in rates:
                        base = dict(scheme=scheme.value, metric=metric, n_relays=nr, gbar0_db=g0_db,
                                    gbar1_db=g1_db, rate=rate)
                        for source in spec.sources:
                            if source == "analytic":
                                v = analytic_value(scheme, metric, cfg, rate, spec.conv)
                                if v is not None:
                                    yield SweepRow(mode=None, source=source, value=v, **base)
                            elif source == "quadrature":
                                v = quadrature_value(scheme, metric, cfg, rate, spec.conv)
                                yield SweepRow(mode=None, source=source, value=v, **base)
                            else:
                                r = mc_result(scheme, metric, cfg, rate, spec)
                                mode = spec.mode.value if metric == "ber" else None
                                yield SweepRow(mode=mode, source=source, value=r.estimate, stderr=r.std_error,
                                               trials=r.n_trials, seed=r.seed, **base)


def format_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.cells())
    return buf.getvalue()


def _parse_opt(cell: str, conv, line: int, name: str):
    if cell == NA:
        return None
    try:
        return conv(cell)
    except ValueError:
        raise CsvFormatError(line, f"bad {name} value {cell!r}") from None


def read_csv(text: str) -> List[SweepRow]:
    """Parse a sweep CSV; malformed content raises :class:`CsvFormatError` with the line number."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError(1, "empty file") from None
    if header != CSV_HEADER:
        raise CsvFormatError(1, f"unexpected header {','.join(header)}")
    rows = []
    for cells in reader:
        line = reader.line_num
        if not cells:
            continue
        if len(cells) != len(CSV_HEADER):
            raise CsvFormatError(line, f"expected {len(CSV_HEADER)} fields, got {len(cells)}")
        d: Dict[str, str] = dict(zip(CSV_HEADER, cells))
        if d["scheme"] not in [s.value for s in Scheme]:
            raise CsvFormatError(line, f"unknown scheme {d['scheme']!r}")
        if d["metric"] not in METRICS:
            raise CsvFormatError(line, f"unknown metric {d['metric']!r}")
        nr = _parse_opt(d["n_relays"], int, line, "n_relays")
        g1 = _parse_opt(d["gbar1_db"], float, line, "gbar1_db")
        value = _parse_opt(d["value"], float, line, "value")
        if nr is None or g1 is None or value is None:
            raise CsvFormatError(line, "n_relays, gbar1_db and value are required")
        rows.append(SweepRow(
            scheme=d["scheme"], metric=d["metric"], n_relays=nr,
            gbar0_db=_parse_opt(d["gbar0_db"], float, line, "gbar0_db"), gbar1_db=g1,
            rate=_parse_opt(d["rate"], float, line, "rate"),
            mode=None if d["mode"] == NA else d["mode"], source=d["source"], value=value,
            stderr=_parse_opt(d["stderr"], float, line, "stderr"),
            trials=_parse_opt(d["trials"], int, line, "trials"),
            seed=_parse_opt(d["seed"], int, line, "seed"),
        ))
    return rows
