"""Three-way agreement report: closed form vs quadrature vs Monte Carlo."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

from . import analytic as an
from .chanmodel import NetworkConfig, OutageSpec, Scheme, db_to_linear
from .montecarlo import SimMode, estimate_ber, estimate_capacity, estimate_outage
from .quadrature import Density, IntegralSpec, Kernel, integrate

__all__ = ["Check", "ValidationReport", "run_validation", "capacity_prelog_ratio", "gain_operating_points"]

ORACLE_RTOL = 1e-8
SIGMAS = 3.0
RATIO_TOL = 1e-6
QUAD_RTOL = 1e-11


@dataclass
class Check:
    section: str
    label: str
    passed: Optional[bool]
    detail: str

    def line(self) -> str:
        flag = {True: "PASS", False: "FAIL", None: "INFO"}[self.passed]
        return f"  [{flag}] {self.label:<44s} {self.detail}"


@dataclass
class ValidationReport:
    checks: List[Check] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    @property
    def failures(self) -> List[Check]:
        return [c for c in self.checks if c.passed is False]

    def lines(self) -> List[str]:
        out = []
        section = None
        for c in self.checks:
            if c.section != section:
                section = c.section
                out.append(f"== {section}")
            out.append(c.line())
        out.extend(self.notes)
        n_fail = len(self.failures)
        out.append(f"summary: {len(self.checks)} checks, {n_fail} failed")
        return out


def _cfg(nr: int, db: float, direct: bool = True) -> NetworkConfig:
    g = db_to_linear(db)
    return NetworkConfig(nr, g, g if direct else None)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b) if b != 0 else abs(a - b)


def capacity_prelog_ratio(cfg: NetworkConfig) -> float:
    """Quadrature of 1/2 log2(1+beta) p(beta) divided by the printed (pre-log 1) SCR closed form."""
    quad = integrate(IntegralSpec(Kernel.CAPACITY, Density.PDF_BETA, prelog=0.5), cfg, QUAD_RTOL).value
    return quad / an.capacity_scr(cfg, an.CapacityConvention.FULL)


def gain_operating_points(n_relays: Sequence[int], snr_db: Sequence[float], threshold: float = 0.11):
    """(snr_db, N_R, relative SCR-over-SR capacity gain) where the gain reaches ``threshold``."""
    found = []
    for nr in n_relays:
        for db in snr_db:
            cfg = _cfg(nr, db)
            scr = an.capacity_scr(cfg)
            sr = an.capacity_sr(cfg)
            gain = scr / sr - 1.0
            if gain >= threshold:
                found.append((db, nr, gain))
    return found


def run_validation(
    n_relays: Sequence[int] = (1, 2, 3, 4),
    snr_db: Sequence[float] = (0, 5, 10, 15, 20),
    rates: Sequence[float] = (0.5, 1.0),
    trials: int = 10**6,
    cap_trials: int = 10**5,
    asr_trials: Optional[int] = None,
    seed: int = 1,
    streams: int = 8,
    workers: int = 1,
    progress: Optional[Callable[[str], None]] = None,
) -> ValidationReport:
    # the ASR reference is itself numeric and its conditional BER is heavy tailed at high
    # diversity, so it is checked against a longer run by default
    asr_trials = 10 * trials if asr_trials is None else asr_trials
    rep = ValidationReport()
    add = rep.checks.append
    say = progress or (lambda _msg: None)
    for nr in n_relays:
        an.check_relays(NetworkConfig(nr, 1.0))

    say("closed form vs quadrature")
    for nr in n_relays:
        for db in snr_db:
            cfg = _cfg(nr, db)
            cases = [
                ("ber_scr", an.ber_scr(cfg), IntegralSpec(Kernel.BER, Density.PDF_BETA)),
                ("ber_sr", an.ber_sr(cfg), IntegralSpec(Kernel.BER, Density.PDF_GAMMA1)),
            ]
            for r in rates:
                a = OutageSpec(r).threshold
                cases.append((f"outage_scr R={r:g}", an.outage_scr(cfg, OutageSpec(r)),
                              IntegralSpec(Kernel.OUTAGE_INDICATOR, Density.PDF_BETA, upper=a)))
                cases.append((f"outage_sr R={r:g}", an.outage_sr(cfg, OutageSpec(r)),
                              IntegralSpec(Kernel.OUTAGE_INDICATOR, Density.PDF_GAMMA1, upper=a)))
            for name, closed, spec in cases:
                quad = integrate(spec, cfg, QUAD_RTOL).value
                rel = _rel(closed, quad)
                add(Check("closed form vs quadrature", f"{name} N_R={nr} {db:g} dB", rel <= ORACLE_RTOL,
                          f"closed={closed:.10e} quad={quad:.10e} rel={rel:.1e}"))

    say("closed form vs Monte Carlo")
    for nr in n_relays:
        for db in snr_db:
            cfg = _cfg(nr, db)
            points = [
                ("ber_scr semi", an.ber_scr(cfg),
                 lambda: estimate_ber(Scheme.SCR, SimMode.SEMI_ANALYTIC, cfg, trials, seed, streams, workers)),
                ("ber_sr semi", an.ber_sr(cfg),
                 lambda: estimate_ber(Scheme.SR, SimMode.SEMI_ANALYTIC, cfg, trials, seed, streams, workers)),
                ("ber_asr semi", an.ber_asr_numeric(cfg),
                 lambda: estimate_ber(Scheme.ASR, SimMode.SEMI_ANALYTIC, cfg, asr_trials, seed, streams, workers)),
            ]
            for r in rates:
                spec = OutageSpec(r)
                points.append((f"outage_scr R={r:g}", an.outage_scr(cfg, spec),
                               lambda spec=spec: estimate_outage(Scheme.SCR, cfg, spec, trials, seed, streams, workers)))
                points.append((f"outage_sr R={r:g}", an.outage_sr(cfg, spec),
                               lambda spec=spec: estimate_outage(Scheme.SR, cfg, spec, trials, seed, streams, workers)))
            for name, ref, run in points:
                res = run()
                z = res.z_score(ref)
                add(Check("closed form vs Monte Carlo", f"{name} N_R={nr} {db:g} dB", abs(z) <= SIGMAS,
                          f"ref={ref:.6e} mc={res.estimate:.6e}±{res.std_error:.1e} z={z:+.2f}"))

    cfg = _cfg(2, 10.0)
    ref = an.ber_asr_numeric(cfg)
    res = estimate_ber(Scheme.ASR, SimMode.SYMBOL_GENIE, cfg, trials, seed, streams, workers)
    z = res.z_score(ref)
    add(Check("closed form vs Monte Carlo", "ber_asr genie N_R=2 10 dB", abs(z) <= SIGMAS,
              f"ref={ref:.6e} mc={res.estimate:.6e}±{res.std_error:.1e} z={z:+.2f}"))

    say("scheme ordering")
    for nr in n_relays:
        for db in snr_db:
            cfg = _cfg(nr, db)
            scr, asr, sr = an.ber_scr(cfg), an.ber_asr_numeric(cfg), an.ber_sr(cfg)
            add(Check("scheme ordering", f"ber_scr < ber_asr < ber_sr N_R={nr} {db:g} dB", scr < asr < sr,
                      f"{scr:.4e} < {asr:.4e} < {sr:.4e}"))

    say("capacity")
    ratios = []
    for nr in n_relays:
        for db in snr_db:
            cfg = _cfg(nr, db)
            ratio = capacity_prelog_ratio(cfg)
            ratios.append(ratio)
            add(Check("capacity pre-log", f"quad(1/2 log2)/printed N_R={nr} {db:g} dB",
                      min(abs(ratio - 0.5), abs(ratio - 1.0)) <= RATIO_TOL, f"ratio={ratio:.10f}"))
    for nr in n_relays:
        for db in snr_db:
            cfg = _cfg(nr, db)
            for scheme, fn in ((Scheme.SCR, an.capacity_scr), (Scheme.SR, an.capacity_sr)):
                ref = fn(cfg, an.CapacityConvention.HALF)
                res = estimate_capacity(scheme, cfg, an.CapacityConvention.HALF, cap_trials, seed, streams, workers)
                z = res.z_score(ref)
                add(Check("capacity vs Monte Carlo", f"capacity_{scheme.value} half N_R={nr} {db:g} dB",
                          abs(z) <= SIGMAS, f"ref={ref:.6f} mc={res.estimate:.6f}±{res.std_error:.1e} z={z:+.2f}"))
    mean_ratio = sum(ratios) / len(ratios)
    resolved = "HALF" if abs(mean_ratio - 0.5) <= RATIO_TOL else ("FULL" if abs(mean_ratio - 1) <= RATIO_TOL else "UNRESOLVED")
    rep.notes.append(
        f"capacity pre-log resolution: quadrature of 1/2*log2(1+beta) / printed closed form = {mean_ratio:.10f}; "
        f"FULL/HALF = 2.0; the printed capacity expressions evaluate the pre-log-1 (FULL) integral, "
        f"the 1/2 pre-log (HALF) value is half of them; resolved convention for the 1/2-log2 integrand: {resolved}"
    )

    say("saturation and gain")
    for scheme, fn in ((Scheme.SCR, an.capacity_scr), (Scheme.SR, an.capacity_sr)):
        caps = [fn(_cfg(nr, 10.0)) for nr in range(1, 7)]
        inc = [b - a for a, b in zip(caps, caps[1:])]
        dec = all(b < a for a, b in zip(inc, inc[1:]))
        add(Check("capacity saturation", f"{scheme.value} increments decreasing N_R=1..5 10 dB", dec,
                  "increments=" + ",".join(f"{d:.4f}" for d in inc)))
    found = gain_operating_points(n_relays, snr_db)
    desc = "; ".join(f"{db:g} dB N_R={nr}: +{100 * g:.1f}%" for db, nr, g in found[:6])
    add(Check("capacity gain", "SCR >= 1.11 x SR somewhere on the grid", bool(found),
              f"{len(found)} points" + (f" ({desc})" if desc else "")))

    say("diversity order")
    for nr in (1, 2, 3):
        for label, fn, expected in (("scr", an.ber_scr, nr + 1), ("asr", an.ber_asr_numeric, nr + 1),
                                    ("sr", an.ber_sr, nr)):
            curve = [(db, fn(_cfg(nr, db))) for db in range(20, 31, 2)]
            order = an.diversity_order_estimate(curve)
            add(Check("diversity order", f"{label} N_R={nr} 20-30 dB", abs(order - expected) <= 0.5,
                      f"order={order:.3f} expected={expected}"))

    say("detect-and-forward gap")
    cfg = _cfg(1, 10.0)
    for scheme, ref in ((Scheme.SR, an.ber_sr(cfg)), (Scheme.SCR, an.ber_scr(cfg)), (Scheme.ASR, an.ber_asr_numeric(cfg))):
        res = estimate_ber(scheme, SimMode.SYMBOL_DF, cfg, trials, seed, streams, workers)
        add(Check("detect-and-forward gap (reported)", f"{scheme.value} N_R=1 10 dB", None,
                  f"analysis={ref:.4e} df={res.estimate:.4e}±{res.std_error:.1e} ratio={res.estimate / ref:.3f}"))
    return rep
