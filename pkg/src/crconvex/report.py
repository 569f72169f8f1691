"""Full analysis pipeline and its text/JSON reports."""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import convexity as cx
from .algebra import Poly
from .errors import InconsistentReport, ModelError
from .levi import (
    ModelPseudoconvexity,
    PseudoconvexityKind,
    ScanResult,
    model_pseudoconvexity,
    pseudoconvexity_scan,
)
from .model import InvariantSet, ModelReport, analyze_model, exact_sqrt, kn_invariants
from .parser import format_poly, parse


@dataclass
class AnalysisConfig:
    grid: int = 256
    tol: float = 1e-7
    max_cuts: int = 2000
    radius: float = 0.1
    box: float = 64.0
    eps_gap: float = 1e-6
    scan_grid: tuple[int, int, int] = (64, 256, 64)
    levi_tol: float = 1e-9
    scan: bool = True

    def search_config(self) -> cx.SearchConfig:
        return cx.SearchConfig(grid=(self.grid, self.grid), tol=self.tol,
                               max_cuts=self.max_cuts, box=self.box, eps_gap=self.eps_gap)

    @classmethod
    def from_mapping(cls, values) -> "AnalysisConfig":
        """Build from string key/value pairs (config files); unknown keys are errors."""
        cfg = cls()
        for key, raw in values.items():
            key = key.strip().replace("-", "_")
            if not hasattr(cfg, key):
                raise ValueError(f"unknown configuration key {key!r}")
            current = getattr(cfg, key)
            if isinstance(current, bool):
                value = str(raw).strip().lower() in ("1", "true", "yes", "on")
            elif isinstance(current, tuple):
                value = tuple(int(v) for v in str(raw).replace("x", ",").split(","))
            else:
                value = type(current)(raw)
            setattr(cfg, key, value)
        return cfg


class Verdict(str, enum.Enum):
    NOT_PSEUDOCONVEX = "NotPseudoconvex"
    NONCONVEXIFIABLE = "Nonconvexifiable"
    CONVEXIFIABLE = "Convexifiable"
    BORDERLINE = "Borderline"


@dataclass
class KappaRow:
    j: int
    kappa_sq: Fraction
    gamma_sq: Fraction
    bound_factor: int

    @property
    def kappa(self) -> float:
        return float(self.kappa_sq) ** 0.5

    @property
    def gamma(self) -> float:
        return float(self.gamma_sq) ** 0.5

    @property
    def within(self) -> bool:
        return self.kappa_sq <= self.bound_factor**2 * self.gamma_sq


@dataclass
class AnalysisReport:
    input_text: str
    F: Poly
    model: ModelReport
    invariants: InvariantSet | None
    kappa_table: list[KappaRow]
    sufficient_sum: float | None
    screen_sufficient: bool | None
    screen_necessary: cx.ScreenResult | None
    kn: tuple[int, object, cx.KNClass] | None
    # (u power, slice degree, l, a, class) for two-term u^l slices of the model
    slice_kn: list[tuple[int, int, int, object, cx.KNClass]]
    pseudoconvexity: ModelPseudoconvexity
    scan: ScanResult | None
    certificate: cx.ConvexityVerdict | None
    verdict: Verdict
    reasons: list[str]
    stages: list[tuple[str, str]]
    wall_times: dict[str, float] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def type_k(self) -> int:
        return self.model.type_k

    @property
    def mu(self) -> Fraction:
        return self.model.mu

    @property
    def weight_pair(self) -> tuple[int, int]:
        return self.model.weight_pair


class _Stages:
    def __init__(self):
        self.log: list[tuple[str, str]] = []
        self.times: dict[str, float] = {}

    def run(self, name, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            out = fn(*args, **kwargs)
        except Exception as exc:
            self.times[name] = time.perf_counter() - t0
            self.log.append((name, f"error: {exc}"))
            if hasattr(exc, "stage"):
                exc.stage = name
            raise
        self.times[name] = time.perf_counter() - t0
        self.log.append((name, "ok"))
        return out

    def skip(self, name, why):
        self.log.append((name, f"skipped: {why}"))


def _slice_classifications(P: Poly) -> list[tuple[int, int, int, object, cx.KNClass]]:
    """Two-term u^l slices |z|^m + a|z|^(m-j) Re z^j of the model, classified."""
    out = []
    for l in sorted({key[2] for key in P.terms}):
        if l == 0:
            continue
        slice_ = P.u_slice(l)
        degrees = {a + b for a, b, _ in slice_.terms}
        if len(degrees) != 1:
            continue
        (m,) = degrees
        if m % 2 or m < 4:
            continue
        try:
            inv = kn_invariants(slice_)
        except ModelError:
            continue
        tt = cx.two_term_parameter(inv)
        if tt is None:
            continue
        j, a = tt
        out.append((l, m, j, a, cx.kn_classify(m, j, a)))
    return out


def analyze(text: str, config: AnalysisConfig | None = None) -> AnalysisReport:
    """Run every stage on `text` and combine the results into one verdict."""
    cfg = config or AnalysisConfig()
    st = _Stages()
    F = st.run("parse", parse, text)
    model = st.run("model", analyze_model, F)
    notes = list(model.warnings)

    inv = None
    table: list[KappaRow] = []
    ssum = suff = nec = kn = None
    try:
        inv = st.run("invariants", kn_invariants, model.standard_model)
    except ModelError as exc:
        notes.append(f"invariants unavailable: {exc}")
    if inv is not None:
        k = inv.k
        table = kappa_rows(inv)
        ssum = cx.sufficient_sum(inv)
        suff = ssum < 1
        nec = cx.screen_necessary(inv)
        tt = cx.two_term_parameter(inv)
        if tt is not None:
            kn = (tt[0], tt[1], cx.kn_classify(k, tt[0], tt[1]))
        st.log.append(("screens", "ok"))
    else:
        st.skip("screens", "no invariants")
    slices = _slice_classifications(model.model) if model.mu else []

    pc = st.run("pseudoconvexity", model_pseudoconvexity, model.model, model.mu,
                cfg.levi_tol, (cfg.grid, cfg.grid))
    scan = None
    if cfg.scan:
        scan = st.run("levi_scan", pseudoconvexity_scan, F, cfg.radius, cfg.scan_grid,
                      cfg.levi_tol)
        if scan.witness is not None and pc.kind is PseudoconvexityKind.PSEUDOCONVEX:
            notes.append(
                f"Levi form is negative at a sample within radius {cfg.radius:g} although the "
                "model is pseudoconvex; higher-weight terms dominate at that scale")
    else:
        st.skip("levi_scan", "disabled")

    cert = None
    if pc.kind is PseudoconvexityKind.FAILS:
        st.skip("convexity", "model is not pseudoconvex")
    else:
        cert = st.run("convexity", cx.certificate_search, model.model, model.type_k,
                      model.mu, cfg.search_config())

    verdict, reasons = _combine(model, suff, nec, kn, pc, cert)
    return AnalysisReport(
        input_text=text, F=F, model=model, invariants=inv, kappa_table=table,
        sufficient_sum=ssum, screen_sufficient=suff, screen_necessary=nec, kn=kn,
        slice_kn=slices, pseudoconvexity=pc, scan=scan, certificate=cert,
        verdict=verdict, reasons=reasons, stages=st.log, wall_times=st.times, notes=notes,
    )


def _combine(model, suff, nec, kn, pc, cert) -> tuple[Verdict, list[str]]:
    against, toward = [], []
    if nec is not None and not nec.passed:
        against.append(f"necessary screen fails at j={nec.j}")
    if kn is not None and kn[2] is cx.KNClass.NONCONVEXIFIABLE:
        against.append(f"two-term model with l={kn[0]} is certified nonconvexifiable")
    if cert is not None and cert.kind is cx.VerdictKind.REFUTATION:
        against.append(f"max-min upper bound {cert.upper_bound:.6g} < 0")
    if suff and model.mu == 0:
        toward.append("sufficient screen passes")
    if cert is not None and cert.kind is cx.VerdictKind.CERTIFICATE:
        toward.append(f"certificate with margin {cert.margin:.6g}")
    if against and toward:
        raise InconsistentReport(
            "contradictory stage outputs: " + "; ".join(against) + " versus " + "; ".join(toward))
    if pc.kind is PseudoconvexityKind.FAILS:
        return Verdict.NOT_PSEUDOCONVEX, ["Laplacian of the model is negative somewhere"]
    if against:
        return Verdict.NONCONVEXIFIABLE, against
    if toward:
        return Verdict.CONVEXIFIABLE, toward
    reasons = ["no stage was conclusive"]
    if pc.kind is PseudoconvexityKind.DEGENERATE:
        reasons.append("model Laplacian vanishes on the sphere")
    return Verdict.BORDERLINE, reasons


# ---------------------------------------------------------------------------
# Emission


def _q(x: Fraction) -> str:
    return str(Fraction(x))


def _kappa_text(q: Fraction) -> str:
    r = exact_sqrt(q)
    return str(r) if r is not None else f"sqrt({q})"


def report_json(r: AnalysisReport, timings: bool = False) -> dict:
    m = r.model
    inv = None
    if r.invariants is not None:
        inv = {
            "a0": _q(r.invariants.a0),
            "kappa": [
                {
                    "j": row.j,
                    "kappa": _kappa_text(row.kappa_sq),
                    "kappa_float": row.kappa,
                    "gamma": row.gamma,
                    "gamma_squared": _q(row.gamma_sq),
                    "bound_factor": row.bound_factor,
                    "within_bound": row.within,
                }
                for row in r.kappa_table
            ],
            "screen_sufficient": {"sum": r.sufficient_sum, "passed": r.screen_sufficient,
                                  "conclusive": m.mu == 0},
            "screen_necessary": {"passed": r.screen_necessary.passed, "j": r.screen_necessary.j,
                                 "bound": r.screen_necessary.bound},
            "kn_classify": None if r.kn is None else {
                "l": r.kn[0], "a": str(r.kn[1]), "class": r.kn[2].value},
            "slices": [
                {"u_power": l, "k": mk, "l": j, "a": str(a), "class": c.value}
                for (l, mk, j, a, c) in r.slice_kn
            ],
        }
    stages = [{"name": name, "status": status} for name, status in r.stages]
    if timings:
        for s in stages:
            s["seconds"] = r.wall_times.get(s["name"])
    return {
        "input": r.input_text,
        "type": r.type_k,
        "mu": _q(r.mu),
        "model": {
            "weight_pair": list(r.weight_pair),
            "generalized": format_poly(m.model),
            "standard": format_poly(m.standard_model),
            "residual": format_poly(m.residual_terms),
            "removable": format_poly(m.removable_terms),
            "warnings": list(m.warnings),
        },
        "invariants": inv,
        "pseudoconvex": {
            "model": r.pseudoconvexity.to_json(),
            "scan": None if r.scan is None else r.scan.to_json(),
        },
        "verdict": {
            "label": r.verdict.value,
            "reasons": r.reasons,
            "convexity": None if r.certificate is None else r.certificate.to_json(),
            "notes": r.notes,
        },
        "stages": stages,
    }


def kappa_rows(inv: InvariantSet) -> list[KappaRow]:
    return [KappaRow(j, inv.kappa_sq[j], cx.gamma_squared(inv.k, j), 1 if 2 * j > inv.k else 2)
            for j in sorted(inv.kappa_sq)]


def kappa_table_text(rows: list[KappaRow]) -> list[str]:
    """One row per even j < k: kappa_j, gamma_jk and the necessary-screen bound."""
    lines = [f"  {'j':>3}  {'kappa_j':>12}  {'gamma_jk':>10}  {'bound':>10}  ok"]
    for row in rows:
        bound = row.bound_factor * row.gamma
        lines.append(f"  {row.j:>3}  {_kappa_text(row.kappa_sq):>12}  {row.gamma:>10.6f}  "
                     f"{bound:>10.6f}  {'yes' if row.within else 'NO'}")
    return lines


def report_text(r: AnalysisReport, timings: bool = False) -> str:
    m = r.model
    out = [
        f"input:        {r.input_text}",
        f"type k:       {r.type_k}",
        f"mu:           {r.mu}",
        f"weight pair:  {r.weight_pair}",
        f"model:        {format_poly(m.model)}",
        f"standard:     {format_poly(m.standard_model)}",
        f"residual:     {format_poly(m.residual_terms)}",
    ]
    if m.removable_terms:
        out.append(f"removable:    {format_poly(m.removable_terms)}")
    for w in m.warnings:
        out.append(f"warning:      {w}")
    if r.invariants is not None:
        out.append(f"a0:           {r.invariants.a0}")
        out.append("invariants:")
        out.extend(kappa_table_text(r.kappa_table))
        conclusive = "" if m.mu == 0 else " (model screen only)"
        out.append(f"sufficient:   sum = {r.sufficient_sum:.6g} -> "
                   f"{'Pass' if r.screen_sufficient else 'Fail'}{conclusive}")
        out.append(f"necessary:    {r.screen_necessary}")
        if r.kn is not None:
            out.append(f"two-term:     l = {r.kn[0]}, a = {r.kn[1]} -> {r.kn[2].value}")
    for (l, mk, j, a, c) in r.slice_kn:
        out.append(f"u^{l} slice:   k = {mk}, l = {j}, a = {a} -> {c.value}")
    pc = r.pseudoconvexity
    out.append(f"pseudoconvex: {pc.kind.value} (min Laplacian/|z|^{pc.blowup_degree} on sphere "
               f"= {pc.min_value:.6g})")
    if pc.witness is not None:
        w = pc.witness
        out.append(f"  witness z = {w.z:.6g}, u = {w.u:.6g}, Laplacian = {w.levi_value:.3g}")
    if r.scan is not None:
        s = r.scan
        line = f"levi scan:    {s.kind.value} ({s.samples} samples, min {s.min_value:.3g})"
        if s.witness is not None:
            line += f" at z = {s.witness.z:.6g}, u = {s.witness.u:.6g}"
        out.append(line)
    c = r.certificate
    if c is not None:
        line = f"convexity:    {c.kind.value}"
        if c.margin is not None:
            line += f", margin {c.margin:.6g}"
        line += f", upper bound {c.upper_bound:.6g}, lower {c.best_lower:.6g}, " \
                f"{c.samples_used} cuts"
        out.append(line)
        if c.kind is cx.VerdictKind.CERTIFICATE and c.h is not None:
            terms = [f"({t['m']},{t['l']}): {complex(t['re'], t['im']):.6g}" for t in c.h.to_json()]
            out.append(f"  h alphas:   {', '.join(terms)}")
        for d in c.diagnostics:
            out.append(f"  note:       {d}")
    out.append(f"verdict:      {r.verdict.value} ({'; '.join(r.reasons)})")
    for n in r.notes:
        out.append(f"note:         {n}")
    for name, status in r.stages:
        t = f" {r.wall_times[name]:.3f}s" if timings and name in r.wall_times else ""
        out.append(f"stage {name}: {status}{t}")
    return "\n".join(out) + "\n"


def emit_report(r: AnalysisReport, fmt: str = "text", timings: bool = False) -> bytes:
    if fmt == "json":
        return (json.dumps(report_json(r, timings), indent=2) + "\n").encode()
    if fmt == "text":
        return report_text(r, timings).encode()
    raise ValueError(f"unknown format {fmt!r}")
