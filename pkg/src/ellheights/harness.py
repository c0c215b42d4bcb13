"""Corpus ingestion, check orchestration, and report emission.

Curve files are UTF-8 lines `label | a1 a2 a3 a4 a6 | (x,y);(x,y);...` with
`#` comments; rationals are written `p/q`.  Reports are emitted one JSON
object per line (or as TSV), sorted by (label, check, place) so identical
inputs produce byte-identical output; parallel and serial runs agree.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from multiprocessing import Pool

from .bounds import (
    BoundReport,
    verify_j_discriminant_ineq,
    verify_lemma31,
    verify_lemma32,
    verify_local_conductor_ineq,
    verify_ogg,
    verify_parallelogram,
    verify_prop41,
    verify_szpiro,
    verify_tamagawa_rules,
    verify_theorem1,
    verify_theorem2,
)
from .exactnum import factorize
from .heights import (
    HeightConfig,
    canonical_height,
    height_disc_sum,
    lambda_sum,
    local_height_breakdown,
)
from .localdata import global_data
from .torsion import torsion_subgroup
from .weierstrass import (
    INFINITY,
    CurvePoint,
    WeierstrassModel,
    add_points,
    negate,
    on_curve,
    scalar_mul,
)

__all__ = [
    "CurveRecord",
    "RunConfig",
    "ParseError",
    "OffCurvePoint",
    "ALL_CHECKS",
    "parse_curve_file",
    "parse_curve_lines",
    "run_suite",
    "emit_report",
    "summarize",
]

ALL_CHECKS = (
    "ogg",
    "tamagawa",
    "conductor-48",
    "j-delta-32",
    "szpiro-ge-1",
    "thm11-torsion",
    "thm12-lang",
    "prop41-small-points",
    "lemma31",
    "lemma32",
    "parallelogram",
    "decomposition",
)


class ParseError(ValueError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class OffCurvePoint(ValueError):
    def __init__(self, label: str, point):
        self.label = label
        self.point = point
        super().__init__(f"{label}: point {point} is not on the curve")


@dataclass(frozen=True)
class CurveRecord:
    label: str
    a_invariants: tuple[Fraction, ...]
    points: tuple[CurvePoint, ...] = ()

    @property
    def model(self) -> WeierstrassModel:
        return WeierstrassModel(*self.a_invariants)


@dataclass(frozen=True)
class RunConfig:
    tolerance: float = 1e-9
    factor_bound: int = 10**5
    seed: int = 0
    checks: tuple[str, ...] = ALL_CHECKS
    parallelism: int = 1
    output_format: str = "json"
    sets_per_curve: int = 6
    series_tol: float = 1e-12

    def height_config(self) -> HeightConfig:
        return HeightConfig(series_tol=self.series_tol)


def _parse_rational(tok: str, line_no: int) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(line_no, f"bad rational {tok!r}: {exc}") from None


def _parse_point(tok: str, line_no: int) -> CurvePoint:
    tok = tok.strip()
    if not (tok.startswith("(") and tok.endswith(")")):
        raise ParseError(line_no, f"bad point {tok!r}")
    parts = tok[1:-1].split(",")
    if len(parts) != 2:
        raise ParseError(line_no, f"bad point {tok!r}")
    return CurvePoint(
        _parse_rational(parts[0].strip(), line_no), _parse_rational(parts[1].strip(), line_no)
    )


def parse_curve_lines(lines) -> list[CurveRecord]:
    records = []
    seen = set()
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split("|")]
        if len(fields) not in (2, 3):
            raise ParseError(line_no, "expected `label | a1 a2 a3 a4 a6 | points`")
        label = fields[0]
        if not label:
            raise ParseError(line_no, "empty label")
        if label in seen:
            raise ParseError(line_no, f"duplicate label {label!r}")
        seen.add(label)
        a_toks = fields[1].split()
        if len(a_toks) != 5:
            raise ParseError(line_no, f"expected five a-invariants, got {len(a_toks)}")
        ainvs = tuple(_parse_rational(t, line_no) for t in a_toks)
        points: list[CurvePoint] = []
        if len(fields) == 3 and fields[2]:
            for tok in fields[2].split(";"):
                tok = tok.strip()
                if tok:
                    points.append(_parse_point(tok, line_no))
        model = WeierstrassModel(*ainvs)
        for P in points:
            if not on_curve(model, P):
                raise OffCurvePoint(label, P)
        records.append(CurveRecord(label, ainvs, tuple(points)))
    return records


def parse_curve_file(path) -> list[CurveRecord]:
    with open(path, encoding="utf-8") as fh:
        return parse_curve_lines(fh)


# ---------------------------------------------------------------------------
# Check orchestration


def _point_pool(model: WeierstrassModel, record: CurveRecord, tors) -> list[CurvePoint]:
    """Deterministic pool for sampled point sets: infinity, torsion, supplied
    points, and a few small sums/multiples of the supplied points."""
    pool: list[CurvePoint] = [INFINITY]
    for P in tors.points:
        if P not in pool:
            pool.append(P)
    supplied = list(record.points)
    for P in supplied:
        if P not in pool:
            pool.append(P)
    for P in supplied[:3]:
        for Q in (scalar_mul(model, 2, P), scalar_mul(model, 3, P), negate(model, P)):
            if Q not in pool:
                pool.append(Q)
    for i in range(min(3, len(supplied))):
        for j in range(i + 1, min(3, len(supplied))):
            Q = add_points(model, supplied[i], supplied[j])
            if Q not in pool:
                pool.append(Q)
    return pool[:14]


def _sample_sets(pool, label: str, config: RunConfig) -> list[list[CurvePoint]]:
    if len(pool) < 2:
        return []
    rng = random.Random(f"{config.seed}:{label}")
    sizes = [2, 3, 4, 5, 6, 8]
    out = []
    seen = set()
    for k in range(config.sets_per_curve):
        size = min(sizes[k % len(sizes)], len(pool))
        Z = rng.sample(pool, size)
        key = tuple(sorted(repr(P) for P in Z))
        if key in seen:
            continue
        seen.add(key)
        out.append(Z)
    return out


def _decomposition_report(model, Z, config: RunConfig, context: str) -> BoundReport:
    """Lambda(Z) against the sum of Lambda_v(Z) over every contributing place."""
    cfg = config.height_config()
    g = global_data(model)
    places = set(g.bad_primes)
    from .weierstrass import map_point, sub_points

    pts = [map_point(g.transform, P) for P in Z]
    for i in range(len(pts)):
        for j in range(len(pts)):
            if i == j:
                continue
            D = sub_points(g.minimal, pts[i], pts[j])
            if not D.is_infinity and D.x.denominator > 1:
                places.update(p for p, _ in factorize(D.x.denominator).factors)
    total = lambda_sum(model, Z, None, cfg)
    total += sum(lambda_sum(model, Z, p, cfg) for p in sorted(places))
    lam = height_disc_sum(model, Z, cfg)
    tol = max(10 * config.tolerance, 1e-8)
    diff = abs(lam - total)
    status = "pass" if diff <= tol else "fail"
    return BoundReport("decomposition", lam, total, status, tol - diff, context)


def _curve_reports(record: CurveRecord, config: RunConfig) -> list[dict]:
    checks = set(config.checks)
    cfg = config.height_config()
    slack = config.tolerance
    rows: list[dict] = []

    def add(report: BoundReport, place) -> None:
        if report.check_name not in checks:
            return
        rows.append(
            {
                "label": record.label,
                "check": report.check_name,
                "place": place,
                "lhs": report.lhs,
                "rhs": report.rhs,
                "margin": report.margin,
                "status": report.status,
                "context": report.context,
            }
        )

    try:
        model = record.model
        g = global_data(model, factor_bound=config.factor_bound)
        tors = torsion_subgroup(g.minimal)

        for loc in g.local:
            ctx = record.label
            add(verify_ogg(loc, ctx), loc.p)
            add(verify_tamagawa_rules(loc, ctx), loc.p)
            add(verify_local_conductor_ineq(loc, ctx), loc.p)
            add(verify_j_discriminant_ineq(g.minimal, loc, ctx), loc.p)
        add(verify_szpiro(g, record.label), "")
        add(verify_theorem1(model, slack, record.label), "")

        nontorsion = [
            P
            for P in record.points
            if not P.is_infinity and canonical_height(model, P, cfg) > 10 * slack
        ]
        if "thm12-lang" in checks:
            if nontorsion:
                add(verify_theorem2(model, nontorsion, cfg, slack, record.label), "")
            else:
                add(
                    BoundReport(
                        "thm12-lang", 0.0, 0.0, "skipped", 0.0, f"{record.label} no points"
                    ),
                    "",
                )
        add(verify_prop41(model, list(record.points), cfg, slack, record.label), "")

        pool = _point_pool(model, record, tors)
        for k, Z in enumerate(_sample_sets(pool, record.label, config)):
            ctx = f"{record.label} Z#{k} N={len(Z)}"
            for loc in g.local:
                add(verify_lemma31(model, Z, loc.p, cfg, slack, ctx), loc.p)
            add(verify_lemma32(model, Z, cfg, slack, ctx), "inf")
            add(verify_parallelogram(model, Z, cfg, slack, ctx), "")
            if "decomposition" in checks:
                rep = _decomposition_report(model, Z, config, ctx)
                add(rep, "")
    except Exception as exc:  # per-curve failures must not abort the batch
        rows.append(
            {
                "label": record.label,
                "check": "error",
                "place": "",
                "lhs": 0.0,
                "rhs": 0.0,
                "margin": 0.0,
                "status": "skipped",
                "context": f"{type(exc).__name__}: {exc}",
            }
        )
    return rows


def _worker(args) -> list[dict]:
    record, config = args
    return _curve_reports(record, config)


def run_suite(records: list[CurveRecord], config: RunConfig = RunConfig()) -> list[dict]:
    """All enabled checks for every record; deterministic given (records, config)."""
    if config.parallelism > 1:
        with Pool(config.parallelism) as pool:
            chunks = pool.map(_worker, [(r, config) for r in records])
    else:
        chunks = [_curve_reports(r, config) for r in records]
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (r["label"], r["check"], str(r["place"]), r["context"]))
    return rows


def summarize(rows: list[dict]) -> dict:
    counts = {"pass": 0, "fail": 0, "skipped": 0}
    sigmas = [r["lhs"] for r in rows if r["check"] == "szpiro-ge-1"]
    for r in rows:
        counts[r["status"]] = counts.get(r["status"], 0) + 1
    return {
        "summary": {
            "pass": counts.get("pass", 0),
            "fail": counts.get("fail", 0),
            "skipped": counts.get("skipped", 0),
            "max_sigma": max(sigmas) if sigmas else 1.0,
        }
    }


def emit_report(rows: list[dict], config: RunConfig = RunConfig()) -> str:
    """Serialize rows (sorted upstream) plus a final summary line."""
    summary = summarize(rows)
    if config.output_format == "tsv":
        cols = ["label", "check", "place", "lhs", "rhs", "margin", "status", "context"]
        lines = ["\t".join(cols)]
        for r in rows:
            lines.append("\t".join(_tsv_cell(r[c]) for c in cols))
        s = summary["summary"]
        lines.append(
            f"# summary\tpass={s['pass']}\tfail={s['fail']}"
            f"\tskipped={s['skipped']}\tmax_sigma={s['max_sigma']!r}"
        )
        return "\n".join(lines) + "\n"
    lines = [json.dumps(r, sort_keys=True) for r in rows]
    lines.append(json.dumps(summary, sort_keys=True))
    return "\n".join(lines) + "\n"


def _tsv_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


# ---------------------------------------------------------------------------
# Analysis rows for the `analyze` and `heights` subcommands


def analyze_rows(records: list[CurveRecord], config: RunConfig = RunConfig()) -> list[dict]:
    rows = []
    for record in records:
        try:
            g = global_data(record.model, factor_bound=config.factor_bound)
            conductor = 1
            for loc in g.local:
                conductor *= loc.p**loc.eta
            rows.append(
                {
                    "label": record.label,
                    "minimal": [str(a) for a in g.minimal.a_invariants],
                    "conductor": conductor,
                    "log_norm_discriminant": g.log_norm_discriminant,
                    "log_norm_conductor": g.log_norm_conductor,
                    "sigma": g.sigma,
                    "bad_primes": [
                        {
                            "p": loc.p,
                            "kodaira": loc.kodaira,
                            "delta": loc.delta,
                            "eta": loc.eta,
                            "m": loc.m,
                            "c": loc.c,
                            "reduction": loc.reduction,
                        }
                        for loc in g.local
                    ],
                }
            )
        except Exception as exc:
            rows.append({"label": record.label, "error": f"{type(exc).__name__}: {exc}"})
    return rows


def heights_rows(records: list[CurveRecord], config: RunConfig = RunConfig()) -> list[dict]:
    cfg = config.height_config()
    rows = []
    for record in records:
        for P in record.points:
            try:
                breakdown = local_height_breakdown(record.model, P, cfg)
                rows.append(
                    {
                        "label": record.label,
                        "point": [str(P.x), str(P.y)],
                        "hhat": canonical_height(record.model, P, cfg),
                        "local": [
                            {
                                "place": "inf" if b.place is None else b.place,
                                "lambda": b.lam,
                                **(
                                    {
                                        "r": str(b.r_value),
                                        "i": b.i_part,
                                        "j": b.j_part,
                                    }
                                    if b.r_value is not None
                                    else {}
                                ),
                            }
                            for b in breakdown
                        ],
                    }
                )
            except Exception as exc:
                rows.append(
                    {
                        "label": record.label,
                        "point": [str(P.x), str(P.y)],
                        "error": f"{type(exc).__name__}: {exc}",
                    }
                )
    return rows
