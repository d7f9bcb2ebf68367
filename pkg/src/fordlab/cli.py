"""Command-line front end: verify constructions, enumerate traces, render SVG."""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from fordlab.constructions import (
    Certificate,
    UnsupportedParameter,
    build,
    verify_construction,
)
from fordlab.exactnum import PrecisionExhausted, QuadValue, qv_format
from fordlab.geometry import (
    LemmaViolation,
    PrismDomain,
    StripDomain,
    build_ford_two_gen,
    isometric_disk,
)
from fordlab.moebius import MoebiusElement, mm_format, parse_generator_file
from fordlab.tracesets import StateExplosion, enumerate_traces, trace_sort_key

EXIT_VERIFIED = 0
EXIT_FAILED = 1
EXIT_UNDECIDED = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_IO = 74

SCHEMA_VERSION = "1"

_TARGETS = {"modular", "gamma0", "principal", "normalizer", "bianchi"}
_REPORT_KEYS = {"schema_version", "target", "verdict", "checks", "coverage",
                "timings"}
_CHECK_KEYS = {"name", "status", "margin", "witnesses"}


def parse_target(text: str):
    if text == "modular":
        return "modular", None
    if ":" in text:
        kind, _, raw = text.partition(":")
        if kind in _TARGETS:
            try:
                return kind, int(raw)
            except ValueError:
                raise UnsupportedParameter(f"bad parameter in target {text!r}")
    raise UnsupportedParameter(f"unknown target {text!r}")


def _json_safe(value):
    if isinstance(value, QuadValue):
        return qv_format(value)
    if isinstance(value, Fraction):
        return qv_format(QuadValue(value))
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, set):
        return [_json_safe(v) for v in sorted(value, key=str)]
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _check_to_json(check):
    out = {"name": check.name, "status": check.status}
    if check.margin is not None:
        out["margin"] = qv_format(check.margin)
    if check.witnesses:
        out["witnesses"] = _json_safe(check.witnesses)
    return out


def certificate_report(cert: Certificate, bound, elapsed: float,
                       normalize_timings: bool = False) -> dict:
    checks = []
    checks.extend(_check_to_json(c) for c in cert.lemma_results)
    if cert.separation is not None:
        checks.extend(_check_to_json(c) for c in cert.separation.checks)
    for label, h in cert.heights:
        checks.append({"name": f"infinite_area_height[{label}]",
                       "status": "pass", "margin": qv_format(h)})
    checks.extend(_check_to_json(c) for c in cert.containment)
    coverage = {
        "bound": qv_format(QuadValue(Fraction(bound))),
        "missing": [qv_format(t) for t in (cert.coverage.missing if cert.coverage else [])],
        "extra": [qv_format(t) for t in (cert.coverage.extra if cert.coverage else [])],
        "witness_words": cert.enumeration_stats.get("witnesses", {}),
    }
    if cert.coverage_note:
        coverage["note"] = cert.coverage_note
    target = cert.construction.target
    if cert.construction.param:
        target = f"{target}:{cert.construction.param}"
    return {
        "schema_version": SCHEMA_VERSION,
        "target": target,
        "verdict": cert.verdict,
        "checks": checks,
        "coverage": coverage,
        "timings": {"total_s": 0.0 if normalize_timings else round(elapsed, 6)},
    }


def dump_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=1) + "\n"


def load_report(text: str) -> dict:
    report = json.loads(text)
    if not isinstance(report, dict):
        raise ValueError("report must be a JSON object")
    unknown = set(report) - _REPORT_KEYS
    if unknown:
        raise ValueError(f"unknown report fields: {sorted(unknown)}")
    missing = _REPORT_KEYS - set(report)
    if missing:
        raise ValueError(f"missing report fields: {sorted(missing)}")
    if report["schema_version"] != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {report['schema_version']!r}")
    for check in report["checks"]:
        bad = set(check) - _CHECK_KEYS
        if bad:
            raise ValueError(f"unknown check fields: {sorted(bad)}")
        if "name" not in check or "status" not in check:
            raise ValueError("check entries need name and status")
    return report


# -- SVG rendering ------------------------------------------------------------


_SCALE = 100


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def _svg_circle(cx, cy, r, color, label=None):
    parts = [f'<circle cx="{_fmt(cx * _SCALE)}" cy="{_fmt(-cy * _SCALE)}" '
             f'r="{_fmt(r * _SCALE)}" fill="none" stroke="{color}" '
             'stroke-width="1"/>']
    if label:
        parts.append(f'<text x="{_fmt(cx * _SCALE)}" y="{_fmt(-cy * _SCALE - r * _SCALE - 4)}" '
                     f'font-size="9" text-anchor="middle" fill="{color}">'
                     f'{label}</text>')
    return parts


def _svg_line(x1, y1, x2, y2, color, width=1):
    return (f'<line x1="{_fmt(x1 * _SCALE)}" y1="{_fmt(-y1 * _SCALE)}" '
            f'x2="{_fmt(x2 * _SCALE)}" y2="{_fmt(-y2 * _SCALE)}" '
            f'stroke="{color}" stroke-width="{width}"/>')


def _qv_float(v: QuadValue) -> float:
    import math
    if v.m >= 0:
        return float(v.a) + float(v.b) * math.sqrt(v.m)
    raise ValueError("complex value has no single float image")


def _complex_floats(v: QuadValue):
    import math
    if v.m >= 0:
        return _qv_float(v), 0.0
    return float(v.a), float(v.b) * math.sqrt(-v.m)


def render_strip_svg(domains, conj_disks=(), intervals=(), height=3.0) -> str:
    body = []
    lo, hi = None, None
    for domain in domains:
        left, right = _qv_float(domain.left()), _qv_float(domain.right())
        lo = left if lo is None else min(lo, left)
        hi = right if hi is None else max(hi, right)
        body.append(_svg_line(left, 0, left, height, "#0868c4"))
        body.append(_svg_line(right, 0, right, height, "#0868c4"))
        for disk, owner in domain.excluded:
            cx = _qv_float(disk.center)
            r = float(disk.radius_sq) ** 0.5
            body.extend(_svg_circle(cx, 0, r, "#444444", mm_format(owner)))
    for disk, label in conj_disks:
        cx, cy = _complex_floats(disk.center)
        r = float(disk.radius_sq) ** 0.5
        body.extend(_svg_circle(cx, cy, r, "#c22222", label))
    for x, y in intervals:
        body.append(_svg_line(_qv_float(x), 0, _qv_float(y), 0, "#22a022", 3))
    if lo is None:
        lo, hi = -1.0, 1.0
    body.append(_svg_line(lo - 0.5, 0, hi + 0.5, 0, "#000000"))
    min_x = (lo - 1) * _SCALE
    width = (hi - lo + 2) * _SCALE
    min_y = -(height + 1) * _SCALE
    h = (height + 2) * _SCALE
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="{_fmt(min_x)} {_fmt(min_y)} {_fmt(width)} {_fmt(h)}">')
    return "\n".join([head, *body, "</svg>"]) + "\n"


def render_prism_svg(prism: PrismDomain, conj_disks=()) -> str:
    body = []
    corners = [prism.anchor, prism.anchor + prism.t1,
               prism.anchor + prism.t1 + prism.t2, prism.anchor + prism.t2]
    points = " ".join(
        f"{_fmt(_complex_floats(c)[0] * _SCALE)},{_fmt(-_complex_floats(c)[1] * _SCALE)}"
        for c in corners)
    body.append(f'<polygon points="{points}" fill="none" stroke="#0868c4" '
                'stroke-width="1"/>')
    xs, ys = [], []
    for c in corners:
        fx, fy = _complex_floats(c)
        xs.append(fx)
        ys.append(fy)
    for disk, owner in prism.excluded:
        cx, cy = _complex_floats(disk.center)
        r = float(disk.radius_sq) ** 0.5
        body.extend(_svg_circle(cx, cy, r, "#444444", mm_format(owner)))
        xs.extend((cx - r, cx + r))
        ys.extend((cy - r, cy + r))
    for disk, label in conj_disks:
        cx, cy = _complex_floats(disk.center)
        r = float(disk.radius_sq) ** 0.5
        body.extend(_svg_circle(cx, cy, r, "#c22222", label))
    min_x = (min(xs) - 1) * _SCALE
    width = (max(xs) - min(xs) + 2) * _SCALE
    min_y = -(max(ys) + 1) * _SCALE
    h = (max(ys) - min(ys) + 2) * _SCALE
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="{_fmt(min_x)} {_fmt(min_y)} {_fmt(width)} {_fmt(h)}">')
    return "\n".join([head, *body, "</svg>"]) + "\n"


def render_construction_svg(construction) -> str:
    conj = []
    for idx, alpha in enumerate(construction.conjugators):
        if alpha is None:
            continue
        conj.append((isometric_disk(alpha), mm_format(alpha)))
        conj.append((isometric_disk(alpha.inv()), mm_format(alpha)))
    if construction.target == "bianchi":
        return render_prism_svg(construction.prism, conj)
    domains = [s.domain for s in construction.subgroups if s.domain is not None]
    intervals = [iv for iv in construction.intervals if iv is not None]
    return render_strip_svg(domains, conj, intervals)


def render_generators_svg(gens) -> str:
    translations = [g for g in gens if g.c.is_zero() and not g.is_identity()]
    others = [g for g in gens if not g.c.is_zero()]
    if translations and len(others) == 1:
        try:
            domain = build_ford_two_gen(abs(translations[0].b), others[0])
            return render_strip_svg([domain])
        except Exception:
            pass
    disks = [(isometric_disk(g), mm_format(g)) for g in others]
    default = StripDomain(0, Fraction(5, 2), MoebiusElement(1, 5, 0, 1), [])
    return render_strip_svg([default], disks)


# -- commands ------------------------------------------------------------------


def cmd_verify(args) -> int:
    try:
        kind, param = parse_target(args.target)
        bound = Fraction(args.bound) if args.bound is not None else \
            (Fraction(40) if kind == "bianchi" else Fraction(50))
        max_word = args.max_word
        if max_word is None:
            # half-space enumerations branch much faster per letter
            max_word = 8 if kind == "bianchi" else 12
        if bound < 0 or max_word < 1:
            raise UnsupportedParameter("bound and word length must be positive")
        construction = build(kind, param)
    except (UnsupportedParameter, LemmaViolation, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    started = time.monotonic()
    cert = verify_construction(construction, bound, max_word,
                               horizon=args.horizon,
                               state_cap=args.state_cap,
                               parallelism=args.parallelism)
    elapsed = time.monotonic() - started
    report = certificate_report(cert, bound, elapsed,
                                normalize_timings=args.normalize_timings)
    text = dump_report(report)
    try:
        if args.report:
            with open(args.report, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if args.svg:
            with open(args.svg, "w", encoding="utf-8") as fh:
                fh.write(render_construction_svg(construction))
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"{report['target']}: {cert.verdict}"
          + (f" ({'; '.join(cert.reasons[:3])})" if cert.reasons else ""))
    return {"Verified": EXIT_VERIFIED, "Failed": EXIT_FAILED,
            "Undecided": EXIT_UNDECIDED}[cert.verdict]


def cmd_traces(args) -> int:
    try:
        with open(args.gens, "r", encoding="utf-8") as fh:
            gens = parse_generator_file(fh.read())
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_DATA
    if not gens:
        print("parse error: no generators in file", file=sys.stderr)
        return EXIT_DATA
    try:
        result = enumerate_traces(gens, args.max_word, Fraction(args.bound),
                                  state_cap=args.state_cap,
                                  parallelism=args.parallelism)
    except StateExplosion as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except PrecisionExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    lines = [f"trace {qv_format(t)} word {word}"
             for t, word in sorted(result.traces.items(),
                                   key=lambda kv: trace_sort_key(kv[0]))]
    text = "\n".join(lines) + ("\n" if lines else "")
    try:
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_VERIFIED


def cmd_render(args) -> int:
    try:
        if args.target:
            kind, param = parse_target(args.target)
            construction = build(kind, param)
            svg = render_construction_svg(construction)
        else:
            with open(args.gens, "r", encoding="utf-8") as fh:
                gens = parse_generator_file(fh.read())
            svg = render_generators_svg(gens)
    except (UnsupportedParameter, LemmaViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(svg)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_VERIFIED


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fordlab",
        description="Exact verification of Ford-domain constructions and "
                    "trace sets of Fuchsian and Bianchi groups.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="verify a named construction")
    p_verify.add_argument("--target", required=True,
                          help="modular | gamma0:<n> | principal:<n> | "
                               "normalizer:<p> | bianchi:<d>")
    p_verify.add_argument("--bound", default=None,
                          help="trace bound (|t|, or |t|^2 for bianchi)")
    p_verify.add_argument("--max-word", type=int, default=None,
                          help="word length (default 12, bianchi 8)")
    p_verify.add_argument("--horizon", type=int, default=50)
    p_verify.add_argument("--report", default=None)
    p_verify.add_argument("--svg", default=None)
    p_verify.add_argument("--normalize-timings", action="store_true")
    p_verify.add_argument("--state-cap", type=int, default=None)
    p_verify.add_argument("--parallelism", type=int, default=1)
    p_verify.set_defaults(func=cmd_verify)

    p_traces = sub.add_parser("traces", help="enumerate traces from a generator file")
    p_traces.add_argument("gens", help="file with one matrix per line")
    p_traces.add_argument("--max-word", type=int, default=8)
    p_traces.add_argument("--bound", default="50")
    p_traces.add_argument("--out", default=None)
    p_traces.add_argument("--state-cap", type=int, default=None)
    p_traces.add_argument("--parallelism", type=int, default=1)
    p_traces.set_defaults(func=cmd_traces)

    p_render = sub.add_parser("render", help="render circles and domains as SVG")
    group = p_render.add_mutually_exclusive_group(required=True)
    group.add_argument("--target", default=None)
    group.add_argument("--gens", default=None)
    p_render.add_argument("--out", required=True)
    p_render.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
