"""Expected trace-set models, word enumeration, and coverage reports."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

from fordlab._bfs import (
    DEFAULT_STATE_CAP,
    EnumerationResult,
    StateExplosion,
    bfs_enumerate,
)
from fordlab.exactnum import QuadValue, qv
from fordlab.moebius import bianchi_omega, canonicalize_trace, omega_coords

__all__ = [
    "EnumerationResult",
    "NotHyperbolic",
    "StateExplosion",
    "TraceSetModel",
    "coverage_report",
    "default_state_cap",
    "enumerate_traces",
    "expected_set",
    "model_contains",
    "trace_key",
    "trace_sort_key",
    "trace_to_length",
    "unit_residue_traces",
]

STATE_CAP_ENV = "FORDLAB_STATE_CAP"


class NotHyperbolic(ValueError):
    """Geodesic length is defined for real traces of absolute value > 2."""


def default_state_cap() -> int:
    raw = os.environ.get(STATE_CAP_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return DEFAULT_STATE_CAP


@dataclass(frozen=True)
class TraceSetModel:
    """Closed-form model of an expected trace set.

    kind is one of modular, gamma0, principal, normalizer, bianchi; param
    is the level n, the prime p, or the field discriminant parameter d.
    """

    kind: str
    param: int = 0

    def __post_init__(self):
        if self.kind not in {"modular", "gamma0", "principal", "normalizer",
                             "bianchi"}:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "gamma0" and self.param < 1:
            raise ValueError("gamma0 model needs n >= 1")
        if self.kind == "principal" and self.param < 1:
            raise ValueError("principal model needs n >= 1")
        if self.kind == "normalizer" and not _is_prime(self.param):
            raise ValueError("normalizer model needs p prime")
        if self.kind == "bianchi" and not _is_square_free(self.param):
            raise ValueError("bianchi model needs square-free d >= 1")


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    for q in range(2, isqrt(p) + 1):
        if p % q == 0:
            return False
    return True


def _is_square_free(d: int) -> bool:
    if d < 1:
        return False
    q = 2
    while q * q <= d:
        if d % (q * q) == 0:
            return False
        q += 1
    return True


def unit_residue_traces(n: int) -> set[int]:
    """Residues a + a^{-1} mod n over units a; the mod-n trace classes."""
    out = set()
    for a in range(1, n + 1):
        if gcd(a, n) == 1:
            out.add((a + pow(a, -1, n)) % n)
    if n == 1:
        out.add(0)
    return out


def expected_set(model: TraceSetModel, bound) -> set[QuadValue]:
    """Finite truncation of the model's trace set.

    For Fuchsian models the bound caps |t|; for the imaginary-quadratic
    model it caps |t|^2, matching the complex-case enumeration bound.
    """
    bound = Fraction(bound)
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    kind, n = model.kind, model.param
    bf = bound.numerator // bound.denominator
    if kind == "modular":
        return {QuadValue(k) for k in range(bf + 1)}
    if kind == "gamma0":
        res = unit_residue_traces(n)
        return {QuadValue(k) for k in range(bf + 1) if k % n in res}
    if kind == "principal":
        out = set()
        a = 0
        while True:
            lo, hi = a * n * n - 2, a * n * n + 2
            if lo > bf:
                break
            for t in (abs(lo), hi):
                if t <= bf:
                    out.add(QuadValue(t))
            a += 1
        return out
    if kind == "normalizer":
        out = expected_set(TraceSetModel("gamma0", n), bound)
        m = 0
        while m * m * n <= bound * bound:
            out.add(QuadValue(0, m, n))
            m += 1
        return out
    # bianchi: every canonical ring integer with |t|^2 <= bound
    omega = bianchi_omega(n)
    out = set()
    vmax = isqrt(int(4 * bound // n)) + 2
    for v in range(-vmax, vmax + 1):
        umax = isqrt(int(bound)) + abs(v) * (isqrt(n) + 1) + 2
        for u in range(-umax, umax + 1):
            t = QuadValue(u) + omega * v
            if t.abs2() <= bound:
                out.add(canonicalize_trace(t))
    return out


def model_contains(model: TraceSetModel, t: QuadValue) -> bool:
    """Exact membership of a canonical trace in the untruncated model."""
    t = canonicalize_trace(qv(t))
    kind, n = model.kind, model.param
    if kind == "modular":
        return t.is_rational and t.a.denominator == 1 and t.a >= 0
    if kind == "gamma0":
        if not (t.is_rational and t.a.denominator == 1):
            return False
        return t.a.numerator % n in unit_residue_traces(n)
    if kind == "principal":
        if not (t.is_rational and t.a.denominator == 1):
            return False
        k = t.a.numerator
        return (k - 2) % (n * n) == 0 or (k + 2) % (n * n) == 0
    if kind == "normalizer":
        if t.is_rational:
            # zero arises as 0*sqrt(p), the trace of the adjoined involutions
            return t.a == 0 or model_contains(TraceSetModel("gamma0", n), t)
        return t.m == n and t.a == 0 and t.b.denominator == 1
    try:
        u, v = omega_coords(t, n)
    except Exception:
        return False
    return u.denominator == 1 and v.denominator == 1


def enumerate_traces(gens, max_word_len: int, trace_bound,
                     state_cap: int | None = None,
                     parallelism: int = 1) -> EnumerationResult:
    """Breadth-first trace collection over words in the generators.

    States are deduplicated by sign-normalized matrix; the result is
    deterministic and independent of the frontier chunking degree.
    """
    cap = default_state_cap() if state_cap is None else state_cap
    return bfs_enumerate(list(gens), max_word_len, Fraction(trace_bound),
                         state_cap=cap, parallelism=parallelism)


@dataclass(frozen=True)
class Coverage:
    missing: tuple
    covered: tuple
    extra: tuple

    @property
    def complete(self) -> bool:
        return not self.missing and not self.extra


def trace_key(t: QuadValue):
    return (t.a, t.b, t.m)


def trace_sort_key(t: QuadValue):
    return (t.a, t.b)


def coverage_report(expected: set, enumerated) -> Coverage:
    """Set differences between a model truncation and an enumeration.

    A nonempty ``extra`` is always a hard failure: an enumerated trace
    outside the model contradicts the containment direction.
    """
    if isinstance(enumerated, EnumerationResult):
        got = set(enumerated.traces)
    else:
        got = set(enumerated)
    expected = set(expected)
    missing = sorted(expected - got, key=trace_sort_key)
    covered = sorted(expected & got, key=trace_sort_key)
    extra = sorted(got - expected, key=trace_sort_key)
    return Coverage(tuple(missing), tuple(covered), tuple(extra))


def trace_to_length(t) -> float:
    """Geodesic length 2*arccosh(|t|/2); the library's only float output."""
    t = qv(t)
    if not t.is_real:
        raise NotHyperbolic(f"trace {t} is not real")
    at = abs(t)
    if at.cmp_real(QuadValue(2)) <= 0:
        raise NotHyperbolic(f"|trace| = {at} is not > 2")
    if at.is_rational:
        x = float(at.a)
    else:
        x = float(at.a) + float(at.b) * math.sqrt(at.m)
    return 2.0 * math.acosh(x / 2.0)
