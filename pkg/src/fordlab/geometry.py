"""Isometric circles and spheres, Ford domains, and exact separation checks.

Everything here decides geometry by exact sign computations on rational or
one/two-radical expressions; no check is ever settled by floating point.
Tangency counts as failure for every disjointness predicate, since the
combination arguments need closed sets to be disjoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import isqrt

from fordlab.exactnum import (
    NotComplexModulus,
    NotReal,
    PrecisionExhausted,
    QuadValue,
    RadicalExpr,
    qv,
    sqrt_qv,
)
from fordlab.moebius import MoebiusElement, bianchi_omega, omega_coords


class FixesInfinity(ValueError):
    """Isometric circles exist only for elements with c != 0."""


class LemmaViolation(Exception):
    """The two-generator Ford criterion failed; carries the failed inequality."""

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class Disjointness(Enum):
    DISJOINT = "disjoint"
    TANGENT = "tangent"
    OVERLAP = "overlap"


@dataclass(frozen=True)
class CheckRecord:
    name: str
    status: str                      # "pass" | "fail" | "undecided"
    margin: QuadValue | None = None
    witnesses: dict = field(default_factory=dict)


@dataclass
class SeparationReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.status == "pass" for c in self.checks)

    @property
    def undecided(self) -> bool:
        return any(c.status == "undecided" for c in self.checks)

    def failed_names(self):
        return [c.name for c in self.checks if c.status != "pass"]


def _real_sq(v: QuadValue) -> Fraction:
    """|v|^2 as a rational, for complex values or real values with a*b = 0."""
    v = qv(v)
    if v.m <= 0:
        return v.abs2()
    if v.a == 0:
        return v.b * v.b * v.m
    if v.b == 0:
        return v.a * v.a
    raise NotComplexModulus(f"|{v}|^2 is irrational")


@dataclass(frozen=True)
class IsometricDisk:
    """Isometric circle/sphere of its owner: center -d/c, radius 1/|c|."""

    center: QuadValue
    radius_sq: Fraction
    owner: MoebiusElement

    def radius_qv(self) -> QuadValue:
        return sqrt_qv(self.radius_sq)

    def same_circle(self, other: IsometricDisk) -> bool:
        return self.center == other.center and self.radius_sq == other.radius_sq


def isometric_disk(g: MoebiusElement) -> IsometricDisk:
    if g.c.is_zero():
        raise FixesInfinity(f"{g} fixes infinity")
    center = -g.d / g.c
    return IsometricDisk(center, Fraction(1) / _real_sq(g.c), g)


def _center_gap_sq(u: IsometricDisk, v: IsometricDisk) -> QuadValue:
    """|center(u) - center(v)|^2 as a real QuadValue."""
    delta = u.center - v.center
    if delta.is_real:
        return delta * delta
    return QuadValue(delta.abs2())


def _separation_expr(u: IsometricDisk, v: IsometricDisk) -> RadicalExpr:
    """|Dcenter|^2 - (r_u + r_v)^2 as a radical expression."""
    gap = _center_gap_sq(u, v)
    rhs = RadicalExpr(u.radius_sq + v.radius_sq,
                      ((2, u.radius_sq * v.radius_sq),))
    return gap.to_radical() - rhs


def disks_disjoint(u: IsometricDisk, v: IsometricDisk) -> Disjointness:
    s = _separation_expr(u, v).sign()
    if s > 0:
        return Disjointness.DISJOINT
    if s == 0:
        return Disjointness.TANGENT
    return Disjointness.OVERLAP


def separation_margin(u: IsometricDisk, v: IsometricDisk) -> QuadValue:
    """Margin witness |Dcenter| - r_u - r_v, or its squared form.

    Returns a QuadValue whenever the quantities combine into one ring,
    falling back to the squared margin |Dcenter|^2 - (r_u + r_v)^2.
    """
    gap2 = _center_gap_sq(u, v)
    try:
        if gap2.is_rational:
            dist = sqrt_qv(gap2.to_fraction())
        else:
            dist = abs(u.center - v.center)
        return dist - sqrt_qv(u.radius_sq) - sqrt_qv(v.radius_sq)
    except Exception:
        return _separation_expr(u, v).to_quadvalue()


# -- strip domains (upper half-plane) ------------------------------------------


class StripDomain:
    """Vertical strip minus finitely many excluded disks, with side pairings."""

    def __init__(self, center: QuadValue, halfwidth: QuadValue,
                 translation: MoebiusElement,
                 excluded: list[tuple[IsometricDisk, MoebiusElement]],
                 variant: str | None = None):
        center, halfwidth = qv(center), qv(halfwidth)
        if not (center.is_real and halfwidth.is_real):
            raise NotReal("strip data must be real")
        if halfwidth.sign_real() <= 0:
            raise ValueError("halfwidth must be positive")
        period = translation.b
        if not translation.a == QuadValue(1) or not translation.c.is_zero():
            raise ValueError("translation must be parabolic fixing infinity")
        if period.sign_real() < 0:
            translation = translation.inv()
            period = translation.b
        if period.sign_real() == 0:
            raise ValueError("translation has zero period")
        self.center = center
        self.halfwidth = halfwidth
        self.translation = translation
        self.period = period
        self.excluded = list(excluded)
        self.variant = variant
        for disk, _ in self.excluded:
            if not disk.center.is_real:
                raise NotReal("strip domains need real disk centers")
            # invariant: each excluded disk meets the strip closure
            reach = (RadicalExpr(0, ((1, disk.radius_sq),))
                     + (halfwidth - abs(disk.center - center)).to_radical())
            if reach.sign() < 0:
                raise ValueError(f"excluded disk at {disk.center} misses the strip")

    @property
    def ambient(self) -> int:
        return 2

    def left(self) -> QuadValue:
        return self.center - self.halfwidth

    def right(self) -> QuadValue:
        return self.center + self.halfwidth

    def __repr__(self):
        return (f"StripDomain(center={self.center}, halfwidth={self.halfwidth}, "
                f"disks={len(self.excluded)})")


def _edge_expr(disk: IsometricDisk, x: QuadValue, side: int) -> RadicalExpr:
    """side=+1: (x - right edge); side=-1: (left edge - x)."""
    if side > 0:
        base = (qv(x) - disk.center).to_radical()
    else:
        base = (disk.center - qv(x)).to_radical()
    return base - RadicalExpr(0, ((1, disk.radius_sq),))


def disk_within_interval(disk: IsometricDisk, x: QuadValue, y: QuadValue,
                         strict: bool = True) -> bool:
    lo = _edge_expr(disk, x, -1).sign()
    hi = _edge_expr(disk, y, +1).sign()
    if strict:
        return lo > 0 and hi > 0
    return lo >= 0 and hi >= 0


def disk_in_domain(u: IsometricDisk, domain) -> bool:
    """Closed disk inside the domain closure, off every excluded open disk."""
    if isinstance(domain, PrismDomain):
        return _ball_in_prism_domain(u, domain)
    if not disk_within_interval(u, domain.left(), domain.right(), strict=False):
        return False
    for other, _ in domain.excluded:
        if u.same_circle(other):
            return False
        if _separation_expr(u, other).sign() < 0:
            return False
    return True


def build_ford_two_gen(m, g2: MoebiusElement) -> StripDomain:
    """Two-generator Ford domain for <translation by m, g2>.

    Certifies either the classic inequalities (|a+d|/|c| < |m|/2 and
    |m| > 4/|c|) or the sharp period-fit test (union extent of the two
    isometric disks strictly under the period, with the self-domain
    condition).  The returned domain records which variant fired.
    """
    m = qv(m)
    if not m.is_real:
        raise NotReal("translation length must be real")
    if m.sign_real() == 0:
        raise ValueError("translation length must be nonzero")
    if g2.c.is_zero():
        raise FixesInfinity("second generator must not fix infinity")
    for v in (g2.a, g2.b, g2.c, g2.d):
        if not v.is_real:
            raise NotReal("two-generator strips are a half-plane construction")
    am = abs(m)
    disk = isometric_disk(g2)
    disk_inv = isometric_disk(g2.inv())
    trace = g2.trace()
    involution = trace.is_zero()

    # self-domain condition: real trace, or strictly disjoint own disks
    self_ok = trace.is_real or disks_disjoint(disk, disk_inv) == Disjointness.DISJOINT
    if not self_ok:
        raise LemmaViolation(
            "single-element domain condition fails: non-real trace with "
            "intersecting isometric circles")

    c2 = (g2.c * g2.c)          # |c|^2 as a real value
    t2 = trace * trace
    m2 = m * m
    # classic: 4*(a+d)^2 < m^2 c^2  and  m^2 c^2 > 16
    classic_sep = (4 * t2).cmp_real(m2 * c2) < 0
    classic_size = (m2 * c2).cmp_real(QuadValue(16)) > 0
    # sharp: (|a+d| + 2)^2 < m^2 c^2  (union extent strictly under the period)
    ext = abs(trace) + QuadValue(2)
    sharp_fit = (ext * ext).cmp_real(m2 * c2) < 0

    if classic_sep and classic_size:
        variant = "classic"
    elif sharp_fit:
        variant = "sharp"
    else:
        raise LemmaViolation(
            f"center gap check {'holds' if classic_sep else 'fails'} "
            f"(4(a+d)^2 vs m^2c^2 = {qv(4 * t2)} vs {m2 * c2}), "
            f"size check {'holds' if classic_size else 'fails'} "
            f"(m^2c^2 = {m2 * c2} vs 16), sharp period fit fails "
            f"((|a+d|+2)^2 = {ext * ext} vs m^2c^2 = {m2 * c2})")

    center = (g2.a - g2.d) / (2 * g2.c)
    excluded = [(disk, g2)]
    if not (involution and disk.same_circle(disk_inv)):
        excluded.append((disk_inv, g2.inv()))
    translation = MoebiusElement(1, am, 0, 1)
    return StripDomain(center, am / 2, translation, excluded, variant=variant)


# -- membership by Ford reduction ----------------------------------------------


class Membership(Enum):
    MEMBER = "member"
    NON_MEMBER = "non_member"
    UNDECIDED = "undecided"


@dataclass
class ReduceResult:
    status: Membership
    word: list[MoebiusElement]
    iterations: int


def _rational_upper_sqrt(x: Fraction) -> Fraction:
    n, d = x.numerator, x.denominator
    return Fraction(isqrt(n * d) + 1, d)


def _rational_point_in(lo: QuadValue, hi: QuadValue) -> Fraction:
    """Some rational strictly between two real values."""
    bits = 32
    while True:
        llo, lhi = lo.to_radical().interval(bits)
        hlo, hhi = hi.to_radical().interval(bits)
        if lhi < hlo:
            mid = (lhi + hlo) / 2
            if lo.cmp_real(QuadValue(mid)) < 0 and hi.cmp_real(QuadValue(mid)) > 0:
                return mid
        bits *= 2
        if bits > 2 ** 14:
            raise PrecisionExhausted("could not separate interval endpoints")


def domain_basepoint(domain: StripDomain) -> tuple[QuadValue, QuadValue]:
    """A rational interior point: near the strip center, above every disk."""
    if domain.center.is_rational:
        x0 = domain.center.a
    else:
        x0 = _rational_point_in(domain.center - domain.halfwidth / 2,
                                domain.center + domain.halfwidth / 2)
    top = Fraction(1)
    for disk, _ in domain.excluded:
        top = max(top, _rational_upper_sqrt(disk.radius_sq))
    y0 = 2 * top
    x = QuadValue(x0)
    for disk, _ in domain.excluded:
        # boundary collision is impossible for y0 above every disk, but a
        # deterministic nudge keeps the choice safe under refactors
        if ((x - disk.center) * (x - disk.center) + QuadValue(y0 * y0)) \
                .cmp_real(QuadValue(disk.radius_sq)) == 0:
            x = x + QuadValue(Fraction(1, 7))
    return x, QuadValue(y0)


def _point_in_open_disk(x: QuadValue, y: QuadValue, disk: IsometricDisk) -> int:
    """Sign of r^2 - |z - center|^2: >0 inside, 0 on boundary, <0 outside."""
    dx = x - disk.center
    return QuadValue(disk.radius_sq).cmp_real(dx * dx + y * y)


def membership_reduce(domain: StripDomain, target: MoebiusElement,
                      cap: int = 10000) -> ReduceResult:
    """Decide membership of target in the group with this Ford domain.

    Tracks the image of a rational interior basepoint under target and
    reduces it into the domain with strip translations and disk pairings.
    Member exactly when the accumulated word composed with target is the
    identity in PSL2.
    """
    x0, y0 = domain_basepoint(domain)
    x, y = target.apply_to_point(x0, y0)
    word: list[MoebiusElement] = []
    composed = None
    trans = domain.translation
    period = domain.period
    iterations = 0
    while iterations < cap:
        offset = x - domain.center
        if offset.cmp_real(domain.halfwidth) > 0:
            step = trans.inv()
        elif (-offset).cmp_real(domain.halfwidth) > 0:
            step = trans
        else:
            step = None
            for disk, pairing in domain.excluded:
                if _point_in_open_disk(x, y, disk) > 0:
                    step = pairing
                    break
        if step is None:
            break
        x, y = step.apply_to_point(x, y)
        word.append(step)
        composed = step if composed is None else step * composed
        iterations += 1
    else:
        return ReduceResult(Membership.UNDECIDED, word, iterations)

    total = target if composed is None else composed * target
    if total.is_identity():
        return ReduceResult(Membership.MEMBER, word, iterations)
    # interior landing with a nontrivial composition proves non-membership
    strict_strip = (abs(x - domain.center)).cmp_real(domain.halfwidth) < 0
    off_disks = all(_point_in_open_disk(x, y, disk) < 0
                    for disk, _ in domain.excluded)
    if strict_strip and off_disks:
        return ReduceResult(Membership.NON_MEMBER, word, iterations)
    return ReduceResult(Membership.UNDECIDED, word, iterations)


def infinite_area_height(domain) -> QuadValue:
    """Exact height above which the domain contains a full sub-strip/prism.

    Any such height certifies infinite area (volume): the strip or prism has
    positive width and every excluded disk or sphere stays below it.
    """
    best = Fraction(0)
    for disk, _ in domain.excluded:
        best = max(best, disk.radius_sq)
    return sqrt_qv(best)


# -- power sphere scans -----------------------------------------------------------


@dataclass
class ScanResult:
    entries: list            # (n, disk of g^n, disk of g^-n), deduplicated
    norms: list              # (n, |c(g^n)|^2) for every scanned exponent
    skipped: list            # exponents with c(g^n) = 0
    growing: bool


def power_sphere_scan(g: MoebiusElement, horizon: int) -> ScanResult:
    entries, norms, skipped = [], [], []
    seen = set()
    power = g
    for n in range(1, horizon + 1):
        if n > 1:
            power = power * g
        if power.c.is_zero():
            skipped.append(n)
            continue
        disk = isometric_disk(power)
        disk_inv = isometric_disk(power.inv())
        norms.append((n, _real_sq(power.c)))
        key = (disk.center, disk.radius_sq, disk_inv.center)
        if key not in seen:
            seen.add(key)
            entries.append((n, disk, disk_inv))
    window = [v for _, v in norms][-max(1, len(norms) // 2):]
    growing = len(window) >= 2 and all(a < b for a, b in zip(window, window[1:]))
    return ScanResult(entries, norms, skipped, growing)


# -- fixed point containment -------------------------------------------------------


def _fixed_point_poly(g: MoebiusElement):
    # fixed points solve c z^2 + (d - a) z - b = 0
    return g.c, g.d - g.a, -g.b


def disk_contains_fixed_point(g: MoebiusElement, disk: IsometricDisk) -> bool:
    """Exact test that the closed disk contains a fixed point of g."""
    t = g.trace()
    if t.is_real and all(v.is_rational for v in (g.a, g.b, g.c, g.d)):
        return _real_fixed_point_in(g, disk)
    return _complex_fixed_point_in(g, disk)


def _real_fixed_point_in(g: MoebiusElement, disk: IsometricDisk) -> bool:
    A, B, C = _fixed_point_poly(g)
    A, B, C = A.to_fraction(), B.to_fraction(), C.to_fraction()
    x0 = disk.center
    r2 = disk.radius_sq
    # p evaluated at center +- r, normalized by the leading coefficient
    base = A * (x0.to_fraction() ** 2) + A * r2 + B * x0.to_fraction() + C
    lin = 2 * A * x0.to_fraction() + B
    plo = RadicalExpr(A * base, ((-A * lin, r2),)).sign()
    phi = RadicalExpr(A * base, ((A * lin, r2),)).sign()
    if plo <= 0 and phi <= 0:
        return plo == 0 or phi == 0
    if plo * phi <= 0:
        return True
    # both endpoint values outside the root pair: roots inside iff the
    # vertex -B/2A lies within the closed interval
    vertex = Fraction(-B, 2 * A)
    lo_ok = RadicalExpr(vertex - x0.to_fraction(), ((1, r2),)).sign() >= 0
    hi_ok = RadicalExpr(x0.to_fraction() + 0 - vertex, ((1, r2),)).sign() >= 0
    disc = B * B - 4 * A * C
    return disc >= 0 and lo_ok and hi_ok


def _complex_fixed_point_in(g: MoebiusElement, disk: IsometricDisk) -> bool:
    # symmetric functions of the fixed points: s = sum, q = product
    s = (g.a - g.d) / g.c
    q_prod = -g.b / g.c
    z0 = disk.center
    rho = disk.radius_sq
    # N = |z0 - p+|^2 |z0 - p-|^2 = |z0^2 - s z0 + q|^2
    N = (z0 * z0 - s * z0 + q_prod).abs2()
    # T = |z0-p+|^2 + |z0-p-|^2 = 2|z0|^2 - 2Re(conj(z0) s) + X,
    # X = (|s|^2 + |s^2 - 4q|)/2
    re_zs = ((z0.conj() * s) + (z0 * s.conj())).a / 2
    R = (s * s - 4 * q_prod).abs2()
    T0 = 2 * z0.abs2() - 2 * re_zs + Fraction(s.abs2(), 2)
    # T = T0 + (1/2) sqrt(R); containment iff T <= 2 rho or N - rho T + rho^2 <= 0
    if RadicalExpr(T0 - 2 * rho, ((Fraction(1, 2), R),)).sign() <= 0:
        return True
    expr = RadicalExpr(N + rho * rho - rho * T0, ((-rho / 2, R),))
    return expr.sign() <= 0


# -- prisms (upper half-space) -------------------------------------------------------


class PrismDomain:
    """Chimney over a fundamental parallelogram of the lattice <3, 3*omega>."""

    def __init__(self, d: int, anchor: QuadValue,
                 excluded: list[tuple[IsometricDisk, MoebiusElement]]):
        self.d = d
        self.omega = bianchi_omega(d)
        self.anchor = qv(anchor)
        self.t1 = QuadValue(3)
        self.t2 = 3 * self.omega
        self.excluded = list(excluded)

    @property
    def ambient(self) -> int:
        return 3

    def lattice_coords(self, z: QuadValue) -> tuple[Fraction, Fraction]:
        u, v = omega_coords(z - self.anchor, self.d)
        return u / 3, v / 3

    def canonicalize(self, z: QuadValue) -> tuple[QuadValue, tuple[int, int]]:
        """Translate z by the lattice into the base cell; return (point, shift)."""
        s, t = self.lattice_coords(z)
        js, jt = s.numerator // s.denominator, t.numerator // t.denominator
        return z - self.t1 * js - self.t2 * jt, (-js, -jt)

    def wall_distance_sq(self, z: QuadValue) -> list[Fraction]:
        """Squared distances from z to the four wall planes."""
        out = []
        for p, u in ((self.anchor, self.t1), (self.anchor + self.t2, self.t1),
                     (self.anchor, self.t2), (self.anchor + self.t1, self.t2)):
            w = (z - p) * u.conj()
            im2 = w.b * w.b * self.d
            out.append(im2 / u.abs2())
        return out

    def __repr__(self):
        return f"PrismDomain(d={self.d}, anchor={self.anchor}, spheres={len(self.excluded)})"


def ball_strictly_in_prism(disk: IsometricDisk, prism: PrismDomain) -> tuple[bool, Fraction]:
    """Closed ball strictly inside the prism; returns (ok, min squared margin)."""
    s, t = prism.lattice_coords(disk.center)
    if not (0 < s < 1 and 0 < t < 1):
        return False, Fraction(-1)
    worst = None
    for dist2 in prism.wall_distance_sq(disk.center):
        margin = dist2 - disk.radius_sq
        if margin <= 0:
            return False, margin
        worst = margin if worst is None else min(worst, margin)
    return True, worst


def _ball_in_prism_domain(u: IsometricDisk, prism: PrismDomain) -> bool:
    s, t = prism.lattice_coords(u.center)
    if not (0 <= s <= 1 and 0 <= t <= 1):
        return False
    for dist2 in prism.wall_distance_sq(u.center):
        # closure containment allows tangency to the walls
        if dist2 < u.radius_sq:
            return False
    for other, _ in prism.excluded:
        if u.same_circle(other):
            return False
        if _separation_expr(u, other).sign() < 0:
            return False
    return True


def sphere_separation_sq_margin(center_a: QuadValue, r2_a: Fraction,
                                center_b: QuadValue, r2_b: Fraction) -> RadicalExpr:
    gap = (center_a - center_b).abs2()
    return RadicalExpr(gap - r2_a - r2_b, ((-2, r2_a * r2_b),))


# -- separation verification (half-plane) ----------------------------------------------


def verify_separation(items, ambient_check, ambient_name: str = "ambient",
                      cap: int = 10000) -> SeparationReport:
    """Exact verification of the conjugated-combination hypotheses.

    items: sequence of (domain, conjugator, (x, y) interval) triples.
    Checks: pairwise-disjoint intervals, conjugator disks strictly inside
    their interval, intervals inside the domain's real trace minus disk
    shadows, non-membership of each conjugator in its subgroup, the ambient
    predicate, and pairwise disjointness of all conjugator disks.
    """
    checks: list[CheckRecord] = []
    disks = []
    for idx, (domain, alpha, interval) in enumerate(items):
        x, y = qv(interval[0]), qv(interval[1])
        label = f"[{idx}]"
        if alpha.c.is_zero():
            checks.append(CheckRecord(f"conjugator_disks{label}", "fail",
                                      witnesses={"error": "FixesInfinity"}))
            continue
        da = isometric_disk(alpha)
        dai = isometric_disk(alpha.inv())
        disks.append((idx, da, dai))

        ok = (disk_within_interval(da, x, y) and disk_within_interval(dai, x, y))
        margin = _interval_margin(da, dai, x, y)
        checks.append(CheckRecord(f"conjugator_disks_in_interval{label}",
                                  "pass" if ok else "fail", margin=margin,
                                  witnesses={"interval": (str(x), str(y)),
                                             "disk_center": str(da.center)}))

        in_strip = (x.cmp_real(domain.left()) >= 0
                    and y.cmp_real(domain.right()) <= 0
                    and x.cmp_real(y) < 0)
        shadow_ok = True
        for disk, _ in domain.excluded:
            left = _edge_expr(disk, x, +1).sign()   # x - right edge
            right = _edge_expr(disk, y, -1).sign()  # left edge - y
            if left < 0 and right < 0:
                shadow_ok = False
                break
        checks.append(CheckRecord(f"interval_in_domain{label}",
                                  "pass" if (in_strip and shadow_ok) else "fail",
                                  witnesses={"interval": (str(x), str(y))}))

        reduce_result = membership_reduce(domain, alpha, cap=cap)
        if reduce_result.status == Membership.NON_MEMBER:
            status = "pass"
        elif reduce_result.status == Membership.MEMBER:
            status = "fail"
        else:
            status = "undecided"
        checks.append(CheckRecord(f"conjugator_not_in_subgroup{label}", status,
                                  witnesses={"iterations": reduce_result.iterations}))

        checks.append(CheckRecord(
            f"conjugator_in_{ambient_name}{label}",
            "pass" if ambient_check(alpha) else "fail"))

    intervals = [(qv(it[2][0]), qv(it[2][1])) for it in items]
    for i in range(len(intervals)):
        for j in range(i + 1, len(intervals)):
            xi, yi = intervals[i]
            xj, yj = intervals[j]
            ok = yi.cmp_real(xj) <= 0 or yj.cmp_real(xi) <= 0
            checks.append(CheckRecord(f"intervals_disjoint[{i},{j}]",
                                      "pass" if ok else "fail"))
    for ii in range(len(disks)):
        for jj in range(ii + 1, len(disks)):
            i, da, dai = disks[ii]
            j, db, dbi = disks[jj]
            left = [da] if da.same_circle(dai) else [da, dai]
            right = [db] if db.same_circle(dbi) else [db, dbi]
            worst = None
            ok = True
            for u in left:
                for v in right:
                    if disks_disjoint(u, v) != Disjointness.DISJOINT:
                        ok = False
                    mg = separation_margin(u, v)
                    if worst is None or (mg.is_real and worst.is_real
                                         and mg.cmp_real(worst) < 0):
                        worst = mg
            checks.append(CheckRecord(f"conjugator_disks_disjoint[{i},{j}]",
                                      "pass" if ok else "fail", margin=worst))
    return SeparationReport(checks)


def _interval_margin(da, dai, x, y):
    try:
        vals = []
        for disk in (da, dai):
            r = sqrt_qv(disk.radius_sq)
            vals.append(disk.center - r - x)
            vals.append(y - disk.center - r)
        worst = vals[0]
        for v in vals[1:]:
            if v.cmp_real(worst) < 0:
                worst = v
        return worst
    except Exception:
        return None


# -- separation verification (half-space) -----------------------------------------


def _point_segment_dist_sq(p: QuadValue, a: QuadValue, b: QuadValue) -> Fraction:
    u = b - a
    w = p - a
    t = ((w * u.conj() + u * w.conj()).a / 2) / u.abs2()
    t = min(max(t, Fraction(0)), Fraction(1))
    return (p - (a + u * t)).abs2()


def point_prism_dist_sq(z: QuadValue, prism: PrismDomain) -> Fraction:
    s, t = prism.lattice_coords(z)
    if 0 <= s <= 1 and 0 <= t <= 1:
        return Fraction(0)
    corners = [prism.anchor, prism.anchor + prism.t1,
               prism.anchor + prism.t1 + prism.t2, prism.anchor + prism.t2]
    best = None
    for i in range(4):
        d2 = _point_segment_dist_sq(z, corners[i], corners[(i + 1) % 4])
        best = d2 if best is None else min(best, d2)
    return best


_WIDE_OFFSETS = [(j, k) for j in range(-2, 3) for k in range(-2, 3)]


def sphere_translates_meeting_prism(prism: PrismDomain,
                                    bases: list[QuadValue],
                                    radius_sq: Fraction = Fraction(1)):
    """Lattice translates of the base centers whose spheres meet the prism."""
    centers = []
    seen = set()
    for base in bases:
        base0, _ = prism.canonicalize(qv(base))
        for j, k in _WIDE_OFFSETS:
            z = base0 + prism.t1 * j + prism.t2 * k
            key = (z.a, z.b)
            if key in seen:
                continue
            seen.add(key)
            if point_prism_dist_sq(z, prism) <= radius_sq:
                centers.append(z)
    centers.sort(key=lambda c: (c.a, c.b))
    return centers


def _linear_sphere_margin(center_a, r2_a, center_b, r2_b):
    try:
        gap = (qv(center_a) - qv(center_b)).abs2()
        return sqrt_qv(gap) - sqrt_qv(r2_a) - sqrt_qv(r2_b)
    except Exception:
        return None


def bianchi_separation_check(d: int, items, prism: PrismDomain,
                             horizon: int = 50) -> SeparationReport:
    """Exact combination hypotheses for the half-space construction.

    items: sequence of (x, gens, conjugator-or-None).  Each conjugator must
    be an involution whose sphere sits strictly inside the prism, away from
    every unit sphere of its own subgroup and of the unconjugated one, away
    from scanned power spheres where those arise, and away from the other
    conjugator spheres.  When a scan's growth flag is set, the remaining
    tail is accepted under a recorded monotone-growth assumption with an
    exact final margin; otherwise the tail check is left undecided.
    """
    checks: list[CheckRecord] = []
    delta_disks = []
    for idx, (x, gens, delta) in enumerate(items):
        x = qv(x)
        label = f"[{idx}]"
        gamma = next((g for g in gens if not g.c.is_zero()), None)
        scan = None
        if gamma is not None:
            trace = gamma.trace()
            if not trace.is_real and x.abs2() <= 4:
                scan = power_sphere_scan(gamma, horizon)
                bad = [n for n, dk, dki in scan.entries if dk.radius_sq > 1]
                checks.append(CheckRecord(
                    f"scan_radius_bound{label}", "pass" if not bad else "fail",
                    witnesses={"exponents": bad, "scanned": len(scan.entries),
                               "growing": scan.growing}))
        if delta is None:
            continue

        trace_zero = delta.canonical_trace().is_zero()
        checks.append(CheckRecord(f"delta_involution{label}",
                                  "pass" if trace_zero else "fail",
                                  witnesses={"trace": str(delta.canonical_trace())}))
        if delta.c.is_zero():
            checks.append(CheckRecord(f"delta_sphere{label}", "fail",
                                      witnesses={"error": "FixesInfinity"}))
            continue
        ddisk = isometric_disk(delta)
        delta_disks.append((idx, ddisk))

        ok, margin2 = ball_strictly_in_prism(ddisk, prism)
        checks.append(CheckRecord(f"delta_in_prism{label}",
                                  "pass" if ok else "fail",
                                  margin=QuadValue(margin2),
                                  witnesses={"kind": "squared"}))

        bases = [QuadValue(0)]
        if not x.is_zero():
            bases.append(x)
        worst = None
        clear = True
        for base in bases:
            base0, _ = prism.canonicalize(base)
            for j, k in _WIDE_OFFSETS:
                center = base0 + prism.t1 * j + prism.t2 * k
                s = sphere_separation_sq_margin(ddisk.center, ddisk.radius_sq,
                                                center, Fraction(1)).sign()
                if s <= 0:
                    clear = False
                lin = _linear_sphere_margin(ddisk.center, ddisk.radius_sq,
                                            center, Fraction(1))
                if lin is not None and (worst is None or lin.cmp_real(worst) < 0):
                    worst = lin
        checks.append(CheckRecord(f"delta_clears_unit_spheres{label}",
                                  "pass" if clear else "fail", margin=worst))

        if scan is not None:
            scan_ok = True
            for n, dk, dki in scan.entries:
                for disk in ((dk,) if dk.same_circle(dki) else (dk, dki)):
                    c0, _ = prism.canonicalize(disk.center)
                    for j, k in _WIDE_OFFSETS:
                        center = c0 + prism.t1 * j + prism.t2 * k
                        s = sphere_separation_sq_margin(
                            ddisk.center, ddisk.radius_sq,
                            center, disk.radius_sq).sign()
                        if s <= 0:
                            scan_ok = False
            checks.append(CheckRecord(f"delta_clears_power_spheres{label}",
                                      "pass" if scan_ok else "fail",
                                      witnesses={"scanned": len(scan.entries)}))
            if scan.growing:
                tail_ok = True
                cap_norm = scan.norms[-1][1]
                for base in bases:
                    base0, _ = prism.canonicalize(base)
                    for j, k in _WIDE_OFFSETS:
                        tau = base0 + prism.t1 * j + prism.t2 * k
                        dist2 = (ddisk.center - tau).abs2()
                        # need sqrt(dist2) > 1 + r_delta + 2/sqrt(cap_norm)
                        expr = RadicalExpr(-1, ((1, dist2),
                                                (-1, ddisk.radius_sq),
                                                (-2, Fraction(1) / cap_norm)))
                        try:
                            if expr.sign() <= 0:
                                tail_ok = False
                        except PrecisionExhausted:
                            tail_ok = None
                status = {True: "pass", False: "fail", None: "undecided"}[tail_ok]
                checks.append(CheckRecord(
                    f"power_tail{label}", status,
                    witnesses={"assumption": "monotone growth of |c(g^n)|^2",
                               "final_norm_sq": str(cap_norm)}))
            else:
                checks.append(CheckRecord(
                    f"power_tail{label}", "undecided",
                    witnesses={"reason": "growth flag not set at horizon",
                               "horizon": horizon}))

    for ii in range(len(delta_disks)):
        for jj in range(ii + 1, len(delta_disks)):
            i, di = delta_disks[ii]
            j, dj = delta_disks[jj]
            s = sphere_separation_sq_margin(di.center, di.radius_sq,
                                            dj.center, dj.radius_sq).sign()
            lin = _linear_sphere_margin(di.center, di.radius_sq,
                                        dj.center, dj.radius_sq)
            checks.append(CheckRecord(f"delta_spheres_disjoint[{i},{j}]",
                                      "pass" if s > 0 else "fail", margin=lin))
    return SeparationReport(checks)
