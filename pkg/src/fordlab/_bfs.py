"""Breadth-first word enumeration over matrix generators.

Three interchangeable kernels, picked per generator set:

* an int64 numpy kernel for rational-integer matrices (the common case),
  with a per-level overflow guard that migrates to exact Python integers
  before any product could wrap;
* a numpy kernel for imaginary-quadratic integer matrices stored in ring
  coordinates;
* a generic exact kernel over MoebiusElement for everything else
  (real-quadratic entries in particular).

All kernels are level-synchronized and produce identical, order-independent
results for any frontier chunking, which is what makes reports reproducible
across parallelism degrees.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from fordlab.exactnum import QuadValue
from fordlab.moebius import MoebiusElement, omega_coords

_INT64_GUARD = 1 << 61
DEFAULT_STATE_CAP = 5_000_000


class StateExplosion(RuntimeError):
    """The enumeration hit the configured state cap before finishing."""


class EnumerationResult:
    """Traces found by the search, with shortest witness words and stats."""

    __slots__ = ("traces", "states_explored", "max_len_reached")

    def __init__(self, traces, states_explored, max_len_reached):
        self.traces = traces            # dict[QuadValue -> witness word str]
        self.states_explored = states_explored
        self.max_len_reached = max_len_reached

    def trace_set(self):
        return set(self.traces)


def _directions(gens):
    dirs, labels = [], []
    seen = {}
    for i, g in enumerate(gens):
        for elem, label in ((g, f"g{i}"), (g.inv(), f"g{i}^-1")):
            if elem.is_identity():
                continue
            k = elem.key()
            if k in seen:
                continue
            seen[k] = len(dirs)
            dirs.append(elem)
            labels.append(label)
    inv_idx = [seen[d.inv().key()] for d in dirs]
    return dirs, labels, inv_idx


def _chunks(n, parallelism):
    k = max(1, min(parallelism, n))
    step = (n + k - 1) // k
    return [(i, min(i + step, n)) for i in range(0, n, step)]


# -- plain integer matrices -----------------------------------------------


def _int_entries(g: MoebiusElement):
    row = []
    for v in (g.a, g.b, g.c, g.d):
        if v.b != 0 or v.a.denominator != 1:
            return None
        row.append(v.a.numerator)
    return tuple(row)


def _int_mul(x, y):
    a, b, c, d = x
    p, q, r, s = y
    return (a * p + b * r, a * q + b * s, c * p + d * r, c * q + d * s)


def _int_normalize(row):
    a, b, c, d = row
    for v in (c, a, b, d):
        if v:
            if v < 0:
                return (-a, -b, -c, -d)
            return row
    return row


def _np_normalize(arr):
    sgn = np.where(arr[:, 2] != 0, np.sign(arr[:, 2]),
                   np.where(arr[:, 0] != 0, np.sign(arr[:, 0]),
                            np.where(arr[:, 1] != 0, np.sign(arr[:, 1]),
                                     np.sign(arr[:, 3]))))
    return arr * sgn[:, None]


def _np_mul(arr, gen):
    p, q, r, s = gen
    a, b, c, d = arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]
    return np.stack([a * p + b * r, a * q + b * s,
                     c * p + d * r, c * q + d * s], axis=1)


class _IntSearch:
    """BFS over integer matrices; numpy-accelerated while entries fit int64."""

    def __init__(self, gens, bound: Fraction, cap: int, parallelism: int):
        dirs, self.labels, self.inv_idx = _directions(gens)
        self.dirs_t = [_int_entries(d) for d in dirs]
        self.bound_floor = bound.numerator // bound.denominator
        self.cap = cap
        self.parallelism = max(1, parallelism)
        self.gen_max = max((max(abs(e) for e in t) for t in self.dirs_t),
                           default=1)
        self.visited = {(1, 0, 0, 1): 0}
        self.traces = {}      # |trace| int -> (level, state tuple)
        self.max_level = 0

    def run(self, max_len: int) -> None:
        frontier = [((1, 0, 0, 1), -1)]
        use_np = True
        np_frontier = np.array([[1, 0, 0, 1]], dtype=np.int64)
        np_last = np.array([-1], dtype=np.int16)
        for level in range(1, max_len + 1):
            if use_np:
                cur_max = int(np.abs(np_frontier).max()) if len(np_frontier) else 0
                if 2 * cur_max * self.gen_max >= _INT64_GUARD:
                    frontier = [(tuple(int(x) for x in row), int(ld))
                                for row, ld in zip(np_frontier, np_last)]
                    use_np = False
            if use_np:
                np_frontier, np_last = self._np_level(np_frontier, np_last, level)
                if not len(np_frontier):
                    break
            else:
                frontier = self._py_level(frontier, level)
                if not frontier:
                    break
            self.max_level = level
            if len(self.visited) > self.cap:
                raise StateExplosion(
                    f"state count {len(self.visited)} exceeds cap {self.cap}")

    def _np_level(self, frontier, last, level):
        parts, part_dirs = [], []
        for lo, hi in _chunks(len(frontier), self.parallelism):
            chunk, chunk_last = frontier[lo:hi], last[lo:hi]
            for j, gen in enumerate(self.dirs_t):
                mask = chunk_last != self.inv_idx[j]
                sub = chunk[mask]
                if not len(sub):
                    continue
                prod = _np_normalize(_np_mul(sub, gen))
                parts.append(prod)
                part_dirs.append(np.full(len(prod), j, dtype=np.int16))
        if not parts:
            return np.empty((0, 4), dtype=np.int64), np.empty(0, dtype=np.int16)
        cands = np.vstack(parts)
        cand_dirs = np.concatenate(part_dirs)
        uniq, first = np.unique(cands, axis=0, return_index=True)
        uniq_dirs = cand_dirs[first]
        visited = self.visited
        keep = np.ones(len(uniq), dtype=bool)
        rows = uniq.tolist()
        for i, row in enumerate(rows):
            key = (row[0], row[1], row[2], row[3])
            if key in visited:
                keep[i] = False
            else:
                visited[key] = level
                t = row[0] + row[3]
                t = -t if t < 0 else t
                if t <= self.bound_floor and t not in self.traces:
                    self.traces[t] = (level, key)
        return uniq[keep], uniq_dirs[keep]

    def _py_level(self, frontier, level):
        cands = {}
        for state, last in frontier:
            for j, gen in enumerate(self.dirs_t):
                if last == self.inv_idx[j]:
                    continue
                nxt = _int_normalize(_int_mul(state, gen))
                if nxt not in cands:
                    cands[nxt] = j
        nxt_frontier = []
        visited = self.visited
        for key in sorted(cands):
            if key in visited:
                continue
            visited[key] = level
            t = abs(key[0] + key[3])
            if t <= self.bound_floor and t not in self.traces:
                self.traces[t] = (level, key)
            nxt_frontier.append((key, cands[key]))
        return nxt_frontier

    def witness(self, state, level) -> str:
        word = []
        cur = state
        for lvl in range(level, 0, -1):
            for j, gen in enumerate(self.dirs_t):
                inv = self.dirs_t[self.inv_idx[j]]
                parent = _int_normalize(_int_mul(cur, inv))
                if self.visited.get(parent) == lvl - 1:
                    word.append(self.labels[j])
                    cur = parent
                    break
            else:
                raise AssertionError("witness backtrack failed")
        return "*".join(reversed(word))

    def result(self) -> EnumerationResult:
        out = {}
        for t, (level, state) in sorted(self.traces.items()):
            out[QuadValue(t)] = self.witness(state, level)
        return EnumerationResult(out, len(self.visited), self.max_level)


# -- imaginary quadratic integer matrices ------------------------------------


def _ring_constants(d: int):
    # omega^2 = e1*omega + e0
    if d % 4 == 3:
        return 1, -(1 + d) // 4
    return 0, -d


def _pair_entries(g: MoebiusElement, d: int):
    row = []
    for v in (g.a, g.b, g.c, g.d):
        try:
            u, w = omega_coords(v, d)
        except Exception:
            return None
        if u.denominator != 1 or w.denominator != 1:
            return None
        row.extend((u.numerator, w.numerator))
    return tuple(row)


class _PairSearch:
    """BFS over matrices with entries u + v*omega in an imaginary ring."""

    def __init__(self, gens, d: int, bound: Fraction, cap: int, parallelism: int):
        dirs, self.labels, self.inv_idx = _directions(gens)
        self.d = d
        self.e1, self.e0 = _ring_constants(d)
        self.dirs_t = [_pair_entries(g, d) for g in dirs]
        self.bound4_num = 4 * bound.numerator
        self.bound_den = bound.denominator
        self.cap = cap
        self.parallelism = max(1, parallelism)
        self.gen_max = max((max(abs(e) for e in t) for t in self.dirs_t),
                           default=1)
        self.visited = {(1, 0, 0, 0, 0, 0, 1, 0): 0}
        self.traces = {}      # canonical (u, v) -> (level, state)
        self.max_level = 0

    # ring product of entry pairs
    def _emul(self, u1, v1, u2, v2):
        uv = v1 * v2
        return (u1 * u2 + uv * self.e0, u1 * v2 + v1 * u2 + uv * self.e1)

    def _mul(self, x, y):
        au, av, bu, bv, cu, cv, du, dv = x
        pu, pv, qu, qv_, ru, rv, su, sv = y
        t1 = self._emul(au, av, pu, pv)
        t2 = self._emul(bu, bv, ru, rv)
        a = (t1[0] + t2[0], t1[1] + t2[1])
        t1 = self._emul(au, av, qu, qv_)
        t2 = self._emul(bu, bv, su, sv)
        b = (t1[0] + t2[0], t1[1] + t2[1])
        t1 = self._emul(cu, cv, pu, pv)
        t2 = self._emul(du, dv, ru, rv)
        c = (t1[0] + t2[0], t1[1] + t2[1])
        t1 = self._emul(cu, cv, qu, qv_)
        t2 = self._emul(du, dv, su, sv)
        dd = (t1[0] + t2[0], t1[1] + t2[1])
        return a + b + c + dd

    def _entry_sign(self, u, v):
        # sign of the canonical-positivity functional for u + v*omega
        lead = 2 * u + v if self.d % 4 == 3 else u
        if lead:
            return 1 if lead > 0 else -1
        if v:
            return 1 if v > 0 else -1
        return 0

    def _normalize(self, row):
        for off in (4, 0, 2, 6):
            s = self._entry_sign(row[off], row[off + 1])
            if s:
                return row if s > 0 else tuple(-x for x in row)
        return row

    def _np_mul(self, arr, gen):
        e0, e1 = self.e0, self.e1
        pu, pv, qu, qv_, ru, rv, su, sv = gen

        def emul_cols(u1, v1, u2, v2):
            uv = v1 * v2
            return u1 * u2 + uv * e0, u1 * v2 + v1 * u2 + uv * e1

        au, av, bu, bv = arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]
        cu, cv, du, dv = arr[:, 4], arr[:, 5], arr[:, 6], arr[:, 7]
        cols = []
        for (xu, xv, yu, yv) in ((au, av, bu, bv), (cu, cv, du, dv)):
            for (gu, gv, hu, hv) in ((pu, pv, ru, rv), (qu, qv_, su, sv)):
                m1 = emul_cols(xu, xv, gu, gv)
                m2 = emul_cols(yu, yv, hu, hv)
                cols.extend((m1[0] + m2[0], m1[1] + m2[1]))
        return np.stack(cols, axis=1)

    def _np_normalize(self, arr):
        if self.d % 4 == 3:
            lead = lambda off: 2 * arr[:, off] + arr[:, off + 1]
        else:
            lead = lambda off: arr[:, off]
        sgn = np.zeros(len(arr), dtype=np.int64)
        for off in (4, 0, 2, 6):
            l = lead(off)
            v = arr[:, off + 1]
            s = np.where(l != 0, np.sign(l), np.sign(v))
            sgn = np.where(sgn == 0, s, sgn)
        sgn = np.where(sgn == 0, 1, sgn)
        return arr * sgn[:, None]

    def _canonical_trace_pair(self, tu, tv):
        s = self._entry_sign(tu, tv)
        if s < 0:
            return (-tu, -tv)
        return (tu, tv)

    def _trace_in_bound(self, tu, tv):
        if self.d % 4 == 3:
            x = (2 * tu + tv) ** 2 + self.d * tv * tv
        else:
            x = 4 * (tu * tu + self.d * tv * tv)
        return x * self.bound_den <= self.bound4_num

    def run(self, max_len: int) -> None:
        use_np = True
        np_frontier = np.array([[1, 0, 0, 0, 0, 0, 1, 0]], dtype=np.int64)
        np_last = np.array([-1], dtype=np.int16)
        frontier = []
        for level in range(1, max_len + 1):
            if use_np:
                cur_max = int(np.abs(np_frontier).max()) if len(np_frontier) else 0
                worst = 2 * cur_max * self.gen_max * (2 + abs(self.e0) + abs(self.e1))
                if worst >= _INT64_GUARD:
                    frontier = [(tuple(int(x) for x in row), int(ld))
                                for row, ld in zip(np_frontier, np_last)]
                    use_np = False
            if use_np:
                np_frontier, np_last = self._np_level(np_frontier, np_last, level)
                if not len(np_frontier):
                    break
            else:
                frontier = self._py_level(frontier, level)
                if not frontier:
                    break
            self.max_level = level
            if len(self.visited) > self.cap:
                raise StateExplosion(
                    f"state count {len(self.visited)} exceeds cap {self.cap}")

    def _record(self, key, level):
        tu, tv = key[0] + key[6], key[1] + key[7]
        ct = self._canonical_trace_pair(tu, tv)
        if self._trace_in_bound(*ct) and ct not in self.traces:
            self.traces[ct] = (level, key)

    def _np_level(self, frontier, last, level):
        parts, part_dirs = [], []
        for lo, hi in _chunks(len(frontier), self.parallelism):
            chunk, chunk_last = frontier[lo:hi], last[lo:hi]
            for j, gen in enumerate(self.dirs_t):
                mask = chunk_last != self.inv_idx[j]
                sub = chunk[mask]
                if not len(sub):
                    continue
                prod = self._np_normalize(self._np_mul(sub, gen))
                parts.append(prod)
                part_dirs.append(np.full(len(prod), j, dtype=np.int16))
        if not parts:
            return np.empty((0, 8), dtype=np.int64), np.empty(0, dtype=np.int16)
        cands = np.vstack(parts)
        cand_dirs = np.concatenate(part_dirs)
        uniq, first = np.unique(cands, axis=0, return_index=True)
        uniq_dirs = cand_dirs[first]
        keep = np.ones(len(uniq), dtype=bool)
        visited = self.visited
        for i, row in enumerate(uniq.tolist()):
            key = tuple(row)
            if key in visited:
                keep[i] = False
            else:
                visited[key] = level
                self._record(key, level)
        return uniq[keep], uniq_dirs[keep]

    def _py_level(self, frontier, level):
        cands = {}
        for state, last in frontier:
            for j, gen in enumerate(self.dirs_t):
                if last == self.inv_idx[j]:
                    continue
                nxt = self._normalize(self._mul(state, gen))
                if nxt not in cands:
                    cands[nxt] = j
        out = []
        for key in sorted(cands):
            if key in self.visited:
                continue
            self.visited[key] = level
            self._record(key, level)
            out.append((key, cands[key]))
        return out

    def witness(self, state, level) -> str:
        word = []
        cur = state
        for lvl in range(level, 0, -1):
            for j in range(len(self.dirs_t)):
                inv = self.dirs_t[self.inv_idx[j]]
                parent = self._normalize(self._mul(cur, inv))
                if self.visited.get(parent) == lvl - 1:
                    word.append(self.labels[j])
                    cur = parent
                    break
            else:
                raise AssertionError("witness backtrack failed")
        return "*".join(reversed(word))

    def _pair_to_qv(self, tu, tv):
        if self.d % 4 == 3:
            return QuadValue(Fraction(2 * tu + tv, 2), Fraction(tv, 2), -self.d)
        return QuadValue(tu, tv, -self.d)

    def result(self) -> EnumerationResult:
        out = {}
        for key in sorted(self.traces):
            level, state = self.traces[key]
            out[self._pair_to_qv(*key)] = self.witness(state, level)
        return EnumerationResult(out, len(self.visited), self.max_level)


# -- generic exact kernel ------------------------------------------------------


class _GenericSearch:
    """Exact BFS over MoebiusElement states; used for real-quadratic entries."""

    def __init__(self, gens, bound: Fraction, cap: int, parallelism: int):
        self.dirs, self.labels, self.inv_idx = _directions(gens)
        self.bound = bound
        self.cap = cap
        from fordlab.moebius import identity
        ident = identity()
        self.visited = {ident.key(): 0}
        self.elements = {ident.key(): ident}
        self.traces = {}      # trace sort key -> (QuadValue, level, state key)
        self.max_level = 0

    def _trace_bounded(self, t: QuadValue) -> bool:
        if t.is_real:
            return abs(t) <= QuadValue(self.bound)
        return t.abs2() <= self.bound

    def run(self, max_len: int) -> None:
        frontier = [(next(iter(self.elements.values())), -1)]
        for level in range(1, max_len + 1):
            cands = {}
            for state, last in frontier:
                for j, gen in enumerate(self.dirs):
                    if last == self.inv_idx[j]:
                        continue
                    nxt = state * gen
                    k = nxt.key()
                    if k not in cands:
                        cands[k] = (nxt, j)
            nxt_frontier = []
            for k in sorted(cands):
                if k in self.visited:
                    continue
                elem, j = cands[k]
                self.visited[k] = level
                self.elements[k] = elem
                t = elem.canonical_trace()
                tk = (t.a, t.b, t.m)
                if tk not in self.traces and self._trace_bounded(t):
                    self.traces[tk] = (t, level, k)
                nxt_frontier.append((elem, j))
            if not nxt_frontier:
                break
            self.max_level = level
            frontier = nxt_frontier
            if len(self.visited) > self.cap:
                raise StateExplosion(
                    f"state count {len(self.visited)} exceeds cap {self.cap}")

    def witness(self, state_key, level) -> str:
        word = []
        cur = self.elements[state_key]
        for lvl in range(level, 0, -1):
            for j, gen in enumerate(self.dirs):
                parent = cur * self.dirs[self.inv_idx[j]]
                pk = parent.key()
                if self.visited.get(pk) == lvl - 1:
                    word.append(self.labels[j])
                    cur = parent
                    break
            else:
                raise AssertionError("witness backtrack failed")
        return "*".join(reversed(word))

    def result(self) -> EnumerationResult:
        out = {}
        for tk in sorted(self.traces):
            t, level, key = self.traces[tk]
            out[t] = self.witness(key, level)
        return EnumerationResult(out, len(self.visited), self.max_level)


def _detect_ring_d(gens) -> int | None:
    d = None
    for g in gens:
        for v in (g.a, g.b, g.c, g.d):
            if v.m < 0:
                if d is not None and d != -v.m:
                    return None
                d = -v.m
            elif v.m > 0:
                return None
    return d


def bfs_enumerate(gens, max_word_len: int, trace_bound: Fraction,
                  state_cap: int = DEFAULT_STATE_CAP,
                  parallelism: int = 1) -> EnumerationResult:
    """Enumerate canonical traces of words up to the given length."""
    if not gens:
        raise ValueError("generator list is empty")
    if max_word_len < 1:
        raise ValueError("max_word_len must be at least 1")
    trace_bound = Fraction(trace_bound)
    int_rows = [_int_entries(g) for g in gens]
    if all(r is not None for r in int_rows):
        search = _IntSearch(gens, trace_bound, state_cap, parallelism)
    else:
        d = _detect_ring_d(gens)
        if d is not None and all(_pair_entries(g, d) is not None for g in gens):
            search = _PairSearch(gens, d, trace_bound, state_cap, parallelism)
        else:
            search = _GenericSearch(gens, trace_bound, state_cap, parallelism)
    search.run(max_word_len)
    return search.result()
