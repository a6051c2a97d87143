"""Finite descent certificates and orbit exploration for the action of <f, g>.

A level-k certificate is a word G^-m F^-(n_{k+1} - n_k) (read left to right)
carrying u_k into ]b_{k+1}, c_{k+1}[.  Since f^(n_{k+1}-n_k) maps
[u_{k+1}, v_{k+1}] onto [b_k, c_k], the search always succeeds; the
certificate is re-checked by plain word application.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import RangeError
from .generators import GroupAction, Word
from .partition import LocalPoint, PartitionModel

DEFAULT_M_MAX = 10 ** 6


@dataclass(frozen=True)
class LevelInfo:
    kind: str  # "level", "endpoint", "gap", "fixed"
    k: Optional[int] = None
    marked: bool = False  # inside [u_k, v_k]
    chain: Optional[Tuple[int, int]] = None  # (k, i) when inside a chain interval

    def to_json(self) -> dict:
        return {"kind": self.kind, "k": self.k, "marked": self.marked, "chain": list(self.chain) if self.chain else None}


def level_of(model: PartitionModel, p: LocalPoint) -> LevelInfo:
    if p.n is None:
        return LevelInfo("fixed")
    params = model.params
    chain = None
    k_owner = params.schedule.owner_level(p.n)
    if 1 <= k_owner <= params.k_max - 1:
        i = params.n_k(k_owner + 1) - p.n
        su, sv = model.chains[k_owner][i]
        if su <= p.s <= sv:
            chain = (k_owner, i)
    for k in model.levels:
        if params.n_k(k) != p.n:
            continue
        if p.s in (0.25, 0.75):
            return LevelInfo("endpoint", k, chain=chain)
        if 0.25 < p.s < 0.75:
            u, v = model.uv_points(k)
            return LevelInfo("level", k, marked=u.s <= p.s <= v.s, chain=chain)
    return LevelInfo("gap", chain=chain)


def _margin(model: PartitionModel, p: LocalPoint, k: int) -> float:
    """Signed global distance from p to the complement of ]b_k, c_k[."""
    if p.n != model.params.n_k(k):
        return -math.inf
    return min(p.s - 0.25, 0.75 - p.s) * model.length(p.n)


@dataclass
class DescentCertificate:
    k: int
    m: Optional[int]
    word: Word
    start: LocalPoint
    end: Optional[LocalPoint]
    margin: float
    found: bool
    closest: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "m": self.m,
            "word": self.word.to_json(),
            "word_text": str(self.word),
            "start": {"n": self.start.n, "s": self.start.s},
            "end": None if self.end is None else {"n": self.end.n, "s": self.end.s},
            "margin": self.margin,
            "found": self.found,
            "closest": self.closest,
        }


def descend_from(action: GroupAction, p: LocalPoint, k: int, m_max: int = DEFAULT_M_MAX) -> DescentCertificate:
    """Minimal m with F^-(n_{k+1}-n_k) G^-m (applied to p, g^-1 first) inside ]b_{k+1}, c_{k+1}[."""
    model = action.model
    steps = model.params.chain_length(k)
    f_inv = action.f.inverse()
    g_inv = action.g.inverse()
    q = p
    closest = -math.inf
    for m in range(m_max + 1):
        end = f_inv.iterate(q, steps)
        margin = _margin(model, end, k + 1)
        if margin > 0:
            return DescentCertificate(k, m, Word.of(("G", -m), ("F", -steps)), p, end, margin, True)
        closest = max(closest, margin)
        q = g_inv.eval(q)
    return DescentCertificate(k, None, Word(), p, None, -math.inf, False, closest=-closest)


def descent_certificate(action: GroupAction, k: int, m_max: int = DEFAULT_M_MAX) -> DescentCertificate:
    """Certificate starting from u_k; needs k + 1 <= k_max."""
    model = action.model
    if not 1 <= k <= model.params.k_max - 1:
        raise RangeError(f"descent from level {k} needs 1 <= k <= k_max - 1 = {model.params.k_max - 1}",
                         needed_k_max=k + 1)
    return descend_from(action, model.uv_points(k)[0], k, m_max)


def verify_certificate(action: GroupAction, cert: DescentCertificate) -> float:
    """Re-apply the stored word to the start point; returns the containment margin."""
    end = action.apply_word(cert.word, cert.start)
    return _margin(action.model, end, cert.k + 1)


@dataclass
class Cascade:
    certificates: List[DescentCertificate]
    complete: bool
    failed_stage: Optional[int] = None

    @property
    def word(self) -> Word:
        out = Word()
        for c in self.certificates:
            out = out + c.word
        return out

    def to_json(self) -> dict:
        return {
            "complete": self.complete,
            "failed_stage": self.failed_stage,
            "word": self.word.to_json(),
            "word_length": len(self.word),
            "certificates": [c.to_json() for c in self.certificates],
        }


def descent_cascade(action: GroupAction, k_from: int, k_to: int, m_max: int = DEFAULT_M_MAX) -> Cascade:
    """Chain certificates k_from..k_to, feeding each end point into the next search."""
    if k_to > action.model.params.k_max - 1 or k_from < 1 or k_to < k_from:
        raise RangeError(f"cascade {k_from}..{k_to} needs 1 <= k_from <= k_to <= k_max - 1")
    p = action.model.uv_points(k_from)[0]
    certs = []
    for k in range(k_from, k_to + 1):
        cert = descend_from(action, p, k, m_max)
        certs.append(cert)
        if not cert.found:
            return Cascade(certs, False, failed_stage=k)
        p = cert.end
    return Cascade(certs, True)


def g_inverse_approach(action: GroupAction, k: int, delta: float, m_max: int = DEFAULT_M_MAX) -> Tuple[Optional[int], bool]:
    """Steps m until |g^-m(u_k) - b_k| < delta, and whether the distance fell strictly at every step."""
    model = action.model
    u = model.uv_points(k)[0]
    g_inv = action.g.inverse()
    ell = model.length(u.n)
    p = u
    dist = (p.s - 0.25) * ell
    monotone = True
    for m in range(1, m_max + 1):
        p = g_inv.eval(p)
        new = (p.s - 0.25) * ell
        monotone &= new < dist
        dist = new
        if dist < delta:
            return m, monotone
    return None, monotone


@dataclass
class OrbitReport:
    visited: int
    deepest_level: int
    levels_reached: List[int]
    marked_entered: int
    lowest: Optional[LocalPoint]
    highest: Optional[LocalPoint]
    truncated: bool

    def to_json(self) -> dict:
        pt = lambda q: None if q is None else {"n": q.n, "s": q.s}
        return {
            "visited": self.visited,
            "deepest_level": self.deepest_level,
            "levels_reached": self.levels_reached,
            "marked_entered": self.marked_entered,
            "lowest": pt(self.lowest),
            "highest": pt(self.highest),
            "truncated": self.truncated,
        }


LETTERS = ("F", "F-", "G", "G-")


def orbit_explore(
    action: GroupAction,
    start: LocalPoint,
    max_word_length: int,
    budget: int = 100_000,
    letters: Sequence[str] = LETTERS,
    resolution: float = 1e-3,
) -> OrbitReport:
    """Breadth-first exploration with revisits pruned on a (n, s / resolution) grid."""
    model = action.model
    gens = [action.generator(x) for x in letters]

    def key(q: LocalPoint):
        return (q.n, q.s) if q.n is None else (q.n, int(q.s / resolution))

    seen = {key(start)}
    queue = deque([(start, 0)])
    points = []
    truncated = False
    while queue:
        q, depth = queue.popleft()
        points.append(q)
        if depth == max_word_length:
            continue
        for gen in gens:
            try:
                nxt = gen.eval(q)
            except RangeError:
                continue
            kk = key(nxt)
            if kk in seen:
                continue
            if len(seen) >= budget:
                truncated = True
                continue
            seen.add(kk)
            queue.append((nxt, depth + 1))

    levels = set()
    marked = set()
    for q in points:
        info = level_of(model, q)
        if info.kind == "level":
            levels.add(info.k)
            if info.marked:
                marked.add(("uv", info.k))
        if info.chain is not None:
            marked.add(("chain",) + info.chain)
    finite = [q for q in points if q.n is not None]
    return OrbitReport(
        visited=len(points),
        deepest_level=max(levels, default=0),
        levels_reached=sorted(levels),
        marked_entered=len(marked),
        lowest=max(finite, key=lambda q: (q.n, -q.s), default=None),
        highest=min(finite, key=lambda q: (q.n, -q.s), default=None),
        truncated=truncated,
    )
