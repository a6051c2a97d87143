"""The generators f and g as fitted bridges, and words in the group they generate.

Each map is stored per source fundamental interval n as breakpoints in
local offsets together with the target interval and target breakpoints.
Pieces only see length ratios, so evaluation never forms a global
coordinate.
"""
from __future__ import annotations

import bisect
import math
import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .bridge import unit_derivative, unit_derivative_half, unit_half
from .errors import ConstructionError, ParameterError, RangeError
from .partition import LocalPoint, PartitionModel, needed_depth


@dataclass(frozen=True)
class IntervalPieces:
    """Restriction of a map to one source fundamental interval."""

    n: int
    target_n: int
    src: Tuple[float, ...]
    tgt: Tuple[float, ...]
    ratios: Tuple[float, ...]  # global |target piece| / |source piece|

    @property
    def identity(self) -> bool:
        return self.n == self.target_n and self.src == self.tgt

    def swapped(self) -> "IntervalPieces":
        return IntervalPieces(self.target_n, self.n, self.tgt, self.src, tuple(1.0 / r for r in self.ratios))


def _pieces(model: PartitionModel, n: int, target_n: int, src: Sequence[float], tgt: Sequence[float]) -> IntervalPieces:
    if not all(x < y for x, y in zip(src, src[1:])) or not all(x < y for x, y in zip(tgt, tgt[1:])):
        raise ConstructionError(f"breakpoints not strictly increasing on interval {n}: {src} -> {tgt}")
    scale = model.length(target_n) / model.length(n)
    ratios = tuple((tgt[j + 1] - tgt[j]) / (src[j + 1] - src[j]) * scale for j in range(len(src) - 1))
    return IntervalPieces(n, target_n, tuple(src), tuple(tgt), ratios)


class PiecewiseDiffeo:
    """A homeomorphism of [0, 1] fixing the endpoints, known on the materialized range."""

    def __init__(self, name: str, model: PartitionModel, pieces: Dict[int, IntervalPieces], inverse_of=None):
        self.name = name
        self.model = model
        self.pieces = pieces
        self._inverse = inverse_of

    # ---- pointwise -----------------------------------------------------

    def _lookup(self, p: LocalPoint) -> IntervalPieces:
        try:
            return self.pieces[p.n]
        except KeyError:
            lo, hi = min(self.pieces), max(self.pieces)
            needed = needed_depth(p.n + 1) if p.n > hi else None
            raise RangeError(
                f"{self.name}: point in interval n={p.n} outside its materialized domain n in [{lo}, {hi}]"
                + (f"; needs k_max >= {needed}" if needed else ""),
                needed_k_max=needed,
            ) from None

    def eval(self, p: LocalPoint) -> LocalPoint:
        if p.n is None:
            return p
        ip = self._lookup(p)
        if ip.identity:
            return p
        src, tgt = ip.src, ip.tgt
        j = min(bisect.bisect_right(src, p.s) - 1, len(src) - 2)
        lo, hi = src[j], src[j + 1]
        r = ip.ratios[j]
        width = hi - lo
        t_lo = (p.s - lo) / width
        t_hi = (hi - p.s) / width
        if ip.n == ip.target_n and src[j] == tgt[j] and src[j + 1] == tgt[j + 1]:
            s = p.s
        elif t_lo <= t_hi:
            s = tgt[j] + (tgt[j + 1] - tgt[j]) * unit_half(t_lo, r)
        else:
            s = tgt[j + 1] - (tgt[j + 1] - tgt[j]) * unit_half(t_hi, r)
        return self.model.canonical(ip.target_n, s)

    def __call__(self, p: LocalPoint) -> LocalPoint:
        return self.eval(p)

    def derivative(self, p: LocalPoint) -> float:
        """dy/dx in global coordinates."""
        if p.n is None:
            return 1.0
        ip = self._lookup(p)
        if ip.identity:
            return 1.0
        src = ip.src
        j = min(bisect.bisect_right(src, p.s) - 1, len(src) - 2)
        width = src[j + 1] - src[j]
        t = min(p.s - src[j], src[j + 1] - p.s) / width
        return unit_derivative_half(t, ip.ratios[j])

    def one_sided_derivatives(self, knot: LocalPoint) -> Tuple[float, float]:
        """Derivatives of the pieces meeting at a knot, each taken at its own endpoint."""
        ip = self._lookup(knot)
        j = ip.src.index(knot.s)
        if j > 0:
            left = unit_derivative_half(0.0, ip.ratios[j - 1])
        elif knot.n + 1 in self.pieces:
            left = unit_derivative_half(0.0, self.pieces[knot.n + 1].ratios[-1])
        else:
            left = 1.0  # identity extension below the materialized range
        return left, unit_derivative_half(0.0, ip.ratios[j])

    def inverse(self) -> "PiecewiseDiffeo":
        if self._inverse is None:
            swapped = {ip.target_n: ip.swapped() for ip in self.pieces.values()}
            name = self.name[:-3] if self.name.endswith("^-1") else self.name + "^-1"
            self._inverse = PiecewiseDiffeo(name, self.model, swapped, inverse_of=self)
        return self._inverse

    def eval_inverse(self, p: LocalPoint) -> LocalPoint:
        return self.inverse().eval(p)

    def iterate(self, p: LocalPoint, m: int) -> LocalPoint:
        for _ in range(m):
            p = self.eval(p)
        return p

    # ---- global views --------------------------------------------------

    def knots(self) -> List[LocalPoint]:
        out = []
        for n in sorted(self.pieces, reverse=True):
            ip = self.pieces[n]
            out.extend(LocalPoint(n, s) for s in ip.src[:-1])
        return out

    def piece_table(self) -> Tuple[np.ndarray, np.ndarray]:
        """(global source length, ratio) per piece, ordered left to right on [0, 1]."""
        lengths, ratios = [], []
        for n in sorted(self.pieces, reverse=True):
            ip = self.pieces[n]
            ell = self.model.length(n)
            for j in range(len(ip.src) - 1):
                lengths.append((ip.src[j + 1] - ip.src[j]) * ell)
                ratios.append(ip.ratios[j])
        return np.array(lengths), np.array(ratios)

    def eval_global(self, x: float) -> float:
        return self.model.to_global(self.eval(self.model.to_local(x)))

    def derivative_array(self, points: Sequence[LocalPoint]) -> np.ndarray:
        return np.array([self.derivative(p) for p in points])


def build_f(model: PartitionModel) -> PiecewiseDiffeo:
    params = model.params
    pieces: Dict[int, IntervalPieces] = {}
    for n in range(model.n_lo + 1, model.n_hi + 1):
        k = params.schedule.owner_level(n)
        if 1 <= k <= params.k_max - 1:
            i = params.n_k(k + 1) - n
            su, sv = model.chains[k][i]
            tu, tv = model.chains[k][i + 1]
            pieces[n] = _pieces(model, n, n - 1, (0.0, float(su), float(sv), 1.0), (0.0, float(tu), float(tv), 1.0))
        else:
            pieces[n] = _pieces(model, n, n - 1, (0.0, 1.0), (0.0, 1.0))
    return PiecewiseDiffeo("f", model, pieces)


def build_g(model: PartitionModel, verify: bool = True) -> PiecewiseDiffeo:
    params = model.params
    hosts = {params.n_k(k): k for k in model.levels}
    pieces: Dict[int, IntervalPieces] = {}
    for n in range(model.n_lo, model.n_hi + 1):
        k = hosts.get(n)
        if k is None:
            pieces[n] = IntervalPieces(n, n, (0.0, 1.0), (0.0, 1.0), (1.0,))
            continue
        u, v = model.uv_points(k)
        pieces[n] = _pieces(model, n, n, (0.0, 0.25, u.s, 0.75, 1.0), (0.0, 0.25, v.s, 0.75, 1.0))
    g = PiecewiseDiffeo("g", model, pieces)
    if verify:
        for k, n in ((k, params.n_k(k)) for k in model.levels):
            for s in np.linspace(0.25, 0.75, 102)[1:-1]:
                out = g.eval(LocalPoint(n, float(s)))
                if not (out.n == n and out.s > s):
                    raise ConstructionError(f"g(x) > x fails inside ]b_{k}, c_{k}[ at offset {s}")
    return g


@dataclass(frozen=True)
class Word:
    """Run-length encoded word over F, G; exponents are nonzero integers.

    Letters are applied left to right: ``Word.parse("F^-2 G^3")`` applies
    f^-1 twice, then g three times.
    """

    parts: Tuple[Tuple[str, int], ...] = ()

    _TOKEN = re.compile(r"^([FG])(?:\^?([+-]?\d+))?$")

    @classmethod
    def parse(cls, text: str) -> "Word":
        parts = []
        for tok in text.replace("*", " ").split():
            m = cls._TOKEN.match(tok)
            if not m:
                raise ParameterError(f"bad word token {tok!r}; expected e.g. F, G^3, F^-2")
            e = int(m.group(2)) if m.group(2) is not None else 1
            if e:
                parts.append((m.group(1), e))
        return cls(tuple(parts))

    @classmethod
    def of(cls, *parts: Tuple[str, int]) -> "Word":
        return cls(tuple((g, e) for g, e in parts if e))

    def reduced(self) -> "Word":
        out: List[List] = []
        for gen, e in self.parts:
            if out and out[-1][0] == gen:
                out[-1][1] += e
                if out[-1][1] == 0:
                    out.pop()
            else:
                out.append([gen, e])
        return Word(tuple((g, e) for g, e in out))

    def inverse(self) -> "Word":
        return Word(tuple((g, -e) for g, e in reversed(self.parts)))

    def __add__(self, other: "Word") -> "Word":
        return Word(self.parts + other.parts)

    def __len__(self) -> int:
        return sum(abs(e) for _, e in self.parts)

    def letters(self) -> List[str]:
        return [g if e > 0 else g + "-" for g, e in self.parts for _ in range(abs(e))]

    def __str__(self) -> str:
        return " ".join(g if e == 1 else f"{g}^{e}" for g, e in self.parts)

    def to_json(self) -> List[List]:
        return [[g, e] for g, e in self.parts]


class GroupAction:
    """The pair (f, g) built from one partition model."""

    def __init__(self, model: PartitionModel):
        self.model = model
        self.f = build_f(model)
        self.g = build_g(model)

    def generator(self, letter: str) -> PiecewiseDiffeo:
        base = self.f if letter[0] == "F" else self.g
        return base.inverse() if letter.endswith("-") else base

    def apply_word(self, word: Word, point: LocalPoint, with_derivative: bool = False):
        p = point
        deriv = 1.0
        done = 0
        for gen, e in word.parts:
            diffeo = self.generator(gen if e > 0 else gen + "-")
            for _ in range(abs(e)):
                try:
                    if with_derivative:
                        deriv *= diffeo.derivative(p)
                    p = diffeo.eval(p)
                except RangeError as exc:
                    raise RangeError(
                        f"word left the materialized domain after {done} letters: {exc}",
                        needed_k_max=exc.needed_k_max,
                        prefix=done,
                    ) from None
                done += 1
        return (p, deriv) if with_derivative else p


def apply_word(action: GroupAction, word: Word, point: LocalPoint) -> LocalPoint:
    return action.apply_word(word, point)
