"""Cotangent charts and the bridge diffeomorphisms glued into f and g.

For I = [a, b] the chart is

    phi_{a,b}(x) = -cot(pi (x - a) / (b - a)) / (b - a)

and the bridge I -> J is phi_J^{-1} o phi_I.  In normalized coordinates
t = (x - a) / |I| the bridge only depends on r = |J| / |I|:

    tan(pi t') = tan(pi t) / r,        dy/dx = r^2 (1 + w^2) / (r^2 + w^2),  w = tan(pi t)

so it is tangent to the identity at both ends.  Evaluation is reflected
about the midpoint and switches to cot(pi t) = tan(pi (1/2 - t)) on the
inner quarter, so no branch ever sees an argument near a pole.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Tuple

import numpy as np

from .errors import DomainError, ParameterError

PI = math.pi


@dataclass(frozen=True)
class PowerModulus:
    """omega(s) = s**alpha."""

    alpha: float

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ParameterError(f"alpha must lie in (0, 1], got {self.alpha}")

    def __call__(self, s):
        return np.power(s, self.alpha)


def phi(a: float, b: float, x: float) -> float:
    if not a < x < b:
        raise DomainError(f"phi_{{{a},{b}}} undefined at x={x}")
    L = b - a
    t = (x - a) / L
    if t < 0.25:
        return -1.0 / (L * math.tan(PI * t))
    if t > 0.75:
        return 1.0 / (L * math.tan(PI * ((b - x) / L)))
    return -math.tan(PI * (0.5 - t)) / L


def phi_inv(a: float, b: float, y: float) -> float:
    """Inverse chart; arccot taken on the principal branch (0, pi)."""
    if not math.isfinite(y):
        raise DomainError(f"phi_inv needs a finite value, got {y}")
    L = b - a
    z = -y * L  # cot(pi t) = z
    if z > 1:
        t = math.atan(1.0 / z) / PI
        return a + L * t
    if z < -1:
        return b - L * (math.atan(-1.0 / z) / PI)
    return a + L * (0.5 - math.atan(z) / PI)


def unit_half(t: float, r: float) -> float:
    """Normalized bridge on [0, 1/2]; the other half follows by reflection."""
    if t <= 0.25:
        return math.atan(math.tan(PI * t) / r) / PI
    return 0.5 - math.atan(r * math.tan(PI * (0.5 - t))) / PI


def unit_derivative_half(t: float, r: float) -> float:
    if t <= 0.25:
        w = math.tan(PI * t)
        return r * r * (1.0 + w * w) / (r * r + w * w)
    c = math.tan(PI * (0.5 - t))
    return r * r * (1.0 + c * c) / (1.0 + r * r * c * c)


def unit_derivative(t_lo, t_hi, r):
    """Vectorized dy/dx given distances (in units of |I|) to both ends."""
    t = np.minimum(t_lo, t_hi)
    r2 = np.asarray(r, dtype=float) ** 2
    inner = t > 0.25
    w = np.tan(PI * np.where(inner, 0.5 - t, t))
    w2 = w * w
    outer_val = r2 * (1.0 + w2) / (r2 + w2)
    inner_val = r2 * (1.0 + w2) / (1.0 + r2 * w2)
    return np.where(inner, inner_val, outer_val)


@dataclass(frozen=True)
class Bridge:
    """Bridge diffeomorphism [a, b] -> [a2, b2]."""

    a: float
    b: float
    a2: float
    b2: float
    length_in: float = field(init=False)
    length_out: float = field(init=False)
    ratio: float = field(init=False)

    def __post_init__(self):
        if not (self.a < self.b and self.a2 < self.b2):
            raise DomainError(f"degenerate bridge [{self.a},{self.b}] -> [{self.a2},{self.b2}]")
        object.__setattr__(self, "length_in", self.b - self.a)
        object.__setattr__(self, "length_out", self.b2 - self.a2)
        object.__setattr__(self, "ratio", self.length_out / self.length_in)

    def _check(self, x):
        if not self.a <= x <= self.b:
            raise DomainError(f"x={x} outside [{self.a}, {self.b}]")

    def eval(self, x: float) -> float:
        self._check(x)
        t_lo = (x - self.a) / self.length_in
        t_hi = (self.b - x) / self.length_in
        if t_lo <= t_hi:
            return self.a2 + self.length_out * unit_half(t_lo, self.ratio)
        return self.b2 - self.length_out * unit_half(t_hi, self.ratio)

    def deriv(self, x: float) -> float:
        self._check(x)
        t_lo = (x - self.a) / self.length_in
        t_hi = (self.b - x) / self.length_in
        return unit_derivative_half(min(t_lo, t_hi), self.ratio)

    def deriv_array(self, x):
        x = np.asarray(x, dtype=float)
        return unit_derivative((x - self.a) / self.length_in, (self.b - x) / self.length_in, self.ratio)

    def inverse(self) -> "Bridge":
        return Bridge(self.a2, self.b2, self.a, self.b)


def bridge_eval(bridge: Bridge, x: float) -> float:
    return bridge.eval(x)


def bridge_deriv(bridge: Bridge, x: float) -> float:
    return bridge.deriv(x)


@dataclass(frozen=True)
class LemmaCertificate:
    M: float
    ratio_ok: bool
    bound_ok: bool
    value: float
    norm_bound: float

    @property
    def passed(self) -> bool:
        return self.ratio_ok and self.bound_ok


def lemma_value(len_in: float, len_out: float, modulus: PowerModulus) -> float:
    """| |J|/|I| - 1 | / omega(|I|)."""
    return abs(len_out / len_in - 1.0) / float(modulus(len_in))


def check_lemma_hypothesis(I: Tuple[float, float], J: Tuple[float, float], modulus: PowerModulus, M: float) -> LemmaCertificate:
    len_in = I[1] - I[0]
    len_out = J[1] - J[0]
    if not (len_in > 0 and len_out > 0):
        raise DomainError(f"degenerate intervals {I}, {J}")
    q = len_in / len_out
    value = lemma_value(len_in, len_out, modulus)
    return LemmaCertificate(
        M=M,
        ratio_ok=0.5 <= q <= 2.0,
        # a few ulps of slack so that equality survives rounding
        bound_ok=value <= M * (1 + 8 * np.finfo(float).eps),
        value=value,
        norm_bound=6 * PI * M,
    )


@dataclass(frozen=True)
class GridSpec:
    """Dyadic scales 2**-j (j_min..j_max, relative to a reference length),
    ``samples`` seeded pair positions per scale."""

    j_min: int = 0
    j_max: int = 10
    samples: int = 64
    seed: int = 42

    def __post_init__(self):
        if self.samples < 1 or self.j_max < self.j_min:
            raise ParameterError(f"empty grid: {self}")

    def positions(self, j: int) -> np.ndarray:
        # Per-scale streams: refining samples or scales only adds pairs.
        rng = np.random.default_rng([self.seed, j])
        return rng.random(self.samples)


def empirical_omega_norm(
    deriv: Callable[[np.ndarray], np.ndarray],
    interval: Tuple[float, float],
    modulus: PowerModulus,
    grid: GridSpec,
) -> float:
    """max |D(x) - D(y)| / omega(|x - y|) over the sampled pairs."""
    a, b = interval
    L = b - a
    best = 0.0
    for j in range(grid.j_min, grid.j_max + 1):
        h = L * 2.0 ** -j
        x = a + grid.positions(j) * (L - h)
        y = np.minimum(x + h, b)
        q = np.abs(deriv(y) - deriv(x)) / modulus(h)
        best = max(best, float(np.max(q)))
    return best


class GluedMap:
    """Bridges with consecutive sources and targets fitted into one map."""

    def __init__(self, bridges: Sequence[Bridge]):
        if not bridges:
            raise ParameterError("need at least one bridge")
        for left, right in zip(bridges, bridges[1:]):
            if left.b != right.a or left.b2 != right.a2:
                raise DomainError("bridges are not contiguous")
        self.bridges = list(bridges)
        self._knots = np.array([br.a for br in bridges] + [bridges[-1].b])
        self._a = np.array([br.a for br in bridges])
        self._b = np.array([br.b for br in bridges])
        self._r = np.array([br.ratio for br in bridges])

    @property
    def interval(self) -> Tuple[float, float]:
        return float(self._knots[0]), float(self._knots[-1])

    def deriv_array(self, x):
        x = np.asarray(x, dtype=float)
        j = np.clip(np.searchsorted(self._knots, x, side="right") - 1, 0, len(self.bridges) - 1)
        a, b = self._a[j], self._b[j]
        L = b - a
        return unit_derivative((x - a) / L, (b - x) / L, self._r[j])

    def eval(self, x: float) -> float:
        j = int(np.clip(np.searchsorted(self._knots, x, side="right") - 1, 0, len(self.bridges) - 1))
        return self.bridges[j].eval(x)
