"""Interval combinatorics: fundamental intervals, marked intervals and chains.

Lengths follow

    |[a_{n+1}, a_n]| = c_eps / (1 + |n|)**(1 + eps)
    |[b_k, c_k]|     = |[a_{n_k + 1}, a_{n_k}]| / 2
    |[u_k, v_k]|     = |[b_k, c_k]|**(1 + theta)

and every marked interval is centred in its fundamental interval.  All
marked geometry is stored as offsets inside the enclosing fundamental
interval (``LocalPoint``); global coordinates are only produced on request.
"""
from __future__ import annotations

import bisect
import enum
import functools
import math
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Tuple

import mpmath
import numpy as np

from .errors import ModelInconsistencyError, ParameterError, RangeError

# Smallest marked-interval size, relative to its fundamental interval, that
# local offsets near 1/2 can still resolve with margin at double precision.
MIN_RELATIVE_SIZE = 1e-12


class Schedule(str, enum.Enum):
    POW2 = "pow2"
    LINEAR = "linear"

    def level_start(self, k: int) -> int:
        """n_k: index of the fundamental interval hosting [b_k, c_k]."""
        return 2 ** k if self is Schedule.POW2 else k

    def owner_level(self, n: int) -> int:
        """Level k with n_k < n <= n_{k+1}, or 0 when n precedes level 1."""
        if self is Schedule.POW2:
            return (n - 1).bit_length() - 1 if n >= 3 else 0
        return n - 1 if n >= 2 else 0


@dataclass(frozen=True)
class Params:
    alpha: float
    epsilon: float
    theta: float
    k_max: int = 10
    n_neg: int = 32
    schedule: Schedule = Schedule.POW2
    precision: int = 53
    tol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "schedule", Schedule(self.schedule))
        for name in ("alpha", "epsilon", "theta", "tol"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be a positive finite number, got {value!r}")
        if not self.alpha < 1:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        if int(self.k_max) != self.k_max or self.k_max < 1:
            raise ParameterError(f"k_max must be a positive integer, got {self.k_max!r}")
        if int(self.n_neg) != self.n_neg or self.n_neg < 1:
            raise ParameterError(f"n_neg must be a positive integer, got {self.n_neg!r}")
        if int(self.precision) != self.precision or self.precision < 53:
            raise ParameterError(f"precision must be an integer >= 53 bits, got {self.precision!r}")

    @classmethod
    def with_defaults(cls, alpha: float = 0.5, **kwargs) -> "Params":
        """Params with theta = alpha + eps chosen by ``default_theta_epsilon``."""
        from .regularity import default_theta_epsilon

        theta, epsilon = default_theta_epsilon(alpha)
        return cls(alpha=alpha, epsilon=epsilon, theta=theta, **kwargs)

    def n_k(self, k: int) -> int:
        return self.schedule.level_start(k)

    def chain_length(self, k: int) -> int:
        """n_{k+1} - n_k, the number of f-steps from level k+1 to level k."""
        return self.n_k(k + 1) - self.n_k(k)

    @property
    def n_top(self) -> int:
        """Largest index n whose fundamental interval is materialized."""
        return 2 ** (self.k_max + 1)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schedule"] = self.schedule.value
        return d


@dataclass(frozen=True)
class LocalPoint:
    """A point of [0, 1] as an offset ``s`` inside [a_{n+1}, a_n].

    ``n is None`` encodes the fixed endpoints: ``s`` is then 0.0 or 1.0.
    """

    n: Optional[int]
    s: float

    @property
    def is_endpoint(self) -> bool:
        return self.n is None


ZERO = LocalPoint(None, 0.0)
ONE = LocalPoint(None, 1.0)


def _zeta_tail(s: float, start: int, tol: float, precision: int) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """sum_{j >= start} j**-s as (value, error bound).

    Direct summation up to a cut, then Euler-Maclaurin; for x**-s the
    remainder is bounded by the first omitted correction term.
    """
    with mpmath.workprec(precision + 20):
        s_ = mpmath.mpf(s)
        cut = max(start, 32)
        while True:
            head = mpmath.fsum(mpmath.mpf(j) ** -s_ for j in range(start, cut))
            N = mpmath.mpf(cut)
            total = N ** (1 - s_) / (s_ - 1) + N ** -s_ / 2
            rising = s_
            term = mpmath.mpf(0)
            for i in range(1, 10):
                if i > 1:
                    rising *= (s_ + 2 * i - 3) * (s_ + 2 * i - 2)
                term = mpmath.bernoulli(2 * i) / mpmath.factorial(2 * i) * rising * N ** (-s_ - 2 * i + 1)
                if i < 9:
                    total += term
            bound = 2 * abs(term) + abs(head + total) * mpmath.mpf(2) ** (-precision)
            if bound <= tol or cut > 10 ** 6:
                return head + total, bound
            cut *= 4


@functools.lru_cache(maxsize=64)
def normalization_constant(epsilon: float, tol: float = 1e-12, precision: int = 53) -> float:
    """c_eps with c_eps * sum_{n in Z} (1 + |n|)**-(1 + eps) = 1, certified to tol."""
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise ParameterError(f"epsilon must be positive, got {epsilon!r}")
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol!r}")
    # sum over Z = 1 + 2 * sum_{j >= 2} j**-s
    tail, bound = _zeta_tail(1 + epsilon, 2, tol / 4, precision)
    if 2 * bound > tol:
        raise ModelInconsistencyError(f"could not certify c_eps to tol={tol}")
    with mpmath.workprec(precision + 20):
        return float(1 / (1 + 2 * tail))


def _c(params: Params) -> float:
    return normalization_constant(params.epsilon, min(params.tol, 1e-12), params.precision)


def interval_length(n: int, params: Params) -> float:
    return _c(params) / (1 + abs(n)) ** (1 + params.epsilon)


def _check_level(k: int, params: Params, upper: int) -> None:
    if int(k) != k or not 1 <= k <= upper:
        needed = k + params.k_max - upper if isinstance(k, int) and k > upper else None
        raise RangeError(f"level k={k} outside [1, {upper}]", needed_k_max=needed)


def bc_length(k: int, params: Params) -> float:
    _check_level(k, params, params.k_max)
    return interval_length(params.n_k(k), params) / 2


def uv_length(k: int, params: Params) -> float:
    _check_level(k, params, params.k_max)
    return bc_length(k, params) ** (1 + params.theta)


def lambda_k(k: int, params: Params) -> float:
    """Scaling factor with lambda**(n_{k+1} - n_k) * |[u_{k+1}, v_{k+1}]| = |[b_k, c_k]|."""
    _check_level(k, params, params.k_max - 1)
    ratio = bc_length(k, params) / uv_length(k + 1, params)
    if not ratio > 1:
        raise ModelInconsistencyError(f"|[b_k,c_k]| / |[u_(k+1),v_(k+1)]| = {ratio} <= 1 at k={k}")
    return math.exp(math.log(ratio) / params.chain_length(k))


def a_position(n: int, params: Params, tol: Optional[float] = None) -> float:
    """a_n = c_eps * sum_{m >= n} (1 + |m|)**-(1 + eps), evaluated directly."""
    if int(n) != n:
        raise RangeError(f"index must be an integer, got {n!r}")
    if not -params.n_neg <= n <= params.n_top + 1:
        raise RangeError(f"a_{n} outside stored range [{-params.n_neg}, {params.n_top + 1}]")
    tol = params.tol if tol is None else tol
    c = _c(params)
    s = 1 + params.epsilon
    if n >= 0:
        tail, _ = _zeta_tail(s, n + 1, tol / 2, params.precision)
        return float(c * tail)
    tail, _ = _zeta_tail(s, -n + 2, tol / 2, params.precision)
    return float(1 - c * tail)


class PartitionModel:
    """Immutable snapshot of every endpoint, length and chain at one truncation depth."""

    def __init__(self, params: Params):
        self.params = params
        p = params
        self.c_eps = _c(p)
        self.n_lo = -p.n_neg
        self.n_hi = p.n_top  # intervals [a_{n+1}, a_n] for n_lo <= n <= n_hi
        s = 1 + p.epsilon
        idx = np.arange(self.n_lo, self.n_hi + 1)
        self._ell = self.c_eps / (1.0 + np.abs(idx)) ** s

        # a_n accumulated upward from the certified tail below the model
        tail, self.tail_bound = _zeta_tail(s, self.n_hi + 2, p.tol / 4, p.precision)
        a = np.empty(len(idx) + 1)
        with mpmath.workprec(p.precision + 20):
            c = mpmath.mpf(self.c_eps)
            acc = c * tail
            self.tail_mass = float(acc)
            a[-1] = float(acc)
            for j in range(len(idx) - 1, -1, -1):
                acc += c / (1 + abs(int(idx[j]))) ** mpmath.mpf(s)
                a[j] = float(acc)
        self._a = a  # a[j] = a_{n_lo + j}, j = 0 .. n_hi - n_lo + 1
        self._a_ascending = a[::-1].tolist()

        self.levels = range(1, p.k_max + 1)
        self.bc: Dict[int, float] = {}
        self.uv: Dict[int, float] = {}
        self.rho: Dict[int, float] = {}
        for k in self.levels:
            bc = self.length(p.n_k(k)) / 2
            uv = bc ** (1 + p.theta)
            if not uv > 0:
                raise RangeError(f"|[u_{k},v_{k}]| underflows at k={k}; theta={p.theta} too large for k_max={p.k_max}")
            self.bc[k] = bc
            self.uv[k] = uv
            self.rho[k] = uv / self.length(p.n_k(k))
            if self.rho[k] < MIN_RELATIVE_SIZE:
                raise RangeError(
                    f"marked interval at level {k} has relative size {self.rho[k]:.3g}, "
                    f"below what double precision resolves; reduce k_max or theta"
                )

        self.lam: Dict[int, float] = {}
        self.chains: Dict[int, np.ndarray] = {}
        for k in range(1, p.k_max):
            ratio = self.bc[k] / self.uv[k + 1]
            if not ratio > 1:
                raise ModelInconsistencyError(f"lambda_{k}: ratio {ratio} <= 1")
            N = p.chain_length(k)
            self.lam[k] = math.exp(math.log(ratio) / N)
            self.chains[k] = self._build_chain(k, N)

    def _build_chain(self, k: int, N: int) -> np.ndarray:
        p = self.params
        log_start = math.log(self.uv[k + 1])
        log_end = math.log(self.bc[k])
        out = np.empty((N + 1, 2))
        for i in range(N + 1):
            n = p.n_k(k + 1) - i
            # lambda**i * |[u,v]| interpolated in log space to avoid error growth in i
            log_len = log_start + (log_end - log_start) * (i / N)
            rho = math.exp(log_len - math.log(self.length(n)))
            if i == 0:
                if abs(rho / self.rho[k + 1] - 1) > 1e-12:
                    raise ModelInconsistencyError(f"chain ({k},0) does not start at [u_{k + 1}, v_{k + 1}]")
                rho = self.rho[k + 1]
            elif i == N:
                if abs(rho - 0.5) > 0.5e-10:
                    raise ModelInconsistencyError(f"chain ({k},{N}) misses [b_{k}, c_{k}]: relative size {rho}")
                out[i] = (0.25, 0.75)
                continue
            if not 0 < rho < 1:
                raise ModelInconsistencyError(
                    f"chain interval ({k},{i}) of relative size {rho} does not fit in [a_{n + 1}, a_{n}]"
                )
            out[i] = (0.5 - rho / 2, 0.5 + rho / 2)
        return out

    # ---- lookups -------------------------------------------------------

    def _check_n(self, n: int) -> None:
        if not self.n_lo <= n <= self.n_hi:
            raise RangeError(
                f"fundamental interval n={n} outside materialized range [{self.n_lo}, {self.n_hi}]",
                needed_k_max=needed_depth(n) if n > self.n_hi else None,
            )

    def length(self, n: int) -> float:
        self._check_n(n)
        return float(self._ell[n - self.n_lo])

    def a(self, n: int) -> float:
        if not self.n_lo <= n <= self.n_hi + 1:
            raise RangeError(f"a_{n} outside stored range [{self.n_lo}, {self.n_hi + 1}]")
        return float(self._a[n - self.n_lo])

    def bc_length(self, k: int) -> float:
        _check_level(k, self.params, self.params.k_max)
        return self.bc[k]

    def uv_length(self, k: int) -> float:
        _check_level(k, self.params, self.params.k_max)
        return self.uv[k]

    def lambda_(self, k: int) -> float:
        _check_level(k, self.params, self.params.k_max - 1)
        return self.lam[k]

    def bc_points(self, k: int) -> Tuple[LocalPoint, LocalPoint]:
        _check_level(k, self.params, self.params.k_max)
        n = self.params.n_k(k)
        return LocalPoint(n, 0.25), LocalPoint(n, 0.75)

    def uv_points(self, k: int) -> Tuple[LocalPoint, LocalPoint]:
        _check_level(k, self.params, self.params.k_max)
        n = self.params.n_k(k)
        r = self.rho[k]
        return LocalPoint(n, 0.5 - r / 2), LocalPoint(n, 0.5 + r / 2)

    def chain_interval(self, k: int, i: int) -> Tuple[LocalPoint, LocalPoint]:
        """(u_{k+1}^i, v_{k+1}^i) = f^i applied to [u_{k+1}, v_{k+1}]."""
        _check_level(k, self.params, self.params.k_max - 1)
        N = self.params.chain_length(k)
        if int(i) != i or not 0 <= i <= N:
            raise RangeError(f"chain index i={i} outside [0, {N}] at level {k}")
        n = self.params.n_k(k + 1) - i
        su, sv = self.chains[k][i]
        return LocalPoint(n, float(su)), LocalPoint(n, float(sv))

    def chain_length_global(self, k: int, i: int) -> float:
        su, sv = self.chains[k][i]
        return float(sv - su) * self.length(self.params.n_k(k + 1) - i)

    # ---- coordinates ---------------------------------------------------

    def to_global(self, p: LocalPoint) -> float:
        if p.n is None:
            return p.s
        self._check_n(p.n)
        return self.a(p.n + 1) + p.s * self.length(p.n)

    def to_local(self, x: float) -> LocalPoint:
        if x == 0.0:
            return ZERO
        if x == 1.0:
            return ONE
        lo, hi = self.a(self.n_hi + 1), self.a(self.n_lo)
        if not lo <= x <= hi:
            raise RangeError(
                f"x={x!r} outside materialized domain [{lo!r}, {hi!r}]",
                needed_k_max=None if x > hi else self.params.k_max + 1,
            )
        # ascending list of a_n: position j corresponds to n = n_hi + 1 - j
        j = bisect.bisect_right(self._a_ascending, x) - 1
        n = self.n_hi - j
        if n < self.n_lo:
            return LocalPoint(self.n_lo, 1.0)
        s = (x - self.a(n + 1)) / self.length(n)
        return LocalPoint(n, min(max(s, 0.0), math.nextafter(1.0, 0.0)))

    def canonical(self, n: int, s: float) -> LocalPoint:
        """Normalize s == 1 to the bottom of the next interval up when it exists."""
        if s >= 1.0 and n - 1 >= self.n_lo:
            return LocalPoint(n - 1, 0.0)
        return LocalPoint(n, s)

    def difference(self, p: LocalPoint, q: LocalPoint) -> float:
        """Global q - p, accumulated interval by interval to avoid cancellation."""
        if p.n == q.n and p.n is not None:
            return (q.s - p.s) * self.length(p.n)
        return self.to_global(q) - self.to_global(p)

    # ---- export --------------------------------------------------------

    def to_json(self) -> dict:
        p = self.params
        intervals = [
            {"n": n, "a_n": self.a(n), "length": self.length(n)} for n in range(self.n_lo, self.n_hi + 1)
        ]
        levels = []
        for k in self.levels:
            b, c = self.bc_points(k)
            u, v = self.uv_points(k)
            levels.append(
                {
                    "k": k,
                    "n_k": p.n_k(k),
                    "b": self.to_global(b),
                    "c": self.to_global(c),
                    "u": self.to_global(u),
                    "v": self.to_global(v),
                    "bc_length": self.bc[k],
                    "uv_length": self.uv[k],
                    "lambda": self.lam.get(k),
                }
            )
        return {
            "params": p.to_dict(),
            "c_eps": self.c_eps,
            "tail_mass": self.tail_mass,
            "intervals": intervals,
            "levels": levels,
        }


def needed_depth(n: int) -> int:
    """Smallest k_max whose materialized range contains interval n (n > 0)."""
    return max(1, (max(n, 2) - 1).bit_length() - 1)


@functools.lru_cache(maxsize=32)
def build_partition(params: Params) -> PartitionModel:
    return PartitionModel(params)


def chain_interval(k: int, i: int, params: Params) -> Tuple[LocalPoint, LocalPoint]:
    return build_partition(params).chain_interval(k, i)
