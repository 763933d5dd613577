"""Exact oracles and Monte Carlo checks for the anticoncentration inequalities.

Each check returns an EstimateReport pairing an exact value or an estimate
with its interval and the bound it is tested against.  Monte Carlo draws
come in fixed-size blocks, block b using stream (seed, purpose, b), so
estimates do not depend on the number of workers.
"""

from __future__ import annotations

import bisect
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import rng as rngmod, scales, stats
from .cube import to_fraction

EXACT_CAP = 20
CONVOLUTION_CAP = 4
BLOCK = 4096


class PreconditionError(ValueError):
    pass


def _seed_of(seed) -> int:
    if isinstance(seed, np.random.Generator):
        return int(seed.integers(0, 2**63))
    return rngmod.check_seed(0 if seed is None else seed)


def monte_carlo_hits(trials: int, seed: int, purpose: str,
                     block_fn: Callable[[np.random.Generator, int], int], workers: int = 1) -> int:
    """Sum of block_fn(stream, size) over fixed blocks covering ``trials`` draws."""
    if trials < 1:
        raise ValueError("need at least one trial")
    blocks = [(b, min(BLOCK, trials - b * BLOCK)) for b in range(math.ceil(trials / BLOCK))]
    run = lambda bs: int(block_fn(rngmod.stream(seed, purpose, bs[0]), bs[1]))  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return sum(pool.map(run, blocks))
    return sum(run(bs) for bs in blocks)


# --- biased Littlewood-Offord -------------------------------------------------


def _common_scale(values: Sequence[Fraction]) -> int:
    return math.lcm(*(f.denominator for f in values)) if values else 1


def _half_table(vs: Sequence[int], ps: Sequence[int], Q: int):
    """Signed sums and integer weights prod(Q + x_i P_i) over all x in {+-1}^len."""
    sums, weights = [0], [1]
    for v, p in zip(vs, ps):
        sums = [s - v for s in sums] + [s + v for s in sums]
        weights = [w * (Q - p) for w in weights] + [w * (Q + p) for w in weights]
    return sums, weights


def exact_lo_probability(v, b, t, p=None) -> Fraction:
    """P[|<x, v> - b| < t] for x ~ mu_p, exactly.

    Both halves of the coordinates are enumerated; for each left half the
    qualifying right halves form a contiguous range of the sorted sums.
    """
    v = [to_fraction(x) for x in v]
    m = len(v)
    if m > EXACT_CAP:
        raise PreconditionError(f"exact enumeration limited to m <= {EXACT_CAP}, got {m}")
    p = [Fraction(0)] * m if p is None else [to_fraction(x) for x in p]
    if len(p) != m:
        raise ValueError("v and p differ in length")
    if any(abs(x) > 1 for x in p):
        raise PreconditionError("bias vector needs |p_i| <= 1")
    b, t = to_fraction(b), to_fraction(t)
    if t <= 0:
        raise ValueError("t must be positive")
    L = _common_scale([*v, b, t])
    vi = [int(x * L) for x in v]
    B, T = int(b * L), int(t * L)
    Q = _common_scale(p)
    pi = [int(x * Q) for x in p]
    half = m // 2
    ls, lw = _half_table(vi[:half], pi[:half], Q)
    rs, rw = _half_table(vi[half:], pi[half:], Q)
    order = sorted(range(len(rs)), key=rs.__getitem__)
    rs = [rs[i] for i in order]
    cum = [0, *itertools.accumulate(rw[i] for i in order)]
    total = 0
    for s, w in zip(ls, lw):
        if w == 0:
            continue
        # need B - T < s + r < B + T
        lo = bisect.bisect_right(rs, B - T - s)
        hi = bisect.bisect_left(rs, B + T - s)
        if hi > lo:
            total += w * (cum[hi] - cum[lo])
    return Fraction(total, (2 * Q) ** m)


def _mu_p_block(v: np.ndarray, b: float, t: float, p: np.ndarray):
    def fn(g: np.random.Generator, size: int) -> int:
        x = np.where(g.random((size, v.size)) < (1 + p) / 2, 1.0, -1.0)
        return int(np.count_nonzero(np.abs(x @ v - b) < t))
    return fn


def lo_monte_carlo(v, b, t, p=None, trials: int = 10**5, seed=0,
                   confidence: float = stats.DEFAULT_CONFIDENCE) -> stats.EstimateReport:
    v = np.asarray([float(x) for x in v])
    p = np.zeros(v.size) if p is None else np.asarray([float(x) for x in p])
    hits = monte_carlo_hits(trials, _seed_of(seed), "lo", _mu_p_block(v, float(b), float(t), p))
    return stats.binomial_report("P[|<x,v>-b|<t] (Monte Carlo)", hits, trials, math.inf, confidence)


def check_lo_bound(cases, trials: int = 10**5, seed=0,
                   confidence: float = stats.DEFAULT_CONFIDENCE) -> list[stats.EstimateReport]:
    """Compare P[|<x,v> - b| < t] with 10/sqrt(m~), m~ = #{i : |v_i| >= t}.

    Cases are dicts with keys v, b, t and optional p (|p_i| <= 1/2).
    """
    seed = _seed_of(seed)
    out = []
    for c, case in enumerate(cases):
        v = [to_fraction(x) for x in case["v"]]
        b, t = to_fraction(case.get("b", 0)), to_fraction(case["t"])
        p = [to_fraction(x) for x in case.get("p", [0] * len(v))]
        if any(abs(x) > Fraction(1, 2) for x in p):
            raise PreconditionError(f"case {c}: bias needs |p_i| <= 1/2")
        mt = sum(1 for x in v if abs(x) >= t)
        if mt < 1:
            raise PreconditionError(f"case {c}: no coordinate has |v_i| >= t")
        bound = 10 / math.sqrt(mt)
        name = case.get("name") or f"LO m={len(v)} b={b} t={t}"
        if len(v) <= EXACT_CAP:
            out.append(stats.exact_report(name, exact_lo_probability(v, b, t, p), bound,
                                          notes={"m_tilde": mt}))
        else:
            va = np.array([float(x) for x in v])
            hits = monte_carlo_hits(trials, seed, f"lo:{c}",
                                    _mu_p_block(va, float(b), float(t), np.array([float(x) for x in p])))
            out.append(stats.binomial_report(name, hits, trials, bound, confidence,
                                             notes={"m_tilde": mt}))
    return out


# --- many scales --------------------------------------------------------------


def _scaled_floats(v, b, delta):
    """v, b, delta times 2**-E (E = top binary exponent of v) as floats, plus exact copies."""
    vf = [to_fraction(x) for x in v]
    bf, df = to_fraction(b), to_fraction(delta)
    top = max((abs(x) for x in vf), default=Fraction(1))
    E = (top.numerator.bit_length() - top.denominator.bit_length()) if top else 0
    s = Fraction(2) ** -E
    return (np.array([float(x * s) for x in vf]), float(bf * s), float(df * s)), (vf, bf, df)


def many_scales_hits(v, b, delta, trials: int, seed: int, purpose: str = "scales", workers: int = 1) -> int:
    """Count uniform x with |<x, v> - b| <= delta.

    Values are scaled by a power of two and evaluated in floating point with
    a rigorous error bound; draws within the bound are settled exactly.
    """
    (va, bs, ds), (vf, bf, df) = _scaled_floats(v, b, delta)
    m = va.size
    u = 2.0**-53
    err = 4 * (m + 2) * u * (float(np.abs(va).sum()) + abs(bs)) + m * 2.0**-1000

    def fn(g, size):
        x = np.where(g.random((size, m)) < 0.5, 1.0, -1.0)
        d = np.abs(x @ va - bs)
        hits = int(np.count_nonzero(d <= ds - err))
        for r in np.flatnonzero((d > ds - err) & (d <= ds + err)):
            val = sum(c if s > 0 else -c for c, s in zip(vf, x[r])) - bf
            hits += abs(val) <= df
        return hits
    return monte_carlo_hits(trials, seed, purpose, fn, workers)


def check_many_scales(v, b, delta, s: int, trials: int = 10**5, seed=0, cert=None, *,
                      workers: int = 1, confidence: float = stats.DEFAULT_CONFIDENCE) -> stats.EstimateReport:
    """Estimate P[|<x,v> - b| <= delta] and compare with exp(-s/100).

    Requires s >= 100 and a certificate (given, or found greedily) that v
    contains s scales of size at least 10 delta.
    """
    if s < 100:
        raise PreconditionError("the bound needs s >= 100")
    if not delta > 0:
        raise PreconditionError("delta must be positive")
    need = 10 * float(delta)
    if cert is None:
        _, cert = scales.greedy_scales(v, need)
    if cert.s < s or cert.delta < need * (1 - scales.EPS_NORM):
        raise PreconditionError(f"certificate has {cert.s} scales of size {cert.delta}, "
                                f"need {s} of size {need}")
    if not scales.verify_certificate(v, cert):
        raise PreconditionError("certificate does not verify")
    hits = many_scales_hits(v, b, delta, trials, _seed_of(seed), workers=workers)
    return stats.binomial_report(f"P[|<x,v>-b|<=delta] s={s}", hits, trials, math.exp(-s / 100),
                                 confidence, notes={"certified_scales": cert.s})


def geometric_vector(s: int, delta) -> list[int | Fraction]:
    """Entries 10*delta*100**(s-i), i = 1..s: s singleton scales of size 10*delta."""
    d = to_fraction(delta)
    return [10 * d * 100 ** (s - i) for i in range(1, s + 1)]


# --- continuous Littlewood-Offord -------------------------------------------------


def _check_intervals(intervals):
    iv = [(to_fraction(a), to_fraction(b)) for a, b in intervals]
    if not iv:
        raise PreconditionError("need at least one interval")
    for a, b in iv:
        if not a < b:
            raise PreconditionError(f"empty interval [{a}, {b}]")
    return iv


def uniform_sum_cdf(intervals, x) -> Fraction:
    """P[sum of independent U[a_i, b_i] <= x], exactly, via inclusion-exclusion."""
    iv = _check_intervals(intervals)
    n = len(iv)
    y = to_fraction(x) - sum(a for a, _ in iv)
    w = [b - a for a, b in iv]
    total = Fraction(0)
    for mask in range(1 << n):
        shift = sum(w[i] for i in range(n) if mask >> i & 1)
        r = y - shift
        if r > 0:
            total += (-1) ** bin(mask).count("1") * r**n
    den = math.factorial(n)
    for wi in w:
        den *= wi
    return min(max(total / den, Fraction(0)), Fraction(1))


def continuous_lo_bound(intervals, t) -> float:
    iv = _check_intervals(intervals)
    var = sum(float(b - a) ** 2 for a, b in iv) / 12
    return 2 * float(t) / math.sqrt(var)


def check_continuous_lo(intervals, b, t, *, method: str = "auto", trials: int = 10**5, seed=0,
                        confidence: float = stats.DEFAULT_CONFIDENCE) -> stats.EstimateReport:
    """P[|X - b| < t] for X a sum of independent uniforms, against 2t/sqrt(Var X).

    ``exact`` (at most four intervals) integrates the piecewise-polynomial
    density in rationals; ``mc`` samples.
    """
    iv = _check_intervals(intervals)
    if not float(t) > 0:
        raise PreconditionError("t must be positive")
    bound = continuous_lo_bound(iv, t)
    if method == "auto":
        method = "exact" if len(iv) <= CONVOLUTION_CAP else "mc"
    name = f"P[|X-b|<t] k={len(iv)} b={b} t={t}"
    if method == "exact":
        if len(iv) > CONVOLUTION_CAP:
            raise PreconditionError(f"exact convolution limited to {CONVOLUTION_CAP} intervals")
        b, t = to_fraction(b), to_fraction(t)
        p = uniform_sum_cdf(iv, b + t) - uniform_sum_cdf(iv, b - t)
        return stats.exact_report(name, p, bound)
    if method != "mc":
        raise ValueError(f"unknown method {method!r}")
    lo = np.array([float(a) for a, _ in iv])
    wd = np.array([float(b_ - a) for a, b_ in iv])
    bf, tf = float(b), float(t)

    def fn(g, size):
        x = lo.sum() + g.random((size, lo.size)) @ wd
        return int(np.count_nonzero(np.abs(x - bf) < tf))
    hits = monte_carlo_hits(trials, _seed_of(seed), "continuous", fn)
    return stats.binomial_report(name + " (Monte Carlo)", hits, trials, bound, confidence)


# --- Chernoff-Hoeffding --------------------------------------------------------------


def check_chernoff(intervals, ts: Sequence[float], trials: int = 10**5, seed=0,
                   confidence: float = stats.DEFAULT_CONFIDENCE) -> list[stats.EstimateReport]:
    """Two-sided tail of a sum of independent uniforms on [a_i, b_i] against
    2 exp(-2 t^2 / sum (b_i - a_i)^2), one report per t."""
    iv = _check_intervals(intervals)
    lo = np.array([float(a) for a, _ in iv])
    wd = np.array([float(b - a) for a, b in iv])
    mean = float((lo + wd / 2).sum())
    ss = float((wd**2).sum())
    ts = [float(t) for t in ts]
    seed = _seed_of(seed)
    counts = np.zeros(len(ts), dtype=np.int64)

    def fn(g, size):
        dev = np.abs(lo.sum() + g.random((size, lo.size)) @ wd - mean)
        for i, t in enumerate(ts):
            counts[i] += np.count_nonzero(dev >= t)
        return 0
    # counts accumulate in place; keep this serial so the adds do not race
    monte_carlo_hits(trials, seed, "chernoff", fn)
    return [stats.binomial_report(f"P[|X-EX|>=t] k={len(iv)} t={t}", int(c), trials,
                                  2 * math.exp(-2 * t * t / ss), confidence)
            for t, c in zip(ts, counts)]


# --- per-hyperplane rounding claims ------------------------------------------------------


def check_hyperplane_claims(A, b, K1, N1, N2, X, w, trials: int = 10**4, seed=0,
                            confidence: float = stats.DEFAULT_CONFIDENCE) -> list[stats.EstimateReport]:
    """For each row i in K1, estimate P[|<a_i, z> - b_i| < 2|a_ih|] over y ~ mu_X
    and uniform h in N1, with z|N1 = y and z|N2 = w.

    A must be the rescaled matrix (unit rows on N1).  The far bound 2/n^4
    applies to rows more than 4 sqrt(log n) away from (X, w) and needs
    n >= 55; the close bound 100/sqrt(n) applies to every row.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    k, n = A.shape
    K1, N1, N2 = (np.asarray(x, dtype=int) for x in (K1, N1, N2))
    X = np.asarray(X, dtype=float)
    w = np.asarray(w, dtype=float)
    if X.size and np.max(np.abs(X)) > 0.5:
        raise PreconditionError("X must lie in [-1/2, 1/2]^N1")
    base = (A[:, N2] @ w if N2.size else np.zeros(k)) - b
    dist = np.abs(A[:, N1] @ X + base)
    far_cut = 4 * math.sqrt(math.log(n))
    seed = _seed_of(seed)
    counts = np.zeros(k, dtype=np.int64)
    AN1 = A[:, N1]

    def fn(g, size):
        y = np.where(g.random((size, N1.size)) < (1 + X) / 2, 1.0, -1.0)
        h = g.integers(0, N1.size, size)
        val = np.abs(y @ AN1.T + base)  # size x k
        counts[:] += np.count_nonzero(val < 2 * np.abs(AN1[:, h].T), axis=0)
        return 0
    monte_carlo_hits(trials, seed, "claims", fn)
    out = []
    for i in K1:
        far = dist[i] > far_cut
        out.append(stats.binomial_report(f"P[row {i} within 2|a_ih|] far", int(counts[i]), trials,
                                         2 / n**4, confidence, in_regime=bool(far and n >= 55),
                                         notes={"distance": float(dist[i])}))
        out.append(stats.binomial_report(f"P[row {i} within 2|a_ih|] close", int(counts[i]), trials,
                                         100 / math.sqrt(n), confidence,
                                         notes={"distance": float(dist[i])}))
    return out
