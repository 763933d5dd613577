"""Two-stage random point construction and the unsliced-edge search.

For unit rows v_1..v_l in R^m and offsets lambda, the point X = X0 + X1 is
drawn as

  X0 = rho0 * sum_i alpha_i v_i,            alpha_i ~ U[-1, 1],
  X1 = rho1 * sum_{i bad} beta_i v_i,       beta_i  ~ U[-1, 1],

where i is bad when |<X0, v_i> - lambda_i| <= badThreshold.  The search for
an edge missed by every hyperplane combines this point with the row/column
decomposition, a random assignment w of the removed columns, mu_p rounding
and a uniformly chosen flip coordinate.  Every edge it reports is re-checked
exactly against the original collection.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import cube, decompose as dec, rng as rngmod, stats

MIN_M = 16
UNIT_TOL = 1e-6
GRAM_CAP = 2048
STAGES = ("w_search", "x_construction", "x_bounded", "rounding_distance", "final_check")


# --- parameters --------------------------------------------------------------


@dataclass(frozen=True)
class SamplerParams:
    m: int
    rho0: float
    rho1: float
    delta_heavy: float
    bad_threshold: float
    close_threshold: float
    near_bad_dot: float = 0.9
    levels: tuple[int, ...] = ()
    overrides: tuple[tuple[str, float], ...] = ()

    KEYS = ("rho0", "rho1", "delta_heavy", "bad_threshold", "close_threshold",
            "near_bad_dot", "max_level")

    def __post_init__(self):
        vals = (self.rho0, self.rho1, self.delta_heavy, self.bad_threshold,
                self.close_threshold, self.near_bad_dot)
        if not all(v > 0 and math.isfinite(v) for v in vals):
            raise ValueError(f"sampler parameters must be positive and finite: {vals}")
        if not self.levels:
            raise ValueError("need at least one activation level")

    @classmethod
    def paper(cls, m: int) -> SamplerParams:
        if m < MIN_M:
            raise ValueError(f"default parameters need m >= {MIN_M}, got {m}")
        lm = math.log(m)
        r = m / lm
        return cls(m, r ** (3 / 19), r ** (1 / 19), m ** (1 / 38) * lm ** (9 / 19),
                   10 * math.sqrt(lm), 5 * math.sqrt(lm), 0.9,
                   tuple(range(math.ceil(math.log2(m)) + 1)))

    @classmethod
    def with_overrides(cls, m: int, **over) -> SamplerParams:
        unknown = set(over) - set(cls.KEYS)
        if unknown:
            raise ValueError(f"unknown sampler parameters {sorted(unknown)}")
        # formulas are evaluated at max(m, 16) so that small m can still be overridden
        base = cls.paper(max(m, MIN_M))
        vals = {k: getattr(base, k) for k in cls.KEYS if k != "max_level"}
        levels = base.levels
        for key, v in over.items():
            if key == "max_level":
                levels = tuple(range(int(v) + 1))
            else:
                vals[key] = float(v)
        return cls(m, levels=levels, overrides=tuple(sorted((k, float(v)) for k, v in over.items())),
                   **vals)

    @classmethod
    def parse(cls, text, m: int) -> SamplerParams:
        """``paper``, ``k=v,...`` or a dict of overrides."""
        if isinstance(text, SamplerParams):
            return text
        if isinstance(text, dict):
            return cls.with_overrides(m, **text) if text else cls.for_m(m)
        text = (text or "").strip()
        if text in ("", "paper"):
            return cls.for_m(m)
        over = {}
        for part in text.split(","):
            key, eq, val = part.partition("=")
            if not eq:
                raise ValueError(f"malformed parameter {part!r}")
            over[key.strip()] = float(Fraction(val.strip()))
        return cls.with_overrides(m, **over)

    @classmethod
    def for_m(cls, m: int) -> SamplerParams:
        """Default parameters, evaluated at max(m, 16) for tiny m."""
        if m >= MIN_M:
            return cls.paper(m)
        p = cls.paper(MIN_M)
        return cls(m, p.rho0, p.rho1, p.delta_heavy, p.bad_threshold, p.close_threshold,
                   p.near_bad_dot, p.levels, (("m_eff", float(MIN_M)),))

    @property
    def is_paper(self) -> bool:
        return not self.overrides

    @property
    def ts(self) -> np.ndarray:
        return 2.0 ** np.array(self.levels, dtype=float)

    @property
    def log_m(self) -> float:
        return math.log(max(self.m, MIN_M))

    def to_dict(self) -> dict:
        return {"m": self.m, "rho0": self.rho0, "rho1": self.rho1, "delta_heavy": self.delta_heavy,
                "bad_threshold": self.bad_threshold, "close_threshold": self.close_threshold,
                "near_bad_dot": self.near_bad_dot, "levels": list(self.levels),
                "overrides": dict(self.overrides)}


# --- Gram statistics ---------------------------------------------------------


@dataclass
class GramStats:
    S: np.ndarray
    gram: np.ndarray | None
    row_norms: np.ndarray

    @property
    def unit_rows(self) -> bool:
        return bool(np.all(np.abs(self.row_norms - 1.0) <= UNIT_TOL))


def _as_rows(V) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    if V.ndim != 2:
        raise ValueError("V must be an l x m matrix")
    return V


def gram_stats(V, cap: int = GRAM_CAP) -> GramStats:
    """S_i = sum_j <v_i, v_j>^2, keeping the Gram matrix when l <= cap."""
    V = _as_rows(V)
    ell = V.shape[0]
    norms = np.linalg.norm(V, axis=1)
    if ell <= cap:
        G = V @ V.T
        return GramStats(np.sum(G * G, axis=1), G, norms)
    S = np.empty(ell)
    step = max(cap, 1)
    for lo in range(0, ell, step):
        blk = V[lo:lo + step] @ V.T
        S[lo:lo + step] = np.sum(blk * blk, axis=1)
    return GramStats(S, None, norms)


def _gram_rows(V, stats_: GramStats, idx) -> np.ndarray:
    idx = np.asarray(idx, dtype=int)
    if stats_.gram is not None:
        return stats_.gram[idx]
    return V[idx] @ V.T


# --- sampling and classification ---------------------------------------------


@dataclass
class PointSample:
    alpha: np.ndarray
    X0: np.ndarray
    bad: np.ndarray
    beta: np.ndarray
    X1: np.ndarray
    X: np.ndarray
    dev0: np.ndarray  # <X0, v_i> - lambda_i
    dev: np.ndarray   # <X, v_i> - lambda_i


def sample_point(V, lam, params: SamplerParams, rng) -> PointSample:
    V = _as_rows(V)
    lam = np.asarray(lam, dtype=float)
    ell, m = V.shape
    if lam.shape != (ell,):
        raise ValueError(f"lambda has shape {lam.shape}, expected ({ell},)")
    g = rngmod.as_generator(rng)
    alpha = g.uniform(-1.0, 1.0, ell)
    X0 = params.rho0 * (alpha @ V) if ell else np.zeros(m)
    dev0 = V @ X0 - lam
    bad = np.flatnonzero(np.abs(dev0) <= params.bad_threshold)
    beta = g.uniform(-1.0, 1.0, bad.size)
    X1 = params.rho1 * (beta @ V[bad]) if bad.size else np.zeros(m)
    X = X0 + X1
    return PointSample(alpha, X0, bad, beta, X1, X, dev0, V @ X - lam)


TYPE_NAMES = ("bad", "not bad, not activated", "activated, heavy", "light, near bad",
              "activated, not near bad")


@dataclass
class IndexClassification:
    bad: np.ndarray
    close: np.ndarray
    near_bad: np.ndarray
    heavy: np.ndarray
    activated: np.ndarray
    E1: np.ndarray  # l x levels
    E2: np.ndarray  # l x levels
    T: np.ndarray
    types: np.ndarray  # l x 5 membership, column c is type c+1

    @property
    def light(self) -> np.ndarray:
        return ~self.heavy

    def labels(self, j: int) -> tuple[int, ...]:
        return tuple(int(c) + 1 for c in np.flatnonzero(self.types[j]))

    def primary_type(self, j: int) -> int | None:
        """First matching type in case order, or None."""
        lab = self.labels(j)
        return lab[0] if lab else None

    @property
    def untyped_close(self) -> np.ndarray:
        return np.flatnonzero(self.close & ~self.types.any(axis=1))


def classify(sample: PointSample, V, lam, stats_: GramStats, params: SamplerParams) -> IndexClassification:
    V = _as_rows(V)
    ell = V.shape[0]
    bad = np.zeros(ell, dtype=bool)
    bad[sample.bad] = True
    close = np.abs(sample.dev) <= params.close_threshold
    heavy = stats_.S >= params.delta_heavy**2
    ts = params.ts
    if sample.bad.size:
        Gb = _gram_rows(V, stats_, sample.bad)  # |bad| x l
        near_bad = np.any(np.abs(Gb) > params.near_bad_dot, axis=0)
        sq = Gb * Gb
        var = params.rho1**2 / 3 * sq.sum(axis=0)
        far = np.abs(Gb) <= params.near_bad_dot
        T = params.rho1**2 / 3 * np.where(far, sq, 0.0).sum(axis=0)
    else:
        near_bad = np.zeros(ell, dtype=bool)
        var = np.zeros(ell)
        T = np.zeros(ell)
    E1 = np.abs(sample.dev0)[:, None] <= ts[None, :] * params.bad_threshold
    E2 = var[:, None] > ts[None, :] ** 2 / 4
    activated = np.any(E1 & E2, axis=1)
    types = np.stack([bad, ~bad & ~activated, activated & heavy, ~heavy & near_bad,
                      activated & ~near_bad], axis=1)
    return IndexClassification(bad, close, near_bad, heavy, activated, E1, E2, T, types)


def round_mu_p(p, rng) -> np.ndarray:
    """x_i = +1 with probability (1 + p_i)/2, independently."""
    p = np.asarray(p, dtype=float)
    if p.size and not np.all(np.abs(p) <= 1.0):
        raise ValueError("mu_p rounding needs |p_i| <= 1")
    g = rngmod.as_generator(rng)
    u = g.random(p.shape)
    return np.where(u < (1.0 + p) / 2.0, 1, -1).astype(np.int8)


# --- end-to-end search ---------------------------------------------------------


@dataclass
class WitnessConfig:
    budget: int = 10_000
    constants: object = "paper"
    params: object = "paper"
    wiggle_magnitude: Fraction = Fraction(1, 2**20)
    cap: int = cube.DEFAULT_CAP
    workers: int = 1
    batch: int = 64


@dataclass
class WitnessResult:
    status: str
    edge: cube.EdgeId | None
    attempts: int
    stage_counts: dict[str, int]
    stages: list[str]
    w: list[int] | None
    seed: int
    n: int
    details: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.status == "Found"

    def to_dict(self) -> dict:
        out = {"status": self.status, "seed": self.seed, "n": self.n, "attempts": self.attempts,
               "edge": None if self.edge is None else
               {"base_bits_hex": f"{self.edge.base:x}", "flip_index": self.edge.flip},
               "w": self.w, "stage_counts": self.stage_counts}
        out.update(self.details)
        return out


@dataclass
class _Context:
    original: list
    n: int
    A: np.ndarray      # rescaled wiggled matrix
    b: np.ndarray      # rescaled offsets
    K1: np.ndarray
    K2: np.ndarray
    N1: np.ndarray
    N2: np.ndarray
    V: np.ndarray
    stats: GramStats | None
    params: SamplerParams | None
    seed: int


def _to_exact(collection) -> list:
    return [h.to_exact() for h in collection]


def _prepare(collection, n: int, config: WitnessConfig, seed: int) -> tuple[_Context, dict]:
    k = len(collection)
    details: dict = {"k": k}
    if k == 0:
        empty = np.zeros(0, dtype=int)
        return _Context([], n, np.zeros((0, n)), np.zeros(0), empty, empty,
                        np.arange(n), empty, np.zeros((0, n)), None, None, seed), details
    wig = cube.wiggle(_to_exact(collection), config.wiggle_magnitude, verify=False)
    A = np.array([[float(c) for c in h.a] for h in wig.hyperplanes])
    b = np.array([float(h.b) for h in wig.hyperplanes])
    if isinstance(config.constants, dec.DecompConstants):
        consts = config.constants
    else:
        consts = dec.DecompConstants.parse(str(config.constants or "paper"), k, n)
    res = dec.decompose(A, consts)
    B = res.rescaled
    b = b * res.row_scale
    K1, K2 = np.array(res.K1, dtype=int), np.array(res.K2, dtype=int)
    N1, N2 = np.array(res.N1, dtype=int), np.array(res.N2, dtype=int)
    m = N1.size
    V = B[np.ix_(K1, N1)]
    params = SamplerParams.parse(config.params, m)
    details.update({
        "wiggled_coefficients": len(wig.perturbed),
        "decomposition": {"K1": res.K1, "K2": res.K2, "N2": res.N2,
                          "renormalizations": res.renormalizations,
                          "constants": consts.to_dict()},
        "sampler": params.to_dict(),
        "close_threshold_m": params.close_threshold,
        "close_threshold_n": 4 * math.sqrt(math.log(n)) if n > 1 else 0.0,
    })
    return _Context(list(collection), n, B, b, K1, K2, N1, N2, V, gram_stats(V), params, seed), details


def _edge_from(z: np.ndarray, h: int) -> cube.EdgeId:
    z = z.copy()
    z[h] = -1
    return cube.EdgeId(cube.signs_to_vertex(z), int(h))


def _attempt(ctx: _Context, index: int):
    """One pass of the construction.  Returns (stage, payload): stage None on success."""
    g = rngmod.stream(ctx.seed, "witness", index)
    n = ctx.n
    if ctx.A.shape[0] == 0:
        z = np.where(g.random(n) < 0.5, 1, -1).astype(np.int8)
        h = int(g.integers(n))
        return None, {"edge": _edge_from(z, h), "w": []}
    w = np.where(g.random(ctx.N2.size) < 0.5, 1, -1).astype(np.int8)
    part = ctx.A[:, ctx.N2] @ w if ctx.N2.size else np.zeros(ctx.A.shape[0])
    if ctx.K2.size and not np.all(np.abs(part[ctx.K2] - ctx.b[ctx.K2]) > 2 * math.sqrt(n)):
        return "w_search", None
    lam = ctx.b[ctx.K1] - part[ctx.K1]
    sample = sample_point(ctx.V, lam, ctx.params, g)
    if not np.all(np.isfinite(sample.X)):
        return "x_construction", None
    if sample.X.size and np.max(np.abs(sample.X)) > 0.5:
        return "x_bounded", None
    y = round_mu_p(sample.X, g)
    h = int(ctx.N1[g.integers(ctx.N1.size)])
    z = np.empty(n, dtype=np.int8)
    z[ctx.N1] = y
    z[ctx.N2] = w
    val = np.abs(ctx.A @ z - ctx.b)
    if not np.all(val >= 2 * np.abs(ctx.A[:, h])):
        return "rounding_distance", None
    if ctx.K2.size:
        # |<a|N2, w> - b| > 2 sqrt(n) and ||a|N1|| = 1 force |<a, z> - b| > 2
        assert np.all(val[ctx.K2] > 2), "K2 rows too close to the accepted point"
    edge = _edge_from(z, h)
    if not cube.unsliced_by_all(ctx.original, edge):
        return "final_check", None
    near = np.abs(sample.X @ ctx.V.T + part[ctx.K1] - ctx.b[ctx.K1]) if ctx.K1.size else np.zeros(0)
    return None, {
        "edge": edge, "w": [int(x) for x in w],
        "k1_star": int(np.count_nonzero(near <= 4 * math.sqrt(math.log(n)))),
        "close_count": int(np.count_nonzero(np.abs(sample.dev) <= ctx.params.close_threshold)),
    }


def end_to_end_witness(collection: Sequence[cube.Hyperplane], config: WitnessConfig | None = None,
                       seed: int = 0, n: int | None = None) -> WitnessResult:
    """Search for an edge sliced by no hyperplane of ``collection``.

    Attempt i draws only from stream i of the master seed and the first
    successful attempt wins, so the result does not depend on the number of
    workers.  Stage counts cover attempts up to the reported one.
    """
    config = config or WitnessConfig()
    seed = rngmod.check_seed(seed)
    if n is None:
        if not collection:
            raise ValueError("dimension needed for an empty collection")
        n = collection[0].n
    if any(h.n != n for h in collection):
        raise cube.DimensionError("hyperplanes of different dimensions")
    if n > config.cap:
        raise cube.CapExceeded(f"dimension {n} exceeds cap {config.cap}")
    if config.budget < 1:
        raise ValueError("budget must be positive")
    ctx, details = _prepare(collection, n, config, seed)

    stages: list[str] = []
    counts = {s: 0 for s in STAGES}
    batch = max(config.batch, config.workers)
    pool = ThreadPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        start = 0
        while start < config.budget:
            idx = range(start, min(start + batch, config.budget))
            if pool:
                outcomes = list(pool.map(lambda i: _attempt(ctx, i), idx))
            else:
                outcomes = [_attempt(ctx, i) for i in idx]
            for i, (stage, payload) in zip(idx, outcomes):
                if stage is None:
                    stages.append("found")
                    details.update({k: v for k, v in payload.items() if k not in ("edge", "w")})
                    return WitnessResult("Found", payload["edge"], i + 1, counts, stages,
                                         payload["w"], seed, n, details)
                stages.append(stage)
                counts[stage] += 1
            start = idx.stop
    finally:
        if pool:
            pool.shutdown()
    return WitnessResult("Exhausted", None, config.budget, counts, stages, None, seed, n, details)


# --- close-type breakdown --------------------------------------------------------


@dataclass
class BreakdownReport:
    reports: list[stats.EstimateReport]
    trials: int
    params: SamplerParams
    untyped_close: int
    bad_not_near_bad: int
    seed: int

    def to_csv(self) -> str:
        return stats.reports_to_csv(self.reports, stats.BREAKDOWN_COLUMNS)

    def summary(self) -> str:
        lines = [f"seed: {self.seed}", f"trials: {self.trials}",
                 f"params: {self.params.to_dict()}",
                 f"close indices without a type: {self.untyped_close}",
                 f"bad indices not near bad: {self.bad_not_near_bad}"]
        for r in self.reports:
            lines.append(f"{r.quantity}: {r.estimate:.6g} [{r.ci_low:.6g}, {r.ci_high:.6g}] "
                         f"bound {r.paper_bound:.6g} -> {r.verdict.value}")
        return "\n".join(lines) + "\n"


def _default_pairs(G: np.ndarray, limit: int, near: float) -> list[tuple[int, int, int]]:
    out = []
    ell = G.shape[0]
    for i in range(ell):
        for j in range(ell):
            if i != j and abs(G[i, j]) <= near:
                out.append((i, j, 0))
                if len(out) >= limit:
                    return out
    return out


def _breakdown_chunk(V, lam, st, params, seed, pairs, lo, hi) -> dict:
    ell, m = V.shape
    L = len(params.levels)
    acc = {
        "bad": np.zeros(ell, int), "E1": np.zeros((ell, L), int), "xinf": 0,
        "close_act": np.zeros(ell, int), "bad_close": np.zeros(ell, int),
        "act_not_near": np.zeros(ell, int), "pairs": np.zeros(len(pairs), int),
        "close_sum": 0, "close_sq": 0, "type_sum": np.zeros(5, int), "type_sq": np.zeros(5, int),
        "lnb_sum": 0, "lnb_sq": 0, "untyped": 0, "bad_not_near": 0,
    }
    for t in range(lo, hi):
        g = rngmod.stream(seed, "breakdown", t)
        s = sample_point(V, lam, params, g)
        c = classify(s, V, lam, st, params)
        acc["bad"] += c.bad
        acc["E1"] += c.E1
        acc["xinf"] += int(m > 0 and np.max(np.abs(s.X)) > 0.5)
        acc["close_act"] += c.close & c.activated
        acc["bad_close"] += c.bad & c.close
        acc["act_not_near"] += c.activated & ~c.near_bad
        for p, (i, j, h) in enumerate(pairs):
            acc["pairs"][p] += int(c.bad[i] and c.E1[j, h])
        nc = int(np.count_nonzero(c.close))
        acc["close_sum"] += nc
        acc["close_sq"] += nc * nc
        tc = np.count_nonzero(c.types & c.close[:, None], axis=0)
        acc["type_sum"] += tc
        acc["type_sq"] += tc * tc
        lnb = int(np.count_nonzero(c.light & c.near_bad))
        acc["lnb_sum"] += lnb
        acc["lnb_sq"] += lnb * lnb
        acc["untyped"] += c.untyped_close.size
        acc["bad_not_near"] += int(np.count_nonzero(c.bad & ~c.near_bad))
    return acc


def _mean_report(name, total, total_sq, trials, bound, ell, in_regime, confidence):
    mean, lo, hi = stats.mean_interval(float(total), float(total_sq), trials, confidence)
    lo, hi = min(lo, mean), max(hi, mean)
    return stats.EstimateReport(name, mean, lo, hi, trials, bound, max_value=float(max(ell, 1)),
                                in_regime=in_regime)


def close_type_breakdown(V, lam, params: SamplerParams, trials: int, seed: int = 0, *,
                         indices: Sequence[int] | None = None, pairs=None, workers: int = 1,
                         confidence: float = stats.DEFAULT_CONFIDENCE) -> BreakdownReport:
    """Monte Carlo estimates of the close-index quantities, each with its bound.

    Bounds are written in terms of the thresholds T_b (bad) and T_c (close),
    so they stay valid when parameters are overridden and reduce to the usual
    constants at the defaults.  Rows whose hypotheses fail at this instance
    are marked out of regime.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    V = _as_rows(V)
    lam = np.asarray(lam, dtype=float)
    ell, m = V.shape
    seed = rngmod.check_seed(seed)
    st = gram_stats(V)
    G = st.gram if st.gram is not None else V @ V.T
    if indices is None:
        indices = list(range(min(ell, 4)))
    if pairs is None:
        pairs = _default_pairs(G, 4, params.near_bad_dot)
    pairs = [tuple(int(x) for x in p) for p in pairs]

    workers = max(1, workers)
    bounds = np.linspace(0, trials, workers + 1).astype(int)
    spans = [(bounds[i], bounds[i + 1]) for i in range(workers) if bounds[i + 1] > bounds[i]]
    run = lambda span: _breakdown_chunk(V, lam, st, params, seed, pairs, *span)  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, spans))
    else:
        parts = [run(sp) for sp in spans]
    acc = parts[0]
    for p in parts[1:]:
        for key in acc:
            acc[key] = acc[key] + p[key]

    Tb, Tc, r0, r1 = params.bad_threshold, params.close_threshold, params.rho0, params.rho1
    ts = params.ts
    lm = params.log_m
    Lf = max(len(params.levels), 2 * lm)
    unit = st.unit_rows
    colmax = float(np.max(np.linalg.norm(V, axis=0))) if ell and m else 0.0
    col_ok = colmax <= 0.1 * m ** (-3 / 19) * lm ** (-13 / 38) if m >= MIN_M else False
    sqS = np.sqrt(np.maximum(st.S, 1e-300))
    top = 2.0 ** (max(params.levels) + 1)
    type2_ok = Tb > Tc and (ell == 0 or params.rho1**2 * float(st.S.max()) / 3 <= top**2 / 4)
    big_ok = (params.is_paper and m >= MIN_M and col_ok
              and ell <= 1e-10 * m ** (13 / 19) * lm ** (-32 / 19))

    R = []
    binom = lambda name, hits, bound, **kw: stats.binomial_report(  # noqa: E731
        name, int(hits), trials, float(bound), confidence, **kw)

    R.append(_mean_report("E[#close]", acc["close_sum"], acc["close_sq"], trials,
                          math.sqrt(max(m, 1)) / 400, ell, big_ok, confidence))
    type_bounds = [
        (16 * Tb * Tc / (r0 * r1) * ell, unit),
        (2 * math.exp(-((Tb - Tc) ** 2) / 6) * ell, type2_ok),
        (Lf * 16 * Tb * Tc * ell / (r0 * params.delta_heavy), unit),
        (40 * Tb * Tc * params.delta_heavy * ell / (r0 * r1), unit),
        (ell * r1 * Tb / r0**1.5 * math.sqrt(1200 * 16 * Lf * Tb * Tc), unit),
    ]
    for c, (bound, ok) in enumerate(type_bounds):
        R.append(_mean_report(f"E[#close type {c + 1}]", acc["type_sum"][c], acc["type_sq"][c],
                              trials, bound, ell, ok, confidence))
    R.append(_mean_report("E[#light near bad]", acc["lnb_sum"], acc["lnb_sq"], trials,
                          10 * Tb * params.delta_heavy * ell / r0, ell, unit, confidence))

    xbound = 0.0
    if ell and m:
        cn = np.linalg.norm(V, axis=0)
        with np.errstate(divide="ignore"):
            xbound = float(np.sum(2 * np.exp(-1 / (18 * r0**2 * cn**2))
                                  + 2 * np.exp(-1 / (72 * r1**2 * cn**2))))
    R.append(binom("P[|X|inf>1/2]", acc["xinf"], 1 / max(m, 1) ** 2,
                   in_regime=params.is_paper and col_ok))
    R.append(binom("P[|X|inf>1/2] (coordinate union)", acc["xinf"], xbound))

    for i in indices:
        R.append(binom(f"P[bad i={i}]", acc["bad"][i], 4 * Tb / (r0 * sqS[i])))
    for j in indices:
        for h, t in zip(params.levels, ts):
            R.append(binom(f"P[E1 j={j} t={int(t)}]", acc["E1"][j, h], 4 * t * Tb / (r0 * sqS[j])))
    for j in indices:
        R.append(binom(f"P[close&activated j={j}]", acc["close_act"][j],
                       Lf * 16 * Tb * Tc / (r0 * sqS[j])))
        R.append(binom(f"P[bad&close j={j}]", acc["bad_close"][j], 16 * Tb * Tc / (r0 * r1),
                       in_regime=unit))
        R.append(binom(f"P[activated&not near bad j={j}]", acc["act_not_near"][j],
                       1200 * r1**2 * Tb**2 * sqS[j] / r0**2, in_regime=unit))
    for p, (i, j, h) in enumerate(pairs):
        t = 2.0**h
        ok = unit and i != j and abs(G[i, j]) <= params.near_bad_dot
        R.append(binom(f"P[bad i={i}&E1 j={j} t={int(t)}]", acc["pairs"][p],
                       400 * t * Tb**2 / (r0**2 * sqS[j]), in_regime=ok))
    return BreakdownReport(R, trials, params, int(acc["untyped"]), int(acc["bad_not_near"]), seed)


def pipeline_instance(collection: Sequence[cube.Hyperplane], config: WitnessConfig | None = None,
                      seed: int = 0, n: int | None = None):
    """(V, lambda, params) seen by the sampler inside the search, with one
    uniformly drawn assignment w of the removed columns."""
    config = config or WitnessConfig()
    n = n if n is not None else collection[0].n
    ctx, _ = _prepare(collection, n, config, rngmod.check_seed(seed))
    if ctx.A.shape[0] == 0:
        raise ValueError("empty collection has no sampler instance")
    g = rngmod.stream(ctx.seed, "instance", 0)
    w = np.where(g.random(ctx.N2.size) < 0.5, 1, -1)
    part = ctx.A[:, ctx.N2] @ w if ctx.N2.size else np.zeros(ctx.A.shape[0])
    return ctx.V, ctx.b[ctx.K1] - part[ctx.K1], ctx.params
