"""Hypercube {-1,+1}^n, hyperplanes, and the edge-slicing predicate.

Vertices are encoded as n-bit integers: bit j set means coordinate j is +1.
An edge is stored canonically by its endpoint with -1 in the flipped
coordinate (``EdgeId.base``) and the flipped coordinate itself.

Hyperplanes come in two numeric modes.  Exact hyperplanes carry
``fractions.Fraction`` coefficients and every sign decision about them is
exact.  Floating hyperplanes carry Python floats and use a zero band
``eps_zero = rel_tol * (1 + |b| + sum |a_j|)``.
"""

from __future__ import annotations

import enum
import functools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

DEFAULT_CAP = 24
DEFAULT_ZERO_TOL = 1e-12
_CHUNK_BITS = 16
_INT64_SAFE = 2**62
_UNIT_ROUNDOFF = 2.0**-53


class DimensionError(ValueError):
    pass


class CapExceeded(ValueError):
    pass


class WiggleError(RuntimeError):
    pass


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(float(x)):
            raise ValueError(f"non-finite coefficient {x!r}")
        return Fraction(float(x))
    return Fraction(x)


@dataclass(frozen=True)
class Hyperplane:
    """The hyperplane {x : <a, x> = b}."""

    a: tuple
    b: Fraction | float

    def __post_init__(self):
        if len(self.a) == 0:
            raise DimensionError("hyperplane needs at least one coefficient")
        kinds = {isinstance(c, Fraction) for c in self.a} | {isinstance(self.b, Fraction)}
        if len(kinds) != 1:
            raise TypeError("mixed exact and floating values in one hyperplane")
        if not self.exact:
            for c in (*self.a, self.b):
                if not isinstance(c, float) or not math.isfinite(c):
                    raise TypeError(f"floating hyperplane values must be finite floats, got {c!r}")

    @classmethod
    def exact_of(cls, a: Iterable, b) -> Hyperplane:
        return cls(tuple(to_fraction(c) for c in a), to_fraction(b))

    @classmethod
    def float_of(cls, a: Iterable, b) -> Hyperplane:
        return cls(tuple(float(c) for c in a), float(b))

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def exact(self) -> bool:
        return isinstance(self.b, Fraction)

    def scaled(self, phi) -> Hyperplane:
        if phi == 0:
            raise ValueError("scale factor must be nonzero")
        if self.exact:
            phi = to_fraction(phi)
            return Hyperplane(tuple(c * phi for c in self.a), self.b * phi)
        phi = float(phi)
        return Hyperplane(tuple(c * phi for c in self.a), self.b * phi)

    def to_exact(self) -> Hyperplane:
        return self if self.exact else Hyperplane.exact_of(self.a, self.b)

    def zero_tol(self, rel_tol: float = DEFAULT_ZERO_TOL) -> float:
        return rel_tol * (1.0 + abs(float(self.b)) + sum(abs(float(c)) for c in self.a))


@dataclass(frozen=True, order=True)
class EdgeId:
    base: int
    flip: int

    def __post_init__(self):
        if self.flip < 0 or self.base < 0:
            raise ValueError("edge fields must be non-negative")
        if (self.base >> self.flip) & 1:
            raise ValueError("non-canonical edge: base must have -1 in the flipped coordinate")

    @classmethod
    def from_vertices(cls, u: int, v: int) -> EdgeId:
        diff = u ^ v
        if diff == 0 or diff & (diff - 1):
            raise ValueError("vertices do not differ in exactly one coordinate")
        flip = diff.bit_length() - 1
        return cls(min(u, v), flip)

    @property
    def endpoints(self) -> tuple[int, int]:
        return self.base, self.base | (1 << self.flip)

    def check_dim(self, n: int) -> None:
        if self.flip >= n or self.base >> n:
            raise DimensionError(f"edge {self} does not live in dimension {n}")


def edge_count(n: int) -> int:
    return n * 2 ** (n - 1)


def iter_edges(n: int) -> Iterator[EdgeId]:
    """All edges in (base, flip) lexicographic order."""
    for base in range(2**n):
        for h in range(n):
            if not (base >> h) & 1:
                yield EdgeId(base, h)


def vertex_to_signs(bits: int, n: int) -> np.ndarray:
    if bits < 0 or bits >> n:
        raise DimensionError(f"vertex encoding {bits:#x} has bits outside dimension {n}")
    return np.array([1 if (bits >> j) & 1 else -1 for j in range(n)], dtype=np.int8)


def signs_to_vertex(signs: Sequence[int]) -> int:
    bits = 0
    for j, s in enumerate(signs):
        if s not in (1, -1):
            raise ValueError(f"vertex coordinates must be +-1, got {s!r}")
        if s == 1:
            bits |= 1 << j
    return bits


def evaluate(h: Hyperplane, bits: int):
    """<a, v> - b at the vertex encoded by ``bits``."""
    if bits < 0 or bits >> h.n:
        raise DimensionError(f"vertex encoding {bits:#x} has bits outside dimension {h.n}")
    val = -h.b
    for j, c in enumerate(h.a):
        val = val + c if (bits >> j) & 1 else val - c
    return val


class SliceKind(enum.Enum):
    SLICED = "sliced"
    NOT_SLICED = "not_sliced"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class SliceOutcome:
    kind: SliceKind
    on_hyperplane: tuple[int, ...] = ()

    @property
    def sliced(self) -> bool:
        return self.kind is SliceKind.SLICED


def _sign(h: Hyperplane, value, rel_tol: float) -> int:
    if h.exact:
        return (value > 0) - (value < 0)
    if abs(value) <= h.zero_tol(rel_tol):
        return 0
    return 1 if value > 0 else -1


def slices_edge(h: Hyperplane, e: EdgeId, rel_tol: float = DEFAULT_ZERO_TOL) -> SliceOutcome:
    e.check_dim(h.n)
    u, v = e.endpoints
    su = _sign(h, evaluate(h, u), rel_tol)
    sv = _sign(h, evaluate(h, v), rel_tol)
    if su == 0 or sv == 0:
        return SliceOutcome(SliceKind.DEGENERATE, tuple(x for x, s in ((u, su), (v, sv)) if s == 0))
    if su != sv:
        return SliceOutcome(SliceKind.SLICED)
    return SliceOutcome(SliceKind.NOT_SLICED)


# --- vectorised sign evaluation -------------------------------------------


@dataclass(frozen=True)
class _IntForm:
    coeffs: tuple[int, ...]
    offset: int
    fits64: bool


@functools.lru_cache(maxsize=4096)
def _int_form(h: Hyperplane) -> _IntForm:
    # common-denominator scaling by a positive integer keeps every sign
    den = math.lcm(*(c.denominator for c in h.a), h.b.denominator)
    coeffs = tuple(int(c * den) for c in h.a)
    offset = int(h.b * den)
    fits = sum(abs(c) for c in coeffs) + abs(offset) < _INT64_SAFE
    return _IntForm(coeffs, offset, fits)


def _bit_planes(vertices: np.ndarray, n: int) -> list[np.ndarray]:
    return [((vertices >> j) & 1).astype(bool) for j in range(n)]


def _float_values(coeffs, offset, planes) -> np.ndarray:
    val = np.full(planes[0].shape, -float(offset))
    for c, bit in zip(coeffs, planes):
        c = float(c)
        val += np.where(bit, c, -c)
    return val


def vertex_signs(h: Hyperplane, vertices: np.ndarray, rel_tol: float = DEFAULT_ZERO_TOL,
                 planes: list[np.ndarray] | None = None) -> np.ndarray:
    """Sign of <a,v> - b for each encoded vertex, as int8 in {-1, 0, 1}."""
    vertices = np.asarray(vertices, dtype=np.int64)
    if planes is None:
        planes = _bit_planes(vertices, h.n)
    if not h.exact:
        val = _float_values(h.a, h.b, planes)
        out = np.sign(val).astype(np.int8)
        out[np.abs(val) <= h.zero_tol(rel_tol)] = 0
        return out
    form = _int_form(h)
    if form.fits64:
        val = np.full(vertices.shape, -form.offset, dtype=np.int64)
        for c, bit in zip(form.coeffs, planes):
            val += np.where(bit, c, -c)
        return np.sign(val).astype(np.int8)
    # float filter; entries too close to zero are settled exactly
    af = [float(c) for c in h.a]
    bf = float(h.b)
    val = _float_values(af, bf, planes)
    mass = sum(abs(c) for c in af) + abs(bf)
    err = 4.0 * (h.n + 2) * _UNIT_ROUNDOFF * mass + (h.n + 1) * 2.0**-1070
    out = np.sign(val).astype(np.int8)
    for idx in np.flatnonzero(np.abs(val) <= err):
        exact_val = evaluate(h, int(vertices[idx]))
        out[idx] = (exact_val > 0) - (exact_val < 0)
    return out


# --- cover verification ----------------------------------------------------


@dataclass
class CoverReport:
    n: int
    total_edges: int
    sliced_edges: int
    unsliced: list[EdgeId]
    unsliced_count: int
    degenerate_incidences: int
    per_hyperplane_slice_counts: list[int]
    unsliced_cap: int

    @property
    def complete(self) -> bool:
        return self.unsliced_count == 0

    def summary(self) -> str:
        return f"{self.sliced_edges}/{self.total_edges} sliced"

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "total_edges": self.total_edges,
            "sliced_edges": self.sliced_edges,
            "unsliced_count": self.unsliced_count,
            "unsliced_listed": len(self.unsliced),
            "unsliced_cap": self.unsliced_cap,
            "degenerate_incidences": self.degenerate_incidences,
            "per_hyperplane_slice_counts": list(self.per_hyperplane_slice_counts),
        }


@dataclass
class _BlockResult:
    sliced: int = 0
    degenerate: int = 0
    per_h: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    unsliced_base: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    unsliced_flip: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))


def _edge_blocks(hyperplanes: Sequence[Hyperplane], n: int, start: int, size: int,
                 rel_tol: float) -> Iterator[tuple[int, np.ndarray, np.ndarray, np.ndarray]]:
    """Yield (flip, base vertices, base signs, partner signs) for one vertex block.

    Signs are k x (number of bases) int8 arrays.  Every edge whose base lies in
    [start, start + size) is produced exactly once over all flips.
    """
    verts = np.arange(start, start + size, dtype=np.int64)
    planes = _bit_planes(verts, n)
    k = len(hyperplanes)
    sg = np.empty((k, size), dtype=np.int8)
    for i, h in enumerate(hyperplanes):
        sg[i] = vertex_signs(h, verts, rel_tol, planes)
    local = np.arange(size, dtype=np.int64)
    for flip in range(n):
        step = 1 << flip
        if step < size:
            idx = local[((local >> flip) & 1) == 0]
            yield flip, verts[idx], sg[:, idx], sg[:, idx + step]
        elif not (start >> flip) & 1:
            pverts = verts | step
            pplanes = _bit_planes(pverts, n)
            sp = np.empty((k, size), dtype=np.int8)
            for i, h in enumerate(hyperplanes):
                sp[i] = vertex_signs(h, pverts, rel_tol, pplanes)
            yield flip, verts, sg, sp


def _cover_block(hyperplanes, n, start, size, rel_tol) -> _BlockResult:
    k = len(hyperplanes)
    res = _BlockResult(per_h=np.zeros(k, dtype=np.int64))
    bases, flips = [], []
    for flip, verts, s0, s1 in _edge_blocks(hyperplanes, n, start, size, rel_tol):
        cut = (s0.astype(np.int16) * s1) < 0
        res.degenerate += int(np.count_nonzero((s0 == 0) | (s1 == 0)))
        res.per_h += cut.sum(axis=1)
        covered = cut.any(axis=0) if k else np.zeros(verts.shape, dtype=bool)
        res.sliced += int(covered.sum())
        miss = verts[~covered]
        bases.append(miss)
        flips.append(np.full(miss.shape, flip, dtype=np.int64))
    if bases:
        b = np.concatenate(bases)
        f = np.concatenate(flips)
        order = np.lexsort((f, b))
        res.unsliced_base, res.unsliced_flip = b[order], f[order]
    return res


def _check_collection(hyperplanes: Sequence[Hyperplane], n: int, cap: int) -> None:
    if n < 1:
        raise DimensionError("dimension must be positive")
    if n > cap:
        raise CapExceeded(f"dimension {n} exceeds enumeration cap {cap}")
    modes = {h.exact for h in hyperplanes}
    if len(modes) > 1:
        raise TypeError("collection mixes exact and floating hyperplanes")
    for h in hyperplanes:
        if h.n != n:
            raise DimensionError(f"hyperplane of dimension {h.n} in a dimension-{n} collection")


def _blocks(n: int, chunk_bits: int) -> list[tuple[int, int]]:
    size = 1 << min(n, chunk_bits)
    return [(start, size) for start in range(0, 2**n, size)]


def verify_cover(hyperplanes: Sequence[Hyperplane], n: int, *, cap: int = DEFAULT_CAP,
                 unsliced_cap: int = 1000, rel_tol: float = DEFAULT_ZERO_TOL,
                 workers: int = 1, chunk_bits: int = _CHUNK_BITS) -> CoverReport:
    """Enumerate every edge of the n-cube and record which ones are sliced.

    Degenerate incidences (an endpoint on the hyperplane) never count as
    slicing.  The vertex space is processed in blocks, optionally on a thread
    pool; blocks are merged in address order, so the report does not depend
    on ``workers``.
    """
    hyperplanes = list(hyperplanes)
    _check_collection(hyperplanes, n, cap)
    blocks = _blocks(n, chunk_bits)
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda sb: _cover_block(hyperplanes, n, *sb, rel_tol), blocks))
    else:
        parts = [_cover_block(hyperplanes, n, s, z, rel_tol) for s, z in blocks]
    per_h = np.zeros(len(hyperplanes), dtype=np.int64)
    sliced = degenerate = missing = 0
    listed: list[EdgeId] = []
    for part in parts:
        sliced += part.sliced
        degenerate += part.degenerate
        per_h += part.per_h
        missing += len(part.unsliced_base)
        room = unsliced_cap - len(listed)
        if room > 0:
            listed.extend(EdgeId(int(b), int(f))
                          for b, f in zip(part.unsliced_base[:room], part.unsliced_flip[:room]))
    total = edge_count(n)
    assert sliced + missing == total
    return CoverReport(n, total, sliced, listed, missing, degenerate,
                       [int(c) for c in per_h], unsliced_cap)


def unsliced_by_all(hyperplanes: Sequence[Hyperplane], e: EdgeId,
                    rel_tol: float = DEFAULT_ZERO_TOL) -> bool:
    return not any(slices_edge(h, e, rel_tol).sliced for h in hyperplanes)


def levels_cover(n: int) -> list[Hyperplane]:
    """The n hyperplanes <1, x> = c, c halfway between consecutive coordinate sums."""
    if n < 1:
        raise DimensionError("dimension must be positive")
    return [Hyperplane.exact_of([1] * n, c) for c in range(-n + 1, n, 2)]


# --- wiggling --------------------------------------------------------------


@dataclass
class WiggleResult:
    hyperplanes: list[Hyperplane]
    magnitude: Fraction
    perturbed: list[tuple[int, int]]
    direction: str
    verified: bool
    degenerate_before: int | None = None
    degenerate_after: int | None = None

    @property
    def changed(self) -> bool:
        return bool(self.perturbed)


def is_generic(hyperplanes: Sequence[Hyperplane]) -> bool:
    seen = set()
    for h in hyperplanes:
        for c in h.a:
            m = abs(c)
            if m == 0 or m in seen:
                return False
            seen.add(m)
    return True


def _perturb(hyperplanes: Sequence[Hyperplane], eps: Fraction, shrink: bool):
    taken = {abs(c) for h in hyperplanes for c in h.a if c != 0}
    seen: set = set()
    r = 0
    out, touched = [], []
    for i, h in enumerate(hyperplanes):
        coeffs = list(h.a)
        for j, c in enumerate(coeffs):
            m = abs(c)
            if m != 0 and m not in seen:
                seen.add(m)
                continue
            while True:
                step = eps / 2**r
                r += 1
                if c == 0:
                    new = step if shrink else -step
                else:
                    sgn = 1 if c > 0 else -1
                    new = c - sgn * step if shrink else c + sgn * step
                    if new == 0 or (new > 0) != (c > 0):
                        continue
                if abs(new) not in taken:
                    break
            taken.add(abs(new))
            coeffs[j] = new
            touched.append((i, j))
        out.append(Hyperplane(tuple(coeffs), h.b))
    return out, touched


def _same_slices(old: Hyperplane, new: Hyperplane, n: int) -> tuple[bool, int, int, EdgeId | None]:
    deg_old = deg_new = 0
    first_diff = None
    for start, size in _blocks(n, _CHUNK_BITS):
        for (flip, verts, s0, s1), (_, _, t0, t1) in zip(
                _edge_blocks([old], n, start, size, DEFAULT_ZERO_TOL),
                _edge_blocks([new], n, start, size, DEFAULT_ZERO_TOL)):
            a = (s0.astype(np.int16) * s1)[0] < 0
            b = (t0.astype(np.int16) * t1)[0] < 0
            deg_old += int(np.count_nonzero((s0 == 0) | (s1 == 0)))
            deg_new += int(np.count_nonzero((t0 == 0) | (t1 == 0)))
            diff = np.flatnonzero(a != b)
            if diff.size and first_diff is None:
                first_diff = EdgeId(int(verts[diff[0]]), flip)
    return first_diff is None, deg_old, deg_new, first_diff


def wiggle(hyperplanes: Sequence[Hyperplane], magnitude=Fraction(1, 2**20), *,
           verify: bool = True, cap: int = DEFAULT_CAP, max_halvings: int = 6) -> WiggleResult:
    """Make every coefficient nonzero and all |coefficients| pairwise distinct.

    Only zero or repeated-magnitude coefficients move, the r-th one by
    ``magnitude * 2**-r``.  Offsets are left alone.  With ``verify`` the
    sliced-edge set of every moved hyperplane is compared edge by edge with
    the original; magnitude-shrinking moves are tried before growing ones,
    then the magnitude is halved.  Raises WiggleError when no attempt
    certifies.
    """
    hyperplanes = list(hyperplanes)
    if any(not h.exact for h in hyperplanes):
        raise TypeError("wiggle needs exact hyperplanes")
    eps = to_fraction(magnitude)
    if eps <= 0:
        raise ValueError("wiggle magnitude must be positive")
    if is_generic(hyperplanes):
        return WiggleResult(hyperplanes, eps, [], "none", verify)
    if not verify:
        out, touched = _perturb(hyperplanes, eps, shrink=True)
        return WiggleResult(out, eps, touched, "shrink", False)
    n = hyperplanes[0].n
    _check_collection(hyperplanes, n, cap)
    failure = None
    for _ in range(max_halvings + 1):
        for shrink in (True, False):
            out, touched = _perturb(hyperplanes, eps, shrink)
            ok, deg_before, deg_after = True, 0, 0
            for i in sorted({i for i, _ in touched}):
                same, d0, d1, diff = _same_slices(hyperplanes[i], out[i], n)
                deg_before += d0
                deg_after += d1
                if not same:
                    ok = False
                    failure = (i, diff, eps, "shrink" if shrink else "grow")
                    break
            if ok:
                return WiggleResult(out, eps, touched, "shrink" if shrink else "grow", True,
                                    deg_before, deg_after)
        eps /= 2
    i, diff, last_eps, direction = failure
    raise WiggleError(
        f"hyperplane {i}: sliced edges change at edge {diff} "
        f"(last magnitude {last_eps}, direction {direction}); retry with a smaller magnitude")
