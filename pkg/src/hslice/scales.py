"""Vectors containing s scales of size at least delta.

A certificate is an ordered family of disjoint coordinate groups I_1..I_s
with ||v|I_s|| >= delta and ||v|I_i|| >= 100 ||v|I_{i+1}||.  Norms are handled
as logarithms throughout so that vectors with entries far beyond the float
range (e.g. 100**400, given as Python ints or Fractions) are supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

RATIO = 100.0
EPS_NORM = 1e-9
BRUTE_CAP = 12

_LOG_RATIO = math.log(RATIO)
_LOG_SLACK = math.log1p(-EPS_NORM)


class MalformedCertificate(ValueError):
    pass


def _log_abs_scalar(x) -> float:
    if x == 0:
        return -math.inf
    if isinstance(x, Fraction):
        return math.log(abs(x.numerator)) - math.log(x.denominator)
    if isinstance(x, int):
        return math.log(abs(x))
    return math.log(abs(float(x)))


def log_abs(v) -> np.ndarray:
    """Elementwise log|v_j| (-inf at zeros), safe for huge exact entries."""
    if isinstance(v, np.ndarray) and v.dtype.kind in "fiu":
        with np.errstate(divide="ignore"):
            return np.log(np.abs(v.astype(float)))
    return np.array([_log_abs_scalar(x) for x in v], dtype=float)


def _log_norm(la: np.ndarray, idx) -> float:
    """log of the l2 norm of the coordinates ``idx`` given their log-magnitudes."""
    sel = la[list(idx)]
    if sel.size == 0:
        return -math.inf
    return 0.5 * float(np.logaddexp.reduce(2.0 * sel))


@dataclass(frozen=True)
class ScaleCertificate:
    groups: tuple[tuple[int, ...], ...]
    delta: float
    log_norms: tuple[float, ...] = ()

    @property
    def s(self) -> int:
        return len(self.groups)

    @property
    def group_norms(self) -> tuple[float, ...]:
        return tuple(math.exp(x) if x < 709 else math.inf for x in self.log_norms)

    def to_dict(self) -> dict:
        return {"delta": self.delta, "groups": [list(g) for g in self.groups]}

    @classmethod
    def from_dict(cls, d: dict) -> ScaleCertificate:
        return cls(tuple(tuple(int(i) for i in g) for g in d["groups"]), float(d["delta"]))


def certificate_for(v, groups: Sequence[Sequence[int]], delta: float) -> ScaleCertificate:
    """Build a certificate (with cached norms) for explicitly chosen groups."""
    la = log_abs(v)
    _check_groups(groups, len(la))
    groups = tuple(tuple(int(i) for i in g) for g in groups)
    return ScaleCertificate(groups, float(delta), tuple(_log_norm(la, g) for g in groups))


def _check_groups(groups, length: int) -> None:
    seen: set[int] = set()
    for g in groups:
        for i in g:
            if not 0 <= i < length:
                raise MalformedCertificate(f"index {i} out of range for length {length}")
            if i in seen:
                raise MalformedCertificate(f"index {i} appears in more than one group")
            seen.add(i)


def verify_certificate(v, cert: ScaleCertificate) -> bool:
    """True iff the groups witness cert.s scales of size >= cert.delta in v.

    Comparisons allow a relative slack of EPS_NORM.  Overlapping groups or
    out-of-range indices raise MalformedCertificate.
    """
    la = log_abs(v)
    _check_groups(cert.groups, len(la))
    if cert.delta <= 0:
        raise MalformedCertificate("delta must be positive")
    if not cert.groups:
        return True
    norms = [_log_norm(la, g) for g in cert.groups]
    if norms[-1] < math.log(cert.delta) + _LOG_SLACK:
        return False
    return all(norms[i] >= norms[i + 1] + _LOG_RATIO + _LOG_SLACK for i in range(len(norms) - 1))


def greedy_scales(v, delta: float) -> tuple[int, ScaleCertificate]:
    """Certified lower bound on the number of scales of size >= delta.

    Coordinates are sorted by magnitude; starting from the smallest, the
    last group is the shortest run reaching norm delta, and each earlier
    group the shortest following run reaching 100x the previous norm.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    la = log_abs(v)
    order = sorted(range(len(la)), key=lambda j: (-la[j], j))
    target = math.log(delta)
    groups: list[tuple[int, ...]] = []
    norms: list[float] = []
    pos = len(order)
    acc = -math.inf
    cur: list[int] = []
    while pos > 0:
        pos -= 1
        j = order[pos]
        cur.append(j)
        acc = float(np.logaddexp(acc, 2.0 * la[j]))
        if 0.5 * acc >= target + 0.5 * _LOG_SLACK:
            groups.append(tuple(sorted(cur)))
            norms.append(0.5 * acc)
            target = 0.5 * acc + _LOG_RATIO
            cur, acc = [], -math.inf
    groups.reverse()
    norms.reverse()
    cert = ScaleCertificate(tuple(groups), float(delta), tuple(norms))
    return len(groups), cert


def truncate_certificate(cert: ScaleCertificate, new_delta: float) -> ScaleCertificate:
    """Drop the last ceil(log_100(new_delta/delta)) groups.

    If cert is valid for delta <= new_delta the result is valid for new_delta.
    """
    if new_delta < cert.delta:
        raise ValueError("truncation only raises delta")
    drop = math.ceil(math.log(new_delta / cert.delta) / _LOG_RATIO - 1e-12)
    keep = max(cert.s - drop, 0)
    return ScaleCertificate(cert.groups[:keep], float(new_delta), cert.log_norms[:keep])


def brute_max_scales(v, delta: float) -> int:
    """Exact maximum number of scales, over all ordered disjoint group families.

    Dynamic programme over subsets: for a chain of length L whose groups use
    exactly the coordinate set U, keep the smallest possible norm of its
    largest group (smaller is always easier to extend).
    """
    la = log_abs(v)
    n = len(la)
    if n > BRUTE_CAP:
        raise ValueError(f"brute force limited to length {BRUTE_CAP}")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if n == 0:
        return 0
    full = (1 << n) - 1
    size = 1 << n
    logsq = np.full(size, -np.inf)
    for mask in range(1, size):
        low = (mask & -mask).bit_length() - 1
        logsq[mask] = np.logaddexp(logsq[mask & (mask - 1)], 2.0 * la[low])
    # the oracle gets the verifier's full tolerance; the greedy detector only half
    slack = -2.0 * _LOG_SLACK
    best = np.where(logsq >= 2.0 * math.log(delta) - slack, logsq, np.inf)
    best[0] = np.inf
    length = 0
    submasks: dict[int, np.ndarray] = {}
    while np.isfinite(best).any():
        length += 1
        nxt = np.full(size, np.inf)
        for u in np.flatnonzero(np.isfinite(best)):
            comp = full ^ int(u)
            if comp == 0:
                continue
            subs = submasks.get(comp)
            if subs is None:
                subs = _submasks(comp)
                submasks[comp] = subs
            ok = subs[logsq[subs] >= best[u] + 2.0 * _LOG_RATIO - slack]
            if ok.size:
                np.minimum.at(nxt, int(u) | ok, logsq[ok])
        best = nxt
    return length


def _submasks(mask: int) -> np.ndarray:
    out = []
    sub = mask
    while sub:
        out.append(sub)
        sub = (sub - 1) & mask
    return np.array(out, dtype=np.int64)
