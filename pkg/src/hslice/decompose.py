"""Row-rescaling / partition of a coefficient matrix.

Given a k x n matrix A with nonzero entries, find row and column partitions
[k] = K1 + K2, [n] = N1 + N2 and a row rescaling A' with

  (1) ||a'_i|N1|| = 1 for every row,
  (2) ||a'_{*j}|K1|| <= W for every column j in N1,
  (3) a'_i|N2 contains S scales of size >= 100 for every i in K2,

and |N2| <= n/2 under the default constants.  Columns are peeled off one at a
time; a row whose mass on N1 drops to tau or below is renormalised, and a row
renormalised S times is retired to K2.  Each renormalisation leaves behind a
group of removed columns that is 100x heavier than everything still in N1,
and those groups are the scale certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import scales

PAPER_TAU = 1.0 / 10001.0
SCALE_SIZE = 100.0
EPS_NORM = 1e-9


class DecompositionError(ValueError):
    pass


@dataclass(frozen=True)
class DecompConstants:
    S: int
    W: float
    tau: float
    overrides: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.S < 1 or not self.W > 0 or not 0 < self.tau < 1:
            raise ValueError(f"invalid constants S={self.S} W={self.W} tau={self.tau}")

    @classmethod
    def paper(cls, k: int, n: int) -> DecompConstants:
        if n < 2 or k < 1:
            raise ValueError("need k >= 1 and n >= 2")
        ln = math.log(n)
        return cls(math.ceil(250 * ln), 1e4 * math.sqrt(k * ln / n), PAPER_TAU)

    @classmethod
    def with_overrides(cls, k: int, n: int, **over) -> DecompConstants:
        base = cls.paper(k, n)
        unknown = set(over) - {"S", "W", "tau"}
        if unknown:
            raise ValueError(f"unknown constants {sorted(unknown)}")
        vals = {"S": base.S, "W": base.W, "tau": base.tau}
        vals.update(over)
        return cls(int(vals["S"]), float(vals["W"]), float(vals["tau"]),
                   tuple(sorted((key, float(v)) for key, v in over.items())))

    @classmethod
    def parse(cls, text: str, k: int, n: int) -> DecompConstants:
        """``paper`` or ``S=..,W=..,tau=..`` (any subset)."""
        text = text.strip()
        if text in ("", "paper"):
            return cls.paper(k, n)
        over = {}
        for part in text.split(","):
            key, _, val = part.partition("=")
            key = key.strip()
            if not _:
                raise ValueError(f"malformed constant {part!r}")
            over[key] = int(val) if key == "S" else _parse_real(val)
        return cls.with_overrides(k, n, **over)

    @property
    def is_paper(self) -> bool:
        return not self.overrides

    def to_dict(self) -> dict:
        return {"S": self.S, "W": self.W, "tau": self.tau, "overrides": dict(self.overrides)}


def _parse_real(s: str) -> float:
    s = s.strip()
    if "/" in s:
        p, q = s.split("/")
        return float(p) / float(q)
    return float(s)


@dataclass
class DecompositionResult:
    K1: list[int]
    K2: list[int]
    N1: list[int]
    N2: list[int]
    rescaled: np.ndarray
    row_scale: np.ndarray
    certificates: dict[int, scales.ScaleCertificate]
    history: list[list[list[int]]]
    constants: DecompConstants
    renormalizations: int = 0
    iterations: int = 0
    potential_trace: list[tuple[float, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "constants": self.constants.to_dict(),
            "K1": self.K1, "K2": self.K2, "N1": self.N1, "N2": self.N2,
            "row_scale": [repr(float(x)) for x in self.row_scale],
            "rescaled": [[repr(float(x)) for x in row] for row in self.rescaled],
            "certificates": {str(i): c.to_dict() for i, c in sorted(self.certificates.items())},
            "history": self.history,
            "renormalizations": self.renormalizations,
            "iterations": self.iterations,
        }


def decompose(A, constants: DecompConstants | None = None) -> DecompositionResult:
    """Run the peeling algorithm.  Deterministic: the smallest qualifying
    column is moved first and qualifying rows are renormalised in index order."""
    A = np.array(A, dtype=float)
    if A.ndim != 2:
        raise DecompositionError("matrix must be two-dimensional")
    k, n = A.shape
    if k < 1 or n < 2:
        raise DecompositionError("need k >= 1 rows and n >= 2 columns")
    if not np.all(np.isfinite(A)):
        raise DecompositionError("matrix has non-finite entries")
    zeros = np.argwhere(A == 0)
    if zeros.size:
        i, j = zeros[0]
        raise DecompositionError(f"zero entry at row {i}, column {j}")
    c = constants or DecompConstants.paper(k, n)

    in_n1 = np.ones(n, dtype=bool)
    in_k1 = np.ones(k, dtype=bool)
    B = A.copy()
    phi = np.ones(k)
    counts = np.zeros(k, dtype=int)
    pending: list[list[int]] = [[] for _ in range(k)]
    history: list[list[list[int]]] = [[] for _ in range(k)]
    threshold = c.tau * c.W**2

    def renormalise(i: int) -> None:
        norm = math.sqrt(float(np.sum(B[i, in_n1] ** 2)))
        if not (norm > 0 and math.isfinite(norm)):
            raise DecompositionError(f"row {i}: cannot renormalise (norm on N1 is {norm})")
        factor = 1.0 / norm
        B[i] *= factor
        phi[i] *= factor
        if not (np.all(np.isfinite(B[i])) and math.isfinite(phi[i]) and phi[i] != 0):
            raise DecompositionError(f"row {i}: overflow or underflow while rescaling")

    for i in range(k):
        renormalise(i)

    colsq = np.sum(B[in_k1] ** 2, axis=0)
    renorms = 0
    iterations = 0
    trace = [(float(np.sum(B[np.ix_(in_k1, in_n1)] ** 2)), 0)]
    while True:
        candidates = np.flatnonzero(in_n1 & (colsq >= threshold))
        if candidates.size == 0:
            break
        j = int(candidates[0])
        iterations += 1
        in_n1[j] = False
        for i in range(k):
            pending[i].append(j)
        for i in np.flatnonzero(in_k1):
            if float(np.sum(B[i, in_n1] ** 2)) <= c.tau:
                renormalise(int(i))
                counts[i] += 1
                renorms += 1
                history[i].append(sorted(pending[i]))
                pending[i] = []
        retire = np.flatnonzero(in_k1 & (counts >= c.S))
        in_k1[retire] = False
        colsq = np.sum(B[in_k1] ** 2, axis=0)
        potential = float(np.sum(B[np.ix_(in_k1, in_n1)] ** 2))
        trace.append((potential, renorms))
        if potential > k + renorms + 1e-9 * (k + renorms):
            raise DecompositionError(f"potential {potential} exceeds k + renormalisations")

    for i in range(k):
        renormalise(i)

    K2 = [int(i) for i in np.flatnonzero(~in_k1)]
    certs = {}
    for i in K2:
        groups = history[i][: c.S]
        certs[i] = scales.certificate_for(B[i], groups, SCALE_SIZE)
    return DecompositionResult(
        K1=[int(i) for i in np.flatnonzero(in_k1)], K2=K2,
        N1=[int(j) for j in np.flatnonzero(in_n1)], N2=[int(j) for j in np.flatnonzero(~in_n1)],
        rescaled=B, row_scale=phi, certificates=certs, history=history, constants=c,
        renormalizations=renorms, iterations=iterations, potential_trace=trace)


@dataclass
class VerificationReport:
    checks: dict[str, bool]
    failing_rows: dict[str, list[int]]
    details: dict[str, float]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {"ok": self.ok, "checks": self.checks, "failing_rows": self.failing_rows,
                "details": self.details}


def verify_decomposition(A, result: DecompositionResult,
                         constants: DecompConstants | None = None) -> VerificationReport:
    """Recheck every postcondition from the matrices and index sets alone."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(result.rescaled, dtype=float)
    k, n = A.shape
    c = constants or result.constants
    checks: dict[str, bool] = {}
    bad_rows: dict[str, list[int]] = {}
    details: dict[str, float] = {}

    K1, K2, N1, N2 = (sorted(set(x)) for x in (result.K1, result.K2, result.N1, result.N2))
    checks["partition"] = (
        B.shape == A.shape
        and len(K1) + len(K2) == k and set(K1).isdisjoint(K2) and set(K1) | set(K2) == set(range(k))
        and len(N1) + len(N2) == n and set(N1).isdisjoint(N2) and set(N1) | set(N2) == set(range(n)))
    if not checks["partition"]:
        return VerificationReport(checks, bad_rows, details)

    checks["n2_at_most_half"] = len(N2) <= n / 2
    details["n2"] = len(N2)

    # A' must be a row rescaling: each a'_i parallel to a_i with a nonzero factor
    rows = []
    for i in range(k):
        a, b = A[i], B[i]
        fac = float(a @ b) / float(a @ a)
        resid = float(np.linalg.norm(b - fac * a))
        if fac == 0 or not math.isfinite(fac) or resid > 1e-9 * float(np.linalg.norm(b)):
            rows.append(i)
    checks["row_rescaling"] = not rows
    bad_rows["row_rescaling"] = rows

    rows = []
    for i in range(k):
        norm = float(np.linalg.norm(B[i, N1])) if N1 else 0.0
        if abs(norm - 1.0) > EPS_NORM:
            rows.append(i)
    checks["row_norms_on_n1"] = not rows
    bad_rows["row_norms_on_n1"] = rows

    cols = []
    if K1 and N1:
        colnorm = np.linalg.norm(B[np.ix_(K1, N1)], axis=0)
        details["max_column_norm_k1"] = float(colnorm.max())
        cols = [N1[t] for t in np.flatnonzero(colnorm > c.W * (1 + EPS_NORM))]
    checks["column_norms_on_k1"] = not cols
    bad_rows["column_norms_on_k1"] = cols

    rows = []
    n2set = set(N2)
    for i in K2:
        cert = result.certificates.get(i)
        if cert is None or cert.s < c.S or cert.delta < SCALE_SIZE or any(
                j not in n2set for g in cert.groups for j in g):
            rows.append(i)
            continue
        if not scales.verify_certificate(B[i], cert):
            rows.append(i)
    checks["k2_scales"] = not rows
    bad_rows["k2_scales"] = rows

    bound = k * (c.S + 1) / (c.tau * c.W**2)
    details["n2_potential_bound"] = bound
    checks["potential_bound"] = len(N2) * c.tau * c.W**2 <= k * (c.S + 1) * (1 + EPS_NORM)
    return VerificationReport(checks, bad_rows, details)
