"""Confidence intervals and the estimate/bound report used by every check."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Iterable

from scipy import stats as _st

DEFAULT_CONFIDENCE = 0.99
SLACK_HALF_WIDTHS = 3.0


def clopper_pearson(successes: int, trials: int, confidence: float = DEFAULT_CONFIDENCE) -> tuple[float, float]:
    """Exact binomial interval for a success probability."""
    if trials <= 0:
        raise ValueError("need at least one trial")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    alpha = 1.0 - confidence
    lo = 0.0 if successes == 0 else float(_st.beta.ppf(alpha / 2, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(_st.beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return lo, hi


def mean_interval(total: float, total_sq: float, trials: int,
                  confidence: float = DEFAULT_CONFIDENCE) -> tuple[float, float, float]:
    """Normal-approximation interval for a mean from running sums."""
    mean = total / trials
    var = max(total_sq / trials - mean * mean, 0.0) * trials / max(trials - 1, 1)
    half = float(_st.norm.ppf(0.5 + confidence / 2)) * math.sqrt(var / trials)
    return mean, mean - half, mean + half


class Verdict(enum.Enum):
    PASS = "Pass"
    VACUOUS = "Vacuous"
    FAIL = "Fail"
    # the bound's hypotheses do not hold at this instance; reported, never tested
    OUT_OF_REGIME = "OutOfRegime"


@dataclass
class EstimateReport:
    quantity: str
    estimate: float
    ci_low: float
    ci_high: float
    trials: int
    paper_bound: float
    # largest value the quantity can take: 1 for probabilities, l for counts
    max_value: float = 1.0
    in_regime: bool = True
    exact: object = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.ci_low <= self.estimate <= self.ci_high:
            raise ValueError(f"{self.quantity}: estimate outside its interval")

    @property
    def vacuous(self) -> bool:
        return self.paper_bound >= self.max_value

    @property
    def verdict(self) -> Verdict:
        if not self.in_regime:
            return Verdict.OUT_OF_REGIME
        if self.vacuous:
            return Verdict.VACUOUS
        if self.ci_low > self.paper_bound:
            return Verdict.FAIL
        return Verdict.PASS

    @property
    def half_width(self) -> float:
        return (self.ci_high - self.ci_low) / 2

    def within_slack(self, k: float = SLACK_HALF_WIDTHS) -> bool:
        """estimate <= bound + k half-widths (the acceptance form of an upper-bound check)."""
        return self.estimate <= self.paper_bound + k * self.half_width

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.ci_low - tol <= value <= self.ci_high + tol

    def row(self) -> dict:
        return {
            "quantity": self.quantity,
            "estimate": _fmt(self.estimate),
            "ci_lo": _fmt(self.ci_low),
            "ci_hi": _fmt(self.ci_high),
            "trials": self.trials,
            "paper_bound": _fmt(self.paper_bound),
            "vacuous_flag": int(self.vacuous),
            "verdict": self.verdict.value,
        }


def binomial_report(quantity: str, hits: int, trials: int, bound: float,
                    confidence: float = DEFAULT_CONFIDENCE, **kw) -> EstimateReport:
    lo, hi = clopper_pearson(hits, trials, confidence)
    return EstimateReport(quantity, hits / trials, lo, hi, trials, bound, **kw)


def exact_report(quantity: str, value, bound: float, **kw) -> EstimateReport:
    v = float(value)
    return EstimateReport(quantity, v, v, v, 0, bound, exact=value, **kw)


def _fmt(x: float) -> str:
    return repr(float(x))


REPORT_COLUMNS = ["quantity", "estimate", "ci_lo", "ci_hi", "trials", "paper_bound",
                  "vacuous_flag", "verdict"]


BREAKDOWN_COLUMNS = ["quantity", "estimate", "ci_lo", "ci_hi", "paper_bound", "vacuous_flag"]


def reports_to_csv(reports: Iterable[EstimateReport], columns=REPORT_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


def any_failed(reports: Iterable[EstimateReport]) -> bool:
    return any(r.verdict is Verdict.FAIL for r in reports)
