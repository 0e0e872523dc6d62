"""Threshold procedures and the realized false discovery proportion.

Two procedures are provided: the Benjamini-Hochberg step-up at level alpha,
whose data-driven threshold is the largest t with pooled-e.c.d.f. mass
G_m(t) >= t / alpha, and a fixed threshold t0, the simplest member of the
family of smooth threshold functionals (its derivative is zero, which makes
it useful for isolating the e.c.d.f. fluctuation term in the limit theory).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ParameterError
from .model import Sample

__all__ = [
    "BH",
    "FixedThreshold",
    "ThresholdProcedure",
    "RejectionResult",
    "bh_threshold",
    "apply_procedure",
    "fdp_at",
]


@dataclass(frozen=True)
class BH:
    """Benjamini-Hochberg step-up procedure at level alpha."""

    alpha: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha!r}")


@dataclass(frozen=True)
class FixedThreshold:
    """Reject all p-values <= t, with t fixed in advance."""

    t: float

    def __post_init__(self):
        if not (0.0 < self.t < 1.0):
            raise ParameterError(f"threshold must lie in (0, 1), got {self.t!r}")


ThresholdProcedure = Union[BH, FixedThreshold]


@dataclass(frozen=True)
class RejectionResult:
    """Realized threshold, rejection counts, and FDP for one sample.

    fdp is false_rejections / max(rejected, 1); an empty rejection set gives
    FDP 0 by convention.
    """

    threshold: float
    rejected: int
    false_rejections: int
    fdp: float


def bh_threshold(p: np.ndarray, alpha: float) -> float:
    """Data-driven BH threshold alpha * k / m, k = max{i : p_(i) <= i*alpha/m}.

    Returns 0.0 when no order statistic clears its line (no rejections).
    Equivalent to the functional definition max{t : G_m(t) >= t/alpha}; the
    step-up form is exact and O(m log m).
    """
    p = np.asarray(p, dtype=float)
    if p.size == 0:
        raise ParameterError("p-value vector must be nonempty")
    if not (0.0 < alpha < 1.0):
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")
    m = p.size
    p_sorted = np.sort(p)
    below = p_sorted <= alpha * np.arange(1, m + 1) / m
    if not below.any():
        return 0.0
    k = int(np.nonzero(below)[0][-1]) + 1
    return alpha * k / m


def _count_rejections(s: Sample, threshold: float) -> tuple[int, int]:
    rejected_mask = s.p <= threshold  # ties at the threshold are rejected
    rejected = int(np.count_nonzero(rejected_mask))
    false_rej = int(np.count_nonzero(rejected_mask & ~s.tau))
    return rejected, false_rej


def apply_procedure(procedure: ThresholdProcedure, s: Sample) -> RejectionResult:
    """Run a procedure on a sample and tally the realized FDP."""
    if isinstance(procedure, BH):
        threshold = bh_threshold(s.p, procedure.alpha)
    elif isinstance(procedure, FixedThreshold):
        threshold = procedure.t
    else:
        raise ParameterError(f"unknown procedure {procedure!r}")
    rejected, false_rej = _count_rejections(s, threshold)
    fdp = false_rej / max(rejected, 1)
    return RejectionResult(
        threshold=threshold, rejected=rejected, false_rejections=false_rej, fdp=fdp
    )


def fdp_at(s: Sample, t: float) -> float:
    """False discovery proportion of the rejection set {i : p_i <= t}."""
    if not (0.0 <= t <= 1.0):
        raise ParameterError(f"t must lie in [0, 1], got {t!r}")
    rejected, false_rej = _count_rejections(s, t)
    return false_rej / max(rejected, 1)
