"""Equi-correlated Gaussian testing model and its O(m) sampler.

The model observes X_i = tau_i + Y_i for i = 1..m, where tau_i is 0 for a
true null and mu > 0 for an alternative, and (Y_1, ..., Y_m) is exchangeable
Gaussian with unit variances and common pairwise covariance rho.  One-sided
p-values are p_i = P(Z >= X_i).

Sampling never builds the m-by-m covariance matrix.  The exchangeable vector
is realized through its factor decomposition

    X_i = sqrt(1 - rho) * (xi_i - mean(xi)) + sqrt((1 + (m-1)*rho) / m) * U
          + mu * 1{tau_i > 0},

with xi_1, ..., xi_m, U i.i.d. standard normal.  The construction is exact
for every admissible rho in [-1/(m-1), 1], including the negative boundary
where the common-factor coefficient vanishes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ParameterError
from .gaussian import phi_upper

__all__ = [
    "ModelParams",
    "RngStream",
    "Sample",
    "StepEcdf",
    "ThetaOverM",
    "PowerLaw",
    "FixedRho",
    "RhoSequence",
    "sample",
    "ecdf_triple",
    "write_sample_csv",
]

_UINT64_MAX = 2**64 - 1

# smallest/largest p-values kept after clamping; downstream quantile calls
# require the open interval (0, 1)
_P_MIN = np.nextafter(0.0, 1.0)
_P_MAX = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class ModelParams:
    """Model tuple (m, pi0, mu, rho).

    m    -- number of hypotheses, >= 2
    pi0  -- proportion of true nulls in (0, 1); the null count is floor(m*pi0)
            and both groups must be nonempty
    mu   -- positive mean shift under the alternative
    rho  -- equi-correlation, in [-1/(m-1), 1]
    """

    m: int
    pi0: float
    mu: float
    rho: float

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 2:
            raise ParameterError(f"m must be an integer >= 2, got {self.m!r}")
        if not (0.0 < self.pi0 < 1.0):
            raise ParameterError(f"pi0 must lie in (0, 1), got {self.pi0!r}")
        if not (self.mu > 0.0 and math.isfinite(self.mu)):
            raise ParameterError(f"mu must be positive and finite, got {self.mu!r}")
        lo = -1.0 / (self.m - 1)
        if not (lo <= self.rho <= 1.0):
            raise ParameterError(
                f"rho must lie in [{lo!r}, 1] for m={self.m}, got {self.rho!r}"
            )
        m0 = self.m0
        if not (1 <= m0 <= self.m - 1):
            raise ParameterError(
                f"floor(m*pi0)={m0} leaves an empty group for m={self.m}; "
                "both nulls and alternatives must be nonempty"
            )

    @property
    def m0(self) -> int:
        """Number of true nulls, floor(m * pi0)."""
        return int(math.floor(self.m * self.pi0))


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by (seed, stream_id).

    Identical pairs reproduce identical samples bit for bit on every platform;
    distinct stream_ids give statistically independent streams.  Replicate r
    of an experiment conventionally uses stream_id = r.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not (0 <= v <= _UINT64_MAX):
                raise ParameterError(f"{name} must be a 64-bit unsigned integer, got {v!r}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class Sample:
    """One realized instance: truth labels, statistics, p-values.

    tau[i] is False for a true null (shift 0) and True for an alternative
    (shift mu).  Nulls occupy indices 0..m0-1; the model is exchangeable
    within groups, so the fixed layout loses no generality and keeps FDP
    bookkeeping trivial.
    """

    tau: np.ndarray
    x: np.ndarray
    p: np.ndarray

    @property
    def m(self) -> int:
        return self.tau.size

    @property
    def n_null(self) -> int:
        return int(np.count_nonzero(~self.tau))


# --- correlation sequences (asymptotic regime declarations) -----------------


@dataclass(frozen=True)
class ThetaOverM:
    """rho_m = theta / m, the regime where m * rho_m stays bounded."""

    theta: float

    def __post_init__(self):
        if not (self.theta >= -1.0 and math.isfinite(self.theta)):
            raise ParameterError(f"theta must be finite and >= -1, got {self.theta!r}")

    def rho_at(self, m: int) -> float:
        return self.theta / m


@dataclass(frozen=True)
class PowerLaw:
    """rho_m = c * m**(-gamma) with 0 < gamma < 1: m*rho_m -> inf, rho_m -> 0."""

    c: float
    gamma: float

    def __post_init__(self):
        if not (self.c > 0.0):
            raise ParameterError(f"c must be positive, got {self.c!r}")
        if not (0.0 < self.gamma < 1.0):
            raise ParameterError(f"gamma must lie in (0, 1), got {self.gamma!r}")

    def rho_at(self, m: int) -> float:
        return self.c * float(m) ** (-self.gamma)


@dataclass(frozen=True)
class FixedRho:
    """rho_m = rho constant in (0, 1).  No normal limit exists for the raw
    FDP in this regime; the oracle transform is the supported path."""

    rho: float

    def __post_init__(self):
        if not (0.0 < self.rho < 1.0):
            raise ParameterError(f"fixed rho must lie in (0, 1), got {self.rho!r}")

    def rho_at(self, m: int) -> float:
        return self.rho


RhoSequence = Union[ThetaOverM, PowerLaw, FixedRho]


# --- sampling ----------------------------------------------------------------


def sample(params: ModelParams, stream: RngStream) -> Sample:
    """Draw one instance of the model using the exchangeable factor form.

    Draw order is fixed as part of the reproducibility contract: m variates
    for xi, then one for the common factor U.  p-values that would round to
    exactly 0 or 1 are clamped to the nearest interior float so downstream
    quantile transforms stay defined.
    """
    rng = stream.generator()
    m, rho = params.m, params.rho
    xi = rng.standard_normal(m)
    u = rng.standard_normal()

    tau = np.zeros(m, dtype=bool)
    tau[params.m0 :] = True

    # inner term of the common-factor coefficient can round slightly negative
    # at the boundary rho = -1/(m-1)
    common_var = max(0.0, (1.0 + (m - 1) * rho) / m)
    x = np.sqrt(1.0 - rho) * (xi - xi.mean()) + np.sqrt(common_var) * u
    x[tau] += params.mu

    p = phi_upper(x)
    np.clip(p, _P_MIN, _P_MAX, out=p)
    return Sample(tau=tau, x=x, p=p)


# --- empirical c.d.f.'s -------------------------------------------------------


@dataclass(frozen=True)
class StepEcdf:
    """Right-continuous empirical c.d.f. t -> #{jumps <= t} / n.

    Stored as sorted jump locations; evaluation is O(log n) per point via
    binary search and accepts scalars or arrays.
    """

    jumps: np.ndarray

    @property
    def n(self) -> int:
        return self.jumps.size

    def count_at(self, t):
        """Integer jump count #{jumps <= t} (exact, no division)."""
        c = np.searchsorted(self.jumps, t, side="right")
        return int(c) if np.isscalar(t) else c

    def __call__(self, t):
        c = np.searchsorted(self.jumps, t, side="right")
        out = c / self.n
        return float(out) if np.isscalar(t) else out


def ecdf_triple(s: Sample) -> tuple[StepEcdf, StepEcdf, StepEcdf]:
    """Empirical c.d.f.'s of the null group, the alternative group, and the
    pooled p-values, in that order.

    The pooled curve is the exact mixture of the group curves with weights
    m0/m and (m - m0)/m: the jump counts add, so the identity holds at every
    t in exact integer arithmetic.
    """
    null_p = np.sort(s.p[~s.tau])
    alt_p = np.sort(s.p[s.tau])
    all_p = np.sort(s.p)
    return StepEcdf(null_p), StepEcdf(alt_p), StepEcdf(all_p)


def write_sample_csv(s: Sample, path) -> None:
    """Debug dump: one row per hypothesis with header ``index,tau,x,p``."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "tau", "x", "p"])
        for i in range(s.m):
            writer.writerow([i, int(s.tau[i]), repr(float(s.x[i])), repr(float(s.p[i]))])
