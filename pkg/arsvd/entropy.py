"""Spectral entropy and entropy-threshold rank selection."""

from __future__ import annotations

import logging
import math
import numbers
from dataclasses import dataclass

import numpy as np
from scipy.special import entr

from .const import RANK_ROUNDOFF_FACTOR, SPECTRUM_SUM_TOL
from .exceptions import ContractViolationError
from .linalg import Vector, as_vector

_LOGGER = logging.getLogger(__name__)

_EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class NormalizedSpectrum:
    """Singular values scaled to a probability vector."""

    p: Vector
    source_sum: float

    @property
    def degenerate(self) -> bool:
        """Return True for the all-zero spectrum, represented as a point mass."""
        return self.source_sum == 0.0

    @property
    def length(self) -> int:
        """Return r."""
        return int(self.p.shape[0])


@dataclass(frozen=True)
class EntropyProfile:
    """Prefix entropies H(1..r); ``partial[k - 1]`` is H(k)."""

    partial: Vector
    log_base: float | None = None

    @property
    def total(self) -> float:
        """Return H_total, the last prefix entropy."""
        return float(self.partial[-1])

    @property
    def length(self) -> int:
        """Return r."""
        return int(self.partial.shape[0])

    def fractions(self) -> Vector:
        """Return H(k) / H_total for every k (ones when H_total is zero)."""
        if self.total <= 0.0:
            return np.ones_like(self.partial)
        return self.partial / self.total


@dataclass(frozen=True)
class RankSelection:
    """Outcome of the entropy-threshold rule."""

    k: int
    tau: float
    achieved_fraction: float
    total_entropy: float

    @property
    def degenerate(self) -> bool:
        """Return True when H_total is zero and k = 1 was chosen by convention."""
        return self.total_entropy <= 0.0


def _check_tau(tau: float) -> float:
    valid = isinstance(tau, numbers.Real) and math.isfinite(tau)
    if not (valid and 0.0 < tau <= 1.0):
        raise ContractViolationError(f"tau must lie in (0, 1], got {tau!r}")
    return float(tau)


def normalize_spectrum(s: Vector) -> NormalizedSpectrum:
    """Return p_i = s_i / sum(s).

    The all-zero spectrum maps to the point mass (1, 0, ..., 0) so that every
    downstream quantity stays defined; ``source_sum`` records the zero.
    """
    values = as_vector(s)
    if (values < 0.0).any():
        raise ContractViolationError("Singular values must be nonnegative")
    if (np.diff(values) > 0.0).any():
        raise ContractViolationError("Singular values must be non-increasing")

    total = float(np.cumsum(values)[-1])
    if total == 0.0:
        p = np.zeros_like(values)
        p[0] = 1.0
        _LOGGER.debug("All-zero spectrum of length %d, using point mass", values.size)
    else:
        p = values / total
    spectrum = NormalizedSpectrum(p=p, source_sum=total)
    if abs(float(p.sum()) - 1.0) > SPECTRUM_SUM_TOL:
        raise ContractViolationError("Normalized spectrum does not sum to one")
    return spectrum


def entropy_profile(
    spectrum: NormalizedSpectrum, log_base: float | None = None
) -> EntropyProfile:
    """Return prefix entropies -sum_{i<=k} p_i log p_i with 0 log 0 = 0.

    Prefix sums accumulate left to right so ``partial[-1]`` is H_total exactly.
    """
    terms = entr(np.asarray(spectrum.p, dtype=np.float64))
    if log_base is not None:
        if not (log_base > 0.0 and log_base != 1.0):
            raise ContractViolationError(f"Invalid logarithm base {log_base!r}")
        terms = terms / math.log(log_base)
    partial = np.cumsum(terms)
    partial.flags.writeable = False
    return EntropyProfile(partial=partial, log_base=log_base)


def select_rank(profile: EntropyProfile, tau: float) -> RankSelection:
    """Return the smallest k with H(k) >= tau * H_total.

    The comparison allows only the round-off of the prefix sums,
    RANK_ROUNDOFF_FACTOR * r * eps * H_total, so exact ties such as uniform
    spectra at tau = k / r select k. H_total = 0 selects k = 1 with an achieved
    fraction of one.
    """
    tau = _check_tau(tau)
    total = profile.total
    if total <= 0.0:
        return RankSelection(k=1, tau=tau, achieved_fraction=1.0, total_entropy=0.0)

    roundoff = RANK_ROUNDOFF_FACTOR * profile.length * _EPS * total
    threshold = tau * total - roundoff
    k = int(np.argmax(profile.partial >= threshold)) + 1
    return RankSelection(
        k=k,
        tau=tau,
        achieved_fraction=float(profile.partial[k - 1]) / total,
        total_entropy=total,
    )


def effective_rank(profile: EntropyProfile) -> float:
    """Return exp(H_total) in natural-log units."""
    total = profile.total
    if profile.log_base is not None:
        total *= math.log(profile.log_base)
    return math.exp(total)


def rank_for_spectrum(
    s: Vector, tau: float, log_base: float | None = None
) -> RankSelection:
    """Normalize, profile and select in one call."""
    return select_rank(entropy_profile(normalize_spectrum(s), log_base), tau)
