"""Critical-curve algebra and lifespan-case prediction for coupled wave systems.

Three weakly coupled semilinear wave systems are covered, named by the type of
nonlinearity on each side:

* ``SS``  sources ``|v|^p`` and ``|u|^q``          (Strauss-Strauss coupling),
* ``GG``  sources ``|v_t|^p`` and ``|u_t|^q``      (Glassey-Glassey coupling),
* ``SG``  sources ``|v|^q`` and ``|u_t|^p``        (mixed coupling).

For each coupling there is a scalar "critical gap" in the (p, q) plane whose
sign separates the proved blow-up region (gap >= 0) from the conjectured
global-existence region (gap < 0):

* SS:  max{(p + 2 + 1/q), (q + 2 + 1/p)} / (pq - 1) - (n - 1)/2
* GG:  max{(p + 1), (q + 1)} / (pq - 1) - (n - 1)/2
* SG:  max{F1, F2} with
       F1 = (1/p + 1 + q) / (pq - 1) - (n - 1)/2,
       F2 = (1/q + 2) / (pq - 1) - (n - 1)/2.

A positive gap predicts a power-law lifespan T ~ eps^(-1/gap); a vanishing gap
predicts exponential lifespans exp(eps^(-rate)) with a rate that depends on
which sub-case applies.  All functions here are pure and reentrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

from .errors import InvalidDimensionError, InvalidExponentError, InvalidParameterError

COUPLINGS = ("SS", "GG", "SG")

#: Regime names used by LifespanPrediction.
POWER_LAW = "power_law"
EXPONENTIAL = "exponential"
OUTSIDE = "outside_blowup_region"

#: |p - q| below this counts as a symmetric pair when selecting critical cases.
PAIR_EQ_TOL = 1e-12

#: Default half-width of the band around gap = 0 classified as critical.
DEFAULT_TIE_TOL = 1e-9


def _check_kind(kind: str) -> str:
    if kind not in COUPLINGS:
        raise InvalidParameterError(f"unknown coupling kind {kind!r}, expected one of {COUPLINGS}")
    return kind


def _check_dimension(n: int, minimum: int = 2) -> int:
    if not isinstance(n, int) or isinstance(n, bool):
        raise InvalidDimensionError(f"dimension must be an integer, got {n!r}")
    if n < minimum:
        raise InvalidDimensionError(f"dimension must be >= {minimum}, got {n}")
    return n


@dataclass(frozen=True)
class ExponentPair:
    """A pair of nonlinearity powers with p > 1 and q > 1."""

    p: float
    q: float

    def __post_init__(self):
        for name, value in (("p", self.p), ("q", self.q)):
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise InvalidExponentError(f"{name} must be a finite number, got {value!r}")
            if value <= 1.0:
                raise InvalidExponentError(f"{name} must exceed 1 (got {value}); pq - 1 must stay positive")

    @property
    def symmetric(self) -> bool:
        return abs(self.p - self.q) <= PAIR_EQ_TOL

    def swapped(self) -> "ExponentPair":
        return ExponentPair(self.q, self.p)


PairLike = Union[ExponentPair, Tuple[float, float]]


def as_pair(pq: PairLike) -> ExponentPair:
    """Coerce a tuple or ExponentPair into a validated ExponentPair."""
    if isinstance(pq, ExponentPair):
        return pq
    p, q = pq
    return ExponentPair(float(p), float(q))


def strauss_exponent(n: int) -> float:
    """Positive root of the quadratic 2 + (n+1) p - (n-1) p^2 = 0.

    This is the critical power for a single wave equation with source |u|^p.
    The returned root satisfies the quadratic to better than 1e-12.
    """
    _check_dimension(n)
    return ((n + 1) + math.sqrt((n + 1) ** 2 + 8 * (n - 1))) / (2 * (n - 1))


def glassey_exponent(n: int) -> float:
    """Critical power 1 + 2/(n-1) for a single wave equation with source |u_t|^p."""
    _check_dimension(n)
    return 1.0 + 2.0 / (n - 1)


@dataclass(frozen=True)
class CriticalGap:
    """Signed distance to the critical curve, with the attained branch.

    ``value`` is ``max(f1, f2)``.  For SS and GG the branches are the two
    symmetric max arguments ("first" carries p + .../(pq-1), "second" carries
    q + .../(pq-1)).  For SG the branches are the two asymmetric exponents
    F1 and F2 described in the module docstring.
    """

    kind: str
    value: float
    branch: str
    f1: float
    f2: float


_BRANCH_TOL = 1e-12


def critical_gap(kind: str, n: int, pq: PairLike) -> CriticalGap:
    """Evaluate the critical gap for one coupling at dimension n and pair (p, q)."""
    _check_kind(kind)
    _check_dimension(n)
    pair = as_pair(pq)
    p, q = pair.p, pair.q
    denom = p * q - 1.0
    shift = 0.5 * (n - 1)

    if kind == "SS":
        f1 = (p + 2.0 + 1.0 / q) / denom - shift
        f2 = (q + 2.0 + 1.0 / p) / denom - shift
        names = ("first", "second")
    elif kind == "GG":
        f1 = (p + 1.0) / denom - shift
        f2 = (q + 1.0) / denom - shift
        names = ("first", "second")
    else:  # SG
        f1 = (1.0 / p + 1.0 + q) / denom - shift
        f2 = (1.0 / q + 2.0) / denom - shift
        names = ("F_SG,1", "F_SG,2")

    if abs(f1 - f2) <= _BRANCH_TOL:
        branch = "tie"
    elif f1 > f2:
        branch = names[0]
    else:
        branch = names[1]
    return CriticalGap(kind=kind, value=max(f1, f2), branch=branch, f1=f1, f2=f2)


@dataclass(frozen=True)
class LifespanPrediction:
    """Predicted lifespan scaling for small data of size eps.

    ``regime`` is one of ``power_law`` (T ~ eps^(-power_exponent)),
    ``exponential`` (T ~ exp(eps^(-exp_rate))) or ``outside_blowup_region``
    (nothing is proved there; no blow-up prediction is made).  The fields
    ``power_exponent`` and ``exp_rate`` are populated only in their regime.
    ``case_label`` names the sub-case that fired, exactly as asserted by the
    test suite.
    """

    regime: str
    power_exponent: Optional[float]
    exp_rate: Optional[float]
    case_label: str
    gap: CriticalGap

    def power_law_lifespan(self, eps: float) -> float:
        """Unscaled power-law lifespan eps^(-power_exponent).

        Only meaningful in the power_law regime; used by sweep planning to
        size per-epsilon time caps.  The multiplicative constant is not
        predicted by the theory and must be calibrated empirically.
        """
        if self.regime != POWER_LAW:
            raise InvalidParameterError("power_law_lifespan is defined only in the power_law regime")
        return float(eps) ** (-self.power_exponent)


def lifespan_prediction(
    kind: str,
    n: int,
    pq: PairLike,
    tie_tolerance: float = DEFAULT_TIE_TOL,
) -> LifespanPrediction:
    """Classify (kind, n, p, q) into its lifespan case.

    The full case table:

    * gap > tie_tolerance: power law with exponent 1/gap.
    * |gap| <= tie_tolerance (critical):
        - SS, p != q: rate min{p, q} (pq - 1).  The min follows the published
          display; the sub-case derivations give the q-rate for p < q, and
          the discrepancy is deliberately resolved in favour of the display.
        - SS, p = q:  rate p (p - 1)  (the pair then sits at the Strauss
          exponent automatically).
        - GG, p != q: rate pq - 1.
        - GG, p = q:  rate p - 1     (the pair sits at the Glassey exponent).
        - SG, F1 = 0 > F2: rate p (pq - 1).  The case derivation gives this
          rate; an alternative tabulation lists q (pq - 1) for the same case,
          and the choice is surfaced in the case label.
        - SG, F2 = 0 > F1: rate q (pq - 1).
        - SG, F1 = F2 = 0: rate pq - 1.
    * gap < -tie_tolerance: outside the proved blow-up region (never an error,
      so region maps can be scanned).
    """
    if not (isinstance(tie_tolerance, (int, float)) and tie_tolerance >= 0.0):
        raise InvalidParameterError(f"tie_tolerance must be >= 0, got {tie_tolerance!r}")
    gap = critical_gap(kind, n, pq)
    pair = as_pair(pq)
    p, q = pair.p, pair.q

    if gap.value > tie_tolerance:
        return LifespanPrediction(
            regime=POWER_LAW,
            power_exponent=1.0 / gap.value,
            exp_rate=None,
            case_label=f"{kind}:power-law",
            gap=gap,
        )

    if gap.value < -tie_tolerance:
        return LifespanPrediction(
            regime=OUTSIDE,
            power_exponent=None,
            exp_rate=None,
            case_label=f"{kind}:outside-blowup-region",
            gap=gap,
        )

    # Critical band.
    if kind == "SS":
        if pair.symmetric:
            rate = p * (p - 1.0)
            label = "SS:critical-pair-symmetric"
        else:
            rate = min(p, q) * (p * q - 1.0)
            label = "SS:critical-pair-asymmetric:min-rate"
    elif kind == "GG":
        if pair.symmetric:
            rate = p - 1.0
            label = "GG:critical-pair-symmetric"
        else:
            rate = p * q - 1.0
            label = "GG:critical-pair-asymmetric"
    else:  # SG
        f1_zero = abs(gap.f1) <= tie_tolerance
        f2_zero = abs(gap.f2) <= tie_tolerance
        if f1_zero and f2_zero:
            rate = p * q - 1.0
            label = "SG:critical-both-branches"
        elif f1_zero:
            rate = p * (p * q - 1.0)
            label = "SG:critical-first-branch:derived-rate"
        else:
            rate = q * (p * q - 1.0)
            label = "SG:critical-second-branch"

    return LifespanPrediction(
        regime=EXPONENTIAL,
        power_exponent=None,
        exp_rate=rate,
        case_label=label,
        gap=gap,
    )
