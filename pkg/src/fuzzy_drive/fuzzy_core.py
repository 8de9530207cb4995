"""Four-rule fuzzy PD controller.

Two independent evaluation paths are provided:

* the inference chain (membership -> rule firing -> centre-of-mass
  defuzzification), used as the reference oracle, and
* the piecewise closed form, which classifies the scaled input pair into one
  of 20 input-combination regions and evaluates one of nine formulas.

Both paths operate on *scaled* inputs ``e* = Ge * error`` and
``r* = Gr * rate``.  The output height of the singleton output sets equals the
universe limit ``L``.

Scalar functions take and return plain floats.  The ``*_array`` variants are
vectorised over numpy arrays for grid sweeps; they share no code with each
other so the oracle stays independent of the fast path.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "DegenerateInferenceError",
    "FuzzyPdConfig",
    "ScaledInputs",
    "MembershipVector",
    "RuleStrengths",
    "RegionGroup",
    "Region",
    "membership_vector",
    "rule_strengths",
    "centroid_defuzz",
    "classify_region",
    "closed_form",
    "oracle_output",
    "fuzzy_pd",
    "closed_form_array",
    "oracle_output_array",
    "classify_group_array",
]


class DegenerateInferenceError(ArithmeticError):
    """Raised when no rule fires, leaving the centroid undefined."""


@dataclass(frozen=True)
class FuzzyPdConfig:
    """Gains and universe limit of the fuzzy PD controller.

    The output height is not stored; it always equals ``L``.
    """

    Ge: float
    Gr: float
    Gu: float
    L: float = 360.0

    def __post_init__(self):
        for name in ("Ge", "Gr", "Gu", "L"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)!r}")
        if self.L <= 0:
            raise ValueError(f"L must be positive, got {self.L!r}")

    @property
    def H(self) -> float:
        return self.L

    def scale(self, error: float, rate: float) -> ScaledInputs:
        return ScaledInputs(self.Ge * error, self.Gr * rate)


class ScaledInputs(NamedTuple):
    e_star: float
    r_star: float


class MembershipVector(NamedTuple):
    mu_ep: float
    mu_en: float
    mu_rp: float
    mu_rn: float


class RuleStrengths(NamedTuple):
    r1: float
    r2: float
    r3: float
    r4: float


class RegionGroup(enum.Enum):
    """Groups of input-combination regions that share one output formula."""

    SQUARE_E_DOM = "SQUARE_E_DOM"
    SQUARE_R_DOM = "SQUARE_R_DOM"
    STRIP_E_POS = "STRIP_E_POS"
    STRIP_R_POS = "STRIP_R_POS"
    STRIP_E_NEG = "STRIP_E_NEG"
    STRIP_R_NEG = "STRIP_R_NEG"
    CORNER_PP = "CORNER_PP"
    CORNER_NP = "CORNER_NP"
    CORNER_NN = "CORNER_NN"
    CORNER_PN = "CORNER_PN"


# Integer codes used by the vectorised classifier, in enum declaration order.
GROUP_CODES = {group: code for code, group in enumerate(RegionGroup)}
GROUPS_BY_CODE = tuple(RegionGroup)


@dataclass(frozen=True)
class Region:
    label: str
    group: RegionGroup


def _check_limit(L: float) -> None:
    if not (math.isfinite(L) and L > 0):
        raise ValueError(f"universe limit L must be positive and finite, got {L!r}")


def _check_inputs(inputs: ScaledInputs) -> None:
    if not (math.isfinite(inputs.e_star) and math.isfinite(inputs.r_star)):
        raise ValueError(f"scaled inputs must be finite, got {tuple(inputs)!r}")


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def membership_vector(inputs: ScaledInputs, L: float) -> MembershipVector:
    """Degrees of membership of the scaled error and rate.

    Each set is a linear ramp over ``[-L, L]`` saturated to ``[0, 1]``
    outside it.

    Raises:
        ValueError: if ``L <= 0`` or an input is not finite.
    """
    _check_limit(L)
    _check_inputs(inputs)
    e, r = inputs
    two_l = 2.0 * L
    return MembershipVector(
        _clamp01((L + e) / two_l),
        _clamp01((L - e) / two_l),
        _clamp01((L + r) / two_l),
        _clamp01((L - r) / two_l),
    )


def rule_strengths(mu: MembershipVector) -> RuleStrengths:
    """Fire the four rules with the min t-norm.

    R1 (ep, rp) -> positive, R2 (ep, rn) -> zero, R3 (en, rp) -> zero,
    R4 (en, rn) -> negative.
    """
    for value in mu:
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"membership degrees must lie in [0, 1], got {tuple(mu)!r}")
    return RuleStrengths(
        min(mu.mu_ep, mu.mu_rp),
        min(mu.mu_ep, mu.mu_rn),
        min(mu.mu_en, mu.mu_rp),
        min(mu.mu_en, mu.mu_rn),
    )


def centroid_defuzz(strengths: RuleStrengths, H: float) -> float:
    """Centre of mass over output singletons at ``-H``, ``0`` and ``+H``."""
    total = strengths.r1 + strengths.r2 + strengths.r3 + strengths.r4
    if not total > 0.0:
        raise DegenerateInferenceError(f"rule strengths sum to {total!r}; centroid undefined")
    return H * (strengths.r1 - strengths.r4) / total


def oracle_output(inputs: ScaledInputs, L: float) -> float:
    """Crisp output by full inference; reference for :func:`closed_form`."""
    return centroid_defuzz(rule_strengths(membership_vector(inputs, L)), L)


def _group(e: float, r: float, L: float) -> RegionGroup:
    # Precedence: corners, then strips, then the square. Points exactly on
    # |x| = L belong to the square; |e| = |r| inside it goes to SQUARE_E_DOM.
    e_out, r_out = abs(e) > L, abs(r) > L
    if e_out and r_out:
        if e > 0:
            return RegionGroup.CORNER_PP if r > 0 else RegionGroup.CORNER_PN
        return RegionGroup.CORNER_NP if r > 0 else RegionGroup.CORNER_NN
    if e_out:
        return RegionGroup.STRIP_E_POS if e > 0 else RegionGroup.STRIP_E_NEG
    if r_out:
        return RegionGroup.STRIP_R_POS if r > 0 else RegionGroup.STRIP_R_NEG
    if abs(e) >= abs(r):
        return RegionGroup.SQUARE_E_DOM
    return RegionGroup.SQUARE_R_DOM


def _label(group: RegionGroup, e: float, r: float) -> str:
    # Within a group, labels run counterclockwise from the positive error axis.
    if group is RegionGroup.SQUARE_E_DOM:
        # wedges around the error axis: right-upper, left-upper, left-lower, right-lower
        if e >= 0:
            return "IC1" if r >= 0 else "IC6"
        return "IC2" if r >= 0 else "IC5"
    if group is RegionGroup.SQUARE_R_DOM:
        # wedges around the rate axis: upper-right, upper-left, lower-left, lower-right
        if r > 0:
            return "IC3" if e >= 0 else "IC4"
        return "IC7" if e < 0 else "IC8"
    if group is RegionGroup.STRIP_E_POS:
        return "IC9" if r >= 0 else "IC10"
    if group is RegionGroup.STRIP_R_POS:
        return "IC11" if e >= 0 else "IC12"
    if group is RegionGroup.STRIP_E_NEG:
        return "IC13" if r >= 0 else "IC14"
    if group is RegionGroup.STRIP_R_NEG:
        return "IC15" if e < 0 else "IC16"
    return {
        RegionGroup.CORNER_PP: "IC17",
        RegionGroup.CORNER_NP: "IC18",
        RegionGroup.CORNER_NN: "IC19",
        RegionGroup.CORNER_PN: "IC20",
    }[group]


def classify_region(inputs: ScaledInputs, L: float) -> Region:
    """Locate a scaled input pair among the 20 input-combination regions."""
    _check_limit(L)
    _check_inputs(inputs)
    e, r = inputs
    group = _group(e, r, L)
    return Region(_label(group, e, r), group)


def _formula(group: RegionGroup, e: float, r: float, L: float) -> float:
    if group is RegionGroup.SQUARE_E_DOM:
        return L * (e + r) / (2.0 * (2.0 * L - abs(e)))
    if group is RegionGroup.SQUARE_R_DOM:
        return L * (e + r) / (2.0 * (2.0 * L - abs(r)))
    if group is RegionGroup.STRIP_E_POS:
        return (L + r) / 2.0
    if group is RegionGroup.STRIP_R_POS:
        return (L + e) / 2.0
    if group is RegionGroup.STRIP_E_NEG:
        return (-L + r) / 2.0
    if group is RegionGroup.STRIP_R_NEG:
        return (-L + e) / 2.0
    if group is RegionGroup.CORNER_PP:
        return L
    if group is RegionGroup.CORNER_NN:
        return -L
    return 0.0


def group_formula(group: RegionGroup, inputs: ScaledInputs, L: float) -> float:
    """Evaluate one group's output formula regardless of where the point lies.

    Used to check that neighbouring formulas agree along shared boundaries.
    """
    return _formula(group, inputs.e_star, inputs.r_star, L)


def closed_form(inputs: ScaledInputs, L: float) -> float:
    """Crisp output from the region formulas.  Always ``|u| <= L``."""
    _check_limit(L)
    _check_inputs(inputs)
    e, r = inputs
    return _formula(_group(e, r, L), e, r, L)


def fuzzy_pd(error: float, rate: float, cfg: FuzzyPdConfig, method: str = "closed_form") -> float:
    """Scaled controller output ``Gu * FUZZY(Ge*error, Gr*rate)``.

    Args:
        error: Raw error.
        rate: Raw error rate (difference per control step).
        cfg: Controller gains and universe limit.
        method: ``"closed_form"`` (fast path) or ``"oracle"`` (full inference).
    """
    inputs = cfg.scale(error, rate)
    if method == "closed_form":
        u = closed_form(inputs, cfg.L)
    elif method == "oracle":
        u = oracle_output(inputs, cfg.L)
    else:
        raise ValueError(f"unknown method {method!r}; expected 'closed_form' or 'oracle'")
    return cfg.Gu * u


# -- vectorised paths -------------------------------------------------------


def classify_group_array(e: np.ndarray, r: np.ndarray, L: float) -> np.ndarray:
    """Integer group codes (see ``GROUPS_BY_CODE``) for arrays of scaled inputs."""
    _check_limit(L)
    e = np.asarray(e, dtype=float)
    r = np.asarray(r, dtype=float)
    e_out, r_out = np.abs(e) > L, np.abs(r) > L
    e_pos, r_pos = e > 0, r > 0
    G = GROUP_CODES
    conditions = [
        e_out & r_out & e_pos & r_pos,
        e_out & r_out & e_pos,
        e_out & r_out & r_pos,
        e_out & r_out,
        e_out & e_pos,
        e_out,
        r_out & r_pos,
        r_out,
        np.abs(e) >= np.abs(r),
    ]
    choices = [
        G[RegionGroup.CORNER_PP],
        G[RegionGroup.CORNER_PN],
        G[RegionGroup.CORNER_NP],
        G[RegionGroup.CORNER_NN],
        G[RegionGroup.STRIP_E_POS],
        G[RegionGroup.STRIP_E_NEG],
        G[RegionGroup.STRIP_R_POS],
        G[RegionGroup.STRIP_R_NEG],
        G[RegionGroup.SQUARE_E_DOM],
    ]
    return np.select(conditions, choices, default=G[RegionGroup.SQUARE_R_DOM])


def closed_form_array(e: np.ndarray, r: np.ndarray, L: float) -> np.ndarray:
    """Vectorised :func:`closed_form`."""
    e = np.asarray(e, dtype=float)
    r = np.asarray(r, dtype=float)
    codes = classify_group_array(e, r, L)
    G = GROUP_CODES
    u = np.zeros(np.broadcast(e, r).shape)
    e, r = np.broadcast_arrays(e, r)

    def fill(group, values):
        mask = codes == G[group]
        u[mask] = values(e[mask], r[mask])

    fill(RegionGroup.SQUARE_E_DOM, lambda e, r: L * (e + r) / (2.0 * (2.0 * L - np.abs(e))))
    fill(RegionGroup.SQUARE_R_DOM, lambda e, r: L * (e + r) / (2.0 * (2.0 * L - np.abs(r))))
    fill(RegionGroup.STRIP_E_POS, lambda e, r: (L + r) / 2.0)
    fill(RegionGroup.STRIP_R_POS, lambda e, r: (L + e) / 2.0)
    fill(RegionGroup.STRIP_E_NEG, lambda e, r: (-L + r) / 2.0)
    fill(RegionGroup.STRIP_R_NEG, lambda e, r: (-L + e) / 2.0)
    fill(RegionGroup.CORNER_PP, lambda e, r: np.full(e.shape, L))
    fill(RegionGroup.CORNER_NN, lambda e, r: np.full(e.shape, -L))
    return u


def oracle_output_array(e: np.ndarray, r: np.ndarray, L: float) -> np.ndarray:
    """Vectorised :func:`oracle_output` (clamped ramps, min, centre of mass)."""
    _check_limit(L)
    e = np.asarray(e, dtype=float)
    r = np.asarray(r, dtype=float)
    two_l = 2.0 * L
    mu_ep = np.clip((L + e) / two_l, 0.0, 1.0)
    mu_en = np.clip((L - e) / two_l, 0.0, 1.0)
    mu_rp = np.clip((L + r) / two_l, 0.0, 1.0)
    mu_rn = np.clip((L - r) / two_l, 0.0, 1.0)
    r1 = np.minimum(mu_ep, mu_rp)
    r2 = np.minimum(mu_ep, mu_rn)
    r3 = np.minimum(mu_en, mu_rp)
    r4 = np.minimum(mu_en, mu_rn)
    total = r1 + r2 + r3 + r4
    if np.any(total <= 0.0):
        raise DegenerateInferenceError("rule strengths sum to zero somewhere on the grid")
    return L * (r1 - r4) / total
