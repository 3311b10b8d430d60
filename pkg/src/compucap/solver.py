"""Capacity of a bound instruction set.

An instruction set whose instructions x take positive times tau(x) has a
characteristic equation

    sum over instructions x of  X ** -tau(x)  =  1,

whose largest real root X0 determines the capacity log2(X0), in bits per
time unit: the exponential growth rate of the number of distinct
instruction sequences executable per unit of time.

Substituting X = 2**y turns the left side into

    g(y) = sum_x 2 ** (-tau(x) * y),

which is strictly decreasing for y >= 0 with g(0) equal to the total
instruction count and g(y) -> 0, so the root y* = log2(X0) is unique.
All evaluation happens in the log2 domain with a max-shifted exponent sum:
member counts like 2**28 and roots near 2**31 would otherwise push direct
powers of X out of float range.  Arithmetic-progression families use the
closed geometric form, never a term-by-term sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import BoundClass, BoundInstructionSet, BoundMember, total_count

_LN2 = math.log(2.0)
_MAX_ITERATIONS = 10_000
_RESIDUAL_LIMIT = 1e-10


@dataclass(frozen=True)
class CapacityResult:
    """Solved root y* = log2(X0) plus solver diagnostics.

    capacity_bits is in bits per time unit; residual is |g(y*) - 1|;
    bracket_width is the final enclosing-interval width.
    """

    capacity_bits: float
    residual: float
    bracket_width: float
    iterations: int


def _phi(v: float) -> float:
    """v / (e**v - 1) for v >= 0, continuous at 0, monotone decreasing."""
    if v == 0.0:
        return 1.0
    if v > 690.0:
        # e**v - 1 overflows; the quotient itself decays like v * e**-v.
        return v * math.exp(-v)
    return v / math.expm1(v)


def _log2_geom(u: float, terms: int) -> float:
    """log2 of the geometric sum 1 + e**-u + ... + e**-(terms-1)u, u >= 0.

    Computed as log((1 - e**-Mu) / (1 - e**-u)) via expm1, which stays
    accurate as u -> 0 where the naive ratio cancels catastrophically.
    """
    if terms == 1 or u == 0.0:
        return math.log2(terms)
    b = u * terms
    return (math.log(-math.expm1(-b)) - math.log(-math.expm1(-u))) / _LN2


def _mean_term_index(u: float, terms: int) -> float:
    """Expected progression index F under weights e**-uF, F = 0..terms-1.

    Equals -d/du of log(geometric sum); written as a difference of phi
    values, with a series fallback where that difference cancels.
    """
    if terms == 1:
        return 0.0
    b = u * terms
    if b < 1e-3:
        return (terms - 1) / 2.0 - (float(terms) * terms - 1.0) * u / 12.0
    return (_phi(u) - _phi(b)) / u


def member_log2_weight(member: BoundMember, y: float) -> float:
    """log2 of the member's aggregate weight sum(count * 2**(-tau * y))."""
    if isinstance(member, BoundClass):
        return math.log2(member.count) - float(member.time) * y
    u = _LN2 * float(member.step) * y
    return (
        math.log2(member.count_per_term)
        - float(member.time_base) * y
        + _log2_geom(u, member.num_terms)
    )


def member_mean_time(member: BoundMember, y: float) -> float:
    """Mean execution time within the member under 2**(-tau*y) weighting."""
    if isinstance(member, BoundClass):
        return float(member.time)
    step = float(member.step)
    u = _LN2 * step * y
    return float(member.time_base) + step * _mean_term_index(u, member.num_terms)


def characteristic_terms(iset: BoundInstructionSet, y: float) -> list[tuple[str, float]]:
    """Per-member contribution to g(y), in declaration order."""
    out = []
    for m in iset.members:
        log2w = member_log2_weight(m, y)
        out.append((m.name, 2.0 ** log2w if log2w < 1020.0 else math.inf))
    return out


def eval_characteristic(iset: BoundInstructionSet, y: float) -> float:
    """Evaluate g(y) = sum over instructions of 2**(-tau * y), y >= 0."""
    if y < 0:
        raise ValueError(f"y must be >= 0, got {y}")
    if y == 0.0:
        n = total_count(iset)
        return float(n) if n.bit_length() <= 1023 else math.inf
    logs = [member_log2_weight(m, y) for m in iset.members]
    hi = max(logs)
    acc = sum(2.0 ** (t - hi) for t in logs)
    if hi > 1020.0:
        return math.inf
    return (2.0 ** hi) * acc


def _log2_char_and_slope(iset: BoundInstructionSet, y: float) -> tuple[float, float]:
    """Return (log2 g(y), d/dy log2 g(y)).

    The slope is the weight-averaged per-member slope; for each member the
    slope of its log2 weight is minus its mean time, so the total is
    -E[tau] under the 2**(-tau*y) weighting.
    """
    logs = []
    slopes = []
    for m in iset.members:
        logs.append(member_log2_weight(m, y))
        slopes.append(-member_mean_time(m, y))
    hi = max(logs)
    weights = [2.0 ** (t - hi) for t in logs]
    wsum = sum(weights)
    value = hi + math.log2(wsum)
    slope = sum(w * s for w, s in zip(weights, slopes)) / wsum
    return value, slope


def solve_capacity(iset: BoundInstructionSet, tolerance: float = 1e-12) -> CapacityResult:
    """Find y* with g(y*) = 1; capacity_bits = y* = log2(X0).

    tolerance bounds the final bracket width around the root and must lie
    in [1e-13, 1e-6].  Brackets by doubling from y = 0, then alternates
    bisection (guaranteed shrink) with Newton steps (fast local accuracy),
    rejecting Newton candidates that leave the bracket.  Raises
    RuntimeError if the iteration cap is hit, which indicates a defect
    here rather than bad input.
    """
    if not 1e-13 <= tolerance <= 1e-6:
        raise ValueError(f"tolerance must be in [1e-13, 1e-6], got {tolerance}")
    total = total_count(iset)
    if total < 1:
        raise ValueError("instruction set has no instructions")
    if total == 1:
        # g(0) = 1 already: a single instruction carries no choice.
        return CapacityResult(0.0, 0.0, 0.0, 0)

    iterations = 0
    lo = 0.0  # g(0) = total >= 2, so log2 g(0) > 0
    hi = 1.0
    f_hi, slope = _log2_char_and_slope(iset, hi)
    iterations += 1
    while f_hi > 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > 2.0 ** 60:
            raise RuntimeError("internal error: bracketing failed to terminate")
        f_hi, slope = _log2_char_and_slope(iset, hi)
        iterations += 1

    y, f_y = hi, f_hi
    best_y, best_f = y, f_y
    while iterations < _MAX_ITERATIONS:
        width = hi - lo
        residual = abs(math.expm1(best_f * _LN2))  # |g - 1| recovered from log2 g
        if f_y == 0.0:
            return CapacityResult(y, 0.0, width, iterations)
        if width <= tolerance and residual <= _RESIDUAL_LIMIT:
            return CapacityResult(best_y, residual, width, iterations)

        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            # Bracket narrower than float resolution at this magnitude;
            # nothing between the endpoints remains to test.
            if residual > _RESIDUAL_LIMIT:
                raise RuntimeError("internal error: residual stuck above limit")
            return CapacityResult(best_y, residual, width, iterations)
        if iterations % 2 == 0 and slope < 0.0:
            cand = y - f_y / slope
            if not lo < cand < hi:
                cand = mid
        else:
            cand = mid

        y = cand
        f_y, slope = _log2_char_and_slope(iset, y)
        iterations += 1
        if f_y > 0.0:
            lo = y
        else:
            hi = y
        if abs(f_y) < abs(best_f):
            best_y, best_f = y, f_y
    raise RuntimeError("internal error: capacity solve did not converge")
