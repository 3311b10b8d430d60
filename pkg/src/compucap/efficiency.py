"""Instruction distributions, empirical entropy, and efficiency.

The capacity-achieving way to use an instruction set draws instructions
i.i.d. with probability 2**(-tau(x) * y*) each, where y* is the solved
capacity; under that distribution the entropy produced per unit of
execution time equals the capacity, and no other distribution does better.

Real workloads are measured instead: a trace of executed instruction
symbols yields plug-in entropy estimates of increasing order, and the
efficiency of the observed process is entropy per mean instruction time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from .model import _IDENT_RE, BoundClass, BoundInstructionSet
from .solver import CapacityResult, member_log2_weight, member_mean_time, solve_capacity

_MASS_SLACK = 1e-10


class DistributionError(ValueError):
    """A probability assignment is inconsistent with the instruction set."""


class TraceError(ValueError):
    """A trace is malformed or does not match the instruction set."""


@dataclass(frozen=True)
class InstructionDistribution:
    """Probability mass per member (families carry their aggregate mass).

    When log2_x0 is set, each individual instruction of time tau holds
    probability 2**(-tau * log2_x0); the member masses are the per-count
    (and, for families, per-term) totals of that rule.
    """

    masses: Mapping[str, float]
    log2_x0: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "masses", dict(self.masses))
        total = 0.0
        for name, mass in self.masses.items():
            if not mass >= 0.0:
                raise DistributionError(f"mass of {name!r} is negative: {mass}")
            total += mass
        if abs(total - 1.0) > _MASS_SLACK:
            raise DistributionError(f"masses sum to {total!r}, not 1")

    def mass(self, name: str) -> float:
        return self.masses.get(name, 0.0)

    def instruction_probability(self, time: Union[float, Fraction]) -> float:
        """Per-individual-instruction probability at the given time."""
        if self.log2_x0 is None:
            raise DistributionError("distribution carries no per-instruction rule")
        return 2.0 ** (-float(time) * self.log2_x0)


def optimal_distribution(
    iset: BoundInstructionSet, cap: CapacityResult
) -> InstructionDistribution:
    """The capacity-achieving distribution at the solved root.

    Class mass is count * 2**(-tau * y*); a family's mass is the closed
    geometric total over its terms.  The masses sum to 1 up to the solver
    residual, since their sum is exactly the characteristic value g(y*).
    """
    y = cap.capacity_bits
    masses = {m.name: 2.0 ** member_log2_weight(m, y) for m in iset.members}
    return InstructionDistribution(masses=masses, log2_x0=y)


# --- traces and empirical statistics ---


def _canonical_token(token: str) -> str:
    name, sep, anno = token.partition("@")
    if not _IDENT_RE.match(name):
        raise TraceError(f"invalid trace token {token!r}")
    if not sep:
        return name
    try:
        time = Fraction(anno)
    except (ValueError, ZeroDivisionError):
        raise TraceError(f"invalid time annotation in {token!r}") from None
    if time <= 0:
        raise TraceError(f"time annotation must be positive in {token!r}")
    return f"{name}@{time}"


def parse_trace(text: str) -> tuple[str, ...]:
    """Split a trace file into canonical symbol tokens.

    Tokens are whitespace-separated, each `name` or `name@time` with a
    positive rational time ("29", "1.5", and "3/2" all work).  Equal times
    written differently canonicalize to the same token.
    """
    return tuple(_canonical_token(t) for t in text.split())


def _token_time(iset: BoundInstructionSet, token: str) -> Fraction:
    """Execution time denoted by a canonical trace token."""
    name, sep, anno = token.partition("@")
    try:
        member = iset.member(name)
    except KeyError:
        raise TraceError(f"unknown instruction symbol {name!r}") from None
    if isinstance(member, BoundClass):
        if not sep:
            return member.time
        time = Fraction(anno)
        if time != member.time:
            raise TraceError(
                f"{token!r}: class {name!r} executes in time {member.time}, not {time}"
            )
        return time
    if not sep:
        raise TraceError(
            f"symbol {name!r} is a family; annotate its time as {name}@time"
        )
    time = Fraction(anno)
    index = (time - member.time_base) / member.step
    if index.denominator != 1 or not 0 <= index < member.num_terms:
        raise TraceError(f"{token!r}: time {time} is not one of the family's terms")
    return time


def _token_multiplicity(iset: BoundInstructionSet, token: str) -> int:
    """How many equally likely instructions the trace token stands for."""
    member = iset.member(token.partition("@")[0])
    if isinstance(member, BoundClass):
        return member.count
    return member.count_per_term


@dataclass(frozen=True)
class TraceStatistics:
    """Overlapping k-gram occurrence counts from an instruction stream.

    Windows wrap around the end of the trace, so every order has exactly
    `length` windows.  The wrap keeps the empirical gram distributions
    consistent under shifts (each (k+1)-gram count marginalizes exactly to
    the k-gram counts), which is what guarantees the order-n entropy
    estimates never increase with n.
    """

    alphabet: tuple[str, ...]
    length: int
    max_order: int
    kgram_counts: Mapping[int, Mapping[tuple[str, ...], int]]

    def __post_init__(self):
        for order in range(self.max_order + 1):
            counts = self.kgram_counts.get(order)
            if counts is None:
                raise TraceError(f"missing counts for order {order}")
            if sum(counts.values()) != self.length:
                raise TraceError(f"order-{order} counts do not cover the trace")

    @classmethod
    def from_symbols(cls, symbols: Sequence[str], max_order: int) -> "TraceStatistics":
        if max_order < 0:
            raise TraceError(f"order must be >= 0, got {max_order}")
        n = len(symbols)
        if n < max_order + 1:
            raise TraceError(
                f"trace of length {n} is too short for order {max_order}"
            )
        extended = list(symbols) + list(symbols[:max_order])
        kgram_counts: dict[int, dict[tuple[str, ...], int]] = {}
        for order in range(max_order + 1):
            counts: dict[tuple[str, ...], int] = {}
            for i in range(n):
                gram = tuple(extended[i : i + order + 1])
                counts[gram] = counts.get(gram, 0) + 1
            kgram_counts[order] = counts
        return cls(
            alphabet=tuple(sorted(set(symbols))),
            length=n,
            max_order=max_order,
            kgram_counts=kgram_counts,
        )

    def frequencies(self, order: int = 0) -> dict[tuple[str, ...], float]:
        return {g: c / self.length for g, c in self.kgram_counts[order].items()}


def entropy_order_n(stats: TraceStatistics, n: int) -> float:
    """Plug-in order-n entropy in bits per instruction.

    The empirical (n+1)-gram frequencies stand in for the true gram
    probabilities; unseen grams contribute nothing (0 * log 0 = 0).
    """
    if n < 0:
        raise TraceError(f"order must be >= 0, got {n}")
    if n > stats.max_order:
        raise TraceError(f"statistics were collected only up to order {stats.max_order}")
    if stats.length < n + 1:
        raise TraceError(f"trace of length {stats.length} is too short for order {n}")
    acc = 0.0
    for count in stats.kgram_counts[n].values():
        p = count / stats.length
        acc -= p * math.log2(p)
    return acc / (n + 1)


# --- efficiency ---


def efficiency(
    iset: BoundInstructionSet,
    dist: Union[InstructionDistribution, Mapping[str, float]],
    entropy_bits: float,
) -> float:
    """Entropy rate divided by mean instruction time, in bits per time unit.

    `dist` maps member names (or annotated `name@time` symbols) to
    probability mass; a family named without a time annotation needs the
    distribution's per-instruction rule to pin down its mean time.
    """
    if entropy_bits < 0:
        raise ValueError(f"entropy must be >= 0, got {entropy_bits}")
    if not isinstance(dist, InstructionDistribution):
        dist = InstructionDistribution(masses=dist)
    mean_time = 0.0
    for token, mass in dist.masses.items():
        if mass == 0.0:
            continue
        name, sep, _ = token.partition("@")
        try:
            member = iset.member(name)
        except KeyError:
            raise DistributionError(f"unknown member {name!r} in distribution") from None
        if sep or isinstance(member, BoundClass):
            time = float(_token_time(iset, token))
        elif dist.log2_x0 is not None:
            time = member_mean_time(member, dist.log2_x0)
        else:
            raise DistributionError(
                f"family {name!r} has no single time; annotate the symbol "
                f"as {name}@time or supply a per-instruction rule"
            )
        mean_time += mass * time
    if mean_time <= 0.0:
        raise DistributionError("distribution has zero mean time")
    return entropy_bits / mean_time


@dataclass(frozen=True)
class OrderEstimate:
    order: int
    entropy_bits: float
    efficiency_bits: float
    utilization: float


@dataclass(frozen=True)
class TraceEfficiencyReport:
    """Per-order entropy/efficiency estimates for one observed trace."""

    length: int
    mean_time: float
    capacity_bits: float
    orders: tuple[OrderEstimate, ...] = field(default_factory=tuple)


def efficiency_from_trace(
    iset: BoundInstructionSet,
    symbols: Sequence[str],
    max_order: int = 1,
    tolerance: float = 1e-12,
    capacity: Optional[CapacityResult] = None,
) -> TraceEfficiencyReport:
    """Estimate entropy, efficiency, and utilization at orders 0..max_order.

    Mean instruction time always comes from the order-0 symbol
    frequencies; utilization is efficiency over the set's solved capacity.
    A trace symbol names a member, not an individual instruction, so each
    occurrence also carries the choice among the member's `count` equally
    likely instructions; that adds frequency-weighted log2(count) bits to
    the entropy estimate at every order.  Raises TraceError for an empty
    trace, an unknown or unannotated symbol, or a trace shorter than
    max_order + 1.
    """
    symbols = [_canonical_token(s) for s in symbols]
    if not symbols:
        raise TraceError("trace is empty")
    stats = TraceStatistics.from_symbols(symbols, max_order)
    times = {token: float(_token_time(iset, token)) for token in stats.alphabet}
    freq0 = stats.frequencies(0)
    mean_time = sum(freq * times[gram[0]] for gram, freq in freq0.items())
    within_member = sum(
        freq * math.log2(_token_multiplicity(iset, gram[0]))
        for gram, freq in freq0.items()
    )
    if capacity is None:
        capacity = solve_capacity(iset, tolerance)
    cap_bits = capacity.capacity_bits
    orders = []
    for order in range(max_order + 1):
        h = entropy_order_n(stats, order) + within_member
        eff = h / mean_time
        if cap_bits > 0.0:
            util = eff / cap_bits
        else:
            util = 0.0 if eff == 0.0 else math.inf
        orders.append(OrderEstimate(order, h, eff, util))
    return TraceEfficiencyReport(
        length=stats.length,
        mean_time=mean_time,
        capacity_bits=cap_bits,
        orders=tuple(orders),
    )
