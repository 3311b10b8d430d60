"""Budgeted memory-configuration optimization.

A machine's instruction set splits into a fixed base (everything that is
not a memory access) and, per candidate memory kind, a bracket of access
classes whose multiplicity scales with the number of cells installed:
with R registers and n cells of a kind, an access class of per-cell count
m contributes R * m * n addressable instruction variants at its access
time.  Given a per-cell price for each kind and a total budget, the
design question is which cell counts maximize capacity.

At any fixed root X the characteristic sum is linear and increasing in
each cell count, so a continuous-relaxation optimum always sits at a
vertex of the budget simplex: the entire budget on one kind.
optimize_vertex compares exactly those pure allocations; optimize_grid is
the brute-force check over a full integer grid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Optional

from .model import (
    BindingError,
    BoundClass,
    BoundInstructionSet,
    BoundMember,
    InstructionSet,
    ParameterBinding,
    TimeExpression,
    _check_ident,
    _parse_time,
    as_rational,
    bind,
    instruction_set_from_object,
    parse_count,
)
from .solver import CapacityResult, solve_capacity

_TIE_WIDTH = 1e-11
_MAX_GRID_POINTS = 1_000_000

_VERTEX_JUSTIFICATION = (
    "the characteristic sum grows with every cell count at any fixed root, "
    "so a continuous-relaxation optimum spends the whole budget on a single "
    "kind; compared each all-budget-to-one-kind allocation against none"
)


class ProblemError(ValueError):
    """A memory-design problem is malformed or inconsistent."""


@dataclass(frozen=True)
class AccessClass:
    """count_per_cell instructions of the given time for every installed cell."""

    count_per_cell: int
    time: TimeExpression

    def __post_init__(self):
        if not isinstance(self.count_per_cell, int) or self.count_per_cell < 1:
            raise ProblemError("access-class count must be >= 1")


@dataclass(frozen=True)
class MemoryKind:
    name: str
    cell_cost: Fraction
    access_classes: tuple[AccessClass, ...]

    def __post_init__(self):
        _check_ident(self.name, "memory-kind name")
        object.__setattr__(self, "cell_cost", as_rational(self.cell_cost))
        object.__setattr__(self, "access_classes", tuple(self.access_classes))
        if self.cell_cost <= 0:
            raise ProblemError(f"kind {self.name!r}: cell_cost must be > 0")
        if not self.access_classes:
            raise ProblemError(f"kind {self.name!r} has no access classes")


@dataclass(frozen=True)
class MemoryDesignProblem:
    """Base instructions, candidate memory kinds, and a spending budget."""

    base: InstructionSet
    registers: int
    kinds: tuple[MemoryKind, ...]
    budget: Fraction
    binding: ParameterBinding

    def __post_init__(self):
        object.__setattr__(self, "kinds", tuple(self.kinds))
        object.__setattr__(self, "budget", as_rational(self.budget))
        if not isinstance(self.registers, int) or self.registers < 1:
            raise ProblemError("registers must be >= 1")
        if self.budget < 0:
            raise ProblemError("budget must be >= 0")
        names = set()
        for kind in self.kinds:
            if kind.name in names:
                raise ProblemError(f"duplicate kind name {kind.name!r}")
            names.add(kind.name)
        needed = set(self.base.parameters)
        for kind in self.kinds:
            for ac in kind.access_classes:
                needed |= ac.time.parameters
        given = set(self.binding.values)
        if needed - given:
            raise BindingError(f"missing parameter {sorted(needed - given)[0]!r}")
        if given - needed:
            raise BindingError(f"undeclared parameter {sorted(given - needed)[0]!r}")


@dataclass(frozen=True)
class Allocation:
    """A chosen cell count per kind, its exact cost, and solved capacity."""

    cells: Mapping[str, int]
    total_cost: Fraction
    capacity: CapacityResult
    label: str = ""
    tie_with: tuple[str, ...] = ()
    justification: str = ""

    def __post_init__(self):
        object.__setattr__(self, "cells", dict(self.cells))


def instantiate(problem: MemoryDesignProblem, cells: Mapping[str, int]) -> BoundInstructionSet:
    """The full bound instruction set once `cells` of each kind are installed.

    Every access class of a kind with n cells becomes a plain class of
    count registers * count_per_cell * n; kinds at zero cells contribute
    nothing, so the all-zero allocation is exactly the base set.
    """
    known = {kind.name for kind in problem.kinds}
    for name, n in cells.items():
        if name not in known:
            raise ProblemError(f"unknown memory kind {name!r}")
        if not isinstance(n, int) or n < 0:
            raise ProblemError(f"cell count for {name!r} must be a non-negative integer")
    base_binding = ParameterBinding(
        {p: problem.binding.values[p] for p in problem.base.parameters}
    )
    members: list[BoundMember] = list(bind(problem.base, base_binding).members)
    for kind in problem.kinds:
        n = cells.get(kind.name, 0)
        if n == 0:
            continue
        for index, ac in enumerate(kind.access_classes):
            time = ac.time.evaluate(problem.binding.values)
            if time <= 0:
                raise BindingError(
                    f"kind {kind.name!r}: access time {time} is not positive"
                )
            members.append(
                BoundClass(
                    name=f"{kind.name}/{index}",
                    count=problem.registers * ac.count_per_cell * n,
                    time=time,
                )
            )
    return BoundInstructionSet(problem.base.name, tuple(members))


def _allocation_cost(problem: MemoryDesignProblem, cells: Mapping[str, int]) -> Fraction:
    return sum(
        (kind.cell_cost * cells.get(kind.name, 0) for kind in problem.kinds),
        Fraction(0),
    )


def optimize_vertex(
    problem: MemoryDesignProblem, tolerance: float = 1e-12
) -> Allocation:
    """Pick the best pure allocation: the whole budget on one kind, or none.

    Candidates are evaluated in declaration order ("none" first); a later
    candidate must beat the incumbent by more than the tie width to
    displace it, so ties resolve to the earliest declared.  Candidates
    within the tie width of the winner are reported in tie_with.
    """
    zero = {kind.name: 0 for kind in problem.kinds}
    candidates: list[tuple[str, dict[str, int]]] = [("none", zero)]
    for kind in problem.kinds:
        n = int(problem.budget // kind.cell_cost)
        if n > 0:
            candidates.append((kind.name, {**zero, kind.name: n}))

    solved: list[tuple[str, dict[str, int], CapacityResult]] = []
    for label, cells in candidates:
        cap = solve_capacity(instantiate(problem, cells), tolerance)
        solved.append((label, cells, cap))

    best_label, best_cells, best_cap = solved[0]
    for label, cells, cap in solved[1:]:
        if cap.capacity_bits > best_cap.capacity_bits + _TIE_WIDTH:
            best_label, best_cells, best_cap = label, cells, cap
    ties = tuple(
        label
        for label, _, cap in solved
        if label != best_label
        and abs(cap.capacity_bits - best_cap.capacity_bits) <= _TIE_WIDTH
    )
    return Allocation(
        cells=best_cells,
        total_cost=_allocation_cost(problem, best_cells),
        capacity=best_cap,
        label=best_label,
        tie_with=ties,
        justification=_VERTEX_JUSTIFICATION,
    )


def _grid_points(problem: MemoryDesignProblem, step: int):
    """Yield every feasible cells mapping on the step grid, depth-first."""

    def rec(index: int, remaining: Fraction, chosen: dict[str, int]):
        if index == len(problem.kinds):
            yield dict(chosen)
            return
        kind = problem.kinds[index]
        limit = int(remaining // kind.cell_cost)
        for n in range(0, limit + 1, step):
            chosen[kind.name] = n
            yield from rec(index + 1, remaining - kind.cell_cost * n, chosen)
        del chosen[kind.name]

    yield from rec(0, problem.budget, {})


def optimize_grid(
    problem: MemoryDesignProblem, step: int = 1, tolerance: float = 1e-12
) -> Allocation:
    """Brute-force oracle: evaluate every feasible allocation on a grid.

    Capacity ties (within the tie width) resolve to the lexicographically
    greatest cell vector in kind-declaration order, which keeps the result
    deterministic and agrees with optimize_vertex's preference for
    earlier-declared kinds.
    """
    if not isinstance(step, int) or step < 1:
        raise ProblemError(f"step must be a positive integer, got {step!r}")
    order = [kind.name for kind in problem.kinds]
    best: Optional[tuple[float, tuple[int, ...], dict[str, int], CapacityResult]] = None
    points = 0
    for cells in _grid_points(problem, step):
        points += 1
        if points > _MAX_GRID_POINTS:
            raise ProblemError(f"grid exceeds {_MAX_GRID_POINTS} points")
        cap = solve_capacity(instantiate(problem, cells), tolerance)
        vec = tuple(cells[name] for name in order)
        if (
            best is None
            or cap.capacity_bits > best[0] + _TIE_WIDTH
            or (abs(cap.capacity_bits - best[0]) <= _TIE_WIDTH and vec > best[1])
        ):
            best = (cap.capacity_bits, vec, cells, cap)
    assert best is not None  # the all-zero point is always feasible
    _, _, cells, cap = best
    return Allocation(
        cells=cells,
        total_cost=_allocation_cost(problem, cells),
        capacity=cap,
        label="grid",
        justification=f"exhaustively evaluated {points} feasible allocations "
        f"on a step-{step} grid",
    )


# --- problem file (JSON) parsing ---

_PROBLEM_KEYS = {"base", "registers", "budget", "parameters", "kinds"}
_KIND_KEYS = {"name", "cell_cost", "access_classes"}
_ACCESS_KEYS = {"count", "time"}


def _parse_kind(obj: object, index: int) -> MemoryKind:
    where = f"kinds[{index}]"
    if not isinstance(obj, dict):
        raise ProblemError(f"{where}: expected an object")
    unknown = set(obj) - _KIND_KEYS
    if unknown:
        raise ProblemError(f"{where}: unknown key {sorted(unknown)[0]!r}")
    for key in _KIND_KEYS:
        if key not in obj:
            raise ProblemError(f"{where}: missing {key!r}")
    accesses = obj["access_classes"]
    if not isinstance(accesses, list) or not accesses:
        raise ProblemError(f"{where}: access_classes must be a non-empty list")
    parsed = []
    for j, ac in enumerate(accesses):
        if not isinstance(ac, dict) or set(ac) - _ACCESS_KEYS or "count" not in ac or "time" not in ac:
            raise ProblemError(f"{where}: access_classes[{j}] needs count and time")
        parsed.append(
            AccessClass(
                count_per_cell=parse_count(ac["count"]),
                time=_parse_time(ac["time"], f"{where} access_classes[{j}]"),
            )
        )
    return MemoryKind(
        name=obj["name"],
        cell_cost=as_rational(obj["cell_cost"]),
        access_classes=tuple(parsed),
    )


def parse_problem(text: str, base_dir: Optional[Path] = None) -> MemoryDesignProblem:
    """Parse a problem file; `base` may be inline model JSON or a file path.

    A path is resolved relative to base_dir (the problem file's own
    directory, when loaded from disk).
    """
    try:
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ProblemError(
            f"problem syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(doc, dict):
        raise ProblemError("problem file must contain a JSON object")
    unknown = set(doc) - _PROBLEM_KEYS
    if unknown:
        raise ProblemError(f"unknown problem key {sorted(unknown)[0]!r}")
    for key in ("base", "registers", "budget", "kinds"):
        if key not in doc:
            raise ProblemError(f"problem file is missing {key!r}")

    base_obj = doc["base"]
    if isinstance(base_obj, str):
        path = Path(base_obj)
        if not path.is_absolute():
            path = (base_dir or Path.cwd()) / path
        try:
            base = instruction_set_from_object(
                json.loads(path.read_text(encoding="utf-8"), parse_float=Fraction)
            )
        except OSError as exc:
            raise ProblemError(f"cannot read base model {base_obj!r}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ProblemError(f"base model {base_obj!r}: {exc.msg}") from None
    else:
        base = instruction_set_from_object(base_obj)

    params = doc.get("parameters", {})
    if not isinstance(params, dict):
        raise ProblemError("'parameters' must be an object")
    kinds_obj = doc["kinds"]
    if not isinstance(kinds_obj, list) or not kinds_obj:
        raise ProblemError("'kinds' must be a non-empty list")
    return MemoryDesignProblem(
        base=base,
        registers=parse_count(doc["registers"]),
        kinds=tuple(_parse_kind(k, i) for i, k in enumerate(kinds_obj)),
        budget=as_rational(doc["budget"]),
        binding=ParameterBinding({k: as_rational(v) for k, v in params.items()}),
    )
