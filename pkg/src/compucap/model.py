"""Declarative instruction-set models.

A model describes a machine's instruction set as (count, execution-time)
aggregates: plain classes group `count` instructions sharing one time, and
families group instructions whose times form an arithmetic progression
(base, base+step, ..., base+(terms-1)*step), `count` instructions per term.

Times are exact rationals and may be affine in named parameters (e.g. a
memory-reference time measured in clock cycles); binding the parameters
produces a bound set on which everything downstream operates.  Counts are
exact integers throughout.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Union


class ModelError(ValueError):
    """Model file is malformed or the instruction set is inconsistent."""


class BindingError(ValueError):
    """Parameter values do not match the set's declared parameters."""


_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_POW2_COUNT_RE = re.compile(r"\s*(\d+)\s*\*\s*2\s*\^\s*(\d+)\s*\Z")


def _check_ident(name: object, what: str) -> str:
    if not isinstance(name, str) or not _IDENT_RE.match(name):
        raise ModelError(f"{what} must be an identifier, got {name!r}")
    return name


def as_rational(value: Union[int, str, Fraction]) -> Fraction:
    """Coerce a model-file scalar (int, Fraction, "p/q" string) to Fraction."""
    if isinstance(value, bool):
        raise ModelError(f"expected a rational number, got {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelError(f"invalid rational {value!r}: {exc}") from None
    if isinstance(value, float):
        # Floats only reach here from direct API use; JSON parsing keeps
        # decimals exact via parse_float=Fraction.
        return Fraction(value).limit_denominator(10**12)
    raise ModelError(f"expected a rational number, got {value!r}")


def parse_count(value: Union[int, str]) -> int:
    """Parse an exact count: a plain integer or a product "a*2^b"."""
    if isinstance(value, bool):
        raise ModelError(f"invalid count {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        m = _POW2_COUNT_RE.match(value)
        if not m:
            raise ModelError(f'invalid count {value!r}: expected integer or "a*2^b"')
        return int(m.group(1)) * 2 ** int(m.group(2))
    raise ModelError(f"invalid count {value!r}")


@dataclass(frozen=True)
class TimeExpression:
    """Execution time, affine in named parameters: base + sum(coeff * param)."""

    base: Fraction = Fraction(0)
    coeffs: Mapping[str, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "base", as_rational(self.base))
        object.__setattr__(
            self, "coeffs", {k: as_rational(v) for k, v in self.coeffs.items()}
        )
        if self.base < 0:
            raise ModelError(f"time base must be non-negative, got {self.base}")
        for name, coeff in self.coeffs.items():
            _check_ident(name, "parameter name")
            if coeff < 0:
                raise ModelError(f"coefficient of {name!r} must be non-negative")

    @property
    def parameters(self) -> frozenset[str]:
        return frozenset(self.coeffs)

    def evaluate(self, values: Mapping[str, Fraction]) -> Fraction:
        total = self.base
        for name, coeff in self.coeffs.items():
            total += coeff * values[name]
        return total

    def is_constant(self) -> bool:
        return not self.coeffs


@dataclass(frozen=True)
class InstructionClass:
    """`count` distinct instructions sharing one execution time."""

    name: str
    count: int
    time: TimeExpression

    def __post_init__(self):
        _check_ident(self.name, "member name")
        if not isinstance(self.count, int) or self.count < 1:
            raise ModelError(f"class {self.name!r}: count must be >= 1")


@dataclass(frozen=True)
class InstructionFamily:
    """Instructions at times base + F*step for F = 0..num_terms-1.

    Each of the num_terms time values carries count_per_term instructions.
    """

    name: str
    count_per_term: int
    time_base: TimeExpression
    step: Fraction
    num_terms: int

    def __post_init__(self):
        _check_ident(self.name, "member name")
        object.__setattr__(self, "step", as_rational(self.step))
        if not isinstance(self.count_per_term, int) or self.count_per_term < 1:
            raise ModelError(f"family {self.name!r}: count must be >= 1")
        if self.step <= 0:
            raise ModelError(f"family {self.name!r}: step must be > 0")
        if not isinstance(self.num_terms, int) or self.num_terms < 1:
            raise ModelError(f"family {self.name!r}: terms must be >= 1")


Member = Union[InstructionClass, InstructionFamily]


@dataclass(frozen=True)
class InstructionSet:
    """A named, validated collection of instruction classes and families."""

    name: str
    parameters: tuple[str, ...]
    members: tuple[Member, ...]

    def __post_init__(self):
        _check_ident(self.name, "set name")
        object.__setattr__(self, "parameters", tuple(self.parameters))
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ModelError(f"set {self.name!r} has no members")
        seen: set[str] = set()
        for p in self.parameters:
            _check_ident(p, "parameter name")
            if p in seen:
                raise ModelError(f"duplicate parameter {p!r}")
            seen.add(p)
        declared = frozenset(self.parameters)
        names: set[str] = set()
        for m in self.members:
            if m.name in names:
                raise ModelError(f"duplicate member name {m.name!r}")
            names.add(m.name)
            time = m.time if isinstance(m, InstructionClass) else m.time_base
            for ref in time.parameters:
                if ref not in declared:
                    raise ModelError(
                        f"member {m.name!r} references undeclared parameter {ref!r}"
                    )


@dataclass(frozen=True)
class ParameterBinding:
    """Concrete non-negative values for a set's declared parameters."""

    values: Mapping[str, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        vals = {}
        for name, v in self.values.items():
            _check_ident(name, "parameter name")
            r = as_rational(v)
            if r < 0:
                raise BindingError(f"parameter {name!r} must be non-negative")
            vals[name] = r
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_strings(cls, pairs: list[str]) -> "ParameterBinding":
        """Build from CLI-style "name=value" strings."""
        values: dict[str, Fraction] = {}
        for pair in pairs:
            name, sep, text = pair.partition("=")
            if not sep or not name:
                raise ModelError(f"expected name=value, got {pair!r}")
            values[name] = as_rational(text.strip())
        return cls(values)


@dataclass(frozen=True)
class BoundClass:
    name: str
    count: int
    time: Fraction


@dataclass(frozen=True)
class BoundFamily:
    name: str
    count_per_term: int
    time_base: Fraction
    step: Fraction
    num_terms: int

    def term_time(self, index: int) -> Fraction:
        return self.time_base + index * self.step


BoundMember = Union[BoundClass, BoundFamily]


@dataclass(frozen=True)
class BoundInstructionSet:
    """An instruction set whose times are all concrete positive rationals."""

    name: str
    members: tuple[BoundMember, ...]

    def member(self, name: str) -> BoundMember:
        for m in self.members:
            if m.name == name:
                return m
        raise KeyError(name)


def bind(iset: InstructionSet, binding: ParameterBinding) -> BoundInstructionSet:
    """Evaluate every time expression under `binding`.

    The binding must supply exactly the declared parameters; every evaluated
    time must come out strictly positive.
    """
    declared = set(iset.parameters)
    given = set(binding.values)
    missing = declared - given
    if missing:
        raise BindingError(f"missing parameter {sorted(missing)[0]!r}")
    extra = given - declared
    if extra:
        raise BindingError(f"undeclared parameter {sorted(extra)[0]!r}")

    members: list[BoundMember] = []
    for m in iset.members:
        if isinstance(m, InstructionClass):
            t = m.time.evaluate(binding.values)
            if t <= 0:
                raise BindingError(f"member {m.name!r}: evaluated time {t} is not positive")
            members.append(BoundClass(m.name, m.count, t))
        else:
            t0 = m.time_base.evaluate(binding.values)
            if t0 <= 0:
                raise BindingError(f"member {m.name!r}: evaluated time {t0} is not positive")
            members.append(BoundFamily(m.name, m.count_per_term, t0, m.step, m.num_terms))
    return BoundInstructionSet(iset.name, tuple(members))


def total_count(iset: Union[InstructionSet, BoundInstructionSet]) -> int:
    """Exact total number of individual instructions in the set."""
    total = 0
    for m in iset.members:
        if isinstance(m, (InstructionClass, BoundClass)):
            total += m.count
        else:
            total += m.count_per_term * m.num_terms
    return total


# --- model file (JSON) parsing and serialization ---

_TIME_KEYS = {"base", "coeffs"}
_CLASS_KEYS = {"name", "count", "time", "family"}
_FAMILY_KEYS = {"step", "terms"}
_MODEL_KEYS = {"name", "parameters", "classes"}


def _parse_time(obj: object, where: str) -> TimeExpression:
    if isinstance(obj, (int, str, Fraction)):
        return TimeExpression(base=as_rational(obj))
    if not isinstance(obj, dict):
        raise ModelError(f"{where}: time must be an object or rational")
    unknown = set(obj) - _TIME_KEYS
    if unknown:
        raise ModelError(f"{where}: unknown time key {sorted(unknown)[0]!r}")
    if "base" not in obj:
        raise ModelError(f"{where}: time is missing 'base'")
    coeffs = obj.get("coeffs", {})
    if not isinstance(coeffs, dict):
        raise ModelError(f"{where}: coeffs must be an object")
    return TimeExpression(
        base=as_rational(obj["base"]),
        coeffs={k: as_rational(v) for k, v in coeffs.items()},
    )


def _parse_member(obj: object, index: int) -> Member:
    where = f"classes[{index}]"
    if not isinstance(obj, dict):
        raise ModelError(f"{where}: expected an object")
    unknown = set(obj) - _CLASS_KEYS
    if unknown:
        raise ModelError(f"{where}: unknown key {sorted(unknown)[0]!r}")
    for key in ("name", "count", "time"):
        if key not in obj:
            raise ModelError(f"{where}: missing {key!r}")
    name = _check_ident(obj["name"], f"{where} name")
    count = parse_count(obj["count"])
    if count < 1:
        raise ModelError(f"{where}: count must be >= 1")
    time = _parse_time(obj["time"], f"{where} ({name})")
    if "family" not in obj:
        return InstructionClass(name=name, count=count, time=time)
    fam = obj["family"]
    if not isinstance(fam, dict):
        raise ModelError(f"{where}: 'family' must be an object")
    unknown = set(fam) - _FAMILY_KEYS
    if unknown:
        raise ModelError(f"{where}: unknown family key {sorted(unknown)[0]!r}")
    for key in _FAMILY_KEYS:
        if key not in fam:
            raise ModelError(f"{where}: family is missing {key!r}")
    step = as_rational(fam["step"])
    if step <= 0:
        raise ModelError(f"{where}: family step must be > 0")
    terms = parse_count(fam["terms"])
    if terms < 1:
        raise ModelError(f"{where}: family terms must be >= 1")
    return InstructionFamily(
        name=name, count_per_term=count, time_base=time, step=step, num_terms=terms
    )


def parse_model(text: str) -> InstructionSet:
    """Parse and validate a model file (see the JSON schema in the README)."""
    try:
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ModelError(
            f"model syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    return instruction_set_from_object(doc)


def instruction_set_from_object(doc: object) -> InstructionSet:
    """Build a validated InstructionSet from already-parsed model JSON."""
    if not isinstance(doc, dict):
        raise ModelError("model file must contain a JSON object")
    unknown = set(doc) - _MODEL_KEYS
    if unknown:
        raise ModelError(f"unknown model key {sorted(unknown)[0]!r}")
    if "name" not in doc or "classes" not in doc:
        raise ModelError("model file requires 'name' and 'classes'")
    params = doc.get("parameters", [])
    if not isinstance(params, list):
        raise ModelError("'parameters' must be a list of names")
    classes = doc["classes"]
    if not isinstance(classes, list) or not classes:
        raise ModelError("'classes' must be a non-empty list")
    members = tuple(_parse_member(c, i) for i, c in enumerate(classes))
    return InstructionSet(
        name=_check_ident(doc["name"], "set name"),
        parameters=tuple(params),
        members=members,
    )


def _rational_json(value: Fraction) -> Union[int, str]:
    if value.denominator == 1:
        return int(value)
    return f"{value.numerator}/{value.denominator}"


def _time_json(time: TimeExpression) -> dict:
    out: dict = {"base": _rational_json(time.base)}
    if time.coeffs:
        out["coeffs"] = {k: _rational_json(v) for k, v in sorted(time.coeffs.items())}
    return out


def serialize_model(iset: InstructionSet) -> str:
    """Render a set back to model-file JSON; parse_model round-trips it."""
    classes = []
    for m in iset.members:
        if isinstance(m, InstructionClass):
            classes.append({"name": m.name, "count": m.count, "time": _time_json(m.time)})
        else:
            classes.append(
                {
                    "name": m.name,
                    "count": m.count_per_term,
                    "time": _time_json(m.time_base),
                    "family": {"step": _rational_json(m.step), "terms": m.num_terms},
                }
            )
    doc = {"name": iset.name, "parameters": list(iset.parameters), "classes": classes}
    return json.dumps(doc, indent=2) + "\n"
