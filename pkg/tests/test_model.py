from fractions import Fraction

import pytest

from compucap import (
    BindingError,
    InstructionClass,
    InstructionFamily,
    InstructionSet,
    ModelError,
    ParameterBinding,
    TimeExpression,
    bind,
    data_path,
    parse_model,
    serialize_model,
    total_count,
)
from compucap.model import parse_count

TOY = """
{
  "name": "toy",
  "classes": [
    {"name": "fast", "count": 2, "time": {"base": 1}},
    {"name": "slow", "count": 1, "time": {"base": 2}}
  ]
}
"""


def test_parse_toy_model():
    iset = parse_model(TOY)
    assert iset.name == "toy"
    assert len(iset.members) == 2
    assert total_count(iset) == 3
    fast = iset.members[0]
    assert isinstance(fast, InstructionClass)
    assert fast.count == 2
    assert fast.time.base == 1


def test_parse_count_grammar():
    assert parse_count(7) == 7
    assert parse_count("139*2^24") == 139 * 2**24
    assert parse_count("1*2^0") == 1
    with pytest.raises(ModelError):
        parse_count("2^24")
    with pytest.raises(ModelError):
        parse_count("139*3^24")
    with pytest.raises(ModelError):
        parse_count(True)


def test_time_expression_evaluate():
    t = TimeExpression(base=1, coeffs={"mu": 20})
    assert t.evaluate({"mu": Fraction(7, 5)}) == 29
    zero_coeff = TimeExpression(base=2, coeffs={"mu": 2})
    assert zero_coeff.evaluate({"mu": Fraction(0)}) == 2


def test_rationals_as_numbers_and_strings():
    iset = parse_model(
        '{"name": "r", "classes": ['
        '{"name": "a", "count": 1, "time": {"base": 1.5}},'
        '{"name": "b", "count": 1, "time": "3/2"}]}'
    )
    assert iset.members[0].time.base == Fraction(3, 2)
    assert iset.members[1].time.base == Fraction(3, 2)


def test_syntax_error_reports_position():
    with pytest.raises(ModelError, match=r"line \d+, column \d+"):
        parse_model('{"name": "x", "classes": [}')


@pytest.mark.parametrize(
    "doc, fragment",
    [
        ('{"classes": []}', "requires 'name'"),
        ('{"name": "x", "classes": []}', "non-empty"),
        (
            '{"name": "x", "classes": [{"name": "a", "count": 0, "time": 1}]}',
            "count",
        ),
        (
            '{"name": "x", "classes": [{"name": "a", "count": 1, "time": 1},'
            ' {"name": "a", "count": 1, "time": 2}]}',
            "duplicate member",
        ),
        (
            '{"name": "x", "classes": [{"name": "a", "count": 1, "time": 1,'
            ' "family": {"step": 0, "terms": 3}}]}',
            "step",
        ),
        (
            '{"name": "x", "classes": [{"name": "a", "count": 1,'
            ' "time": {"base": 1, "coeffs": {"nu": 1}}}]}',
            "undeclared parameter 'nu'",
        ),
    ],
)
def test_validation_errors(doc, fragment):
    with pytest.raises(ModelError, match=fragment):
        parse_model(doc)


def test_bind_evaluates_times():
    iset = parse_model(
        '{"name": "m", "parameters": ["mu"], "classes": ['
        '{"name": "a", "count": 1, "time": {"base": 1, "coeffs": {"mu": 20}}}]}'
    )
    bound = bind(iset, ParameterBinding({"mu": Fraction(7, 5)}))
    assert bound.members[0].time == 29


def test_bind_missing_and_extra_parameters():
    iset = parse_model(
        '{"name": "m", "parameters": ["mu"], "classes": ['
        '{"name": "a", "count": 1, "time": {"base": 1, "coeffs": {"mu": 1}}}]}'
    )
    with pytest.raises(BindingError, match="missing parameter 'mu'"):
        bind(iset, ParameterBinding({}))
    with pytest.raises(BindingError, match="undeclared parameter 'nu'"):
        bind(iset, ParameterBinding({"mu": 1, "nu": 1}))


def test_bind_rejects_nonpositive_time():
    iset = parse_model(
        '{"name": "m", "parameters": ["mu"], "classes": ['
        '{"name": "a", "count": 1, "time": {"base": 0, "coeffs": {"mu": 1}}}]}'
    )
    with pytest.raises(BindingError, match="not positive"):
        bind(iset, ParameterBinding({"mu": 0}))


def test_bind_idempotent_on_parameterless_sets():
    iset = parse_model(TOY)
    once = bind(iset, ParameterBinding({}))
    assert bind(iset, ParameterBinding({})) == once


def test_param_binding_from_strings():
    binding = ParameterBinding.from_strings(["mu=1.2", "nu=3/4"])
    assert binding.values == {"mu": Fraction(6, 5), "nu": Fraction(3, 4)}
    with pytest.raises(ModelError):
        ParameterBinding.from_strings(["mu"])
    with pytest.raises(BindingError):
        ParameterBinding(values={"mu": -1})


def test_serialize_round_trip():
    iset = parse_model(
        '{"name": "m", "parameters": ["mu"], "classes": ['
        '{"name": "a", "count": "3*2^4", "time": {"base": "1/2", "coeffs": {"mu": 2}}},'
        '{"name": "f", "count": 2, "time": {"base": 1},'
        ' "family": {"step": "2/3", "terms": 5}}]}'
    )
    assert parse_model(serialize_model(iset)) == iset


def test_serialize_round_trip_bundled_models():
    for name in ("toy.json", "mix.json", "mmix.json"):
        iset = parse_model(data_path(name).read_text())
        assert parse_model(serialize_model(iset)) == iset


def test_mix_model_structure():
    # counts 2^28, 2^26, 2^26, 2^25 and a 2^25-per-term family stepping by 2
    iset = parse_model(data_path("mix.json").read_text())
    classes = [m for m in iset.members if isinstance(m, InstructionClass)]
    family = [m for m in iset.members if isinstance(m, InstructionFamily)]
    assert sorted(c.count for c in classes) == [2**25, 2**26, 2**26, 2**28]
    (move,) = family
    assert move.count_per_term == 2**25
    assert move.time_base.base == 1
    assert move.step == 2
    assert move.num_terms == 2**25 + 1


def test_mix_total_count_exact():
    iset = parse_model(data_path("mix.json").read_text())
    expected = 2**28 + 2**26 + 2**26 + 2**25 + 2**25 * (2**25 + 1)
    assert total_count(iset) == expected


def test_single_member_total():
    iset = InstructionSet(
        name="one",
        parameters=(),
        members=(InstructionClass("only", 1, TimeExpression(base=5)),),
    )
    assert total_count(iset) == 1
