import pytest
from hypothesis import given, strategies as st

from linfalg.errors import ParseError, StructureError
from linfalg.fileformat import dumps, parse
from linfalg.fixtures import CATALOG, fixture_text, load_fixture


def tables(L):
    return {k: {I: {j: str(c) for j, c in row.items()} for I, row in t.items()}
            for k, t in L.brackets.items()}


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_round_trip_identity(name):
    d = parse(fixture_text(name))
    text = dumps(d)
    d2 = parse(text)
    assert dumps(d2) == text
    assert d2.kinds == d.kinds
    if d.linf is not None:
        assert tables(d2.linf) == tables(d.linf)
        assert d2.linf.degrees == d.linf.degrees


LINF_TEXT = """\
[scalars]
c = 1/2

[algebra]
name = Lambda1
gens = t : 1

[ideal]
gens = t
order = 1

[module]
name = ab
basis = x : 0, y : 1
convention = linf

[brackets]
l1(x) = (2*c)*y
"""


def test_linf_convention_and_scalars():
    d = parse(LINF_TEXT)
    L = d.linf
    assert str(L.brackets[1][(0,)][1]) == "1"
    assert parse(dumps(d)).linf.brackets[1][(0,)][1] == L.brackets[1][(0,)][1]


@pytest.mark.parametrize("bad,line", [
    ("[algebra]\nname = A\ngens = t 1\n", 3),
    ("[nonsense]\n", 1),
    ("[algebra]\nname = A\ngens = t : 1\n\n[ideal]\ngens = t\norder = x\n", 7),
    ("[module]\nbasis = a : 0\n[brackets]\nl2(a, a = a\n", 4),
])
def test_parse_errors_carry_position(bad, line):
    with pytest.raises(ParseError) as err:
        parse(bad)
    assert err.value.line == line


def test_semantic_errors_are_structure_errors():
    text = fixture_text("sl2-lambda").replace("[e, f] = h", "[e, f] = 2*e")
    with pytest.raises(StructureError):
        parse(text)
    # without verification the object is built and can be checked later
    d = parse(text, verify=False)
    assert d.linf is not None


def test_broken_algebroid_rejected():
    text = "[algebroid]\nname = bad\nvariables =\nframe = a, b, c\n" \
           "[a, b] = c\n[b, c] = a\n[a, c] = a\n"
    with pytest.raises(StructureError):
        parse(text)


label = st.sampled_from(["e", "f", "h"])
coef = st.integers(-3, 3).filter(bool)


@given(st.lists(st.tuples(label, label, label, coef), max_size=4))
def test_dgla_text_round_trip(entries):
    lines = ["[algebra]", "name = L2", "gens = t1 : 1, t2 : 1", "", "[ideal]",
             "gens = t1, t2", "order = 2", "", "[module]", "name = g",
             "basis = e : 0, f : 0, h : 0", "convention = dgla", "", "[brackets]"]
    seen = set()
    for a, b, c, k in entries:
        if a == b or frozenset((a, b)) in seen:
            continue
        seen.add(frozenset((a, b)))
        lines.append(f"[{a}, {b}] = ({k})*{c}")
    d = parse("\n".join(lines) + "\n", verify=False)
    text = dumps(d)
    assert dumps(parse(text, verify=False)) == text
    assert tables(parse(text, verify=False).linf) == tables(d.linf)
