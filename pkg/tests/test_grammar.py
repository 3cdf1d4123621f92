import pytest

from lcprop.dag import dag
from lcprop.grammar import (
    DuplicateRuleId,
    GrammarSyntaxError,
    GrammarValidationError,
    InconsistentEquations,
    UndeclaredConstituent,
    category_of,
    load_grammar,
)

R1 = """\
rule r1: NP0 -> NP1 POS NP2
  <NP0 head> = <NP2 head>
  <NP0 head sem owner> = <NP1 head sem>
lex Kris: NP <head sem pred> = kris
lex 's: POS
"""


def test_rule_dag_layout():
    g = load_grammar(R1)
    r1 = g.rule("r1")
    assert (r1.lhs, r1.rhs, r1.left_corner) == ("NP", ("NP", "POS", "NP"), "NP")
    assert r1.dag == dag(
        "<cat> = NP",
        "<1 cat> = NP",
        "<2 cat> = POS",
        "<3 cat> = NP",
        "<head> = <3 head>",
        "<head sem owner> = <1 head sem>",
    )


def test_defaults_and_vocabulary():
    g = load_grammar(R1)
    assert g.start == "NP"
    assert g.features == {"cat", "head", "sem", "owner", "pred"}
    assert g.restrictable == ["head", "owner", "pred", "sem"]
    assert [e.dag for e in g.lexicon["Kris"]] == [dag("<cat> = NP", "<head sem pred> = kris")]
    assert g.rules_with_corner("NP") == [g.rule("r1")]
    assert g.categories == {"NP", "POS"}


def test_category_of_strips_digits():
    assert category_of("NP12") == "NP"
    assert category_of("V") == "V"
    assert category_of("X2Y3") == "X2Y"


def test_comments_and_blank_lines():
    g = load_grammar("# header\n\nstart S  # trailing\nrule a: S -> X\n\nlex x: X\n")
    assert g.start == "S" and len(g.rules) == 1


def test_lexical_ambiguity():
    g = load_grammar("rule a: S -> X\nlex x: X <f> = a\nlex x: X <f> = b\n")
    assert len(g.lexicon["x"]) == 2


def test_lex_equations_on_continuation_lines():
    g = load_grammar("rule a: S -> X\nlex x: X\n  <f> = a\n  <g> = <f>\n")
    assert g.lexicon["x"][0].dag == dag("<cat> = X", "<f> = a", "<g> = <f>")


@pytest.mark.parametrize(
    "text, error, line",
    [
        ("rule a: S -> X\n  <S f> = \n", GrammarSyntaxError, 2),
        ("rule a S -> X\n", GrammarSyntaxError, 1),
        ("rule a: S ->\n", GrammarSyntaxError, 1),
        ("rule a: S X\n", GrammarSyntaxError, 1),
        ("  <S f> = a\n", GrammarSyntaxError, 1),
        ("frobnicate\n", GrammarSyntaxError, 1),
        ("rule a: S -> X X\n  <X f> = a\n", GrammarSyntaxError, 2),
        ("rule a: S -> X\n  <S f> a\n", GrammarSyntaxError, 2),
        ("rule a: S -> X\n  <Y f> = a\n", UndeclaredConstituent, 2),
        ("rule a: S -> X\nrule a: S -> Y\n", DuplicateRuleId, 2),
        ("rule a: S -> X\n  <S f> = a\n  <S f> = b\n", InconsistentEquations, 1),
        ("rule a: S -> X\n  <S f> = <S f g>\n", InconsistentEquations, 1),
        ("rule a: S -> X\nlex x: X <f> = a <f> = b\n", InconsistentEquations, 2),
        ("lex x: X\n", GrammarValidationError, None),
        ("rule a: S0 -> S1\n", GrammarValidationError, 1),
        ("start S\nstart T\nrule a: S -> X\n", GrammarSyntaxError, 2),
        ("rule a: S -> X\nlex x:\n", GrammarSyntaxError, 2),
    ],
)
def test_errors_carry_location(text, error, line):
    with pytest.raises(error) as info:
        load_grammar(text)
    assert info.value.line == line


def test_syntax_error_column():
    with pytest.raises(GrammarSyntaxError) as info:
        load_grammar("rule a: S -> X\n  <S f> a\n")
    assert info.value.column == 9
    assert "line 2, column 9" in str(info.value)


def test_repeated_label_without_equations_is_fine():
    g = load_grammar("rule c: NP -> NP PP\nrule p: PP -> P\nlex p: P\n")
    assert g.rule("c").rhs == ("NP", "PP")


def test_unary_self_rule_with_equations_is_allowed():
    g = load_grammar("rule a: S0 -> S1\n  <S0 f> = <S1 f g>\nrule b: S -> X\nlex x: X\n")
    assert g.rule("a").rhs == ("S",)


def test_shipped_grammars_load(possessive, agreement):
    assert possessive.start == "NP"
    assert agreement.start == "S"
    assert {"owner", "agr", "anim"} <= agreement.features
