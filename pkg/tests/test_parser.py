import json
import random

import pytest

from lcprop.dag import constraints_of, dag
from lcprop.parser import (
    BOTTOM_UP,
    CATEGORY_ONLY,
    FILTERED,
    LeftCornerParser,
    ParseLimitExceeded,
    UnknownToken,
    parse,
    read_corpus,
    stats_compare,
)
from lcprop.precompile import category_only, compile_table
from support import DATA, random_grammar, random_sentence


@pytest.fixture(scope="module")
def possessive_tables(possessive):
    return compile_table(possessive)[:2]


@pytest.fixture(scope="module")
def agreement_tables(agreement):
    return {
        FILTERED: compile_table(agreement)[:2],
        CATEGORY_ONLY: compile_table(agreement, category_only(agreement))[:2],
        BOTTOM_UP: (None, None),
    }


def test_possessive_parse(possessive, possessive_tables):
    result = parse(possessive, "Kris 's desk".split(), *possessive_tables)
    assert result.parses == [dag("<cat> = NP", "<head sem pred> = desk", "<head sem owner pred> = kris")]


def test_nested_possessive_is_ambiguous(possessive, possessive_tables):
    result = parse(possessive, "Kris 's Kris 's desk".split(), *possessive_tables)
    owners = sorted(str(c) for p in result.parses for c in constraints_of(p) if "owner" in str(c))
    assert len(result.parses) == 2
    # (Kris's Kris)'s desk puts a second owner under the first
    assert "<head sem owner owner pred> = kris" in owners


def test_no_parse(possessive, possessive_tables):
    assert parse(possessive, ["desk", "Kris"], *possessive_tables).parses == []


def test_unknown_token(possessive):
    with pytest.raises(UnknownToken) as info:
        parse(possessive, ["Kris", "flies"])
    assert (info.value.form, info.value.position) == ("flies", 1)


def test_table_and_ledger_go_together(possessive, possessive_tables):
    with pytest.raises(ValueError):
        parse(possessive, ["desk"], possessive_tables[0])


def test_edge_limit(agreement):
    with pytest.raises(ParseLimitExceeded):
        LeftCornerParser(agreement, max_edges=3).parse("Kris 's dogs barks".split())


def test_agreement_parses(agreement, agreement_tables):
    table, ledger = agreement_tables[FILTERED]
    assert len(parse(agreement, "Kris barks".split(), table, ledger).parses) == 1
    assert parse(agreement, "Kris bark".split(), table, ledger).parses == []
    # the desk cannot see anything
    assert parse(agreement, "desks see Kris".split(), table, ledger).parses == []
    assert len(parse(agreement, "desks wobble".split(), table, ledger).parses) == 1


def test_sheep_is_ambiguous_for_number(agreement, agreement_tables):
    table, ledger = agreement_tables[FILTERED]
    assert len(parse(agreement, "sheep sleeps".split(), table, ledger).parses) == 1
    assert len(parse(agreement, "sheep sleep".split(), table, ledger).parses) == 1


def test_modes_agree_and_prune_monotonically(agreement, agreement_tables):
    corpus = read_corpus((DATA / "agreement.txt").read_text())
    for tokens in corpus:
        results = {m: parse(agreement, tokens, *agreement_tables[m]) for m in agreement_tables}
        sets = {m: set(r.parses) for m, r in results.items()}
        assert sets[FILTERED] == sets[CATEGORY_ONLY] == sets[BOTTOM_UP], tokens
        edges = {m: r.stats.edges_entered for m, r in results.items()}
        assert edges[FILTERED] <= edges[CATEGORY_ONLY] <= edges[BOTTOM_UP], tokens


def test_animacy_prune_beats_category_filter(agreement, agreement_tables):
    tokens = "desks sleep".split()
    filtered = parse(agreement, tokens, *agreement_tables[FILTERED]).stats
    cat = parse(agreement, tokens, *agreement_tables[CATEGORY_ONLY]).stats
    assert filtered.edges_entered < cat.edges_entered
    assert filtered.edges_filtered > cat.edges_filtered


def test_random_grammars_filtered_equals_bottom_up():
    rng = random.Random(7)
    for seed in range(40):
        g = random_grammar(900 + seed).grammar
        table, ledger, _ = compile_table(g)
        tokens = random_sentence(g, rng)
        assert set(parse(g, tokens, table, ledger).parses) == set(parse(g, tokens).parses), seed


def test_stats_compare_report(agreement, agreement_tables):
    corpus = [("Kris", "barks"), ("desks", "sleep"), ("Kris", "flies")]
    report = stats_compare(agreement, *agreement_tables[FILTERED], corpus, *agreement_tables[CATEGORY_ONLY])
    assert report.sentences() == corpus
    assert report.lookup(("Kris", "flies"), FILTERED).error.startswith("unknown token")
    assert report.total(FILTERED) < report.total(CATEGORY_ONLY) <= report.total(BOTTOM_UP)
    text = report.render_text()
    assert "filtered vs category-only:" in text and "% fewer edges" in text
    rows = [json.loads(line) for line in report.render_structured().splitlines()]
    assert len(rows) == 9 and {r["mode"] for r in rows} == {BOTTOM_UP, CATEGORY_ONLY, FILTERED}
    assert report.render_structured() == stats_compare(
        agreement, *agreement_tables[FILTERED], corpus, *agreement_tables[CATEGORY_ONLY]
    ).render_structured()


def test_stats_compare_builds_category_table_when_missing(possessive, possessive_tables):
    report = stats_compare(possessive, *possessive_tables, [("desk",)])
    assert report.lookup(("desk",), CATEGORY_ONLY).parses == 1


def test_read_corpus():
    assert read_corpus("# c\n a b \n\nc\n") == [("a", "b"), ("c",)]
