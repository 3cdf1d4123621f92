"""Shared helpers for the test suite: random grammars and dag strategies."""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from hypothesis import strategies as st

from lcprop.dag import EMPTY, ConstEq, FeatureDag, PathEq, constraint_dag, unify
from lcprop.grammar import GrammarError, load_grammar

DATA = Path(__file__).resolve().parent.parent / "src" / "lcprop" / "data"

# ---------------------------------------------------------------------------
# dag strategies

LABELS = ("f", "g", "h")
ATOMS = ("a", "b")

paths = st.lists(st.sampled_from(LABELS), min_size=1, max_size=3).map(tuple)
constraints = st.one_of(
    st.builds(PathEq, paths, paths),
    st.builds(ConstEq, paths, st.sampled_from(ATOMS)),
)


def build(cs) -> FeatureDag:
    """Unify constraints left to right, skipping any that would fail."""
    d = EMPTY
    for c in cs:
        part = constraint_dag(c)
        if part is None:
            continue
        merged = unify(d, part)
        if merged is not None:
            d = merged
    return d


dags = st.lists(constraints, max_size=5).map(build)
labels = st.sampled_from(LABELS)
restrictors = st.frozensets(labels, max_size=3)


# ---------------------------------------------------------------------------
# random grammars

NONTERMINALS = ("S", "A", "B")
PRETERMINALS = ("X", "Y")
FEATURES = ("f", "g", "h", "k", "m")
VALUES = ("a", "b")
FORMS = {"X": ("x", "xx"), "Y": ("y", "yy")}


@dataclass
class RandomGrammar:
    text: str
    seed: int

    @property
    def grammar(self):
        return load_grammar(self.text)

    @property
    def forms(self) -> list:
        return sorted(self.grammar.lexicon)


def _rule_line(rid, cats):
    labels = [f"{c}{i}" for i, c in enumerate(cats)]
    return labels, f"rule {rid}: {labels[0]} -> {' '.join(labels[1:])}"


def _growing(rng, labels, feats):
    """An equation that lengthens a path each time the cycle is taken."""
    f = rng.choice(feats)
    g = rng.choice(feats)
    if rng.random() < 0.5:
        return f"<{labels[0]} {f} {g}> = <{labels[1]} {f}>"
    return f"<{labels[0]} {f}> = <{labels[1]} {f} {g}>"


def _random_equation(rng, labels, feats):
    i = rng.randrange(len(labels))
    f = rng.choice(feats)
    if rng.random() < 0.5:
        j = rng.randrange(len(labels))
        g = rng.choice(feats)
        if i == j and f == g:
            return None
        return f"<{labels[i]} {f}> = <{labels[j]} {g}>"
    return f"<{labels[i]} {f}> = {rng.choice(VALUES)}"


def random_grammar(seed: int) -> RandomGrammar:
    """A small grammar with at least one feature-growing left-recursive cycle.

    At most 6 rules and 5 non-category features.  Unary rules only go
    from an earlier to a later category in a fixed order, so the parse
    forest of any input is finite.
    """
    attempt = 0
    while True:
        text = _attempt(random.Random(seed * 7919 + attempt))
        try:
            load_grammar(text)
            return RandomGrammar(text, seed)
        except GrammarError:
            attempt += 1


def _attempt(rng) -> str:
    feats = rng.sample(FEATURES, rng.randint(1, 5))
    lines = ["start S"]
    rules = []
    indirect = rng.random() < 0.4
    if indirect:
        rules.append(("c1", ["S", "A", rng.choice(PRETERMINALS)], True))
        rules.append(("c2", ["A", "S", rng.choice(PRETERMINALS)], rng.random() < 0.5))
    else:
        cat = rng.choice(("S", "A"))
        rules.append(("c1", [cat, cat] + [rng.choice(PRETERMINALS) for _ in range(rng.randint(1, 2))], True))
    # base cases so every nonterminal can bottom out
    for cat in NONTERMINALS:
        rules.append((f"b{cat}", [cat, rng.choice(PRETERMINALS)], False))
    while len(rules) < rng.randint(len(rules), 6):
        lhs = rng.choice(NONTERMINALS)
        rhs = []
        for k in range(rng.randint(1, 3)):
            rhs.append(rng.choice(NONTERMINALS + PRETERMINALS))
        if len(rhs) == 1 and rhs[0] in NONTERMINALS and NONTERMINALS.index(rhs[0]) <= NONTERMINALS.index(lhs):
            continue
        rules.append((f"r{len(rules)}", [lhs] + rhs, False))
    for rid, cats, grows in rules[:6]:
        labels, head = _rule_line(rid, cats)
        lines.append(head)
        if grows:
            lines.append("  " + _growing(rng, labels, feats))
        for _ in range(rng.randint(0, 2)):
            eq = _random_equation(rng, labels, feats)
            if eq:
                lines.append("  " + eq)
    for cat in PRETERMINALS:
        for form in FORMS[cat]:
            eqs = []
            for f in rng.sample(feats, rng.randint(0, min(2, len(feats)))):
                eqs.append(f"<{f}> = {rng.choice(VALUES)}")
            lines.append(f"lex {form}: {cat} {' '.join(eqs)}".rstrip())
    return "\n".join(lines) + "\n"


def random_sentence(grammar, rng, max_len: int = 8) -> tuple:
    """Half the time a derivation from the category backbone, else noise."""
    forms = {}
    for form, entries in grammar.lexicon.items():
        for e in entries:
            forms.setdefault(e.category, []).append(form)
    if rng.random() < 0.5:
        for _ in range(20):
            out = _derive(grammar, grammar.start, forms, rng, 6)
            if out is not None and 1 <= len(out) <= max_len:
                return tuple(out)
    all_forms = sorted(grammar.lexicon)
    return tuple(rng.choice(all_forms) for _ in range(rng.randint(1, max_len)))


def _derive(grammar, cat, forms, rng, depth):
    if cat in forms and (cat not in {r.lhs for r in grammar.rules} or rng.random() < 0.5):
        return [rng.choice(forms[cat])]
    options = grammar.rules_for(cat)
    if not options or depth == 0:
        return None
    rule = rng.choice(options)
    out = []
    for c in rule.rhs:
        sub = _derive(grammar, c, forms, rng, depth - 1)
        if sub is None:
            return None
        out.extend(sub)
        if len(out) > 8:
            return None
    return out
