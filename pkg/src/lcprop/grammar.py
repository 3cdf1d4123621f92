"""Grammar text format, rule records and rule dags.

Format::

    start NP
    rule r1: NP0 -> NP1 POS NP2
      <NP0 head> = <NP2 head>
      <NP0 head sem owner> = <NP1 head sem>
    lex Kris: NP  <head sem pred> = kris
    lex 's: POS

Constituent labels carry optional trailing digits; the category is the
label with those digits removed.  Lexical equations are written over the
word's own features.  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .dag import (
    CATEGORY,
    ConstEq,
    EMPTY,
    FeatureDag,
    PathEq,
    constraint_dag,
    embed,
    is_numbered,
    unify,
)


class GrammarError(Exception):
    """Base class for problems found while loading a grammar."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class GrammarSyntaxError(GrammarError):
    pass


class UndeclaredConstituent(GrammarError):
    pass


class DuplicateRuleId(GrammarError):
    pass


class InconsistentEquations(GrammarError):
    pass


class GrammarValidationError(GrammarError):
    pass


@dataclass(frozen=True)
class Rule:
    id: str
    lhs: str
    rhs: tuple
    labels: tuple
    equations: tuple
    line: int = 0
    dag: FeatureDag = field(default=EMPTY, compare=False, repr=False)

    @property
    def left_corner(self) -> str:
        return self.rhs[0]

    def __str__(self) -> str:
        head = f"{self.id}: {self.labels[0]} -> {' '.join(self.labels[1:])}"
        eqs = "".join(f"\n  {e}" for e in self.equations)
        return head + eqs


@dataclass(frozen=True)
class LexEntry:
    form: str
    category: str
    dag: FeatureDag


@dataclass
class Grammar:
    rules: list
    lexicon: dict
    start: str
    features: frozenset = frozenset()

    def __post_init__(self) -> None:
        self._by_id = {r.id: r for r in self.rules}
        self._by_corner: dict = {}
        for r in self.rules:
            self._by_corner.setdefault(r.left_corner, []).append(r)

    def rule(self, rule_id: str) -> Rule:
        return self._by_id[rule_id]

    def rules_with_corner(self, category: str) -> list:
        return self._by_corner.get(category, [])

    def rules_for(self, category: str) -> list:
        return [r for r in self.rules if r.lhs == category]

    @property
    def categories(self) -> set:
        cats = {self.start}
        for r in self.rules:
            cats.add(r.lhs)
            cats.update(r.rhs)
        for entries in self.lexicon.values():
            cats.update(e.category for e in entries)
        return cats

    @property
    def restrictable(self) -> list:
        """Features that may appear in a restrictor, sorted."""
        return sorted(f for f in self.features if f != CATEGORY)


_TOKEN = re.compile(r"<[^<>]*>|=|[^\s<>=]+")
_LABEL = re.compile(r"^(.*?[^\d])(\d*)$")


def category_of(label: str) -> str:
    m = _LABEL.match(label)
    if not m:
        raise ValueError(label)
    return m.group(1)


def _tokens(text: str, offset: int):
    for m in _TOKEN.finditer(text):
        yield m.group(0), offset + m.start() + 1


def _equations(text: str, lineno: int, offset: int) -> list:
    """Parse zero or more ``lhs = rhs`` triples from a line fragment."""
    toks = list(_tokens(text, offset))
    out = []
    i = 0
    while i < len(toks):
        left, lcol = toks[i]
        if not left.startswith("<"):
            raise GrammarSyntaxError(f"expected a path, got {left!r}", lineno, lcol)
        if i + 1 < len(toks) and toks[i + 1][0] != "=":
            eq, ecol = toks[i + 1]
            raise GrammarSyntaxError(f"expected '=', got {eq!r}", lineno, ecol)
        if i + 2 >= len(toks):
            raise GrammarSyntaxError(f"incomplete equation at {left!r}", lineno, lcol)
        right, rcol = toks[i + 2]
        if right == "=":
            raise GrammarSyntaxError("expected a path or constant", lineno, rcol)
        lp = tuple(left[1:-1].split())
        if not lp:
            raise GrammarSyntaxError("empty path", lineno, lcol)
        if right.startswith("<"):
            rp = tuple(right[1:-1].split())
            if not rp:
                raise GrammarSyntaxError("empty path", lineno, rcol)
            out.append((PathEq(lp, rp), lineno, lcol))
        else:
            out.append((ConstEq(lp, right), lineno, lcol))
        i += 3
    return out


def _resolve(path: tuple, prefixes: dict, rule_id: str, lineno: int, col: int) -> tuple:
    label = path[0]
    if label not in prefixes:
        raise UndeclaredConstituent(
            f"rule {rule_id}: constituent {label!r} is not declared", lineno, col
        )
    if prefixes[label] is None:
        raise GrammarSyntaxError(
            f"rule {rule_id}: label {label!r} names more than one constituent", lineno, col
        )
    return prefixes[label] + path[1:]


def _install(base: FeatureDag, equations, what: str, lineno: int) -> FeatureDag:
    result = base
    for eq in equations:
        part = constraint_dag(eq)
        result = None if part is None else unify(result, part)
        if result is None:
            raise InconsistentEquations(f"{what}: equation {eq} cannot be satisfied", lineno)
    return result


def rule_to_dag(rule: Rule) -> FeatureDag:
    """Rule dag: LHS at the root, constituent i under arc ``i``."""
    parts = [embed(FeatureDag.atom(rule.lhs), (CATEGORY,))]
    for i, cat in enumerate(rule.rhs, 1):
        parts.append(embed(FeatureDag.atom(cat), (str(i), CATEGORY)))
    base = EMPTY
    for p in parts:
        base = unify(base, p)
    return _install(base, rule.equations, f"rule {rule.id}", rule.line)


class _Pending:
    def __init__(self, kind, lineno, **kw):
        self.kind = kind
        self.lineno = lineno
        self.equations: list = []
        self.__dict__.update(kw)


def load_grammar(text: str) -> Grammar:
    """Parse grammar text into a validated :class:`Grammar`."""
    start = None
    items: list = []
    current: Optional[_Pending] = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line[0].isspace():
            if current is None:
                raise GrammarSyntaxError("indented line outside a rule or lex entry", lineno, 1)
            body = line.lstrip()
            current.equations.extend(_equations(body, lineno, len(line) - len(body)))
            continue
        current = None
        keyword, _, rest = line.partition(" ")
        rest_offset = len(keyword) + 1
        if keyword == "start":
            name = rest.strip()
            if not name or len(name.split()) != 1:
                raise GrammarSyntaxError("expected 'start CATEGORY'", lineno, 1)
            if start is not None:
                raise GrammarSyntaxError("start symbol declared twice", lineno, 1)
            start = name
        elif keyword == "rule":
            head, colon, body = rest.partition(":")
            rule_id = head.strip()
            if not colon or not rule_id or len(rule_id.split()) != 1:
                raise GrammarSyntaxError("expected 'rule ID: LHS -> RHS...'", lineno, rest_offset + 1)
            lhs_text, arrow, rhs_text = body.partition("->")
            lhs_labels = lhs_text.split()
            rhs_labels = rhs_text.split()
            if not arrow or len(lhs_labels) != 1:
                raise GrammarSyntaxError("expected 'LHS -> RHS...'", lineno, rest_offset + len(head) + 2)
            if not rhs_labels:
                raise GrammarSyntaxError(f"rule {rule_id} has an empty right-hand side", lineno, len(line))
            current = _Pending("rule", lineno, id=rule_id, labels=lhs_labels + rhs_labels)
            items.append(current)
        elif keyword == "lex":
            form_text, colon, body = rest.partition(":")
            form = form_text.strip()
            if not colon or not form or len(form.split()) != 1:
                raise GrammarSyntaxError("expected 'lex FORM: CATEGORY'", lineno, rest_offset + 1)
            body_stripped = body.lstrip()
            parts = body_stripped.split(None, 1)
            if not parts or parts[0].startswith("<"):
                raise GrammarSyntaxError(f"lex {form}: missing category", lineno, len(line))
            category = parts[0]
            current = _Pending("lex", lineno, form=form, category=category)
            items.append(current)
            if len(parts) > 1:
                tail_col = len(line) - len(parts[1])
                current.equations.extend(_equations(parts[1], lineno, tail_col))
        else:
            raise GrammarSyntaxError(f"unknown directive {keyword!r}", lineno, 1)

    rules: list = []
    lexicon: dict = {}
    seen_ids: dict = {}
    for item in items:
        if item.kind == "rule":
            rules.append(_compile_rule(item, seen_ids))
        else:
            entry_dag = _install(
                embed(FeatureDag.atom(item.category), (CATEGORY,)),
                [eq for eq, _, _ in item.equations],
                f"lex {item.form}",
                item.lineno,
            )
            lexicon.setdefault(item.form, []).append(LexEntry(item.form, item.category, entry_dag))

    if not rules:
        raise GrammarValidationError("grammar must contain at least one rule")
    if start is None:
        start = rules[0].lhs
    features = set()
    for r in rules:
        features |= r.dag.labels()
    for entries in lexicon.values():
        for e in entries:
            features |= e.dag.labels()
    features = frozenset(f for f in features if not is_numbered(f))
    return Grammar(rules=rules, lexicon=lexicon, start=start, features=features)


def _compile_rule(item: _Pending, seen_ids: dict) -> Rule:
    if item.id in seen_ids:
        raise DuplicateRuleId(
            f"rule id {item.id!r} already used on line {seen_ids[item.id]}", item.lineno
        )
    seen_ids[item.id] = item.lineno
    labels = item.labels
    prefixes: dict = {}
    cats = []
    for i, label in enumerate(labels):
        if label in prefixes:
            # only an error if an equation refers to it
            prefixes[label] = None
            cats.append(category_of(label))
            continue
        try:
            cat = category_of(label)
        except ValueError:
            raise GrammarSyntaxError(f"rule {item.id}: bad constituent label {label!r}", item.lineno)
        prefixes[label] = () if i == 0 else (str(i),)
        cats.append(cat)
    equations = []
    for eq, lineno, col in item.equations:
        if isinstance(eq, PathEq):
            equations.append(
                PathEq(
                    _resolve(eq.left, prefixes, item.id, lineno, col),
                    _resolve(eq.right, prefixes, item.id, lineno, col),
                )
            )
        else:
            equations.append(ConstEq(_resolve(eq.path, prefixes, item.id, lineno, col), eq.value))
    if len(cats) == 2 and cats[0] == cats[1] and not equations:
        raise GrammarValidationError(
            f"rule {item.id}: {cats[0]} -> {cats[1]} with no equations is a vacuous cycle",
            item.lineno,
        )
    rule = Rule(
        id=item.id,
        lhs=cats[0],
        rhs=tuple(cats[1:]),
        labels=tuple(labels),
        equations=tuple(equations),
        line=item.lineno,
    )
    object.__setattr__(rule, "dag", rule_to_dag(rule))
    return rule


def load_grammar_file(path) -> Grammar:
    with open(path, encoding="utf-8") as fh:
        return load_grammar(fh.read())
