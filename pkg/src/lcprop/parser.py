"""Left-corner chart parser with optional top-down filtering.

The chart is filled left to right.  A passive edge triggers every rule
whose first constituent it can fill; with a reachability table, the rule
is only applied if some goal waiting at the edge's start position has a
table entry compatible with the rule instance.  Goals are the start
symbol at position 0 and the next expected constituent of every active
edge.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .dag import CATEGORY, LEFT_CORNER, FeatureDag, drop_root_arcs, embed, is_numbered, restrict, unify
from .grammar import Grammar
from .precompile import ReachabilityTable, RestrictorLedger, category_only, compile_table

BOTTOM_UP = "bottom-up"
CATEGORY_ONLY = "category-only"
FILTERED = "filtered"
MODES = (BOTTOM_UP, CATEGORY_ONLY, FILTERED)


class UnknownToken(ValueError):
    def __init__(self, form: str, position: int):
        self.form = form
        self.position = position
        super().__init__(f"unknown token {form!r} at position {position}")


class ParseLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Edge:
    start: int
    end: int
    dag: FeatureDag
    rule: Optional[str] = None
    dot: int = 0
    serial: int = field(default=0, compare=False)

    @property
    def passive(self) -> bool:
        return self.rule is None

    @property
    def category(self) -> Optional[str]:
        return self.dag.value_at((CATEGORY,))


@dataclass
class ParseStats:
    edges_entered: int = 0
    edges_filtered: int = 0
    unifications_attempted: int = 0
    duplicates: int = 0


@dataclass
class ParseResult:
    parses: list
    stats: ParseStats

    def __len__(self) -> int:
        return len(self.parses)


class Chart:
    def __init__(self, size: int):
        self.size = size
        self._seen: set = set()
        self.edges: list = []
        self.active_ending: list = [[] for _ in range(size + 1)]
        self.passive_starting: list = [[] for _ in range(size + 1)]
        self.stats = ParseStats()

    def add(self, edge: Edge) -> bool:
        key = (edge.start, edge.end, edge.rule, edge.dot, edge.dag)
        if key in self._seen:
            self.stats.duplicates += 1
            return False
        self._seen.add(key)
        self.edges.append(edge)
        self.stats.edges_entered += 1
        if edge.passive:
            self.passive_starting[edge.start].append(edge)
        else:
            self.active_ending[edge.end].append(edge)
        return True

    def passives(self, start: int, end: int) -> list:
        return [e for e in self.passive_starting[start] if e.end == end]


def _constituent(d: FeatureDag) -> FeatureDag:
    return drop_root_arcs(d, is_numbered)


class LeftCornerParser:
    def __init__(
        self,
        grammar: Grammar,
        table: Optional[ReachabilityTable] = None,
        ledger: Optional[RestrictorLedger] = None,
        max_edges: int = 200_000,
    ):
        self.grammar = grammar
        self.table = table
        self.ledger = ledger
        self.max_edges = max_edges
        self._rows: dict = {}
        if table is not None:
            for goal in table.goals():
                row = []
                for e in table.entries(goal):
                    restrictor = e.restrictor | table.base_restrictor
                    if ledger is not None:
                        restrictor |= ledger.get((goal, e.chain))
                    lhs = e.dag.value_at((LEFT_CORNER, CATEGORY))
                    corner = e.dag.value_at((LEFT_CORNER, "1", CATEGORY))
                    row.append((e.dag, frozenset(restrictor), lhs, corner))
                self._rows[goal] = row

    @property
    def filtered(self) -> bool:
        return self.table is not None

    def parse(self, tokens: Sequence[str]) -> ParseResult:
        tokens = list(tokens)
        for i, form in enumerate(tokens):
            if form not in self.grammar.lexicon:
                raise UnknownToken(form, i)
        n = len(tokens)
        chart = Chart(n)
        self._chart = chart
        self._goals: list = [dict() for _ in range(n + 1)]
        self._licence_cache: dict = {}
        start_goal = embed(FeatureDag.atom(self.grammar.start), (CATEGORY,))
        self._goals[0][start_goal] = None
        serial = 0
        for k, form in enumerate(tokens):
            agenda = []
            for entry in self.grammar.lexicon[form]:
                agenda.append(Edge(k, k + 1, entry.dag))
            while agenda:
                edge = agenda.pop(0)
                serial += 1
                edge = Edge(edge.start, edge.end, edge.dag, edge.rule, edge.dot, serial)
                if not chart.add(edge):
                    continue
                if chart.stats.edges_entered > self.max_edges:
                    raise ParseLimitExceeded(f"more than {self.max_edges} edges")
                agenda.extend(self._process(edge))
        parses = []
        seen = set()
        for e in chart.passives(0, n):
            if e.category == self.grammar.start and e.dag not in seen:
                seen.add(e.dag)
                parses.append(e.dag)
        return ParseResult(parses, chart.stats)

    def _unify(self, a, b):
        self._chart.stats.unifications_attempted += 1
        return unify(a, b)

    def _advance(self, active: Edge, passive: Edge):
        label = str(active.dot)
        if active.dag.value_at((label, CATEGORY)) != passive.category:
            return None
        merged = self._unify(active.dag, embed(passive.dag, (label,)))
        if merged is None:
            return None
        rule = self.grammar.rule(active.rule)
        if active.dot == len(rule.rhs):
            return Edge(active.start, passive.end, _constituent(merged))
        return Edge(active.start, passive.end, merged, active.rule, active.dot + 1)

    def _process(self, edge: Edge) -> list:
        out = []
        if edge.passive:
            for active in list(self._chart.active_ending[edge.start]):
                new = self._advance(active, edge)
                if new is not None:
                    out.append(new)
            for rule in self.grammar.rules_with_corner(edge.category):
                candidate = self._unify(rule.dag, embed(edge.dag, ("1",)))
                if candidate is None:
                    continue
                if self.filtered and not self._licensed(edge.start, rule, candidate):
                    self._chart.stats.edges_filtered += 1
                    continue
                if len(rule.rhs) == 1:
                    out.append(Edge(edge.start, edge.end, _constituent(candidate)))
                else:
                    out.append(Edge(edge.start, edge.end, candidate, rule.id, 2))
        else:
            goal = edge.dag.get((str(edge.dot),))
            self._goals[edge.end].setdefault(goal, None)
            for passive in list(self._chart.passive_starting[edge.end]):
                new = self._advance(edge, passive)
                if new is not None:
                    out.append(new)
        return out

    def _licensed(self, position: int, rule, candidate: FeatureDag) -> bool:
        lowered = embed(candidate, (LEFT_CORNER,))
        for goal in self._goals[position]:
            category = goal.value_at((CATEGORY,))
            for i, (entry, restrictor, lhs, corner) in enumerate(self._rows.get(category, ())):
                if lhs != rule.lhs or corner != rule.left_corner:
                    continue
                key = (goal, category, i)
                top = self._licence_cache.get(key, False)
                if top is False:
                    top = self._unify(entry, restrict(goal, restrictor))
                    self._licence_cache[key] = top
                if top is not None and self._unify(top, lowered) is not None:
                    return True
        return False


def parse(
    grammar: Grammar,
    tokens: Sequence[str],
    table: Optional[ReachabilityTable] = None,
    ledger: Optional[RestrictorLedger] = None,
    max_edges: int = 200_000,
) -> ParseResult:
    """Parse ``tokens``; with a table, rule applications are filtered top-down."""
    if (table is None) != (ledger is None):
        raise ValueError("table and ledger must be given together")
    return LeftCornerParser(grammar, table, ledger, max_edges).parse(tokens)


# ---------------------------------------------------------------------------
# comparison harness


@dataclass
class SentenceRecord:
    tokens: tuple
    mode: str
    edges_entered: Optional[int]
    parses: Optional[int]
    error: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "tokens": list(self.tokens),
            "mode": self.mode,
            "edges_entered": self.edges_entered,
            "parses": self.parses,
            "error": self.error,
        }


def _reduction(new: int, old: int) -> float:
    return 0.0 if old == 0 else 100.0 * (old - new) / old


@dataclass
class ComparisonReport:
    records: list

    def sentences(self) -> list:
        seen = []
        for r in self.records:
            if r.tokens not in seen:
                seen.append(r.tokens)
        return seen

    def lookup(self, tokens, mode) -> SentenceRecord:
        for r in self.records:
            if r.tokens == tuple(tokens) and r.mode == mode:
                return r
        raise KeyError((tokens, mode))

    def total(self, mode: str) -> int:
        return sum(r.edges_entered or 0 for r in self.records if r.mode == mode and r.error is None)

    def reduction(self, mode: str, baseline: str) -> float:
        """Percentage fewer edges in ``mode`` than in ``baseline``."""
        return _reduction(self.total(mode), self.total(baseline))

    def render_text(self) -> str:
        header = f"{'sentence':<40} {'bottom-up':>10} {'cat-only':>10} {'filtered':>10} {'parses':>7}"
        lines = [header, "-" * len(header)]
        for tokens in self.sentences():
            recs = [self.lookup(tokens, m) for m in MODES]
            text = " ".join(tokens)
            if len(text) > 40:
                text = text[:37] + "..."
            errors = [r.error for r in recs if r.error]
            if errors:
                lines.append(f"{text:<40} error: {errors[0]}")
                continue
            counts = "/".join(str(r.parses) for r in recs)
            if len({r.parses for r in recs}) == 1:
                counts = str(recs[0].parses)
            lines.append(
                f"{text:<40} {recs[0].edges_entered:>10} {recs[1].edges_entered:>10} "
                f"{recs[2].edges_entered:>10} {counts:>7}"
            )
        lines.append("-" * len(header))
        lines.append(
            f"{'total':<40} {self.total(BOTTOM_UP):>10} {self.total(CATEGORY_ONLY):>10} "
            f"{self.total(FILTERED):>10}"
        )
        lines.append(f"filtered vs category-only: {self.reduction(FILTERED, CATEGORY_ONLY):.1f}% fewer edges")
        lines.append(f"filtered vs bottom-up: {self.reduction(FILTERED, BOTTOM_UP):.1f}% fewer edges")
        return "\n".join(lines) + "\n"

    def render_structured(self) -> str:
        return "".join(json.dumps(r.as_dict(), sort_keys=True) + "\n" for r in self.records)


def stats_compare(
    grammar: Grammar,
    table: ReachabilityTable,
    ledger: RestrictorLedger,
    corpus: Iterable[Sequence[str]],
    category_table: Optional[ReachabilityTable] = None,
    category_ledger: Optional[RestrictorLedger] = None,
) -> ComparisonReport:
    """Edge counts for bottom-up, category-only and fully filtered parsing."""
    if category_table is None:
        category_table, category_ledger, _ = compile_table(grammar, category_only(grammar))
    parsers = {
        BOTTOM_UP: LeftCornerParser(grammar),
        CATEGORY_ONLY: LeftCornerParser(grammar, category_table, category_ledger),
        FILTERED: LeftCornerParser(grammar, table, ledger),
    }
    records = []
    for tokens in corpus:
        tokens = tuple(tokens)
        for mode in MODES:
            try:
                result = parsers[mode].parse(tokens)
            except (UnknownToken, ParseLimitExceeded) as exc:
                records.append(SentenceRecord(tokens, mode, None, None, str(exc)))
                continue
            records.append(SentenceRecord(tokens, mode, result.stats.edges_entered, len(result.parses)))
    return ComparisonReport(records)


def read_corpus(text: str) -> list:
    """One sentence per line, whitespace-tokenized; ``#`` lines skipped."""
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(tuple(line.split()))
    return out
