"""Left-corner reachability table with per-path restrictors.

An entry relates a goal category to a rule that can rewrite one of its
left-corner descendants.  Its dag has the goal's features at the root and
the rule dag under ``lc``; sharing between the two carries top-down
constraints down the left-corner path.

Compilation walks left-corner chains from every goal.  When a chain
reaches a rule already on it, the dag after the earlier application (A)
is compared with the dag after the repeated one (B).  Unless A subsumes
B, features implicated in the growth are selected by :func:`detect`,
added to that path's restrictor and the cycle is propagated again, until
the cycle is closed under subsumption.
"""

from __future__ import annotations

import enum
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .dag import (
    CATEGORY,
    LEFT_CORNER,
    FeatureDag,
    PathEq,
    _build,
    compatible,
    constraint_dag,
    constraint_key,
    constraints_of,
    embed,
    entails,
    is_numbered,
    restrict,
    subsumes,
    unify,
)
from .grammar import Grammar, Rule


class MissingLeftCorner(ValueError):
    """The dag has no ``<lc 1>`` constituent to promote."""


class NonterminationGuard(RuntimeError):
    """Cycle closure exceeded its iteration bound."""


# ---------------------------------------------------------------------------
# single propagation steps


def promote(d: FeatureDag) -> FeatureDag:
    """Move the left-corner constituent up under ``lc``.

    The root keeps its own arcs (minus ``lc``); the node at ``<lc 1>``
    becomes the new ``<lc>``.  The old rule node and its numbered arcs
    are dropped, but anything it shares with the root stays reachable.
    """
    old_lc = d.node_at((LEFT_CORNER,))
    corner = d.node_at((LEFT_CORNER, "1"))
    if corner is None or isinstance(d.nodes[corner], str):
        raise MissingLeftCorner("dag has no <lc 1> constituent")
    nodes = d.nodes

    def atom_of(n):
        if n == "root":
            return None
        node = nodes[n]
        return node if isinstance(node, str) else None

    def arcs_of(n):
        if n == "root":
            kept = [(l, c) for l, c in nodes[0] if l != LEFT_CORNER and not is_numbered(l)]
            return kept + [(LEFT_CORNER, corner)]
        if n == old_lc:
            return [(l, c) for l, c in nodes[n] if l != LEFT_CORNER and not is_numbered(l)]
        return nodes[n]

    return _build("root", atom_of, arcs_of)


def propagate_step(d: FeatureDag, rule_dag: FeatureDag, restrictor: Iterable[str] = ()) -> Optional[FeatureDag]:
    """``restrict(promote(d)) ⊔ embed(rule_dag, <lc>)``; None if they clash.

    A rule whose category differs from ``<lc 1 cat>`` of ``d`` always
    clashes, so callers may pass any rule.
    """
    lower = restrict(promote(d), restrictor)
    return unify(lower, embed(rule_dag, (LEFT_CORNER,)))


def seed(goal: str, rule: Rule, restrictor: Iterable[str] = ()) -> Optional[FeatureDag]:
    """Entry for ``rule`` rewriting the goal itself.

    The root stands for the same constituent as the rule's left-hand
    side, so each top-level feature of the LHS is shared with the root,
    except those in ``restrictor``.
    """
    removed = frozenset(restrictor)
    d = unify(embed(FeatureDag.atom(goal), (CATEGORY,)), embed(rule.dag, (LEFT_CORNER,)))
    if d is None:
        return None
    for f in rule.dag.features():
        if is_numbered(f) or f == CATEGORY or f in removed:
            continue
        d = unify(d, constraint_dag(PathEq((f,), (LEFT_CORNER, f))))
        if d is None:
            return None
    return d


# ---------------------------------------------------------------------------
# detection


def _eligible(label: str, exclude: frozenset, vocabulary) -> bool:
    if label == CATEGORY or label == LEFT_CORNER or is_numbered(label):
        return False
    if label in exclude:
        return False
    return vocabulary is None or label in vocabulary


def _common_suffix(b: FeatureDag, n1: int, n2: int) -> Optional[tuple]:
    """Shortest nonempty p3 with n1·p3 and n2·p3 denoting the same value."""
    nodes = b.nodes
    queue = deque([(n1, n2, ())])
    seen = {(n1, n2)}
    while queue:
        x, y, p = queue.popleft()
        nx, ny = nodes[x], nodes[y]
        if isinstance(nx, str) or isinstance(ny, str):
            continue
        theirs = dict(ny)
        for label, cx in nx:
            cy = theirs.get(label)
            if cy is None:
                continue
            q = p + (label,)
            a, c = nodes[cx], nodes[cy]
            if cx == cy or (isinstance(a, str) and a == c):
                return q
            if (cx, cy) not in seen:
                seen.add((cx, cy))
                queue.append((cx, cy, q))
    return None


def _atom_below(b: FeatureDag, n: int) -> Optional[tuple]:
    """Shortest nonempty path from node n to an atom."""
    nodes = b.nodes
    queue = deque([(n, ())])
    seen = {n}
    while queue:
        x, p = queue.popleft()
        node = nodes[x]
        if isinstance(node, str):
            if p:
                return p
            continue
        for label, c in node:
            if c not in seen:
                seen.add(c)
                queue.append((c, p + (label,)))
    return None


def _case_path(case: int, x, b: FeatureDag) -> Optional[tuple]:
    if isinstance(x, PathEq):
        if case > 3:
            return None
        n1, n2 = b.node_at(x.left), b.node_at(x.right)
        if case == 1:
            if n1 is None or n2 is None:
                return None
            return _common_suffix(b, n1, n2)
        if case == 2:
            both = n1 is not None and n2 is not None
            if both and unify(b, constraint_dag(x)) is not None:
                return None
            if not both and not (n1 is None and n2 is None):
                return None
            if LEFT_CORNER in x.left and LEFT_CORNER not in x.right:
                return x.right
            return x.left
        if (n1 is None) != (n2 is None):
            return x.left if n1 is None else x.right
        return None
    if case < 4:
        return None
    n = b.node_at(x.path)
    if case == 4:
        if n is None:
            return x.path
        node = b.nodes[n]
        if isinstance(node, str) and node != x.value:
            return x.path
        return None
    if n is None:
        return None
    node = b.nodes[n]
    if isinstance(node, str) or not node:
        return None
    return _atom_below(b, n)


def _fallback(a: FeatureDag, b: FeatureDag, exclude: frozenset, vocabulary) -> frozenset:
    fresh = [p for p in b.paths() if p and not a.has_path(p)]
    fresh.sort(key=lambda p: (-len(p), p))
    for p in fresh:
        if _eligible(p[-1], exclude, vocabulary):
            return frozenset([p[-1]])
    for f in sorted(vocabulary or ()):
        if _eligible(f, exclude, vocabulary):
            return frozenset([f])
    return frozenset()


def detect_case(a: FeatureDag, b: FeatureDag, exclude: Iterable[str] = (), vocabulary=None):
    """Like :func:`detect`, also returning which case fired.

    The second value is 1-5, ``"fallback"``, or None when nothing could
    be selected.
    """
    exclude = frozenset(exclude)
    unmet = [x for x in constraints_of(a) if not entails(b, x)]

    def depth(x):
        if isinstance(x, PathEq):
            return len(x.left) + len(x.right)
        return len(x.path)

    unmet.sort(key=lambda x: (-depth(x), constraint_key(x)))
    for case in (1, 2, 3, 4, 5):
        for x in unmet:
            path = _case_path(case, x, b)
            if path and _eligible(path[-1], exclude, vocabulary):
                return frozenset([path[-1]]), case
    chosen = _fallback(a, b, exclude, vocabulary)
    return chosen, ("fallback" if chosen else None)


def detect(a: FeatureDag, b: FeatureDag, exclude: Iterable[str] = (), vocabulary=None) -> frozenset:
    """Select a feature implicated in the loop between ``a`` and ``b``.

    Every constraint of ``a`` that ``b`` does not entail is tested
    against the five selection cases, case by case; deeper constraints
    are tried first within a case.  The last label of the selected path
    is returned, never ``cat``, ``lc``, a numbered arc, or anything in
    ``exclude``.  If no case selects anything, the last label of the
    longest path of ``b`` missing from ``a`` is used, then the first
    unused feature of ``vocabulary``.
    """
    return detect_case(a, b, exclude, vocabulary)[0]


# ---------------------------------------------------------------------------
# table


class Insertion(enum.Enum):
    INSERTED = "inserted"
    REDUNDANT = "redundant"
    REPLACED = "replaced"


@dataclass
class ReachabilityEntry:
    goal: str
    dag: FeatureDag
    chain: tuple = ()
    restrictor: frozenset = frozenset()

    @property
    def rule_id(self) -> Optional[str]:
        return self.chain[-1] if self.chain else None


class ReachabilityTable:
    """Goal category -> antichain of entry dags under subsumption."""

    def __init__(self, base_restrictor: Iterable[str] = ()):
        self.base_restrictor = frozenset(base_restrictor)
        self.rows: dict = {}

    def entries(self, goal: str) -> list:
        return self.rows.get(goal, [])

    def goals(self) -> list:
        return sorted(self.rows)

    def __len__(self) -> int:
        return sum(len(v) for v in self.rows.values())

    def __iter__(self):
        for goal in self.goals():
            yield from self.rows[goal]

    def insert(self, entry: ReachabilityEntry):
        row = self.rows.setdefault(entry.goal, [])
        for old in row:
            if subsumes(old.dag, entry.dag):
                return Insertion.REDUNDANT, []
        replaced = [old for old in row if subsumes(entry.dag, old.dag)]
        if replaced:
            row[:] = [old for old in row if not any(old is r for r in replaced)]
        row.append(entry)
        return (Insertion.REPLACED if replaced else Insertion.INSERTED), replaced

    def dump(self, ledger: Optional["RestrictorLedger"] = None) -> str:
        blocks = []
        for goal in self.goals():
            rendered = []
            for e in self.rows[goal]:
                lines = [f"goal {goal}", f"  chain {' '.join(e.chain)}"]
                restrictor = sorted(e.restrictor - self.base_restrictor)
                lines.append("  restrictor {" + ", ".join(restrictor) + "}")
                lines.extend(f"  {c}" for c in constraints_of(e.dag))
                rendered.append("\n".join(lines))
            blocks.extend(sorted(rendered))
        return "\n\n".join(blocks) + ("\n" if blocks else "")


def insert_entry(table: ReachabilityTable, goal: str, d: FeatureDag, chain: tuple = (), restrictor=frozenset()):
    """Insert ``d`` under ``goal``; returns (Insertion, replaced entries)."""
    return table.insert(ReachabilityEntry(goal, d, tuple(chain), frozenset(restrictor)))


class RestrictorLedger:
    """Per-path restrictors; keys are (goal, rule-id tuple)."""

    def __init__(self):
        self._sets: dict = {}

    def get(self, key) -> frozenset:
        return self._sets.get(key, frozenset())

    def add(self, key, features: Iterable[str]) -> bool:
        old = self.get(key)
        new = old | frozenset(features)
        self._sets[key] = new
        return new != old

    def items(self):
        return sorted(self._sets.items())

    def as_dict(self) -> dict:
        return dict(self.items())

    def __len__(self) -> int:
        return len(self._sets)

    def __contains__(self, key) -> bool:
        return key in self._sets

    def dump(self) -> str:
        lines = []
        for (goal, chain), feats in self.items():
            lines.append(f"{goal} [{' '.join(chain)}] -> {{{', '.join(sorted(feats))}}}")
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass
class DetectionEvent:
    key: tuple
    features: frozenset
    case: object


@dataclass
class CompileReport:
    iterations: dict = field(default_factory=dict)
    detections: list = field(default_factory=list)
    restarts: int = 0
    seeds: int = 0
    wall_time: float = 0.0

    @property
    def fallbacks(self) -> list:
        return [e for e in self.detections if e.case == "fallback"]

    def render(self, ledger: RestrictorLedger, timing: bool = False) -> str:
        lines = [f"seeds: {self.seeds}", f"detections: {len(self.detections)}"]
        lines.append(f"fallback detections: {len(self.fallbacks)}")
        lines.append(f"restarts: {self.restarts}")
        for e in self.detections:
            goal, chain = e.key
            tag = "FALLBACK " if e.case == "fallback" else f"case {e.case} "
            lines.append(f"  {tag}{goal} [{' '.join(chain)}] + {{{', '.join(sorted(e.features))}}}")
        lines.append("restrictors:")
        for (goal, chain), feats in ledger.items():
            n = self.iterations.get((goal, chain), 0)
            lines.append(f"  {goal} [{' '.join(chain)}] -> {{{', '.join(sorted(feats))}}} ({n} iterations)")
        if timing:
            lines.append(f"wall time: {self.wall_time:.3f}s")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# compilation


class _Restart(Exception):
    def __init__(self, depth: int, dag: FeatureDag, restrictor: frozenset):
        self.depth = depth
        self.dag = dag
        self.restrictor = restrictor


@dataclass
class _Frame:
    rule: Rule
    dag: FeatureDag
    restrictor: frozenset
    # set when a cycle below this frame closes on a frame beneath it; such
    # a frame's continuations are only covered along the path it sits
    # on, so it must not be used to prune other branches
    leaky: bool = False


def default_guard(grammar: Grammar) -> int:
    return max(1, len(grammar.features)) * len(grammar.rules) * 4


class Precompiler:
    def __init__(self, grammar: Grammar, base_restrictor: Iterable[str] = (), max_iterations: Optional[int] = None):
        self.grammar = grammar
        self.base = frozenset(base_restrictor)
        self.max_iterations = max_iterations or default_guard(grammar)
        self.vocabulary = frozenset(grammar.restrictable)
        self.table = ReachabilityTable(self.base)
        self.ledger = RestrictorLedger()
        self.report = CompileReport()
        self._complete: list = []

    def goals(self) -> list:
        goals = {self.grammar.start}
        for r in self.grammar.rules:
            goals.add(r.lhs)
            goals.add(r.left_corner)
        return sorted(goals)

    def run(self):
        started = time.perf_counter()
        for goal in self.goals():
            self.table.rows.setdefault(goal, [])
            self._complete = []
            for rule in self.grammar.rules_for(goal):
                d = seed(goal, rule, self.base)
                if d is None:
                    continue
                self.report.seeds += 1
                self._explore([_Frame(rule, d, self.base)], goal)
        self.report.wall_time = time.perf_counter() - started
        return self.table, self.ledger, self.report

    def _insert(self, goal: str, d: FeatureDag, chain, restrictor: frozenset) -> None:
        self.table.insert(ReachabilityEntry(goal, d, tuple(chain), restrictor))

    def _explore(self, stack: list, goal: str) -> None:
        frame = stack[-1]
        mark = len(self._complete)
        chain = tuple(f.rule.id for f in stack)
        while True:
            self._insert(goal, frame.dag, chain, frame.restrictor)
            try:
                self._expand(stack, goal)
            except _Restart as restart:
                if restart.depth != len(stack) - 1:
                    raise
                del self._complete[mark:]
                self.report.restarts += 1
                frame.dag = restart.dag
                frame.restrictor = restart.restrictor
                frame.leaky = False
                continue
            if not frame.leaky:
                self._complete.append(frame.dag)
            return

    def _expand(self, stack: list, goal: str) -> None:
        d = stack[-1].dag
        corner = d.value_at((LEFT_CORNER, "1", CATEGORY))
        ids = [f.rule.id for f in stack]
        for rule in self.grammar.rules_for(corner):
            if rule.id in ids:
                j = ids.index(rule.id)
                for f in stack[j + 1 :]:
                    f.leaky = True
                self._close_cycle(stack, j, rule, goal)
                continue
            child = propagate_step(d, rule.dag, self.base)
            if child is None:
                continue
            if any(subsumes(done, child) for done in self._complete):
                continue
            stack.append(_Frame(rule, child, self.base))
            try:
                self._explore(stack, goal)
            finally:
                stack.pop()

    def _chain(self, start: FeatureDag, rules: list, restrictor: frozenset) -> Optional[FeatureDag]:
        d = start
        for rule in rules:
            d = propagate_step(d, rule.dag, restrictor)
            if d is None:
                return None
        return d

    def close_cycle(self, goal: str, path: tuple, a: FeatureDag, cycle: list) -> tuple:
        """Close one left-recursive cycle; returns the final A and its restrictor.

        ``path`` is the rule-id chain from the goal down to the point
        where the cycle's first rule would repeat, ``a`` the dag after
        that rule's earlier application and ``cycle`` the rules leading
        from ``a`` back to the same rule.
        """
        key = (goal, tuple(path))
        restrictor = self.base | self.ledger.get(key)
        b = self._chain(a, cycle, restrictor)
        count = 0
        if b is not None and not subsumes(a, b):
            first = True
            while True:
                count += 1
                if count > self.max_iterations:
                    raise NonterminationGuard(
                        f"cycle {goal} [{' '.join(path)}] exceeded {self.max_iterations} iterations"
                    )
                self._insert(goal, b, path, restrictor)
                if first or not compatible(a, b) or not subsumes(b, a):
                    feats, case = detect_case(a, b, restrictor, self.vocabulary)
                    self.report.detections.append(DetectionEvent(key, feats, case))
                    self.ledger.add(key, feats)
                    restrictor = self.base | self.ledger.get(key)
                else:
                    a = b
                first = False
                b = self._chain(a, cycle, restrictor)
                if b is None or subsumes(a, b):
                    break
        if key in self.ledger or count:
            self.report.iterations[key] = self.report.iterations.get(key, 0) + count
        return a, restrictor

    def _close_cycle(self, stack: list, j: int, rule: Rule, goal: str) -> None:
        path = tuple(f.rule.id for f in stack)
        cycle = [f.rule for f in stack[j + 1 :]] + [rule]
        a = stack[j].dag
        final, restrictor = self.close_cycle(goal, path, a, cycle)
        if final != a:
            raise _Restart(j, final, restrictor)


def compile_table(grammar: Grammar, base_restrictor: Iterable[str] = (), max_iterations: Optional[int] = None):
    """Compile the reachability table.

    Returns ``(table, ledger, report)``.  ``base_restrictor`` is removed
    at every step in addition to the per-path restrictors; passing every
    non-category feature yields the context-free backbone table.
    """
    return Precompiler(grammar, base_restrictor, max_iterations).run()


def close_path(goal: str, seed_dag: FeatureDag, ledger: RestrictorLedger, grammar: Grammar, max_iterations=None) -> list:
    """Compile the left-corner closure below one seed entry.

    Returns the table entries produced; ``ledger`` is updated in place.
    """
    rule = grammar.rule(_rule_id_of(seed_dag, grammar))
    pc = Precompiler(grammar, max_iterations=max_iterations)
    pc.ledger = ledger
    pc.table.rows.setdefault(goal, [])
    pc._explore([_Frame(rule, seed_dag, frozenset())], goal)
    return [e.dag for e in pc.table.entries(goal)]


def _rule_id_of(d: FeatureDag, grammar: Grammar) -> str:
    lc = d.get((LEFT_CORNER,))
    for r in grammar.rules:
        if lc is not None and subsumes(r.dag, lc):
            return r.id
    raise ValueError("seed dag does not carry a rule of this grammar under <lc>")


def category_only(grammar: Grammar) -> frozenset:
    """Restrictor leaving only the category feature."""
    return frozenset(grammar.restrictable)
