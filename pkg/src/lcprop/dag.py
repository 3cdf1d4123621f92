"""Feature structures represented as rooted directed acyclic graphs.

A :class:`FeatureDag` is immutable.  Nodes are stored in a canonical
order (depth-first, arcs visited by sorted label, shared nodes numbered
at first visit), so two dags are isomorphic exactly when their node
tuples are equal.  Coreference is node sharing.  Atomic values are
extensional: two atoms with the same symbol are interchangeable, and the
canonical form never shares an atom node between paths.

Failure of an operation (constant clash, cyclic result, missing path) is
signalled by returning ``None``.
"""

from __future__ import annotations

from collections import deque
from typing import Callable, Iterable, Iterator, NamedTuple, Optional, Union

Path = tuple

CATEGORY = "cat"
LEFT_CORNER = "lc"


def shortlex(path: Path) -> tuple:
    """Sort key for paths: shorter first, then lexicographic by label."""
    return (len(path), path)


def is_numbered(label: str) -> bool:
    return label.isdigit()


class PathEq(NamedTuple):
    """``left = right`` between two paths of length >= 1."""

    left: Path
    right: Path

    def __str__(self) -> str:
        return f"{format_path(self.left)} = {format_path(self.right)}"


class ConstEq(NamedTuple):
    """``path = value`` for an atomic constant."""

    path: Path
    value: str

    def __str__(self) -> str:
        return f"{format_path(self.path)} = {self.value}"


Constraint = Union[PathEq, ConstEq]


def constraint_key(c: Constraint) -> tuple:
    if isinstance(c, PathEq):
        return (shortlex(c.left), 0, shortlex(c.right), "")
    return (shortlex(c.path), 1, (0, ()), c.value)


def format_path(path: Path) -> str:
    return "<" + " ".join(path) + ">"


class _Cycle(Exception):
    pass


def _build(root, atom_of: Callable, arcs_of: Callable) -> FeatureDag:
    """Canonicalize an arbitrary node graph into a FeatureDag.

    ``atom_of(n)`` returns the constant at ``n`` or None; ``arcs_of(n)``
    returns (label, child) pairs.  Raises _Cycle on a cyclic graph.
    """
    index: dict = {}
    finished: set = set()
    nodes: list = []

    def visit(n):
        value = atom_of(n)
        if value is not None:
            nodes.append(value)
            return len(nodes) - 1
        if n in index:
            if n not in finished:
                raise _Cycle()
            return index[n]
        i = len(nodes)
        nodes.append(None)
        index[n] = i
        out = []
        for label, child in sorted(arcs_of(n), key=lambda arc: arc[0]):
            out.append((label, visit(child)))
        nodes[i] = tuple(out)
        finished.add(n)
        return i

    visit(root)
    return FeatureDag._from_nodes(tuple(nodes))


class FeatureDag:
    """Immutable feature structure.

    Each node is either a ``str`` (an atom) or a tuple of ``(label,
    child_index)`` pairs sorted by label; the empty tuple is the fully
    underspecified node.  The root is node 0.
    """

    __slots__ = ("_nodes", "_hash")

    def __init__(self) -> None:
        self._nodes: tuple = ((),)
        self._hash = hash(self._nodes)

    @classmethod
    def _from_nodes(cls, nodes: tuple) -> FeatureDag:
        d = cls.__new__(cls)
        d._nodes = nodes
        d._hash = hash(nodes)
        return d

    @classmethod
    def empty(cls) -> FeatureDag:
        return cls()

    @classmethod
    def atom(cls, value: str) -> FeatureDag:
        return cls._from_nodes((value,))

    @classmethod
    def from_dict(cls, tree) -> FeatureDag:
        """Build a dag from nested dicts with string leaves.

        A dict object that occurs twice becomes a shared node.
        """
        objects: dict = {}

        def key(obj):
            objects[id(obj)] = obj
            return id(obj)

        def atom_of(n):
            obj = objects[n]
            return obj if isinstance(obj, str) else None

        def arcs_of(n):
            return [(label, key(child)) for label, child in objects[n].items()]

        return _build(key(tree), atom_of, arcs_of)

    @property
    def nodes(self) -> tuple:
        return self._nodes

    @property
    def is_atom(self) -> bool:
        return isinstance(self._nodes[0], str)

    @property
    def is_empty(self) -> bool:
        return self._nodes[0] == ()

    @property
    def value(self) -> Optional[str]:
        """The constant at the root, or None for a non-atomic dag."""
        root = self._nodes[0]
        return root if isinstance(root, str) else None

    def features(self) -> tuple:
        """Labels of the root's outgoing arcs, sorted."""
        root = self._nodes[0]
        if isinstance(root, str):
            return ()
        return tuple(label for label, _ in root)

    def node_at(self, path: Iterable[str]) -> Optional[int]:
        n = 0
        for label in path:
            node = self._nodes[n]
            if isinstance(node, str):
                return None
            for lab, child in node:
                if lab == label:
                    n = child
                    break
            else:
                return None
        return n

    def has_path(self, path: Iterable[str]) -> bool:
        return self.node_at(path) is not None

    def get(self, path: Iterable[str]) -> Optional[FeatureDag]:
        return extract(self, path)

    def value_at(self, path: Iterable[str]) -> Optional[str]:
        n = self.node_at(path)
        if n is None:
            return None
        node = self._nodes[n]
        return node if isinstance(node, str) else None

    def paths(self) -> list:
        """Every defined path, including the empty one, in shortlex order."""
        out = []

        def walk(n, prefix):
            out.append(prefix)
            node = self._nodes[n]
            if isinstance(node, str):
                return
            for label, child in node:
                walk(child, prefix + (label,))

        walk(0, ())
        out.sort(key=shortlex)
        return out

    def labels(self) -> set:
        """All arc labels occurring anywhere in the dag."""
        return {
            label
            for node in self._nodes
            if not isinstance(node, str)
            for label, _ in node
        }

    def least_paths(self) -> list:
        """Shortlex-least path to every node, indexed by node."""
        least: list = [None] * len(self._nodes)
        least[0] = ()
        queue = deque([0])
        while queue:
            n = queue.popleft()
            node = self._nodes[n]
            if isinstance(node, str):
                continue
            for label, child in node:
                if least[child] is None:
                    least[child] = least[n] + (label,)
                    queue.append(child)
        return least

    def __len__(self) -> int:
        return len(self._nodes)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureDag):
            return NotImplemented
        return self._hash == other._hash and self._nodes == other._nodes

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if self.is_atom:
            return f"FeatureDag.atom({self.value!r})"
        return "FeatureDag{" + ", ".join(map(str, constraints_of(self))) + "}"

    def __str__(self) -> str:
        if self.is_atom:
            return self.value
        return "\n".join(map(str, constraints_of(self)))

    def pretty(self, indent: int = 0) -> str:
        """Bracketed multi-line rendering with ``[k]`` coreference tags."""
        incoming = [0] * len(self._nodes)
        for node in self._nodes:
            if not isinstance(node, str):
                for _, child in node:
                    incoming[child] += 1
        tags: dict = {}
        lines: list = []

        def render(n, pad):
            node = self._nodes[n]
            if isinstance(node, str):
                return node
            tag = ""
            if incoming[n] > 1:
                if n in tags:
                    return f"[{tags[n]}]"
                tags[n] = len(tags) + 1
                tag = f"[{tags[n]}] "
            if not node:
                return tag + "[]"
            width = max(len(label) for label, _ in node)
            parts = []
            for label, child in node:
                inner = render(child, pad + width + 3 + len(tag))
                parts.append(f"{label.ljust(width)} : {inner}")
            sep = "\n" + " " * (pad + 1 + len(tag))
            return tag + "[" + sep.join(parts) + "]"

        lines.append(" " * indent + render(0, indent))
        return "\n".join(lines)


EMPTY = FeatureDag()


def _atom_of_nodes(nodes):
    def atom_of(n):
        node = nodes[n]
        return node if isinstance(node, str) else None

    return atom_of


def _arcs_of_nodes(nodes):
    def arcs_of(n):
        return nodes[n]

    return arcs_of


def unify(d1: FeatureDag, d2: FeatureDag) -> Optional[FeatureDag]:
    """Most general dag subsumed by both inputs, or None on failure."""
    if d1.is_empty:
        return d2
    if d2.is_empty:
        return d1
    n1 = len(d1.nodes)
    raw = d1.nodes + d2.nodes
    parent = list(range(len(raw)))
    atoms: list = []
    arcs: list = []
    for i, node in enumerate(raw):
        if isinstance(node, str):
            atoms.append(node)
            arcs.append(None)
        else:
            atoms.append(None)
            off = 0 if i < n1 else n1
            arcs.append({label: child + off for label, child in node})

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    stack = [(0, n1)]
    while stack:
        a, b = stack.pop()
        a, b = find(a), find(b)
        if a == b:
            continue
        if atoms[a] is not None or atoms[b] is not None:
            if atoms[a] is not None and atoms[b] is not None:
                if atoms[a] != atoms[b]:
                    return None
                parent[b] = a
                continue
            if atoms[a] is None:
                a, b = b, a
            # a is the atom; b must be underspecified
            if arcs[b]:
                return None
            parent[b] = a
            continue
        parent[b] = a
        target = arcs[a]
        for label, child in arcs[b].items():
            mine = target.get(label)
            if mine is None:
                target[label] = child
            else:
                stack.append((mine, child))

    def atom_of(n):
        return atoms[n]

    def arcs_of(n):
        return [(label, find(c)) for label, c in arcs[n].items()]

    try:
        return _build(find(0), atom_of, arcs_of)
    except _Cycle:
        return None


def unify_all(dags: Iterable[FeatureDag]) -> Optional[FeatureDag]:
    result = EMPTY
    for d in dags:
        result = unify(result, d)
        if result is None:
            return None
    return result


def subsumes(d1: FeatureDag, d2: FeatureDag) -> bool:
    """True when ``d1`` is at least as general as ``d2``."""
    n1, n2 = d1.nodes, d2.nodes
    image: dict = {}
    stack = [(0, 0)]
    while stack:
        a, b = stack.pop()
        na, nb = n1[a], n2[b]
        if isinstance(na, str):
            if nb != na:
                return False
            continue
        target = ("@", nb) if isinstance(nb, str) else b
        seen = image.get(a)
        if seen is not None:
            if seen != target:
                return False
            continue
        image[a] = target
        if not na:
            continue
        if isinstance(nb, str):
            return False
        theirs = dict(nb)
        for label, child in na:
            other = theirs.get(label)
            if other is None:
                return False
            stack.append((child, other))
    return True


def isomorphic(d1: FeatureDag, d2: FeatureDag) -> bool:
    return d1 == d2


def compatible(d1: FeatureDag, d2: FeatureDag) -> bool:
    return unify(d1, d2) is not None


def _from_node(d: FeatureDag, n: int) -> FeatureDag:
    if n == 0:
        return d
    nodes = d.nodes
    return _build(n, _atom_of_nodes(nodes), _arcs_of_nodes(nodes))


def extract(d: FeatureDag, path: Iterable[str]) -> Optional[FeatureDag]:
    """Subdag under ``path`` as an independent dag, or None if undefined."""
    n = d.node_at(path)
    if n is None:
        return None
    return _from_node(d, n)


def embed(d: FeatureDag, path: Iterable[str]) -> FeatureDag:
    """Dag whose only content is ``d`` placed under ``path``."""
    path = tuple(path)
    if not path:
        return d
    nodes = d.nodes
    k = len(path)

    # chain nodes are ("chain", i); d's nodes are plain ints
    def atom_of(n):
        if isinstance(n, tuple):
            return None
        node = nodes[n]
        return node if isinstance(node, str) else None

    def arcs_of(n):
        if isinstance(n, tuple):
            i = n[1]
            return [(path[i], ("chain", i + 1) if i + 1 < k else 0)]
        return nodes[n]

    return _build(("chain", 0), atom_of, arcs_of)


def restrict(d: FeatureDag, restrictor: Iterable[str]) -> FeatureDag:
    """Copy of ``d`` with every arc labelled by a restrictor feature removed."""
    removed = frozenset(restrictor)
    if not removed or not (removed & d.labels()):
        return d
    nodes = d.nodes

    def arcs_of(n):
        return [(label, c) for label, c in nodes[n] if label not in removed]

    return _build(0, _atom_of_nodes(nodes), arcs_of)


def drop_root_arcs(d: FeatureDag, labels: Callable[[str], bool]) -> FeatureDag:
    """Remove the root arcs whose label satisfies ``labels``."""
    nodes = d.nodes
    if isinstance(nodes[0], str):
        return d

    def arcs_of(n):
        if n == 0:
            return [(label, c) for label, c in nodes[0] if not labels(label)]
        return nodes[n]

    return _build(0, _atom_of_nodes(nodes), arcs_of)


def constraints_of(d: FeatureDag) -> list:
    """Canonical constraint list of ``d``, sorted.

    Each arc into a node that is also reachable by a shortlex-smaller
    path yields a PathEq against that least path; each atom yields a
    ConstEq at the (unique) path of its arc.  Paths are built from the
    least path of the arc's source, so equations implied by a shared
    prefix are not repeated.
    """
    nodes = d.nodes
    if isinstance(nodes[0], str):
        return []
    least = d.least_paths()
    out: list = []
    for n, node in enumerate(nodes):
        if isinstance(node, str) or least[n] is None:
            continue
        for label, child in node:
            path = least[n] + (label,)
            target = nodes[child]
            if isinstance(target, str):
                out.append(ConstEq(path, target))
            elif path != least[child]:
                out.append(PathEq(least[child], path))
    out.sort(key=constraint_key)
    return out


def constraint_dag(c: Constraint) -> Optional[FeatureDag]:
    """Smallest dag satisfying a single constraint (None if cyclic)."""
    if isinstance(c, ConstEq):
        return embed(FeatureDag.atom(c.value), c.path)
    graph: dict = {"root": {}, "leaf": {}}

    def parent_of(path):
        cur = "root"
        for label in path[:-1]:
            nxt = graph[cur].get(label)
            if nxt is None:
                nxt = len(graph)
                graph[nxt] = {}
                graph[cur][label] = nxt
            cur = nxt
        return cur

    for p in (c.left, c.right):
        parent = parent_of(p)
        if graph[parent].get(p[-1], "leaf") != "leaf":
            return None
        graph[parent][p[-1]] = "leaf"
    try:
        return _build("root", lambda n: None, lambda n: graph[n].items())
    except _Cycle:
        return None


def from_constraints(
    constraints: Iterable[Constraint], paths: Iterable[Path] = ()
) -> Optional[FeatureDag]:
    """Least dag satisfying ``constraints`` and defining ``paths``."""
    parts = []
    for c in constraints:
        part = constraint_dag(c)
        if part is None:
            return None
        parts.append(part)
    parts.extend(embed(EMPTY, p) for p in paths)
    return unify_all(parts)


def entails(d: FeatureDag, c: Constraint) -> bool:
    if isinstance(c, ConstEq):
        return d.value_at(c.path) == c.value
    a, b = d.node_at(c.left), d.node_at(c.right)
    return a is not None and a == b and not isinstance(d.nodes[a], str)


def parse_path(text: str) -> Path:
    text = text.strip()
    if not (text.startswith("<") and text.endswith(">")):
        raise ValueError(f"not a path: {text!r}")
    return tuple(text[1:-1].split())


def parse_constraint(text: str) -> Constraint:
    """Parse ``<a b> = <c>`` or ``<a b> = value``."""
    left, sep, right = text.partition("=")
    if not sep:
        raise ValueError(f"missing '=' in {text!r}")
    lp = parse_path(left)
    right = right.strip()
    if right.startswith("<"):
        return PathEq(lp, parse_path(right))
    if not right or any(ch.isspace() for ch in right):
        raise ValueError(f"bad constant in {text!r}")
    return ConstEq(lp, right)


def dag(*equations: str) -> FeatureDag:
    """Build a dag from textual equations; raises ValueError on clash."""
    result = from_constraints(parse_constraint(e) for e in equations)
    if result is None:
        raise ValueError(f"inconsistent equations: {equations!r}")
    return result


def iter_arcs(d: FeatureDag) -> Iterator[tuple]:
    """Yield (source, label, target) for every arc."""
    for n, node in enumerate(d.nodes):
        if not isinstance(node, str):
            for label, child in node:
                yield n, label, child
