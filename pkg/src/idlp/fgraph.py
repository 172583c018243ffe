"""Typed feature graphs: construction, subsumption, unification, restriction.

A graph is a rooted, finite, possibly cyclic transition structure.  Nodes are
plain integers drawn from a global counter, so distinct graphs never share
node identities; every operation returns a fresh graph and treats its inputs
as immutable values.

Unification is implemented as an equivalence-class closure over node pairs
(union-find) followed by type inference, which raises merged node types until
every present feature is appropriate.  The closure machinery lives in
:class:`Workspace`, which is also used directly by the chart parser and the
derivation oracle when several regions must be instantiated in one shared
scope.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import TypeInferenceFailure, UnificationFailure
from .hierarchy import TypeSystem

_fresh = itertools.count(1)


def fresh_node() -> int:
    return next(_fresh)


class FeatureGraph:
    """Immutable rooted graph: ``types`` maps node -> type name, ``arcs`` maps
    node -> {feature: node}.  Only nodes reachable from the root are kept."""

    __slots__ = ("ts", "root", "types", "arcs")

    def __init__(self, ts: TypeSystem, root: int,
                 types: dict[int, str], arcs: dict[int, dict[str, int]]):
        self.ts = ts
        self.root = root
        self.types = types
        self.arcs = arcs

    @classmethod
    def build(cls, ts: TypeSystem, root: int,
              types: dict[int, str], arcs: dict[int, dict[str, int]]) -> "FeatureGraph":
        """Construct a graph, pruning anything unreachable from ``root``."""
        keep = _reachable(root, arcs)
        return cls(
            ts,
            root,
            {q: types[q] for q in keep},
            {q: dict(arcs.get(q, {})) for q in keep},
        )

    @classmethod
    def atom(cls, ts: TypeSystem, type_name: str) -> "FeatureGraph":
        ts.hierarchy.check(type_name)
        r = fresh_node()
        return cls(ts, r, {r: type_name}, {r: {}})

    def nodes(self) -> list[int]:
        return list(self.types)

    def type_of(self, q: int) -> str:
        return self.types[q]

    def out(self, q: int) -> dict[str, int]:
        return self.arcs.get(q, {})

    def get(self, path: tuple[str, ...]) -> int | None:
        """Node at ``path`` from the root, or None when the path is absent."""
        q = self.root
        for f in path:
            nxt = self.arcs.get(q, {}).get(f)
            if nxt is None:
                return None
            q = nxt
        return q

    def paths(self, limit: int = 10000) -> list[tuple[str, ...]]:
        """All simple feature paths (each node contributes its first-visit path)."""
        seen = {self.root}
        out = [()]
        stack: list[tuple[int, tuple[str, ...]]] = [(self.root, ())]
        while stack:
            q, p = stack.pop()
            for f in sorted(self.arcs.get(q, {})):
                r = self.arcs[q][f]
                out.append(p + (f,))
                if r not in seen:
                    seen.add(r)
                    stack.append((r, p + (f,)))
            if len(out) > limit:
                break
        return out

    def __repr__(self) -> str:  # avoid importing the serializer here
        return f"<FeatureGraph root={self.types[self.root]} nodes={len(self.types)}>"


def _reachable(root: int, arcs: dict[int, dict[str, int]]) -> list[int]:
    seen = [root]
    mark = {root}
    i = 0
    while i < len(seen):
        for r in arcs.get(seen[i], {}).values():
            if r not in mark:
                mark.add(r)
                seen.append(r)
        i += 1
    return seen


# --------------------------------------------------------------------------
# Workspace: shared mutable scope for closure-based operations
# --------------------------------------------------------------------------

class Workspace:
    """Scratch node table over which regions are copied, linked and merged.

    The parser and the oracle keep several rooted regions in one workspace so
    that structure sharing between them survives unification.  ``merge``
    performs the pairwise closure and then re-establishes well-typing over
    the whole table; failures raise and leave the caller to discard the
    workspace.
    """

    def __init__(self, ts: TypeSystem):
        self.ts = ts
        self.types: dict[int, str] = {}
        self.arcs: dict[int, dict[str, int]] = {}
        self._parent: dict[int, int] = {}

    def clone(self) -> "Workspace":
        w = Workspace(self.ts)
        w.types = dict(self.types)
        w.arcs = {q: dict(a) for q, a in self.arcs.items()}
        w._parent = dict(self._parent)
        return w

    # -- construction ------------------------------------------------------

    def add(self, g: FeatureGraph) -> tuple[int, dict[int, int]]:
        """Copy ``g`` into the workspace; returns (new root, old->new map)."""
        m = {q: fresh_node() for q in g.types}
        for q, t in g.types.items():
            self.types[m[q]] = t
            self._parent[m[q]] = m[q]
            self.arcs[m[q]] = {f: m[r] for f, r in g.arcs.get(q, {}).items()}
        return m[g.root], m

    def fresh(self, type_name: str) -> int:
        q = fresh_node()
        self.types[q] = type_name
        self.arcs[q] = {}
        self._parent[q] = q
        return q

    def set_arc(self, q: int, feature: str, r: int) -> None:
        self.arcs[self.find(q)][feature] = self.find(r)

    # -- union-find --------------------------------------------------------

    def find(self, q: int) -> int:
        root = q
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[q] != root:
            self._parent[q], q = root, self._parent[q]
        return root

    def type_of(self, q: int) -> str:
        return self.types[self.find(q)]

    def out(self, q: int) -> dict[str, int]:
        q = self.find(q)
        return {f: self.find(r) for f, r in self.arcs[q].items()}

    # -- closure -----------------------------------------------------------

    def merge(self, a: int, b: int, infer: bool = True) -> None:
        """Unify the regions rooted at ``a`` and ``b`` in place.

        Raises UnificationFailure when some merged class has no type join and
        TypeInferenceFailure when the result cannot be made well-typed.
        """
        stack = [(a, b)]
        while stack:
            x, y = stack.pop()
            x, y = self.find(x), self.find(y)
            if x == y:
                continue
            j = self.ts.join(self.types[x], self.types[y])
            if j is None:
                err = UnificationFailure(None, (self.types[x], self.types[y]))
                err.node = x
                raise err
            self._parent[y] = x
            self.types[x] = j
            ax, ay = self.arcs[x], self.arcs.pop(y)
            for f, r in ay.items():
                if f in ax:
                    stack.append((ax[f], r))
                else:
                    ax[f] = r
        if infer:
            self.infer()

    def infer(self) -> None:
        """Raise node types to the least well-typed fixpoint, or fail."""
        ts = self.ts
        changed = True
        while changed:
            changed = False
            for q in list(self.arcs):
                if self._parent.get(q) != q:
                    continue
                for f in list(self.arcs[q]):
                    t = self.types[q]
                    want = ts.approp(t, f)
                    if want is None:
                        raised = ts.least_bearing(t, f)
                        if raised is None:
                            raise TypeInferenceFailure(
                                f"no type above {t!r} bears feature {f!r}")
                        self.types[q] = raised
                        want = ts.approp(raised, f)
                        changed = True
                    r = self.find(self.arcs[q][f])
                    j = ts.join(self.types[r], want)
                    if j is None:
                        raise TypeInferenceFailure(
                            f"value type {self.types[r]!r} incompatible with "
                            f"{want!r} demanded by feature {f!r}")
                    if j != self.types[r]:
                        self.types[r] = j
                        changed = True

    # -- extraction --------------------------------------------------------

    def extract(self, root: int) -> FeatureGraph:
        """Detached copy of the region reachable from ``root``."""
        root = self.find(root)
        m: dict[int, int] = {}
        order = [root]
        m[root] = fresh_node()
        i = 0
        while i < len(order):
            q = order[i]
            for r in self.arcs[q].values():
                r = self.find(r)
                if r not in m:
                    m[r] = fresh_node()
                    order.append(r)
            i += 1
        types = {m[q]: self.types[q] for q in order}
        arcs = {m[q]: {f: m[self.find(r)] for f, r in self.arcs[q].items()}
                for q in order}
        return FeatureGraph(self.ts, m[root], types, arcs)


# --------------------------------------------------------------------------
# Core operations
# --------------------------------------------------------------------------

def well_typed(g: FeatureGraph) -> bool:
    """Every present feature is appropriate and its value specific enough."""
    ts = g.ts
    for q, out in g.arcs.items():
        for f, r in out.items():
            want = ts.approp(g.types[q], f)
            if want is None or not ts.subsumes(want, g.types[r]):
                return False
    return True


def _simulate(g1: FeatureGraph, n1: int, g2: FeatureGraph, n2: int) -> bool:
    """Forced simulation map from g1@n1 into g2@n2.

    Transition determinism makes the witness map unique, so subsumption is a
    single traversal: fail if a g1 node would need two images, a type fails
    to subsume, or a feature is missing on the image side.
    """
    above = g1.ts.hierarchy._above      # hot path: skip per-call validation
    t1, t2, a1, a2 = g1.types, g2.types, g1.arcs, g2.arcs
    if t2[n2] not in above[t1[n1]]:
        return False
    m = {n1: n2}
    stack = [n1]
    while stack:
        q = stack.pop()
        out2 = a2.get(m[q], {})
        for f, r in a1.get(q, {}).items():
            r2 = out2.get(f)
            if r2 is None:
                return False
            old = m.get(r)
            if old is not None:
                if old != r2:
                    return False
            else:
                if t2[r2] not in above[t1[r]]:
                    return False
                m[r] = r2
                stack.append(r)
    return True


def subsumes(g1: FeatureGraph, g2: FeatureGraph) -> bool:
    """True iff g1 is at most as specific as g2 (g1 describes a superset)."""
    return _simulate(g1, g1.root, g2, g2.root)


def subsumes_at(g1: FeatureGraph, n1: int, g2: FeatureGraph, n2: int) -> bool:
    return _simulate(g1, n1, g2, n2)


def equivalent(g1: FeatureGraph, g2: FeatureGraph) -> bool:
    """Mutual subsumption: equality up to node renaming."""
    return subsumes(g1, g2) and subsumes(g2, g1)


def unify(g1: FeatureGraph, g2: FeatureGraph) -> FeatureGraph:
    """Least common extension of the two graphs; raises on incompatibility.

    Inputs are untouched.  The failure diagnostic carries a feature path to
    the offending node pair when the closure can name one.
    """
    ws = Workspace(g1.ts)
    r1, _ = ws.add(g1)
    r2, _ = ws.add(g2)
    try:
        ws.merge(r1, r2)
    except UnificationFailure as e:
        raise UnificationFailure(_blame_path(ws, r1, getattr(e, "node", None)),
                                 e.types) from None
    return ws.extract(r1)


def unifiable(g1: FeatureGraph, g2: FeatureGraph) -> bool:
    try:
        unify(g1, g2)
        return True
    except (UnificationFailure, TypeInferenceFailure):
        return False


def _blame_path(ws: Workspace, root: int, node: int | None) -> tuple[str, ...] | None:
    """Shortest feature path from ``root`` to the failing class, if any."""
    if node is None:
        return None
    target = ws.find(node)
    seen = set()
    queue: list[tuple[int, tuple[str, ...]]] = [(ws.find(root), ())]
    while queue:
        q, p = queue.pop(0)
        if q == target:
            return p
        if q in seen:
            continue
        seen.add(q)
        for f, r in sorted(ws.arcs.get(q, {}).items()):
            queue.append((ws.find(r), p + (f,)))
    return None


def type_infer(g: FeatureGraph) -> FeatureGraph:
    """Least well-typed extension of a raw graph; raises TypeInferenceFailure."""
    ws = Workspace(g.ts)
    r, _ = ws.add(g)
    ws.infer()
    return ws.extract(r)


def copy(g: FeatureGraph) -> FeatureGraph:
    """Equivalent graph on entirely fresh nodes."""
    ws = Workspace(g.ts)
    r, _ = ws.add(g)
    return ws.extract(r)


def subgraph(g: FeatureGraph, node: int) -> FeatureGraph:
    """Detached copy of the region of ``g`` reachable from ``node``."""
    keep = _reachable(node, g.arcs)
    m = {q: fresh_node() for q in keep}
    return FeatureGraph(
        g.ts,
        m[node],
        {m[q]: g.types[q] for q in keep},
        {m[q]: {f: m[r] for f, r in g.arcs.get(q, {}).items()} for q in keep},
    )


# --------------------------------------------------------------------------
# Restriction
# --------------------------------------------------------------------------

class Restrictor:
    """Prefix-closed set of feature paths used to blunt prediction."""

    def __init__(self, paths):
        closed = {()}
        for p in paths:
            p = tuple(p)
            for i in range(len(p) + 1):
                closed.add(p[:i])
        self.paths = frozenset(closed)

    def __contains__(self, path) -> bool:
        return tuple(path) in self.paths

    def steps(self, path) -> list[str]:
        """Features that may extend ``path`` while staying inside the set."""
        path = tuple(path)
        return sorted({p[len(path)] for p in self.paths
                       if len(p) > len(path) and p[:len(path)] == path})

    def __eq__(self, other) -> bool:
        return isinstance(other, Restrictor) and self.paths == other.paths

    def __hash__(self) -> int:
        return hash(self.paths)

    def __repr__(self) -> str:
        shown = sorted(".".join(p) or "<>" for p in self.paths)
        return "Restrictor({" + ", ".join(shown) + "})"


def restrict(g: FeatureGraph, r: Restrictor) -> FeatureGraph:
    """Projection of ``g`` onto the restrictor's paths.

    Kept nodes retain their types; transitions survive only along path steps
    in the set, and two kept paths reaching one node in ``g`` still share in
    the result.  Absent paths are ignored.  The result subsumes ``g``.
    """
    m: dict[int, int] = {g.root: fresh_node()}
    types = {m[g.root]: g.types[g.root]}
    arcs: dict[int, dict[str, int]] = {m[g.root]: {}}
    stack: list[tuple[int, tuple[str, ...]]] = [(g.root, ())]
    while stack:
        q, path = stack.pop()
        for f in r.steps(path):
            tgt = g.arcs.get(q, {}).get(f)
            if tgt is None:
                continue
            if tgt not in m:
                m[tgt] = fresh_node()
                types[m[tgt]] = g.types[tgt]
                arcs[m[tgt]] = {}
                stack.append((tgt, path + (f,)))
            else:
                stack.append((tgt, path + (f,)))
            arcs[m[q]][f] = m[tgt]
    return FeatureGraph.build(g.ts, m[g.root], types, arcs)


# --------------------------------------------------------------------------
# Live/snapshot pairs
# --------------------------------------------------------------------------

@dataclass
class GraphPair:
    """A region of a host graph paired with a detached snapshot of it.

    ``dif`` reports whether the live region has picked up information since
    the snapshot was taken; equality is mutual subsumption, never node
    identity.
    """

    host: FeatureGraph
    live: int
    snapshot: int

    def dif(self) -> bool:
        return not equivalent(subgraph(self.host, self.live),
                              subgraph(self.host, self.snapshot))


def dif(pair: GraphPair) -> bool:
    return pair.dif()
