"""Type hierarchies with appropriateness specifications.

A hierarchy is a finite bounded-complete partial order of type names with a
unique least element.  Validation closes the declared order reflexively and
transitively, precomputes the full join table, and checks antisymmetry,
bounded completeness and upward closure of the appropriateness table.  Both
resulting structures are immutable and may be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    ApproprNotUpwardClosed,
    CycleInOrder,
    NotBoundedComplete,
    NoUniqueBottom,
    UnknownType,
)


@dataclass(frozen=True)
class SubtypeDecl:
    """``name`` is declared immediately above each type in ``parents``.

    The bottom type is declared with an empty parent list.
    """

    name: str
    parents: tuple[str, ...]
    line: int | None = None


@dataclass(frozen=True)
class ApproprDecl:
    type: str
    feature: str
    value_type: str
    line: int | None = None


class TypeHierarchy:
    """Reflexive-transitive order over type names plus a precomputed join table."""

    def __init__(self, types: list[str], bottom: str,
                 above: dict[str, frozenset[str]],
                 join_table: dict[tuple[str, str], str]):
        self.types = frozenset(types)
        self.bottom = bottom
        self._above = above            # t -> every u with t below-or-equal u
        self._join = join_table        # only pairs that have a join
        self.varieties = frozenset(
            t for t in types if all(u == t for u in above[t]))

    def check(self, t: str, line: int | None = None) -> None:
        if t not in self.types:
            raise UnknownType(f"undeclared type {t!r}", line)

    def subsumes(self, t1: str, t2: str) -> bool:
        """True iff t1 is more general than (or equal to) t2."""
        self.check(t1)
        self.check(t2)
        return t2 in self._above[t1]

    def join(self, t1: str, t2: str) -> str | None:
        """Least upper bound of the two types, or None when they are incompatible."""
        self.check(t1)
        self.check(t2)
        if t1 == t2:
            return t1
        return self._join.get((t1, t2))

    def upward_closure(self, t: str) -> frozenset[str]:
        self.check(t)
        return self._above[t]


@dataclass(frozen=True)
class ApproprSpec:
    """Partial map (type, feature) -> most general value type."""

    table: dict[tuple[str, str], str]
    features: frozenset[str] = field(default_factory=frozenset)

    def approp(self, t: str, feature: str) -> str | None:
        return self.table.get((t, feature))

    def introducers(self, feature: str) -> list[str]:
        return [t for (t, f) in self.table if f == feature]


def validate_hierarchy(
    subtypes: list[SubtypeDecl],
    approps: list[ApproprDecl] = (),
) -> tuple[TypeHierarchy, ApproprSpec]:
    """Build and validate a hierarchy from declarations.

    The appropriateness table is completed upward: a feature declared on a
    type is inherited by everything above it, taking joins where several
    declarations meet.  Explicit declarations that contradict an inherited
    value are rejected.
    """
    names: list[str] = []
    parents: dict[str, tuple[str, ...]] = {}
    for d in subtypes:
        if d.name in parents:
            raise UnknownType(f"type {d.name!r} declared twice", d.line)
        names.append(d.name)
        parents[d.name] = d.parents
    for d in subtypes:
        for p in d.parents:
            if p not in parents:
                raise UnknownType(f"undeclared parent type {p!r}", d.line)

    roots = [n for n in names if not parents[n]]
    if len(roots) != 1:
        raise NoUniqueBottom(
            f"exactly one bottom type required, found {sorted(roots)!r}")
    bottom = roots[0]

    # Reflexive-transitive closure, upward from each type.  A cycle shows up
    # as two distinct types each above the other.
    children: dict[str, list[str]] = {n: [] for n in names}
    for n in names:
        for p in parents[n]:
            children[p].append(n)
    above: dict[str, set[str]] = {}

    def close(t: str, seen: tuple[str, ...]) -> set[str]:
        if t in above:
            return above[t]
        if t in seen:
            raise CycleInOrder(f"subtype cycle through {t!r}")
        ups = {t}
        for c in children[t]:
            ups |= close(c, seen + (t,))
        above[t] = ups
        return ups

    for n in names:
        close(n, ())
    for a in names:
        for b in above[a]:
            if a != b and a in above[b]:
                raise CycleInOrder(f"types {a!r} and {b!r} subsume each other")
    if len(above[bottom]) != len(names):
        unreach = sorted(set(names) - above[bottom])
        raise NoUniqueBottom(f"types not above the bottom: {unreach!r}")

    # Bounded completeness: every pair with a common upper bound needs a
    # least one.  Hierarchies are small, so the quadratic sweep is fine.
    join_table: dict[tuple[str, str], str] = {}
    for a in names:
        for b in names:
            if a == b:
                continue
            ubs = above[a] & above[b]
            if not ubs:
                continue
            least = [u for u in ubs if all(v in above[u] for v in ubs)]
            if not least:
                raise NotBoundedComplete(a, b)
            join_table[(a, b)] = least[0]

    frozen_above = {t: frozenset(s) for t, s in above.items()}
    th = TypeHierarchy(names, bottom, frozen_above, join_table)

    # Appropriateness: inherit upward, then check declared entries agree.
    declared: dict[tuple[str, str], str] = {}
    features: set[str] = set()
    for d in approps:
        th.check(d.type, d.line)
        th.check(d.value_type, d.line)
        features.add(d.feature)
        key = (d.type, d.feature)
        if key in declared and declared[key] != d.value_type:
            raise ApproprNotUpwardClosed(
                d.type, d.feature, "conflicting declarations", d.line)
        declared[key] = d.value_type

    table: dict[tuple[str, str], str] = {}
    for (t, f), v in declared.items():
        for up in above[t]:
            cur = table.get((up, f))
            new = v if cur is None else th.join(cur, v)
            if new is None:
                raise ApproprNotUpwardClosed(
                    up, f, f"inherited value types {cur!r} and {v!r} have no join")
            table[(up, f)] = new
    for (t, f), v in declared.items():
        if not th.subsumes(table[(t, f)], v) or not th.subsumes(v, table[(t, f)]):
            raise ApproprNotUpwardClosed(
                t, f, f"declared value {v!r} conflicts with inherited {table[(t, f)]!r}")

    return th, ApproprSpec(table, frozenset(features))


# Convenience wrappers matching the functional surface used in tests.

def type_subsumes(th: TypeHierarchy, t1: str, t2: str) -> bool:
    return th.subsumes(t1, t2)


def join(th: TypeHierarchy, t1: str, t2: str) -> str | None:
    return th.join(t1, t2)


def approp(spec: ApproprSpec, t: str, feature: str) -> str | None:
    return spec.approp(t, feature)


@dataclass(frozen=True)
class TypeSystem:
    """A validated hierarchy bundled with its appropriateness table."""

    hierarchy: TypeHierarchy
    approp_spec: ApproprSpec

    @classmethod
    def from_decls(cls, subtypes: list[SubtypeDecl],
                   approps: list[ApproprDecl] = ()) -> "TypeSystem":
        th, asp = validate_hierarchy(subtypes, approps)
        return cls(th, asp)

    def subsumes(self, t1: str, t2: str) -> bool:
        return self.hierarchy.subsumes(t1, t2)

    def join(self, t1: str, t2: str) -> str | None:
        return self.hierarchy.join(t1, t2)

    def approp(self, t: str, feature: str) -> str | None:
        return self.approp_spec.approp(t, feature)

    @property
    def bottom(self) -> str:
        return self.hierarchy.bottom

    def least_bearing(self, t: str, feature: str) -> str | None:
        """Least type above ``t`` for which ``feature`` is appropriate.

        Returns None when no such type exists or when there are several
        minimal candidates with no least one (type raising is deterministic:
        ambiguity counts as failure).
        """
        cands = [u for u in self.hierarchy.upward_closure(t)
                 if (u, feature) in self.approp_spec.table]
        if not cands:
            return None
        minimal = [u for u in cands
                   if not any(v != u and self.hierarchy.subsumes(v, u) for v in cands)]
        if len(minimal) != 1:
            return None
        return minimal[0]
