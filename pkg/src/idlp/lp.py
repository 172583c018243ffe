"""Linear-precedence judgments over sequences of feature graphs.

A precedence rule ``first < second`` applies to a sequence when its sides
subsume two distinct elements; it is violated when the ``second`` match
precedes the ``first`` match.  Weak application replaces subsumption with
unifiability and anticipates constraints that may bite only after further
instantiation; ``verdict`` combines both tests in one pass.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import permutations

from .fgraph import FeatureGraph, equivalent, subgraph, subsumes, unifiable
from .structs import list_nodes


@dataclass(frozen=True)
class LpRule:
    """Ordering constraint between two independent graphs (no shared nodes)."""

    first: FeatureGraph
    second: FeatureGraph

    def swapped(self) -> "LpRule":
        return LpRule(self.second, self.first)


class Sequence:
    """Ordered daughters, each a standalone feature graph."""

    def __init__(self, elements):
        self.elements = tuple(elements)

    @classmethod
    def view(cls, host: FeatureGraph, head: int) -> "Sequence":
        """Detach the elements of a list region inside ``host``."""
        return cls(subgraph(host, n) for n in list_nodes(host, head))

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, i: int) -> FeatureGraph:
        return self.elements[i]

    def __iter__(self):
        return iter(self.elements)


class LpVerdict(enum.Enum):
    VIOLATED = "violated"
    POSSIBLE = "possible"
    CLEAN = "clean"


def _as_seq(seq) -> Sequence:
    return seq if isinstance(seq, Sequence) else Sequence(seq)


def applies(rule: LpRule, seq) -> set[tuple[int, int]]:
    """All index pairs (i, j), i != j, with first <= seq[i] and second <= seq[j]."""
    seq = _as_seq(seq)
    firsts = [i for i, e in enumerate(seq) if subsumes(rule.first, e)]
    seconds = [j for j, e in enumerate(seq) if subsumes(rule.second, e)]
    return {(i, j) for i in firsts for j in seconds if i != j}


def weakly_applies(rule: LpRule, seq) -> set[tuple[int, int]]:
    """Like ``applies`` but by unifiability; test unifications are discarded."""
    seq = _as_seq(seq)
    firsts = [i for i, e in enumerate(seq) if unifiable(rule.first, e)]
    seconds = [j for j, e in enumerate(seq) if unifiable(rule.second, e)]
    return {(i, j) for i in firsts for j in seconds if i != j}


def lp_acceptable(seq, rules) -> bool:
    """No rule applies with its second match before its first."""
    seq = _as_seq(seq)
    return all(not any(j < i for i, j in applies(r, seq)) for r in rules)


def verdict(seq, rules) -> LpVerdict:
    """Three-way judgment, one traversal per rule.

    ``VIOLATED`` when some rule strictly applies in the wrong order;
    otherwise ``POSSIBLE`` when a weak application occurs in the wrong order
    (the sequence could still be ruled out by later instantiation); else
    ``CLEAN``.
    """
    seq = _as_seq(seq)
    possible = False
    for rule in rules:
        sub1 = [subsumes(rule.first, e) for e in seq]
        sub2 = [subsumes(rule.second, e) for e in seq]
        uni1 = [s or unifiable(rule.first, e) for s, e in zip(sub1, seq)]
        uni2 = [s or unifiable(rule.second, e) for s, e in zip(sub2, seq)]
        for j in range(len(seq)):          # j: position of the second match
            for i in range(j + 1, len(seq)):
                if sub2[j] and sub1[i]:
                    return LpVerdict.VIOLATED
                if uni2[j] and uni1[i]:
                    possible = True
    return LpVerdict.POSSIBLE if possible else LpVerdict.CLEAN


def permute(ms) -> list[tuple[FeatureGraph, ...]]:
    """All orderings of a multiset of graphs; the empty multiset yields the
    empty sequence, and equivalent elements collapse to one ordering."""
    ms = list(ms)
    classes: list[tuple[FeatureGraph, int]] = []
    labels = []
    for g in ms:
        for k, (rep, _) in enumerate(classes):
            if equivalent(rep, g):
                classes[k] = (rep, classes[k][1] + 1)
                labels.append(k)
                break
        else:
            classes.append((g, 1))
            labels.append(len(classes) - 1)
    out = []
    for order in sorted(set(permutations(labels))):
        out.append(tuple(classes[k][0] for k in order))
    return out


def expand(ms, rules) -> list[tuple[FeatureGraph, ...]]:
    """LP-acceptable orderings of the multiset."""
    return [seq for seq in permute(ms) if lp_acceptable(seq, rules)]


def precede_check(first: FeatureGraph, remaining, rules) -> bool:
    """Sound early filter: False when ``first`` would have to follow some
    element of ``remaining`` under a rule that already strictly applies."""
    for rule in rules:
        if subsumes(rule.second, first):
            if any(subsumes(rule.first, x) for x in remaining):
                return False
    return True
