"""Brute-force reference semantics for ID/LP recognition.

Derivations are enumerated top-down in one shared instantiation scope:
choose a rule whose mother unifies with the goal, choose *any* ordering of
its daughters (no precedence filtering while deriving), recurse left to
right against the target words.  Acceptability is judged only on the
finished tree, where all nonlocal feature passing has already happened, by
re-checking every local tree's daughter sequence.  That makes the oracle a
direct reading of the language definition and keeps it independent of the
parser's store machinery.

Enumeration is exhaustive within the given bounds; whenever a depth or
width cut prunes anything, the result carries a ``truncated`` flag so a
negative answer can be read as "not found within bounds".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

from .errors import TypeInferenceFailure, UnificationFailure
from .fgraph import FeatureGraph, Workspace
from .grammar import Grammar
from .lp import Sequence, lp_acceptable
from .structs import ws_rule_view


@dataclass(frozen=True)
class Bounds:
    max_depth: int = 8       # rule applications along any root-to-leaf path
    max_width: int = 6       # daughters per rule
    max_len: int = 4         # sentence length for language enumeration


@dataclass
class DerivationTree:
    label: FeatureGraph | str
    children: list["DerivationTree"] = field(default_factory=list)

    @property
    def word(self) -> str | None:
        return self.label if isinstance(self.label, str) else None

    def leaves(self) -> list[str]:
        if isinstance(self.label, str):
            return [self.label]
        out: list[str] = []
        for c in self.children:
            out.extend(c.leaves())
        return out


@dataclass
class OracleResult:
    accepted: bool
    witnesses: list[DerivationTree]
    truncated: bool


@dataclass
class LanguageResult:
    sentences: set[tuple[str, ...]]
    truncated: bool


class _Skel:
    """Derivation skeleton: a workspace node plus ordered children."""

    __slots__ = ("node", "children")

    def __init__(self, node: int, children: list):
        self.node = node
        self.children = children


class _Flag:
    __slots__ = ("hit",)

    def __init__(self):
        self.hit = False


class _Enumerator:
    def __init__(self, grammar: Grammar, bounds: Bounds,
                 early_filter: bool = False):
        self.g = grammar
        self.bounds = bounds
        self.early_filter = early_filter
        self.flag = _Flag()
        # Without empty categories every daughter yields at least one word,
        # which gives an exact length-based prune for deep rule nesting.
        self.min_leaf = 0 if grammar.empties else 1

    # Each generator yields (workspace, skeleton, words-consumed); workspaces
    # are cloned per choice point so sibling branches never interfere.
    # ``pending`` counts daughters elsewhere in the tree still to be derived.

    def goal(self, ws: Workspace, node: int, depth: int, pos: int, target,
             pending: int = 0):
        b = self.bounds
        budget = b.max_len if target is None else len(target)
        for word in self.g.lexicon:
            if target is not None and (pos >= len(target) or target[pos] != word):
                continue
            if pos + 1 + pending * self.min_leaf > budget:
                continue
            for entry in self.g.lexicon[word]:
                w2 = self._try_merge(ws, node, entry)
                if w2 is not None:
                    yield w2, _Skel(node, [word]), pos + 1
        for entry in self.g.empties:
            w2 = self._try_merge(ws, node, entry)
            if w2 is not None:
                yield w2, _Skel(node, []), pos
        for rule in self.g.id_rules:
            if pos + (rule.rhs_size + pending) * self.min_leaf > budget:
                continue
            if depth + 1 > b.max_depth or rule.rhs_size > b.max_width:
                self.flag.hit = True
                continue
            w2 = ws.clone()
            root, _ = w2.add(rule.graph)
            view = ws_rule_view(w2, root)
            try:
                w2.merge(node, view.lhs)
            except (UnificationFailure, TypeInferenceFailure):
                continue
            for order in permutations(view.rhs):
                if self.early_filter and not lp_acceptable(
                        Sequence(w2.extract(n) for n in order), self.g.lp_rules):
                    continue
                yield from self.seq(w2, node, list(order), [], depth + 1,
                                    pos, target, pending)

    def seq(self, ws: Workspace, mother: int, slots: list[int], done: list,
            depth: int, pos: int, target, pending: int):
        if not slots:
            yield ws, _Skel(mother, done), pos
            return
        for w2, child, pos2 in self.goal(ws, slots[0], depth, pos, target,
                                         pending + len(slots) - 1):
            yield from self.seq(w2, mother, slots[1:], done + [child],
                                depth, pos2, target, pending)

    def _try_merge(self, ws: Workspace, node: int, g: FeatureGraph):
        w2 = ws.clone()
        root, _ = w2.add(g)
        try:
            w2.merge(node, root)
        except (UnificationFailure, TypeInferenceFailure):
            return None
        return w2

    # -- final acceptability -------------------------------------------------

    def acceptable(self, ws: Workspace, skel) -> bool:
        """Every local tree's fully instantiated daughters must be orderable."""
        if isinstance(skel, str):
            return True
        kids = [c for c in skel.children if isinstance(c, _Skel)]
        if kids:
            seq = Sequence(ws.extract(c.node) for c in kids)
            if not lp_acceptable(seq, self.g.lp_rules):
                return False
        return all(self.acceptable(ws, c) for c in skel.children)

    def build(self, ws: Workspace, skel) -> DerivationTree:
        if isinstance(skel, str):
            return DerivationTree(skel)
        return DerivationTree(ws.extract(skel.node),
                              [self.build(ws, c) for c in skel.children])


def oracle_recognize(grammar: Grammar, words: list[str],
                     bounds: Bounds = Bounds(),
                     early_filter: bool = False) -> OracleResult:
    """True iff some derivation within bounds yields exactly ``words`` and
    survives the whole-tree acceptability check.

    ``early_filter`` additionally discards non-acceptable daughter orderings
    while deriving; it must never change the verdict (the final check prunes
    the same trees) and exists as a cross-check mode.
    """
    enum = _Enumerator(grammar, bounds, early_filter)
    ws = Workspace(grammar.ts)
    goal, _ = ws.add(grammar.start)
    target = list(words)
    witnesses = []
    for w2, skel, pos in enum.goal(ws, goal, 0, 0, target):
        if pos != len(target):
            continue
        if enum.acceptable(w2, skel):
            witnesses.append(enum.build(w2, skel))
    return OracleResult(bool(witnesses), witnesses, enum.flag.hit)


def enumerate_language(grammar: Grammar,
                       bounds: Bounds = Bounds()) -> LanguageResult:
    """All sentences up to ``max_len`` generated within bounds, collected by
    enumerating derivation trees rather than testing every string."""
    enum = _Enumerator(grammar, bounds)
    ws = Workspace(grammar.ts)
    goal, _ = ws.add(grammar.start)
    sentences: set[tuple[str, ...]] = set()
    for w2, skel, _pos in enum.goal(ws, goal, 0, 0, None):
        if enum.acceptable(w2, skel):
            sentences.add(tuple(enum.build(w2, skel).leaves()))
    return LanguageResult(sentences, enum.flag.hit)
