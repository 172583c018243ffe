"""Reserved system types and the rule-as-one-graph encoding.

A grammar rule, and likewise every chart edge, is a single feature graph
rooted at the reserved type ``rule`` with four regions:

    LHS    the mother category
    REC    list of daughters recognized so far, in surface order
    RHS    list encoding the multiset of daughters still to find
    STORE  set of (live, snapshot) sequence pairs with pending order checks

Lists use ``elist``/``nelist`` cells with HD/TL arcs, sets ``eset``/``neset``
cells with ELT/ELS, and store pairs the type ``pair`` with FIRST/SECOND.
These types are merged in directly above the user's bottom and are
incomparable with every user type, so they can never unify with grammar
material.  Each lexicon word also receives a private leaf type (``$word``)
so terminals can sit inside RHS and REC lists while staying invisible to
subsumption against grammar categories.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GrammarError, ReservedTypeName
from .fgraph import FeatureGraph, Workspace, fresh_node
from .hierarchy import ApproprDecl, SubtypeDecl

RULE = "rule"
ELIST = "elist"
NELIST = "nelist"
PAIR = "pair"
ESET = "eset"
NESET = "neset"
START = "start"

F_LHS = "LHS"
F_REC = "REC"
F_RHS = "RHS"
F_STORE = "STORE"
F_HD = "HD"
F_TL = "TL"
F_FIRST = "FIRST"
F_SECOND = "SECOND"
F_ELT = "ELT"
F_ELS = "ELS"

RESERVED_TYPES = (RULE, ELIST, NELIST, PAIR, ESET, NESET, START)


def word_type(word: str) -> str:
    return "$" + word


def is_word_type(t: str) -> bool:
    return t.startswith("$")


def word_of(t: str) -> str:
    return t[1:]


def reserved_decls(bottom: str, words=()) -> tuple[list[SubtypeDecl], list[ApproprDecl]]:
    """Declarations for the system layer, attached under the user bottom."""
    subs = [SubtypeDecl(t, (bottom,)) for t in RESERVED_TYPES]
    subs += [SubtypeDecl(word_type(w), (bottom,)) for w in sorted(set(words))]
    apps = [
        ApproprDecl(RULE, F_LHS, bottom),
        ApproprDecl(RULE, F_REC, bottom),
        ApproprDecl(RULE, F_RHS, bottom),
        ApproprDecl(RULE, F_STORE, bottom),
        ApproprDecl(NELIST, F_HD, bottom),
        ApproprDecl(NELIST, F_TL, bottom),
        ApproprDecl(PAIR, F_FIRST, bottom),
        ApproprDecl(PAIR, F_SECOND, bottom),
        ApproprDecl(NESET, F_ELT, bottom),
        ApproprDecl(NESET, F_ELS, bottom),
    ]
    return subs, apps


def check_no_reserved(names, line: int | None = None) -> None:
    for n in names:
        if n in RESERVED_TYPES or is_word_type(n):
            raise ReservedTypeName(
                f"type name {n!r} collides with the reserved system layer", line)


# --------------------------------------------------------------------------
# Raw builders over plain node tables (used while assembling rule graphs)
# --------------------------------------------------------------------------

def raw_node(types: dict, arcs: dict, t: str) -> int:
    q = fresh_node()
    types[q] = t
    arcs[q] = {}
    return q


def raw_list(types: dict, arcs: dict, elems: list[int]) -> int:
    head = raw_node(types, arcs, ELIST)
    for e in reversed(elems):
        cell = raw_node(types, arcs, NELIST)
        arcs[cell][F_HD] = e
        arcs[cell][F_TL] = head
        head = cell
    return head


# --------------------------------------------------------------------------
# Workspace builders (used while assembling new edges)
# --------------------------------------------------------------------------

def ws_list(ws: Workspace, elems: list[int]) -> int:
    head = ws.fresh(ELIST)
    for e in reversed(elems):
        cell = ws.fresh(NELIST)
        ws.set_arc(cell, F_HD, e)
        ws.set_arc(cell, F_TL, head)
        head = cell
    return head


def ws_set(ws: Workspace, items: list[int]) -> int:
    head = ws.fresh(ESET)
    for it in reversed(items):
        cell = ws.fresh(NESET)
        ws.set_arc(cell, F_ELT, it)
        ws.set_arc(cell, F_ELS, head)
        head = cell
    return head


def ws_pair(ws: Workspace, first: int, second: int) -> int:
    p = ws.fresh(PAIR)
    ws.set_arc(p, F_FIRST, first)
    ws.set_arc(p, F_SECOND, second)
    return p


def ws_copy_region(ws: Workspace, node: int) -> int:
    """Detached in-workspace copy of the region reachable from ``node``."""
    root, m = ws.add(ws.extract(node))
    return root


# --------------------------------------------------------------------------
# Readers
# --------------------------------------------------------------------------

def _walk(types, out_of, head: int, empty: str, cons: str,
          hd: str, tl: str) -> list[int]:
    elems = []
    q = head
    seen = set()
    while True:
        if q in seen:
            raise GrammarError("cyclic system list")
        seen.add(q)
        t = types(q)
        if t == empty:
            return elems
        if t != cons:
            raise GrammarError(f"malformed system list: node of type {t!r}")
        elems.append(out_of(q)[hd])
        q = out_of(q)[tl]


def list_nodes(g: FeatureGraph, head: int) -> list[int]:
    return _walk(g.type_of, g.out, head, ELIST, NELIST, F_HD, F_TL)


def set_nodes(g: FeatureGraph, head: int) -> list[int]:
    return _walk(g.type_of, g.out, head, ESET, NESET, F_ELT, F_ELS)


def ws_list_nodes(ws: Workspace, head: int) -> list[int]:
    return _walk(ws.type_of, ws.out, head, ELIST, NELIST, F_HD, F_TL)


def ws_set_nodes(ws: Workspace, head: int) -> list[int]:
    return _walk(ws.type_of, ws.out, head, ESET, NESET, F_ELT, F_ELS)


@dataclass
class RuleView:
    """Resolved regions of a rule graph (node ids within the host graph)."""

    lhs: int
    rec_head: int
    rhs_head: int
    store_head: int
    rec: list[int]
    rhs: list[int]
    pairs: list[tuple[int, int]]   # (live, snapshot) per store pair

    @property
    def passive(self) -> bool:
        return not self.rhs


def rule_view(g: FeatureGraph) -> RuleView:
    out = g.out(g.root)
    if g.type_of(g.root) != RULE or F_LHS not in out:
        raise GrammarError("not a rule graph")
    rec_head, rhs_head, store_head = out[F_REC], out[F_RHS], out[F_STORE]
    pairs = []
    for p in set_nodes(g, store_head):
        halves = g.out(p)
        pairs.append((halves[F_FIRST], halves[F_SECOND]))
    return RuleView(out[F_LHS], rec_head, rhs_head, store_head,
                    list_nodes(g, rec_head), list_nodes(g, rhs_head), pairs)


def ws_rule_view(ws: Workspace, root: int) -> RuleView:
    out = ws.out(root)
    rec_head, rhs_head, store_head = out[F_REC], out[F_RHS], out[F_STORE]
    pairs = []
    for p in ws_set_nodes(ws, store_head):
        halves = ws.out(p)
        pairs.append((halves[F_FIRST], halves[F_SECOND]))
    return RuleView(out[F_LHS], rec_head, rhs_head, store_head,
                    ws_list_nodes(ws, rec_head), ws_list_nodes(ws, rhs_head), pairs)
