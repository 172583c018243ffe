"""Agenda-driven chart parser with precedence stores.

The parser is a one-pass Earley variant.  Edges are dotted rules over a
span, held as single rule graphs; recognized daughters sit in REC in surface
order and the remaining multiset in RHS.  A sequence whose acceptability
cannot be decided yet (a rule only *weakly* applies in violating order) gets
a (live, snapshot) pair in the edge's STORE; the live half shares the
daughters' nodes, so later unifications instantiate it in place, and a
detected difference re-triggers the acceptability check.  Stores travel by
union when edges combine, and a completed parse with a nonempty store is
reported as pending rather than silently accepted.

Lexical entries act as terminal-consuming rules: prediction proposes them
and scanning moves the matched word into REC.  Prediction is memoized on
restricted categories per vertex, which with edge subsumption guarantees
termination.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from . import structs
from .avm import serialize_many
from .errors import (
    GrammarError,
    LpViolation,
    PrecedeFilterRejection,
    TypeInferenceFailure,
    UnificationFailure,
    UnknownWord,
)
from .fgraph import (
    FeatureGraph,
    Restrictor,
    Workspace,
    equivalent,
    restrict,
    subgraph,
    subsumes,
)
from .grammar import Grammar
from .lp import LpRule, LpVerdict, Sequence, precede_check, verdict
from .structs import (
    F_LHS,
    F_REC,
    F_RHS,
    F_STORE,
    START,
    is_word_type,
    word_of,
    word_type,
    ws_list,
    ws_pair,
    ws_rule_view,
    ws_set,
    ws_set_nodes,
)

ACCEPTED = "accepted"
ACCEPTED_PENDING = "accepted_pending"
REJECTED = "rejected"


@dataclass(frozen=True)
class Provenance:
    kind: str                       # initial | scanned | predicted | completed
    parents: tuple[int, ...] = ()
    word: str | None = None

    def trace(self) -> str:
        if self.kind == "initial":
            return "Ini."
        if self.kind == "scanned":
            return f"Scan.&{self.parents[0]}"
        if self.kind == "predicted":
            return f"Pred.&{self.parents[0]}"
        return f"Comp.&{self.parents[0]}&{self.parents[1]}"


class Edge:
    """One dotted-rule hypothesis over a span; the graph never changes, so
    its region view and shape are resolved once at construction."""

    __slots__ = ("start", "end", "graph", "provenance", "rule_size", "id",
                 "_view", "shape")

    def __init__(self, start: int, end: int, graph: FeatureGraph,
                 provenance: Provenance, rule_size: int):
        self.start = start
        self.end = end
        self.graph = graph
        self.provenance = provenance
        self.rule_size = rule_size
        self.id: int | None = None
        self._view = structs.rule_view(graph)
        v = self._view
        self.shape = (len(v.rec), len(v.rhs), len(v.pairs))

    def view(self) -> structs.RuleView:
        return self._view

    @property
    def passive(self) -> bool:
        return not self._view.rhs

    @property
    def kind(self) -> str:
        return "passive" if self.passive else "active"

    def __repr__(self) -> str:
        return f"<Edge {self.id} ({self.start},{self.end}) {self.kind}>"


@dataclass
class ParseOptions:
    rhs_filter: bool = True         # early precede filter against remaining RHS
    dedup: bool = True              # edge subsumption check + antichain storage
    lifo: bool = False              # agenda policy (FIFO by default)


@dataclass
class ParseTree:
    label: FeatureGraph
    children: list
    def leaves(self) -> list[str]:
        out = []
        for c in self.children:
            if isinstance(c, str):
                out.append(c)
            else:
                out.extend(c.leaves())
        return out


@dataclass
class Outcome:
    status: str
    witnesses: list[Edge]
    pending: list[str]
    chart: "Chart"
    trees: list[ParseTree]


class Chart:
    """Stored edges, the agenda, the prediction memo and run counters."""

    def __init__(self, grammar: Grammar, words: list[str], opts: ParseOptions):
        self.grammar = grammar
        self.words = list(words)
        self.opts = opts
        self.edges: list[Edge] = []
        self.agenda: deque[Edge] = deque()
        self.by_id: dict[int, Edge] = {}
        self.memo: dict[int, list[tuple[FeatureGraph, bool]]] = {}
        self.counters: dict[str, int] = {
            "enqueued": 0, "dequeued": 0, "stored": 0, "evicted": 0,
            "rejected_subsumed": 0, "rejected_unify": 0, "rejected_lp": 0,
            "rejected_precede": 0, "rejected_store": 0, "dropped_unproductive": 0,
        }
        self._next_id = 1
        self._by_span: dict[tuple[int, int, str], list[Edge]] = {}
        self._act_end: dict[int, list[Edge]] = {}
        self._pas_start: dict[int, list[Edge]] = {}

    @property
    def n(self) -> int:
        return len(self.words)

    def enqueue(self, edge: Edge) -> None:
        self.counters["enqueued"] += 1
        self.agenda.append(edge)

    def assign_id(self, edge: Edge) -> None:
        edge.id = self._next_id
        self._next_id += 1
        self.by_id[edge.id] = edge

    def stored_at(self, start: int, end: int, kind: str):
        return self._by_span.get((start, end, kind), [])

    def actives_ending(self, v: int):
        return self._act_end.get(v, [])

    def passives_starting(self, v: int):
        return self._pas_start.get(v, [])

    def store(self, edge: Edge) -> None:
        bucket = self._by_span.setdefault((edge.start, edge.end, edge.kind), [])
        if self.opts.dedup:
            evict = [e for e in bucket
                     if e.shape == edge.shape and subsumes(edge.graph, e.graph)]
            for e in evict:
                self.edges.remove(e)
                bucket.remove(e)
                side = self._pas_start[e.start] if e.passive else self._act_end[e.end]
                side.remove(e)
                self.counters["evicted"] += 1
        self.edges.append(edge)
        bucket.append(edge)
        if edge.passive:
            self._pas_start.setdefault(edge.start, []).append(edge)
        else:
            self._act_end.setdefault(edge.end, []).append(edge)
        self.counters["stored"] += 1


# --------------------------------------------------------------------------
# Rule-graph surgery (shared by the completer, the scanner and the wrappers)
# --------------------------------------------------------------------------

def _ws_store_add(ws: Workspace, pair_nodes: list[int], new_pair: int) -> list[int]:
    """Union one pair into a pair-node list; identical snapshots collapse and
    their live halves are unified."""
    nf, ns = ws.out(new_pair)[structs.F_FIRST], ws.out(new_pair)[structs.F_SECOND]
    for p in pair_nodes:
        live, snap = ws.out(p)[structs.F_FIRST], ws.out(p)[structs.F_SECOND]
        if equivalent(ws.extract(snap), ws.extract(ns)):
            ws.merge(live, nf)
            return pair_nodes
    return pair_nodes + [new_pair]


def _ws_union_stores(ws: Workspace, root: int, other_store_head: int) -> None:
    """Set-union the pairs under ``other_store_head`` into ``root``'s STORE."""
    pairs = ws_set_nodes(ws, ws.out(root)[F_STORE])
    for p in ws_set_nodes(ws, other_store_head):
        pairs = _ws_store_add(ws, pairs, p)
    ws.set_arc(root, F_STORE, ws_set(ws, pairs))


def _ws_check_store(ws: Workspace, root: int, rules) -> None:
    """Re-judge every pair whose live half drifted from its snapshot.

    Violations raise; pairs that became decidedly acceptable are dropped;
    pairs still in doubt stay, snapshot untouched.
    """
    kept = []
    changed = False
    for p in ws_set_nodes(ws, ws.out(root)[F_STORE]):
        live = ws.out(p)[structs.F_FIRST]
        snap = ws.out(p)[structs.F_SECOND]
        if equivalent(ws.extract(live), ws.extract(snap)):
            kept.append(p)
            continue
        seq = Sequence(ws.extract(n) for n in structs.ws_list_nodes(ws, live))
        v = verdict(seq, rules)
        if v is LpVerdict.VIOLATED:
            raise LpViolation("pending precedence constraint now violated")
        if v is LpVerdict.POSSIBLE:
            kept.append(p)
        else:
            changed = True
    if changed:
        ws.set_arc(root, F_STORE, ws_set(ws, kept))


def _ws_advance(ws: Workspace, root: int, pos: int, rules,
                rhs_filter: bool) -> None:
    """Move the RHS element at ``pos`` into REC, judging the new sequence.

    A clean verdict leaves the store alone; a possible violation freezes a
    (live, snapshot) pair whose live half shares the recognized elements.
    """
    view = ws_rule_view(ws, root)
    elem = view.rhs[pos]
    remaining = view.rhs[:pos] + view.rhs[pos + 1:]
    if rhs_filter:
        ok = precede_check(ws.extract(elem),
                           [ws.extract(r) for r in remaining], rules)
        if not ok:
            raise PrecedeFilterRejection(
                "element cannot precede the remaining daughters")
    new_rec = view.rec + [elem]
    v = verdict(Sequence(ws.extract(n) for n in new_rec), rules)
    if v is LpVerdict.VIOLATED:
        raise LpViolation("recognized daughters break a precedence rule")
    ws.set_arc(root, F_RHS, ws_list(ws, remaining))
    ws.set_arc(root, F_REC, ws_list(ws, new_rec))
    if v is LpVerdict.POSSIBLE:
        live = ws_list(ws, new_rec)           # fresh cells over shared elements
        snapshot = structs.ws_copy_region(ws, live)
        pair = ws_pair(ws, live, snapshot)
        pairs = ws_set_nodes(ws, ws.out(root)[F_STORE])
        ws.set_arc(root, F_STORE, ws_set(ws, _ws_store_add(ws, pairs, pair)))


# Public wrappers over single rule graphs.  The completer fuses these steps
# in one workspace so that sharing between the two edges' regions survives;
# see _combine.

def advance_dot(rule_graph: FeatureGraph, position: int, rules,
                rhs_filter: bool = True) -> FeatureGraph:
    ws = Workspace(rule_graph.ts)
    root, _ = ws.add(rule_graph)
    _ws_advance(ws, root, position, rules, rhs_filter)
    return ws.extract(root)


def check_lp_store(rule_graph: FeatureGraph, rules) -> FeatureGraph:
    ws = Workspace(rule_graph.ts)
    root, _ = ws.add(rule_graph)
    _ws_check_store(ws, root, rules)
    return ws.extract(root)


def union_stores(rule_graph: FeatureGraph, other: FeatureGraph) -> FeatureGraph:
    """Rule graph with ``other``'s store pairs unioned into its STORE."""
    ws = Workspace(rule_graph.ts)
    root, _ = ws.add(rule_graph)
    other_root, _ = ws.add(other)
    _ws_union_stores(ws, root, ws.out(other_root)[F_STORE])
    return ws.extract(root)


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

class Parser:
    def __init__(self, grammar: Grammar, opts: ParseOptions | None = None):
        self.grammar = grammar
        self.opts = opts or ParseOptions()
        self.rules = list(grammar.lp_rules)
        self._rule_graphs = [(r.graph, r.rhs_size) for r in grammar.id_rules]
        self._rule_graphs += [(g, 1) for g in self._lexical_rules()]

    def _lexical_rules(self):
        """One terminal-consuming rule graph per lexicon entry."""
        out = []
        ts = self.grammar.ts
        for word in self.grammar.lexicon:
            for lhs in self.grammar.lexicon[word]:
                ws = Workspace(ts)
                lhs_node, _ = ws.add(lhs)
                root = ws.fresh(structs.RULE)
                ws.set_arc(root, F_LHS, lhs_node)
                ws.set_arc(root, F_REC, ws_list(ws, []))
                ws.set_arc(root, F_RHS, ws_list(ws, [ws.fresh(word_type(word))]))
                ws.set_arc(root, F_STORE, ws_set(ws, []))
                out.append(ws.extract(root))
        return out

    # -- initialization ----------------------------------------------------

    def initialize(self, words: list[str]) -> Chart:
        """Seed the agenda: validate the input, add the start hypothesis and
        a zero-width passive edge per empty category at every vertex."""
        for i, w in enumerate(words):
            if w not in self.grammar.lexicon:
                raise UnknownWord(w, i + 1)
        chart = Chart(self.grammar, words, self.opts)
        ts = self.grammar.ts
        ws = Workspace(ts)
        sfs, _ = ws.add(self.grammar.start)
        root = ws.fresh(structs.RULE)
        ws.set_arc(root, F_LHS, ws.fresh(START))
        ws.set_arc(root, F_REC, ws_list(ws, []))
        ws.set_arc(root, F_RHS, ws_list(ws, [sfs]))
        ws.set_arc(root, F_STORE, ws_set(ws, []))
        chart.enqueue(Edge(0, 0, ws.extract(root), Provenance("initial"), 1))
        for entry in self.grammar.empties:
            for v in range(len(words) + 1):
                ws = Workspace(ts)
                lhs, _ = ws.add(entry)
                r = ws.fresh(structs.RULE)
                ws.set_arc(r, F_LHS, lhs)
                ws.set_arc(r, F_REC, ws_list(ws, []))
                ws.set_arc(r, F_RHS, ws_list(ws, []))
                ws.set_arc(r, F_STORE, ws_set(ws, []))
                chart.enqueue(Edge(v, v, ws.extract(r), Provenance("initial"), 0))
        return chart

    # -- prediction ----------------------------------------------------------

    def predict(self, chart: Chart, edge: Edge) -> bool:
        """Propose rules for every category in the edge's remaining multiset.

        Returns whether the edge can still contribute: some category matched
        a rule now or in the memo, or nothing was left to predict.
        """
        g = edge.graph
        view = edge.view()
        cats = [n for n in view.rhs if not is_word_type(g.type_of(n))]
        if not cats:
            return True
        v = edge.end
        memo = chart.memo.setdefault(v, [])
        productive = False
        for node in dict.fromkeys(cats):
            cat = restrict(subgraph(g, node), self.grammar.restrictor)
            hit = next((flag for m, flag in memo if subsumes(m, cat)), None)
            if hit is not None:
                productive = productive or hit
                continue
            matched = False
            for rule_graph, size in self._rule_graphs:
                inst = self._instantiate(rule_graph, cat)
                if inst is None:
                    continue
                matched = True
                chart.enqueue(Edge(v, v, inst,
                                   Provenance("predicted", (edge.id,)), size))
            memo.append((cat, matched))
            productive = productive or matched
        return productive

    def _instantiate(self, rule_graph: FeatureGraph,
                     cat: FeatureGraph) -> FeatureGraph | None:
        ws = Workspace(self.grammar.ts)
        root, m = ws.add(rule_graph)
        cat_root, _ = ws.add(cat)
        try:
            ws.merge(ws.out(root)[F_LHS], cat_root)
        except (UnificationFailure, TypeInferenceFailure):
            return None
        return ws.extract(root)

    # -- scanning ------------------------------------------------------------

    def scan(self, chart: Chart, edge: Edge) -> None:
        """Consume the next input word where the edge's multiset offers it."""
        if edge.end >= chart.n:
            return
        w = chart.words[edge.end]
        g = edge.graph
        for pos, node in enumerate(edge.view().rhs):
            if g.type_of(node) != word_type(w):
                continue
            try:
                g2 = advance_dot(g, pos, self.rules, self.opts.rhs_filter)
            except (LpViolation, PrecedeFilterRejection):
                chart.counters["rejected_lp"] += 1
                continue
            chart.enqueue(Edge(edge.start, edge.end + 1, g2,
                               Provenance("scanned", (edge.id,), w),
                               edge.rule_size))

    # -- completion ----------------------------------------------------------

    def complete(self, chart: Chart, edge: Edge) -> None:
        """Try every stored partner of the dequeued edge at all positions."""
        if edge.passive:
            for active in chart.actives_ending(edge.start):
                self._combine(chart, active, edge)
        else:
            for passive in chart.passives_starting(edge.end):
                self._combine(chart, edge, passive)

    def _combine(self, chart: Chart, active: Edge, passive: Edge) -> None:
        g = active.graph
        view = structs.rule_view(g)
        for pos, node in enumerate(view.rhs):
            if is_word_type(g.type_of(node)):
                continue
            built = self._build(chart, active, passive, pos)
            if built is not None:
                chart.enqueue(Edge(active.start, passive.end, built,
                                   Provenance("completed", (active.id, passive.id)),
                                   active.rule_size))

    def _build(self, chart: Chart, active: Edge, passive: Edge,
               pos: int) -> FeatureGraph | None:
        """One combination attempt: union stores, unify the passive mother
        into the chosen slot, re-check the store, advance the dot."""
        ws = Workspace(self.grammar.ts)
        a_root, _ = ws.add(active.graph)
        p_root, _ = ws.add(passive.graph)
        a_view = ws_rule_view(ws, a_root)
        p_view = ws_rule_view(ws, p_root)
        try:
            _ws_union_stores(ws, a_root, ws.out(p_root)[F_STORE])
        except (UnificationFailure, TypeInferenceFailure):
            chart.counters["rejected_store"] += 1
            return None
        try:
            ws.merge(a_view.rhs[pos], p_view.lhs)
        except (UnificationFailure, TypeInferenceFailure):
            chart.counters["rejected_unify"] += 1
            return None
        try:
            _ws_check_store(ws, a_root, self.rules)
        except LpViolation:
            chart.counters["rejected_store"] += 1
            return None
        try:
            _ws_advance(ws, a_root, pos, self.rules, self.opts.rhs_filter)
        except LpViolation:
            chart.counters["rejected_lp"] += 1
            return None
        except PrecedeFilterRejection:
            chart.counters["rejected_precede"] += 1
            return None
        return ws.extract(a_root)

    # -- main loop -----------------------------------------------------------

    def edge_subsumed(self, chart: Chart, edge: Edge) -> bool:
        return any(e.shape == edge.shape and subsumes(e.graph, edge.graph)
                   for e in chart.stored_at(edge.start, edge.end, edge.kind))

    def run(self, chart: Chart) -> Chart:
        """Exhaust the agenda.

        Every dequeued edge completes against the chart and, when active,
        scans and predicts.  Passive edges are always stored; active edges
        only when their prediction could contribute (an active edge whose
        categories match no rule at all can never be completed later, since
        lexical and empty material is proposed up front).
        """
        while chart.agenda:
            edge = chart.agenda.pop() if self.opts.lifo else chart.agenda.popleft()
            chart.counters["dequeued"] += 1
            if self.opts.dedup and self.edge_subsumed(chart, edge):
                chart.counters["rejected_subsumed"] += 1
                continue
            chart.assign_id(edge)
            self.complete(chart, edge)
            if edge.passive:
                chart.store(edge)
            else:
                self.scan(chart, edge)
                if self.predict(chart, edge):
                    chart.store(edge)
                else:
                    chart.counters["dropped_unproductive"] += 1
        return chart

    # -- recognition ---------------------------------------------------------

    def recognize(self, words: list[str]) -> Outcome:
        chart = self.run(self.initialize(words))
        witnesses = []
        for e in chart.stored_at(0, chart.n, "passive"):
            v = e.view()
            if e.graph.type_of(v.lhs) != START or len(v.rec) != 1:
                continue
            if subsumes(self.grammar.start, subgraph(e.graph, v.rec[0])):
                witnesses.append(e)
        clean = [e for e in witnesses if not e.view().pairs]
        if clean:
            status = ACCEPTED
        elif witnesses:
            status = ACCEPTED_PENDING
        else:
            status = REJECTED
        pending = []
        if status == ACCEPTED_PENDING:
            for e in witnesses:
                pending.extend(_store_texts(e.graph))
        trees = extract_parses(chart, witnesses)
        return Outcome(status, witnesses, pending, chart, trees)


def _store_texts(g: FeatureGraph) -> list[str]:
    view = structs.rule_view(g)
    out = []
    for live, snap in view.pairs:
        roots = structs.list_nodes(g, live) + structs.list_nodes(g, snap)
        k = len(structs.list_nodes(g, live))
        texts = serialize_many(g, roots, _display_names(g))
        out.append("(" + " ".join(texts[:k]) + ", " + " ".join(texts[k:]) + ")")
    return out


# --------------------------------------------------------------------------
# Module-level surface
# --------------------------------------------------------------------------

def initialize(grammar: Grammar, words: list[str],
               opts: ParseOptions | None = None) -> Chart:
    return Parser(grammar, opts).initialize(words)


def run(chart: Chart, grammar: Grammar | None = None,
        opts: ParseOptions | None = None) -> Chart:
    return Parser(grammar or chart.grammar, opts or chart.opts).run(chart)


def recognize(grammar: Grammar, words: list[str],
              opts: ParseOptions | None = None) -> Outcome:
    return Parser(grammar, opts).recognize(words)


def edge_subsumed(chart: Chart, edge: Edge) -> bool:
    return any(subsumes(e.graph, edge.graph)
               for e in chart.stored_at(edge.start, edge.end, edge.kind))


# --------------------------------------------------------------------------
# Tree extraction
# --------------------------------------------------------------------------

def extract_parses(chart: Chart, witnesses: list[Edge]) -> list[ParseTree]:
    """Build parse trees by walking completion back-pointers.

    A witness is a passive start-hypothesis edge; the tree of interest is
    the one rooted at its single recognized daughter.
    """
    trees = []
    for w in witnesses:
        prov = w.provenance
        if prov.kind != "completed":
            continue
        trees.append(_tree(chart, chart.by_id[prov.parents[1]]))
    return trees


def _tree(chart: Chart, edge: Edge) -> ParseTree:
    items: list = []
    e = edge
    while True:
        p = e.provenance
        if p.kind == "completed":
            items.append(_tree(chart, chart.by_id[p.parents[1]]))
            e = chart.by_id[p.parents[0]]
        elif p.kind == "scanned":
            items.append(p.word)
            e = chart.by_id[p.parents[0]]
        else:
            break
    items.reverse()
    label = subgraph(edge.graph, edge.view().lhs)
    return ParseTree(label, items)


def format_tree(tree: ParseTree, indent: int = 0) -> str:
    from .avm import serialize_avm
    pad = "  " * indent
    lines = [pad + serialize_avm(tree.label)]
    for c in tree.children:
        if isinstance(c, str):
            lines.append("  " * (indent + 1) + c)
        else:
            lines.append(format_tree(c, indent + 1))
    return "\n".join(lines)


# --------------------------------------------------------------------------
# Chart dump
# --------------------------------------------------------------------------

def _display_names(g: FeatureGraph) -> dict[str, str]:
    return {t: word_of(t) for t in set(g.types.values()) if is_word_type(t)}


def edge_line(edge: Edge, trace: bool = False) -> str:
    g = edge.graph
    view = structs.rule_view(g)
    roots = [view.lhs] + view.rec + view.rhs
    spans = []
    for live, snap in view.pairs:
        ln = structs.list_nodes(g, live)
        sn = structs.list_nodes(g, snap)
        spans.append((len(ln), len(sn)))
        roots += ln + sn
    texts = serialize_many(g, roots, _display_names(g))
    texts = [word_of(g.type_of(n)) if is_word_type(g.type_of(n)) else t
             for n, t in zip(roots, texts)]
    lhs = "***" if g.type_of(view.lhs) == START else texts[0]
    i = 1
    rec = " ".join(texts[i:i + len(view.rec)]); i += len(view.rec)
    rhs = ", ".join(texts[i:i + len(view.rhs)]); i += len(view.rhs)
    pairs = []
    for ln, sn in spans:
        live_t = " ".join(texts[i:i + ln]); i += ln
        snap_t = " ".join(texts[i:i + sn]); i += sn
        pairs.append(f"({live_t}, {snap_t})")
    store = ", ".join(pairs)
    line = f"[{edge.start}, {edge.end}, {lhs} -> [{rec}] • {{{rhs}}}, {{{store}}}]"
    if trace:
        line = f"{edge.id}. {line}  {edge.provenance.trace()}"
    return line


def dump(chart: Chart, trace: bool = False) -> list[str]:
    """One line per stored edge, ordered by (start, end, insertion)."""
    edges = sorted(chart.edges, key=lambda e: (e.start, e.end, e.id))
    return [edge_line(e, trace) for e in edges]
