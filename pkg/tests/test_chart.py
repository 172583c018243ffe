import pytest

from idlp.avm import parse_avm, serialize_avm
from idlp.chart import (
    ACCEPTED,
    ACCEPTED_PENDING,
    REJECTED,
    ParseOptions,
    Parser,
    advance_dot,
    check_lp_store,
    dump,
    edge_subsumed,
    extract_parses,
    initialize,
    recognize,
    union_stores,
)
from idlp.errors import LpViolation, PrecedeFilterRejection, UnknownWord
from idlp.fgraph import equivalent, subgraph, subsumes, unify
from idlp.grammar import load_grammar
from idlp.lp import lp_acceptable
from idlp.structs import is_word_type, rule_view, word_of

PENDING_TEXT = """
% nonlocal grammar fragment whose disambiguating daughters never arrive:
% the parse finishes with the precedence question still open.
type bot bot .
type b sub bot .
type t sub bot .
type num sub bot .
type one sub num .
type two sub num .
type x sub bot .
type y sub bot .
type d sub x .
type e sub y .
approp b F t .
approp t F1 num .
approp t F2 num .
approp x F1 num .
approp y F2 num .
rule [b F:[t F1:#1=num F2:#2=num]] -> [d F1:#1] , [e F2:#2] .
lp [x F1:one] < [y F2:two] .
lex h [d] .
lex i [e] .
start [b] .
"""

EMPTIES_TEXT = """
type bot bot .
type s sub bot .
type np sub bot .
type vp sub bot .
rule [s] -> [np] , [vp] .
lex walks [vp] .
lex she [np] .
empty [np] .
start [s] .
"""


def edge_summary(e):
    g = e.graph
    view = rule_view(g)

    def show(n):
        t = g.type_of(n)
        return word_of(t) if is_word_type(t) else t

    return (e.start, e.end, show(view.lhs),
            tuple(show(n) for n in view.rec),
            tuple(sorted(show(n) for n in view.rhs)),
            e.provenance.kind, len(view.pairs))


# The golden chart for "she walks": spans, dot configuration sketches
# (types of LHS / REC / RHS), provenance kinds and store sizes.
AGREEMENT_GOLDEN = {
    (0, 0, "start", (), ("s",), "initial", 0),
    (0, 0, "s", (), ("np", "vp"), "predicted", 0),
    (0, 0, "np", (), ("she",), "predicted", 0),
    (0, 0, "np", (), ("I",), "predicted", 0),
    (0, 0, "vp", (), ("walks",), "predicted", 0),
    (0, 1, "np", ("she",), (), "scanned", 0),
    (0, 1, "s", ("np",), ("vp",), "completed", 0),
    (1, 1, "vp", (), ("walks",), "predicted", 0),
    (1, 2, "vp", ("walks",), (), "scanned", 0),
    (0, 2, "s", ("np", "vp"), (), "completed", 0),
    (0, 2, "start", ("s",), (), "completed", 0),
}


class TestInitialize:
    def test_start_edge_only(self, agreement):
        chart = initialize(agreement, ["she", "walks"])
        assert len(chart.agenda) == 1
        e = chart.agenda[0]
        assert (e.start, e.end) == (0, 0)
        assert e.graph.type_of(rule_view(e.graph).lhs) == "start"
        rhs = rule_view(e.graph).rhs
        assert len(rhs) == 1
        assert equivalent(subgraph(e.graph, rhs[0]), agreement.start)

    def test_unknown_word_aborts(self, agreement):
        with pytest.raises(UnknownWord) as exc:
            initialize(agreement, ["she", "runs"])
        assert exc.value.word == "runs" and exc.value.position == 2

    def test_empty_categories_seeded_everywhere(self):
        g = load_grammar(EMPTIES_TEXT)
        chart = initialize(g, ["she", "walks"])
        zero_width = [e for e in chart.agenda if e.start == e.end and e.passive]
        assert len(zero_width) == 3  # one per vertex


class TestPredict:
    def test_start_edge_predicts_the_sentence_rule(self, agreement):
        p = Parser(agreement)
        chart = p.initialize(["she", "walks"])
        start_edge = chart.agenda.popleft()
        chart.assign_id(start_edge)
        assert p.predict(chart, start_edge)
        assert len(chart.agenda) == 1
        got = chart.agenda[0]
        assert equivalent(got.graph, agreement.id_rules[0].graph)
        assert got.provenance.kind == "predicted"

    def test_whole_multiset_predicted(self, agreement):
        p = Parser(agreement)
        chart = p.initialize(["she", "walks"])
        start_edge = chart.agenda.popleft()
        chart.assign_id(start_edge)
        p.predict(chart, start_edge)
        rule_edge = chart.agenda.popleft()
        chart.assign_id(rule_edge)
        p.predict(chart, rule_edge)
        # np matches two lexical entries, vp one: all daughters predicted
        assert len(chart.agenda) == 3

    def test_memoized_prediction_not_repeated(self, agreement):
        p = Parser(agreement)
        chart = p.initialize(["she", "walks"])
        start_edge = chart.agenda.popleft()
        chart.assign_id(start_edge)
        p.predict(chart, start_edge)
        n = len(chart.agenda)
        assert p.predict(chart, start_edge)   # flag reused from the memo
        assert len(chart.agenda) == n


class TestAdvanceDot:
    def test_clean_first_daughter(self, agreement):
        rule = agreement.id_rules[0].graph
        g2 = advance_dot(rule, 0, agreement.lp_rules)
        view = rule_view(g2)
        assert len(view.rec) == 1 and len(view.rhs) == 1
        assert view.pairs == []

    def test_doubtful_order_freezes_a_pair(self, nonlocal_g):
        b_rule = nonlocal_g.id_rules[1].graph
        g2 = advance_dot(b_rule, 1, nonlocal_g.lp_rules)   # e first
        g3 = advance_dot(g2, 0, nonlocal_g.lp_rules)       # then d
        view = rule_view(g3)
        assert len(view.pairs) == 1
        live, snap = view.pairs[0]
        # snapshot is detached and equivalent to the live sequence
        assert equivalent(subgraph(g3, live), subgraph(g3, snap))
        # live half shares the recognized elements, snapshot does not
        from idlp.structs import list_nodes
        assert list_nodes(g3, live) == view.rec
        assert not set(list_nodes(g3, snap)) & set(view.rec)

    def test_instantiated_violation_fails(self, nonlocal_g):
        b_rule = nonlocal_g.id_rules[1].graph
        forced = unify(b_rule, parse_avm("[rule LHS:[b F:[t F1:one F2:two]]]",
                                         nonlocal_g.ts))
        # the early filter already refuses to put e before d here
        with pytest.raises(PrecedeFilterRejection):
            advance_dot(forced, 1, nonlocal_g.lp_rules, rhs_filter=True)
        # without it, the ordering verdict catches the violation one step later
        g2 = advance_dot(forced, 1, nonlocal_g.lp_rules, rhs_filter=False)
        with pytest.raises(LpViolation):
            advance_dot(g2, 0, nonlocal_g.lp_rules)

    def test_precede_filter(self, agreement):
        rule = agreement.id_rules[0].graph
        forced = unify(rule, parse_avm(
            "[rule LHS:[s] RHS:[nelist HD:[np] TL:[nelist HD:[vp VFORM:fin]]]]",
            agreement.ts))
        with pytest.raises(PrecedeFilterRejection):
            advance_dot(forced, 1, agreement.lp_rules, rhs_filter=True)
        # without the filter the single-element sequence is still clean
        g2 = advance_dot(forced, 1, agreement.lp_rules, rhs_filter=False)
        assert len(rule_view(g2).rec) == 1


def _paired_graph(nonlocal_g, instantiate: str | None = None):
    b_rule = nonlocal_g.id_rules[1].graph
    if instantiate:
        b_rule = unify(b_rule, parse_avm(instantiate, nonlocal_g.ts))
    g2 = advance_dot(b_rule, 1, nonlocal_g.lp_rules)
    return advance_dot(g2, 0, nonlocal_g.lp_rules)


class TestUnionStores:
    def test_empty_union(self, nonlocal_g):
        host = _paired_graph(nonlocal_g)
        empty = nonlocal_g.id_rules[0].graph
        assert len(rule_view(union_stores(host, empty)).pairs) == 1
        assert len(rule_view(union_stores(empty, host)).pairs) == 1

    def test_inequivalent_snapshots_kept(self, nonlocal_g):
        host = _paired_graph(nonlocal_g)
        other = _paired_graph(nonlocal_g, "[rule LHS:[b F:[t F1:one]]]")
        assert len(rule_view(union_stores(host, other)).pairs) == 2

    def test_equivalent_snapshots_collapse_and_unify_lives(self, nonlocal_g):
        host = _paired_graph(nonlocal_g)
        other = _paired_graph(nonlocal_g)
        merged = union_stores(host, other)
        assert len(rule_view(merged).pairs) == 1


class TestCheckLpStore:
    def test_empty_store_passes(self, nonlocal_g):
        rule = nonlocal_g.id_rules[0].graph
        assert equivalent(check_lp_store(rule, nonlocal_g.lp_rules), rule)

    def test_unchanged_pair_passes_through(self, nonlocal_g):
        host = _paired_graph(nonlocal_g)
        assert len(rule_view(check_lp_store(host, nonlocal_g.lp_rules)).pairs) == 1

    def test_violation_detected_after_instantiation(self, nonlocal_g):
        host = _paired_graph(nonlocal_g)
        forced = unify(host, parse_avm("[rule LHS:[b F:[t F1:one F2:two]]]",
                                       nonlocal_g.ts))
        with pytest.raises(LpViolation):
            check_lp_store(forced, nonlocal_g.lp_rules)

    def test_settled_pair_dropped(self, nonlocal_g):
        host = _paired_graph(nonlocal_g)
        forced = unify(host, parse_avm("[rule LHS:[b F:[t F1:two F2:one]]]",
                                       nonlocal_g.ts))
        got = check_lp_store(forced, nonlocal_g.lp_rules)
        assert rule_view(got).pairs == []


class TestEdgeSubsumption:
    def _chart_with(self, grammar, text):
        p = Parser(grammar)
        chart = p.initialize(["she", "walks"])
        chart.agenda.clear()
        e = _mk_edge(grammar, text)
        chart.store(e)
        return p, chart

    def test_exact_duplicate(self, agreement):
        p, chart = self._chart_with(agreement, "[rule LHS:[np]]")
        assert p.edge_subsumed(chart, _mk_edge(agreement, "[rule LHS:[np]]"))

    def test_general_newcomer_kept(self, agreement):
        p, chart = self._chart_with(agreement, "[rule LHS:[np AGR:3pers]]")
        newcomer = _mk_edge(agreement, "[rule LHS:[np]]")
        assert not p.edge_subsumed(chart, newcomer)
        chart.store(newcomer)   # antichain: the specific stored edge is evicted
        assert len(chart.stored_at(0, 0, "passive")) == 1

    def test_store_contents_distinguish_edges(self, nonlocal_g):
        plain = _paired_graph(nonlocal_g)
        cleaned = check_lp_store(
            unify(plain, parse_avm("[rule LHS:[b F:[t F1:two F2:one]]]",
                                   nonlocal_g.ts)),
            nonlocal_g.lp_rules)
        # same span and kind, but the stores differ: neither subsumes the other
        assert not subsumes(plain, cleaned) or not subsumes(cleaned, plain)


def _mk_edge(grammar, text):
    from idlp.chart import Edge, Provenance
    from idlp.fgraph import Workspace
    from idlp.structs import F_LHS, F_REC, F_RHS, F_STORE, RULE, ws_list, ws_set
    inner = parse_avm(text, grammar.ts)
    if inner.type_of(inner.root) == RULE:
        g = inner
        missing = {F_REC, F_RHS} - set(g.arcs[g.root])
        if missing:
            ws = Workspace(grammar.ts)
            root, _ = ws.add(g)
            for f in (F_REC, F_RHS):
                if f not in ws.out(root):
                    ws.set_arc(root, f, ws_list(ws, []))
            if F_STORE not in ws.out(root):
                ws.set_arc(root, F_STORE, ws_set(ws, []))
            g = ws.extract(root)
    return Edge(0, 0, g, Provenance("initial"), 0)


class TestGoldenCharts:
    def test_agreement_chart_line_for_line(self, agreement):
        out = recognize(agreement, ["she", "walks"])
        assert out.status == ACCEPTED
        got = {edge_summary(e) for e in out.chart.edges}
        assert got == AGREEMENT_GOLDEN
        assert out.chart.counters["stored"] == 11

    def test_nonlocal_chart(self, nonlocal_g):
        out = recognize(nonlocal_g, ["i", "h", "j", "k"])
        assert out.status == REJECTED
        assert out.chart.counters["stored"] == 22
        b_edges = [e for e in out.chart.edges
                   if (e.start, e.end) == (0, 2) and e.passive]
        assert len(b_edges) == 1
        assert len(rule_view(b_edges[0].graph).pairs) == 1
        assert not [e for e in out.chart.edges
                    if (e.start, e.end) == (0, 4)]
        # exactly one combination was rejected by the woken store check
        assert out.chart.counters["rejected_store"] == 1

    def test_nonlocal_good_order(self, nonlocal_g):
        out = recognize(nonlocal_g, ["h", "i", "j", "k"])
        assert out.status == ACCEPTED


class TestRecognize:
    def test_statuses(self, agreement):
        assert recognize(agreement, ["she", "walks"]).status == ACCEPTED
        assert recognize(agreement, ["walks", "she"]).status == REJECTED
        assert recognize(agreement, ["I", "walks"]).status == REJECTED

    def test_accepted_pending(self):
        g = load_grammar(PENDING_TEXT)
        out = recognize(g, ["i", "h"])
        assert out.status == ACCEPTED_PENDING
        assert out.pending
        assert all(rule_view(w.graph).pairs for w in out.witnesses)
        # the pending reading still has a tree
        assert len(out.trees) == 1

    def test_accepted_implies_clean_witness(self, agreement):
        out = recognize(agreement, ["she", "walks"])
        assert any(not rule_view(w.graph).pairs for w in out.witnesses)

    def test_empty_input_rejected_without_empty_categories(self, agreement):
        assert recognize(agreement, []).status == REJECTED

    def test_empty_categories_fill_gaps(self):
        g = load_grammar(EMPTIES_TEXT)
        assert recognize(g, ["walks"]).status == ACCEPTED
        assert recognize(g, ["she", "walks"]).status == ACCEPTED


class TestTrees:
    def test_agreement_tree_shape(self, agreement):
        out = recognize(agreement, ["she", "walks"])
        [tree] = out.trees
        assert serialize_avm(tree.label) == "[s VFORM:fin]"
        assert tree.leaves() == ["she", "walks"]
        np, vp = tree.children
        assert serialize_avm(np.label) == "[np AGR:3pers CASE:nom]"
        assert np.children == ["she"]
        assert serialize_avm(vp.label) == "[vp AGR:3pers VFORM:fin]"

    def test_free_order_second_tree(self, agreement_free):
        out = recognize(agreement_free, ["walks", "she"])
        [tree] = out.trees
        assert tree.leaves() == ["walks", "she"]
        vp, np = tree.children
        assert vp.label.type_of(vp.label.root) == "vp"
        assert np.label.type_of(np.label.root) == "np"

    def test_rejected_outcome_has_no_trees(self, agreement):
        assert extract_parses(recognize(agreement, ["walks", "she"]).chart, []) == []
        assert recognize(agreement, ["walks", "she"]).trees == []


class TestRunInvariants:
    @pytest.mark.parametrize("words", [["she", "walks"], ["walks", "she"]])
    def test_every_stored_rec_is_acceptable(self, agreement, words):
        out = recognize(agreement, words)
        for e in out.chart.edges:
            view = rule_view(e.graph)
            seq = [subgraph(e.graph, n) for n in view.rec]
            assert lp_acceptable(seq, agreement.lp_rules)

    def test_passive_rec_length_matches_rule_size(self, nonlocal_g):
        out = recognize(nonlocal_g, ["h", "i", "j", "k"])
        for e in out.chart.edges:
            if e.passive:
                assert len(rule_view(e.graph).rec) == e.rule_size

    @pytest.mark.parametrize("fixture,words", [
        ("agreement", ["she", "walks"]),
        ("nonlocal_g", ["i", "h", "j", "k"]),
        ("nonlocal_g", ["h", "i", "j", "k"]),
    ])
    def test_agenda_policy_irrelevant(self, request, fixture, words):
        g = request.getfixturevalue(fixture)
        fifo = Parser(g, ParseOptions(lifo=False)).recognize(words)
        lifo = Parser(g, ParseOptions(lifo=True)).recognize(words)
        assert fifo.status == lifo.status
        assert len(fifo.chart.edges) == len(lifo.chart.edges)
        for e in fifo.chart.edges:
            assert any(e.start == f.start and e.end == f.end
                       and equivalent(e.graph, f.graph)
                       for f in lifo.chart.edges)

    @pytest.mark.parametrize("fixture,words", [
        ("agreement", ["she", "walks"]),
        ("agreement", ["walks", "she"]),
        ("nonlocal_g", ["i", "h", "j", "k"]),
        ("nonlocal_g", ["h", "i", "j", "k"]),
    ])
    def test_dedup_and_filter_do_not_change_status(self, request, fixture, words):
        g = request.getfixturevalue(fixture)
        base = recognize(g, words).status
        for opts in (ParseOptions(dedup=False), ParseOptions(rhs_filter=False),
                     ParseOptions(dedup=False, rhs_filter=False)):
            assert Parser(g, opts).recognize(words).status == base

    def test_counter_sanity(self, agreement, nonlocal_g):
        for g, words in ((agreement, ["she", "walks"]),
                         (nonlocal_g, ["i", "h", "j", "k"])):
            c = recognize(g, words).chart.counters
            assert c["stored"] <= c["enqueued"]
            assert c["dequeued"] <= c["enqueued"]


class TestDump:
    def test_dump_is_sorted_and_complete(self, agreement):
        out = recognize(agreement, ["she", "walks"])
        lines = dump(out.chart)
        assert len(lines) == 11
        spans = [tuple(map(int, l[1:l.index(",", l.index(",") + 1)].split(", ")))
                 for l in lines]
        assert spans == sorted(spans)

    def test_trace_provenance_prefixes(self, agreement):
        out = recognize(agreement, ["she", "walks"])
        lines = dump(out.chart, trace=True)
        assert any("Ini." in l for l in lines)
        assert any("Scan.&" in l for l in lines)
        assert any("Pred.&" in l for l in lines)
        assert any("Comp.&" in l for l in lines)

    def test_store_pairs_rendered(self, nonlocal_g):
        out = recognize(nonlocal_g, ["i", "h", "j", "k"])
        lines = dump(out.chart)
        assert any("[e F2:num] [d F1:num])" in l for l in lines)
