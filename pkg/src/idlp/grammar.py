"""Grammar representation and the textual grammar format.

A grammar file is line-oriented; ``%`` starts a comment and every statement
ends with ``.``::

    type <name> bot .
    type <name> sub <parent> [, <parent>...] .
    approp <type> <feature> <valuetype> .
    rule <AVM> -> <AVM> [, <AVM>...] .
    lp <AVM> < <AVM> .
    lex <word> <AVM> .
    empty <AVM> .
    start <AVM> .
    restrict <feature>[.<feature>...] [, ...] .

Rule right-hand sides are multisets: the stored order never constrains the
surface order.  Reentrancy tags are scoped to one statement, so a tag may
span the left- and right-hand sides of a rule but never the two sides of an
``lp`` statement.  Terminals are atomic words confined to the lexicon; the
``restrict`` statement is optional and defaults to every path found in rule
right-hand sides and precedence rules.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import structs
from .avm import AvmReader, _tokenize
from .errors import (
    AvmSyntaxError,
    EmptyRuleRhs,
    GrammarError,
    NoStartSymbol,
    ReflexiveLpRule,
    SymmetricLpRules,
)
from .fgraph import FeatureGraph, Restrictor, equivalent, subgraph, type_infer
from .hierarchy import ApproprDecl, SubtypeDecl, TypeSystem
from .lp import LpRule


@dataclass(frozen=True)
class IdRule:
    """One dominance rule stored as a single feature graph.

    The stored form always has an empty REC list and an empty STORE; the
    parser instantiates copies.  ``rhs_size`` is the multiset cardinality.
    """

    graph: FeatureGraph
    rhs_size: int
    line: int | None = None

    @property
    def lhs(self) -> FeatureGraph:
        return subgraph(self.graph, structs.rule_view(self.graph).lhs)

    @property
    def rhs(self) -> list[FeatureGraph]:
        g = self.graph
        return [subgraph(g, n) for n in structs.rule_view(g).rhs]


@dataclass(frozen=True)
class Grammar:
    ts: TypeSystem
    id_rules: tuple[IdRule, ...]
    lp_rules: tuple[LpRule, ...]
    lexicon: dict[str, tuple[FeatureGraph, ...]]
    empties: tuple[FeatureGraph, ...]
    start: FeatureGraph
    restrictor: Restrictor
    restrictor_explicit: bool = False

    def with_lp_closure(self) -> "Grammar":
        return replace(self, lp_rules=tuple(lp_closure(list(self.lp_rules))))

    def with_restrictor(self, r: Restrictor) -> "Grammar":
        return replace(self, restrictor=r, restrictor_explicit=True)


# --------------------------------------------------------------------------
# Loading
# --------------------------------------------------------------------------

def _statements(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        if not line.endswith("."):
            raise GrammarError("statement must end with '.'", lineno)
        yield lineno, line[:-1].strip()


def _split_top(text: str, sep: str) -> list[str]:
    parts = [p.strip() for p in text.split(sep)]
    if any(not p for p in parts):
        raise GrammarError(f"empty item around {sep!r}")
    return parts


def load_grammar(text: str, lp_closure_flag: bool = False) -> Grammar:
    """Parse, type-infer and validate a grammar file."""
    stmts = list(_statements(text))

    # Pass 1: the type signature and the word list.
    subtypes: list[SubtypeDecl] = []
    approps: list[ApproprDecl] = []
    words: list[str] = []
    for lineno, body in stmts:
        kw, _, rest = body.partition(" ")
        rest = rest.strip()
        if kw == "type":
            fields = rest.split()
            if len(fields) >= 2 and fields[1] == "bot" and len(fields) == 2:
                subtypes.append(SubtypeDecl(fields[0], (), lineno))
            elif len(fields) >= 3 and fields[1] == "sub":
                parents = tuple(_split_top(" ".join(fields[2:]), ","))
                subtypes.append(SubtypeDecl(fields[0], parents, lineno))
            else:
                raise GrammarError(f"malformed type declaration: {body!r}", lineno)
        elif kw == "approp":
            fields = rest.split()
            if len(fields) != 3:
                raise GrammarError(f"malformed approp declaration: {body!r}", lineno)
            approps.append(ApproprDecl(fields[0], fields[1], fields[2], lineno))
        elif kw == "lex":
            word = rest.split(None, 1)[0] if rest else ""
            if not word:
                raise GrammarError("lex statement needs a word", lineno)
            words.append(word)
        elif kw not in ("rule", "lp", "empty", "start", "restrict"):
            raise GrammarError(f"unknown statement {kw!r}", lineno)

    structs.check_no_reserved([d.name for d in subtypes])
    if not subtypes:
        raise GrammarError("grammar declares no types")
    bottom = next((d.name for d in subtypes if not d.parents), None)
    if bottom is None:
        raise GrammarError("no bottom type declared (use 'type <name> bot .')")
    r_subs, r_apps = structs.reserved_decls(bottom, words)
    ts = TypeSystem.from_decls(subtypes + r_subs, approps + r_apps)

    # Pass 2: graphs.
    id_rules: list[IdRule] = []
    lp_rules: list[LpRule] = []
    lp_lines: list[int] = []
    lexicon: dict[str, list[FeatureGraph]] = {}
    empties: list[FeatureGraph] = []
    start: FeatureGraph | None = None
    restrict_paths: list[tuple[str, ...]] = []
    explicit_restrictor = False

    for lineno, body in stmts:
        kw, _, rest = body.partition(" ")
        rest = rest.strip()
        if kw == "rule":
            lhs_text, _, rhs_text = rest.partition("->")
            if not rhs_text.strip():
                raise EmptyRuleRhs("rule has no right-hand side", lineno)
            reader = AvmReader(ts, lineno)
            lhs_root = _read_one(reader, lhs_text, lineno)
            rhs_roots = [_read_one(reader, part, lineno)
                         for part in _split_top(rhs_text, ",")]
            id_rules.append(_make_rule(ts, reader, lhs_root, rhs_roots, lineno))
        elif kw == "lp":
            first_text, _, second_text = rest.partition("<")
            if not second_text.strip():
                raise GrammarError("lp statement needs '<'", lineno)
            first = _parse_graph(ts, first_text, lineno)
            second = _parse_graph(ts, second_text, lineno)
            if equivalent(first, second):
                raise ReflexiveLpRule(
                    "precedence rule orders a category before itself", lineno)
            lp_rules.append(LpRule(first, second))
            lp_lines.append(lineno)
        elif kw == "lex":
            word, _, avm_text = rest.partition(" ")
            g = _parse_graph(ts, avm_text, lineno)
            lexicon.setdefault(word, []).append(g)
        elif kw == "empty":
            empties.append(_parse_graph(ts, rest, lineno))
        elif kw == "start":
            start = _parse_graph(ts, rest, lineno)
        elif kw == "restrict":
            explicit_restrictor = True
            for part in _split_top(rest, ","):
                restrict_paths.append(tuple(part.split(".")))

    if start is None:
        raise NoStartSymbol("grammar declares no start graph")
    for i, r1 in enumerate(lp_rules):
        for j in range(i + 1, len(lp_rules)):
            r2 = lp_rules[j]
            if equivalent(r1.first, r2.second) and equivalent(r1.second, r2.first):
                raise SymmetricLpRules(
                    "precedence rules order the same pair both ways", lp_lines[j])

    g = Grammar(
        ts=ts,
        id_rules=tuple(id_rules),
        lp_rules=tuple(lp_rules),
        lexicon={w: tuple(gs) for w, gs in lexicon.items()},
        empties=tuple(empties),
        start=start,
        restrictor=Restrictor(restrict_paths) if explicit_restrictor else Restrictor([]),
        restrictor_explicit=explicit_restrictor,
    )
    if not explicit_restrictor:
        g = replace(g, restrictor=default_restrictor(g), restrictor_explicit=False)
    if lp_closure_flag:
        g = g.with_lp_closure()
    return g


def _read_one(reader: AvmReader, text: str, lineno: int) -> int:
    toks = _tokenize(text)
    root, nxt = reader.read(toks)
    if nxt != len(toks):
        raise AvmSyntaxError(f"trailing input in {text.strip()!r}", lineno)
    return root


def _parse_graph(ts: TypeSystem, text: str, lineno: int) -> FeatureGraph:
    reader = AvmReader(ts, lineno)
    root = _read_one(reader, text, lineno)
    return type_infer(reader.graph(root))


def _make_rule(ts: TypeSystem, reader: AvmReader, lhs_root: int,
               rhs_roots: list[int], lineno: int) -> IdRule:
    types, arcs = reader.types, reader.arcs
    root = structs.raw_node(types, arcs, structs.RULE)
    arcs[root][structs.F_LHS] = lhs_root
    arcs[root][structs.F_REC] = structs.raw_node(types, arcs, structs.ELIST)
    arcs[root][structs.F_RHS] = structs.raw_list(types, arcs, rhs_roots)
    arcs[root][structs.F_STORE] = structs.raw_node(types, arcs, structs.ESET)
    graph = type_infer(FeatureGraph.build(ts, root, types, arcs))
    return IdRule(graph, len(rhs_roots), lineno)


# --------------------------------------------------------------------------
# Derived data
# --------------------------------------------------------------------------

def default_restrictor(g: Grammar) -> Restrictor:
    """Every feature path in any rule's right-hand side elements, plus every
    path in any precedence rule, prefix-closed."""
    paths: list[tuple[str, ...]] = []
    for rule in g.id_rules:
        host = rule.graph
        for elem in structs.rule_view(host).rhs:
            paths.extend(subgraph(host, elem).paths())
    for lp in g.lp_rules:
        paths.extend(lp.first.paths())
        paths.extend(lp.second.paths())
    return Restrictor(paths)


def serialize_grammar(g: Grammar) -> str:
    """Write a grammar back in the textual format.

    Reloading the output reproduces every component graph up to equivalence.
    The appropriateness table is emitted in closed form, which the loader
    accepts unchanged.
    """
    from .avm import serialize_avm, serialize_many

    th = g.ts.hierarchy
    user = sorted(t for t in th.types
                  if t not in structs.RESERVED_TYPES and not structs.is_word_type(t))
    lines = [f"type {th.bottom} bot ."]
    for t in user:
        if t == th.bottom:
            continue
        lowers = [u for u in user if u != t and th.subsumes(u, t)]
        parents = [u for u in lowers
                   if not any(v != u and th.subsumes(u, v) for v in lowers)]
        lines.append(f"type {t} sub {', '.join(sorted(parents))} .")
    for (t, f), v in sorted(g.ts.approp_spec.table.items()):
        if t in structs.RESERVED_TYPES or structs.is_word_type(t):
            continue
        lines.append(f"approp {t} {f} {v} .")
    for rule in g.id_rules:
        view = structs.rule_view(rule.graph)
        texts = serialize_many(rule.graph, [view.lhs] + view.rhs)
        lines.append(f"rule {texts[0]} -> {' , '.join(texts[1:])} .")
    for lp in g.lp_rules:
        lines.append(f"lp {serialize_avm(lp.first)} < {serialize_avm(lp.second)} .")
    for word in sorted(g.lexicon):
        for entry in g.lexicon[word]:
            lines.append(f"lex {word} {serialize_avm(entry)} .")
    for entry in g.empties:
        lines.append(f"empty {serialize_avm(entry)} .")
    lines.append(f"start {serialize_avm(g.start)} .")
    if g.restrictor_explicit:
        paths = sorted(".".join(p) for p in g.restrictor.paths if p)
        if paths:
            lines.append(f"restrict {', '.join(paths)} .")
    return "\n".join(lines) + "\n"


def lp_closure(rules: list[LpRule]) -> list[LpRule]:
    """Close the precedence rules under transitivity.

    New rules are deduplicated by pairwise equivalence; deriving the reverse
    of an existing rule (or a reflexive rule) is an error.
    """
    out = list(rules)

    def present(cand: LpRule) -> bool:
        return any(equivalent(r.first, cand.first) and equivalent(r.second, cand.second)
                   for r in out)

    changed = True
    while changed:
        changed = False
        for r1 in list(out):
            for r2 in list(out):
                if not equivalent(r1.second, r2.first):
                    continue
                cand = LpRule(r1.first, r2.second)
                if present(cand):
                    continue
                if equivalent(cand.first, cand.second) or present(cand.swapped()):
                    raise SymmetricLpRules(
                        "transitive closure derives a contradictory ordering")
                out.append(cand)
                changed = True
    return out
