"""Shared fixtures: the demo grammars and random structure generators."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from idlp.errors import GrammarError
from idlp.fgraph import FeatureGraph, copy as g_copy, fresh_node, well_typed
from idlp.grammar import Grammar, load_grammar
from idlp.hierarchy import ApproprDecl, SubtypeDecl, TypeSystem

GRAMMARS = Path(__file__).resolve().parent.parent / "grammars"


@pytest.fixture(scope="session")
def small_ts() -> TypeSystem:
    """Five-type lattice with one feature, used throughout the graph tests:
    bot below a and d, a below b and c; F appropriate on b (value bot) and
    on c (value d)."""
    subs = [SubtypeDecl("bot", ()), SubtypeDecl("a", ("bot",)),
            SubtypeDecl("b", ("a",)), SubtypeDecl("c", ("a",)),
            SubtypeDecl("d", ("bot",))]
    apps = [ApproprDecl("b", "F", "bot"), ApproprDecl("c", "F", "d")]
    return TypeSystem.from_decls(subs, apps)


def _load(name: str) -> Grammar:
    return load_grammar((GRAMMARS / name).read_text())


@pytest.fixture(scope="session")
def agreement() -> Grammar:
    return _load("agreement.g")


@pytest.fixture(scope="session")
def agreement_free() -> Grammar:
    return _load("agreement-free.g")


@pytest.fixture(scope="session")
def nonlocal_g() -> Grammar:
    return _load("nonlocal.g")


# --------------------------------------------------------------------------
# Random generators (deterministic per seed)
# --------------------------------------------------------------------------

def rand_type_system(rng: random.Random, n_types: int = 8,
                     n_features: int = 3) -> TypeSystem:
    """Random tree-shaped hierarchy (trees are always bounded complete) with
    an upward-closed appropriateness table."""
    names = [f"t{i}" for i in range(n_types)]
    subs = [SubtypeDecl("bot", ())]
    for i, n in enumerate(names):
        parent = "bot" if i == 0 else rng.choice(["bot"] + names[:i])
        subs.append(SubtypeDecl(n, (parent,)))
    feats = [f"F{i}" for i in range(n_features)]
    for _ in range(20):
        apps = []
        for f in feats:
            for _ in range(rng.randint(1, 2)):
                apps.append(ApproprDecl(rng.choice(names), f,
                                        rng.choice(["bot"] + names)))
        try:
            return TypeSystem.from_decls(subs, apps)
        except GrammarError:
            continue
    return TypeSystem.from_decls(subs, [])


def rand_graph(rng: random.Random, ts: TypeSystem, max_nodes: int = 6,
               cycles: bool = False) -> FeatureGraph:
    """Random well-typed graph: features only where appropriate, values at
    least as specific as demanded, occasional reentrancy."""
    th = ts.hierarchy
    types: dict[int, str] = {}
    arcs: dict[int, dict[str, int]] = {}

    def specialization(lower: str) -> str:
        return rng.choice(sorted(th.upward_closure(lower)))

    def grow(t: str, budget: list[int]) -> int:
        q = fresh_node()
        types[q] = t
        arcs[q] = {}
        feats = sorted(f for (u, f) in ts.approp_spec.table if u == t)
        for f in feats:
            if budget[0] <= 0 or rng.random() < 0.45:
                continue
            want = ts.approp(t, f)
            reusable = [r for r in types
                        if th.subsumes(want, types[r]) and (cycles or r != q)]
            if reusable and rng.random() < 0.25:
                arcs[q][f] = rng.choice(sorted(reusable))
            else:
                budget[0] -= 1
                arcs[q][f] = grow(specialization(want), budget)
        return q

    root = grow(specialization(th.bottom), [max_nodes - 1])
    g = FeatureGraph.build(ts, root, types, arcs)
    assert well_typed(g)
    return g


def generalize(rng: random.Random, g: FeatureGraph) -> FeatureGraph:
    """A random graph that subsumes ``g``: drop features, then lower types
    where well-typedness survives."""
    th = g.ts.hierarchy
    types = dict(g.types)
    arcs = {q: dict(a) for q, a in g.arcs.items()}
    for q in list(arcs):
        for f in list(arcs[q]):
            if rng.random() < 0.3:
                del arcs[q][f]
    out = FeatureGraph.build(g.ts, g.root, types, arcs)
    for q in list(out.types):
        t = out.types[q]
        lowers = sorted(u for u in th.types
                        if th.subsumes(u, t) and u != t
                        and not u.startswith("$") and u not in
                        ("rule", "elist", "nelist", "pair", "eset", "neset", "start"))
        if lowers and rng.random() < 0.4:
            candidate = dict(out.types)
            candidate[q] = rng.choice(lowers)
            trial = FeatureGraph(g.ts, out.root, candidate, out.arcs)
            if well_typed(trial):
                out = trial
    return g_copy(out)


def rand_grammar(rng: random.Random) -> Grammar:
    """Small random grammar in the textual format: one category type, a
    two-valued feature family, branching rules with occasional reentrancy
    between daughters (the channel precedence stores exist for), and a
    couple of precedence rules."""
    lines = [
        "type bot bot .",
        "type c sub bot .",
        "type v sub bot .",
        "type v1 sub v .",
        "type v2 sub v .",
        "approp c A v .",
        "approp c B v .",
    ]
    vals = ["v", "v1", "v2"]

    def cat(maybe_shared: str | None = None) -> str:
        feats = []
        for f in ("A", "B"):
            r = rng.random()
            if r < 0.35:
                feats.append(f"{f}:{rng.choice(vals)}")
            elif r < 0.5 and maybe_shared:
                feats.append(f"{f}:{maybe_shared}")
        return "[c" + (" " + " ".join(feats) if feats else "") + "]"

    n_rules = rng.randint(1, 3)
    for i in range(n_rules):
        share = f"#{i + 1}=v" if rng.random() < 0.6 else None
        width = rng.choice((2, 2, 3))
        daughters = []
        for _ in range(width):
            daughters.append(cat(f"#{i + 1}" if share else None))
        lhs = cat(f"#{i + 1}" if share and rng.random() < 0.5 else None)
        if share and not any(f"#{i + 1}" in d for d in daughters + [lhs]):
            daughters[0] = f"[c A:#{i + 1}=v]"
            daughters[-1] = f"[c B:#{i + 1}]"
        elif share and f"#{i + 1}=" not in lhs + "".join(daughters):
            daughters[0] = daughters[0].replace(f"#{i + 1}", f"#{i + 1}=v", 1)
        lines.append(f"rule {lhs} -> {' , '.join(daughters)} .")
    for w in ("wa", "wb", "wc")[:rng.randint(2, 3)]:
        lines.append(f"lex {w} {cat()} .")
    for _ in range(rng.randint(0, 2)):
        a, b = rng.sample([f"[c A:{v}]" for v in vals] +
                          [f"[c B:{v}]" for v in vals], 2)
        lines.append(f"lp {a} < {b} .")
    lines.append(f"start {cat()} .")
    try:
        return load_grammar("\n".join(lines))
    except GrammarError:
        return rand_grammar(rng)
