"""Command-line front end.

Subcommands::

    idlp check   GRAMMAR                  validate and summarize a grammar
    idlp parse   GRAMMAR WORD...          recognize, print trees and warnings
    idlp chart   GRAMMAR WORD...          dump the final chart (--trace adds
                                          provenance prefixes)
    idlp oracle  GRAMMAR WORD...          brute-force verdict + language
    idlp bench   GRAMMAR WORD...          edge counters and wall time

Exit codes: 0 accepted, 1 rejected, 2 accepted with pending precedence
information, 3 any error.  ``--format structured`` emits one JSON document
with the same edge set as the text dump.  Grammar files are searched in the
current directory and then along the ``IDLP_GRAMMAR_PATH`` environment
variable (colon-separated directories).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import structs
from .avm import serialize_avm
from .chart import (
    ACCEPTED,
    ACCEPTED_PENDING,
    Outcome,
    ParseOptions,
    Parser,
    dump,
    edge_line,
    format_tree,
)
from .errors import GrammarError
from .fgraph import Restrictor
from .grammar import Grammar, load_grammar
from .oracle import Bounds, enumerate_language, oracle_recognize

_STATUS_CODE = {ACCEPTED: 0, "rejected": 1, ACCEPTED_PENDING: 2}


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _ArgumentParser:
    p = _ArgumentParser(prog="idlp", description=__doc__,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("check", "parse", "chart", "oracle", "bench"):
        sp = sub.add_parser(name)
        sp.add_argument("grammar", help="grammar file")
        if name != "check":
            sp.add_argument("words", nargs="+", help="sentence, one word per argument")
        sp.add_argument("--lp-closure", action="store_true",
                        help="close precedence rules under transitivity")
        sp.add_argument("--no-rhs-filter", action="store_true",
                        help="disable the early precede filter in the completer")
        sp.add_argument("--no-dedup", action="store_true",
                        help="disable edge subsumption checking")
        sp.add_argument("--trace", action="store_true",
                        help="prefix chart lines with provenance")
        sp.add_argument("--restrict", metavar="PATHS",
                        help="override the restrictor, e.g. 'AGR,F.F1'")
        sp.add_argument("--format", choices=("text", "structured"), default="text")
        if name == "oracle":
            sp.add_argument("--max-depth", type=int, default=8)
            sp.add_argument("--max-len", type=int, default=4)
    return p


def _find_grammar(path: str) -> str:
    if os.path.exists(path):
        return path
    for d in os.environ.get("IDLP_GRAMMAR_PATH", "").split(":"):
        if d and os.path.exists(os.path.join(d, path)):
            return os.path.join(d, path)
    raise GrammarError(f"grammar file not found: {path}")


def _load(args) -> Grammar:
    with open(_find_grammar(args.grammar)) as fh:
        g = load_grammar(fh.read(), lp_closure_flag=args.lp_closure)
    if args.restrict:
        paths = [tuple(p.strip().split(".")) for p in args.restrict.split(",")]
        g = g.with_restrictor(Restrictor(paths))
    return g


def _options(args) -> ParseOptions:
    return ParseOptions(rhs_filter=not args.no_rhs_filter,
                        dedup=not args.no_dedup)


def _edge_json(e) -> dict:
    g = e.graph
    view = structs.rule_view(g)
    return {
        "id": e.id,
        "start": e.start,
        "end": e.end,
        "kind": e.kind,
        "provenance": e.provenance.trace(),
        "line": edge_line(e),
        "store_size": len(view.pairs),
    }


def _tree_json(t) -> dict:
    return {
        "label": serialize_avm(t.label),
        "children": [c if isinstance(c, str) else _tree_json(c)
                     for c in t.children],
    }


def _outcome_json(command: str, out: Outcome) -> dict:
    edges = sorted(out.chart.edges, key=lambda e: (e.start, e.end, e.id))
    return {
        "command": command,
        "status": out.status,
        "edges": [_edge_json(e) for e in edges],
        "counters": dict(out.chart.counters),
        "pending": list(out.pending),
        "trees": [_tree_json(t) for t in out.trees],
    }


def run_cli(argv: list[str]) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except _UsageError as e:
        print(f"idlp: {e}", file=sys.stderr)
        return 3
    try:
        return _dispatch(args)
    except GrammarError as e:
        print(f"idlp: error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"idlp: error: {e}", file=sys.stderr)
        return 3


def _dispatch(args) -> int:
    grammar = _load(args)
    if args.command == "check":
        return _cmd_check(args, grammar)
    if args.command == "oracle":
        return _cmd_oracle(args, grammar)
    t0 = time.monotonic()
    out = Parser(grammar, _options(args)).recognize(list(args.words))
    elapsed = time.monotonic() - t0
    if args.command == "parse":
        _emit_parse(args, out)
    elif args.command == "chart":
        _emit_chart(args, out)
    elif args.command == "bench":
        _emit_bench(args, out, elapsed)
    return _STATUS_CODE[out.status]


def _cmd_check(args, grammar: Grammar) -> int:
    words = sum(len(v) for v in grammar.lexicon.values())
    restrictor = sorted(".".join(p) for p in grammar.restrictor.paths if p)
    if args.format == "structured":
        print(json.dumps({
            "command": "check",
            "rules": len(grammar.id_rules),
            "lp_rules": len(grammar.lp_rules),
            "lexical_entries": words,
            "empty_categories": len(grammar.empties),
            "start": serialize_avm(grammar.start),
            "restrictor": restrictor,
            "restrictor_explicit": grammar.restrictor_explicit,
        }, indent=2))
        return 0
    print(f"rules:            {len(grammar.id_rules)}")
    print(f"lp rules:         {len(grammar.lp_rules)}")
    print(f"lexical entries:  {words} ({len(grammar.lexicon)} words)")
    print(f"empty categories: {len(grammar.empties)}")
    print(f"start:            {serialize_avm(grammar.start)}")
    origin = "explicit" if grammar.restrictor_explicit else "default"
    print(f"restrictor ({origin}): {', '.join(restrictor) if restrictor else '<root only>'}")
    return 0


def _emit_parse(args, out: Outcome) -> None:
    if args.format == "structured":
        print(json.dumps(_outcome_json("parse", out), indent=2))
        return
    print(f"status: {out.status}")
    for t in out.trees:
        print(format_tree(t))
    if out.status == ACCEPTED_PENDING:
        print("warning: parse completed with pending precedence information:")
        for p in out.pending:
            print(f"  {p}")
        print("  (more specific uses of this parse may be ill-ordered; "
              "consider tightening the grammar)")


def _emit_chart(args, out: Outcome) -> None:
    if args.format == "structured":
        print(json.dumps(_outcome_json("chart", out), indent=2))
        return
    for line in dump(out.chart, trace=args.trace):
        print(line)
    print(f"status: {out.status}")


def _emit_bench(args, out: Outcome, elapsed: float) -> None:
    if args.format == "structured":
        doc = _outcome_json("bench", out)
        doc["seconds"] = elapsed
        del doc["edges"], doc["trees"]
        print(json.dumps(doc, indent=2))
        return
    c = out.chart.counters
    print(f"status: {out.status}")
    print(f"time:   {elapsed * 1000:.1f} ms")
    print(f"edges enqueued: {c['enqueued']}")
    print(f"edges stored:   {c['stored']}")
    rejected = {k: v for k, v in c.items() if k.startswith(("rejected", "dropped")) and v}
    for k, v in sorted(rejected.items()):
        print(f"  {k}: {v}")


def _cmd_oracle(args, grammar: Grammar) -> int:
    bounds = Bounds(max_depth=args.max_depth, max_len=args.max_len)
    res = oracle_recognize(grammar, list(args.words), bounds)
    lang = enumerate_language(grammar, bounds)
    sentences = sorted(" ".join(s) for s in lang.sentences)
    if args.format == "structured":
        print(json.dumps({
            "command": "oracle",
            "accepted": res.accepted,
            "truncated": res.truncated or lang.truncated,
            "language": sentences,
        }, indent=2))
    else:
        print(f"oracle: {'accepted' if res.accepted else 'rejected'}"
              + (" (bounds hit)" if res.truncated else ""))
        print(f"language up to length {bounds.max_len}:")
        for s in sentences:
            print(f"  {s}")
    return 0 if res.accepted else 1


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
