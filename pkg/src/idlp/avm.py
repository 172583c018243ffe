"""Attribute-value matrix notation for feature graphs.

Syntax::

    AVM   := "[" TYPE (FEAT ":" VALUE)* "]"
    VALUE := AVM | TYPE | TAG "=" VALUE | TAG
    TAG   := "#" integer

``%`` starts a comment running to end of line; whitespace is insignificant.
Tags express node sharing.  The serializer is canonical: features print in
alphabetical order, tags are numbered in first-visit order of a depth-first
walk, and a shared node prints in full at its first occurrence and as a bare
tag afterwards.  A cyclic root serializes (and parses back) as ``#1=[...]``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import AvmSyntaxError, UnknownTag, UnknownType
from .fgraph import FeatureGraph, Workspace, fresh_node, type_infer
from .hierarchy import TypeSystem

_TOKEN = re.compile(r"\s*(?:(%[^\n]*)|(\[)|(\])|(:)|(=)|(#\d+)|([A-Za-z0-9_$*]+)|(.))")


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    for m in _TOKEN.finditer(text):
        comment, lb, rb, colon, eq, tag, ident, other = m.groups()
        if comment is not None:
            continue
        if lb:
            toks.append(_Tok("[", lb, m.start()))
        elif rb:
            toks.append(_Tok("]", rb, m.start()))
        elif colon:
            toks.append(_Tok(":", colon, m.start()))
        elif eq:
            toks.append(_Tok("=", eq, m.start()))
        elif tag:
            toks.append(_Tok("tag", tag, m.start()))
        elif ident:
            toks.append(_Tok("ident", ident, m.start()))
        elif other and other.strip():
            raise AvmSyntaxError(f"unexpected character {other!r}")
    return toks


class AvmReader:
    """Recursive-descent reader building raw nodes into a workspace.

    One reader may parse several AVMs in sequence; tag bindings persist, so
    reentrancies can span the pieces of a single grammar rule.
    """

    def __init__(self, ts: TypeSystem, line: int | None = None):
        self.ts = ts
        self.line = line
        self.types: dict[int, str] = {}
        self.arcs: dict[int, dict[str, int]] = {}
        self.tags: dict[str, int] = {}

    def _node(self, type_name: str) -> int:
        if type_name not in self.ts.hierarchy.types:
            raise UnknownType(f"undeclared type {type_name!r}", self.line)
        q = fresh_node()
        self.types[q] = type_name
        self.arcs[q] = {}
        return q

    def read(self, toks: list[_Tok], i: int = 0) -> tuple[int, int]:
        """Parse one value starting at token ``i``; returns (node, next index)."""
        if i >= len(toks):
            raise AvmSyntaxError("unexpected end of input", self.line)
        t = toks[i]
        if t.kind == "tag":
            if i + 1 < len(toks) and toks[i + 1].kind == "=":
                if t.text in self.tags:
                    raise AvmSyntaxError(f"tag {t.text} bound twice", self.line)
                nxt = toks[i + 2] if i + 2 < len(toks) else None
                if nxt is None:
                    raise AvmSyntaxError("dangling tag binding", self.line)
                if nxt.kind == "ident":
                    q = self._node(nxt.text)
                    self.tags[t.text] = q
                    return q, i + 3
                if nxt.kind == "[":
                    # Bind before descending so cycles can refer back.
                    q = self._node(self.ts.bottom)
                    self.tags[t.text] = q
                    return self._read_avm_into(q, toks, i + 2)
                raise AvmSyntaxError(f"bad value after {t.text}=", self.line)
            if t.text not in self.tags:
                raise UnknownTag(f"tag {t.text} used before binding", self.line)
            return self.tags[t.text], i + 1
        if t.kind == "ident":
            return self._node(t.text), i + 1
        if t.kind == "[":
            q = self._node(self.ts.bottom)
            return self._read_avm_into(q, toks, i)
        raise AvmSyntaxError(f"unexpected token {t.text!r}", self.line)

    def _read_avm_into(self, q: int, toks: list[_Tok], i: int) -> tuple[int, int]:
        if toks[i].kind != "[":
            raise AvmSyntaxError("expected '['", self.line)
        i += 1
        if i >= len(toks) or toks[i].kind != "ident":
            raise AvmSyntaxError("expected type name after '['", self.line)
        if toks[i].text not in self.ts.hierarchy.types:
            raise UnknownType(f"undeclared type {toks[i].text!r}", self.line)
        self.types[q] = toks[i].text
        i += 1
        while i < len(toks) and toks[i].kind != "]":
            if toks[i].kind != "ident":
                raise AvmSyntaxError(f"expected feature name, got {toks[i].text!r}",
                                     self.line)
            feat = toks[i].text
            if i + 1 >= len(toks) or toks[i + 1].kind != ":":
                raise AvmSyntaxError(f"expected ':' after feature {feat!r}", self.line)
            if feat in self.arcs[q]:
                raise AvmSyntaxError(f"feature {feat!r} given twice", self.line)
            val, i = self.read(toks, i + 2)
            self.arcs[q][feat] = val
        if i >= len(toks):
            raise AvmSyntaxError("missing closing ']'", self.line)
        return q, i + 1

    def graph(self, root: int) -> FeatureGraph:
        return FeatureGraph.build(self.ts, root, self.types, self.arcs)


def parse_avm(text: str, ts: TypeSystem, line: int | None = None,
              infer: bool = True) -> FeatureGraph:
    """Parse one AVM and return its graph, type-inferred unless ``infer=False``
    (raw graphs are only useful as unification operands)."""
    reader = AvmReader(ts, line)
    toks = _tokenize(text)
    root, nxt = reader.read(toks)
    if nxt != len(toks):
        raise AvmSyntaxError(f"trailing input after AVM: {toks[nxt].text!r}", line)
    g = reader.graph(root)
    return type_infer(g) if infer else g


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------

def serialize_avm(g: FeatureGraph, node: int | None = None,
                  rename: dict[str, str] | None = None) -> str:
    """Canonical text form of the region of ``g`` rooted at ``node``.

    ``rename`` optionally maps type names for display (the chart dumper uses
    it to print reserved types).
    """
    root = g.root if node is None else node
    shared = _shared_nodes(g, root)
    tag_no: dict[int, int] = {}
    out: list[str] = []
    _emit(g, root, shared, tag_no, out, rename or {}, top=True)
    return "".join(out)


def serialize_many(g: FeatureGraph, roots: list[int],
                   rename: dict[str, str] | None = None) -> list[str]:
    """Serialize several regions of one host with a shared tag numbering,
    so reentrancies across the regions stay visible."""
    refs: dict[int, int] = {}
    seen: set[int] = set()
    for r in roots:
        refs[r] = refs.get(r, 0) + 1
        stack = [r] if r not in seen else []
        seen.add(r)
        while stack:
            q = stack.pop()
            for f in sorted(g.arcs.get(q, {})):
                t = g.arcs[q][f]
                refs[t] = refs.get(t, 0) + 1
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
    shared = {q for q, n in refs.items() if n > 1}
    tag_no: dict[int, int] = {}
    texts = []
    for r in roots:
        out: list[str] = []
        _emit(g, r, shared, tag_no, out, rename or {}, top=True)
        texts.append("".join(out))
    return texts


def _shared_nodes(g: FeatureGraph, root: int) -> set[int]:
    refs: dict[int, int] = {root: 1}
    stack = [root]
    seen = {root}
    while stack:
        q = stack.pop()
        for f in sorted(g.arcs.get(q, {})):
            r = g.arcs[q][f]
            refs[r] = refs.get(r, 0) + 1
            if r not in seen:
                seen.add(r)
                stack.append(r)
    return {q for q, n in refs.items() if n > 1}


def _emit(g: FeatureGraph, q: int, shared: set[int],
          tag_no: dict[int, int], out: list[str],
          rename: dict[str, str], top: bool = False) -> None:
    if q in tag_no:
        out.append(f"#{tag_no[q]}")
        return
    prefix = ""
    if q in shared:
        tag_no[q] = len(tag_no) + 1
        prefix = f"#{tag_no[q]}="
    tname = rename.get(g.types[q], g.types[q])
    feats = g.arcs.get(q, {})
    if not feats and not top:
        out.append(prefix + tname)
        return
    out.append(f"{prefix}[{tname}")
    for f in sorted(feats):
        out.append(f" {f}:")
        _emit(g, feats[f], shared, tag_no, out, rename)
    out.append("]")
