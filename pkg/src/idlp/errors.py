"""Exception types shared across the package.

Every error raised while loading or processing a grammar derives from
GrammarError, so callers can catch one class.  Errors carry an optional
source line number for CLI reporting.
"""

from __future__ import annotations


class GrammarError(Exception):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message)

    def __str__(self) -> str:
        msg = super().__str__()
        if self.line is not None:
            return f"line {self.line}: {msg}"
        return msg


# ---------------------------------------------------------------- hierarchy

class UnknownType(GrammarError):
    pass


class CycleInOrder(GrammarError):
    pass


class NoUniqueBottom(GrammarError):
    pass


class NotBoundedComplete(GrammarError):
    def __init__(self, t1: str, t2: str, line: int | None = None):
        self.pair = (t1, t2)
        super().__init__(
            f"types {t1!r} and {t2!r} have common upper bounds but no least one",
            line,
        )


class ApproprNotUpwardClosed(GrammarError):
    def __init__(self, t: str, feat: str, detail: str = "", line: int | None = None):
        self.type = t
        self.feature = feat
        msg = f"appropriateness for ({t!r}, {feat!r}) is not upward closed"
        if detail:
            msg += f": {detail}"
        super().__init__(msg, line)


class ReservedTypeName(GrammarError):
    pass


# ------------------------------------------------------------ feature graphs

class UnificationFailure(GrammarError):
    """Raised when two graphs have no common extension.

    ``path`` locates the offending node (a feature path from the root of the
    first operand, when it can be computed) and ``types`` the two types with
    no join.
    """

    def __init__(self, path: tuple[str, ...] | None = None,
                 types: tuple[str, str] | None = None):
        self.path = path
        self.types = types
        at = "" if path is None else " at " + ("." .join(path) or "<root>")
        tp = "" if types is None else f" ({types[0]} vs {types[1]})"
        super().__init__(f"unification failure{at}{tp}")


class TypeInferenceFailure(GrammarError):
    pass


class AvmSyntaxError(GrammarError):
    pass


class UnknownTag(GrammarError):
    pass


# ----------------------------------------------------------------- grammars

class ReflexiveLpRule(GrammarError):
    pass


class SymmetricLpRules(GrammarError):
    pass


class NoStartSymbol(GrammarError):
    pass


class EmptyRuleRhs(GrammarError):
    pass


# ------------------------------------------------------------------- parser

class UnknownWord(GrammarError):
    def __init__(self, word: str, position: int):
        self.word = word
        self.position = position
        super().__init__(f"no lexical entry for word {word!r} (position {position})")


class LpViolation(GrammarError):
    """Internal: a candidate edge's recognized sequence breaks a precedence rule."""


class PrecedeFilterRejection(GrammarError):
    """Internal: a candidate element cannot precede the rest of the rule's multiset."""
