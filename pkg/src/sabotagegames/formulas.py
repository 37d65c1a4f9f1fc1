"""Strategy-logic formulas: abstract syntax, parser, and core normalization.

Surface grammar
---------------
State level:   ``<<r,d>> gamma``  ``[[r]] gamma``  ``K{a} phi``  ``E{a,b} phi``
               ``C{a,b} phi``  ``T``  ``g``  ``at(v)``  ``edge(u,v)``
               booleans ``! & | ->``
Path level:    ``X`` (next; true at a final position), ``X!`` (strict next),
               ``F`` ``G`` ``U`` ``U[k]`` ``F[<=k]``.

The checker accepts coalition bodies that normalize into the core shapes::

    phi | X phi | F phi | G phi | phi U psi | phi U[k] psi
        | F[<=k] phi | G F phi | F G phi

with state-formula leaves; anything else parses but is rejected by the
checker with an "unsupported nesting" diagnostic naming the subterm.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnsupportedFormulaError(ValueError):
    """A syntactically valid formula outside the checkable core."""


# ---------------------------------------------------------------------------
# State formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class STrue:
    def __str__(self) -> str:
        return "T"


@dataclass(frozen=True)
class AtomGoal:
    def __str__(self) -> str:
        return "g"


@dataclass(frozen=True)
class AtomAt:
    vertex: str

    def __str__(self) -> str:
        return f"at({self.vertex})"


@dataclass(frozen=True)
class AtomEdge:
    source: str
    target: str

    def __str__(self) -> str:
        return f"edge({self.source},{self.target})"


@dataclass(frozen=True)
class SNot:
    body: "StateFormula"

    def __str__(self) -> str:
        return f"!{_wrap_state(self.body)}"


@dataclass(frozen=True)
class SAnd:
    left: "StateFormula"
    right: "StateFormula"

    def __str__(self) -> str:
        return f"{_wrap_state(self.left)} & {_wrap_state(self.right)}"


@dataclass(frozen=True)
class SOr:
    left: "StateFormula"
    right: "StateFormula"

    def __str__(self) -> str:
        return f"{_wrap_state(self.left)} | {_wrap_state(self.right)}"


@dataclass(frozen=True)
class Coalition:
    """``<<C>> gamma`` (universal=False) or ``[[C]] gamma`` (universal=True)."""

    agents: frozenset[str]
    path: "PathFormula"
    universal: bool = False

    def __str__(self) -> str:
        names = _agent_order(self.agents)
        brackets = ("[[", "]]") if self.universal else ("<<", ">>")
        return f"{brackets[0]}{names}{brackets[1]} {_wrap_path(self.path)}"


@dataclass(frozen=True)
class Knows:
    agent: str
    body: "StateFormula"

    def __str__(self) -> str:
        return f"K{{{self.agent}}} {_wrap_state(self.body)}"


@dataclass(frozen=True)
class EveryoneKnows:
    agents: frozenset[str]
    body: "StateFormula"

    def __str__(self) -> str:
        return f"E{{{_agent_order(self.agents)}}} {_wrap_state(self.body)}"


@dataclass(frozen=True)
class CommonKnowledge:
    agents: frozenset[str]
    body: "StateFormula"

    def __str__(self) -> str:
        return f"C{{{_agent_order(self.agents)}}} {_wrap_state(self.body)}"


StateFormula = Union[
    STrue, AtomGoal, AtomAt, AtomEdge, SNot, SAnd, SOr,
    Coalition, Knows, EveryoneKnows, CommonKnowledge,
]


# ---------------------------------------------------------------------------
# Path formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PState:
    state: StateFormula

    def __str__(self) -> str:
        return str(self.state)


@dataclass(frozen=True)
class PNot:
    body: "PathFormula"

    def __str__(self) -> str:
        return f"!{_wrap_path(self.body)}"


@dataclass(frozen=True)
class PAnd:
    left: "PathFormula"
    right: "PathFormula"

    def __str__(self) -> str:
        return f"{_wrap_path(self.left)} & {_wrap_path(self.right)}"


@dataclass(frozen=True)
class POr:
    left: "PathFormula"
    right: "PathFormula"

    def __str__(self) -> str:
        return f"{_wrap_path(self.left)} | {_wrap_path(self.right)}"


@dataclass(frozen=True)
class PNext:
    body: "PathFormula"
    strict: bool = False  # strict next is false at a final position

    def __str__(self) -> str:
        return f"{'X!' if self.strict else 'X'} {_wrap_path(self.body)}"


@dataclass(frozen=True)
class PGlobally:
    body: "PathFormula"

    def __str__(self) -> str:
        return f"G {_wrap_path(self.body)}"


@dataclass(frozen=True)
class PFinally:
    body: "PathFormula"

    def __str__(self) -> str:
        return f"F {_wrap_path(self.body)}"


@dataclass(frozen=True)
class PUntil:
    left: "PathFormula"
    right: "PathFormula"

    def __str__(self) -> str:
        return f"{_wrap_path(self.left)} U {_wrap_path(self.right)}"


@dataclass(frozen=True)
class PUntilAt:
    """Parametrized until: right argument exactly at position k."""

    left: "PathFormula"
    right: "PathFormula"
    k: int

    def __str__(self) -> str:
        return f"{_wrap_path(self.left)} U[{self.k}] {_wrap_path(self.right)}"


@dataclass(frozen=True)
class PWithin:
    """Bounded eventually: body within the first k+1 positions."""

    body: "PathFormula"
    k: int

    def __str__(self) -> str:
        return f"F[<={self.k}] {_wrap_path(self.body)}"


PathFormula = Union[PState, PNot, PAnd, POr, PNext, PGlobally, PFinally, PUntil, PUntilAt, PWithin]

AGENT_NAMES = ("r", "d", "a")


def _wrap_state(f) -> str:
    if isinstance(f, (SAnd, SOr)):
        return f"({f})"
    return str(f)


def _wrap_path(f) -> str:
    if isinstance(f, (PAnd, POr, PUntil, PUntilAt)):
        return f"({f})"
    if isinstance(f, PState):
        return _wrap_state(f.state)
    return str(f)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_SYMBOLS = ("X!", "<<", ">>", "[[", "]]", "[<=", "->", "(", ")", "[", "]", "{", "}", ",", "!", "&", "|")


def _agent_order(names) -> str:
    return ",".join(sorted(names, key=AGENT_NAMES.index))


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, int]] = []
        i = 0
        while i < len(text):
            ch = text[i]
            if ch.isspace():
                i += 1
                continue
            for sym in _SYMBOLS:
                if text.startswith(sym, i):
                    self.tokens.append((sym, i))
                    i += len(sym)
                    break
            else:
                if ch.isalnum() or ch == "_":
                    j = i
                    while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                        j += 1
                    self.tokens.append((text[i:j], i))
                    i = j
                else:
                    raise FormulaSyntaxError(f"unexpected character {ch!r}", i)


class _FormulaParser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _Tokenizer(text).tokens
        self.pos = 0

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def peek2(self) -> Optional[str]:
        return self.tokens[self.pos + 1][0] if self.pos + 1 < len(self.tokens) else None

    def next(self) -> tuple[str, int]:
        if self.pos >= len(self.tokens):
            raise FormulaSyntaxError("unexpected end of input", len(self.text))
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, sym: str) -> None:
        tok, at = self.next()
        if tok != sym:
            raise FormulaSyntaxError(f"expected {sym!r} but found {tok!r}", at)

    def parse(self) -> StateFormula:
        formula = self.path_formula()
        if self.pos < len(self.tokens):
            tok, at = self.tokens[self.pos]
            raise FormulaSyntaxError(f"unexpected token {tok!r}", at)
        return demote(formula)

    # The grammar is parsed uniformly at the path level; `demote` lowers a
    # purely-state tree back to a state formula where one is required.
    def path_formula(self) -> PathFormula:
        return self.implication()

    def implication(self) -> PathFormula:
        left = self.disjunction()
        if self.peek() == "->":
            self.next()
            right = self.implication()
            return POr(PNot(left), right)
        return left

    def disjunction(self) -> PathFormula:
        left = self.conjunction()
        while self.peek() == "|":
            self.next()
            left = POr(left, self.conjunction())
        return left

    def conjunction(self) -> PathFormula:
        left = self.until()
        while self.peek() == "&":
            self.next()
            left = PAnd(left, self.until())
        return left

    def until(self) -> PathFormula:
        left = self.unary()
        if self.peek() == "U":
            self.next()
            if self.peek() == "[":
                self.next()
                k = self._number()
                self.expect("]")
                return PUntilAt(left, self.until(), k)
            return PUntil(left, self.until())
        return left

    def _number(self) -> int:
        tok, at = self.next()
        if not tok.isdigit():
            raise FormulaSyntaxError(f"expected a number, found {tok!r}", at)
        return int(tok)

    def _agent_list(self, closing: str) -> frozenset[str]:
        agents: set[str] = set()
        if self.peek() == closing:  # empty coalition
            self.next()
            return frozenset()
        while True:
            tok, at = self.next()
            if tok not in AGENT_NAMES:
                raise FormulaSyntaxError(f"unknown agent name {tok!r}", at)
            agents.add(tok)
            tok, at = self.next()
            if tok == closing:
                return frozenset(agents)
            if tok != ",":
                raise FormulaSyntaxError(f"expected ',' or {closing!r}, found {tok!r}", at)

    def unary(self) -> PathFormula:
        tok, at = self.next()
        if tok == "!":
            return PNot(self.unary())
        if tok == "X":
            return PNext(self.unary())
        if tok == "X!":
            return PNext(self.unary(), strict=True)
        if tok == "F":
            if self.peek() == "[<=":
                self.next()
                k = self._number()
                self.expect("]")
                return PWithin(self.unary(), k)
            return PFinally(self.unary())
        if tok == "G":
            return PGlobally(self.unary())
        if tok == "<<":
            agents = self._agent_list(">>")
            return PState(Coalition(agents, self.path_formula_unary()))
        if tok == "[[":
            agents = self._agent_list("]]")
            return PState(Coalition(agents, self.path_formula_unary(), universal=True))
        if tok in ("K", "E", "C") and self.peek() == "{":
            self.next()
            agents = self._agent_list("}")
            body = demote(self.unary())
            if tok == "K":
                if len(agents) != 1:
                    raise FormulaSyntaxError("K takes exactly one agent", at)
                return PState(Knows(next(iter(agents)), body))
            if tok == "E":
                return PState(EveryoneKnows(agents, body))
            return PState(CommonKnowledge(agents, body))
        if tok == "(":
            inner = self.path_formula()
            self.expect(")")
            return inner
        if tok == "T":
            return PState(STrue())
        if tok == "g":
            return PState(AtomGoal())
        if tok == "at":
            self.expect("(")
            v, _ = self.next()
            self.expect(")")
            return PState(AtomAt(v))
        if tok == "edge":
            self.expect("(")
            u, _ = self.next()
            self.expect(",")
            v, _ = self.next()
            self.expect(")")
            return PState(AtomEdge(u, v))
        raise FormulaSyntaxError(f"unexpected token {tok!r}", at)

    def path_formula_unary(self) -> PathFormula:
        # Coalition bodies bind like a unary operator: until-chains belong
        # to the body, boolean connectives do not, so `<<r>> F g & h` is
        # `(<<r>> F g) & h` while `<<r>> T U[4] (X T)` keeps the until.
        return self.until()


def is_state_only(f: PathFormula) -> bool:
    if isinstance(f, PState):
        return True
    if isinstance(f, PNot):
        return is_state_only(f.body)
    if isinstance(f, (PAnd, POr)):
        return is_state_only(f.left) and is_state_only(f.right)
    return False


def demote(f: PathFormula) -> StateFormula:
    """Lower a state-only path tree to a state formula (collapsing double
    negations so normalized output stays readable)."""
    if isinstance(f, PState):
        return f.state
    if isinstance(f, PNot):
        inner = demote(f.body)
        if isinstance(inner, SNot):
            return inner.body
        return SNot(inner)
    if isinstance(f, PAnd):
        return SAnd(demote(f.left), demote(f.right))
    if isinstance(f, POr):
        return SOr(demote(f.left), demote(f.right))
    raise UnsupportedFormulaError(f"temporal operator at state level: {f}")


def parse_formula(text: str) -> StateFormula:
    return _FormulaParser(text).parse()


# ---------------------------------------------------------------------------
# Normalization into the checkable core
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoreState:
    state: StateFormula

    def __str__(self) -> str:
        return str(self.state)


@dataclass(frozen=True)
class CoreNext:
    state: StateFormula
    strict: bool = False

    def __str__(self) -> str:
        return f"{'X!' if self.strict else 'X'} {_wrap_state(self.state)}"


@dataclass(frozen=True)
class CoreF:
    state: StateFormula

    def __str__(self) -> str:
        return f"F {_wrap_state(self.state)}"


@dataclass(frozen=True)
class CoreG:
    state: StateFormula

    def __str__(self) -> str:
        return f"G {_wrap_state(self.state)}"


@dataclass(frozen=True)
class CoreU:
    left: StateFormula
    right: StateFormula

    def __str__(self) -> str:
        return f"{_wrap_state(self.left)} U {_wrap_state(self.right)}"


@dataclass(frozen=True)
class CoreUk:
    left: StateFormula
    right: StateFormula
    k: int
    right_next: bool = False  # right argument was `X phi` (weak next)

    def __str__(self) -> str:
        right = f"X {_wrap_state(self.right)}" if self.right_next else _wrap_state(self.right)
        return f"{_wrap_state(self.left)} U[{self.k}] ({right})"


@dataclass(frozen=True)
class CoreFk:
    state: StateFormula
    k: int

    def __str__(self) -> str:
        return f"F[<={self.k}] {_wrap_state(self.state)}"


@dataclass(frozen=True)
class CoreGF:
    state: StateFormula

    def __str__(self) -> str:
        return f"G F {_wrap_state(self.state)}"


@dataclass(frozen=True)
class CoreFG:
    state: StateFormula

    def __str__(self) -> str:
        return f"F G {_wrap_state(self.state)}"


CoreFormula = Union[CoreState, CoreNext, CoreF, CoreG, CoreU, CoreUk, CoreFk, CoreGF, CoreFG]


def _negate_state(f: StateFormula) -> StateFormula:
    if isinstance(f, SNot):
        return f.body
    return SNot(f)


def _push_not(f: PathFormula) -> PathFormula:
    """Push a negation one level into `f`."""
    if isinstance(f, PState):
        return PState(_negate_state(f.state))
    if isinstance(f, PNot):
        return f.body
    if isinstance(f, PAnd):
        return POr(PNot(f.left), PNot(f.right))
    if isinstance(f, POr):
        return PAnd(PNot(f.left), PNot(f.right))
    if isinstance(f, PNext):
        # ! X phi == X! !phi  and  ! X! phi == X !phi
        return PNext(PNot(f.body), strict=not f.strict)
    if isinstance(f, PGlobally):
        return PFinally(PNot(f.body))
    if isinstance(f, PFinally):
        return PGlobally(PNot(f.body))
    if isinstance(f, PUntil) and isinstance(f.left, PState) and f.left.state == STrue():
        return PGlobally(PNot(f.right))  # !(T U phi) == G !phi
    raise UnsupportedFormulaError(f"cannot normalize negation of: {f}")


def _simplify(f: PathFormula) -> PathFormula:
    """Fold constant next-subformulas: ``X T`` is true on every maximal
    play (the lenient next), ``X! !T`` is false on every play."""
    if isinstance(f, PState):
        return f
    if isinstance(f, PNot):
        return PNot(_simplify(f.body))
    if isinstance(f, PAnd):
        return PAnd(_simplify(f.left), _simplify(f.right))
    if isinstance(f, POr):
        return POr(_simplify(f.left), _simplify(f.right))
    if isinstance(f, PNext):
        body = _simplify(f.body)
        if is_state_only(body):
            inner = demote(body)
            if not f.strict and inner == STrue():
                return PState(STrue())
            if f.strict and inner == SNot(STrue()):
                return PState(SNot(STrue()))
        return PNext(body, f.strict)
    if isinstance(f, PGlobally):
        return PGlobally(_simplify(f.body))
    if isinstance(f, PFinally):
        return PFinally(_simplify(f.body))
    if isinstance(f, PUntil):
        return PUntil(_simplify(f.left), _simplify(f.right))
    if isinstance(f, PUntilAt):
        return PUntilAt(_simplify(f.left), _simplify(f.right), f.k)
    if isinstance(f, PWithin):
        return PWithin(_simplify(f.body), f.k)
    raise TypeError(f"not a path formula: {f!r}")


def normalize_path(f: PathFormula) -> CoreFormula:
    """Normalize a coalition body into the checkable core.

    Raises UnsupportedFormulaError (naming the subterm) outside the core.
    """
    f = _simplify(f)
    if is_state_only(f):
        return CoreState(demote(f))
    if isinstance(f, PNot):
        return normalize_path(_push_not(f.body))
    if isinstance(f, PNext):
        body = f.body
        if is_state_only(body):
            return CoreNext(demote(body), strict=f.strict)
        raise UnsupportedFormulaError(f"unsupported nesting under X: {body}")
    if isinstance(f, PFinally):
        body = f.body
        if is_state_only(body):
            return CoreF(demote(body))
        if isinstance(body, PGlobally) and is_state_only(body.body):
            return CoreFG(demote(body.body))
        if isinstance(body, PNot):
            return normalize_path(PFinally(_push_not(body.body)))
        raise UnsupportedFormulaError(f"unsupported nesting under F: {body}")
    if isinstance(f, PGlobally):
        body = f.body
        if is_state_only(body):
            return CoreG(demote(body))
        if isinstance(body, PFinally) and is_state_only(body.body):
            return CoreGF(demote(body.body))
        if isinstance(body, PNot):
            return normalize_path(PGlobally(_push_not(body.body)))
        raise UnsupportedFormulaError(f"unsupported nesting under G: {body}")
    if isinstance(f, PUntil):
        if is_state_only(f.left) and is_state_only(f.right):
            left = demote(f.left)
            if left == STrue():
                return CoreF(demote(f.right))
            return CoreU(left, demote(f.right))
        raise UnsupportedFormulaError(f"unsupported nesting under U: {f}")
    if isinstance(f, PUntilAt):
        if not is_state_only(f.left):
            raise UnsupportedFormulaError(f"unsupported nesting under U[k]: {f.left}")
        right = f.right
        if is_state_only(right):
            return CoreUk(demote(f.left), demote(right), f.k)
        if isinstance(right, PNext) and not right.strict and is_state_only(right.body):
            # `phi U[k] (X psi)`: the classic liveness target shape.
            return CoreUk(demote(f.left), demote(right.body), f.k, right_next=True)
        raise UnsupportedFormulaError(f"unsupported nesting under U[k]: {right}")
    if isinstance(f, PWithin):
        if is_state_only(f.body):
            return CoreFk(demote(f.body), f.k)
        raise UnsupportedFormulaError(f"unsupported nesting under F[<=k]: {f.body}")
    raise UnsupportedFormulaError(f"unsupported path formula: {f}")
