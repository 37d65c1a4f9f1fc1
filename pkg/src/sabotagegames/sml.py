"""Sabotage modal logic: syntax, models, evaluation, winning-formula families.

The core syntax is top / proposition / negation / conjunction / diamond /
sabotage diamond; disjunction, bottom and the two boxes are derived
constructors that build core trees.  Evaluation memoizes on
(relation bitmask, world, subformula), which keeps the edge-deletion
modality tractable for the graph sizes this workbench targets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .graph import GameState, Graph

PROPOSITIONS = ("r", "g")


class SmlSyntaxError(ValueError):
    """Syntax error, carrying the offending input position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class Top:
    def __str__(self) -> str:
        return "T"


@dataclass(frozen=True)
class Prop:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Not:
    body: "SmlFormula"

    def __str__(self) -> str:
        return f"!{_wrap(self.body)}"


@dataclass(frozen=True)
class And:
    left: "SmlFormula"
    right: "SmlFormula"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} & {_wrap(self.right)}"


@dataclass(frozen=True)
class Diamond:
    body: "SmlFormula"

    def __str__(self) -> str:
        return f"<> {_wrap(self.body)}"


@dataclass(frozen=True)
class SabDiamond:
    body: "SmlFormula"

    def __str__(self) -> str:
        return f"<#> {_wrap(self.body)}"


SmlFormula = Union[Top, Prop, Not, And, Diamond, SabDiamond]


def _wrap(f: SmlFormula) -> str:
    if isinstance(f, And):
        return f"({f})"
    return str(f)


def bottom() -> SmlFormula:
    return Not(Top())


def or_(left: SmlFormula, right: SmlFormula) -> SmlFormula:
    return Not(And(Not(left), Not(right)))


def box(body: SmlFormula) -> SmlFormula:
    return Not(Diamond(Not(body)))


def sab_box(body: SmlFormula) -> SmlFormula:
    return Not(SabDiamond(Not(body)))


class _Parser:
    """Recursive descent over the token stream; precedence: unary > & > |."""

    UNARY = {"!", "<>", "[]", "<#>", "[#]"}

    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, int]] = []
        self.pos = 0
        self._tokenize()

    def _tokenize(self) -> None:
        i, text = 0, self.text
        symbols = ("<#>", "[#]", "<>", "[]", "(", ")", "!", "&", "|")
        while i < len(text):
            if text[i].isspace():
                i += 1
                continue
            for sym in symbols:
                if text.startswith(sym, i):
                    self.tokens.append((sym, i))
                    i += len(sym)
                    break
            else:
                if text[i].isalpha():
                    j = i
                    while j < len(text) and text[j].isalnum():
                        j += 1
                    self.tokens.append((text[i:j], i))
                    i = j
                else:
                    raise SmlSyntaxError(f"unexpected character {text[i]!r}", i)

    def _peek(self) -> Optional[str]:
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def _next(self) -> tuple[str, int]:
        if self.pos >= len(self.tokens):
            raise SmlSyntaxError("unexpected end of input", len(self.text))
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> SmlFormula:
        formula = self._disjunction()
        if self.pos < len(self.tokens):
            tok, at = self.tokens[self.pos]
            raise SmlSyntaxError(f"unexpected token {tok!r}", at)
        return formula

    def _disjunction(self) -> SmlFormula:
        left = self._conjunction()
        while self._peek() == "|":
            self._next()
            left = or_(left, self._conjunction())
        return left

    def _conjunction(self) -> SmlFormula:
        left = self._unary()
        while self._peek() == "&":
            self._next()
            left = And(left, self._unary())
        return left

    def _unary(self) -> SmlFormula:
        tok, at = self._next()
        if tok == "!":
            return Not(self._unary())
        if tok == "<>":
            return Diamond(self._unary())
        if tok == "[]":
            return box(self._unary())
        if tok == "<#>":
            return SabDiamond(self._unary())
        if tok == "[#]":
            return sab_box(self._unary())
        if tok == "(":
            inner = self._disjunction()
            closing, cat = self._next()
            if closing != ")":
                raise SmlSyntaxError(f"expected ')' but found {closing!r}", cat)
            return inner
        if tok == "T":
            return Top()
        if tok in PROPOSITIONS:
            return Prop(tok)
        raise SmlSyntaxError(f"unexpected token {tok!r}", at)


def parse_sml(text: str) -> SmlFormula:
    return _Parser(text).parse()


@dataclass(frozen=True)
class SabotageModel:
    """Worlds, a deletable relation (bitmask over `pairs`), and a valuation.

    `valuation` maps each proposition in {r, g} to a frozenset of worlds;
    Val(r) is the runner's position, Val(g) the goal (empty for liveness).
    """

    worlds: tuple[str, ...]
    pairs: tuple[tuple[str, str], ...]
    relation_mask: int
    valuation: dict[str, frozenset[str]] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.valuation is None:
            object.__setattr__(self, "valuation", {"r": frozenset(), "g": frozenset()})

    def successors(self, world: str, mask: int) -> list[str]:
        return [b for i, (a, b) in enumerate(self.pairs) if mask >> i & 1 and a == world]


def model_of(state: GameState, goal: Optional[str] = None) -> SabotageModel:
    """Transform a game-state into a sabotage model over the same graph."""
    graph: Graph = state.edges.graph
    if goal is not None:
        graph.require_vertex(goal)
    return SabotageModel(
        worlds=graph.vertices,
        pairs=graph.all_pairs,
        relation_mask=state.edges.mask,
        valuation={
            "r": frozenset({state.position}),
            "g": frozenset({goal}) if goal is not None else frozenset(),
        },
    )


def eval_sml(
    model: SabotageModel,
    world: str,
    formula: SmlFormula,
    _cache: Optional[dict] = None,
) -> bool:
    """Truth at (model, world) per the recursive semantics."""
    if world not in model.worlds:
        raise ValueError(f"unknown world {world!r}")
    cache = {} if _cache is None else _cache

    def rec(mask: int, w: str, f: SmlFormula) -> bool:
        key = (mask, w, id(f))
        hit = cache.get(key)
        if hit is not None:
            return hit
        if isinstance(f, Top):
            value = True
        elif isinstance(f, Prop):
            if f.name not in PROPOSITIONS:
                raise ValueError(f"unknown proposition {f.name!r}")
            value = w in model.valuation.get(f.name, frozenset())
        elif isinstance(f, Not):
            value = not rec(mask, w, f.body)
        elif isinstance(f, And):
            value = rec(mask, w, f.left) and rec(mask, w, f.right)
        elif isinstance(f, Diamond):
            value = any(rec(mask, w2, f.body) for w2 in model.successors(w, mask))
        elif isinstance(f, SabDiamond):
            value = any(
                rec(mask & ~(1 << i), w, f.body)
                for i in range(len(model.pairs))
                if mask >> i & 1
            )
        else:
            raise TypeError(f"not an SML formula: {f!r}")
        cache[key] = value
        return value

    return rec(model.relation_mask, world, formula)


RHO_VARIANTS = ("EU", "EH", "UH", "UU")


def build_rho(k: int, variant: str = "EU") -> SmlFormula:
    """The k-times-unrolled winning-condition family for reachability games."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if variant not in RHO_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    g = Prop("g")
    base: SmlFormula = Not(g) if variant == "UU" else g
    formula = base
    for _ in range(k):
        if variant == "EU":
            formula = or_(g, Diamond(sab_box(formula)))
        elif variant == "EH":
            formula = or_(g, Diamond(SabDiamond(formula)))
        elif variant == "UH":
            formula = or_(g, And(Diamond(Top()), box(SabDiamond(formula))))
        else:  # UU
            formula = or_(Not(g), Diamond(SabDiamond(formula)))
    return formula


def build_gamma(b: int) -> SmlFormula:
    """The liveness family: survival for at least b own moves."""
    if b < 1:
        raise ValueError("b must be >= 1")
    formula: SmlFormula = Diamond(Top())
    for _ in range(b - 1):
        formula = Diamond(sab_box(formula))
    return formula
