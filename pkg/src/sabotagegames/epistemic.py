"""Indistinguishability relations over game states and the
imperfect-information coalition modality.

A relation is one of four kinds:

* ``identity`` — perfect information;
* ``local_degree`` — states look alike when the runner's position has the
  same number of outgoing surviving edges (and the turn owner matches);
* ``edge_blind`` — same surviving edge set and owner, position hidden;
* ``explicit`` — the reflexive-symmetric-transitive closure of a given
  pair list.

K/E/C evaluation lives in the checker's state evaluator; this module owns
the relations themselves and the uniform-strategy semantics ``check_imp``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .graph import Graph, out_edges
from .structures import Agent, OwnedState, StructureKind

RELATION_KINDS = ("identity", "local_degree", "edge_blind", "explicit")


@dataclass
class EpistemicRelation:
    kind: str
    agent: Agent
    pairs: tuple[tuple[OwnedState, OwnedState], ...] = ()
    _roots: dict[OwnedState, OwnedState] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind not in RELATION_KINDS:
            raise ValueError(f"unknown relation kind {self.kind!r}")
        if self.kind == "explicit":
            # union-find over the mentioned states builds the
            # reflexive-symmetric-transitive closure
            def find(x: OwnedState) -> OwnedState:
                while self._roots.get(x, x) != x:
                    x = self._roots[x]
                return x

            for a, b in self.pairs:
                self._roots.setdefault(a, a)
                self._roots.setdefault(b, b)
                ra, rb = find(a), find(b)
                if ra != rb:
                    self._roots[ra] = rb

    def class_key(self, s: OwnedState):
        """A hashable equivalence-class representative for `s`."""
        if self.kind == "identity":
            return s
        if self.kind == "local_degree":
            return (s.owner, len(out_edges(s.edges, s.position)))
        if self.kind == "edge_blind":
            return (s.owner, s.edges.mask)
        root = s
        while self._roots.get(root, root) != root:
            root = self._roots[root]
        return root


def related(rel: EpistemicRelation, s: OwnedState, t: OwnedState) -> bool:
    """Whether the two states are indistinguishable to the relation's agent."""
    if s.edges.graph != t.edges.graph:
        raise ValueError("states from different structures")
    return rel.class_key(s) == rel.class_key(t)


def relations_from_config(
    config: dict, graph: Optional[Graph] = None
) -> dict[Agent, EpistemicRelation]:
    """Build the per-agent relation map from its JSON form.

    ``{"r": "local_degree", "d": {"kind": "explicit", "pairs": [[s1, s2], ...]}}``
    with explicit pair entries in the play-state serialization.
    """
    from .structures import parse_state

    table = config.get("relations", config)
    result: dict[Agent, EpistemicRelation] = {}
    for name, spec in table.items():
        agent = Agent(name)
        if isinstance(spec, str):
            result[agent] = EpistemicRelation(spec, agent)
        else:
            if graph is None:
                raise ValueError("explicit relations need a graph to parse states")
            pairs = tuple(
                (parse_state(graph, a), parse_state(graph, b)) for a, b in spec["pairs"]
            )
            result[agent] = EpistemicRelation(spec["kind"], agent, pairs)
    return result


def check_epistemic(
    kind: StructureKind,
    graph: Graph,
    goal: Optional[str],
    relations: dict[Agent, EpistemicRelation],
    s: OwnedState,
    formula,
) -> bool:
    """Evaluate a K/E/C-rooted state formula at `s`."""
    from .checker import check_state
    from .formulas import CommonKnowledge, EveryoneKnows, Knows

    if not isinstance(formula, (Knows, EveryoneKnows, CommonKnowledge)):
        raise ValueError("check_epistemic expects a K/E/C formula")
    return check_state(kind, graph, goal, s, formula, relations=relations).value


def check_imp(
    kind: StructureKind,
    graph: Graph,
    goal: Optional[str],
    relations: dict[Agent, EpistemicRelation],
    s: OwnedState,
    formula,
    budget: Optional[int] = None,
) -> bool:
    """Imperfect-information coalition checking with uniform strategies.

    True iff some positional coalition strategy that is uniform (identical
    choices across each member's indistinguishability classes) enforces the
    path formula on all plays from *every* state the coalition cannot tell
    apart from `s` (the everybody-knows union of the members' relations).
    """
    from . import checker as chk
    from .formulas import Coalition

    if not isinstance(formula, Coalition) or formula.universal:
        raise ValueError("check_imp expects an existential coalition formula")
    coalition = frozenset(Agent(a) for a in formula.agents)
    for a in coalition:
        if a not in relations and coalition:
            raise ValueError(f"agent {a.value!r} has no declared accessibility relation")

    ctx = chk.ModelContext(kind, graph, goal, relations)
    budget_tracker = chk._Budget(budget or chk.DEFAULT_BUDGET)

    if coalition:
        space = chk.full_state_space(kind, graph)
        starts = [t for t in space if any(related(relations[a], s, t) for a in coalition)]
        if s not in starts:
            starts.insert(0, s)
    else:
        starts = [s]

    def key_fn(agent: Agent, state: OwnedState):
        return (agent, relations[agent].class_key(state))

    found = chk._exists_positional(
        ctx,
        coalition,
        starts[0],
        formula.path,
        budget_tracker,
        extra_starts=starts[1:],
        key_fn=key_fn,
    )
    return found is not None
