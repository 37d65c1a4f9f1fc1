"""The four sabotage game structures: turn-based, concurrent, general, angelic.

Action managers and transition functions follow the definitional tables
exactly; `enumerate_plays` produces maximal plays, closing concurrent and
general plays into lassos at the first state revisit along a branch.

One deliberate extension: in the angelic structure the turn owner receives
{skip} whenever its regular action set is empty, so angelic plays are total
and infinite (the builder can repair a stranded runner).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
import itertools
from typing import Iterable, Optional, Union

from .graph import EdgeSet, GameState, Graph, out_edges

SKIP = "skip"
ActionChoice = Union[tuple[str, str], str]


class Agent(Enum):
    RUNNER = "r"
    DEMON = "d"
    ANGEL = "a"

    def __repr__(self) -> str:  # keeps strategy tables readable
        return self.value


class StructureKind(Enum):
    TB = "tb"
    CON = "con"
    GEN = "gen"
    ANGELIC_TB = "angelic"

    @classmethod
    def parse(cls, name: str) -> "StructureKind":
        for kind in cls:
            if kind.value == name:
                return kind
        raise ValueError(f"unknown structure kind {name!r}")


class IllegalActionError(ValueError):
    """An action outside an agent's legal set at the given state."""


def agents_of(kind: StructureKind) -> tuple[Agent, ...]:
    if kind is StructureKind.ANGELIC_TB:
        return (Agent.RUNNER, Agent.DEMON, Agent.ANGEL)
    return (Agent.RUNNER, Agent.DEMON)


@dataclass(frozen=True)
class OwnedState:
    """A game-state, tagged with the turn owner for turn-based kinds."""

    state: GameState
    owner: Optional[Agent] = None

    def __hash__(self) -> int:
        return hash((self.state, self.owner))

    @property
    def edges(self) -> EdgeSet:
        return self.state.edges

    @property
    def position(self) -> str:
        return self.state.position


Profile = tuple[ActionChoice, ...]


@dataclass
class Play:
    """A play: its states, the profiles that produced them, and a lasso mark.

    For a lasso play, `profiles` has one more entry than transitions between
    listed states: the final profile closes the cycle from the last state
    back to ``states[lasso]``.
    """

    states: tuple[OwnedState, ...]
    profiles: tuple[Profile, ...]
    lasso: Optional[int] = None

    def __len__(self) -> int:
        return len(self.states)

    def state_at(self, i: int) -> OwnedState:
        """Position `i`, unrolling the cycle for lasso plays."""
        if i < len(self.states):
            return self.states[i]
        if self.lasso is None:
            raise IndexError(f"finite play has no position {i}")
        cycle = len(self.states) - self.lasso
        return self.states[self.lasso + (i - self.lasso) % cycle]

    def is_infinite(self) -> bool:
        return self.lasso is not None

    def to_json(self) -> dict:
        return {
            "states": [serialize_state(s) for s in self.states],
            "profiles": [serialize_profile(p) for p in self.profiles],
            "lasso": self.lasso,
        }


def initial_state(kind: StructureKind, graph: Graph) -> OwnedState:
    """The canonical start: full edge set, start vertex, runner to move."""
    state = GameState(graph.full_edges(), graph.start)
    if kind in (StructureKind.TB, StructureKind.ANGELIC_TB):
        return OwnedState(state, Agent.RUNNER)
    return OwnedState(state)


def _check_state_shape(kind: StructureKind, s: OwnedState) -> None:
    owned = kind in (StructureKind.TB, StructureKind.ANGELIC_TB)
    if owned and s.owner is None:
        raise ValueError(f"{kind.value} states require an owner")
    if not owned and s.owner is not None:
        raise ValueError(f"{kind.value} states carry no owner")
    if s.owner is Agent.ANGEL and kind is not StructureKind.ANGELIC_TB:
        raise ValueError("angel-owned states only exist in the angelic structure")


def legal_actions(kind: StructureKind, s: OwnedState, agent: Agent) -> tuple[ActionChoice, ...]:
    """The agent's executable actions at `s`, in enumeration order."""
    _check_state_shape(kind, s)
    if agent not in agents_of(kind):
        raise IllegalActionError(f"agent {agent.value!r} is not part of {kind.value} structures")
    edges = s.edges
    position = s.position
    runner_moves = tuple(out_edges(edges, position))
    all_edges = tuple(edges)

    if kind is StructureKind.TB:
        if s.owner is Agent.RUNNER:
            return runner_moves if agent is Agent.RUNNER else (SKIP,)
        return all_edges if agent is Agent.DEMON else (SKIP,)

    if kind is StructureKind.CON:
        return runner_moves if agent is Agent.RUNNER else all_edges

    if kind is StructureKind.GEN:
        base = runner_moves if agent is Agent.RUNNER else all_edges
        return base + (SKIP,)

    # ANGELIC_TB: strict r -> d -> a rotation; turn owner falls back to skip
    # when its regular set is empty so plays never halt.
    if agent is not s.owner:
        return (SKIP,)
    if agent is Agent.RUNNER:
        return runner_moves or (SKIP,)
    if agent is Agent.DEMON:
        return all_edges or (SKIP,)
    adds = tuple(edges.absent_pairs())
    return adds or (SKIP,)


def _require_legal(kind: StructureKind, s: OwnedState, agent: Agent, choice: ActionChoice) -> None:
    if choice not in legal_actions(kind, s, agent):
        raise IllegalActionError(
            f"agent {agent.value!r} cannot play {choice!r} at {serialize_state(s)}"
        )


def step(kind: StructureKind, s: OwnedState, profile: Profile, validate: bool = True) -> OwnedState:
    """Apply a full action profile; profiles are tuples in agents_of order."""
    agents = agents_of(kind)
    if len(profile) != len(agents):
        raise IllegalActionError(f"profile must have {len(agents)} components")
    if validate:
        for agent, choice in zip(agents, profile):
            _require_legal(kind, s, agent, choice)
    edges = s.edges
    v = s.position

    if kind is StructureKind.TB:
        e_r, e_d = profile
        if e_r == SKIP:
            return OwnedState(GameState(edges.remove(e_d), v), Agent.RUNNER)
        return OwnedState(GameState(edges, e_r[1]), Agent.DEMON)

    if kind is StructureKind.CON:
        e, e2 = profile
        if e == e2:
            return OwnedState(GameState(edges, v))
        return OwnedState(GameState(edges.remove(e2), e[1]))

    if kind is StructureKind.GEN:
        e, e2 = profile
        if e == e2:
            return OwnedState(GameState(edges, v))
        if e == SKIP:
            return OwnedState(GameState(edges.remove(e2), v))
        if e2 == SKIP:
            return OwnedState(GameState(edges, e[1]))
        return OwnedState(GameState(edges.remove(e2), e[1]))

    # ANGELIC_TB
    e_r, e_d, e_a = profile
    if s.owner is Agent.RUNNER:
        pos = v if e_r == SKIP else e_r[1]
        return OwnedState(GameState(edges, pos), Agent.DEMON)
    if s.owner is Agent.DEMON:
        new = edges if e_d == SKIP else edges.remove(e_d)
        return OwnedState(GameState(new, v), Agent.ANGEL)
    new = edges if e_a == SKIP else edges.add(e_a)
    return OwnedState(GameState(new, v), Agent.RUNNER)


def successors(kind: StructureKind, s: OwnedState) -> list[tuple[Profile, OwnedState]]:
    """One entry per executable profile, in enumeration order."""
    per_agent = [legal_actions(kind, s, a) for a in agents_of(kind)]
    if any(not choices for choices in per_agent):
        return []
    return [
        (profile, step(kind, s, profile, validate=False))
        for profile in itertools.product(*per_agent)
    ]


def is_terminal(kind: StructureKind, s: OwnedState) -> bool:
    _check_state_shape(kind, s)
    if kind is StructureKind.TB:
        if s.owner is Agent.RUNNER:
            return len(out_edges(s.edges, s.position)) == 0
        return len(s.edges) == 0
    if kind is StructureKind.CON:
        return len(out_edges(s.edges, s.position)) == 0
    return False  # GEN always has (skip, skip); ANGELIC owners fall back to skip


def enumerate_plays(
    kind: StructureKind, start: OwnedState, max_len: Optional[int] = None
) -> list[Play]:
    """All maximal plays from `start`.

    Turn-based plays are finite and need no bound.  CON/GEN/ANGELIC play
    spaces contain infinite plays, so a finite `max_len` is required; a
    branch revisiting a state closes into a lasso.  A bound of
    |state space| + 1 guarantees every branch either terminates or closes.
    """
    if kind is not StructureKind.TB:
        if max_len is None:
            raise ValueError("infinite play space; give a bound")
    plays: list[Play] = []
    path: list[OwnedState] = [start]
    profile_path: list[Profile] = []
    index_of: dict[OwnedState, int] = {start: 0}

    def walk(s: OwnedState) -> None:
        if max_len is not None and len(path) > max_len:
            plays.append(Play(tuple(path), tuple(profile_path), lasso=None))
            return
        succ = successors(kind, s)
        if not succ:
            plays.append(Play(tuple(path), tuple(profile_path), lasso=None))
            return
        for profile, nxt in succ:
            if nxt in index_of:
                plays.append(
                    Play(
                        tuple(path),
                        tuple(profile_path) + (profile,),
                        lasso=index_of[nxt],
                    )
                )
                continue
            index_of[nxt] = len(path)
            path.append(nxt)
            profile_path.append(profile)
            walk(nxt)
            profile_path.pop()
            path.pop()
            del index_of[nxt]

    walk(start)
    return plays


def replay(kind: StructureKind, start: OwnedState, profiles: Iterable[Profile]) -> list[OwnedState]:
    """Re-run recorded profiles through the transition function."""
    states = [start]
    for profile in profiles:
        states.append(step(kind, states[-1], profile))
    return states


def validate_play(kind: StructureKind, play: Play) -> bool:
    """Check the recorded profiles reproduce the recorded states."""
    n_transitions = len(play.states) - 1
    expected_profiles = n_transitions + (1 if play.lasso is not None else 0)
    if len(play.profiles) != expected_profiles:
        return False
    current = play.states[0]
    for i in range(n_transitions):
        current = step(kind, current, play.profiles[i])
        if current != play.states[i + 1]:
            return False
    if play.lasso is not None:
        closing = step(kind, play.states[-1], play.profiles[-1])
        return closing == play.states[play.lasso]
    return True


def serialize_choice(choice: ActionChoice):
    return SKIP if choice == SKIP else [choice[0], choice[1]]


def parse_choice(doc) -> ActionChoice:
    if doc == SKIP:
        return SKIP
    if isinstance(doc, (list, tuple)) and len(doc) == 2:
        return (doc[0], doc[1])
    raise IllegalActionError(f"malformed action choice {doc!r}")


def serialize_profile(profile: Profile) -> list:
    return [serialize_choice(c) for c in profile]


def serialize_state(s: OwnedState) -> dict:
    """Play serialization: declared-edge indices, with raw pairs for any
    pair added beyond the declared enumeration."""
    graph = s.edges.graph
    n = len(graph.edges)
    edges: list = []
    for i, e in enumerate(graph.all_pairs):
        if s.edges.mask >> i & 1:
            edges.append(i if i < n else [e[0], e[1]])
    doc = {"edges": edges, "position": s.position}
    if s.owner is not None:
        doc["owner"] = s.owner.value
    return doc


def parse_state(graph: Graph, doc: dict) -> OwnedState:
    edges = []
    for item in doc["edges"]:
        if isinstance(item, int):
            edges.append(graph.all_pairs[item])
        else:
            edges.append((item[0], item[1]))
    owner = doc.get("owner")
    return OwnedState(
        GameState(graph.edge_set(edges), doc["position"]),
        Agent(owner) if owner else None,
    )
