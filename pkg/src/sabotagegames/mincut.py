"""Minimum s-t cuts, static and dynamic.

The static side is unit-capacity max-flow with shortest augmenting paths,
cross-checkable against an independent edge-disjoint path packing (Menger).
The dynamic side asks how many deletions the demon needs, playing the
turn-based game against a moving runner, to make the goal unreachable
before the runner touches it; it is an exact minimax over the turn-based
structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from collections import deque
import math
from typing import Optional

from . import formulas as fml
from .checker import StrategyTable, check_state, get_structure
from .graph import Edge, Graph, GameState, has_path
from .structures import Agent, OwnedState, StructureKind, step


@dataclass
class CutReport:
    size: Optional[int]
    cut_edges: list = field(default_factory=list)
    demon_moves: Optional[int] = None
    witness: Optional[StrategyTable] = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        doc: dict = {"size": self.size}
        if self.demon_moves is None:
            doc["cut_edges"] = [list(e) for e in self.cut_edges]
        else:
            doc["cut_edges"] = [[list(e) for e in family] for family in self.cut_edges]
            doc["demon_moves"] = self.demon_moves
        if self.witness is not None:
            doc["witness"] = self.witness.to_json()
        if self.details:
            doc["details"] = self.details
        return doc


def _sorted_edges(graph: Graph, edges) -> list[Edge]:
    return sorted(edges, key=lambda e: graph.pair_index[e])


def static_min_cut(graph: Graph, s: str, t: str) -> CutReport:
    """Unit-capacity max-flow; the cut is read off the final residual graph."""
    graph.require_vertex(s)
    graph.require_vertex(t)
    if s == t:
        raise ValueError("source and sink coincide")
    flow: dict[Edge, int] = {e: 0 for e in graph.edges}

    def residual_neighbours(u: str):
        for e in graph.edges:
            if e[0] == u and flow[e] == 0:
                yield e[1], e, 1
            if e[1] == u and flow[e] == 1:
                yield e[0], e, -1

    def augment() -> bool:
        parent: dict[str, tuple[str, Edge, int]] = {}
        queue = deque([s])
        seen = {s}
        while queue:
            u = queue.popleft()
            if u == t:
                break
            for v, e, direction in residual_neighbours(u):
                if v not in seen:
                    seen.add(v)
                    parent[v] = (u, e, direction)
                    queue.append(v)
        if t not in seen:
            return False
        v = t
        while v != s:
            u, e, direction = parent[v]
            flow[e] += direction
            v = u
        return True

    size = 0
    while augment():
        size += 1

    # source side of the partition: residual reachability from s
    side = {s}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for v, _, _ in residual_neighbours(u):
            if v not in side:
                side.add(v)
                queue.append(v)
    cut = [e for e in graph.edges if e[0] in side and e[1] not in side]
    return CutReport(size=size, cut_edges=_sorted_edges(graph, cut))


def _edge_simple_paths(graph: Graph, s: str, t: str) -> list[frozenset[Edge]]:
    """All directed s-t paths that reuse no edge, as edge sets."""
    paths: list[frozenset[Edge]] = []
    used: list[Edge] = []

    def walk(u: str) -> None:
        if u == t:
            paths.append(frozenset(used))
            return
        for e in graph.edges:
            if e[0] == u and e not in used:
                used.append(e)
                walk(e[1])
                used.pop()

    walk(s)
    return paths


def edge_disjoint_paths(graph: Graph, s: str, t: str) -> int:
    """Maximum number of pairwise edge-disjoint directed s-t paths.

    Computed by exact packing over the enumerated paths, independently of
    the max-flow routine, so the two sides of Menger's identity stay
    separate implementations.
    """
    graph.require_vertex(s)
    graph.require_vertex(t)
    if s == t:
        raise ValueError("source and sink coincide")
    paths = _edge_simple_paths(graph, s, t)

    best = 0

    def pack(i: int, used: frozenset[Edge], count: int) -> None:
        nonlocal best
        best = max(best, count)
        if count + (len(paths) - i) <= best:
            return
        for j in range(i, len(paths)):
            if not (paths[j] & used):
                pack(j + 1, used | paths[j], count + 1)

    pack(0, frozenset(), 0)
    return best


def global_min_cut(graph: Graph) -> CutReport:
    """Minimum directed cut severing some vertex from the declared start.

    Pairs the start cannot reach at all are skipped: a cut of size zero
    partitions nothing the start-rooted game cares about.
    """
    if len(graph.vertices) < 2:
        raise ValueError("need at least two vertices")
    full = graph.full_edges()
    best: Optional[CutReport] = None
    best_pair = None
    for t in graph.vertices:
        if t == graph.start or not has_path(full, graph.start, t):
            continue
        report = static_min_cut(graph, graph.start, t)
        if best is None or report.size < best.size:
            best, best_pair = report, (graph.start, t)
    if best is None:
        return CutReport(size=0, details={"note": "start reaches no other vertex"})
    side = {best_pair[0]}
    changed = True
    remaining = [e for e in graph.edges if e not in best.cut_edges]
    while changed:
        changed = False
        for u, v in remaining:
            if u in side and v not in side:
                side.add(v)
                changed = True
    best.details = {
        "pair": list(best_pair),
        "partition": [sorted(side), sorted(set(graph.vertices) - side)],
    }
    return best


def disconnected(state: GameState, goal: str) -> bool:
    """No directed path from the runner's position to the goal remains."""
    return not has_path(state.edges, state.position, goal)


def _goal_free_disconnection_formula(k: int, exact: bool) -> fml.Coalition:
    inner = fml.Coalition(frozenset(), fml.PGlobally(fml.PState(fml.SNot(fml.AtomGoal()))))
    target = fml.PState(inner)
    body = (
        fml.PUntilAt(fml.PState(fml.STrue()), target, k)
        if exact
        else fml.PWithin(target, k)
    )
    return fml.Coalition(frozenset({"d"}), body)


def dynamic_min_cut(
    graph: Graph, v0: str, vg: str, budget: int = 5_000_000
) -> Optional[CutReport]:
    """Least number of demon deletions that forces, against every runner
    behaviour, a state from which the goal is unreachable, with the runner
    never having touched the goal first.

    Returns None when no deletion count works — in particular whenever the
    runner's first move can already reach the goal.
    """
    graph.require_vertex(v0)
    graph.require_vertex(vg)
    if v0 == vg:
        raise ValueError("start and goal coincide")
    kind = StructureKind.TB
    struct = get_structure(kind, graph)
    start = OwnedState(GameState(graph.full_edges(), v0), Agent.RUNNER)

    steps = [0]

    def spend():
        steps[0] += 1
        if steps[0] > budget:
            raise RuntimeError(f"dynamic cut search exceeded budget {budget}")

    goal_reachable: dict[OwnedState, bool] = {}

    def can_reach_goal(s: OwnedState) -> bool:
        hit = goal_reachable.get(s)
        if hit is not None:
            return hit
        spend()
        if s.position == vg:
            value = True
        else:
            goal_reachable[s] = False  # the turn-based structure is acyclic
            value = any(can_reach_goal(t) for _, t in struct.succ(s))
        goal_reachable[s] = value
        return value

    horizon: dict[OwnedState, float] = {}

    def force_horizon(s: OwnedState) -> float:
        """Positions until goal-free disconnection is forced; inf if the
        runner can touch the goal first."""
        hit = horizon.get(s)
        if hit is not None:
            return hit
        spend()
        if s.position == vg:
            value: float = math.inf
        elif not can_reach_goal(s):
            value = 0
        else:
            succ = struct.succ(s)
            values = [force_horizon(t) for _, t in succ]
            value = 1 + (max(values) if s.owner is Agent.RUNNER else min(values))
        horizon[s] = value
        return value

    k = force_horizon(start)
    if math.isinf(k):
        return None
    demon_moves = math.ceil(k / 2)

    # demon witness: minimize the forcing horizon, first action in
    # enumeration order on ties
    witness = StrategyTable()
    for s in struct.reachable(start):
        if s.owner is not Agent.DEMON or struct.terminal(s):
            continue
        succ = struct.succ(s)
        best = min(force_horizon(t) for _, t in succ)
        for profile, t in succ:
            if force_horizon(t) == best:
                witness.assign(Agent.DEMON, s, profile[1])
                break

    # replay the witness against every runner behaviour; each play stops at
    # its first disconnection state and contributes its deleted-edge set
    families: list[frozenset[Edge]] = []

    def replay(s: OwnedState, deleted: tuple[Edge, ...]) -> None:
        spend()
        if not can_reach_goal(s):
            fam = frozenset(deleted)
            if fam not in families:
                families.append(fam)
            return
        if s.position == vg:
            raise AssertionError("witness let the runner reach the goal")
        if s.owner is Agent.DEMON:
            choice = witness.choice(Agent.DEMON, s)
            replay(step(kind, s, ("skip", choice)), deleted + (choice,))
        else:
            for profile, t in struct.succ(s):
                replay(t, deleted)

    replay(start, ())

    details: dict = {"positions": int(k)}
    # both formula-level readings of the cut definition, for reference
    for name, exact in (("within_positions", False), ("exact_position", True)):
        found = None
        for bound in range(0, 2 * len(graph.edges) + 3):
            formula = _goal_free_disconnection_formula(bound, exact)
            if check_state(kind, graph, vg, start, formula).value:
                found = bound
                break
        details[name] = found

    return CutReport(
        size=demon_moves,
        cut_edges=[_sorted_edges(graph, fam) for fam in families],
        demon_moves=demon_moves,
        witness=witness,
        details=details,
    )
