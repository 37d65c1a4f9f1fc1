"""Independent brute-force oracles.

These deliberately share no code with the library: plain recursions over
edge frozensets and pair lists, used to derive and pin expected values.
"""

from __future__ import annotations

from functools import lru_cache


def path_exists(edges, frm, to) -> bool:
    edges = tuple(edges)
    seen = {frm}
    frontier = [frm]
    while frontier:
        u = frontier.pop()
        if u == to:
            return True
        for a, b in edges:
            if a == u and b not in seen:
                seen.add(b)
                frontier.append(b)
    return frm == to


def rsg_runner_wins(edges, v0: str, vg: str) -> bool:
    """Reachability match: runner moves first, demon deletes each round;
    the runner wins exactly when she arrives at the goal."""

    @lru_cache(maxsize=None)
    def runner_turn(remaining: frozenset, pos: str) -> bool:
        if pos == vg:
            return True
        moves = [e for e in remaining if e[0] == pos]
        return any(demon_turn(remaining, e[1]) for e in moves)

    @lru_cache(maxsize=None)
    def demon_turn(remaining: frozenset, pos: str) -> bool:
        if pos == vg:
            return True
        if not remaining:
            return False
        return all(runner_turn(remaining - {e}, pos) for e in remaining)

    return runner_turn(frozenset(edges), v0)


def lsg_runner_survives(edges, v0: str, b: int) -> bool:
    """Liveness match: can the runner guarantee making at least b moves."""

    @lru_cache(maxsize=None)
    def alive(remaining: frozenset, pos: str, left: int) -> bool:
        if left <= 0:
            return True
        moves = [e for e in remaining if e[0] == pos]
        return any(
            all(alive(remaining - {cut}, e[1], left - 1) for cut in remaining)
            for e in moves
        )

    return alive(frozenset(edges), v0, b)


def edge_simple_paths(edges, s: str, t: str) -> list[frozenset]:
    paths = []
    used: list = []

    def walk(u: str) -> None:
        if u == t:
            paths.append(frozenset(used))
            return
        for e in edges:
            if e[0] == u and e not in used:
                used.append(e)
                walk(e[1])
                used.pop()

    walk(s)
    return paths


def max_disjoint_paths(edges, s: str, t: str) -> int:
    paths = edge_simple_paths(edges, s, t)
    best = 0

    def pack(i: int, used: frozenset, count: int) -> None:
        nonlocal best
        best = max(best, count)
        for j in range(i, len(paths)):
            if not (paths[j] & used):
                pack(j + 1, used | paths[j], count + 1)

    pack(0, frozenset(), 0)
    return best


def min_cut_by_subsets(edges, s: str, t: str) -> int:
    """Smallest edge subset whose removal breaks every s-t path."""
    from itertools import combinations

    edges = tuple(edges)
    for k in range(len(edges) + 1):
        for removal in combinations(edges, k):
            rest = [e for e in edges if e not in removal]
            if not path_exists(rest, s, t):
                return k
    return len(edges)
