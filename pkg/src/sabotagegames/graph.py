"""Directed game arenas with fixed vertex/edge enumerations.

A :class:`Graph` is immutable; the declaration order of ``vertices`` and
``edges`` is the canonical enumeration that edge bitmasks, structural
propositions and serialization all refer to.  :class:`EdgeSet` is a bitmask
over an *extended* pair universe (declared edges first, then the remaining
ordered vertex pairs) so that edge-adding agents can introduce pairs that
were never declared.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import json
from collections import deque
from typing import Iterator, Optional

Edge = tuple[str, str]


class GraphFormatError(ValueError):
    """Raised for malformed graph documents or unknown graph elements."""


@dataclass(frozen=True)
class Graph:
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    start: str
    goal: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.vertices:
            raise GraphFormatError("empty vertex set")
        if not self.edges:
            raise GraphFormatError("empty edge set")
        seen_v: set[str] = set()
        for v in self.vertices:
            if v in seen_v:
                raise GraphFormatError(f"duplicate vertex {v!r}")
            seen_v.add(v)
        seen_e: set[Edge] = set()
        for e in self.edges:
            if e in seen_e:
                raise GraphFormatError(f"duplicate edge {e!r}")
            seen_e.add(e)
            for endpoint in e:
                if endpoint not in seen_v:
                    raise GraphFormatError(f"unknown endpoint {endpoint!r} in edge {e!r}")
        if self.start not in seen_v:
            raise GraphFormatError(f"unknown start vertex {self.start!r}")
        if self.goal is not None and self.goal not in seen_v:
            raise GraphFormatError(f"unknown goal vertex {self.goal!r}")

    @cached_property
    def vertex_index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def all_pairs(self) -> tuple[Edge, ...]:
        """Declared edges in declaration order, then the remaining V x V pairs."""
        declared = set(self.edges)
        rest = [
            (u, v)
            for u in self.vertices
            for v in self.vertices
            if (u, v) not in declared
        ]
        return self.edges + tuple(rest)

    @cached_property
    def pair_index(self) -> dict[Edge, int]:
        return {e: i for i, e in enumerate(self.all_pairs)}

    @cached_property
    def _hash(self) -> int:
        return hash((self.vertices, self.edges, self.start, self.goal))

    def __hash__(self) -> int:
        return self._hash

    def require_vertex(self, v: str) -> None:
        if v not in self.vertex_index:
            raise GraphFormatError(f"unknown vertex {v!r}")

    def full_edges(self) -> "EdgeSet":
        return EdgeSet(self, (1 << len(self.edges)) - 1)

    def edge_set(self, edges) -> "EdgeSet":
        mask = 0
        for e in edges:
            e = (e[0], e[1])
            if e not in self.pair_index:
                raise GraphFormatError(f"unknown edge {e!r}")
            mask |= 1 << self.pair_index[e]
        return EdgeSet(self, mask)


@dataclass(frozen=True)
class EdgeSet:
    """A subset of a graph's pair universe, as a fixed-width bit vector."""

    graph: Graph
    mask: int

    def __hash__(self) -> int:
        return hash((self.graph._hash, self.mask))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EdgeSet):
            return NotImplemented
        return self.mask == other.mask and (
            self.graph is other.graph or self.graph == other.graph
        )

    def __iter__(self) -> Iterator[Edge]:
        for i, e in enumerate(self.graph.all_pairs):
            if self.mask >> i & 1:
                yield e

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __contains__(self, e: Edge) -> bool:
        i = self.graph.pair_index.get((e[0], e[1]))
        return i is not None and bool(self.mask >> i & 1)

    def __le__(self, other: "EdgeSet") -> bool:
        return self.mask & ~other.mask == 0

    def remove(self, e: Edge) -> "EdgeSet":
        i = self.graph.pair_index[(e[0], e[1])]
        return EdgeSet(self.graph, self.mask & ~(1 << i))

    def add(self, e: Edge) -> "EdgeSet":
        i = self.graph.pair_index[(e[0], e[1])]
        return EdgeSet(self.graph, self.mask | (1 << i))

    def absent_pairs(self) -> list[Edge]:
        """Ordered pairs of V x V not currently in the set."""
        return [e for i, e in enumerate(self.graph.all_pairs) if not self.mask >> i & 1]

    def declared_indices(self) -> list[int]:
        """Indices into the declared edge enumeration (added pairs excluded)."""
        n = len(self.graph.edges)
        return [i for i in range(n) if self.mask >> i & 1]


@dataclass(frozen=True)
class GameState:
    """A pair (remaining edges, runner position)."""

    edges: EdgeSet
    position: str

    def __post_init__(self) -> None:
        self.edges.graph.require_vertex(self.position)

    def __hash__(self) -> int:
        return hash((self.edges.mask, self.position))


def out_edges(edges: EdgeSet, v: str) -> EdgeSet:
    """The members of `edges` sourced at `v`."""
    edges.graph.require_vertex(v)
    mask = 0
    for i, e in enumerate(edges.graph.all_pairs):
        if edges.mask >> i & 1 and e[0] == v:
            mask |= 1 << i
    return EdgeSet(edges.graph, mask)


def has_path(edges: EdgeSet, frm: str, to: str) -> bool:
    """True iff a directed path (possibly of length 0) exists inside `edges`."""
    g = edges.graph
    g.require_vertex(frm)
    g.require_vertex(to)
    if frm == to:
        return True
    seen = {frm}
    queue = deque([frm])
    while queue:
        u = queue.popleft()
        for a, b in edges:
            if a == u and b not in seen:
                if b == to:
                    return True
                seen.add(b)
                queue.append(b)
    return False


def parse_graph(text: str) -> Graph:
    """Parse the JSON graph document format."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise GraphFormatError("graph document must be a JSON object")
    for key in ("vertices", "edges", "start"):
        if key not in doc:
            raise GraphFormatError(f"missing {key!r}")
    vertices = doc["vertices"]
    edges = doc["edges"]
    if not isinstance(vertices, list) or not all(isinstance(v, str) for v in vertices):
        raise GraphFormatError("vertices must be a list of strings")
    if not isinstance(edges, list):
        raise GraphFormatError("edges must be a list of pairs")
    parsed_edges = []
    for e in edges:
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e)):
            raise GraphFormatError(f"malformed edge {e!r}")
        parsed_edges.append((e[0], e[1]))
    return Graph(
        vertices=tuple(vertices),
        edges=tuple(parsed_edges),
        start=doc["start"],
        goal=doc.get("goal"),
    )


def serialize_graph(graph: Graph) -> str:
    """Serialize with fixed key order and enumeration-ordered arrays."""
    doc: dict = {
        "vertices": list(graph.vertices),
        "edges": [list(e) for e in graph.edges],
        "start": graph.start,
    }
    if graph.goal is not None:
        doc["goal"] = graph.goal
    return json.dumps(doc, ensure_ascii=False, separators=(",", ":"))
