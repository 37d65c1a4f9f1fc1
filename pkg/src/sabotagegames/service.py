"""Session service: live games driven over HTTP or in process.

Sessions hold a structure kind, a current state and the play so far.  Any
non-empty subset of agents can be human-driven; the remaining agents are
played by the solver, which follows a synthesized witness strategy for the
session objective whenever one exists and otherwise moves uniformly at
random (flagged in the response, so play never stalls).

Concurrent-kind mediation: the human submits a choice and the service
computes the solver's simultaneous choice without observing the human's
(the solver strategy is positional), then applies the joint profile.
"""

from dataclasses import dataclass, field
import json
import random
import secrets
import threading
import time
from typing import Optional

from . import checker, epistemic, mincut, sml
from .formulas import Coalition, parse_formula
from .graph import GameState, Graph, GraphFormatError, parse_graph, serialize_graph
from .structures import (
    SKIP,
    ActionChoice,
    Agent,
    IllegalActionError,
    OwnedState,
    Profile,
    StructureKind,
    agents_of,
    initial_state,
    is_terminal,
    legal_actions,
    parse_choice,
    parse_state,
    serialize_choice,
    step,
)


class SessionError(Exception):
    def __init__(self, status: int, message: str, detail=None):
        super().__init__(message)
        self.status = status
        self.message = message
        self.detail = detail


@dataclass
class Session:
    id: str
    kind: StructureKind
    graph: Graph
    goal: Optional[str]
    human: frozenset[Agent]
    objective: Optional[str]
    state: OwnedState
    states: list[OwnedState] = field(default_factory=list)
    profiles: list[Profile] = field(default_factory=list)
    version: int = 0
    created: float = field(default_factory=time.time)
    updated: float = field(default_factory=time.time)


def _state_doc(s: OwnedState) -> dict:
    doc = {
        "edges": [[u, v] for u, v in s.edges],
        "position": s.position,
    }
    doc["owner"] = s.owner.value if s.owner is not None else None
    return doc


def _parse_cli_state(graph: Graph, kind: StructureKind, text: str) -> OwnedState:
    """Accept either the JSON state form or the shorthand ((E,v),a) meaning
    the full declared edge set at vertex v owned by a."""
    text = text.strip()
    if text.startswith("{"):
        return parse_state(graph, json.loads(text))
    compact = text.replace(" ", "")
    if compact.startswith("((E,") and compact.endswith(")"):
        inner = compact[4:-1]
        if inner.endswith(")"):
            inner = inner[:-1]
        parts = inner.split("),")
        if len(parts) == 2:
            vertex, owner = parts[0], parts[1]
            return OwnedState(GameState(graph.full_edges(), vertex), Agent(owner))
        vertex = inner.rstrip(")")
        return OwnedState(GameState(graph.full_edges(), vertex))
    raise SessionError(400, f"cannot parse state {text!r}")


class SessionService:
    """In-memory session store with optimistic concurrency tokens and an
    optional JSON snapshot file."""

    def __init__(self, snapshot_path: Optional[str] = None):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._rng = random.Random()
        self.snapshot_path = snapshot_path
        if snapshot_path:
            self._load_snapshot()

    # -- session lifecycle ---------------------------------------------------

    def create(
        self,
        graph_doc,
        kind_name: str,
        goal: Optional[str] = None,
        human: Optional[list[str]] = None,
        objective: Optional[str] = None,
    ) -> dict:
        try:
            graph = graph_doc if isinstance(graph_doc, Graph) else parse_graph(
                graph_doc if isinstance(graph_doc, str) else json.dumps(graph_doc)
            )
            kind = StructureKind.parse(kind_name)
        except (GraphFormatError, ValueError) as exc:
            raise SessionError(400, str(exc)) from exc
        goal = goal if goal is not None else graph.goal
        if goal is not None:
            try:
                graph.require_vertex(goal)
            except GraphFormatError as exc:
                raise SessionError(400, str(exc)) from exc
        agents = agents_of(kind)
        human_agents = frozenset(Agent(a) for a in (human or ["r"]))
        if not human_agents:
            raise SessionError(400, "at least one human agent required")
        for a in human_agents:
            if a not in agents:
                raise SessionError(400, f"agent {a.value!r} not in {kind.value} structures")
        if objective is None and goal is not None:
            objective = "<<r>> F g"
        if objective is not None:
            try:
                parse_formula(objective)
            except ValueError as exc:
                raise SessionError(400, f"bad objective: {exc}") from exc
        start = initial_state(kind, graph)
        session = Session(
            id=secrets.token_hex(8),
            kind=kind,
            graph=graph,
            goal=goal,
            human=human_agents,
            objective=objective,
            state=start,
            states=[start],
        )
        with self._lock:
            self._sessions[session.id] = session
            self._save_snapshot()
        return self.describe(session.id)

    def _get(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise SessionError(404, f"unknown session {session_id!r}")
        return session

    def describe(self, session_id: str) -> dict:
        session = self._get(session_id)
        terminal = is_terminal(session.kind, session.state)
        return {
            "id": session.id,
            "kind": session.kind.value,
            "graph": json.loads(serialize_graph(session.graph)),
            "goal": session.goal,
            "human": sorted(a.value for a in session.human),
            "objective": session.objective,
            "state": _state_doc(session.state),
            "terminal": terminal,
            "outcome": self._outcome(session) if terminal else None,
            "history": {
                "states": [_state_doc(s) for s in session.states],
                "profiles": [
                    [serialize_choice(c) for c in profile] for profile in session.profiles
                ],
            },
            "version": session.version,
            "created": session.created,
            "updated": session.updated,
        }

    def _outcome(self, session: Session) -> str:
        if session.goal is not None and session.state.position == session.goal:
            return "goal reached"
        return "runner stuck" if len(session.states) else "ended"

    # -- moves ----------------------------------------------------------------

    def legal_moves(self, session_id: str) -> dict:
        session = self._get(session_id)
        kind, s = session.kind, session.state
        if is_terminal(kind, s):
            return {"turn": None, "moves": {}}
        moves: dict[str, list] = {}
        if kind in (StructureKind.TB, StructureKind.ANGELIC_TB):
            turn = s.owner.value
            if s.owner in session.human:
                moves[turn] = [serialize_choice(c) for c in legal_actions(kind, s, s.owner)]
        else:
            turn = "simultaneous"
            for agent in agents_of(kind):
                if agent in session.human:
                    moves[agent.value] = [
                        serialize_choice(c) for c in legal_actions(kind, s, agent)
                    ]
        return {"turn": turn, "moves": moves}

    def _check_token(self, session: Session, token) -> None:
        if token is not None and int(token) != session.version:
            raise SessionError(
                409, "stale token", {"expected": session.version, "got": token}
            )

    def _apply(self, session: Session, profile: Profile) -> None:
        session.state = step(session.kind, session.state, profile)
        session.states.append(session.state)
        session.profiles.append(profile)
        session.version += 1
        session.updated = time.time()
        self._save_snapshot()

    def move(self, session_id: str, choices: dict, token=None) -> dict:
        with self._lock:
            session = self._get(session_id)
            self._check_token(session, token)
            kind, s = session.kind, session.state
            if is_terminal(kind, s):
                raise SessionError(409, "game over")
            parsed: dict[Agent, ActionChoice] = {}
            for name, doc in choices.items():
                try:
                    parsed[Agent(name)] = parse_choice(doc)
                except (ValueError, IllegalActionError) as exc:
                    raise SessionError(400, str(exc)) from exc
            profile: list[ActionChoice] = []
            notes: dict[str, str] = {}
            for agent in agents_of(kind):
                legal = legal_actions(kind, s, agent)
                if agent in parsed:
                    if agent not in session.human:
                        raise SessionError(400, f"agent {agent.value!r} is solver-driven")
                    if parsed[agent] not in legal:
                        raise SessionError(
                            400,
                            f"illegal move for {agent.value!r}",
                            {"legal": [serialize_choice(c) for c in legal]},
                        )
                    profile.append(parsed[agent])
                elif legal == (SKIP,):
                    profile.append(SKIP)
                elif agent in session.human:
                    raise SessionError(
                        400,
                        f"move required for human agent {agent.value!r}",
                        {"legal": [serialize_choice(c) for c in legal]},
                    )
                else:
                    choice, note = self._solver_choice(session, agent)
                    notes[agent.value] = note
                    profile.append(choice)
            self._apply(session, tuple(profile))
        result = self.describe(session_id)
        result["solver"] = notes
        return result

    def solver_move(self, session_id: str, token=None) -> dict:
        with self._lock:
            session = self._get(session_id)
            self._check_token(session, token)
            kind, s = session.kind, session.state
            if is_terminal(kind, s):
                raise SessionError(409, "game over")
            profile: list[ActionChoice] = []
            notes: dict[str, str] = {}
            for agent in agents_of(kind):
                legal = legal_actions(kind, s, agent)
                if legal == (SKIP,):
                    profile.append(SKIP)
                    continue
                if agent in session.human:
                    raise SessionError(
                        409, f"waiting for human agent {agent.value!r}; use move"
                    )
                choice, note = self._solver_choice(session, agent)
                notes[agent.value] = note
                profile.append(choice)
            applied = tuple(profile)
            self._apply(session, applied)
        result = self.describe(session_id)
        result["profile"] = [serialize_choice(c) for c in applied]
        result["solver"] = notes
        return result

    def _objective_formula(self, session: Session):
        if session.objective is None:
            return None
        return parse_formula(session.objective)

    def _solver_choice(self, session: Session, agent: Agent) -> tuple[ActionChoice, str]:
        """The witness-strategy choice for the session objective, when the
        agent's side can still guarantee it; a flagged random move otherwise."""
        kind, s = session.kind, session.state
        legal = legal_actions(kind, s, agent)
        formula = self._objective_formula(session)
        if isinstance(formula, Coalition) and not formula.universal:
            goals = []
            if agent.value in formula.agents:
                goals.append(formula)
            else:
                opponents = frozenset(
                    a.value for a in agents_of(kind) if a.value not in formula.agents
                )
                import sabotagegames.formulas as fml

                goals.append(Coalition(opponents, fml.PNot(formula.path)))
            for target in goals:
                try:
                    verdict = checker.check_state(
                        kind, session.graph, session.goal, s, target
                    )
                except ValueError:
                    continue
                if verdict.value and verdict.witness is not None:
                    choice = verdict.witness.choice(agent, s)
                    if choice is not None and choice in legal:
                        return choice, f"witness for {target}"
        return self._rng.choice(legal), "random (no winning witness)"

    # -- analysis -------------------------------------------------------------

    def hint(self, session_id: str, formula_text: Optional[str], agent_name: Optional[str] = None) -> dict:
        session = self._get(session_id)
        kind, s = session.kind, session.state
        text = formula_text or session.objective
        if text is None:
            raise SessionError(400, "no formula given and session has no objective")
        try:
            formula = parse_formula(text)
        except ValueError as exc:
            raise SessionError(400, str(exc)) from exc
        if is_terminal(kind, s):
            return {"formula": text, "rows": []}
        if agent_name is not None:
            agent = Agent(agent_name)
        elif kind in (StructureKind.TB, StructureKind.ANGELIC_TB):
            agent = s.owner
        elif len(session.human) == 1:
            agent = next(iter(session.human))
        else:
            raise SessionError(400, "ambiguous agent; pass agent=")
        rows = []
        for choice in legal_actions(kind, s, agent):
            outcomes = self._what_if(session, agent, choice)
            try:
                verdict = all(
                    checker.check_state(kind, session.graph, session.goal, t, formula).value
                    for t in outcomes
                )
            except ValueError as exc:
                raise SessionError(400, str(exc)) from exc
            rows.append({"choice": serialize_choice(choice), "verdict": verdict})
        return {"formula": text, "agent": agent.value, "rows": rows}

    def _what_if(self, session: Session, agent: Agent, choice: ActionChoice) -> list[OwnedState]:
        """Successor states if the agent commits to `choice` now; on
        simultaneous kinds this ranges over the other agents' replies."""
        kind, s = session.kind, session.state
        agents = agents_of(kind)
        outcomes = []
        from itertools import product

        other_legals = [
            legal_actions(kind, s, a) if a is not agent else (choice,) for a in agents
        ]
        for profile in product(*other_legals):
            outcomes.append(step(kind, s, profile))
        return sorted(set(outcomes), key=outcomes.index)

    def evaluate(self, session_id: str, formula_text: str) -> dict:
        session = self._get(session_id)
        try:
            formula = parse_formula(formula_text)
            verdict = checker.check_state(
                session.kind, session.graph, session.goal, session.state, formula
            )
        except ValueError as exc:
            raise SessionError(400, str(exc)) from exc
        return {"formula": formula_text, "verdict": verdict.value}

    # -- snapshots ------------------------------------------------------------

    def _save_snapshot(self) -> None:
        if not self.snapshot_path:
            return
        doc = []
        for session in self._sessions.values():
            doc.append(
                {
                    "id": session.id,
                    "kind": session.kind.value,
                    "graph": json.loads(serialize_graph(session.graph)),
                    "goal": session.goal,
                    "human": sorted(a.value for a in session.human),
                    "objective": session.objective,
                    "profiles": [
                        [serialize_choice(c) for c in profile]
                        for profile in session.profiles
                    ],
                    "version": session.version,
                    "created": session.created,
                    "updated": session.updated,
                }
            )
        with open(self.snapshot_path, "w", encoding="utf-8") as handle:
            json.dump({"sessions": doc}, handle)

    def _load_snapshot(self) -> None:
        try:
            with open(self.snapshot_path, encoding="utf-8") as handle:
                doc = json.load(handle)
        except FileNotFoundError:
            return
        for item in doc.get("sessions", []):
            graph = parse_graph(json.dumps(item["graph"]))
            kind = StructureKind.parse(item["kind"])
            start = initial_state(kind, graph)
            session = Session(
                id=item["id"],
                kind=kind,
                graph=graph,
                goal=item.get("goal"),
                human=frozenset(Agent(a) for a in item["human"]),
                objective=item.get("objective"),
                state=start,
                states=[start],
                version=0,
                created=item.get("created", time.time()),
            )
            # replay the recorded profiles to restore the live state
            for profile_doc in item.get("profiles", []):
                profile = tuple(parse_choice(c) for c in profile_doc)
                session.state = step(kind, session.state, profile)
                session.states.append(session.state)
                session.profiles.append(profile)
                session.version += 1
            self._sessions[session.id] = session


# ---------------------------------------------------------------------------
# One-shot analysis helpers shared by the HTTP layer and the CLI
# ---------------------------------------------------------------------------


def run_check(payload: dict) -> dict:
    """The /check operation: parse, dispatch, time, optionally cross-check."""
    try:
        graph = parse_graph(
            payload["graph"] if isinstance(payload["graph"], str) else json.dumps(payload["graph"])
        )
        kind = StructureKind.parse(payload.get("kind", "tb"))
    except (KeyError, GraphFormatError, ValueError) as exc:
        raise SessionError(400, str(exc)) from exc
    goal = payload.get("goal", graph.goal)
    state_doc = payload.get("state")
    if state_doc is None:
        state = initial_state(kind, graph)
    elif isinstance(state_doc, str):
        state = _parse_cli_state(graph, kind, state_doc)
    else:
        state = parse_state(graph, state_doc)
    formula_text = payload["formula"]
    relations = None
    if payload.get("relations"):
        relations = epistemic.relations_from_config(payload["relations"], graph)

    started = time.perf_counter()
    if payload.get("sml"):
        try:
            formula = sml.parse_sml(formula_text)
        except ValueError as exc:
            raise SessionError(400, str(exc)) from exc
        model = sml.model_of(state.state, goal)
        verdict = sml.eval_sml(model, state.position, formula)
        witness = None
        states = len(graph.vertices)
    else:
        try:
            formula = parse_formula(formula_text)
        except ValueError as exc:
            raise SessionError(400, str(exc)) from exc
        try:
            if payload.get("imp"):
                if relations is None:
                    raise SessionError(400, "imperfect-information check needs relations")
                verdict = epistemic.check_imp(kind, graph, goal, relations, state, formula)
                witness = None
            else:
                outcome = checker.check_state(
                    kind, graph, goal, state, formula, relations=relations
                )
                verdict = outcome.value
                witness = outcome.witness.to_json() if outcome.witness else None
        except (ValueError, checker.ResourceBudgetError) as exc:
            raise SessionError(400, str(exc)) from exc
        states = len(checker.get_structure(kind, graph).reachable(state))
    elapsed_ms = (time.perf_counter() - started) * 1000.0

    result = {
        "verdict": verdict,
        "witness": witness,
        "timing_ms": round(elapsed_ms, 3),
        "state_space": states,
    }
    if payload.get("oracle") and not payload.get("sml") and not payload.get("imp"):
        oracle = checker.brute_force_check(kind, graph, goal, state, formula)
        result["oracle"] = {"verdict": oracle, "agrees": oracle == verdict}
    return result


def run_mincut(payload: dict) -> dict:
    try:
        graph = parse_graph(
            payload["graph"] if isinstance(payload["graph"], str) else json.dumps(payload["graph"])
        )
        source = payload["from"]
        target = payload["to"]
    except (KeyError, GraphFormatError) as exc:
        raise SessionError(400, str(exc)) from exc
    try:
        if payload.get("dynamic"):
            report = mincut.dynamic_min_cut(graph, source, target)
            if report is None:
                return {"size": None, "demon_moves": None, "cut_edges": []}
            doc = report.to_json()
        else:
            doc = mincut.static_min_cut(graph, source, target).to_json()
            doc["edge_disjoint_paths"] = mincut.edge_disjoint_paths(graph, source, target)
    except ValueError as exc:
        raise SessionError(400, str(exc)) from exc
    return doc


def create_app(service: Optional[SessionService] = None):
    """The FastAPI application wrapping a session service."""
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse

    app = FastAPI(title="sabotage game workbench")
    app.state.service = service or SessionService()

    @app.exception_handler(SessionError)
    async def session_error(_request: Request, exc: SessionError):
        return JSONResponse(
            status_code=exc.status, content={"error": exc.message, "detail": exc.detail}
        )

    @app.get("/health")
    def health():
        return {"ok": True}

    @app.post("/sessions")
    async def create_session(request: Request):
        payload = await request.json()
        return app.state.service.create(
            payload["graph"],
            payload.get("kind", "tb"),
            payload.get("goal"),
            payload.get("human"),
            payload.get("objective"),
        )

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return app.state.service.describe(session_id)

    @app.get("/sessions/{session_id}/moves")
    def get_moves(session_id: str):
        return app.state.service.legal_moves(session_id)

    @app.post("/sessions/{session_id}/move")
    async def post_move(session_id: str, request: Request):
        payload = await request.json()
        choices = payload.get("choices")
        if choices is None and "choice" in payload:
            service_obj = app.state.service
            session = service_obj._get(session_id)
            humans = sorted(a.value for a in session.human)
            if len(humans) != 1:
                raise SessionError(400, "multiple human agents; send a choices map")
            choices = {humans[0]: payload["choice"]}
        if choices is None:
            raise SessionError(400, "missing choices")
        return app.state.service.move(session_id, choices, payload.get("token"))

    @app.post("/sessions/{session_id}/solver-move")
    async def post_solver_move(session_id: str, request: Request):
        body = await request.body()
        payload = json.loads(body) if body else {}
        return app.state.service.solver_move(session_id, payload.get("token"))

    @app.get("/sessions/{session_id}/hint")
    def get_hint(session_id: str, formula: Optional[str] = None, agent: Optional[str] = None):
        return app.state.service.hint(session_id, formula, agent)

    @app.get("/sessions/{session_id}/eval")
    def get_eval(session_id: str, formula: str):
        return app.state.service.evaluate(session_id, formula)

    @app.post("/check")
    async def post_check(request: Request):
        return run_check(await request.json())

    @app.post("/mincut")
    async def post_mincut(request: Request):
        return run_mincut(await request.json())

    return app
