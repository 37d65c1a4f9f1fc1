"""Command-line interface: check, mincut, solve, play, serve.

Exit codes for `check` and `solve`: 0 when the property holds, 1 when it
does not, 2 on parse or semantic errors (diagnostic on stderr).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import checker
from .formulas import parse_formula
from .graph import parse_graph
from .service import SessionError, SessionService, create_app, run_check, run_mincut
from .structures import StructureKind, initial_state, serialize_choice


def _read_graph(path: str) -> str:
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def _cmd_check(args) -> int:
    payload = {
        "graph": _read_graph(args.graph),
        "kind": args.kind,
        "goal": args.goal,
        "formula": args.formula,
        "sml": args.sml,
        "imp": args.imp,
        "oracle": args.oracle,
        "state": args.state,
    }
    if args.relations:
        payload["relations"] = json.loads(args.relations)
    try:
        result = run_check(payload)
    except SessionError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return 2
    print(json.dumps(result, indent=2))
    return 0 if result["verdict"] else 1


def _cmd_mincut(args) -> int:
    payload = {
        "graph": _read_graph(args.graph),
        "from": getattr(args, "from"),
        "to": args.to,
        "dynamic": args.dynamic,
    }
    try:
        result = run_mincut(payload)
    except SessionError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return 2
    print(json.dumps(result, indent=2))
    return 0


def _cmd_solve(args) -> int:
    try:
        graph = parse_graph(_read_graph(args.graph))
        kind = StructureKind.parse(args.kind)
        formula = parse_formula(args.formula)
        state = initial_state(kind, graph)
        outcome = checker.check_state(kind, graph, args.goal or graph.goal, state, formula)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not outcome.value:
        print(json.dumps({"verdict": False, "witness": None}, indent=2))
        return 1
    witness = outcome.witness.to_json() if outcome.witness else None
    print(json.dumps({"verdict": True, "witness": witness}, indent=2))
    return 0


def _cmd_play(args) -> int:
    service = SessionService(snapshot_path=args.snapshot)
    try:
        session = service.create(
            _read_graph(args.graph),
            args.kind,
            args.goal,
            args.human.split(",") if args.human else ["r"],
            args.objective,
        )
    except SessionError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return 2
    session_id = session["id"]
    print(f"session {session_id} on {args.graph} ({args.kind})")
    while True:
        session = service.describe(session_id)
        state = session["state"]
        print(f"\nposition: {state['position']}  owner: {state['owner']}")
        print(f"edges: {state['edges']}")
        if session["terminal"]:
            print(f"game over: {session['outcome']}")
            return 0
        moves = service.legal_moves(session_id)
        if not moves["moves"]:
            result = service.solver_move(session_id, session["version"])
            print(f"solver plays {result['profile']}  ({result['solver']})")
            continue
        for agent, legal in moves["moves"].items():
            print(f"{agent} to move: {legal}")
        raw = input("move (u,v | skip | hint <formula> | quit): ").strip()
        if raw in ("quit", "q"):
            return 0
        if raw.startswith("hint"):
            formula = raw[4:].strip() or None
            try:
                hint = service.hint(session_id, formula)
            except SessionError as exc:
                print(f"error: {exc.message}")
                continue
            for row in hint["rows"]:
                print(f"  {row['choice']}: {row['verdict']}")
            continue
        choice = raw if raw == "skip" else raw.split(",")
        agent = next(iter(moves["moves"]))
        try:
            result = service.move(session_id, {agent: choice}, session["version"])
        except SessionError as exc:
            print(f"error: {exc.message} {exc.detail or ''}")
            continue
        if result.get("solver"):
            print(f"solver: {result['solver']}")


def _cmd_serve(args) -> int:
    import uvicorn

    app = create_app(SessionService(snapshot_path=args.snapshot))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sabotagegames")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="model-check a formula on a graph")
    check.add_argument("--graph", required=True)
    check.add_argument("--kind", default="tb", choices=["tb", "con", "gen", "angelic"])
    check.add_argument("--goal")
    check.add_argument("--formula", required=True)
    check.add_argument("--sml", action="store_true", help="treat the formula as modal-logic syntax")
    check.add_argument("--imp", action="store_true", help="imperfect-information semantics")
    check.add_argument("--relations", help="JSON accessibility-relation config")
    check.add_argument("--oracle", action="store_true", help="cross-check by strategy enumeration")
    check.add_argument("--state", help='state, JSON or "((E,v),a)"')
    check.set_defaults(func=_cmd_check)

    cut = sub.add_parser("mincut", help="static or dynamic minimum cut")
    cut.add_argument("--graph", required=True)
    cut.add_argument("--from", required=True)
    cut.add_argument("--to", required=True)
    cut.add_argument("--dynamic", action="store_true")
    cut.set_defaults(func=_cmd_mincut)

    solve = sub.add_parser("solve", help="emit a witness strategy")
    solve.add_argument("--graph", required=True)
    solve.add_argument("--kind", default="tb", choices=["tb", "con", "gen", "angelic"])
    solve.add_argument("--goal")
    solve.add_argument("--formula", required=True)
    solve.set_defaults(func=_cmd_solve)

    play = sub.add_parser("play", help="interactive terminal play")
    play.add_argument("--graph", required=True)
    play.add_argument("--kind", default="tb", choices=["tb", "con", "gen", "angelic"])
    play.add_argument("--goal")
    play.add_argument("--human", help="comma list of human agents (default r)")
    play.add_argument("--objective")
    play.add_argument("--snapshot")
    play.set_defaults(func=_cmd_play)

    serve = sub.add_parser("serve", help="run the HTTP session service")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--snapshot")
    serve.set_defaults(func=_cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
