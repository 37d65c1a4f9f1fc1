import pytest

from sabotagegames import (
    SKIP,
    Agent,
    GameState,
    OwnedState,
    StructureKind,
    enumerate_plays,
    initial_state,
    is_terminal,
    label,
    legal_actions,
    step,
    successors,
)
from sabotagegames.structures import (
    IllegalActionError,
    replay,
    serialize_state,
    parse_state,
    validate_play,
)

TB, CON, GEN, ANG = (
    StructureKind.TB,
    StructureKind.CON,
    StructureKind.GEN,
    StructureKind.ANGELIC_TB,
)


def owned(graph, edges, pos, owner=None):
    return OwnedState(GameState(graph.edge_set(edges), pos), owner)


def test_tb_demon_turn_actions(triangle):
    s = OwnedState(GameState(triangle.full_edges(), "0"), Agent.DEMON)
    assert set(legal_actions(TB, s, Agent.DEMON)) == set(triangle.edges)
    assert legal_actions(TB, s, Agent.RUNNER) == (SKIP,)


def test_con_stuck_runner_actions(triangle):
    s = owned(triangle, [("1", "2")], "2")
    assert legal_actions(CON, s, Agent.RUNNER) == ()
    assert legal_actions(CON, s, Agent.DEMON) == (("1", "2"),)


def test_gen_actions_include_skip(triangle):
    s0 = initial_state(GEN, triangle)
    assert set(legal_actions(GEN, s0, Agent.RUNNER)) == {("0", "1"), ("0", "2"), SKIP}


def test_angel_only_in_angelic(triangle):
    s0 = initial_state(TB, triangle)
    with pytest.raises(IllegalActionError, match="not part of"):
        legal_actions(TB, s0, Agent.ANGEL)


def test_con_cancellation(triangle):
    s0 = initial_state(CON, triangle)
    for e in legal_actions(CON, s0, Agent.RUNNER):
        assert step(CON, s0, (e, e)) == s0


def test_gen_demon_only_deletion(triangle):
    s0 = initial_state(GEN, triangle)
    nxt = step(GEN, s0, (SKIP, ("1", "2")))
    assert nxt.position == "0"
    assert ("1", "2") not in nxt.edges


def test_con_joint_move(triangle):
    s0 = initial_state(CON, triangle)
    nxt = step(CON, s0, (("0", "1"), ("0", "2")))
    assert nxt.position == "1"
    assert set(nxt.edges) == {("0", "1"), ("1", "2")}


def test_tb_transition_owner_flip(triangle):
    s0 = initial_state(TB, triangle)
    after_move = step(TB, s0, (("0", "1"), SKIP))
    assert after_move.owner is Agent.DEMON
    assert after_move.position == "1"
    after_cut = step(TB, after_move, (SKIP, ("0", "2")))
    assert after_cut.owner is Agent.RUNNER
    assert ("0", "2") not in after_cut.edges


def test_step_rejects_illegal_choice(triangle):
    s0 = initial_state(TB, triangle)
    with pytest.raises(IllegalActionError, match="'r'"):
        step(TB, s0, (("1", "2"), SKIP))


def test_angelic_rotation_and_edge_addition(two_cycle):
    s0 = initial_state(ANG, two_cycle)
    s1 = step(ANG, s0, (("0", "1"), SKIP, SKIP))
    assert s1.owner is Agent.DEMON
    s2 = step(ANG, s1, (SKIP, ("1", "0"), SKIP))
    assert s2.owner is Agent.ANGEL
    adds = legal_actions(ANG, s2, Agent.ANGEL)
    assert ("0", "0") in adds and ("1", "0") in adds
    s3 = step(ANG, s2, (SKIP, SKIP, ("1", "0")))
    assert s3.owner is Agent.RUNNER
    assert ("1", "0") in s3.edges


def test_angelic_stuck_runner_skips(two_cycle):
    # demon strands the runner; the owner falls back to skip and the angel
    # can rebuild, so the structure never terminates
    stranded = OwnedState(GameState(two_cycle.edge_set([("0", "1")]), "1"), Agent.RUNNER)
    assert legal_actions(ANG, stranded, Agent.RUNNER) == (SKIP,)
    assert not is_terminal(ANG, stranded)
    assert successors(ANG, stranded)


def test_successors_empty_iff_terminal(triangle):
    demon_no_edges = owned(triangle, [], "0", Agent.DEMON)
    assert successors(TB, demon_no_edges) == []
    assert is_terminal(TB, demon_no_edges)

    stuck = owned(triangle, [("1", "2")], "2")
    assert is_terminal(CON, stuck)

    s0 = initial_state(GEN, triangle)
    assert not is_terminal(GEN, s0)
    assert any(p == (SKIP, SKIP) for p, _ in successors(GEN, s0))


def test_tb_start_not_terminal(triangle):
    assert not is_terminal(TB, initial_state(TB, triangle))


def test_con_successor_count(triangle):
    s0 = initial_state(CON, triangle)
    assert len(successors(CON, s0)) == 6  # 2 runner moves x 3 demon picks


def test_tb_plays_all_end_and_validate(triangle):
    plays = enumerate_plays(TB, initial_state(TB, triangle))
    assert plays
    for play in plays:
        assert play.lasso is None
        assert is_terminal(TB, play.states[-1])
        assert validate_play(TB, play)
        assert len(play.states) <= 2 * len(triangle.edges) + 1


def test_tb_play_count_is_finite_and_bound_tight(single_edge):
    plays = enumerate_plays(TB, initial_state(TB, single_edge))
    assert len(plays) == 1
    # one runner move, one deletion: three states; the general ceiling is
    # 2|E|+1 states for runner-first maximal plays
    assert len(plays[0].states) == 3 == 2 * len(single_edge.edges) + 1


def test_con_enumeration_requires_bound(single_edge):
    with pytest.raises(ValueError, match="infinite play space"):
        enumerate_plays(CON, initial_state(CON, single_edge))


def test_con_single_edge_lasso(single_edge):
    plays = enumerate_plays(CON, initial_state(CON, single_edge), max_len=10)
    assert len(plays) == 1
    play = plays[0]
    assert play.lasso == 0 and len(play.states) == 1
    assert play.profiles == (((("v0", "vg")), ("v0", "vg")),)
    assert validate_play(CON, play)


def test_gen_contains_self_lasso(triangle):
    plays = enumerate_plays(GEN, initial_state(GEN, triangle), max_len=60)
    assert any(p.lasso == 0 and len(p.states) == 1 for p in plays)


def test_every_con_play_replays_through_gen(triangle):
    con_plays = enumerate_plays(CON, initial_state(CON, triangle), max_len=60)
    for play in con_plays:
        start = OwnedState(play.states[0].state)
        states = replay(GEN, start, play.profiles[: len(play.states) - 1])
        assert [s.state for s in states] == [s.state for s in play.states]


def test_tb_labels_alternate_on_demon_moves(triangle, triangle_goal):
    for graph in (triangle, triangle_goal):
        for play in enumerate_plays(TB, initial_state(TB, graph)):
            labels = [label(TB, s, graph.goal) for s in play.states]
            for i in range(1, len(labels) - 1, 2):
                assert labels[i] != labels[i + 1]


def test_tb_play_has_gen_twin_with_same_labels(triangle):
    for play in enumerate_plays(TB, initial_state(TB, triangle)):
        start = OwnedState(play.states[0].state)
        twin = replay(GEN, start, play.profiles)
        for mine, theirs in zip(play.states, twin):
            assert label(TB, mine) == label(GEN, theirs)


def test_runner_actions_within_demon_actions_on_con_gen(triangle, two_cycle):
    for graph in (triangle, two_cycle):
        for kind in (CON, GEN):
            for play in enumerate_plays(kind, initial_state(kind, graph), max_len=30):
                for s in play.states:
                    runner = set(legal_actions(kind, s, Agent.RUNNER))
                    demon = set(legal_actions(kind, s, Agent.DEMON))
                    assert runner <= demon


def test_step_never_adds_edges_outside_angel(triangle):
    for kind in (TB, CON, GEN):
        for play in enumerate_plays(kind, initial_state(kind, triangle), max_len=30):
            for a, b in zip(play.states, play.states[1:]):
                assert b.edges.mask & ~a.edges.mask == 0


def test_state_serialization_round_trip(triangle):
    s = OwnedState(GameState(triangle.edge_set([("0", "1"), ("1", "2")]), "1"), Agent.DEMON)
    doc = serialize_state(s)
    assert doc == {"edges": [0, 2], "position": "1", "owner": "d"}
    assert parse_state(triangle, doc) == s


def test_angelic_added_edge_serializes_as_pair(two_cycle):
    s0 = initial_state(ANG, two_cycle)
    s = step(ANG, step(ANG, step(ANG, s0, (("0", "1"), SKIP, SKIP)), (SKIP, ("0", "1"), SKIP)), (SKIP, SKIP, ("1", "1")))
    doc = serialize_state(s)
    assert ["1", "1"] in doc["edges"]
    assert parse_state(two_cycle, doc) == s
