"""Smoke tests for the python bindings."""

import pytest

import froggerlab as fl


def test_env_step_and_determinism():
    cfg = fl.EnvConfig.standard()
    cfg.seed = 7
    env = fl.FroggerEnv(cfg)
    assert env.frog_x == 79
    assert env.frog_y == 171
    assert env.lives_left == 4

    r = env.step(int(fl.Action.UP))
    assert r["reward"] == 1.0
    assert not r["done"]
    assert env.frog_y == 161

    other = fl.FroggerEnv(cfg)
    other.step(int(fl.Action.UP))
    assert other.state_hash() == env.state_hash()


def test_snapshot_roundtrip():
    env = fl.FroggerEnv(fl.EnvConfig.mini())
    for a in [1, 0, 3, 0, 1]:
        env.step(a)
    blob = env.snapshot()
    back = fl.FroggerEnv.restore(blob)
    assert back.state_hash() == env.state_hash()
    env.step(0)
    back.step(0)
    assert back.state_hash() == env.state_hash()
    with pytest.raises(ValueError):
        fl.FroggerEnv.restore(blob[:10])


def test_objects_and_pixels_agree():
    env = fl.FroggerEnv(fl.EnvConfig.standard())
    objs = fl.objects(env)
    assert objs[0].category == "Frog"
    text = fl.format_objects(objs)
    assert "Frog at (79, 171) size (7, 7)" in text
    assert fl.format_objects(fl.parse_objects(text)) == text

    frame = fl.render(env)
    assert len(frame) == 160 * 210
    extracted = fl.extract(frame)
    key = lambda o: (o.category, o.x, o.y, o.w, o.h)
    assert sorted(map(key, extracted)) == sorted(map(key, objs))

    stack = fl.preprocess([frame] * 4)
    assert len(stack) == 4 * 84 * 84
    assert all(0.0 <= v <= 1.0 for v in stack)


def test_brute_finds_a_row_advance():
    env = fl.FroggerEnv(fl.EnvConfig.mini())
    result = fl.brute_dfs(env, target_score=1, max_expansions=10000)
    assert result.achieved_score >= 1.0
    assert result.plan[0] == int(fl.Action.UP)
    assert fl.replay_plan(env, result.plan) == result.achieved_score


def test_replay_buffer_and_priority():
    assert fl.priority(0.5, 0.01, 0.6) == pytest.approx(0.6677, abs=1e-4)
    buf = fl.PrioritizedBuffer(capacity=8)
    t = fl.Transition()
    t.state_features = [0.0]
    t.next_state_features = [0.0]
    buf.push(t)
    buf.push(t, priority=3.0)
    batch = buf.sample(4, 0.4, seed=1)
    assert len(batch["indices"]) == 4
    assert all(0.0 < w <= 1.0 for w in batch["is_weights"])

    demos = []
    for _ in range(3):
        d = fl.Transition()
        d.state_features = [0.0]
        d.next_state_features = [0.0]
        demos.append(d)
    buf.preload_demos(demos, 5.0)
    assert buf.demo_count() == 3
    assert buf.max_priority() == 5.0


def test_encoder_and_q_forward():
    env = fl.FroggerEnv(fl.EnvConfig.standard())
    feats = fl.encode_object_state(fl.objects(env), slots=8)
    assert len(feats) == 4 + 8 * 9
    params = fl.QNetParams.init([len(feats), 16, 5], seed=3)
    q = fl.q_forward(params, feats)
    assert len(q) == 5


def test_prompt_build_and_parse():
    msgs = fl.build_prompt("Frog at (79, 171) size (7, 7)", t=0)
    assert msgs[0]["role"] == "user"
    assert "NOOP, UP, RIGHT, LEFT, DOWN" in msgs[0]["content"]

    parsed = fl.parse_action('{"game_state": "x", "reasoning": "y", "action": "UP"}')
    assert parsed["ok"]
    assert parsed["action"] == int(fl.Action.UP)
    assert fl.action_from_name("left") == int(fl.Action.LEFT)


def test_config_errors():
    cfg = fl.EnvConfig.standard()
    cfg.lives = 0
    with pytest.raises(ValueError):
        cfg.validate()
