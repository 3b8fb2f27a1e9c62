import math

import pytest

import tsc


@pytest.fixture(scope="module")
def small():
    return tsc.grid_scenario(1, 1, "peak", seed=3, episode_s=600.0)


def test_scenario_json_round_trip(small):
    again = tsc.parse_scenario(small.to_json())
    assert again.to_json() == small.to_json()
    assert small.intersections == 1
    assert small.name == "grid1x1_peak"


def test_bad_pattern_raises_config_error():
    with pytest.raises(tsc.ConfigError):
        tsc.grid_scenario(1, 1, "rush")


def test_collect_logs_one_tuple_per_decision(small, tmp_path):
    data = tsc.collect([small], "cycle", episodes=2, seed=7)
    assert len(data) == 2 * 40
    assert data.provenance == "cycle"
    assert all(r <= 0 for r in data.rewards)

    path = tmp_path / "d.ndjson"
    data.save(path)
    back = tsc.load_dataset(path)
    assert back.actions == data.actions
    assert back.rewards == data.rewards
    assert len(data.subsample(0.5, seed=1)) == 40


def test_train_checkpoint_and_evaluate(small, tmp_path):
    data = tsc.collect([small], "cycle", episodes=1, seed=1)
    net, losses = tsc.train(data, steps=20, batch=8, seed=4)
    assert len(losses) == 20
    assert all(math.isfinite(x) for x in losses)

    path = tmp_path / "q.ckpt"
    net.save(path)
    again = tsc.load_checkpoint(path)
    state = [0.5] * 84
    assert again.phase_scores(state) == net.phase_scores(state)

    att = tsc.evaluate(small, "datalight", net, episodes=2, seed=0)
    assert len(att) == 2 and all(t > 0 for t in att)
    assert tsc.evaluate(small, "fixed_time", episodes=1) == tsc.evaluate(small, "fixed_time", episodes=1)


def test_learned_policy_requires_network(small):
    with pytest.raises(tsc.ConfigError):
        tsc.evaluate(small, "datalight")


def test_init_is_deterministic():
    a, b = tsc.QNetwork.init(9), tsc.QNetwork.init(9)
    assert a.phase_scores([1.0] * 84) == b.phase_scores([1.0] * 84)
    assert a.tensor_names()[0] == "embed.w"
