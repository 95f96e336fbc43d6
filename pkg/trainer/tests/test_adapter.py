import json
import sys

import numpy as np
import pytest

from activemix_adapter import AdapterConfig, AdapterError, ProtocolError, SubprocessMixingEnv


def make_env(**options):
    return SubprocessMixingEnv(**options)


def test_startup_probes_spec():
    with make_env(alpha=1.0) as env:
        assert env.spec["n_part"] == 96
        assert env.spec["obs_shape"] == [2, 4, 4]
        assert env.action_len == 16
        assert env.spec["alpha"] == 1.0


def test_missing_executable_is_a_startup_error():
    cfg = AdapterConfig(command=("/definitely/not/a/binary",))
    with pytest.raises(AdapterError):
        SubprocessMixingEnv(cfg)


def test_unresponsive_core_times_out():
    cfg = AdapterConfig(
        command=(sys.executable, "-c", "import time; time.sleep(30)"),
        timeout=0.8,
    )
    with pytest.raises(AdapterError, match="no response"):
        SubprocessMixingEnv(cfg)


def test_reset_returns_count_tensor():
    with make_env() as env:
        obs = env.reset(7)
        assert obs.shape == (2, 4, 4)
        assert obs.dtype == np.int64
        assert obs.sum() == 96
        obs2 = env.reset(7)
        np.testing.assert_array_equal(obs, obs2)


def test_distinct_seeds_differ():
    with make_env() as env:
        a = env.reset(1)
        b = env.reset(2)
        assert not np.array_equal(a, b)


def test_step_contract_and_info_parts():
    with make_env(alpha=1.0) as env:
        env.reset(3)
        obs, reward, done, info = env.step([0] * 16)
        assert obs.sum() == 96
        assert done is False
        assert info["t"] == 1
        # alpha = 1: the blended reward is exactly the mixing part
        assert reward == info["r_m"]
        assert "raw" in info


def test_step_accepts_grid_shaped_actions():
    with make_env() as env:
        env.reset(0)
        grid = np.zeros((4, 4), dtype=int)
        grid[:2, :] = 2
        _, _, _, info = env.step(grid)
        assert info["t"] == 1


def test_step_before_reset_raises():
    with make_env() as env:
        with pytest.raises(ProtocolError) as err:
            env.step([0] * 16)
        assert err.value.code == "not_reset"


def test_invalid_action_code_propagates():
    with make_env(interaction_set="attractive-only") as env:
        env.reset(0)
        with pytest.raises(ProtocolError) as err:
            env.step([2] * 16)  # repulsive cells, not allowed
        assert err.value.code == "invalid_action"
        with pytest.raises(ProtocolError) as err2:
            env.step([0] * 3)
        assert err2.value.code == "invalid_action"
        # session survives the rejected actions
        _, _, _, info = env.step([1] * 16)
        assert info["t"] == 1


def test_episode_finishes_and_further_steps_error():
    with make_env(n_steps=5) as env:
        env.reset(0)
        done = False
        for k in range(5):
            _, _, done, info = env.step([0] * 16)
        assert done is True and info["t"] == 5
        with pytest.raises(ProtocolError) as err:
            env.step([0] * 16)
        assert err.value.code == "episode_finished"


def test_transport_transparency_raw_strings():
    """Parsed numbers equal the transcript strings exactly."""
    with make_env(alpha=0.5) as env:
        env.reset(11)
        _, reward, _, info = env.step([1] * 16)
        raw = json.loads(info["raw"])
        assert reward == raw["reward"]
        assert info["r_m"] == raw["reward_parts"][0]
        assert info["r_h"] == raw["reward_parts"][1]
        # 17-digit formatting round-trips to the identical byte string
        reward_str = info["raw"].split('"reward":')[1].split(",")[0]
        assert format(reward, ".17g") == reward_str


def test_options_passthrough():
    with make_env(n_grid=2, n_steps=3) as env:
        assert env.spec["n_grid"] == 2
        obs = env.reset(0)
        assert obs.shape == (2, 2, 2)
        assert env.action_len == 4
