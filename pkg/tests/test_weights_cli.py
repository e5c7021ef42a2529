import json

import numpy as np
import pytest

from bittetris.cli import main
from bittetris.weights import PRESETS, WeightFileError, load_weights, save_weights


class TestPresets:
    def test_values(self):
        assert PRESETS["dt10"].tolist() == [
            -2.18, 2.42, -2.17, -3.31, 0.95, -2.22, -0.81, -9.65, 1.27]
        assert PRESETS["dt20"].tolist() == [
            -2.68, 1.38, -2.41, -6.32, 2.03, -2.71, -0.43, -9.48, 0.89]
        assert PRESETS["ppo-best"].tolist() == [
            -0.51, 0.16, -0.40, -0.75, -0.18, -0.39, -0.17, -0.83, 0.36]

    def test_load_by_name(self):
        assert np.array_equal(load_weights("dt10"), PRESETS["dt10"])


class TestWeightFiles:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "w.json"
        w = np.arange(9, dtype=np.float64)
        save_weights(path, w, critic_bias=1.5, meta={"seed": 7})
        assert np.array_equal(load_weights(path), w)
        record = json.loads(path.read_text())
        assert record["critic_bias"] == 1.5
        assert record["meta"]["seed"] == 7

    def test_missing_file(self):
        with pytest.raises(WeightFileError):
            load_weights("/nonexistent/weights.json")

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(WeightFileError):
            load_weights(path)

    def test_missing_feature(self, tmp_path):
        path = tmp_path / "short.json"
        path.write_text(json.dumps({"landing_height": 1.0}))
        with pytest.raises(WeightFileError, match="missing features"):
            load_weights(path)

    def test_non_numeric(self, tmp_path):
        from bittetris.features import FEATURE_NAMES

        path = tmp_path / "nan.json"
        record = {n: 0.0 for n in FEATURE_NAMES}
        record["holes"] = "many"
        path.write_text(json.dumps(record))
        with pytest.raises(WeightFileError):
            load_weights(path)

    def test_wrong_shape_rejected_on_save(self, tmp_path):
        with pytest.raises(WeightFileError):
            save_weights(tmp_path / "w.json", np.zeros(8))


class TestCliEval:
    def test_writes_report_and_figure(self, tmp_path, capsys):
        out = tmp_path / "eval"
        rc = main(["eval", "--weights", "dt10", "--board", "10", "--games", "6",
                   "--gen", "random", "--seed", "7", "--out", str(out)])
        assert rc == 0
        payload = json.loads((out / "eval_report.json").read_text())
        assert payload["games"] == 6
        assert payload["seed"] == 7
        assert "config_hash" in payload and "version" in payload
        assert (out / "score_hist.png").stat().st_size > 0
        assert "mean=" in capsys.readouterr().out

    def test_unknown_weights_is_usage_error(self, tmp_path, capsys):
        rc = main(["eval", "--weights", "nope", "--games", "2",
                   "--out", str(tmp_path)])
        assert rc == 2
        assert "error" in capsys.readouterr().err

    def test_unknown_generator_rejected(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["eval", "--weights", "dt10", "--gen", "nes", "--out", str(tmp_path)])
        assert exc.value.code == 2

    def test_env_var_overrides_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("BITTETRIS_OUT", str(tmp_path / "env_out"))
        rc = main(["eval", "--weights", "dt10", "--games", "2", "--seed", "1",
                   "--out", str(tmp_path / "ignored")])
        assert rc == 0
        assert (tmp_path / "env_out" / "eval_report.json").exists()
        assert not (tmp_path / "ignored").exists()


class TestCliBench:
    def test_prints_rate(self, capsys, tmp_path):
        rc = main(["bench", "--steps", "1000", "--seed", "3",
                   "--out", str(tmp_path)])
        assert rc == 0
        assert "steps/sec" in capsys.readouterr().out
        assert (tmp_path / "bench_report.json").exists()


class TestCliVerify:
    def test_small_fuzz_exits_zero(self, capsys):
        rc = main(["verify", "--transitions", "600", "--seed", "2"])
        assert rc == 0
        assert "OK" in capsys.readouterr().out


class TestCliTrain:
    def test_tiny_buffer_run_writes_artifacts(self, tmp_path, capsys):
        out = tmp_path / "train"
        rc = main(["train", "--algo", "ppo-buffer", "--seed", "4",
                   "--total-steps", "256", "--batch-size", "64",
                   "--mini-batch", "32", "--probe-episodes", "2",
                   "--out", str(out)])
        assert rc == 0
        weights = json.loads((out / "weights.json").read_text())
        assert "landing_height" in weights and "critic_bias" in weights
        curve = (out / "curve.csv").read_text().splitlines()
        assert curve[0].startswith("#")          # reproducibility header
        assert any("step,return,seconds" in line for line in curve[:4])
        assert (out / "learning_curve.png").stat().st_size > 0
        report = json.loads((out / "train_report.json").read_text())
        assert report["env_steps"] == 256
        assert report["updates"] == 4

    def test_config_file_supplies_defaults(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"weights": "dt10", "games": 3, "seed": 11,
                                   "out": str(tmp_path / "cfg_out")}))
        rc = main(["--config", str(cfg), "eval"])
        assert rc == 0
        payload = json.loads((tmp_path / "cfg_out" / "eval_report.json").read_text())
        assert payload["games"] == 3
        assert payload["seed"] == 11

    def test_exported_weights_reproduce_final_probe(self, tmp_path):
        # the weight file is the trained policy: greedy evaluation of the
        # export must match the trainer's own final greedy probe
        from bittetris.evaluate import evaluate
        from bittetris.training import Hyperparams, train_buffer_ppo

        hp = Hyperparams.buffer_ppo(batch_size=512, mini_batch=128,
                                    total_steps=4096, probe_episodes=30)
        res = train_buffer_ppo(hp, seed=6)
        path = tmp_path / "w.json"
        save_weights(path, res.policy.weights)
        again = evaluate(load_weights(path), games=30, seed=77)
        final_probe = res.curve[-1][1]
        # same policy, different seed lists: agree within sampling noise
        spread = 3 * (again.std / np.sqrt(30) + max(final_probe, 1.0) / np.sqrt(30))
        assert abs(again.mean - final_probe) <= max(spread, 10.0)

    def test_init_weights_warm_starts_training(self, tmp_path):
        from bittetris.training import Hyperparams, train_buffer_ppo
        from bittetris.policy import LinearPolicy

        start = np.linspace(-0.5, 0.5, 9)
        hp = Hyperparams.buffer_ppo(batch_size=64, mini_batch=32,
                                    total_steps=64, probe_episodes=0)
        res = train_buffer_ppo(hp, seed=1, init_policy=LinearPolicy(start))
        # one tiny cycle: weights should have moved off the start, not reset
        assert not np.array_equal(res.policy.weights, np.zeros(9))
        assert np.abs(res.policy.weights - start).max() < 0.05
