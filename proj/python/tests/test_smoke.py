import math
import os
import subprocess

import pytest

import zpr


def small_config(pretrain_epochs=3, rl_epochs=2, seed=1):
    cfg = zpr.TrainConfig()
    cfg.pretrain.epochs = pretrain_epochs
    cfg.pretrain.batch = 16
    cfg.pretrain.learning_rate = 0.05
    cfg.rl.epochs = rl_epochs
    cfg.rl.batch = 16
    cfg.rl.learning_rate = 0.01
    cfg.d_emb = 8
    cfg.d_hidden = 8
    cfg.hidden1 = 16
    cfg.hidden2 = 16
    cfg.seed = seed
    return cfg


@pytest.fixture(scope="module")
def corpus():
    opts = zpr.ToyCorpusOptions()
    opts.n_docs = 20
    return zpr.generate_toy_corpus(opts)


def test_feature_names():
    assert len(zpr.FEATURE_NAMES) == 13
    assert len(set(zpr.FEATURE_NAMES)) == 13
    assert zpr.FEATURE_VERSION


def test_generator_round_trip(corpus):
    again = zpr.Corpus.parse(corpus.dumps())
    assert again.dumps() == corpus.dumps()
    s = corpus.summary()
    assert s["documents"] == 20
    assert s["instances"] == len(corpus) == corpus.n_instances
    for i in range(len(corpus)):
        gold = corpus.gold(i)
        assert gold == sorted(set(gold))
        assert all(0 <= g < corpus.n_candidates(i) for g in gold)


def test_split(corpus):
    train, dev = corpus.split(0.2, 0)
    assert len(train) + len(dev) == len(corpus)
    assert len(dev) == round(0.2 * len(corpus))


def test_bad_corpus_raises():
    with pytest.raises(Exception):
        zpr.Corpus.parse("this is not a corpus\n")


def test_reward():
    assert zpr.compute_reward([0, 2], [2]) == pytest.approx(2 * 0.5 * 1.0 / 1.5)
    assert zpr.compute_reward([], [1]) == 0.0
    assert zpr.compute_reward([1], [1]) == 1.0


def test_train_is_deterministic(corpus):
    a = zpr.train(corpus, small_config())
    b = zpr.train(corpus, small_config())
    assert len(a.log) == 5
    assert [r["phase"] for r in a.log] == ["pretrain"] * 3 + ["rl"] * 2
    assert [r["dev_f"] for r in a.log] == [r["dev_f"] for r in b.log]
    assert a.final_model.same_parameters(b.final_model)
    assert a.best_dev_f == max(r["dev_f"] for r in a.log)


def test_evaluate_and_expected_reward(corpus):
    result = zpr.train(corpus, small_config())
    report = zpr.evaluate(result.final_model, corpus)
    assert report["n_instances"] == len(corpus)
    assert 0.0 <= report["f"] <= 1.0
    assert report["averaging"] == "micro"
    assert report == zpr.evaluate(result.final_model, corpus, workers=3)
    preds = zpr.predict(result.final_model, corpus)
    assert len(preds) == len(corpus)
    small = min(range(len(corpus)), key=corpus.n_candidates)
    q = zpr.exact_expected_reward(result.final_model, corpus, small)
    assert 0.0 <= q <= 1.0


def test_checkpoint_round_trip(corpus, tmp_path):
    model = zpr.train(corpus, small_config(1, 0)).final_model
    path = str(tmp_path / "m.ckpt")
    zpr.save_checkpoint(model, corpus, path)
    loaded = zpr.load_checkpoint(path)
    assert loaded.same_parameters(model)
    assert zpr.evaluate(loaded, corpus) == zpr.evaluate(model, corpus)
    with open(path, "r+b") as f:
        f.seek(-20, os.SEEK_END)
        byte = f.read(1)
        f.seek(-20, os.SEEK_END)
        f.write(bytes([byte[0] ^ 0xFF]))
    with pytest.raises(zpr.CheckpointError):
        zpr.load_checkpoint(path)


def test_oracle_suite_small():
    checks = zpr.run_oracle_suite(seeds=2, samples=2000, variance_samples=1000, init_scale=0.08)
    grads = [c for c in checks if c["name"].startswith("grad.")]
    assert grads and all(c["pass"] for c in grads)
    assert all(math.isfinite(c["value"]) for c in checks)
    wrong = zpr.run_oracle_suite(seeds=1, samples=500, variance_samples=500, inject_wrong_sign=True)
    assert not all(c["pass"] for c in wrong if c["name"].startswith("grad."))


def test_run_cli_exit_codes(tmp_path):
    out = str(tmp_path / "toy.txt")
    code, _, _ = zpr.run_cli(["gen-toy", "--out", out, "--docs", "5"])
    assert code == 0
    assert zpr.Corpus.load(out).summary()["documents"] == 5
    code, _, err = zpr.run_cli(["no-such-command"])
    assert code == 1
    code, _, _ = zpr.run_cli(["eval", "--corpus", out, "--checkpoint", str(tmp_path / "missing")])
    assert code == 2


@pytest.mark.skipif(not os.environ.get("ZPR_CLI_PATH"), reason="CLI binary path not provided")
def test_cli_binary(tmp_path):
    exe = os.environ["ZPR_CLI_PATH"]
    out = str(tmp_path / "toy.txt")
    assert subprocess.run([exe, "gen-toy", "--out", out, "--docs", "3"]).returncode == 0
    assert subprocess.run([exe], capture_output=True).returncode == 1
