# Copyright 2026 The LMM Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

import lmm

lmm.set_warnings_enabled(False)


def toy_records():
    rng = np.random.default_rng(0)
    records = []
    for topic in range(3):
        for _ in range(15):
            doc = int(rng.integers(4))
            term = f"w{topic}_{int(rng.integers(4))}"
            title = f"w{topic}_{doc} w{topic}_{(doc + 1) % 4}"
            records.append(lmm.ClickRecord(term, f"d{topic}{doc}", title, int(rng.integers(1, 4))))
    records.append(lmm.ClickRecord("download alpha apk", "d00", "w0_0 w0_1", 1))
    records.append(lmm.ClickRecord("download beta apk", "d00", "w0_0 w0_1", 1))
    return records


def test_corpus_and_covariance():
    records = toy_records()
    vocab = lmm.build_vocabulary(records)
    assert vocab.lookup("alpha") is not None
    cov = lmm.build_cross_covariance(records, vocab)
    assert cov.shape == (len(vocab), len(vocab))
    dense = cov.to_dense()
    # Dense recomputation from the weighted query/title vectors.
    idf = lmm.compute_idf(records, vocab)
    oracle = np.zeros_like(dense)
    total = 0.0
    for r in records:
        x = np.zeros(len(vocab))
        y = np.zeros(len(vocab))
        for i, w in lmm.vectorize_query(r.query, vocab):
            x[i] = w
        for i, w in lmm.vectorize_document(r.doc_title, vocab, idf):
            y[i] = w
        oracle += r.clicks * np.outer(x, y)
        total += r.clicks
    np.testing.assert_allclose(dense, oracle / total, atol=1e-12)


def test_mining_and_knowledge():
    records = toy_records()
    pairs = lmm.mine_synonyms(records)
    found = {(p.term1, p.term2): p.support for p in pairs}
    assert found[("alpha", "beta")] == 1
    assert lmm.extract_context(["download", "2048", "apk"], 1) == "download * apk"
    assert math.isclose(lmm.logistic_weight(1.0), 1 / (1 + math.exp(-1)))
    vocab = lmm.build_vocabulary(records)
    r = lmm.build_knowledge_matrix([("alpha", "beta", 1.0)], vocab)
    dense = r.to_dense()
    np.testing.assert_array_equal(dense, dense.T)
    assert dense[vocab.lookup("alpha"), vocab.lookup("beta")] == 0.5
    with pytest.raises(ValueError):
        lmm.build_knowledge_matrix([], vocab)


def test_scalar_objective_and_sweep():
    cov = lmm.CrossCovariance.from_dense(np.array([[1.0]]))
    cfg = lmm.TrainConfig()
    cfg.dim = 1
    cfg.theta2 = cfg.lambda2 = cfg.rho2 = 1.0
    one = np.ones((1, 1))
    assert lmm.objective(one, one, cov, cfg) == pytest.approx(0.5)
    cfg.sweep = lmm.SweepOrder.JACOBI
    lx, ly = lmm.cd_sweep(one, one, cov, cfg)
    assert lx[0, 0] == pytest.approx(0.5) and ly[0, 0] == pytest.approx(0.5)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    c = rng.uniform(0, 1, (5, 4))
    cov = lmm.CrossCovariance.from_dense(c)
    cfg = lmm.TrainConfig()
    cfg.dim = 3
    lx = rng.uniform(-1, 1, (3, 5))
    ly = rng.uniform(-1, 1, (3, 4))
    gx, _ = lmm.gradient(lx, ly, cov, cfg)
    h = 1e-6
    for idx in [(0, 0), (2, 4), (1, 3)]:
        up, down = lx.copy(), lx.copy()
        up[idx] += h
        down[idx] -= h
        fd = (lmm.objective(up, ly, cov, cfg) - lmm.objective(down, ly, cov, cfg)) / (2 * h)
        assert gx[idx] == pytest.approx(fd, rel=1e-5, abs=1e-8)


def test_train_rank_and_evaluate(tmp_path):
    records = toy_records()
    vocab = lmm.build_vocabulary(records)
    cov = lmm.build_cross_covariance(records, vocab)
    cfg = lmm.TrainConfig()
    cfg.dim = 4
    lx, ly, report = lmm.train(cov, cfg)
    assert report["converged"]
    assert report["objective_trace"][-1] <= report["objective_trace"][0]
    lx2, _, _ = lmm.train(cov, cfg)
    np.testing.assert_array_equal(lx, lx2)

    model = lmm.Model(lx, ly, vocab)
    docs = [(r.doc_id, r.doc_title) for r in records]
    ranked = lmm.rank(model, "w0_0", docs, k=3)
    assert len(ranked) == 3
    assert all(a[1] >= b[1] for a, b in zip(ranked, ranked[1:]))

    path = str(tmp_path / "m.lmm")
    lmm.write_model(path, lx, ly, "m.vocab")
    back_lx, back_ly, vocab_path = lmm.read_model(path)
    np.testing.assert_array_equal(back_lx, lx)
    assert vocab_path == "m.vocab"

    assert lmm.ndcg_at_k([3, 0], 2) == 1.0
    assert lmm.ndcg_at_k([0, 3], 2) == pytest.approx(0.6309, abs=1e-4)
    head, tail = lmm.split_head_tail(["a", "b", "c"], {"a": 3, "b": 2, "c": 1})
    assert head == ["a", "b"] and tail == ["c"]


def test_cli_entry_point(tmp_path):
    log = tmp_path / "clicks.tsv"
    log.write_text("".join(f"{r.query}\t{r.doc_id}\t{r.doc_title}\t{r.clicks}\n"
                           for r in toy_records()))
    code, _, err = lmm.run_cli(["train", "--clicks", str(log), "--dim", "3",
                                "--out", str(tmp_path / "m.lmm"), "--quiet"])
    assert code == 0, err
    assert (tmp_path / "m.lmm.trace.csv").exists()
    code, _, _ = lmm.run_cli(["nonsense"])
    assert code == 1


def test_errors_map_to_python_exceptions(tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("q\td\tt\tmany\n")
    with pytest.raises(lmm.DataError, match="bad.tsv:1"):
        lmm.read_click_log(str(bad))
    cfg = lmm.TrainConfig()
    cfg.dim = 0
    with pytest.raises(ValueError):
        cfg.validate()
