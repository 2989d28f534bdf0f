import json
import math

import numpy as np
import pytest

import perfal

SOURCE = """
class T {
    void m() {
        int x = 1;
        if (x > 0) { x = x + 1; } else { x = 2; }
        for (int i = 0; i < 3; i++) { x = x * 2; }
    }
}
"""


def test_parse_and_metrics():
    g = perfal.parse_java(SOURCE, "T.java")
    assert g.path == "T.java"
    assert g.num_nodes > 10
    counts = g.edge_counts()
    assert counts["IfFlow"] == 1
    assert counts["ElseFlow"] == 1
    assert perfal.graph_from_json(g.to_json()).num_nodes == g.num_nodes
    m = perfal.manual_embed(g)
    assert len(m) == len(perfal.metric_names()) == 12
    assert m[perfal.metric_names().index("num-nodes")] == g.num_nodes
    assert all(math.isfinite(v) for v in m)


def test_parse_error_is_a_perfal_error():
    with pytest.raises(perfal.Error):
        perfal.parse_java("class { void (", "bad.java")


def test_gp_interpolates_and_pearson():
    x = np.linspace(0.0, 5.0, 8).reshape(-1, 1)
    y = np.sin(x).ravel() * 3 + 10
    model = perfal.fit_gp(x, y, tune=False, length_scale=1.0, noise_variance=1e-10)
    mean, var = model.predict(x)
    assert np.max(np.abs(mean - y)) < 1e-4
    assert np.all(var >= 0)
    r, degenerate = perfal.pearson(mean, y)
    assert not degenerate and r > 0.999
    assert perfal.pearson(np.ones(4), np.arange(4.0)) == (0.0, True)
    with pytest.raises(ValueError):
        perfal.pearson(np.ones(3), np.ones(4))


def test_active_loop_on_synthetic_corpus():
    files = perfal.generate_synthetic(40, seed=3)
    assert len(files) == 40
    assert files == perfal.generate_synthetic(40, seed=3)
    graphs = [perfal.parse_java(src, path) for path, src, _ in files]
    labels = [label for _, _, label in files]
    features = np.array([perfal.manual_embed(g) for g in graphs])
    split = perfal.make_splits(len(graphs), 0.2, 10, 1)
    assert len(split.test) == 8 and len(split.labeled) == 10
    run = perfal.run_active(features, labels, split, "variance", batch=5, budget=20, seed=1)
    used = [r["labels_used"] for r in run["records"]]
    assert used == [10, 15, 20]
    assert run["test_reads_during_query"] == 0
    assert run["sets_consistent"]
    r, _ = perfal.run_passive(features, labels, split, seed=1)
    assert r == pytest.approx(run["records"][0]["pearson"])
    with pytest.raises(ValueError):
        perfal.run_active(features, labels, split, "greedy")


def test_graph2vec_rows():
    files = perfal.generate_synthetic(20, seed=1)
    graphs = [perfal.parse_java(src, path) for path, src, _ in files]
    m = perfal.embed(graphs, "graph2vec", dim=8, seed=0)
    assert m.shape == (20, 8)
    assert np.array_equal(m, perfal.embed(graphs, "graph2vec", dim=8, seed=0))


def test_experiment_and_report(tmp_path):
    perfal.write_synthetic(30, 2, str(tmp_path / "corpus"))
    cfg = json.loads(perfal.default_experiment_json())
    cfg.update(
        corpus_dir=str(tmp_path / "corpus"),
        labels_file=str(tmp_path / "corpus" / "labels.csv"),
        output_dir=str(tmp_path / "out"),
        embeddings=[{"name": "manual", "config": {"method": "manual"}}],
        strategies=["random"],
        seeds=[0],
        l0_size=8,
        batch_size=4,
        budget=16,
    )
    result = perfal.run_experiment(json.dumps(cfg), use_cache=False)
    assert result["exit_code"] == 0
    assert (tmp_path / "out" / "aggregates" / "manual__random.csv").exists()
    assert "Final scores" in perfal.report(str(tmp_path / "out"))
    assert "no runs found" in perfal.report(str(tmp_path / "empty"))
    with pytest.raises(perfal.ConfigError):
        perfal.run_experiment(json.dumps({**cfg, "seeds": []}))
