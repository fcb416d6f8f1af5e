import json

import pytest
from click.testing import CliRunner

from facetseg.cli import main
from facetseg.synth import SynthConfig, make_embedding_table, make_sites, write_corpus_files


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    config = SynthConfig(n_sites=30, seed=5, pages_per_site=(1, 2), dim=12)
    sites = make_sites(config)
    table = make_embedding_table(config)
    write_corpus_files(sites, table, root)
    external = make_sites(SynthConfig(n_sites=20, seed=9, domain_prefix="e", dim=12, second_industry_prob=0.0))
    write_corpus_files(external, table, root / "ext")
    return root


def run(args):
    runner = CliRunner()
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result.output


class TestPipeline:
    def test_corpus_build_then_train_then_predict(self, workdir):
        sites_bin = workdir / "sites.bin"
        out = run(
            [
                "corpus", "build",
                "--pages", str(workdir / "pages.jsonl"),
                "--labels", str(workdir / "labels.jsonl"),
                "--embeddings", str(workdir / "vectors.txt"),
                "--out", str(sites_bin),
                "--lmax", "128",
                "--min-token-freq", "10",
                "--min-page-tokens", "20",
            ]
        )
        assert "built" in out
        assert sites_bin.exists()

        model_bin = workdir / "model_industry.bin"
        out = run(
            [
                "model", "train",
                "--sites", str(sites_bin),
                "--facet", "industry",
                "--embeddings", str(workdir / "vectors.txt"),
                "--out", str(model_bin),
                "--seed", "7",
                "--epochs", "10",
            ]
        )
        assert model_bin.exists()

        preds = workdir / "preds.jsonl"
        run(
            [
                "model", "predict",
                "--model", str(model_bin),
                "--sites", str(sites_bin),
                "--embeddings", str(workdir / "vectors.txt"),
                "--out", str(preds),
            ]
        )
        lines = [json.loads(l) for l in preds.read_text().splitlines()]
        assert all(set(l) == {"domain", "probs"} for l in lines)
        assert all(0.0 <= p <= 1.0 for l in lines for p in l["probs"].values())

    def test_model_file_deterministic(self, workdir):
        sites_bin = workdir / "sites.bin"
        a = workdir / "m_a.bin"
        b = workdir / "m_b.bin"
        for out in (a, b):
            run(
                [
                    "model", "train",
                    "--sites", str(sites_bin),
                    "--facet", "role",
                    "--embeddings", str(workdir / "vectors.txt"),
                    "--out", str(out),
                    "--seed", "21",
                    "--epochs", "5",
                ]
            )
        assert a.read_bytes() == b.read_bytes()


class TestKgReplay:
    def test_replay_snapshot(self, workdir, tmp_path):
        from facetseg.kg import EntityNode, UpsertEvent

        log = tmp_path / "events.jsonl"
        events = [
            UpsertEvent(key="a.com", sequence=1, node=EntityNode("a.com", "company", {"v": 1})),
            UpsertEvent(key="b.com", sequence=1, node=EntityNode("b.com", "company", {"v": 2})),
        ]
        log.write_text("\n".join(json.dumps(e.to_dict()) for e in events) + "\n")
        snap1 = tmp_path / "s1.jsonl"
        snap2 = tmp_path / "s2.jsonl"
        out = run(["kg", "replay", "--log", str(log), "--snapshot", str(snap1)])
        assert '"inserted": 2' in out
        run(["kg", "replay", "--log", str(log), "--snapshot", str(snap2)])
        assert snap1.read_bytes() == snap2.read_bytes()


class TestConceptCli:
    @pytest.fixture(scope="class")
    def links(self, workdir):
        path = workdir / "links.jsonl"
        lines = []
        concepts = ["healthcare", "fintech", "gaming", "chips", "sensors"]
        hubs = [f"h{i}" for i in range(8)]
        import numpy as np

        rng = np.random.default_rng(2)
        for c in concepts:
            picks = sorted(rng.choice(hubs, size=4, replace=False))
            lines.append(json.dumps({"entity": c, "inlinks": picks}))
        lines.append(json.dumps({"cooc": {"industry": "healthcare", "product": "sensors", "count": 3}}))
        lines.append(json.dumps({"cooc": {"industry": "fintech", "product": "chips", "count": 2}}))
        path.write_text("\n".join(lines) + "\n")
        return path

    def test_build_graph_cluster(self, workdir, links):
        emb = workdir / "emb.bin"
        out = run(
            ["concept", "build", "--graph", str(links), "--out", str(emb), "--rank", "3", "--k", "4", "--iters", "80"]
        )
        assert "fused" in out
        edges = workdir / "edges.jsonl"
        run(["concept", "graph", "--emb", str(emb), "--theta", "0.0", "--out", str(edges)])
        parsed = [json.loads(l) for l in edges.read_text().splitlines()]
        assert all(set(p) == {"src", "dst", "weight"} for p in parsed)

        clusters = workdir / "clusters.json"
        run(
            [
                "concept", "cluster",
                "--emb", str(emb),
                "--labels", "healthcare,fintech,gaming",
                "--theta-c", "0.75",
                "--out", str(clusters),
            ]
        )
        payload = json.loads(clusters.read_text())
        members = sorted(m for c in payload["clusters"] for m in c["members"])
        assert members == ["fintech", "gaming", "healthcare"]


class TestSemisupAndEval:
    @pytest.fixture(scope="class")
    def stores(self, workdir):
        int_bin = workdir / "sites.bin"
        ext_bin = workdir / "sites_ext.bin"
        run(
            [
                "corpus", "build",
                "--pages", str(workdir / "ext" / "pages.jsonl"),
                "--labels", str(workdir / "ext" / "labels.jsonl"),
                "--embeddings", str(workdir / "vectors.txt"),
                "--out", str(ext_bin),
                "--min-token-freq", "5",
            ]
        )
        return int_bin, ext_bin

    def test_semisup_run(self, workdir, stores):
        int_bin, ext_bin = stores
        report = workdir / "semisup.json"
        out = run(
            [
                "semisup", "run",
                "--internal", str(int_bin),
                "--external", str(ext_bin),
                "--embeddings", str(workdir / "vectors.txt"),
                "--facet", "role",
                "--rounds", "2",
                "--tau", "0.8",
                "--seed", "7",
                "--report", str(report),
            ]
        )
        payload = json.loads(report.read_text())
        assert len(payload["history"]) == 2
        assert payload["rounds"] == 2

    def test_exp1_cli(self, workdir, stores):
        int_bin, ext_bin = stores
        report = workdir / "exp1.json"
        run(
            [
                "eval", "run-exp1",
                "--internal", str(int_bin),
                "--external", str(ext_bin),
                "--embeddings", str(workdir / "vectors.txt"),
                "--facet", "industry",
                "--rounds", "2",
                "--report", str(report),
            ]
        )
        payload = json.loads(report.read_text())
        assert payload["experiment"] == "external-data-ablation"
        for arm in ("baseline", "variant"):
            assert set(payload[arm]) == {"micro_f1", "micro_auc", "per_class_f1", "threshold", "test_domains"}
        assert payload["baseline"]["test_domains"] == payload["variant"]["test_domains"]

    def test_exp2_cli(self, workdir, stores):
        int_bin, ext_bin = stores
        report = workdir / "exp2.json"
        run(
            [
                "eval", "run-exp2",
                "--internal", str(int_bin),
                "--external", str(ext_bin),
                "--embeddings", str(workdir / "vectors.txt"),
                "--facet", "industry",
                "--class", "healthcare",
                "--report", str(report),
            ]
        )
        payload = json.loads(report.read_text())
        assert payload["class"] == "healthcare"
        assert "healthcare" in payload["baseline"]["per_class_f1"]


class TestSynthCli:
    def test_make_writes_files(self, tmp_path):
        out = run(["synth", "make", "--out-dir", str(tmp_path / "c"), "--sites", "5", "--seed", "3"])
        assert (tmp_path / "c" / "pages.jsonl").exists()
        assert (tmp_path / "c" / "labels.jsonl").exists()
        assert (tmp_path / "c" / "vectors.txt").exists()


class TestServiceComposition:
    def test_cli_pipeline_matches_service(self, workdir, tmp_path):
        """ingest -> classify -> leads over HTTP equals the file pipeline."""
        from fastapi.testclient import TestClient

        from facetseg.service import AppState, ServiceConfig, create_app

        sites_bin = workdir / "sites.bin"
        model_bin = workdir / "model_industry.bin"
        preds_path = tmp_path / "preds.jsonl"
        run(
            [
                "model", "predict",
                "--model", str(model_bin),
                "--sites", str(sites_bin),
                "--embeddings", str(workdir / "vectors.txt"),
                "--out", str(preds_path),
            ]
        )
        file_preds = {json.loads(l)["domain"]: json.loads(l)["probs"] for l in preds_path.read_text().splitlines()}

        config_path = tmp_path / "svc.json"
        config_path.write_text(
            json.dumps(
                {
                    "embeddings": str(workdir / "vectors.txt"),
                    "models": {"industry": str(model_bin)},
                }
            )
        )
        api = TestClient(create_app(AppState(ServiceConfig.from_file(config_path))))
        api.post("/ingest", content=json.dumps({"path": str(workdir / "pages.jsonl")}))
        domain = sorted(file_preds)[0]
        got = api.post("/classify", json={"domain": domain, "facet": "industry"}).json()["probs"]
        for label, p in file_preds[domain].items():
            assert got[label] == pytest.approx(p, abs=1e-6)
