"""Command-line interface.

Pipeline commands (corpus, kg, model, semisup, concept, eval, synth) work
on files directly; service commands (ingest, classify, leads, concepts,
clusters) are thin HTTP clients against a running `api serve` instance.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

DEFAULT_BASE_URL = "http://127.0.0.1:8099"


@click.group()
def main():
    """Faceted company segmentation toolkit."""


# --------------------------------------------------------------------------
# corpus
# --------------------------------------------------------------------------


@main.group()
def corpus():
    """Build site documents from raw pages."""


@corpus.command("build")
@click.option("--pages", "pages_path", required=True, type=click.Path(exists=True))
@click.option("--labels", "labels_path", type=click.Path(exists=True))
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--lmax", default=128, show_default=True)
@click.option("--min-token-freq", default=10, show_default=True)
@click.option("--min-page-tokens", default=20, show_default=True)
@click.option("--keywords", default=None, help="Comma-separated URL keywords.")
def corpus_build(pages_path, labels_path, embeddings_path, out_path, lmax, min_token_freq, min_page_tokens, keywords):
    from .corpus import CorpusConfig, DEFAULT_URL_KEYWORDS, build_sites, read_corpus_jsonl, read_labels_jsonl, save_sites
    from .embed import load_embeddings

    config = CorpusConfig(
        url_keywords=tuple(keywords.split(",")) if keywords else DEFAULT_URL_KEYWORDS,
        l_max=lmax,
        min_token_freq=min_token_freq,
        min_page_tokens=min_page_tokens,
    )
    pages = read_corpus_jsonl(pages_path)
    label_records = read_labels_jsonl(labels_path) if labels_path else []
    table = load_embeddings(embeddings_path)
    sites, vocab, report = build_sites(pages, label_records, table.vocab(), config)
    save_sites(out_path, sites, vocab)
    click.echo(
        f"built {report.sites_kept} sites ({report.pages_kept}/{report.pages_in} pages kept, "
        f"vocabulary {len(vocab)} tokens) -> {out_path}"
    )


# --------------------------------------------------------------------------
# kg
# --------------------------------------------------------------------------


@main.group()
def kg():
    """Knowledge-graph maintenance."""


@kg.command("replay")
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--snapshot", "snapshot_path", required=True, type=click.Path())
def kg_replay(log_path, snapshot_path):
    from .kg import replay

    graph, report = replay(log_path)
    graph.export_snapshot(snapshot_path)
    click.echo(json.dumps(report.to_dict()))
    click.echo(f"snapshot sha256 {graph.snapshot_hash()} -> {snapshot_path}")


# --------------------------------------------------------------------------
# model
# --------------------------------------------------------------------------


@main.group()
def model():
    """Per-facet classifier training and inference."""


def _model_config(widths, n_filters, lr, batch_size, epochs, seed, arch):
    from .model import ModelConfig

    return ModelConfig(
        widths=tuple(int(w) for w in widths.split(",")),
        n_filters=n_filters,
        learning_rate=lr,
        batch_size=batch_size,
        epochs=epochs,
        seed=seed,
        arch=arch,
    )


@model.command("train")
@click.option("--sites", "sites_path", required=True, type=click.Path(exists=True))
@click.option("--facet", required=True, type=click.Choice(["industry", "role"]))
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--seed", default=7, show_default=True)
@click.option("--epochs", default=30, show_default=True)
@click.option("--lr", default=1.5, show_default=True)
@click.option("--batch-size", default=16, show_default=True)
@click.option("--widths", default="2,3", show_default=True)
@click.option("--filters", "n_filters", default=8, show_default=True)
@click.option("--arch", default="cnn", type=click.Choice(["cnn", "linear"]), show_default=True)
def model_train(sites_path, facet, embeddings_path, out_path, seed, epochs, lr, batch_size, widths, n_filters, arch):
    from .corpus import load_sites
    from .embed import load_embeddings
    from .model import facet_spec_from_sites, save_model, train

    sites, vocab = load_sites(sites_path)
    table = load_embeddings(embeddings_path)
    spec = facet_spec_from_sites(sites, facet)
    config = _model_config(widths, n_filters, lr, batch_size, epochs, seed, arch)
    params = train(sorted(sites, key=lambda s: s.domain), spec, config, table, vocab=vocab)
    save_model(params, out_path)
    click.echo(f"trained {arch} on {facet}: final loss {params.loss_history[-1]:.4f} -> {out_path}")


@model.command("predict")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--sites", "sites_path", required=True, type=click.Path(exists=True))
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def model_predict(model_path, sites_path, embeddings_path, out_path):
    from .corpus import load_sites
    from .embed import load_embeddings
    from .model import load_model, predict_site

    params = load_model(model_path)
    sites, _ = load_sites(sites_path)
    table = load_embeddings(embeddings_path)
    with open(out_path, "w", encoding="utf-8") as fh:
        for site in sorted(sites, key=lambda s: s.domain):
            pred = predict_site(site, params, table)
            fh.write(
                json.dumps({"domain": site.domain, "probs": pred.probs_by_label(params.facet)}, sort_keys=True)
                + "\n"
            )
    click.echo(f"wrote predictions for {len(sites)} sites -> {out_path}")


# --------------------------------------------------------------------------
# semisup
# --------------------------------------------------------------------------


@main.group()
def semisup():
    """Iterative pseudo-labeling."""


@semisup.command("run")
@click.option("--internal", "internal_path", required=True, type=click.Path(exists=True))
@click.option("--external", "external_path", required=True, type=click.Path(exists=True))
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path(exists=True))
@click.option("--facet", required=True, type=click.Choice(["industry", "role"]))
@click.option("--rounds", default=3, show_default=True)
@click.option("--tau", default=0.8, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--split-seed", default=17, show_default=True)
@click.option("--out", "out_path", type=click.Path(), help="Final model file.")
@click.option("--report", "report_path", required=True, type=click.Path())
def semisup_run(internal_path, external_path, embeddings_path, facet, rounds, tau, seed, split_seed, out_path, report_path):
    from .corpus import load_sites
    from .embed import load_embeddings
    from .evaluation import split_by_domain
    from .model import ModelConfig, facet_spec_from_sites, save_model
    from .semisup import run_rounds

    internal, vocab = load_sites(internal_path)
    external, _ = load_sites(external_path)
    table = load_embeddings(embeddings_path)
    spec = facet_spec_from_sites(internal, facet)
    split = split_by_domain(sorted(s.domain for s in internal), split_seed)
    params, state = run_rounds(
        internal, external, spec, split, rounds=rounds, tau=tau,
        config=ModelConfig(seed=seed), table=table,
    )
    params.vocab = vocab
    if out_path:
        save_model(params, out_path)
    report = {
        "facet": facet,
        "rounds": rounds,
        "tau": tau,
        "internal_train": sorted(state.internal_train_ids),
        "pseudo_labeled": {d: sorted(labels) for d, (labels, _) in state.pseudo_labeled.items()},
        "history": [r.to_dict() for r in state.history],
    }
    Path(report_path).write_text(json.dumps(report, indent=2, sort_keys=True), encoding="utf-8")
    f1s = [round(r.micro_f1, 4) for r in state.history]
    click.echo(f"rounds {rounds}, admitted {len(state.pseudo_labeled)}, held-out micro-F1 per round: {f1s}")


# --------------------------------------------------------------------------
# concept
# --------------------------------------------------------------------------


@main.group()
def concept():
    """Concept embeddings, graph, and label clusters."""


@concept.command("build")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--text-vectors", "vectors_path", type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--rank", default=10, show_default=True)
@click.option("--iters", default=500, show_default=True)
@click.option("--k", default=16, show_default=True)
@click.option("--ridge", default=1e-6, show_default=True)
@click.option("--min-support", default=3, show_default=True)
@click.option("--seed", default=0, show_default=True)
def concept_build(graph_path, vectors_path, out_path, rank, iters, k, ridge, min_support, seed):
    from .concept import ConceptConfig, build_concept_embedding, load_link_graph, save_embedding_file
    from .embed import load_embeddings

    graph = load_link_graph(graph_path)
    text_vectors = None
    if vectors_path:
        table = load_embeddings(vectors_path)
        text_vectors = {t: table.vectors[i] for t, i in table.index.items()}
    config = ConceptConfig(rank=rank, iters=iters, k=k, ridge=ridge, min_support=min_support, seed=seed)
    emb, used = build_concept_embedding(graph, text_vectors, config)
    save_embedding_file(emb, out_path)
    click.echo(f"fused {len(used)} views over {graph.W} entities into k={emb.k} -> {out_path}")


@concept.command("graph")
@click.option("--emb", "emb_path", required=True, type=click.Path(exists=True))
@click.option("--theta", default=0.6, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def concept_graph_cmd(emb_path, theta, out_path):
    from .concept import cosine_graph, load_embedding_file

    emb = load_embedding_file(emb_path)
    edges = cosine_graph(emb, theta)
    with open(out_path, "w", encoding="utf-8") as fh:
        for e in edges:
            fh.write(json.dumps({"src": e.src, "dst": e.dst, "weight": e.weight}, sort_keys=True) + "\n")
    click.echo(f"{len(edges)} edges at theta={theta} -> {out_path}")


@concept.command("cluster")
@click.option("--emb", "emb_path", required=True, type=click.Path(exists=True))
@click.option("--labels", "labels_csv", required=True, help="Comma-separated label concept ids.")
@click.option("--theta-c", default=0.75, show_default=True)
@click.option("--generation", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def concept_cluster(emb_path, labels_csv, theta_c, generation, out_path):
    import numpy as np

    from .concept import cluster_labels, load_embedding_file

    emb = load_embedding_file(emb_path)
    label_ids = [x for x in labels_csv.split(",") if x]
    missing = [l for l in label_ids if l not in emb.ids]
    if missing:
        raise click.ClickException(f"labels not in embedding: {missing}")
    vectors = np.stack([emb.row(l) for l in label_ids])
    clusters = cluster_labels(label_ids, vectors, theta_c=theta_c, generation=generation)
    payload = {"generation": generation, "theta_c": theta_c, "clusters": [c.to_dict() for c in clusters]}
    Path(out_path).write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    click.echo(f"{len(clusters)} proposed clusters -> {out_path}")


# --------------------------------------------------------------------------
# eval
# --------------------------------------------------------------------------


@main.group(name="eval")
def eval_group():
    """Experiment harnesses."""


def _load_experiment_inputs(internal_path, external_path, embeddings_path, facet):
    from .corpus import load_sites
    from .embed import load_embeddings
    from .model import facet_spec_from_sites

    internal, _ = load_sites(internal_path)
    external, _ = load_sites(external_path)
    table = load_embeddings(embeddings_path)
    spec = facet_spec_from_sites(internal, facet)
    return internal, external, table, spec


@eval_group.command("run-exp1")
@click.option("--internal", "internal_path", required=True, type=click.Path(exists=True))
@click.option("--external", "external_path", required=True, type=click.Path(exists=True))
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path(exists=True))
@click.option("--facet", required=True, type=click.Choice(["industry", "role"]))
@click.option("--split-seed", default=17, show_default=True)
@click.option("--rounds", default=3, show_default=True)
@click.option("--tau", default=0.8, show_default=True)
@click.option("--report", "report_path", required=True, type=click.Path())
def eval_exp1(internal_path, external_path, embeddings_path, facet, split_seed, rounds, tau, report_path):
    from .experiments import ExperimentConfig, run_experiment_1

    internal, external, table, spec = _load_experiment_inputs(
        internal_path, external_path, embeddings_path, facet
    )
    config = ExperimentConfig(split_seed=split_seed, rounds=rounds, tau=tau)
    result = run_experiment_1(internal, external, spec, table, config)
    payload = {"experiment": "external-data-ablation", "facet": facet, **result.to_dict()}
    Path(report_path).write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    click.echo(
        f"micro-F1 without={result.baseline.micro_f1:.4f} with={result.variant.micro_f1:.4f} -> {report_path}"
    )


@eval_group.command("run-exp2")
@click.option("--internal", "internal_path", required=True, type=click.Path(exists=True))
@click.option("--external", "external_path", required=True, type=click.Path(exists=True))
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path(exists=True))
@click.option("--facet", required=True, type=click.Choice(["industry", "role"]))
@click.option("--class", "class_id", required=True)
@click.option("--split-seed", default=17, show_default=True)
@click.option("--report", "report_path", required=True, type=click.Path())
def eval_exp2(internal_path, external_path, embeddings_path, facet, class_id, split_seed, report_path):
    from .experiments import ExperimentConfig, run_experiment_2

    internal, external, table, spec = _load_experiment_inputs(
        internal_path, external_path, embeddings_path, facet
    )
    config = ExperimentConfig(split_seed=split_seed)
    result = run_experiment_2(internal, external, spec, class_id, table, config)
    payload = {
        "experiment": "label-source-swap",
        "facet": facet,
        "class": class_id,
        **result.to_dict(),
    }
    Path(report_path).write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    click.echo(
        f"class {class_id}: internal F1={result.baseline.per_class_f1[class_id]:.4f} "
        f"swapped F1={result.variant.per_class_f1[class_id]:.4f} -> {report_path}"
    )


# --------------------------------------------------------------------------
# synth
# --------------------------------------------------------------------------


@main.group()
def synth():
    """Synthetic corpora for demos and harness runs."""


@synth.command("make")
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--sites", "n_sites", default=200, show_default=True)
@click.option("--seed", default=13, show_default=True)
@click.option("--signal", default=0.6, show_default=True)
@click.option("--prefix", default="s", show_default=True)
@click.option("--wikipedia-labels", is_flag=True, help="Mark labels as wikipedia-sourced.")
@click.option("--sites-out", type=click.Path(), help="Also save a prebuilt site store here.")
def synth_make(out_dir, n_sites, seed, signal, prefix, wikipedia_labels, sites_out):
    from .corpus import save_sites
    from .synth import SynthConfig, make_embedding_table, make_sites, write_corpus_files

    config = SynthConfig(
        n_sites=n_sites,
        seed=seed,
        signal=signal,
        domain_prefix=prefix,
        label_source="wikipedia" if wikipedia_labels else "internal",
    )
    sites = make_sites(config)
    table = make_embedding_table(config)
    paths = write_corpus_files(sites, table, out_dir)
    if sites_out:
        save_sites(sites_out, sites, None)
    click.echo(f"wrote {n_sites} synthetic sites -> {paths['pages']}, {paths['labels']}, {paths['vectors']}")


# --------------------------------------------------------------------------
# api + thin clients
# --------------------------------------------------------------------------


@main.group()
def api():
    """HTTP service."""


@api.command("serve")
@click.option("--config", "config_path", required=True, type=click.Path())
def api_serve(config_path):
    """Run the service; exit code 1 on config errors, 2 on runtime errors."""
    import uvicorn

    from .service import AppState, ConfigError, ServiceConfig, create_app

    try:
        config = ServiceConfig.from_file(config_path)
        app = create_app(AppState(config))
    except (ConfigError, OSError, ValueError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    except Exception as exc:  # noqa: BLE001 - surface as exit code 2
        click.echo(f"runtime error: {exc}", err=True)
        sys.exit(2)


def _client(base_url):
    import httpx

    return httpx.Client(base_url=base_url, timeout=60.0)


def _print_response(resp):
    try:
        click.echo(json.dumps(resp.json(), indent=2, sort_keys=True))
    except ValueError:
        click.echo(resp.text)
    if resp.status_code >= 400:
        sys.exit(2)


@main.command("ingest")
@click.option("--pages", "pages_path", required=True, type=click.Path(exists=True))
@click.option("--base-url", default=DEFAULT_BASE_URL, show_default=True)
def ingest_cmd(pages_path, base_url):
    """POST a corpus JSONL file to /ingest."""
    with _client(base_url) as client:
        resp = client.post("/ingest", content=Path(pages_path).read_bytes())
    _print_response(resp)


@main.command("classify")
@click.option("--domain", required=True)
@click.option("--facet", required=True, type=click.Choice(["industry", "role"]))
@click.option("--base-url", default=DEFAULT_BASE_URL, show_default=True)
def classify_cmd(domain, facet, base_url):
    """POST /classify for one domain."""
    with _client(base_url) as client:
        resp = client.post("/classify", json={"domain": domain, "facet": facet})
    _print_response(resp)


@main.group()
def leads():
    """Lead search."""


@leads.command("query")
@click.option("--industries", default="")
@click.option("--roles", default="")
@click.option("--min-prob", default=0.5, show_default=True)
@click.option("--limit", default=50, show_default=True)
@click.option("--base-url", default=DEFAULT_BASE_URL, show_default=True)
def leads_query(industries, roles, min_prob, limit, base_url):
    """GET /leads."""
    with _client(base_url) as client:
        resp = client.get(
            "/leads",
            params={"industries": industries, "roles": roles, "min_prob": min_prob, "limit": limit},
        )
    _print_response(resp)


@main.group()
def concepts():
    """Concept graph queries against the service."""


@concepts.command("graph")
@click.option("--theta", default=0.6, show_default=True)
@click.option("--base-url", default=DEFAULT_BASE_URL, show_default=True)
def concepts_graph_cmd(theta, base_url):
    """GET /concepts/graph."""
    with _client(base_url) as client:
        resp = client.get("/concepts/graph", params={"theta": theta})
    _print_response(resp)


@main.group()
def clusters():
    """Label-cluster validation against the service."""


@clusters.command("list")
@click.option("--base-url", default=DEFAULT_BASE_URL, show_default=True)
def clusters_list(base_url):
    with _client(base_url) as client:
        resp = client.get("/clusters")
    _print_response(resp)


@clusters.command("decide")
@click.option("--cluster-id", required=True)
@click.option("--status", required=True, type=click.Choice(["approved", "rejected", "merged"]))
@click.option("--merge-into", default=None)
@click.option("--actor", default="analyst", show_default=True)
@click.option("--base-url", default=DEFAULT_BASE_URL, show_default=True)
def clusters_decide(cluster_id, status, merge_into, actor, base_url):
    with _client(base_url) as client:
        resp = client.post(
            f"/clusters/{cluster_id}/decision",
            json={"status": status, "merge_into": merge_into, "actor": actor},
        )
    _print_response(resp)


if __name__ == "__main__":
    main()
