"""Command-line pipelines: segment, eval, gen-pairs, stats.

Every command is deterministic given its inputs and ``--seed``, and every
run writes a manifest (resolved options + SHA-256 of each input) next to
its output so artifacts can be re-derived. Exit codes: 0 success, 1
runtime/data error, 2 usage error.

Scorer specs: ``lexical``, ``embedding:<vector-file>``,
``external:<url>``, and (for ``eval``) ``random``. The environment
variable ``DIALSEG_SCORER_TOKEN`` provides the bearer token for external
endpoints.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import __version__
from .corpus import AnnotatedDialogue, Corpus, parse_canonical_jsonl, parse_raw_dialog_corpus
from .errors import DialsegError
from .metrics import evaluate_corpus, report_json
from .pairgen import (
    GenConfig,
    generate_triplets,
    generation_manifest,
    split_triplets,
    write_triplets_jsonl,
)
from .scorers import EmbeddingScorer, ExternalScorer, LexicalScorer, load_embedding_table, score_dialogue
from .segmenter import DepthProfile, Segmentation, depth_profile, random_segment, segment

AUTH_TOKEN_ENV = "DIALSEG_SCORER_TOKEN"


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_path: Path, command: str, options: dict, inputs: list[Path]) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "options": options,
        "inputs": {str(p): _sha256_file(p) for p in inputs},
    }
    path = Path(str(out_path) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = Path(str(path) + ".tmp")
    try:
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _build_scorer(spec: str):
    kind, _, arg = spec.partition(":")
    if kind == "lexical" and not arg:
        return LexicalScorer()
    if kind == "embedding":
        if not arg:
            raise click.UsageError("embedding scorer needs a vector file: embedding:<path>")
        with open(arg, "r", encoding="utf-8") as f:
            return EmbeddingScorer(load_embedding_table(f))
    if kind == "external":
        if not arg:
            raise click.UsageError("external scorer needs a URL: external:<url>")
        return ExternalScorer(arg, auth_token=os.environ.get(AUTH_TOKEN_ENV))
    raise click.UsageError(
        f"unknown scorer {spec!r} (expected lexical | embedding:<file> | external:<url>)"
    )


def _load_annotated(path: Path) -> list[AnnotatedDialogue]:
    with open(path, "r", encoding="utf-8") as f:
        return parse_canonical_jsonl(f)


def _segment_records(items: list[AnnotatedDialogue], scorer, workers: int) -> list[dict]:
    """Per-dialogue segmentation reports, in dialogue-id order."""
    ordered = sorted(items, key=lambda a: a.dialogue.id)

    def run(item: AnnotatedDialogue) -> dict:
        profile = score_dialogue(scorer, item.dialogue)
        dp = depth_profile(profile)
        seg = segment(profile)
        return {
            "id": item.dialogue.id,
            "coherence": list(profile.scores),
            "depth": list(dp.depths),
            "tau": dp.threshold,
            "boundaries": sorted(seg.boundaries),
        }

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, ordered))
    return [run(item) for item in ordered]


def _records_to_jsonl(records: list[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


@click.group()
@click.version_option(__version__)
def main():
    """Dialogue topic segmentation toolkit."""


@main.command("segment")
@click.option("--input", "input_path", type=click.Path(exists=True, path_type=Path), required=True,
              help="Canonical dialogue JSONL.")
@click.option("--scorer", "scorer_spec", default="lexical", show_default=True)
@click.option("--output", "output_path", type=click.Path(path_type=Path), required=True)
@click.option("--workers", default=1, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", default=None, type=int, help="Recorded in the manifest; scoring itself is deterministic.")
def cmd_segment(input_path: Path, scorer_spec: str, output_path: Path, workers: int, seed: int | None):
    """Score and segment every dialogue, writing per-dialogue reports."""
    try:
        scorer = _build_scorer(scorer_spec)
        items = _load_annotated(input_path)
        records = _segment_records(items, scorer, workers)
        _atomic_write_text(output_path, _records_to_jsonl(records))
        _write_manifest(
            output_path,
            "segment",
            {"scorer": scorer_spec, "workers": workers, "seed": seed},
            [input_path],
        )
        n_boundaries = sum(len(r["boundaries"]) for r in records)
        click.echo(json.dumps({"dialogues": len(records), "boundaries": n_boundaries}, sort_keys=True))
    except DialsegError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


def _read_hypotheses(path: Path) -> list[Segmentation]:
    """Read any JSONL whose records carry "id" and "boundaries"."""
    out = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            obj = json.loads(line)
            out.append(Segmentation(dialogue_id=obj["id"], boundaries=frozenset(obj["boundaries"])))
    return out


@main.command("eval")
@click.option("--ref", "ref_path", type=click.Path(exists=True, path_type=Path), required=True,
              help="Canonical JSONL with gold boundaries.")
@click.option("--hyp", "hyp_path", type=click.Path(exists=True, path_type=Path), default=None,
              help="Stored hypotheses (JSONL with id + boundaries).")
@click.option("--scorer", "scorer_spec", default=None,
              help="Segment on the fly instead of --hyp; also accepts 'random'.")
@click.option("--window-size", "k_win", default=None, type=click.IntRange(min=1),
              help="Metric window override (default: half the mean reference segment).")
@click.option("--workers", default=1, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", default=None, type=int)
@click.option("--output", "output_path", type=click.Path(path_type=Path), default=None)
def cmd_eval(ref_path, hyp_path, scorer_spec, k_win, workers, seed, output_path):
    """Evaluate hypotheses against references with Pk, WindowDiff, and F1."""
    if (hyp_path is None) == (scorer_spec is None):
        raise click.UsageError("give exactly one of --hyp or --scorer")
    try:
        refs = sorted(_load_annotated(ref_path), key=lambda a: a.dialogue.id)
        if hyp_path is not None:
            hyps = _read_hypotheses(hyp_path)
        elif scorer_spec == "random":
            if seed is None:
                raise click.UsageError("--scorer random requires --seed")
            ss = np.random.SeedSequence((seed, 3))
            hyps = [
                random_segment(len(item.dialogue), np.random.Generator(np.random.PCG64(child)),
                               dialogue_id=item.dialogue.id)
                for item, child in zip(refs, ss.spawn(len(refs)))
            ]
        else:
            scorer = _build_scorer(scorer_spec)
            records = _segment_records(refs, scorer, workers)
            hyps = [Segmentation(dialogue_id=r["id"], boundaries=frozenset(r["boundaries"])) for r in records]
        report = evaluate_corpus(refs, hyps, k_win=k_win)
        text = report_json(report)
        if output_path is not None:
            _atomic_write_text(output_path, text + "\n")
            _write_manifest(
                output_path,
                "eval",
                {"scorer": scorer_spec, "hyp": str(hyp_path) if hyp_path else None,
                 "window_size": k_win, "seed": seed, "workers": workers},
                [p for p in (ref_path, hyp_path) if p is not None],
            )
        click.echo(text)
    except DialsegError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


@main.command("gen-pairs")
@click.option("--input", "input_path", type=click.Path(exists=True, path_type=Path), default=None,
              help="Canonical dialogue JSONL.")
@click.option("--text", "text_path", type=click.Path(exists=True, path_type=Path), default=None,
              help="Raw __eou__-delimited corpus (one dialogue per line).")
@click.option("--acts", "acts_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--topics", "topics_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--no-flows", is_flag=True, help="Disable act-flow filtering and the act constraint.")
@click.option("--no-topics", is_flag=True, help="Disable the cross-dialogue topic constraint.")
@click.option("--split-unit", type=click.Choice(["instance", "dialogue"]), default="instance",
              show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--out-dir", "out_dir", type=click.Path(path_type=Path), required=True)
def cmd_gen_pairs(input_path, text_path, acts_path, topics_path, no_flows, no_topics,
                  split_unit, seed, out_dir):
    """Generate the coherence-ranking triplet corpus and split it 80/10/10."""
    if (input_path is None) == (text_path is None):
        raise click.UsageError("give exactly one of --input or --text")
    try:
        inputs = []
        if input_path is not None:
            items = _load_annotated(input_path)
            corpus = Corpus(dialogues=tuple(a.dialogue for a in items), name=input_path.stem)
            inputs.append(input_path)
        else:
            streams = [open(text_path, "r", encoding="utf-8")]
            inputs.append(text_path)
            act_stream = topic_stream = None
            if acts_path is not None:
                act_stream = open(acts_path, "r", encoding="utf-8")
                streams.append(act_stream)
                inputs.append(acts_path)
            if topics_path is not None:
                topic_stream = open(topics_path, "r", encoding="utf-8")
                streams.append(topic_stream)
                inputs.append(topics_path)
            try:
                corpus = parse_raw_dialog_corpus(
                    streams[0], act_stream, topic_stream, name=text_path.stem
                )
            finally:
                for s in streams:
                    s.close()

        config = GenConfig(
            seed=seed,
            use_act_flows=not no_flows,
            use_topic_constraint=not no_topics,
            split_unit=split_unit,
        )
        triplets = generate_triplets(corpus, config)
        folds = split_triplets(triplets, config)

        out_dir.mkdir(parents=True, exist_ok=True)
        import io

        for fold_name, fold in zip(("train", "val", "test"), folds):
            buf = io.StringIO()
            write_triplets_jsonl(fold, buf)
            _atomic_write_text(out_dir / f"{fold_name}.jsonl", buf.getvalue())
        manifest = generation_manifest(corpus, config, triplets)
        manifest["folds"] = {name: len(fold) for name, fold in zip(("train", "val", "test"), folds)}
        manifest["inputs"] = {str(p): _sha256_file(p) for p in inputs}
        _atomic_write_text(out_dir / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        click.echo(json.dumps({"instances": len(triplets), "skipped": triplets.skipped}, sort_keys=True))
    except DialsegError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


@main.command("stats")
@click.argument("reports", nargs=-1, required=True, type=click.Path(exists=True, path_type=Path))
def cmd_stats(reports):
    """Average depth-score variance of one or more segment reports."""
    from .metrics import depth_variance

    try:
        rows = []
        for path in reports:
            profiles = []
            with open(path, "r", encoding="utf-8") as f:
                for line in f:
                    if not line.strip():
                        continue
                    depths = json.loads(line)["depth"]
                    arr = np.asarray(depths, dtype=np.float64)
                    mean = float(arr.mean())
                    std = float(arr.std())
                    profiles.append(DepthProfile(tuple(float(d) for d in arr), mean, std, mean - std / 2))
            if not profiles:
                raise DialsegError(f"{path}: no segment records")
            rows.append((str(path), depth_variance(profiles), len(profiles)))
        width = max(len(r[0]) for r in rows)
        for name, var, n in rows:
            click.echo(f"{name.ljust(width)}  depth_variance={var:.6f}  dialogues={n}")
        click.echo(json.dumps({name: var for name, var, _ in rows}, sort_keys=True))
    except DialsegError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
