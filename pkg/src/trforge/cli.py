"""Command-line interface.

Every stage of the pipeline is a subcommand operating on files, writing
artifacts atomically and dropping a `<artifact>.manifest.json` next to
each one. Exit codes: 0 success, 1 validation/parse failure, 2 I/O or
transport failure, 64 bad usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, categorization, clustering, datasetgen, filtering, ingest, textlayout
from .artifacts import atomic_write_text, read_jsonl, write_jsonl, write_manifest
from .config import RunConfig, load_config
from .errors import (
    FormatError,
    LlmError,
    ParseError,
    UsageError,
    ValidationError,
)
from .evalkit import fontsize, judge, records as eval_records
from .llmclient import ChatClient, ChatRequest, ClientConfig, ReplayClient, load_transcript

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract is 64
        raise UsageError(message)


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _make_client(cfg: RunConfig, transcript: str | None, audit: str | Path | None):
    """Replay from a transcript when given one, else a live client from
    config + environment."""
    if transcript:
        return ReplayClient(load_transcript(transcript), model=cfg.llm.model)
    client_cfg = ClientConfig.from_env(
        cfg.llm.endpoint_env,
        cfg.llm.api_key_env,
        model=cfg.llm.model,
        retry=cfg.llm.retry,
        max_in_flight=cfg.llm.max_in_flight,
        budget_requests=cfg.llm.budget_requests,
        audit_path=audit,
    )
    return ChatClient(client_cfg)


# --- subcommands --------------------------------------------------------------

def cmd_filter(args, cfg: RunConfig) -> int:
    parsed = ingest.parse_metadata(args.metadata)
    kept, summary = filtering.run_filter(
        parsed.records, cfg.thresholds, apply_dedup=not args.no_dedup
    )
    summary["parse_errors"] = len(parsed.errors)
    for lineno, msg in parsed.errors:
        print(f"warning: metadata line {lineno}: {msg}", file=sys.stderr)
    atomic_write_text(args.out_ids, "".join(m.image_id + "\n" for m in kept))
    write_manifest(
        args.out_ids,
        subcommand="filter",
        params={
            "min_p_text": cfg.thresholds.min_p_text,
            "max_p_watermark": cfg.thresholds.max_p_watermark,
            "max_p_unsafe": cfg.thresholds.max_p_unsafe,
            "dedup": not args.no_dedup,
        },
        seeds={},
        inputs=[args.metadata],
        counts=summary,
    )
    if args.summary:
        atomic_write_text(args.summary, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    _print_json(summary)
    return EXIT_OK


def cmd_cluster_fit(args, cfg: RunConfig) -> int:
    m = ingest.read_embeddings(args.embeddings)
    m = ingest.normalize_rows(m)
    sample_n = args.sample_n if args.sample_n is not None else cfg.clustering.sample_n
    if sample_n:
        chosen = clustering.sample_ids(m.ids, min(sample_n, len(m.ids)) if args.clip_sample else sample_n, args.seed)
        index = {i: pos for pos, i in enumerate(m.ids)}
        rows = [index[i] for i in chosen]
        m = ingest.EmbeddingMatrix(ids=chosen, data=m.data[rows])
    k = args.k if args.k is not None else cfg.clustering.k
    model = clustering.kmeans_fit(
        m, k, args.seed, max_iter=cfg.clustering.max_iter, tol=cfg.clustering.tol
    )
    clustering.save_model(model, args.out)
    write_manifest(
        args.out,
        subcommand="cluster-fit",
        params={"k": k, "sample_n": sample_n, "max_iter": cfg.clustering.max_iter,
                "tol": cfg.clustering.tol},
        seeds={"fit": args.seed},
        inputs=[args.embeddings, ingest.ids_path(args.embeddings)],
        counts={"rows_fit": len(m.ids), "iterations_run": model.iterations_run,
                "inertia": model.inertia},
    )
    print(f"fit k={k} on {len(m.ids)} rows: inertia {model.inertia:.6f} "
          f"after {model.iterations_run} iterations")
    return EXIT_OK


def cmd_cluster_assign(args, cfg: RunConfig) -> int:
    model = clustering.load_model(args.model)
    m = ingest.normalize_rows(ingest.read_embeddings(args.embeddings))
    rows = clustering.assign(model, m)
    write_jsonl(
        args.out,
        ({"id": i, "cluster": c, "distance": d} for i, c, d in rows),
    )
    counts: dict = {"assigned": len(rows)}
    write_manifest(
        args.out,
        subcommand="cluster-assign",
        params={"k": model.k},
        seeds={"fit": model.seed},
        inputs=[args.model, args.embeddings, ingest.ids_path(args.embeddings)],
        counts=counts,
    )
    if args.keeplist:
        keeplist = clustering.load_keeplist(args.keeplist)
        selected = clustering.cap_per_cluster(rows, keeplist, args.seed)
        atomic_write_text(args.selected_out, "".join(i + "\n" for i in selected))
        write_manifest(
            args.selected_out,
            subcommand="cluster-assign",
            params={"keep": list(keeplist.keep), "cap_per_cluster": keeplist.cap_per_cluster},
            seeds={"cap": args.seed},
            inputs=[args.model, args.embeddings, ingest.ids_path(args.embeddings), args.keeplist],
            counts={"selected": len(selected)},
        )
        print(f"assigned {len(rows)} rows; selected {len(selected)} after keep/cap")
    else:
        print(f"assigned {len(rows)} rows")
    return EXIT_OK


def cmd_gallery(args, cfg: RunConfig) -> int:
    rows = [
        (r["id"], int(r["cluster"]), float(r.get("distance", 0.0)))
        for r in read_jsonl(args.assignments)
    ]
    index = clustering.export_gallery(
        rows, args.image_dir, args.out_dir, per_cluster=args.per_cluster, seed=args.seed
    )
    write_manifest(
        index,
        subcommand="gallery",
        params={"per_cluster": args.per_cluster},
        seeds={"gallery": args.seed},
        inputs=[args.assignments],
        counts={"clusters": len({c for _, c, _ in rows})},
    )
    print(f"gallery at {index}")
    return EXIT_OK


def cmd_categorize(args, cfg: RunConfig) -> int:
    taxonomy = categorization.load_taxonomy(args.taxonomy or cfg.taxonomy_path)
    prompts = ingest.read_embeddings(args.prompt_embeddings)
    bank = categorization.build_label_bank(taxonomy, prompts)
    images = ingest.normalize_rows(ingest.read_embeddings(args.image_embeddings))
    labels = categorization.classify(bank, images)
    write_jsonl(
        args.out,
        (
            {"image_id": i, "super_class": sc, "word": w, "score": s}
            for i, sc, w, s in labels
        ),
    )
    write_manifest(
        args.out,
        subcommand="categorize",
        params={"threshold": bank.threshold, "words": len(bank.words)},
        seeds={},
        inputs=[args.prompt_embeddings, args.image_embeddings],
        counts={"images": len(labels)},
    )
    _print_json(categorization.category_histogram(labels))
    return EXIT_OK


def cmd_ocr_merge(args, cfg: RunConfig) -> int:
    src = Path(args.ocr)
    files = sorted(src.glob("*.json")) if src.is_dir() else [src]
    if not files:
        raise ValidationError(f"no OCR files under {src}")
    rows = []
    texts = []
    total_words = 0
    for path in files:
        doc = ingest.parse_ocr(path, args.engine)
        paragraphs = textlayout.merge_words(doc.words, cfg.layout)
        total_words += len(doc.words)
        rows.append(
            {
                "image_id": doc.image_id,
                "engine": doc.engine,
                "warnings": doc.warnings,
                "paragraphs": [
                    {
                        "text": p.text,
                        "bbox": list(p.bbox),
                        "line_count": p.line_count,
                        "word_count": p.word_count,
                    }
                    for p in paragraphs
                ],
            }
        )
        texts.append(
            {"image_id": doc.image_id, "text": textlayout.concat_paragraphs(paragraphs)}
        )
    write_jsonl(args.out, rows)
    write_manifest(
        args.out,
        subcommand="ocr-merge",
        params={
            "engine": args.engine,
            "line_overlap_min": cfg.layout.line_overlap_min,
            "word_gap_factor": cfg.layout.word_gap_factor,
            "para_gap_factor": cfg.layout.para_gap_factor,
            "min_confidence": cfg.layout.min_confidence,
        },
        seeds={},
        inputs=files,
        counts={"documents": len(rows), "words": total_words},
    )
    if args.texts_out:
        write_jsonl(args.texts_out, texts)
    print(f"merged {total_words} words across {len(rows)} documents")
    return EXIT_OK


def _extract_text(row: dict) -> str:
    if "text" in row:
        return row["text"]
    if "paragraphs" in row:
        return "\n\n".join(p["text"] for p in row["paragraphs"])
    raise ValidationError(f"row for {row.get('image_id')!r} has neither text nor paragraphs")


def cmd_build_noisy(args, cfg: RunConfig) -> int:
    items = [(r["image_id"], _extract_text(r)) for r in read_jsonl(args.texts)]
    convs, skipped = datasetgen.build_noisy_dataset(items, args.seed)
    n = datasetgen.write_conversations(convs, args.out)
    write_manifest(
        args.out,
        subcommand="build-noisy",
        params={"instructions": len(datasetgen.OCR_INSTRUCTIONS)},
        seeds={"noisy": args.seed},
        inputs=[args.texts],
        counts={"conversations": n, "skipped_empty": skipped},
    )
    print(f"wrote {n} conversations ({skipped} skipped for empty OCR)")
    return EXIT_OK


def cmd_build_gpt4(args, cfg: RunConfig) -> int:
    pool = [
        line.strip()
        for line in Path(args.pool).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    bundles = {r["image_id"]: r for r in read_jsonl(args.bundles)}
    missing = [i for i in pool if i not in bundles]
    if missing:
        raise ValidationError(f"no prompt bundle for pool id {missing[0]!r}")

    client = _make_client(cfg, args.transcript, Path(args.out).with_suffix(".audit.jsonl"))
    requests = []
    for image_id in pool:
        b = bundles[image_id]
        bundle = datasetgen.default_prompt_bundle(
            b.get("ocr_a", ""), b.get("ocr_b", ""), b.get("caption", "")
        )
        requests.append(
            ChatRequest(
                messages=datasetgen.assemble_gpt4_prompt(bundle),
                temperature=cfg.llm.temperatures.train_gen,
                model=cfg.llm.model,
                request_id=image_id,
            )
        )
    results = client.batch_chat(requests)

    convs = []
    salvaged = 0
    failed = 0
    for image_id, result in zip(pool, results):
        if not result.ok:
            failed += 1
            print(f"warning: {image_id}: {result.error}", file=sys.stderr)
            continue
        if args.salvage:
            pairs, err = datasetgen.parse_qa_salvage(result.text)
            if err:
                salvaged += 1
                print(f"warning: {image_id}: salvaged prefix ({err})", file=sys.stderr)
            if not pairs:
                failed += 1
                continue
        else:
            pairs = datasetgen.parse_qa(result.text)  # strict: raises and aborts
        convs.append(datasetgen.qa_to_conversation(image_id, pairs))

    n = datasetgen.write_conversations(convs, args.out)
    write_manifest(
        args.out,
        subcommand="build-gpt4",
        params={
            "temperature": cfg.llm.temperatures.train_gen,
            "model": cfg.llm.model,
            "salvage": bool(args.salvage),
        },
        seeds={},
        inputs=[args.pool, args.bundles] + ([args.transcript] if args.transcript else []),
        counts={"pool": len(pool), "conversations": n, "salvaged": salvaged,
                "failed": failed},
    )
    print(f"wrote {n} conversations ({failed} failed, {salvaged} salvaged)")
    return EXIT_OK


def cmd_gen_read_eval(args, cfg: RunConfig) -> int:
    rows = read_jsonl(args.inputs)
    client = _make_client(cfg, args.transcript, Path(args.out).with_suffix(".audit.jsonl"))
    out_rows = []
    for row in rows:
        questions = judge.gen_read_eval_questions(
            row["image_id"],
            row.get("ocr_text", ""),
            row.get("caption", ""),
            client,
            model=cfg.llm.model,
            temperature=cfg.llm.temperatures.eval_gen,
        )
        for i, q in enumerate(questions):
            out_rows.append({"qid": f"{row['image_id']}:{i}", "image_id": row["image_id"],
                             "question": q})
    write_jsonl(args.out, out_rows)
    write_manifest(
        args.out,
        subcommand="gen-read-eval",
        params={"temperature": cfg.llm.temperatures.eval_gen, "model": cfg.llm.model},
        seeds={},
        inputs=[args.inputs] + ([args.transcript] if args.transcript else []),
        counts={"images": len(rows), "questions": len(out_rows)},
    )
    print(f"wrote {len(out_rows)} questions from {len(rows)} images")
    return EXIT_OK


def cmd_eval_vqa(args, cfg: RunConfig) -> int:
    if args.dataset:
        doc = json.loads(Path(args.native).read_text(encoding="utf-8"))
        recs = eval_records.ADAPTERS[args.dataset](doc)
    else:
        recs = eval_records.read_records(args.records)
    preds = {r["qid"]: r["prediction"] for r in read_jsonl(args.predictions)}
    merged, missing = eval_records.merge_predictions(recs, preds)
    for qid in missing:
        print(f"warning: no prediction for {qid}", file=sys.stderr)
    report = eval_records.compute_report(merged, tau=args.tau)
    report["missing_predictions"] = len(missing)
    atomic_write_text(args.out, json.dumps(report, indent=2, sort_keys=True) + "\n")
    write_manifest(
        args.out,
        subcommand="eval-vqa",
        params={"tau": args.tau, "dataset": args.dataset or "records"},
        seeds={},
        inputs=[args.predictions] + ([args.native] if args.dataset else [args.records]),
        counts={"records": len(merged), "missing_predictions": len(missing)},
    )
    _print_json(report["aggregate"])
    return EXIT_OK


def cmd_eval_judge(args, cfg: RunConfig) -> int:
    rows = read_jsonl(args.inputs)
    prompt = judge.load_judge_prompt(cfg.eval.judge_prompt_path)
    client = _make_client(cfg, args.transcript, Path(args.out).with_suffix(".audit.jsonl"))
    outcomes = []
    for row in rows:
        outcome = judge.judge_relative(
            row["qid"],
            row["question"],
            row.get("context", ""),
            row["answer_candidate"],
            row["answer_reference"],
            client,
            prompt=prompt,
            model=cfg.llm.model,
            temperature=cfg.llm.temperatures.judge,
        )
        outcomes.append(outcome)
    write_jsonl(
        args.out,
        (
            {
                "qid": o.qid,
                "score_candidate": o.score_candidate,
                "score_reference": o.score_reference,
                "relative_pct": o.relative_pct,
                "rationale": o.rationale,
            }
            for o in outcomes
        ),
    )
    mean_rel = sum(o.relative_pct for o in outcomes) / len(outcomes) if outcomes else 0.0
    write_manifest(
        args.out,
        subcommand="eval-judge",
        params={"temperature": cfg.llm.temperatures.judge, "model": cfg.llm.model},
        seeds={},
        inputs=[args.inputs] + ([args.transcript] if args.transcript else []),
        counts={"judged": len(outcomes), "mean_relative_pct": mean_rel},
    )
    print(f"judged {len(outcomes)} answers: mean relative score {mean_rel:.1f}")
    return EXIT_OK


def _load_height_records(path: str) -> list[tuple[eval_records.EvalRecord, float]]:
    out = []
    for row in read_jsonl(path):
        rec = eval_records.record_from_json(row)
        out.append((rec, float(row.get("answer_height_px", 0.0))))
    return out


def cmd_fontsize_plan(args, cfg: RunConfig) -> int:
    pairs = _load_height_records(args.records)
    targets = args.targets or cfg.eval.fontsize_targets
    jobs, skipped = fontsize.fontsize_plan(pairs, targets)
    write_jsonl(
        args.out,
        (
            {
                "qid": j.qid,
                "image_id": j.image_id,
                "target_height_px": j.target_height_px,
                "scale": j.scale,
            }
            for j in jobs
        ),
    )
    write_manifest(
        args.out,
        subcommand="fontsize-plan",
        params={"targets": list(targets)},
        seeds={},
        inputs=[args.records],
        counts={"jobs": len(jobs), "records": len(pairs), "skipped": skipped},
    )
    print(f"planned {len(jobs)} rescale jobs ({skipped} records skipped)")
    return EXIT_OK


def cmd_fontsize_score(args, cfg: RunConfig) -> int:
    pairs = _load_height_records(args.records)
    targets = args.targets or cfg.eval.fontsize_targets
    preds = {
        (r["qid"], int(r["target_height_px"])): r["prediction"]
        for r in read_jsonl(args.predictions)
    }
    bins = fontsize.fontsize_score(preds, pairs, targets)
    doc = [
        {
            "target_height_px": b.target_height_px,
            "n": b.n,
            "accuracy": b.accuracy,
            "missing": b.missing,
        }
        for b in bins
    ]
    atomic_write_text(args.out, json.dumps(doc, indent=2) + "\n")
    write_manifest(
        args.out,
        subcommand="fontsize-score",
        params={"targets": list(targets)},
        seeds={},
        inputs=[args.records, args.predictions],
        counts={"bins": len(bins)},
    )
    _print_json(doc)
    return EXIT_OK


def cmd_stats(args, cfg: RunConfig) -> int:
    stats = datasetgen.dataset_stats(args.conversations)
    if args.out:
        atomic_write_text(args.out, json.dumps(stats, indent=2, sort_keys=True) + "\n")
        write_manifest(
            args.out,
            subcommand="stats",
            params={},
            seeds={},
            inputs=[args.conversations],
            counts={"conversations": stats["conversations"]},
        )
    _print_json(stats)
    return EXIT_OK


def cmd_validate(args, cfg: RunConfig) -> int:
    convs = datasetgen.read_conversations(args.conversations)
    bad = 0
    for i, conv in enumerate(convs):
        problems = datasetgen.validate_conversation(conv)
        for p in problems:
            print(f"conversation {i} ({conv.conversation_id}): {p}", file=sys.stderr)
        bad += bool(problems)
    if bad:
        print(f"{bad} of {len(convs)} conversations invalid", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"ok: {len(convs)} conversations")
    return EXIT_OK


# --- parser -------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="trforge", description=__doc__)
    parser.add_argument("--version", action="version", version=f"trforge {__version__}")
    parser.add_argument("--config", help="TOML or JSON run configuration")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("filter", help="threshold + dedup filter over metadata")
    p.add_argument("--metadata", required=True)
    p.add_argument("--out-ids", required=True)
    p.add_argument("--summary")
    p.add_argument("--no-dedup", action="store_true")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("cluster-fit", help="k-means over sampled embeddings")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--sample-n", type=int, help="0 means fit on every row")
    p.add_argument("--clip-sample", action="store_true",
                   help="shrink sample-n to the corpus size instead of failing")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cluster_fit)

    p = sub.add_parser("cluster-assign", help="assign embeddings to a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--keeplist")
    p.add_argument("--selected-out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_cluster_assign)

    p = sub.add_parser("gallery", help="static HTML pages per cluster")
    p.add_argument("--assignments", required=True)
    p.add_argument("--image-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--per-cluster", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gallery)

    p = sub.add_parser("categorize", help="zero-shot taxonomy labels")
    p.add_argument("--taxonomy")
    p.add_argument("--prompt-embeddings", required=True)
    p.add_argument("--image-embeddings", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_categorize)

    p = sub.add_parser("ocr-merge", help="merge OCR words into paragraphs")
    p.add_argument("--ocr", required=True, help="one OCR json or a directory of them")
    p.add_argument("--engine", required=True, choices=list(ingest.OCR_ENGINES))
    p.add_argument("--out", required=True)
    p.add_argument("--texts-out", help="also write concatenated text per image")
    p.set_defaults(func=cmd_ocr_merge)

    p = sub.add_parser("build-noisy", help="instruction examples from OCR text")
    p.add_argument("--texts", required=True, help="jsonl with image_id + text/paragraphs")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_noisy)

    p = sub.add_parser("build-gpt4", help="QA conversations via a chat model")
    p.add_argument("--pool", required=True, help="image ids, one per line")
    p.add_argument("--bundles", required=True, help="jsonl with ocr_a/ocr_b/caption")
    p.add_argument("--out", required=True)
    p.add_argument("--transcript", help="replay recorded responses instead of calling out")
    p.add_argument("--salvage", action="store_true",
                   help="keep parseable QA prefixes instead of aborting")
    p.set_defaults(func=cmd_build_gpt4)

    p = sub.add_parser("gen-read-eval", help="generate text-reading eval questions")
    p.add_argument("--inputs", required=True, help="jsonl with image_id/ocr_text/caption")
    p.add_argument("--out", required=True)
    p.add_argument("--transcript")
    p.set_defaults(func=cmd_gen_read_eval)

    p = sub.add_parser("eval-vqa", help="score predictions against records")
    p.add_argument("--records", help="records jsonl (unless --dataset)")
    p.add_argument("--dataset", choices=sorted(eval_records.ADAPTERS))
    p.add_argument("--native", help="native dataset json when --dataset is set")
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tau", type=float, default=0.5)
    p.set_defaults(func=cmd_eval_vqa)

    p = sub.add_parser("eval-judge", help="LLM-judged relative scores")
    p.add_argument("--inputs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--transcript")
    p.set_defaults(func=cmd_eval_judge)

    p = sub.add_parser("fontsize-plan", help="plan answer-height rescale jobs")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--targets", type=_parse_targets)
    p.set_defaults(func=cmd_fontsize_plan)

    p = sub.add_parser("fontsize-score", help="accuracy per target text height")
    p.add_argument("--records", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--targets", type=_parse_targets)
    p.set_defaults(func=cmd_fontsize_score)

    p = sub.add_parser("stats", help="conversation dataset statistics")
    p.add_argument("--conversations", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("validate", help="schema-check a conversation file")
    p.add_argument("--conversations", required=True)
    p.set_defaults(func=cmd_validate)

    return parser


def _parse_targets(text: str) -> tuple[int, ...]:
    """Accepts "3..19" (inclusive) or a comma list "3,7,19"."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(t) for t in text.split(",") if t)


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = load_config(args.config)
    if args.command == "eval-vqa":
        if args.dataset is None and args.records is None:
            raise UsageError("eval-vqa needs --records or --dataset/--native")
        if args.dataset is not None and args.native is None:
            raise UsageError("--dataset needs --native")
    return args.func(args, cfg)


def main(argv=None) -> int:
    try:
        return run(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, FormatError, ParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except LlmError as e:
        print(f"transport error: {e}", file=sys.stderr)
        return EXIT_IO
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
