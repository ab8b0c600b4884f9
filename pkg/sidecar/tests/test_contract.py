"""Cross-package contract checks.

The sidecar and the curation pipeline share no code, only file formats.
These tests exercise that boundary end to end: everything the sidecar
writes must load through the consumer's parsers with zero errors, and
shared geometry (text masks) must agree numerically. The consumer
package is a test-only dependency; nothing under src/ touches it.
"""

import json
import re
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

trforge = pytest.importorskip("trforge", reason="contract checks need the consumer package")

from trforge import ingest, textlayout  # noqa: E402
from trforge.textlayout import LayoutParams  # noqa: E402

from extract_sidecar import ExtractJob, read_matrix, run_job, write_matrix  # noqa: E402
from extract_sidecar.imaging import box_iou  # noqa: E402
from extract_sidecar.trfg import ids_path  # noqa: E402

from conftest import save_rgb, write_jsonl  # noqa: E402


def read_jsonl(path):
    return [json.loads(l) for l in path.read_text().splitlines() if l.strip()]


class TestEmbeddingContract:
    def test_sidecar_file_reads_in_consumer(self, tmp_path):
        rng = np.random.default_rng(11)
        rows = rng.standard_normal((13, 24)).astype(np.float32)
        ids = [f"img{i:02d}" for i in range(13)]
        path = tmp_path / "m.trfg"
        write_matrix(path, ids, rows)
        loaded = ingest.read_embeddings(path)
        assert loaded.ids == ids
        np.testing.assert_array_equal(loaded.data, rows)

    def test_byte_identity_with_consumer_writer(self, tmp_path):
        rng = np.random.default_rng(12)
        rows = rng.standard_normal((7, 16)).astype(np.float32)
        ids = [f"r{i}" for i in range(7)]
        ours = tmp_path / "ours.trfg"
        theirs = tmp_path / "theirs.trfg"
        write_matrix(ours, ids, rows)
        ingest.write_embeddings(ingest.EmbeddingMatrix(ids=ids, data=rows), theirs)
        assert ours.read_bytes() == theirs.read_bytes()
        assert ids_path(ours).read_bytes() == ingest.ids_path(theirs).read_bytes()

    def test_consumer_file_reads_in_sidecar(self, tmp_path):
        rows = np.arange(12, dtype=np.float32).reshape(3, 4)
        path = tmp_path / "m.trfg"
        ingest.write_embeddings(ingest.EmbeddingMatrix(ids=["a", "b", "c"], data=rows), path)
        got_ids, got = read_matrix(path)
        assert got_ids == ["a", "b", "c"]
        np.testing.assert_array_equal(got, rows)

    def test_job_output_ids_bijective_with_manifest_minus_skips(self, corpus, tmp_path):
        man = corpus / "mix.jsonl"
        write_jsonl(
            man,
            [
                {"image_id": "block", "path": "block.png"},
                {"image_id": "bad", "path": "broken.png"},
                {"image_id": "ramp", "path": "ramp.png"},
                {"image_id": "noise", "path": "noise.png"},
            ],
        )
        out = tmp_path / "e.trfg"
        report = run_job(ExtractJob(kind="embed_images", manifest=man, out=out, dim=32))
        loaded = ingest.read_embeddings(out)
        manifest_ids = ["block", "bad", "ramp", "noise"]
        assert loaded.ids == [i for i in manifest_ids if i not in report["skipped"]]
        assert report["skipped"] == ["bad"]
        assert loaded.data.shape == (3, 32)

    def test_empty_job_output_parses(self, tmp_path):
        man = tmp_path / "m.jsonl"
        man.write_text("")
        out = tmp_path / "e.trfg"
        run_job(ExtractJob(kind="embed_images", manifest=man, out=out, dim=512))
        loaded = ingest.read_embeddings(out)
        assert loaded.ids == []
        assert loaded.dim == 512

    def test_text_embeddings_parse_too(self, tmp_path):
        man = tmp_path / "t.jsonl"
        write_jsonl(man, [{"text_id": "p0", "text": "a photo of an invoice"}])
        out = tmp_path / "t.trfg"
        run_job(ExtractJob(kind="embed_texts", manifest=man, out=out, dim=64))
        loaded = ingest.read_embeddings(out)
        assert loaded.ids == ["p0"]
        # unit rows survive the trip within float32 tolerance
        assert np.linalg.norm(loaded.data[0]) == pytest.approx(1.0, abs=1e-5)


class TestOcrContract:
    @pytest.mark.parametrize("engine", ["paddle", "easy"])
    def test_every_output_parses_with_zero_errors(
        self, corpus, image_manifest, rendered_text, tmp_path, engine
    ):
        text_png, _ = rendered_text
        man = tmp_path / "m.jsonl"
        write_jsonl(
            man,
            [
                {"image_id": "block", "path": str(corpus / "block.png")},
                {"image_id": "ramp", "path": str(corpus / "ramp.png")},
                {"image_id": "noise", "path": str(corpus / "noise.png")},
                {"image_id": "word", "path": str(text_png)},
                {"image_id": "bad", "path": str(corpus / "broken.png")},
            ],
        )
        out = tmp_path / "ocr"
        run_job(ExtractJob(kind="run_ocr", manifest=man, out=out, engine=engine))
        files = sorted(out.glob("*.json"))
        assert len(files) == 5
        for f in files:
            doc = ingest.parse_ocr(f, engine)
            assert doc.image_id == f.stem
            assert doc.warnings == 0
            for w in doc.words:
                assert w.engine == engine
                assert 0.0 <= w.confidence <= 1.0

    def test_rendered_word_survives_consumer_parse_with_iou(self, rendered_text, tmp_path):
        text_png, bbox = rendered_text
        man = tmp_path / "m.jsonl"
        write_jsonl(man, [{"image_id": "word", "path": str(text_png)}])
        out = tmp_path / "ocr"
        run_job(ExtractJob(kind="run_ocr", manifest=man, out=out))
        doc = ingest.parse_ocr(out / "word.json", "paddle")
        assert doc.words
        best = max(box_iou(ingest.quad_bbox(w.quad), bbox) for w in doc.words)
        assert best > 0.5

    def test_layout_merge_consumes_detector_output(self, rendered_text, tmp_path):
        text_png, _ = rendered_text
        man = tmp_path / "m.jsonl"
        write_jsonl(man, [{"image_id": "word", "path": str(text_png)}])
        out = tmp_path / "ocr"
        run_job(ExtractJob(kind="run_ocr", manifest=man, out=out))
        doc = ingest.parse_ocr(out / "word.json", "paddle")
        paragraphs = textlayout.merge_words(doc.words, LayoutParams())
        assert paragraphs
        assert textlayout.concat_paragraphs(paragraphs).strip()

    def test_crash_tagged_file_still_parses(self, corpus, tmp_path):
        man = tmp_path / "m.jsonl"
        write_jsonl(man, [{"image_id": "bad", "path": str(corpus / "broken.png")}])
        out = tmp_path / "ocr"
        run_job(ExtractJob(kind="run_ocr", manifest=man, out=out))
        doc = ingest.parse_ocr(out / "bad.json", "paddle")
        assert doc.words == []
        assert doc.warnings == 0


class TestCaptionContract:
    QUADS = [
        [[8.3, 10.2], [39.6, 10.2], [39.6, 21.8], [8.3, 21.8]],
        [[44.2, 28.7], [58.9, 31.4], [57.1, 40.3], [42.4, 37.6]],
        [[5.1, 33.3], [20.8, 33.3], [20.8, 42.9], [5.1, 42.9]],
    ]

    def poster(self, tmp_path):
        img = np.full((48, 64, 3), 235, np.uint8)
        img[11:21, 9:39] = 15
        img[34:42, 6:20] = 15
        save_rgb(tmp_path / "poster.png", img)
        return tmp_path / "poster.png"

    @pytest.mark.parametrize("dilation", [0, 2, 5])
    def test_coverage_matches_consumer_mask_fraction(self, tmp_path, dilation):
        path = self.poster(tmp_path)
        man = tmp_path / "cap.jsonl"
        write_jsonl(man, [{"image_id": "p", "path": path.name, "quads": self.QUADS}])
        out = tmp_path / "c.jsonl"
        run_job(
            ExtractJob(kind="caption_masked", manifest=man, out=out, dilation_px=dilation)
        )
        row = read_jsonl(out)[0]
        reference = textlayout.render_text_mask(64, 48, self.QUADS, dilation).mean()
        assert row["coverage"] == pytest.approx(float(reference), abs=1e-6)

    def test_caption_rows_have_exact_schema(self, tmp_path):
        path = self.poster(tmp_path)
        man = tmp_path / "cap.jsonl"
        write_jsonl(man, [{"image_id": "p", "path": path.name, "quads": self.QUADS}])
        out = tmp_path / "c.jsonl"
        run_job(ExtractJob(kind="caption_masked", manifest=man, out=out))
        row = read_jsonl(out)[0]
        assert set(row) == {"image_id", "caption", "coverage", "model", "flags"}
        assert isinstance(row["caption"], str) and row["caption"]
        assert isinstance(row["coverage"], float)
        assert isinstance(row["model"], str) and row["model"]
        assert isinstance(row["flags"], list)


class TestDatasetHandoff:
    def render_poster(self, path, lines):
        from PIL import Image, ImageDraw, ImageFont

        img = Image.new("RGB", (220, 120), "white")
        draw = ImageDraw.Draw(img)
        font = ImageFont.load_default(size=20)
        for i, line in enumerate(lines):
            draw.text((10, 8 + 30 * i), line, font=font, fill=(0, 0, 0))
        img.save(path)

    def test_sidecar_outputs_feed_conversation_builder(self, tmp_path):
        """OCR JSON + captions produced here must drive the consumer's
        instruction-dataset build without a single failed item."""
        images = tmp_path / "images"
        images.mkdir()
        self.render_poster(images / "pa.png", ["SALE TODAY", "HALF PRICE"])
        self.render_poster(images / "pb.png", ["OPEN LATE", "FRESH FOOD"])

        man = tmp_path / "ocr_manifest.jsonl"
        write_jsonl(
            man,
            [
                {"image_id": "pa", "path": str(images / "pa.png")},
                {"image_id": "pb", "path": str(images / "pb.png")},
            ],
        )
        ocr_dir = tmp_path / "ocr"
        run_job(ExtractJob(kind="run_ocr", manifest=man, out=ocr_dir))

        # merged reading-order text through the consumer's own layout code
        texts = {}
        quads = {}
        for image_id in ("pa", "pb"):
            doc = ingest.parse_ocr(ocr_dir / f"{image_id}.json", "paddle")
            assert doc.words
            paragraphs = textlayout.merge_words(doc.words, LayoutParams())
            texts[image_id] = textlayout.concat_paragraphs(paragraphs)
            quads[image_id] = [[list(p) for p in w.quad] for w in doc.words]

        cap_man = tmp_path / "cap_manifest.jsonl"
        write_jsonl(
            cap_man,
            [
                {"image_id": i, "path": str(images / f"{i}.png"), "quads": quads[i]}
                for i in ("pa", "pb")
            ],
        )
        captions_path = tmp_path / "captions.jsonl"
        run_job(ExtractJob(kind="caption_masked", manifest=cap_man, out=captions_path))
        captions = {r["image_id"]: r["caption"] for r in read_jsonl(captions_path)}

        bundles = tmp_path / "bundles.jsonl"
        write_jsonl(
            bundles,
            [
                {
                    "image_id": i,
                    "ocr_a": texts[i],
                    "ocr_b": texts[i].lower(),
                    "caption": captions[i],
                }
                for i in ("pa", "pb")
            ],
        )
        pool = tmp_path / "pool.txt"
        pool.write_text("pa\npb\n")
        transcript = tmp_path / "transcript.jsonl"
        write_jsonl(
            transcript,
            [
                {
                    "id": i,
                    "response": (
                        "Question: What is advertised?\nAnswer: A store promotion.\n"
                        "Question: Is any text visible?\nAnswer: Yes, two short lines.\n"
                    ),
                }
                for i in ("pa", "pb")
            ],
        )

        from trforge.cli import main as consumer_main

        out = tmp_path / "gpt4.jsonl"
        code = consumer_main(
            [
                "build-gpt4",
                "--pool", str(pool),
                "--bundles", str(bundles),
                "--out", str(out),
                "--transcript", str(transcript),
            ]
        )
        assert code == 0
        manifest = json.loads((tmp_path / "gpt4.jsonl.manifest.json").read_text())
        assert manifest["counts"]["conversations"] == 2
        assert manifest["counts"]["failed"] == 0
        assert len(out.read_text().splitlines()) == 2


class TestIsolation:
    def test_consumer_import_does_not_load_sidecar(self):
        code = (
            "import trforge, trforge.cli, sys; "
            "bad = [m for m in sys.modules if 'extract_sidecar' in m]; "
            "assert not bad, bad"
        )
        subprocess.run([sys.executable, "-c", code], check=True)

    def test_sidecar_sources_never_name_the_consumer(self):
        src = Path(__file__).resolve().parents[1] / "src" / "extract_sidecar"
        offenders = []
        for py in sorted(src.rglob("*.py")):
            if re.search(r"\btrforge\b", py.read_text(encoding="utf-8")):
                offenders.append(py.name)
        assert offenders == []
