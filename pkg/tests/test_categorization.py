import json

import numpy as np
import pytest

from trforge.categorization import (
    build_label_bank,
    category_histogram,
    classify,
    expand_prompts,
    load_taxonomy,
)
from trforge.errors import ValidationError
from trforge.ingest import EmbeddingMatrix


@pytest.fixture(scope="module")
def taxonomy():
    return load_taxonomy()


def prompt_matrix(taxonomy, dim=16, seed=0):
    """Random unit-ish embeddings keyed by rendered prompt string."""
    prompts = [p for _, _, p in expand_prompts(taxonomy)]
    rng = np.random.default_rng(seed)
    data = rng.normal(size=(len(prompts), dim)).astype(np.float32)
    return EmbeddingMatrix(ids=prompts, data=data)


class TestTaxonomy:
    def test_shape(self, taxonomy):
        assert len(taxonomy.super_classes) == 8
        assert len(taxonomy.words()) == 23
        assert len(taxonomy.templates) == 9
        assert taxonomy.threshold == 0.15
        assert taxonomy.other_name == "Other"

    def test_expand_count_and_order(self, taxonomy):
        expanded = expand_prompts(taxonomy)
        assert len(expanded) == 23 * 9 == 207
        # word-major: first nine rows are the first word through all templates
        first_word = taxonomy.words()[0]
        assert all(w == first_word for w, _, _ in expanded[:9])
        assert expanded[0][2] == taxonomy.templates[0].format(first_word)

    def test_custom_file(self, tmp_path, taxonomy):
        doc = {
            "super_classes": ["A"],
            "label_words": {"A": ["apple"]},
            "templates": ["a photo of a {}."],
            "other_name": "Misc",
            "threshold": 0.3,
        }
        path = tmp_path / "tax.json"
        path.write_text(json.dumps(doc))
        tax = load_taxonomy(path)
        assert tax.words() == ["apple"]
        assert tax.other_name == "Misc"

    def test_duplicate_word_rejected(self, tmp_path):
        doc = {
            "super_classes": ["A", "B"],
            "label_words": {"A": ["x"], "B": ["x"]},
            "templates": ["{}"],
            "other_name": "Other",
            "threshold": 0.1,
        }
        path = tmp_path / "tax.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ValidationError):
            load_taxonomy(path)


class TestLabelBank:
    def test_matches_two_pass_oracle(self, taxonomy):
        prompts = prompt_matrix(taxonomy, seed=4)
        bank = build_label_bank(taxonomy, prompts)
        assert bank.matrix.shape == (23, 16)

        # independent two-pass computation
        lookup = dict(zip(prompts.ids, prompts.data.astype(np.float64)))
        for wi, word in enumerate(taxonomy.words()):
            acc = np.zeros(16)
            for tmpl in taxonomy.templates:
                v = lookup[tmpl.format(word)]
                acc += v / np.linalg.norm(v)
            acc /= len(taxonomy.templates)
            expected = acc / np.linalg.norm(acc)
            np.testing.assert_allclose(bank.matrix[wi], expected, atol=1e-6)

    def test_bank_rows_unit_norm(self, taxonomy):
        bank = build_label_bank(taxonomy, prompt_matrix(taxonomy))
        np.testing.assert_allclose(np.linalg.norm(bank.matrix, axis=1), 1.0, atol=1e-12)

    def test_missing_pair_named(self, taxonomy):
        prompts = prompt_matrix(taxonomy)
        short = EmbeddingMatrix(ids=prompts.ids[:-1], data=prompts.data[:-1])
        last_word = taxonomy.words()[-1]
        with pytest.raises(ValidationError) as exc:
            build_label_bank(taxonomy, short)
        assert last_word in str(exc.value)

    def test_zero_prompt_embedding_rejected(self, taxonomy):
        prompts = prompt_matrix(taxonomy)
        data = prompts.data.copy()
        data[0] = 0.0
        with pytest.raises(ValidationError, match="zero"):
            build_label_bank(taxonomy, EmbeddingMatrix(ids=prompts.ids, data=data))


def unit_rows(rows):
    rows = np.asarray(rows, dtype=np.float64)
    return (rows / np.linalg.norm(rows, axis=1, keepdims=True)).astype(np.float32)


class TestClassify:
    def toy_bank(self, taxonomy):
        """Bank where each word's row is a distinct one-hot direction."""
        bank = build_label_bank(taxonomy, prompt_matrix(taxonomy, dim=32, seed=1))
        eye = np.zeros((len(bank.words), 32))
        for i in range(len(bank.words)):
            eye[i, i] = 1.0
        bank.matrix = eye
        return bank

    def test_floor_is_strict(self, taxonomy):
        bank = self.toy_bank(taxonomy)
        word0 = bank.words[0]
        v_low = np.zeros(32)
        v_low[0] = 0.15  # exactly at the floor: kept (strictly-below goes to Other)
        v_low[31] = np.sqrt(1 - 0.15**2)
        v_under = np.zeros(32)
        v_under[0] = 0.1499
        v_under[31] = np.sqrt(1 - 0.1499**2)
        m = EmbeddingMatrix(ids=["at", "under"], data=unit_rows([v_low, v_under]))
        out = classify(bank, m)
        assert out[0][1] == bank.word_to_class[word0]
        assert out[0][2] == word0
        assert out[1][1] == "Other"
        assert out[1][2] is None

    def test_tie_breaks_by_taxonomy_order(self, taxonomy):
        bank = self.toy_bank(taxonomy)
        v = np.zeros(32)
        v[2] = v[5] = 1.0  # equal score for words 2 and 5
        m = EmbeddingMatrix(ids=["tie"], data=unit_rows([v]))
        [(_, _, word, _)] = classify(bank, m)
        assert word == bank.words[2]

    def test_requires_unit_rows(self, taxonomy):
        bank = self.toy_bank(taxonomy)
        data = np.zeros((1, 32), dtype=np.float32)
        data[0, 0] = 2.0
        with pytest.raises(ValidationError, match="unit-norm"):
            classify(bank, EmbeddingMatrix(ids=["big"], data=data))

    def test_histogram_permutation_invariant(self, taxonomy, rng):
        bank = build_label_bank(taxonomy, prompt_matrix(taxonomy, dim=16, seed=2))
        data = unit_rows(rng.normal(size=(40, 16)))
        ids = [f"i{k}" for k in range(40)]
        fwd = classify(bank, EmbeddingMatrix(ids=ids, data=data))
        rev = classify(bank, EmbeddingMatrix(ids=ids[::-1], data=data[::-1].copy()))
        assert category_histogram(fwd) == category_histogram(rev)

    def test_renormalizing_bank_keeps_argmax(self, taxonomy, rng):
        bank = build_label_bank(taxonomy, prompt_matrix(taxonomy, dim=16, seed=3))
        data = unit_rows(rng.normal(size=(25, 16)))
        m = EmbeddingMatrix(ids=[f"i{k}" for k in range(25)], data=data)
        before = [w for _, _, w, _ in classify(bank, m)]
        bank.matrix = bank.matrix / np.linalg.norm(bank.matrix, axis=1, keepdims=True)
        after = [w for _, _, w, _ in classify(bank, m)]
        assert before == after
