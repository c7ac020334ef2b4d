import numpy as np
import pytest

from jointnlu.embeddings import (EmbeddingParseError, EmbeddingTable, UNK,
                                 load_contextual_vectors, load_vectors,
                                 random_table)


def write(tmp_path, text, name="vecs.txt"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestLoadVectors:
    def test_word2vec_text(self, tmp_path):
        path = write(tmp_path, "2 3\nthe 0.1 0.2 0.3\ncat 1 2 3\n")
        table = load_vectors(path, format="word2vec-text")
        assert table.dim == 3
        assert len(table.index) == 2
        assert np.allclose(table.lookup("cat"), [1, 2, 3])

    def test_glove_text_infers_dim(self, tmp_path):
        path = write(tmp_path, "the 0.1 0.2 0.3\n")
        table = load_vectors(path, format="glove-text")
        assert table.dim == 3
        assert np.allclose(table.lookup("the"), [0.1, 0.2, 0.3])

    def test_inconsistent_width(self, tmp_path):
        path = write(tmp_path, "a 1 2 3\nb 1 2 3 4\n")
        with pytest.raises(EmbeddingParseError, match="line 2"):
            load_vectors(path, format="glove-text")

    def test_non_numeric_field(self, tmp_path):
        path = write(tmp_path, "a 1 x 3\n")
        with pytest.raises(EmbeddingParseError, match="line 1"):
            load_vectors(path, format="glove-text")

    def test_missing_header(self, tmp_path):
        path = write(tmp_path, "")
        with pytest.raises(EmbeddingParseError):
            load_vectors(path, format="word2vec-text")

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            load_vectors(write(tmp_path, "a 1\n"), format="binary")

    def test_unk_is_mean_of_vectors(self, tmp_path):
        path = write(tmp_path, "a 0 2\nb 2 4\n")
        table = load_vectors(path, format="glove-text")
        assert np.allclose(table.lookup("missing"), [1.0, 3.0])

    def test_loaded_tables_frozen(self, tmp_path):
        table = load_vectors(write(tmp_path, "a 1 2\n"), format="glove-text")
        assert not table.trainable

    def test_save_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(5)
        words = ["alpha", "beta", "gamma"]
        matrix = rng.normal(size=(4, 6))
        table = EmbeddingTable(6, words, matrix)
        out = tmp_path / "saved.txt"
        table.save(str(out))
        again = load_vectors(str(out), format="glove-text")
        for w in words:
            assert np.array_equal(again.lookup(w), table.lookup(w))


class TestLookup:
    @pytest.fixture
    def table(self):
        matrix = np.array([[0.0, 0.0], [1.0, 2.0], [3.0, 4.0]])
        return EmbeddingTable(2, ["a", "b"], matrix)

    def test_known_token(self, table):
        assert np.array_equal(table.lookup("b"), [3.0, 4.0])

    def test_unknown_token(self, table):
        assert np.array_equal(table.lookup("zzz"), [0.0, 0.0])

    def test_two_unknowns_identical(self, table):
        assert np.array_equal(table.lookup("q1"), table.lookup("q2"))

    def test_rows_differentiable_gather(self, table):
        out = table.rows(["a", "zzz", "b"])
        assert out.value.shape == (3, 2)
        assert np.array_equal(out.value[1], [0.0, 0.0])

    def test_duplicate_words_rejected(self):
        with pytest.raises(ValueError):
            EmbeddingTable(1, ["a", "a"], np.zeros((3, 1)))

    def test_bad_matrix_shape_rejected(self):
        with pytest.raises(ValueError):
            EmbeddingTable(2, ["a"], np.zeros((1, 2)))


class TestSentenceMean:
    @pytest.fixture
    def table(self):
        matrix = np.array([[9.0, 9.0], [1.0, 0.0], [0.0, 2.0]])
        return EmbeddingTable(2, ["a", "b"], matrix)

    def test_single_token(self, table):
        assert np.array_equal(table.sentence_mean(["a"]), [1.0, 0.0])

    def test_two_tokens(self, table):
        assert np.allclose(table.sentence_mean(["a", "b"]), [0.5, 1.0])

    def test_hand_oracle_with_unit_basis(self):
        words = ["show", "sunday", "flights", "from", "seattle", "to", "chicago"]
        matrix = np.vstack([np.zeros(7), np.eye(7)])
        table = EmbeddingTable(7, words, matrix)
        mean = table.sentence_mean(words)
        assert np.allclose(mean, np.full(7, 1.0 / 7.0))

    def test_permutation_invariant(self, table):
        a = table.sentence_mean(["a", "b", "zzz"])
        b = table.sentence_mean(["zzz", "a", "b"])
        assert np.allclose(a, b)

    def test_empty_rejected(self, table):
        with pytest.raises(ValueError):
            table.sentence_mean([])


class TestRandomTable:
    def test_deterministic(self):
        a = random_table(["x", "y"], 10, seed=1)
        b = random_table(["x", "y"], 10, seed=1)
        assert np.array_equal(a.matrix.value, b.matrix.value)

    def test_range(self):
        table = random_table([f"w{i}" for i in range(50)], 10, seed=2)
        assert np.all(np.abs(table.matrix.value) <= 0.05)

    def test_statistical_mean(self):
        # mean of N uniform samples on [-a, a]: sigma = a / (sqrt(3) sqrt(N))
        dim = 10
        table = random_table([f"w{i}" for i in range(999)], dim, seed=3)
        samples = table.matrix.value.ravel()
        assert samples.size == 10000
        a = 0.5 / dim
        sigma = a / np.sqrt(3.0 * samples.size)
        assert abs(samples.mean()) < 3 * sigma

    def test_trainable(self):
        assert random_table(["x"], 4, seed=0).trainable

    def test_char_kind(self):
        from jointnlu.embeddings import CharTable
        table = random_table(["a", "b"], 5, seed=0, kind="char")
        assert isinstance(table, CharTable)

    def test_bad_dim(self):
        with pytest.raises(ValueError):
            random_table(["x"], 0, seed=0)


class TestContextualVectors:
    def test_load(self, tmp_path):
        path = write(tmp_path, "s1\t0\t1.0 2.0\ns1\t1\t3.0 4.0\n", name="ctx.tsv")
        table = load_contextual_vectors(path)
        assert np.array_equal(table[("s1", 1)], [3.0, 4.0])

    def test_width_mismatch(self, tmp_path):
        path = write(tmp_path, "s1\t0\t1.0 2.0\ns1\t1\t3.0\n", name="ctx.tsv")
        with pytest.raises(EmbeddingParseError, match="line 2"):
            load_contextual_vectors(path)
