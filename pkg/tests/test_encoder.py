import numpy as np
import pytest

from helpers import demo_gazetteer, magazine_table
from sketchsql import kernel as K
from sketchsql.encoder import (BiLstm, EmbeddingError, EmbeddingStore,
                               column_inputs, column_name_vector, embed_question,
                               encode_columns, encode_question, load_embedding_file,
                               load_embeddings)
from sketchsql.tagger import TAG_NONE, TaggedQuestion, TypeTag, recognize


def tiny_store(dim=4, tokens=("spoofed", "title", "artist", "issue", "mort", "drucker")):
    rng = np.random.default_rng(99)
    return EmbeddingStore({t: rng.normal(size=dim) for t in tokens}, dim)


def write_emb(path, entries):
    path.write_text("\n".join(f"{t} " + " ".join(str(v) for v in vec)
                              for t, vec in entries) + "\n", encoding="utf-8")


class TestEmbeddingFiles:
    def test_single_file(self, tmp_path):
        p = tmp_path / "a.txt"
        write_emb(p, [("cat", [1.0] * 50), ("dog", [2.0] * 50)])
        emb = load_embeddings([p])
        assert emb.dim == 50
        np.testing.assert_array_equal(emb.word_vec("cat"), 1.0)

    def test_two_files_concatenate(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        write_emb(a, [("cat", [1.0] * 50)])
        write_emb(b, [("cat", [2.0] * 25)])
        emb = load_embeddings([a, b])
        assert emb.dim == 75
        np.testing.assert_array_equal(emb.word_vec("cat")[:50], 1.0)
        np.testing.assert_array_equal(emb.word_vec("cat")[50:], 2.0)

    def test_token_in_one_file_zero_padded(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        write_emb(a, [("cat", [1.0] * 50), ("dog", [3.0] * 50)])
        write_emb(b, [("cat", [2.0] * 25)])
        emb = load_embeddings([a, b])
        np.testing.assert_array_equal(emb.word_vec("dog")[50:], 0.0)

    def test_dimension_mismatch_reports_line(self, tmp_path):
        p = tmp_path / "a.txt"
        p.write_text("cat 1.0 2.0\ndog 1.0 2.0 3.0\n", encoding="utf-8")
        with pytest.raises(EmbeddingError, match=":2"):
            load_embedding_file(p)

    def test_unknown_word_is_zero_vector(self):
        emb = tiny_store()
        np.testing.assert_array_equal(emb.word_vec("zzz"), 0.0)
        assert emb.word_vec("zzz").shape == (4,)


class TestEmbedQuestion:
    def make_type_table(self, store, d_t):
        return store.add("emb.type", 11, d_t)

    def test_known_word_none_tag(self):
        emb = tiny_store()
        store = K.ParamStore(seed=0)
        table = self.make_type_table(store, 3)
        tq = TaggedQuestion(tokens=["artist"], tags=[TAG_NONE], char_spans=[(0, 6)])
        out = embed_question(tq, emb, table, ["artist"])
        assert out.shape == (1, 7)
        np.testing.assert_array_equal(out.data[0, :4], emb.word_vec("artist"))
        np.testing.assert_array_equal(out.data[0, 4:], table.data[0])

    def test_unknown_word_zero_prefix(self):
        emb = tiny_store()
        store = K.ParamStore(seed=0)
        table = self.make_type_table(store, 3)
        tq = TaggedQuestion(tokens=["zzz"], tags=[TypeTag("integer")], char_spans=[(0, 3)])
        out = embed_question(tq, emb, table, ["artist"])
        np.testing.assert_array_equal(out.data[0, :4], 0.0)
        assert np.abs(out.data[0, 4:]).sum() > 0

    def test_column_value_uses_mean_column_name_vector(self):
        emb = tiny_store()
        store = K.ParamStore(seed=0)
        table = self.make_type_table(store, 4)  # content mode: type width == word width
        tq = TaggedQuestion(tokens=["mort"], tags=[TypeTag("column_value", column=0)],
                            char_spans=[(0, 4)])
        out = embed_question(tq, emb, table, ["artist"])
        np.testing.assert_allclose(out.data[0, 4:], emb.word_vec("artist"), atol=1e-12)

    def test_content_mode_width_mismatch_rejected(self):
        emb = tiny_store()
        store = K.ParamStore(seed=0)
        table = self.make_type_table(store, 3)
        tq = TaggedQuestion(tokens=["mort"], tags=[TypeTag("column_value", column=0)],
                            char_spans=[(0, 4)])
        with pytest.raises(EmbeddingError, match="type width"):
            embed_question(tq, emb, table, ["artist"])

    def test_gradient_reaches_type_table(self):
        emb = tiny_store()
        store = K.ParamStore(seed=0)
        table = self.make_type_table(store, 3)
        tq = TaggedQuestion(tokens=["artist", "zzz"], tags=[TAG_NONE, TypeTag("float")],
                            char_spans=[(0, 1), (1, 2)])
        out = embed_question(tq, emb, table, ["artist"])
        K.backward(K.sum_all(out))
        assert table.grad is not None
        assert np.abs(table.grad[0]).sum() > 0   # none tag row
        assert np.abs(table.grad[3]).sum() > 0   # float tag row


class TestColumnEncoding:
    def test_column_vector_is_mean_of_words(self):
        emb = tiny_store()
        want = (emb.word_vec("spoofed") + emb.word_vec("title")) / 2
        np.testing.assert_allclose(column_name_vector("spoofed title", emb), want, atol=1e-12)

    def test_all_oov_name_gives_zero(self):
        emb = tiny_store()
        np.testing.assert_array_equal(column_name_vector("quux corge", emb), 0.0)

    def test_single_column_shape(self):
        emb = tiny_store()
        store = K.ParamStore(seed=1)
        weights = BiLstm(store, "col", emb.dim, 5)
        out = encode_columns(column_inputs(["artist"], emb), weights)
        assert out.shape == (1, 10)

    def test_empty_schema_errors(self):
        with pytest.raises(ValueError, match="empty schema"):
            column_inputs([], tiny_store())

    def test_column_order_sensitivity(self):
        emb = tiny_store()
        store = K.ParamStore(seed=2)
        weights = BiLstm(store, "col", emb.dim, 6)
        a = encode_columns(column_inputs(["spoofed title", "artist", "issue"], emb), weights)
        b = encode_columns(column_inputs(["issue", "artist", "spoofed title"], emb), weights)
        # the LSTM is order-sensitive: rows move beyond a pure permutation
        assert not np.allclose(a.data[1], b.data[1])


class TestEncodeQuestion:
    def test_zero_weights_zero_output(self):
        emb = tiny_store()
        store = K.ParamStore(seed=3)
        weights = BiLstm(store, "qt", 7, 4)
        for t in (weights.fw, weights.bw):
            t.Wx.data[:] = 0
            t.Wh.data[:] = 0
            t.b.data[:] = 0
        x = K.constant(np.random.default_rng(0).normal(size=(3, 7)))
        out = encode_question(x, weights)
        np.testing.assert_array_equal(out.data, 0.0)

    def test_worked_example_row_count(self):
        table = magazine_table()
        tq = recognize("the spoofed title with mort drucker as the artist for issue 88.5?",
                       table.header, table=table, mode="content", gazetteer=demo_gazetteer())
        emb = tiny_store()
        store = K.ParamStore(seed=4)
        type_table = store.add("emb.type", 11, emb.dim)
        q_input = embed_question(tq, emb, type_table, table.header)
        weights = BiLstm(store, "qt", emb.dim * 2, 8)
        out = encode_question(q_input, weights)
        assert out.shape == (13, 16)

    def test_deterministic(self):
        emb = tiny_store()
        store = K.ParamStore(seed=5)
        weights = BiLstm(store, "qt", emb.dim, 4)
        x = np.random.default_rng(1).normal(size=(4, emb.dim))
        one = encode_question(K.constant(x), weights).data
        two = encode_question(K.constant(x), weights).data
        np.testing.assert_array_equal(one, two)
