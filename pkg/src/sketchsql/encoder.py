"""Input encoding: word+type embeddings and the two bidirectional encoders.

Word vectors are frozen and loaded from text files (one `token v1 .. vd`
line each); type vectors are trainable rows of a parameter table. A
question encodes through one bi-LSTM over word+type pairs; columns encode
by averaging their name-word vectors and running a second bi-LSTM across
the columns in schema order.
"""

from __future__ import annotations

import numpy as np

from . import kernel as K
from .tagger import BASE_TAGS, COLUMN_VALUE, TaggedQuestion, tokenize

TYPE_INDEX = {kind: i for i, kind in enumerate(BASE_TAGS)}


class EmbeddingError(ValueError):
    pass


class EmbeddingStore:
    """Frozen word vectors; unknown tokens look up as the zero vector."""

    def __init__(self, word_vectors: dict[str, np.ndarray], dim: int):
        self.word_vectors = word_vectors
        self.dim = int(dim)
        self._zero = np.zeros(self.dim)

    def word_vec(self, token: str) -> np.ndarray:
        return self.word_vectors.get(token, self._zero)

    def __contains__(self, token: str) -> bool:
        return token in self.word_vectors

    def __len__(self) -> int:
        return len(self.word_vectors)


def load_embedding_file(path) -> tuple[dict[str, np.ndarray], int]:
    """Parse one embedding text file; all lines must share a dimension."""
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split(" ")
            if len(parts) < 2:
                raise EmbeddingError(f"{path}:{lineno}: expected 'token v1 .. vd'")
            token = parts[0]
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError:
                raise EmbeddingError(f"{path}:{lineno}: non-numeric vector component") from None
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise EmbeddingError(
                    f"{path}:{lineno}: dimension {vec.size} != {dim} from earlier lines")
            vectors[token] = vec
    if dim is None:
        raise EmbeddingError(f"{path}: no embedding entries")
    return vectors, dim


def load_embeddings(paths) -> EmbeddingStore:
    """Load one or two embedding files; two files concatenate per token.

    A token present in only one file is zero-padded on the missing side.
    """
    paths = list(paths)
    if not 1 <= len(paths) <= 2:
        raise EmbeddingError(f"expected 1 or 2 embedding files, got {len(paths)}")
    first, d1 = load_embedding_file(paths[0])
    if len(paths) == 1:
        return EmbeddingStore(first, d1)
    second, d2 = load_embedding_file(paths[1])
    merged: dict[str, np.ndarray] = {}
    for token in set(first) | set(second):
        left = first.get(token, np.zeros(d1))
        right = second.get(token, np.zeros(d2))
        merged[token] = np.concatenate([left, right])
    return EmbeddingStore(merged, d1 + d2)


# ---------------------------------------------------------------------------
# Question and column inputs
# ---------------------------------------------------------------------------

def column_name_vector(name: str, emb: EmbeddingStore) -> np.ndarray:
    """Mean of the column's name-word vectors; all-OOV names give zero."""
    words = tokenize(name)[0]
    if not words:
        return np.zeros(emb.dim)
    return np.mean([emb.word_vec(w) for w in words], axis=0)


def column_inputs(header: list[str], emb: EmbeddingStore) -> K.Tensor:
    """Constant (C, d_w) matrix of averaged column-name vectors."""
    if not header:
        raise ValueError("empty schema")
    return K.constant(np.stack([column_name_vector(name, emb) for name in header]))


def embed_question(tq: TaggedQuestion, emb: EmbeddingStore, type_table: K.Tensor,
                   header: list[str]) -> K.Tensor:
    """(T, d_w + d_t) inputs: frozen word vector ++ type vector per token.

    Regular tags pull trainable rows of `type_table`; content-mode value
    tags use the mean word vector of their column's name instead, so the
    type width must equal the word width in content mode.
    """
    d_type = type_table.shape[1]
    word_part = K.constant(np.stack([emb.word_vec(tok) for tok in tq.tokens]))
    indices = []
    const_part = np.zeros((len(tq.tokens), d_type))
    for t, tag in enumerate(tq.tags):
        if tag.kind == COLUMN_VALUE:
            vec = column_name_vector(header[tag.column], emb)
            if vec.size != d_type:
                raise EmbeddingError(
                    f"content-mode value tags need type width == word width "
                    f"({d_type} != {vec.size})")
            indices.append(-1)
            const_part[t] = vec
        else:
            indices.append(TYPE_INDEX[tag.kind])
    type_part = K.add(K.embed_rows(type_table, indices), K.constant(const_part))
    return K.concat_cols(word_part, type_part)


def encode_question(q_input: K.Tensor, weights: "BiLstm") -> K.Tensor:
    """H_qt: run the question bi-LSTM over the (T, d) input rows."""
    return K.bilstm_encode(q_input, weights.fw, weights.bw)


def encode_columns(col_input: K.Tensor, weights: "BiLstm") -> K.Tensor:
    """H_col: run the column bi-LSTM across the (C, d_w) column vectors."""
    if col_input.shape[0] < 1:
        raise ValueError("empty schema")
    return K.bilstm_encode(col_input, weights.fw, weights.bw)


class BiLstm:
    """Forward+backward LSTM weights registered under a common name prefix."""

    def __init__(self, store: K.ParamStore, prefix: str, d_in: int, hidden: int):
        self.fw = _lstm_weights(store, f"{prefix}.fw", d_in, hidden)
        self.bw = _lstm_weights(store, f"{prefix}.bw", d_in, hidden)
        self.hidden = hidden


def _lstm_weights(store: K.ParamStore, prefix: str, d_in: int, hidden: int) -> K.LstmWeights:
    return K.LstmWeights(
        Wx=store.add(f"{prefix}.Wx", 4 * hidden, d_in),
        Wh=store.add(f"{prefix}.Wh", 4 * hidden, hidden),
        b=store.add(f"{prefix}.b", 1, 4 * hidden, init="zeros"),
    )
