"""Bidirectional LSTM word-choice model.

Two independent LSTMs with their own word embeddings read each sentence:
one left to right from ``<start>``, one right to left from ``<stop>``.
The context vector for the word at position i concatenates the
left-to-right hidden state after position i-1 with the right-to-left
hidden state after position i+1, so the two flanking states straddle the
target and neither network ever reads the target token itself.  A linear
layer plus softmax turns that context vector into a distribution over the
vocabulary, trained with cross-entropy against the word actually observed
at the target position.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import kernel as K
from .checkpoint import CheckpointError, expect_shape, read_blwc, write_blwc
from .corpus import Batch, EncodedSentence, FILL_ID, RESERVED, Vocabulary
from .kernel import tape as T
from .suggestions import Suggestion, top_k_from_probs

logger = logging.getLogger(__name__)

Array = np.ndarray


@dataclass(frozen=True)
class Hyperparams:
    """Model and training configuration.

    ``context_dim`` is always twice the hidden size (the two directional
    states are concatenated).
    """

    embed_dim: int = 200
    hidden: int = 200
    context_dim: int = 400
    vocab_cap: int = 30000
    max_len: int = 40
    batch_size: int = 100
    lr: float = 0.1
    clip: float | None = 5.0
    epochs: int = 10
    seed: int = 42
    coupled_gates: bool = False

    def __post_init__(self):
        if self.context_dim != 2 * self.hidden:
            raise ValueError(
                f"context_dim must be 2 * hidden, got {self.context_dim} != 2 * {self.hidden}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparams":
        return cls(**d)


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite during training."""

    def __init__(self, epoch: int, batch_index: int, loss: float):
        super().__init__(
            f"non-finite loss {loss!r} at epoch {epoch}, batch {batch_index}")
        self.epoch = epoch
        self.batch_index = batch_index


class TargetPositionError(IndexError):
    """Requested target position is not a real-word position."""


class BiLstmModel:
    """Parameters and vocabulary of the bidirectional suggestion model."""

    def __init__(
        self,
        vocab: Vocabulary,
        hyper: Hyperparams,
        emb_left: Array,
        emb_right: Array,
        lstm_left: K.LstmParams,
        lstm_right: K.LstmParams,
        out: K.LinearParams,
        name: str = "bilstm",
    ):
        self.vocab = vocab
        self.hyper = hyper
        self.emb_left = emb_left
        self.emb_right = emb_right
        self.lstm_left = lstm_left
        self.lstm_right = lstm_right
        self.out = out
        self.name = name
        self._validate()
        self._build_vars()

    def _validate(self) -> None:
        v, e, h = len(self.vocab), self.hyper.embed_dim, self.hyper.hidden
        if self.emb_left.shape != (v, e) or self.emb_right.shape != (v, e):
            raise ValueError("embedding tables do not match vocabulary/embed_dim")
        if self.emb_left is self.emb_right:
            raise ValueError("directional embeddings must be distinct tensors")
        self.lstm_left.validate()
        self.lstm_right.validate()
        if self.out.W.shape != (v, 2 * h) or self.out.b.shape != (v,):
            raise ValueError("output layer does not match vocab x 2*hidden")

    def _build_vars(self) -> None:
        ps = K.ParamSet()
        self._v_emb_left = ps.add("emb_left", self.emb_left)
        self._v_emb_right = ps.add("emb_right", self.emb_right)
        self._v_left = ps.add_lstm("left", self.lstm_left)
        self._v_right = ps.add_lstm("right", self.lstm_right)
        self._v_out_w, self._v_out_b = ps.add_linear("out", self.out)
        self.params = ps

    @classmethod
    def init(cls, vocab: Vocabulary, hyper: Hyperparams, name: str = "bilstm") -> "BiLstmModel":
        """Fresh model: Glorot-uniform embeddings and LSTM weights from the
        seed, zero biases, zero output layer (so the initial distribution
        is exactly uniform)."""
        rng = np.random.default_rng(hyper.seed)
        v = len(vocab)
        emb_left = K.init_matrix(rng, v, hyper.embed_dim)
        emb_right = K.init_matrix(rng, v, hyper.embed_dim)
        lstm_left = K.init_lstm(rng, hyper.hidden, hyper.embed_dim)
        lstm_right = K.init_lstm(rng, hyper.hidden, hyper.embed_dim)
        out = K.LinearParams.zeros(v, hyper.context_dim)
        return cls(vocab, hyper, emb_left, emb_right, lstm_left, lstm_right, out, name)

    # -- inference ---------------------------------------------------------

    def _check_position(self, sent: EncodedSentence, i: int) -> None:
        if not 1 <= i <= sent.real_len:
            raise TargetPositionError(
                f"position {i} is not a real-word position (real_len={sent.real_len})")

    def context_embed(self, sent: EncodedSentence, i: int) -> Array:
        """Concatenated flanking states for position i (1-based into ids).

        The left network consumes positions 0..i-1, the right network
        consumes the last position down to i+1; the token at i is read by
        neither, so the result is invariant to substituting it.
        """
        self._check_position(sent, i)
        cg = self.hyper.coupled_gates
        left_in = self.emb_left[sent.ids[0:i]]
        right_in = self.emb_right[sent.ids[sent.real_len + 1:i:-1]]
        h_l = K.run_lstm(self.lstm_left, left_in, cg).h
        h_r = K.run_lstm(self.lstm_right, right_in, cg).h
        return np.concatenate([h_l, h_r])

    def predict_distribution(self, sent: EncodedSentence, i: int) -> Array:
        """Probability over the full vocabulary (reserved ids included)."""
        return K.softmax(K.linear(self.out, self.context_embed(sent, i)))

    def suggest(self, sent: EncodedSentence, i: int, k: int) -> list[Suggestion]:
        """Top-k candidate words, probability descending, reserved tokens
        excluded, ties broken by ascending vocabulary id."""
        return top_k_from_probs(self.predict_distribution(sent, i), self.vocab, k)

    # -- training ----------------------------------------------------------

    def _batch_graph(self, batch: Batch) -> tuple[T.Tape, T.Var, int]:
        """Forward graph over one padded batch.

        Returns (tape, sum of per-target losses, number of targets).  Both
        directional passes run only over the widest real extent in the
        batch, so extra fill padding never changes the result.
        """
        tape = T.Tape()
        cg = self.hyper.coupled_gates
        rows_t, pos_t = np.nonzero(batch.mask)
        if len(rows_t) == 0:
            return tape, T.Var(np.asarray(0.0)), 0
        max_rl = int(batch.real_lens.max())

        left_states = K.lstm_pass(tape, self._v_left, self._v_emb_left,
                                  batch.ids[:, :max_rl], cg)
        rev = K.reverse_for_suffix_pass(batch.ids, batch.real_lens, FILL_ID)
        right_states = K.lstm_pass(tape, self._v_right, self._v_emb_right, rev, cg)

        # Position i pairs the left state after i-1 with the right state
        # after i+1 (list index rl - i on the reversed sequence).
        left_pick = T.pick_steps(tape, left_states, pos_t - 1, rows_t)
        right_pick = T.pick_steps(tape, right_states,
                                  batch.real_lens[rows_t] - pos_t, rows_t)
        ctx = T.hstack(tape, left_pick, right_pick)
        z = T.add_bias(tape, T.matmul_t(tape, ctx, self._v_out_w), self._v_out_b)
        losses = T.softmax_xent(tape, z, batch.ids[rows_t, pos_t])
        return tape, T.total(tape, losses), len(rows_t)

    def sentence_loss(self, sent: EncodedSentence) -> float:
        """Sum of cross-entropy losses over every real-word position."""
        from .corpus import pack_batch

        if sent.real_len == 0:
            return 0.0
        _, loss, _ = self._batch_graph(pack_batch([sent]))
        return float(loss.value)

    def sentence_loss_gradients(self, sent: EncodedSentence) -> K.GradientSet:
        """Exact gradient of :meth:`sentence_loss` for every parameter."""
        from .corpus import pack_batch

        self.params.zero_grads()
        tape, loss, n = self._batch_graph(pack_batch([sent]))
        if n:
            tape.backward(loss)
        return self.params.grads()

    def train(
        self,
        batches: Sequence[Batch],
        epochs: int | None = None,
        lr: float | None = None,
        clip: float | None | str = "default",
    ) -> list[float]:
        """SGD over the batch list, reused in order each epoch.

        The batch objective is the mean per-target cross-entropy (sum of
        target losses divided by the number of mask-true positions), so
        padding contributes nothing.  Returns per-epoch mean loss.
        """
        epochs = self.hyper.epochs if epochs is None else epochs
        lr = self.hyper.lr if lr is None else lr
        clip = self.hyper.clip if clip == "default" else clip
        arrays = self.params.arrays()
        log: list[float] = []
        for epoch in range(epochs):
            total_loss = 0.0
            total_targets = 0
            for bi, batch in enumerate(batches):
                self.params.zero_grads()
                tape, loss_sum, n = self._batch_graph(batch)
                if n == 0:
                    continue
                loss_val = float(loss_sum.value)
                if not np.isfinite(loss_val):
                    raise TrainingDivergedError(epoch, bi, loss_val)
                mean_loss = T.scale(tape, loss_sum, 1.0 / n)
                tape.backward(mean_loss)
                K.sgd_update(arrays, self.params.grads(), lr, clip)
                total_loss += loss_val
                total_targets += n
            epoch_mean = total_loss / total_targets if total_targets else 0.0
            log.append(epoch_mean)
            logger.info("epoch %d: mean loss %.6f over %d targets",
                        epoch + 1, epoch_mean, total_targets)
        return log

    # -- persistence ---------------------------------------------------------

    def save(self, path: str) -> None:
        header = {
            "kind": "bilstm",
            "name": self.name,
            "hyper": self.hyper.to_dict(),
            "vocab": self.vocab.word_of[len(RESERVED):],
        }
        write_blwc(path, header, self.params.arrays())

    @classmethod
    def load(cls, path: str) -> "BiLstmModel":
        header, tensors = read_blwc(path)
        if header.get("kind") != "bilstm":
            raise CheckpointError(f"checkpoint kind {header.get('kind')!r} is not 'bilstm'")
        hyper = Hyperparams.from_dict(header["hyper"])
        vocab = Vocabulary(header["vocab"])
        v, e, h = len(vocab), hyper.embed_dim, hyper.hidden
        emb_left = expect_shape(tensors, "emb_left", v, e)
        emb_right = expect_shape(tensors, "emb_right", v, e)

        def load_lstm(prefix: str) -> K.LstmParams:
            p = K.LstmParams.zeros(h, e)
            for name, t in p.tensors():
                want_cols = e if name.startswith("W_") else h if name[0] in "UY" else 1
                got = expect_shape(tensors, f"{prefix}.{name}", h, want_cols)
                setattr(p, name, got if t.ndim == 2 else got.reshape(h))
            return p

        out = K.LinearParams(
            expect_shape(tensors, "out.W", v, 2 * h),
            expect_shape(tensors, "out.b", v, 1).reshape(v),
        )
        return cls(vocab, hyper, emb_left, emb_right,
                   load_lstm("left"), load_lstm("right"), out,
                   name=header.get("name", "bilstm"))


def save_checkpoint(model: BiLstmModel, path: str) -> None:
    model.save(path)


def load_checkpoint(path: str) -> BiLstmModel:
    return BiLstmModel.load(path)
