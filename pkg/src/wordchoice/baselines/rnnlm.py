"""Unidirectional LSTM language-model baselines.

A left-to-right model predicts each word from its prefix; a right-to-left
model reads the sentence from ``<stop>`` backwards and predicts each word
from its suffix.  Both reuse the shared kernel (same cell, same masking,
same SGD contract as the bidirectional model) and rank candidates by the
single next-token distribution at the marked position.
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from .. import kernel as K
from ..checkpoint import CheckpointError, expect_shape, read_blwc, write_blwc
from ..corpus import Batch, EncodedSentence, FILL_ID, RESERVED, Vocabulary
from ..kernel import tape as T
from ..model import Hyperparams, TargetPositionError, TrainingDivergedError
from ..suggestions import Suggestion, top_k_from_probs

logger = logging.getLogger(__name__)

Array = np.ndarray

LEFT_TO_RIGHT = "ltr"
RIGHT_TO_LEFT = "rtl"


class RnnLm:
    """One-directional LSTM LM over the shared vocabulary."""

    def __init__(
        self,
        direction: str,
        vocab: Vocabulary,
        hyper: Hyperparams,
        emb: Array,
        lstm: K.LstmParams,
        out: K.LinearParams,
        name: str = "rnnlm",
    ):
        if direction not in (LEFT_TO_RIGHT, RIGHT_TO_LEFT):
            raise ValueError(f"unknown direction {direction!r}")
        self.direction = direction
        self.vocab = vocab
        self.hyper = hyper
        self.emb = emb
        self.lstm = lstm
        self.out = out
        self.name = name
        if out.W.shape != (len(vocab), hyper.hidden) or emb.shape != (len(vocab), hyper.embed_dim):
            raise ValueError("RNNLM tensor shapes do not match vocabulary/hyperparameters")
        ps = K.ParamSet()
        self._v_emb = ps.add("emb", emb)
        self._v_lstm = ps.add_lstm("lstm", lstm)
        self._v_out_w, self._v_out_b = ps.add_linear("out", out)
        self.params = ps

    @classmethod
    def init(cls, direction: str, vocab: Vocabulary, hyper: Hyperparams, name: str = "rnnlm") -> "RnnLm":
        rng = np.random.default_rng(hyper.seed)
        v = len(vocab)
        emb = K.init_matrix(rng, v, hyper.embed_dim)
        lstm = K.init_lstm(rng, hyper.hidden, hyper.embed_dim)
        out = K.LinearParams.zeros(v, hyper.hidden)
        return cls(direction, vocab, hyper, emb, lstm, out, name)

    # -- training -------------------------------------------------------------

    def _batch_graph(self, batch: Batch) -> tuple[T.Tape, T.Var, int]:
        """Next-token objective over real-word targets.

        For each masked position t, the state used is the one produced
        just before the direction reaches t: step t-1 of the forward pass
        or step real_len - t of the reversed pass.
        """
        tape = T.Tape()
        cg = self.hyper.coupled_gates
        rows_t, pos_t = np.nonzero(batch.mask)
        if len(rows_t) == 0:
            return tape, T.Var(np.asarray(0.0)), 0
        max_rl = int(batch.real_lens.max())
        if self.direction == LEFT_TO_RIGHT:
            cols = batch.ids[:, :max_rl]
            step_idx = pos_t - 1
        else:
            cols = K.reverse_for_suffix_pass(batch.ids, batch.real_lens, FILL_ID)
            step_idx = batch.real_lens[rows_t] - pos_t
        states = K.lstm_pass(tape, self._v_lstm, self._v_emb, cols, cg)
        picked = T.pick_steps(tape, states, step_idx, rows_t)
        z = T.add_bias(tape, T.matmul_t(tape, picked, self._v_out_w), self._v_out_b)
        losses = T.softmax_xent(tape, z, batch.ids[rows_t, pos_t])
        return tape, T.total(tape, losses), len(rows_t)

    def sentence_loss(self, sent: EncodedSentence) -> float:
        from ..corpus import pack_batch

        if sent.real_len == 0:
            return 0.0
        _, loss, _ = self._batch_graph(pack_batch([sent]))
        return float(loss.value)

    def sentence_loss_gradients(self, sent: EncodedSentence) -> K.GradientSet:
        from ..corpus import pack_batch

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
        """Same contract as the bidirectional trainer: per-batch mean loss
        over masked targets, global-norm clipping, deterministic."""
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
                tape.backward(T.scale(tape, loss_sum, 1.0 / n))
                K.sgd_update(arrays, self.params.grads(), lr, clip)
                total_loss += loss_val
                total_targets += n
            log.append(total_loss / total_targets if total_targets else 0.0)
            logger.info("rnnlm %s epoch %d: mean loss %.6f",
                        self.direction, epoch + 1, log[-1])
        return log

    # -- inference ------------------------------------------------------------

    def next_token_distribution(self, sent: EncodedSentence, i: int) -> Array:
        """Distribution over the word at position i given the prefix
        (left-to-right) or the suffix (right-to-left)."""
        if not 1 <= i <= sent.real_len:
            raise TargetPositionError(
                f"position {i} is not a real-word position (real_len={sent.real_len})")
        cg = self.hyper.coupled_gates
        if self.direction == LEFT_TO_RIGHT:
            inputs = self.emb[sent.ids[0:i]]
        else:
            inputs = self.emb[sent.ids[sent.real_len + 1:i:-1]]
        h = K.run_lstm(self.lstm, inputs, cg).h
        return K.softmax(K.linear(self.out, h))

    def rank(self, sent: EncodedSentence, i: int, k: int) -> list[Suggestion]:
        return top_k_from_probs(self.next_token_distribution(sent, i), self.vocab, k)

    # -- persistence ------------------------------------------------------------

    def save(self, path: str) -> None:
        header = {
            "kind": "rnnlm",
            "direction": self.direction,
            "name": self.name,
            "hyper": self.hyper.to_dict(),
            "vocab": self.vocab.word_of[len(RESERVED):],
        }
        write_blwc(path, header, self.params.arrays())

    @classmethod
    def load(cls, path: str) -> "RnnLm":
        header, tensors = read_blwc(path)
        if header.get("kind") != "rnnlm":
            raise CheckpointError(f"checkpoint kind {header.get('kind')!r} is not 'rnnlm'")
        hyper = Hyperparams.from_dict(header["hyper"])
        vocab = Vocabulary(header["vocab"])
        v, e, h = len(vocab), hyper.embed_dim, hyper.hidden
        emb = expect_shape(tensors, "emb", v, e)
        lstm = K.LstmParams.zeros(h, e)
        for name, t in lstm.tensors():
            want_cols = e if name.startswith("W_") else h if name[0] in "UY" else 1
            got = expect_shape(tensors, f"lstm.{name}", h, want_cols)
            setattr(lstm, name, got if t.ndim == 2 else got.reshape(h))
        out = K.LinearParams(
            expect_shape(tensors, "out.W", v, h),
            expect_shape(tensors, "out.b", v, 1).reshape(v),
        )
        return cls(header["direction"], vocab, hyper, emb, lstm, out,
                   name=header.get("name", "rnnlm"))


def rnnlm_train(
    batches: Sequence[Batch],
    vocab: Vocabulary,
    hyper: Hyperparams,
    direction: str,
) -> tuple[RnnLm, list[float]]:
    """Convenience: initialize from the seed and train."""
    model = RnnLm.init(direction, vocab, hyper)
    log = model.train(batches)
    return model, log


def rnnlm_rank(model: RnnLm, sent: EncodedSentence, i: int, k: int) -> list[Suggestion]:
    return model.rank(sent, i, k)
