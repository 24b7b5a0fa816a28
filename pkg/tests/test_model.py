import math

import numpy as np
import pytest

from conftest import MEMO_HYPER, make_tiny_model, random_sentence
from oracles import finite_difference, max_rel_error
from wordchoice.checkpoint import CheckpointError
from wordchoice.corpus import Batch, FILL_ID, Vocabulary, encode, make_batches, pack_batch
from wordchoice.kernel import cross_entropy
from wordchoice.model import (
    BiLstmModel,
    Hyperparams,
    TargetPositionError,
    TrainingDivergedError,
)


class TestHyperparams:
    def test_defaults(self):
        h = Hyperparams()
        assert (h.embed_dim, h.hidden, h.context_dim) == (200, 200, 400)
        assert (h.vocab_cap, h.max_len, h.batch_size) == (30000, 40, 100)

    def test_context_dim_must_be_twice_hidden(self):
        with pytest.raises(ValueError):
            Hyperparams(hidden=8, context_dim=20)


class TestContextEmbed:
    def test_boundary_first_word_uses_only_start(self, tiny_model, tiny_vocab):
        sent = encode(["w1", "w2", "w3"], tiny_vocab)
        ctx = tiny_model.context_embed(sent, 1)
        # left half must equal a left pass over <start> alone
        from wordchoice.kernel import run_lstm
        h_left = run_lstm(tiny_model.lstm_left,
                          tiny_model.emb_left[sent.ids[0:1]]).h
        assert np.array_equal(ctx[:8], h_left)

    def test_flanking_states(self, tiny_model, tiny_vocab):
        from wordchoice.kernel import run_lstm
        sent = encode(["w1", "w2", "w3", "w4"], tiny_vocab)
        i = 2
        ctx = tiny_model.context_embed(sent, i)
        left = run_lstm(tiny_model.lstm_left, tiny_model.emb_left[sent.ids[:i]]).h
        right = run_lstm(tiny_model.lstm_right,
                         tiny_model.emb_right[sent.ids[:i:-1]]).h
        assert np.array_equal(ctx, np.concatenate([left, right]))

    def test_no_leakage_bitwise(self, tiny_model, tiny_vocab):
        sent = encode(["w1", "w2", "w3"], tiny_vocab)
        base = tiny_model.context_embed(sent, 2)
        for other in range(3, len(tiny_vocab)):
            ids = sent.ids.copy()
            ids[2] = other
            mutated = encode([tiny_vocab.word(int(t)) for t in ids[1:4]], tiny_vocab)
            assert np.array_equal(tiny_model.context_embed(mutated, 2), base)

    def test_invalid_positions(self, tiny_model, tiny_vocab):
        sent = encode(["w1", "w2"], tiny_vocab)
        for bad in (0, 3, -1, 10):
            with pytest.raises(TargetPositionError):
                tiny_model.context_embed(sent, bad)


class TestPredictDistribution:
    def test_zero_output_layer_exactly_uniform(self, tiny_vocab):
        hyper = Hyperparams(embed_dim=8, hidden=8, context_dim=16, vocab_cap=20, seed=1)
        m = BiLstmModel.init(tiny_vocab, hyper)
        sent = encode(["w1", "w2"], tiny_vocab)
        q = m.predict_distribution(sent, 1)
        assert np.all(q == 1.0 / len(tiny_vocab))

    def test_sums_to_one(self, tiny_model, tiny_vocab):
        sent = encode(["w4", "w5", "w6"], tiny_vocab)
        for i in (1, 2, 3):
            assert abs(tiny_model.predict_distribution(sent, i).sum() - 1.0) < 1e-9

    def test_memorized_context_argmax(self, memo_training):
        model, _, encoded, _ = memo_training
        sent = encoded[0]
        for i in range(1, sent.real_len + 1):
            q = model.predict_distribution(sent, i)
            assert int(np.argmax(q)) == int(sent.ids[i])


class TestSentenceLoss:
    def test_single_word_uniform_model(self, tiny_vocab):
        hyper = Hyperparams(embed_dim=8, hidden=8, context_dim=16, vocab_cap=20, seed=2)
        m = BiLstmModel.init(tiny_vocab, hyper)
        sent = encode(["w3"], tiny_vocab)
        assert m.sentence_loss(sent) == pytest.approx(math.log(len(tiny_vocab)), rel=1e-12)

    def test_empty_sentence(self, tiny_model, tiny_vocab):
        assert tiny_model.sentence_loss(encode([], tiny_vocab)) == 0.0

    def test_equals_sum_of_position_losses(self, tiny_model, tiny_vocab):
        sent = encode(["w2", "w7", "w11"], tiny_vocab)
        per_position = sum(
            cross_entropy(tiny_model.predict_distribution(sent, i), int(sent.ids[i]))
            for i in (1, 2, 3))
        assert tiny_model.sentence_loss(sent) == pytest.approx(per_position, rel=1e-9)


class TestGradients:
    def test_scalar_model_matches_finite_differences(self):
        # hidden=1, embed=1, two regular words: every tensor is a scalar.
        # Moderate weights keep the finite-difference truncation error well
        # below the 1e-6 bar (Glorot limits for 1x1 shapes are ~1.7, large
        # enough for third-derivative terms to pollute the estimate).
        vocab = Vocabulary(["a", "b"])
        hyper = Hyperparams(embed_dim=1, hidden=1, context_dim=2, vocab_cap=2, seed=8)
        m = BiLstmModel.init(vocab, hyper)
        rng = np.random.default_rng(5)
        for arr in m.params.arrays().values():
            arr[:] = rng.uniform(-0.5, 0.5, arr.shape)
        sent = encode(["a", "b"], vocab)
        grads = m.sentence_loss_gradients(sent)
        numeric = finite_difference(lambda: m.sentence_loss(sent), m.params.arrays())
        worst, where = max_rel_error(grads, numeric)
        assert worst < 1e-6, f"{worst:.2e} at {where}"

    def test_unused_embedding_rows_zero(self, tiny_model, tiny_vocab):
        sent = encode(["w1", "w2"], tiny_vocab)
        grads = tiny_model.sentence_loss_gradients(sent)
        used = set(int(i) for i in sent.ids)
        for row in range(len(tiny_vocab)):
            if row not in used:
                assert np.array_equal(grads["emb_left"][row], np.zeros(8))
                assert np.array_equal(grads["emb_right"][row], np.zeros(8))

    def test_coupled_gates_forget_blocks_zero(self, tiny_vocab):
        hyper = Hyperparams(embed_dim=8, hidden=8, context_dim=16, vocab_cap=20,
                            seed=3, coupled_gates=True)
        m = BiLstmModel.init(tiny_vocab, hyper)
        rng = np.random.default_rng(1)
        m.out.W[:] = rng.uniform(-0.3, 0.3, m.out.W.shape)
        sent = encode(["w1", "w2", "w3"], tiny_vocab)
        grads = m.sentence_loss_gradients(sent)
        for side in ("left", "right"):
            for t in ("W_f", "U_f", "Y_f", "b_f"):
                assert np.array_equal(grads[f"{side}.{t}"],
                                      np.zeros_like(grads[f"{side}.{t}"]))
        # sanity: the input gate does receive gradient
        assert np.abs(grads["left.W_i"]).max() > 0


class TestTrain:
    def test_empty_corpus_leaves_model_unchanged(self, tiny_vocab):
        hyper = Hyperparams(embed_dim=8, hidden=8, context_dim=16, vocab_cap=20, seed=4)
        m = BiLstmModel.init(tiny_vocab, hyper)
        before = {k: v.copy() for k, v in m.params.arrays().items()}
        log = m.train([], epochs=1)
        assert log == [0.0]
        for k, v in m.params.arrays().items():
            assert np.array_equal(v, before[k])

    def test_extra_fill_padding_gives_bitwise_identical_update(self, tiny_vocab):
        sents = [encode(["w1", "w2"], tiny_vocab), encode(["w3"], tiny_vocab)]
        batch = pack_batch(sents)
        padded_ids = np.concatenate(
            [batch.ids, np.full((batch.rows, 3), FILL_ID, dtype=np.int64)], axis=1)
        padded_mask = np.concatenate(
            [batch.mask, np.zeros((batch.rows, 3), dtype=bool)], axis=1)
        wider = Batch(padded_ids, batch.real_lens, padded_mask)

        hyper = Hyperparams(embed_dim=8, hidden=8, context_dim=16, vocab_cap=20, seed=6)
        m1 = BiLstmModel.init(tiny_vocab, hyper)
        m2 = BiLstmModel.init(tiny_vocab, hyper)
        m1.train([batch], epochs=1)
        m2.train([wider], epochs=1)
        for k in m1.params.arrays():
            assert np.array_equal(m1.params.arrays()[k], m2.params.arrays()[k]), k

    @pytest.mark.filterwarnings("ignore:invalid value encountered")
    def test_divergence_reports_epoch_and_batch(self, tiny_vocab):
        hyper = Hyperparams(embed_dim=8, hidden=8, context_dim=16, vocab_cap=20, seed=7)
        m = BiLstmModel.init(tiny_vocab, hyper)
        m.out.b[:] = np.inf
        batch = pack_batch([encode(["w1"], tiny_vocab)])
        with pytest.raises(TrainingDivergedError, match="epoch 0, batch 0"):
            m.train([batch], epochs=1)

    def test_memorization_loss_drops(self, memo_training):
        _, log, _, _ = memo_training
        assert len(log) == 30
        assert log[-1] < 0.5
        assert log[-1] < log[0] / 5

    def test_stochastic_stream_trains(self, tiny_vocab):
        # batch_size=1 is the stochastic regime: one update per sentence
        sents = [encode([f"w{1 + i % 5}", f"w{6 + i % 5}"], tiny_vocab)
                 for i in range(20)]
        batches = make_batches(sents, 1, seed=3)
        assert len(batches) == 20
        hyper = Hyperparams(embed_dim=8, hidden=8, context_dim=16, vocab_cap=20,
                            batch_size=1, lr=0.5, epochs=2, seed=11)
        m = BiLstmModel.init(tiny_vocab, hyper)
        before = m.out.W.copy()
        log = m.train(batches)
        assert all(np.isfinite(log)) and log[1] < log[0]
        assert not np.array_equal(m.out.W, before)

    def test_coupled_gates_variant_trains(self, tiny_vocab):
        sents = [encode(["w1", "w2", "w3"], tiny_vocab)] * 12
        hyper = Hyperparams(embed_dim=8, hidden=8, context_dim=16, vocab_cap=20,
                            lr=1.0, epochs=3, seed=21, coupled_gates=True)
        m = BiLstmModel.init(tiny_vocab, hyper)
        log = m.train(make_batches(sents, 4, seed=0))
        assert log[-1] < log[0]
        # forget-gate parameters are inert in this variant
        assert np.array_equal(m.lstm_left.W_f, BiLstmModel.init(tiny_vocab, hyper).lstm_left.W_f)


class TestSuggest:
    def test_excludes_reserved_and_sorted(self, tiny_model, tiny_vocab):
        sent = encode(["w1", "w2", "w3"], tiny_vocab)
        suggestions = tiny_model.suggest(sent, 2, 100)
        words = [s.word for s in suggestions]
        assert "<start>" not in words and "<stop>" not in words and "<unk>" not in words
        assert len(suggestions) == len(tiny_vocab) - 3
        scores = [s.score for s in suggestions]
        assert all(a >= b for a, b in zip(scores, scores[1:]))

    def test_k_larger_than_vocab(self, tiny_model, tiny_vocab):
        sent = encode(["w1"], tiny_vocab)
        assert len(tiny_model.suggest(sent, 1, 10_000)) == len(tiny_vocab) - 3

    def test_uniform_ties_broken_by_id(self, tiny_vocab):
        hyper = Hyperparams(embed_dim=8, hidden=8, context_dim=16, vocab_cap=20, seed=9)
        m = BiLstmModel.init(tiny_vocab, hyper)  # zero output layer: all equal
        sent = encode(["w1", "w2"], tiny_vocab)
        words = [s.word for s in m.suggest(sent, 1, 5)]
        assert words == [tiny_vocab.word(i) for i in range(3, 8)]

    def test_k_validation(self, tiny_model, tiny_vocab):
        sent = encode(["w1"], tiny_vocab)
        with pytest.raises(ValueError):
            tiny_model.suggest(sent, 1, 0)

    def test_memorized_word_ranks_first(self, memo_training):
        model, _, encoded, _ = memo_training
        sent = encoded[7]
        i = 2
        top = model.suggest(sent, i, 1)
        assert top[0].word == model.vocab.word(int(sent.ids[i]))


class TestCheckpoint:
    def test_roundtrip_preserves_suggestions(self, tiny_model, tiny_vocab, tmp_path):
        path = str(tmp_path / "m.blwc")
        sent = encode(["w1", "w2", "w3"], tiny_vocab)
        before = [s.word for s in tiny_model.suggest(sent, 2, 10)]
        tiny_model.save(path)
        loaded = BiLstmModel.load(path)
        after = loaded.suggest(sent, 2, 10)
        assert [s.word for s in after] == before
        # float32 storage: probabilities equal at stored precision
        for s_new, s_old in zip(after, tiny_model.suggest(sent, 2, 10)):
            assert s_new.score == pytest.approx(s_old.score, rel=1e-5)

    def test_double_roundtrip_is_bitwise_stable(self, tiny_model, tmp_path):
        p1, p2 = str(tmp_path / "a.blwc"), str(tmp_path / "b.blwc")
        tiny_model.save(p1)
        m2 = BiLstmModel.load(p1)
        m2.save(p2)
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.blwc"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(CheckpointError, match="magic"):
            BiLstmModel.load(str(path))

    def test_truncated_payload(self, tiny_model, tmp_path):
        path = tmp_path / "t.blwc"
        tiny_model.save(str(path))
        blob = path.read_bytes()
        path.write_bytes(blob[:len(blob) - 64])
        with pytest.raises(CheckpointError, match="truncated"):
            BiLstmModel.load(str(path))

    def test_dimension_mismatch(self, tiny_model, tmp_path):
        import json
        path = tmp_path / "d.blwc"
        tiny_model.save(str(path))
        blob = bytearray(path.read_bytes())
        header_len = int.from_bytes(blob[6:10], "little")
        header = json.loads(blob[10:10 + header_len].decode())
        header["vocab"] = header["vocab"][:-1]  # drop a word: rows disagree
        new_header = json.dumps(header, ensure_ascii=False).encode()
        new_blob = blob[:6] + len(new_header).to_bytes(4, "little") + new_header \
            + blob[10 + header_len:]
        path.write_bytes(bytes(new_blob))
        with pytest.raises(CheckpointError, match="dimension mismatch"):
            BiLstmModel.load(str(path))


class TestDeterminism:
    def test_same_seed_same_checkpoint_bytes(self, tmp_path):
        from wordchoice.synthetic import template_corpus
        from wordchoice.corpus import build_vocab

        corpus = template_corpus(120, 6, seed=2)
        vocab = build_vocab(corpus, 60)
        hyper = Hyperparams(embed_dim=8, hidden=8, context_dim=16, vocab_cap=60,
                            batch_size=20, lr=1.0, epochs=2, seed=77)
        blobs = []
        for run in range(2):
            sents = [encode(s, vocab) for s in corpus]
            batches = make_batches(sents, hyper.batch_size, hyper.seed)
            m = BiLstmModel.init(vocab, hyper)
            m.train(batches)
            path = str(tmp_path / f"run{run}.blwc")
            m.save(path)
            blobs.append(open(path, "rb").read())
        assert blobs[0] == blobs[1]
