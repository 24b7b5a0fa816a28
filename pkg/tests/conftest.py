import pathlib
import sys

import numpy as np
import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from wordchoice.corpus import Vocabulary, build_vocab, encode, make_batches
from wordchoice.model import BiLstmModel, Hyperparams
from wordchoice.synthetic import template_corpus

REPO = pathlib.Path(__file__).resolve().parent.parent

# Acceptance-pinned memorization configuration: 2000 sentences over 40
# templates (vocab 164 <= 200), dims 16/16, batch 100, 30 epochs.
MEMO_HYPER = Hyperparams(
    embed_dim=16, hidden=16, context_dim=32, vocab_cap=200,
    batch_size=100, lr=5.0, clip=5.0, epochs=30, seed=42,
)


@pytest.fixture(scope="session")
def lexicon_path() -> str:
    return str(REPO / "data" / "sample_lexicon.tsv")


@pytest.fixture(scope="session")
def tiny_vocab() -> Vocabulary:
    return Vocabulary([f"w{i}" for i in range(17)])  # size 20 with reserved


def make_tiny_model(tiny_vocab, seed=3, out_seed=9) -> BiLstmModel:
    """vocab 20 / dims 8 model with a random (not zero) output layer so
    gradients reach every tensor."""
    hyper = Hyperparams(embed_dim=8, hidden=8, context_dim=16,
                        vocab_cap=20, seed=seed)
    m = BiLstmModel.init(tiny_vocab, hyper)
    rng = np.random.default_rng(out_seed)
    m.out.W[:] = rng.uniform(-0.3, 0.3, m.out.W.shape)
    m.out.b[:] = rng.uniform(-0.1, 0.1, m.out.b.shape)
    return m


@pytest.fixture()
def tiny_model(tiny_vocab) -> BiLstmModel:
    return make_tiny_model(tiny_vocab)


@pytest.fixture(scope="session")
def memo_corpus() -> list[list[str]]:
    return template_corpus(2000, 40, seed=7)


@pytest.fixture(scope="session")
def memo_training(memo_corpus):
    """One trained memorization model shared across the suite.

    Returns (model, per-epoch loss log, encoded corpus in training order,
    training wall-clock seconds).
    """
    import time

    vocab = build_vocab(memo_corpus, MEMO_HYPER.vocab_cap)
    encoded = [encode(s, vocab) for s in memo_corpus]
    batches = make_batches(encoded, MEMO_HYPER.batch_size, MEMO_HYPER.seed)
    model = BiLstmModel.init(vocab, MEMO_HYPER)
    t0 = time.monotonic()
    log = model.train(batches)
    elapsed = time.monotonic() - t0
    return model, log, encoded, elapsed


def random_sentence(vocab: Vocabulary, rng: np.random.Generator, max_words: int = 8):
    n = int(rng.integers(1, max_words + 1))
    words = [vocab.word(int(i)) for i in rng.integers(3, len(vocab), size=n)]
    return encode(words, vocab)
