"""Context-conditioned proper-word-choice toolkit.

Train a bidirectional LSTM from scratch on a line-per-sentence corpus,
suggest ranked in-context replacements for a marked word, filter them by
part of speech against a sense lexicon, compare against n-gram and
unidirectional RNNLM baselines, and score everything with strict mean
reciprocal rank.
"""

from .corpus import (
    Batch,
    EncodedSentence,
    SentenceTooLongError,
    Vocabulary,
    build_vocab,
    decode,
    encode,
    make_batches,
    tokenize,
)
from .evaluation import (
    EvalReport,
    TestCase,
    build_multigold_sets,
    evaluate,
    load_testset,
    make_model_pipeline,
    make_ngram_pipeline,
    reciprocal_rank,
)
from .model import BiLstmModel, Hyperparams, load_checkpoint, save_checkpoint
from .posfilter import FilterResult, Lexicon, filter_candidates, load_lexicon
from .suggestions import Suggestion

__version__ = "0.1.0"

__all__ = [
    "Batch", "BiLstmModel", "EncodedSentence", "EvalReport", "FilterResult",
    "Hyperparams", "Lexicon", "SentenceTooLongError", "Suggestion",
    "TestCase", "Vocabulary", "build_multigold_sets", "build_vocab",
    "decode", "encode", "evaluate", "filter_candidates", "load_checkpoint",
    "load_lexicon", "load_testset", "make_batches", "make_model_pipeline",
    "make_ngram_pipeline", "reciprocal_rank", "save_checkpoint", "tokenize",
]
