"""Non-bidirectional baselines: Kneser-Ney n-gram LM and unidirectional
LSTM language models."""

from .ngram import NGramTable, estimate_discounts, ngram_rank, ngram_train, sentence_perplexity
from .rnnlm import LEFT_TO_RIGHT, RIGHT_TO_LEFT, RnnLm, rnnlm_rank, rnnlm_train

__all__ = [
    "LEFT_TO_RIGHT", "RIGHT_TO_LEFT", "NGramTable", "RnnLm",
    "estimate_discounts", "ngram_rank", "ngram_train", "rnnlm_rank",
    "rnnlm_train", "sentence_perplexity",
]
