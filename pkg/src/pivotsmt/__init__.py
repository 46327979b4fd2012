"""pivotsmt: a miniature phrase-based SMT toolkit with pivot-language
strategies (cascade, pseudo-corpus, phrase-table triangulation),
minimum-Bayes-risk output combination, and BLEU / bootstrap / reordering
evaluation."""

__version__ = "0.1.0"

from .align import AlignmentMatrix, Lexicon, symmetrize_gdfa, train_ibm1, viterbi_align
from .corpus import CorpusSplit, ParallelCorpus, filter_corpus, select_dev_test, tokenize
from .decoder import DecoderConfig, decode, distortion_cost, nbest
from .lm import NGramModel, logprob, perplexity, train_kn
from .metrics import (
    bleu_corpus,
    bleu_sentence,
    bootstrap_significance,
    mbr_combine,
    rquantity,
)
from .phrases import PhraseTable, build_phrase_table, extract_phrases, lexical_weight
from .pivot import TranslationSystem, build_pseudo_corpus, cascade_translate, triangulate
from .tuning import tune_weights

__all__ = [
    "AlignmentMatrix",
    "CorpusSplit",
    "DecoderConfig",
    "Lexicon",
    "NGramModel",
    "ParallelCorpus",
    "PhraseTable",
    "TranslationSystem",
    "bleu_corpus",
    "bleu_sentence",
    "bootstrap_significance",
    "build_phrase_table",
    "build_pseudo_corpus",
    "cascade_translate",
    "decode",
    "distortion_cost",
    "extract_phrases",
    "filter_corpus",
    "lexical_weight",
    "logprob",
    "mbr_combine",
    "nbest",
    "perplexity",
    "rquantity",
    "select_dev_test",
    "symmetrize_gdfa",
    "tokenize",
    "train_ibm1",
    "train_kn",
    "triangulate",
    "tune_weights",
    "viterbi_align",
]
