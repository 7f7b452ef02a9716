"""Corpus ingestion, tokenization, few-shot sampling and synthetic corpora."""
from src.data.corpus import (
    LabeledCorpus,
    build_corpus,
    load_corpus,
    read_jsonl,
    read_word_list,
)
from src.data.sampling import few_shot_sample
from src.data.synth import synth_corpus, write_corpus
from src.data.tokenizer import UNK_ID, Vocabulary, tokenize

__all__ = [
    "LabeledCorpus",
    "build_corpus",
    "load_corpus",
    "read_jsonl",
    "read_word_list",
    "few_shot_sample",
    "synth_corpus",
    "write_corpus",
    "UNK_ID",
    "Vocabulary",
    "tokenize",
]
