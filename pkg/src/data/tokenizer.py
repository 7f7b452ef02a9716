"""Lowercase word/punctuation tokenizer with an ID-only vocabulary."""
import re
from typing import Iterable

from src.exceptions import VocabError

UNK_TOKEN = "<unk>"
UNK_ID = 0

_TOKEN_PATTERN = re.compile(r"\w+|[^\w\s]")


def tokenize(text: str) -> list[str]:
    """Lowercase and split into word runs and single punctuation marks."""
    return _TOKEN_PATTERN.findall(text.lower())


class Vocabulary:
    """
    Token ↔ id map; id 0 is reserved for the unknown token.

    Ids are assigned to the sorted set of known tokens, so the map depends only
    on which tokens were seen, not on their order.
    """

    def __init__(self, tokens: Iterable[str], max_len: int | None = None):
        known = sorted(set(tokens) - {UNK_TOKEN})
        self._itos = [UNK_TOKEN, *known]
        self._stoi = {tok: i for i, tok in enumerate(self._itos)}
        self.max_len = max_len

    @classmethod
    def from_texts(cls, texts: Iterable[str], max_len: int | None = None) -> "Vocabulary":
        return cls((tok for text in texts for tok in tokenize(text)), max_len=max_len)

    def __len__(self) -> int:
        return len(self._itos)

    def __contains__(self, token: str) -> bool:
        return token in self._stoi

    @property
    def tokens(self) -> list[str]:
        return list(self._itos)

    def encode(self, text: str) -> list[int]:
        """Token ids of `text`, unknown tokens collapsed to 0, truncated to max_len."""
        ids = [self._stoi.get(tok, UNK_ID) for tok in tokenize(text)]
        return ids[: self.max_len] if self.max_len is not None else ids

    def decode(self, ids: Iterable[int]) -> str:
        ids = list(ids)
        if any(i < 0 or i >= len(self._itos) for i in ids):
            raise VocabError(f"Token id outside vocabulary of size {len(self)}")
        return " ".join(self._itos[i] for i in ids)
