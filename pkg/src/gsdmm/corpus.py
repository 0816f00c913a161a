"""Dataset ingestion, text normalization, and the in-memory corpus.

A corpus is an immutable list of bag-of-words documents over a contiguous
integer vocabulary. Word ids are assigned by first appearance in corpus scan
order, so rebuilding from the same input is fully deterministic.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import AllDocumentsEmpty, DuplicateDocId, MalformedRecord

__all__ = [
    "TokenRules",
    "Vocabulary",
    "Document",
    "CorpusStats",
    "Corpus",
    "tokenize",
    "build_corpus",
    "read_dataset",
    "load_stopwords",
    "default_stopwords",
]

_NON_ALPHA = re.compile(r"[^a-z]+")
_NON_ALPHA_CASED = re.compile(r"[^a-zA-Z]+")


@dataclass(frozen=True)
class TokenRules:
    """Normalization pipeline settings.

    The pipeline order is fixed: lowercase, strip non-latin characters,
    drop stopwords, stem, filter by token length. Document-frequency
    filtering (min_df) happens at corpus level, not per call.
    """

    lowercase: bool = True
    strip_non_latin: bool = True
    stopword_list: frozenset[str] = frozenset()
    stemming: bool = False
    min_word_len: int = 2
    max_word_len: int = 15
    min_df: int = 2

    def __post_init__(self):
        if not (1 <= self.min_word_len <= self.max_word_len):
            raise ValueError(
                f"need 1 <= min_word_len <= max_word_len, got "
                f"[{self.min_word_len}, {self.max_word_len}]"
            )
        if self.min_df < 1:
            raise ValueError(f"min_df must be >= 1, got {self.min_df}")
        if not isinstance(self.stopword_list, frozenset):
            object.__setattr__(self, "stopword_list", frozenset(self.stopword_list))


@dataclass(frozen=True)
class Vocabulary:
    """Bijective word/id mapping with per-word document frequencies."""

    word_to_id: dict[str, int]
    id_to_word: tuple[str, ...]
    doc_freq: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.id_to_word)

    def __len__(self) -> int:
        return len(self.id_to_word)


@dataclass(frozen=True)
class Document:
    """One bag-of-words document: sparse word-id counts plus total length."""

    doc_id: str
    counts: dict[int, int]
    total_len: int
    gold_label: str | None = None


@dataclass(frozen=True)
class CorpusStats:
    D: int
    V: int
    mean_len: float
    max_len: int


@dataclass(frozen=True)
class Corpus:
    """Immutable tokenized corpus. Safe to share across threads."""

    documents: tuple[Document, ...]
    vocabulary: Vocabulary
    stats: CorpusStats
    # ids of input documents dropped because filtering emptied them; kept so
    # gold-label alignment downstream stays correct
    dropped_doc_ids: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.documents)

    @cached_property
    def token_views(self) -> tuple[tuple, ...]:
        """Per-document arrays precomputed for the sampler kernels.

        Each entry is (distinct_words, distinct_counts, word_rep, occ_offset,
        total_len) where word_rep repeats each word id once per occurrence and
        occ_offset is 0, 1, ... within the repeats of one word.
        """
        views = []
        for doc in self.documents:
            words = np.fromiter(doc.counts.keys(), dtype=np.int64, count=len(doc.counts))
            counts = np.fromiter(doc.counts.values(), dtype=np.int64, count=len(doc.counts))
            word_rep = np.repeat(words, counts)
            occ = np.concatenate([np.arange(c, dtype=np.float64) for c in counts]) \
                if len(counts) else np.zeros(0, dtype=np.float64)
            views.append((words, counts, word_rep, occ, doc.total_len))
        return tuple(views)


# Light suffix stripper used when TokenRules.stemming is on. Intentionally
# much cruder than a dictionary lemmatizer; exact lemmatizer parity is a
# non-goal.
_SUFFIX_RULES = (
    ("sses", "ss"),
    ("ies", "y"),
    ("ing", ""),
    ("ed", ""),
    ("ly", ""),
)


def _stem(word: str) -> str:
    for suffix, repl in _SUFFIX_RULES:
        if word.endswith(suffix) and len(word) - len(suffix) + len(repl) >= 3:
            return word[: len(word) - len(suffix)] + repl
    if word.endswith("s") and not word.endswith(("ss", "us")) and len(word) > 3:
        return word[:-1]
    return word


def tokenize(text: str, rules: TokenRules) -> list[str]:
    """Normalize raw text into a (possibly empty) token list.

    Total function: never raises, any input yields a list. min_df filtering
    is not applied here.
    """
    if rules.lowercase:
        text = text.lower()
    if rules.strip_non_latin:
        splitter = _NON_ALPHA if rules.lowercase else _NON_ALPHA_CASED
        parts = splitter.split(text)
    else:
        parts = text.split()
    tokens = []
    for tok in parts:
        if not tok or tok in rules.stopword_list:
            continue
        if rules.stemming:
            tok = _stem(tok)
        if rules.min_word_len <= len(tok) <= rules.max_word_len:
            tokens.append(tok)
    return tokens


def build_corpus(
    raw_docs: list[tuple[str, str, str | None]],
    rules: TokenRules,
) -> Corpus:
    """Tokenize, apply the document-frequency cutoff, and assemble a Corpus.

    Document frequency is computed on the final tokens (after stopword,
    stemming, and length filtering). Words with df < rules.min_df are
    dropped and ids are reassigned contiguously by first appearance.
    Documents that end up empty are dropped and recorded in
    Corpus.dropped_doc_ids.

    Raises DuplicateDocId on repeated ids and AllDocumentsEmpty when nothing
    survives filtering.
    """
    seen_ids = set()
    tokenized: list[tuple[str, list[str], str | None]] = []
    for doc_id, text, label in raw_docs:
        if doc_id in seen_ids:
            raise DuplicateDocId(f"duplicate document id {doc_id!r}")
        seen_ids.add(doc_id)
        tokenized.append((doc_id, tokenize(text, rules), label))

    df: dict[str, int] = {}
    for _, tokens, _ in tokenized:
        for word in set(tokens):
            df[word] = df.get(word, 0) + 1

    word_to_id: dict[str, int] = {}
    id_to_word: list[str] = []
    documents: list[Document] = []
    dropped: list[str] = []
    for doc_id, tokens, label in tokenized:
        counts: dict[int, int] = {}
        for word in tokens:
            if df[word] < rules.min_df:
                continue
            wid = word_to_id.get(word)
            if wid is None:
                wid = len(id_to_word)
                word_to_id[word] = wid
                id_to_word.append(word)
            counts[wid] = counts.get(wid, 0) + 1
        if not counts:
            dropped.append(doc_id)
            continue
        documents.append(
            Document(doc_id=doc_id, counts=counts,
                     total_len=sum(counts.values()), gold_label=label)
        )

    if not documents:
        raise AllDocumentsEmpty(
            f"no documents left after filtering ({len(raw_docs)} inputs)"
        )

    doc_freq = tuple(df[word] for word in id_to_word)
    lengths = [d.total_len for d in documents]
    stats = CorpusStats(
        D=len(documents),
        V=len(id_to_word),
        mean_len=float(np.mean(lengths)),
        max_len=int(max(lengths)),
    )
    return Corpus(
        documents=tuple(documents),
        vocabulary=Vocabulary(word_to_id, tuple(id_to_word), doc_freq),
        stats=stats,
        dropped_doc_ids=tuple(dropped),
    )


def read_dataset(
    path: str | Path,
    format: str = "jsonl",
) -> list[tuple[str, str, str | None]]:
    """Load (doc_id, text, label) records in file order.

    jsonl: one object per line with fields "id", "text", optional "label".
    tsv: id<TAB>text or id<TAB>label<TAB>text. Blank lines are skipped.
    Raises MalformedRecord with the offending line number.
    """
    if format not in ("jsonl", "tsv"):
        raise ValueError(f"unknown dataset format {format!r}")
    records: list[tuple[str, str, str | None]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if format == "jsonl":
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise MalformedRecord(f"invalid JSON ({exc.msg})", lineno) from exc
                if not isinstance(obj, dict) or "id" not in obj:
                    raise MalformedRecord('missing "id" field', lineno)
                if "text" not in obj:
                    raise MalformedRecord('missing "text" field', lineno)
                label = obj.get("label")
                records.append((str(obj["id"]), str(obj["text"]),
                                None if label is None else str(label)))
            else:
                cols = line.split("\t")
                if len(cols) == 2:
                    records.append((cols[0], cols[1], None))
                elif len(cols) == 3:
                    records.append((cols[0], cols[2], cols[1]))
                else:
                    raise MalformedRecord(
                        f"expected 2 or 3 tab-separated columns, got {len(cols)}",
                        lineno,
                    )
    return records


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a one-word-per-line UTF-8 stopword file."""
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.strip() for w in fh if w.strip())


def default_stopwords() -> frozenset[str]:
    """The English stopword list shipped with the package."""
    text = resources.files("gsdmm").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(w for w in text.split("\n") if w.strip())
