"""Lexical retrieval over a corpus directory with token-budgeted assembly.

Scoring is the TF-IDF family formula:
    score(d, q) = sum_t idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len(d) / avglen))
with k1 = 1.2, b = 0.75, idf(t) = ln(1 + (N - n_t + 0.5) / (n_t + 0.5)).
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .errors import StorageError

K1 = 1.2
B = 0.75

_KIND_BY_SUBDIR = {"code": "code_fragment", "templates": "template_definition", "api": "api_doc"}
_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Index tokenization: lowercase, split on non-alphanumeric."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class CorpusDocument:
    doc_id: str  # path relative to the corpus root
    kind: str
    text: str
    token_count: int  # whitespace-delimited words, the budget unit


@dataclass(frozen=True)
class RetrievalResult:
    doc_id: str
    score: float


class RetrievalIndex:
    def __init__(self, documents: dict[str, CorpusDocument]):
        self.documents = documents
        self.postings: dict[str, dict[str, int]] = {}
        self.doc_lens: dict[str, int] = {}
        for doc_id, doc in documents.items():
            terms = tokenize(doc.text)
            self.doc_lens[doc_id] = len(terms)
            for term, tf in Counter(terms).items():
                self.postings.setdefault(term, {})[doc_id] = tf
        self.n_docs = len(documents)
        total = sum(self.doc_lens.values())
        self.avg_doc_len = total / self.n_docs if self.n_docs else 0.0


def build_index(corpus_dir) -> RetrievalIndex:
    """Index every file under the directory; kind comes from the top-level subdir."""
    corpus_dir = Path(corpus_dir)
    documents: dict[str, CorpusDocument] = {}
    try:
        paths = sorted(p for p in corpus_dir.rglob("*") if p.is_file())
        for path in paths:
            rel = path.relative_to(corpus_dir).as_posix()
            top = rel.split("/", 1)[0] if "/" in rel else ""
            kind = _KIND_BY_SUBDIR.get(top, "code_fragment")
            text = path.read_text(encoding="utf-8", errors="replace")
            documents[rel] = CorpusDocument(
                doc_id=rel, kind=kind, text=text, token_count=len(text.split())
            )
    except OSError as exc:
        raise StorageError(f"cannot read corpus: {exc}") from exc
    return RetrievalIndex(documents)


def index_from_texts(texts: dict[str, str], kind: str = "code_fragment") -> RetrievalIndex:
    """In-memory index for tests and small corpora."""
    documents = {
        doc_id: CorpusDocument(doc_id=doc_id, kind=kind, text=text, token_count=len(text.split()))
        for doc_id, text in texts.items()
    }
    return RetrievalIndex(documents)


def retrieve(idx: RetrievalIndex, query: str, k: int) -> list[RetrievalResult]:
    """Top-k documents sharing at least one query term, score descending."""
    if k <= 0:
        return []
    scores: dict[str, float] = {}
    for term in set(tokenize(query)):
        posting = idx.postings.get(term)
        if not posting:
            continue
        n_t = len(posting)
        idf = math.log(1 + (idx.n_docs - n_t + 0.5) / (n_t + 0.5))
        for doc_id, tf in posting.items():
            norm = K1 * (1 - B + B * idx.doc_lens[doc_id] / idx.avg_doc_len)
            scores[doc_id] = scores.get(doc_id, 0.0) + idf * tf * (K1 + 1) / (tf + norm)
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return [RetrievalResult(doc_id=d, score=s) for d, s in ranked[:k]]


def trim_to_budget(
    results: list[RetrievalResult], idx: RetrievalIndex, budget_tokens: int
) -> list[CorpusDocument]:
    """Greedy rank-order selection; never splits a document."""
    chosen: list[CorpusDocument] = []
    used = 0
    for r in results:
        doc = idx.documents[r.doc_id]
        if used + doc.token_count <= budget_tokens:
            chosen.append(doc)
            used += doc.token_count
    return chosen


def _fingerprint(corpus_dir: Path) -> dict[str, list]:
    out = {}
    for path in sorted(p for p in corpus_dir.rglob("*") if p.is_file()):
        stat = path.stat()
        out[path.relative_to(corpus_dir).as_posix()] = [stat.st_size, stat.st_mtime_ns]
    return out


def save_index(idx: RetrievalIndex, corpus_dir, cache_path) -> None:
    doc = {
        "fingerprint": _fingerprint(Path(corpus_dir)),
        "documents": [
            {"doc_id": d.doc_id, "kind": d.kind, "text": d.text, "token_count": d.token_count}
            for d in idx.documents.values()
        ],
    }
    Path(cache_path).write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")


def load_index(cache_path) -> RetrievalIndex | None:
    path = Path(cache_path)
    if not path.exists():
        return None
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        documents = {
            row["doc_id"]: CorpusDocument(row["doc_id"], row["kind"], row["text"], row["token_count"])
            for row in doc["documents"]
        }
        return RetrievalIndex(documents)
    except (ValueError, KeyError, TypeError):
        return None


def load_or_build(corpus_dir, cache_path) -> RetrievalIndex:
    """Use the cache when the corpus fingerprint matches; rebuild otherwise."""
    corpus_dir = Path(corpus_dir)
    path = Path(cache_path)
    if path.exists():
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
            if doc.get("fingerprint") == _fingerprint(corpus_dir):
                cached = load_index(path)
                if cached is not None:
                    return cached
        except (ValueError, OSError):
            pass
    idx = build_index(corpus_dir)
    save_index(idx, corpus_dir, path)
    return idx
