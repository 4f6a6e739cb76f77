"""Translation backends behind one batch contract, plus the file cache.

Every backend maps an ordered list of texts to an equally long list of
translations. The identity, dictionary, and scrambler backends are
deterministic stand-ins that make the pipeline testable offline; the HTTP
backend talks to any JSON service implementing the plain
``{"texts": [...], "source": ..., "target": ...}`` → ``{"translations":
[...]}`` protocol, with retries, a token-bucket rate limit, and bounded
in-flight concurrency.
"""

from __future__ import annotations

import json
import logging
import os
import random
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from urllib.parse import urlsplit

import requests

from .placeholder import find_placeholders

log = logging.getLogger(__name__)

API_KEY_ENV = "TRANSPROJ_API_KEY"


class BackendError(Exception):
    pass


class BackendUnavailable(BackendError):
    """Transport failure or HTTP error status after retries."""


class BackendProtocol(BackendError):
    """The service answered, but not with what the contract promises."""


class CacheCorrupt(ValueError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"cache line {line_no}: {reason}")
        self.line_no = line_no


class CacheLocked(RuntimeError):
    pass


@dataclass(frozen=True)
class TranslationRequest:
    texts: tuple[str, ...]
    source_lang: str
    target_lang: str

    def __post_init__(self):
        if not self.texts:
            raise ValueError("request carries no texts")
        if any(not t for t in self.texts):
            raise ValueError("request contains an empty text")
        if not self.source_lang or not self.target_lang:
            raise ValueError("language codes must be non-empty")


class Backend:
    """Batch translation contract: len(out) == len(texts), order preserved."""

    backend_id = "abstract"

    def translate(self, texts: list[str], source_lang: str, target_lang: str) -> list[str]:
        raise NotImplementedError


class IdentityBackend(Backend):
    """Returns every text verbatim."""

    backend_id = "identity"

    def translate(self, texts, source_lang, target_lang):
        return list(texts)


class DictionaryBackend(Backend):
    """Word-by-word lookup in a TSV map; unknown words pass through.

    Substrings matching the tolerant placeholder grammar are never touched,
    whatever the map contains.
    """

    backend_id = "dict"

    def __init__(self, mapping: dict[str, str]):
        self._map = dict(mapping)

    @classmethod
    def from_file(cls, path: str) -> "DictionaryBackend":
        mapping = {}
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                if "\t" not in line:
                    raise ValueError(f"{path}:{line_no}: expected 'source<TAB>target'")
                src, tgt = line.split("\t", 1)
                mapping[src] = tgt
        return cls(mapping)

    def translate(self, texts, source_lang, target_lang):
        return [self._translate_text(t) for t in texts]

    def _translate_text(self, text: str) -> str:
        out = []
        last = 0
        for hit in find_placeholders(text):
            out.append(self._translate_segment(text[last:hit.start]))
            out.append(hit.text)
            last = hit.end
        out.append(self._translate_segment(text[last:]))
        return "".join(out)

    def _translate_segment(self, segment: str) -> str:
        parts = re.split(r"(\s+)", segment)
        return "".join(
            p if (not p or p.isspace()) else self._map.get(p, p) for p in parts
        )


class ScramblerBackend(Backend):
    """Deterministic word-order permutation: seed 0 reverses, seed k > 0
    rotates left by k mod word count. Exercises index realignment."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.backend_id = f"scramble-{seed}"

    def translate(self, texts, source_lang, target_lang):
        return [self.scramble(t) for t in texts]

    def scramble(self, text: str) -> str:
        words = text.split()
        if not words:
            return text
        if self.seed == 0:
            words = words[::-1]
        else:
            k = self.seed % len(words)
            words = words[k:] + words[:k]
        return " ".join(words)


class TokenBucket:
    """Classic token bucket; acquire() blocks until a token is available."""

    def __init__(self, rate: float, capacity: float | None = None):
        self.rate = float(rate)
        self.capacity = float(capacity if capacity is not None else max(1.0, rate))
        self._tokens = self.capacity
        self._last = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
                self._last = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            time.sleep(wait)


class HttpBackend(Backend):
    """Generic JSON translation service adapter.

    POSTs ``{"texts", "source", "target"}`` and expects ``{"translations":
    [...]}`` in input order. Texts are chunked ``batch_size`` at a time and
    chunks run on a bounded pool; transport errors and 5xx answers are
    retried with exponential backoff and jitter.
    """

    def __init__(
        self,
        url: str,
        *,
        api_key: str | None = None,
        batch_size: int = 32,
        max_inflight: int = 4,
        retries: int = 3,
        backoff_base: float = 0.5,
        backoff_factor: float = 2.0,
        rate: float | None = 5.0,
        timeout: float = 30.0,
        session: requests.Session | None = None,
    ):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self.url = url
        self.backend_id = f"http:{urlsplit(url).netloc or url}"
        self.batch_size = batch_size
        self.retries = retries
        self.backoff_base = backoff_base
        self.backoff_factor = backoff_factor
        self.timeout = timeout
        self._api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self._session = session or requests.Session()
        self._bucket = TokenBucket(rate) if rate else None
        self._inflight = threading.BoundedSemaphore(max_inflight)

    def translate(self, texts, source_lang, target_lang):
        chunks = [texts[i:i + self.batch_size] for i in range(0, len(texts), self.batch_size)]
        if len(chunks) == 1:
            results = [self._translate_chunk(chunks[0], source_lang, target_lang)]
        else:
            with ThreadPoolExecutor(max_workers=min(len(chunks), 8)) as pool:
                results = list(
                    pool.map(lambda c: self._translate_chunk(c, source_lang, target_lang), chunks)
                )
        out = [t for chunk in results for t in chunk]
        if len(out) != len(texts):
            raise BackendProtocol(f"sent {len(texts)} texts, got {len(out)} translations")
        return out

    def _translate_chunk(self, chunk, source_lang, target_lang):
        headers = {}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        payload = {"texts": list(chunk), "source": source_lang, "target": target_lang}

        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                delay = self.backoff_base * self.backoff_factor ** (attempt - 1)
                time.sleep(delay * (1.0 + 0.25 * random.random()))
            with self._inflight:
                if self._bucket is not None:
                    self._bucket.acquire()
                try:
                    resp = self._session.post(
                        self.url, json=payload, headers=headers, timeout=self.timeout
                    )
                except requests.RequestException as exc:
                    last_error = exc
                    continue
            if resp.status_code >= 500:
                last_error = BackendUnavailable(f"HTTP {resp.status_code} from {self.url}")
                continue
            if resp.status_code != 200:
                raise BackendUnavailable(f"HTTP {resp.status_code} from {self.url}")
            return self._parse_response(resp, len(chunk))
        raise BackendUnavailable(
            f"giving up on {self.url} after {self.retries + 1} attempts: {last_error}"
        )

    def _parse_response(self, resp, expected: int):
        try:
            body = resp.json()
        except ValueError as exc:
            raise BackendProtocol(f"non-JSON response from {self.url}") from exc
        translations = body.get("translations") if isinstance(body, dict) else None
        if not isinstance(translations, list):
            raise BackendProtocol('response lacks a "translations" list')
        if len(translations) != expected or not all(isinstance(t, str) for t in translations):
            raise BackendProtocol(
                f"expected {expected} string translations, got {translations!r:.120}"
            )
        return translations


class MemoryCache:
    """In-process translation memo with the cache interface; used to keep
    run-wide at-most-once translation even when no cache file is configured."""

    def __init__(self):
        self._index: dict[tuple[str, str, str, str], str] = {}
        self._lock = threading.Lock()

    def lookup(self, backend_id, source_lang, target_lang, text):
        return self._index.get((backend_id, source_lang, target_lang, text))

    def store(self, backend_id, source_lang, target_lang, text, translation):
        with self._lock:
            self._index[(backend_id, source_lang, target_lang, text)] = translation

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        pass


class TranslationCache:
    """Append-only JSONL translation memory.

    One object per line with keys backend_id, source_lang, target_lang,
    source_text, target_text. The whole file is indexed in memory on open
    (last write wins on duplicate keys); lookups are lock-free, appends go
    through a single writer lock. An advisory flock keeps concurrent runs
    off the same file.
    """

    def __init__(self, path: str):
        self.path = path
        self.corrupt_lines: list[int] = []
        self._index: dict[tuple[str, str, str, str], str] = {}
        self._write_lock = threading.Lock()
        self._fh = open(path, "a+", encoding="utf-8")
        try:
            import fcntl

            try:
                fcntl.flock(self._fh.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
            except OSError:
                self._fh.close()
                raise CacheLocked(f"another run holds {path}")
        except ImportError:  # non-POSIX: proceed unlocked
            pass
        self._load()

    def _load(self):
        self._fh.seek(0)
        for line_no, line in enumerate(self._fh, start=1):
            if not line.strip():
                continue
            try:
                key, value = self._parse_line(line, line_no)
                self._index[key] = value
            except CacheCorrupt as exc:
                log.warning("skipping %s", exc)
                self.corrupt_lines.append(line_no)
        self._fh.seek(0, os.SEEK_END)

    @staticmethod
    def _parse_line(line: str, line_no: int) -> tuple[tuple[str, str, str, str], str]:
        try:
            record = json.loads(line)
        except ValueError as exc:
            raise CacheCorrupt(line_no, f"not valid JSON ({exc})") from exc
        fields = ("backend_id", "source_lang", "target_lang", "source_text", "target_text")
        if not isinstance(record, dict) or not all(isinstance(record.get(f), str) for f in fields):
            raise CacheCorrupt(line_no, "missing or non-string record fields")
        key = (record["backend_id"], record["source_lang"], record["target_lang"], record["source_text"])
        return key, record["target_text"]

    def lookup(self, backend_id: str, source_lang: str, target_lang: str, text: str) -> str | None:
        return self._index.get((backend_id, source_lang, target_lang, text))

    def store(self, backend_id: str, source_lang: str, target_lang: str, text: str, translation: str) -> None:
        record = {
            "backend_id": backend_id,
            "source_lang": source_lang,
            "target_lang": target_lang,
            "source_text": text,
            "target_text": translation,
        }
        line = json.dumps(record, ensure_ascii=False) + "\n"
        with self._write_lock:
            self._fh.write(line)
            self._fh.flush()
            self._index[(backend_id, source_lang, target_lang, text)] = translation

    def close(self):
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class BackendCounters:
    """Thread-safe tallies for the run report."""

    def __init__(self):
        self._lock = threading.Lock()
        self.cache_hits = 0
        self.backend_calls = 0
        self.texts_translated = 0

    def add(self, *, hits: int = 0, calls: int = 0, texts: int = 0):
        with self._lock:
            self.cache_hits += hits
            self.backend_calls += calls
            self.texts_translated += texts


def translate_batch(
    request: TranslationRequest,
    backend: Backend,
    cache: TranslationCache | MemoryCache | None = None,
    counters: BackendCounters | None = None,
) -> list[str]:
    """Translate request.texts, consulting the cache before the backend and
    storing fresh translations after. Duplicate texts within the request are
    sent to the backend once."""
    results: dict[str, str] = {}
    misses: list[str] = []
    for text in request.texts:
        if text in results or text in misses:
            continue
        cached = None
        if cache is not None:
            cached = cache.lookup(backend.backend_id, request.source_lang, request.target_lang, text)
        if cached is not None:
            results[text] = cached
        else:
            misses.append(text)
    if counters is not None:
        # hits counted per requested text, not per unique text
        counters.add(hits=sum(1 for t in request.texts if t in results))

    if misses:
        translated = backend.translate(misses, request.source_lang, request.target_lang)
        if len(translated) != len(misses):
            raise BackendProtocol(
                f"backend returned {len(translated)} translations for {len(misses)} texts"
            )
        if counters is not None:
            counters.add(calls=1, texts=len(misses))
        for text, out in zip(misses, translated):
            results[text] = out
            if cache is not None:
                cache.store(backend.backend_id, request.source_lang, request.target_lang, text, out)

    return [results[t] for t in request.texts]
