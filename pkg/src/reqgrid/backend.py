"""Scoring/embedding endpoints: wire protocol, HTTP client, deterministic mock.

Wire protocol (HTTP/1.1, UTF-8 JSON)::

    POST /v1/score  {"context": s, "continuations": [s, ...], "normalize": "mean"|"sum"}
                    -> {"scores": [f, ...]}
    POST /v1/embed  {"texts": [s, ...]} -> {"vectors": [[f, ...], ...]}

Errors come back as HTTP 400 with ``{"error": s}``.
"""

from __future__ import annotations

import json
import logging
import math
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Mapping, Sequence

import numpy as np
import requests

from .errors import BackendInputError, BackendUnavailable, ProtocolError

log = logging.getLogger(__name__)

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = 0xFFFFFFFFFFFFFFFF
SEP = b"\x1f"
NORMALIZE_MODES = ("mean", "sum")
_TOKEN = re.compile(r"[a-z0-9]+")


def fnv1a64(data: bytes, h: int = FNV_OFFSET) -> int:
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & MASK64
    return h


def tokenize(s: str) -> list[str]:
    return _TOKEN.findall(s.lower())


# -- wire types ---------------------------------------------------------------

@dataclass(frozen=True)
class ScoreRequest:
    context: str
    continuations: tuple[str, ...]
    normalize: str = "mean"

    def __post_init__(self):
        object.__setattr__(self, "continuations", tuple(self.continuations))
        if not self.continuations:
            raise BackendInputError("score request needs at least one continuation")
        if not self.context or not all(self.continuations):
            raise BackendInputError("context and continuations must be non-empty strings")
        if self.normalize not in NORMALIZE_MODES:
            raise BackendInputError(f"normalize must be one of {NORMALIZE_MODES}")

    def to_payload(self) -> dict:
        return {"context": self.context, "continuations": list(self.continuations),
                "normalize": self.normalize}

    @classmethod
    def from_payload(cls, obj: Mapping) -> "ScoreRequest":
        try:
            return cls(obj["context"], tuple(obj["continuations"]), obj.get("normalize", "mean"))
        except (KeyError, TypeError) as exc:
            raise BackendInputError(f"malformed score request: {exc}") from None


@dataclass(frozen=True)
class ScoreResponse:
    scores: tuple[float, ...]

    def to_payload(self) -> dict:
        return {"scores": list(self.scores)}

    @classmethod
    def from_payload(cls, obj: Mapping, expected: int | None = None) -> "ScoreResponse":
        try:
            scores = tuple(float(s) for s in obj["scores"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed score response: {exc}") from None
        if expected is not None and len(scores) != expected:
            raise ProtocolError(f"expected {expected} scores, got {len(scores)}")
        if not all(math.isfinite(s) for s in scores):
            raise ProtocolError("score response contains non-finite values")
        return cls(scores)


@dataclass(frozen=True)
class EmbedResponse:
    vectors: tuple[tuple[float, ...], ...]

    def to_payload(self) -> dict:
        return {"vectors": [list(v) for v in self.vectors]}

    @classmethod
    def from_payload(cls, obj: Mapping, expected: int | None = None) -> "EmbedResponse":
        try:
            vectors = tuple(tuple(float(x) for x in v) for v in obj["vectors"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed embed response: {exc}") from None
        if expected is not None and len(vectors) != expected:
            raise ProtocolError(f"expected {expected} vectors, got {len(vectors)}")
        dims = {len(v) for v in vectors}
        if len(dims) > 1 or 0 in dims:
            raise ProtocolError(f"embedding vectors have inconsistent dimensions {sorted(dims)}")
        if not all(math.isfinite(x) for v in vectors for x in v):
            raise ProtocolError("embed response contains non-finite values")
        return cls(vectors)


def dumps(payload: Mapping) -> str:
    """Canonical message serialization (key order as given, no trailing newline)."""
    return json.dumps(payload, ensure_ascii=False, allow_nan=False)


def check_texts(texts: Sequence[str]) -> list[str]:
    texts = list(texts)
    if not texts:
        raise BackendInputError("embed request needs at least one text")
    if not all(isinstance(t, str) and t.strip() for t in texts):
        raise BackendInputError("embed request contains an empty text")
    return texts


# -- deterministic mock -------------------------------------------------------

def _label_key(s: str) -> str:
    return " ".join(tokenize(s))


class MockLexicon:
    """Display label -> term tokens, matched case- and punctuation-insensitively."""

    def __init__(self, terms: Mapping[str, Sequence[str]] | None = None):
        self._terms: dict[str, frozenset[str]] = {}
        for label, words in (terms or {}).items():
            key = _label_key(label)
            toks = frozenset(t for w in words for t in tokenize(w))
            self._terms[key] = self._terms.get(key, frozenset()) | toks

    def __bool__(self):
        return bool(self._terms)

    def lookup(self, continuation: str) -> frozenset[str] | None:
        return self._terms.get(_label_key(continuation))

    def find_in(self, text: str) -> frozenset[str] | None:
        """Terms of the longest known label occurring as a token run in ``text``."""
        toks = tokenize(text)
        joined = " " + " ".join(toks) + " "
        best = None
        for key, terms in self._terms.items():
            if key and f" {key} " in joined:
                if best is None or len(key.split()) > len(best[0].split()):
                    best = (key, terms)
        return best[1] if best else None


def _terms_for(context: str, continuation: str, lexicon: MockLexicon | None) -> frozenset[str]:
    terms = None
    if lexicon:
        terms = lexicon.lookup(continuation)
        if terms is None:
            # Q/A prompts score a bare answer token; the label sits in the
            # question after the quoted requirement.
            terms = lexicon.find_in(context.rsplit('"', 1)[-1])
    if terms is None:
        terms = frozenset(tokenize(continuation))
    return terms


def _seed_state(seed: int) -> int:
    # seed 0 is the plain FNV offset; other seeds perturb only the tie-break
    return FNV_OFFSET if seed == 0 else fnv1a64(f"seed:{seed}".encode("ascii") + SEP)


def mock_score(context: str, continuation: str, lexicon: MockLexicon | None = None,
               seed: int = 0) -> float:
    """Lexicon overlap plus a hash tie-break in [0, 0.001)."""
    if not context or not continuation:
        raise BackendInputError("mock_score needs non-empty inputs")
    overlap = len(set(tokenize(context)) & _terms_for(context, continuation, lexicon))
    h = fnv1a64(context.encode("utf-8") + SEP + continuation.encode("utf-8"), _seed_state(seed))
    return overlap + (h % 1000) / 1e6


@lru_cache(maxsize=65536)
def _token_hash(token: str) -> int:
    return fnv1a64(token.encode("utf-8"))


def mock_embed(text: str, dim: int = 256) -> np.ndarray:
    """Hashed bag-of-words, L2-normalized."""
    if dim < 1:
        raise BackendInputError("dim must be positive")
    toks = tokenize(text)
    if not toks:
        raise BackendInputError(f"text {text!r} has no tokens")
    vec = np.zeros(dim)
    for t in toks:
        vec[_token_hash(t) % dim] += 1.0
    return vec / np.linalg.norm(vec)


class MockBackend:
    """In-process implementation of the endpoint protocol. Stateless and thread-safe."""

    parallelism = 1

    def __init__(self, label_terms: Mapping[str, Sequence[str]] | None = None, dim: int = 256,
                 seed: int = 0):
        self.lexicon = MockLexicon(label_terms)
        self.dim = dim
        self.seed = seed
        self._h0 = _seed_state(seed)

    def score(self, req: ScoreRequest) -> ScoreResponse:
        ctx = req.context
        ctx_tokens = set(tokenize(ctx))
        prefix = fnv1a64(ctx.encode("utf-8") + SEP, self._h0)
        scores = []
        for cont in req.continuations:
            overlap = len(ctx_tokens & _terms_for(ctx, cont, self.lexicon))
            scores.append(overlap + (fnv1a64(cont.encode("utf-8"), prefix) % 1000) / 1e6)
        return ScoreResponse(tuple(scores))

    def score_many(self, reqs: Sequence[ScoreRequest]) -> list[ScoreResponse]:
        return [self.score(r) for r in reqs]

    def embed(self, texts: Sequence[str]) -> EmbedResponse:
        texts = check_texts(texts)
        return EmbedResponse(tuple(tuple(mock_embed(t, self.dim).tolist()) for t in texts))

    def close(self):
        pass


# -- HTTP client --------------------------------------------------------------

_TRANSIENT_STATUS = {429, 500, 502, 503, 504}


def _post(endpoint: str, path: str, payload: dict, retries: int, backoff: float, timeout: float,
          session=None) -> dict:
    url = endpoint.rstrip("/") + path
    post = (session or requests).post
    body = dumps(payload).encode("utf-8")
    headers = {"Content-Type": "application/json; charset=utf-8"}
    last = None
    for attempt in range(retries + 1):
        if attempt:
            time.sleep(backoff * 2 ** (attempt - 1))
        try:
            resp = post(url, data=body, headers=headers, timeout=timeout)
        except requests.RequestException as exc:
            last = exc
            log.warning("POST %s failed (attempt %d/%d): %s", url, attempt + 1, retries + 1, exc)
            continue
        if resp.status_code in _TRANSIENT_STATUS:
            last = f"HTTP {resp.status_code}"
            log.warning("POST %s returned %s (attempt %d/%d)", url, resp.status_code,
                        attempt + 1, retries + 1)
            continue
        try:
            obj = resp.json()
        except ValueError:
            raise ProtocolError(f"{url}: response is not JSON (HTTP {resp.status_code})") from None
        if resp.status_code == 400:
            raise BackendInputError(f"{url}: {obj.get('error', 'bad request')}")
        if resp.status_code != 200:
            raise ProtocolError(f"{url}: unexpected HTTP {resp.status_code}")
        return obj
    raise BackendUnavailable(f"{url} unavailable after {retries + 1} attempts: {last}")


def score_candidates(endpoint: str, req: ScoreRequest, retries: int = 2, backoff: float = 0.5,
                     timeout: float = 30.0, session=None) -> ScoreResponse:
    obj = _post(endpoint, "/v1/score", req.to_payload(), retries, backoff, timeout, session)
    return ScoreResponse.from_payload(obj, expected=len(req.continuations))


def embed_texts(endpoint: str, texts: Sequence[str], retries: int = 2, backoff: float = 0.5,
                timeout: float = 30.0, session=None) -> EmbedResponse:
    texts = check_texts(texts)
    obj = _post(endpoint, "/v1/embed", {"texts": texts}, retries, backoff, timeout, session)
    return EmbedResponse.from_payload(obj, expected=len(texts))


class HttpBackend:
    """Client for a remote endpoint; up to ``parallelism`` requests in flight."""

    def __init__(self, url: str, retries: int = 2, parallelism: int = 4, timeout: float = 30.0,
                 backoff: float = 0.5):
        self.url = url
        self.retries = retries
        self.parallelism = max(1, parallelism)
        self.timeout = timeout
        self.backoff = backoff
        self._local = threading.local()
        self._pool = None

    def _session(self):
        if not hasattr(self._local, "session"):
            self._local.session = requests.Session()
        return self._local.session

    def score(self, req: ScoreRequest) -> ScoreResponse:
        return score_candidates(self.url, req, self.retries, self.backoff, self.timeout,
                                self._session())

    def score_many(self, reqs: Sequence[ScoreRequest]) -> list[ScoreResponse]:
        if self.parallelism == 1 or len(reqs) <= 1:
            return [self.score(r) for r in reqs]
        if self._pool is None:
            self._pool = ThreadPoolExecutor(self.parallelism, thread_name_prefix="reqgrid")
        # map() yields in submission order, so concurrency cannot reorder results
        return list(self._pool.map(self.score, reqs))

    def embed(self, texts: Sequence[str]) -> EmbedResponse:
        return embed_texts(self.url, texts, self.retries, self.backoff, self.timeout, self._session())

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None


# -- mock server --------------------------------------------------------------

def make_handler(backend):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            log.debug("mock-serve: " + fmt, *args)

        def _reply(self, status: int, payload: dict):
            body = dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            try:
                obj = json.loads(self.rfile.read(length).decode("utf-8"))
                if self.path == "/v1/score":
                    out = backend.score(ScoreRequest.from_payload(obj)).to_payload()
                elif self.path == "/v1/embed":
                    out = backend.embed(obj["texts"]).to_payload()
                else:
                    self._reply(404, {"error": f"unknown path {self.path}"})
                    return
            except (ValueError, KeyError, TypeError) as exc:
                self._reply(400, {"error": str(exc)})
                return
            self._reply(200, out)

    return Handler


def make_server(backend, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Bind (port 0 picks a free one) without starting; call ``serve_forever``."""
    server = ThreadingHTTPServer((host, port), make_handler(backend))
    server.daemon_threads = True
    return server
