"""Fetch, validate and cache newform coefficients from the LMFDB HTTP API."""

from __future__ import annotations

import json
import logging
import os
import re
import tempfile
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .errors import NotFoundError, OfflineError, ParseError, RejectedPayloadError
from .lfunc import ModularForm, parse_coefficients, primes_upto, serialize_coefficients

logger = logging.getLogger(__name__)

DEFAULT_URL_TEMPLATE = (
    "https://www.lmfdb.org/api/mf_newforms/?label={label}&_format=json&_fields=label,level,weight,dim,traces"
)
LABEL_RE = re.compile(r"^(\d+)\.(\d+)\.([a-z]+)\.([a-z]+)$")

# transport(url, timeout) -> response body; raises urllib.error.URLError/HTTPError or OSError
Transport = Callable[[str, float], bytes]


def urllib_transport(url: str, timeout: float) -> bytes:
    req = urllib.request.Request(url, headers={"User-Agent": "periodlab"})
    with urllib.request.urlopen(req, timeout=timeout) as resp:
        return resp.read()


def default_cache_dir() -> Path:
    return Path(os.environ.get("PERIODLAB_CACHE", "cache"))


@dataclass
class ClientConfig:
    lmfdb_url_template: str = field(default_factory=lambda: os.environ.get("PERIODLAB_LMFDB_URL", DEFAULT_URL_TEMPLATE))
    offline: bool = False
    cache_dir: Path = field(default_factory=default_cache_dir)
    timeout: float = 30.0


@dataclass(frozen=True)
class CacheEntry:
    label: str
    fetched_at: str
    payload: str
    source_url: str


def parse_label(label: str) -> tuple[int, int]:
    m = LABEL_RE.match(label)
    if not m:
        raise ValueError(f"malformed newform label {label!r} (expected N.k.x.y)")
    return int(m.group(1)), int(m.group(2))


def validate_form(form: ModularForm, label: str, upto: int | None = None) -> None:
    """Local sanity checks; raises RejectedPayloadError."""
    level, weight = parse_label(label)
    if form.label != label:
        raise RejectedPayloadError(f"payload is for {form.label}, requested {label}")
    if (form.level, form.weight) != (level, weight):
        raise RejectedPayloadError(f"level/weight {form.level}/{form.weight} contradict label {label}")
    bad = form.deligne_bound_violations()
    if bad:
        raise RejectedPayloadError(f"Deligne bound fails at p = {bad[:10]}")
    for p, a in form.ap.items():
        if level % p == 0 and level % (p * p) != 0 and a * a != p ** (weight - 2):
            raise RejectedPayloadError(f"a_{p} = {a} at a multiplicative prime should be +-{p}^{(weight - 2) // 2}")
    if upto is not None:
        missing = [p for p in primes_upto(upto) if p not in form.ap]
        if missing:
            raise RejectedPayloadError(f"payload lacks a_p for p in {missing[:10]}")


def transform_response(body: bytes, label: str, upto: int) -> ModularForm:
    """LMFDB JSON (traces list, a_1 first) -> ModularForm."""
    try:
        doc = json.loads(body)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise RejectedPayloadError(f"response is not JSON: {exc}") from None
    rows = doc.get("data") if isinstance(doc, dict) else None
    if not rows:
        raise NotFoundError(f"LMFDB has no newform {label}")
    row = rows[0]
    if row.get("dim", 1) != 1:
        raise RejectedPayloadError(f"{label} has dimension {row.get('dim')}; only rational forms are supported")
    traces = row.get("traces")
    if not isinstance(traces, list) or not traces or not all(isinstance(t, int) for t in traces):
        raise RejectedPayloadError("traces missing or not integers")
    if traces[0] != 1:
        raise RejectedPayloadError(f"a_1 = {traces[0]}, expected 1")
    ap = {p: traces[p - 1] for p in primes_upto(min(upto, len(traces)))}
    try:
        form = ModularForm(row.get("label", label), int(row["weight"]), int(row["level"]), ap)
    except (KeyError, TypeError, ValueError):
        raise RejectedPayloadError("weight/level missing from response") from None
    validate_form(form, label, upto)
    return form


class LMFDBClient:
    def __init__(self, config: ClientConfig | None = None, transport: Transport | None = None):
        self.config = config or ClientConfig()
        self.transport = transport or urllib_transport
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def cache_path(self, label: str) -> Path:
        return Path(self.config.cache_dir) / f"{label}.coeffs"

    def _lock(self, label: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(label, threading.Lock())

    def read_cache(self, label: str, upto: int) -> str | None:
        path = self.cache_path(label)
        if not path.exists():
            return None
        text = path.read_text(encoding="utf-8")
        try:
            form = parse_coefficients(text)
            validate_form(form, label, upto)
        except (ParseError, RejectedPayloadError) as exc:
            logger.info("cache for %s not usable: %s", label, exc)
            return None
        return text

    def fetch_coefficients(self, label: str, upto: int) -> str:
        """Coefficient-file text for ``label`` with a_p for all p <= upto."""
        parse_label(label)
        with self._lock(label):
            cached = self.read_cache(label, upto)
            if cached is not None:
                return cached
            if self.config.offline:
                raise OfflineError(f"offline and no usable cache; populate {self.cache_path(label)} manually")
            url = self.config.lmfdb_url_template.format(label=label)
            try:
                body = self.transport(url, self.config.timeout)
            except urllib.error.HTTPError as exc:
                if exc.code == 404:
                    raise NotFoundError(f"LMFDB has no newform {label}") from None
                raise OfflineError(f"HTTP {exc.code} from {url}; populate {self.cache_path(label)} manually") from None
            except (urllib.error.URLError, OSError) as exc:
                raise OfflineError(f"cannot reach {url} ({exc}); populate {self.cache_path(label)} manually") from None
            form = transform_response(body, label, upto)
            entry = CacheEntry(label, datetime.now(timezone.utc).isoformat(timespec="seconds"), serialize_coefficients(form), url)
            self.write_cache(entry)
            return entry.payload

    def write_cache(self, entry: CacheEntry) -> Path:
        """Write-then-rename so readers never see a partial file."""
        path = self.cache_path(entry.label)
        path.parent.mkdir(parents=True, exist_ok=True)
        text = f"# source {entry.source_url}\n# fetched {entry.fetched_at}\n" + entry.payload
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{entry.label}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return path


def fetch_coefficients(label: str, upto: int, config: ClientConfig | None = None, transport: Transport | None = None) -> str:
    return LMFDBClient(config, transport).fetch_coefficients(label, upto)
