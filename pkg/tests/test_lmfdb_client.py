import io
import json
import threading
import urllib.error

import pytest

from periodlab.errors import NotFoundError, OfflineError, RejectedPayloadError
from periodlab.lfunc import parse_coefficients
from periodlab.lmfdb_client import ClientConfig, LMFDBClient, default_cache_dir, parse_label, transform_response

LABEL = "14.2.a.a"


def body_for(form, n=300, **overrides):
    row = {"label": form.label, "level": form.level, "weight": form.weight, "dim": 1, "traces": form.coefficients(n)[1:]}
    row.update(overrides)
    return json.dumps({"data": [row]}).encode()


class Stub:
    def __init__(self, body=None, error=None):
        self.body, self.error, self.urls = body, error, []

    def __call__(self, url, timeout):
        self.urls.append(url)
        if self.error:
            raise self.error
        return self.body


def client(tmp_path, stub, **kw):
    return LMFDBClient(ClientConfig(cache_dir=tmp_path, **kw), stub)


def test_fetch_writes_cache_then_hits_it(tmp_path, f2):
    stub = Stub(body_for(f2))
    c = client(tmp_path, stub)
    text = c.fetch_coefficients(LABEL, 200)
    form = parse_coefficients(text)
    assert form.coefficients(200) == f2.coefficients(200)
    assert len(stub.urls) == 1 and "label=14.2.a.a" in stub.urls[0]
    cached = c.cache_path(LABEL).read_text()
    assert cached.startswith("# source https://www.lmfdb.org/")
    # second call never touches the transport
    again = client(tmp_path, Stub(error=AssertionError("network used")))
    assert parse_coefficients(again.fetch_coefficients(LABEL, 200)).ap == form.ap
    assert [p.name for p in tmp_path.iterdir()] == ["14.2.a.a.coeffs"]


def test_short_cache_triggers_refetch(tmp_path, f2):
    client(tmp_path, Stub(body_for(f2, n=50))).fetch_coefficients(LABEL, 50)
    stub = Stub(body_for(f2))
    client(tmp_path, stub).fetch_coefficients(LABEL, 200)
    assert len(stub.urls) == 1


def test_rejected_payload_leaves_cache_untouched(tmp_path, f2):
    client(tmp_path, Stub(body_for(f2, n=50))).fetch_coefficients(LABEL, 50)
    before = (tmp_path / "14.2.a.a.coeffs").read_bytes()
    traces = f2.coefficients(300)[1:]
    traces[12] = 1000  # a_13 beyond the Deligne bound
    with pytest.raises(RejectedPayloadError):
        client(tmp_path, Stub(body_for(f2, traces=traces))).fetch_coefficients(LABEL, 200)
    assert (tmp_path / "14.2.a.a.coeffs").read_bytes() == before
    assert len(list(tmp_path.iterdir())) == 1


@pytest.mark.parametrize(
    "overrides",
    [{"weight": 4}, {"dim": 2}, {"traces": [2, 0, 0]}, {"traces": "abc"}, {"label": "14.2.a.b"}],
)
def test_transform_rejects(f2, overrides):
    with pytest.raises(RejectedPayloadError):
        transform_response(body_for(f2, **overrides), LABEL, 100)


def test_transform_rejects_bad_multiplicative_coefficient(f2):
    traces = f2.coefficients(300)[1:]
    traces[1] = 0  # a_2 must be +-1 at a multiplicative prime
    with pytest.raises(RejectedPayloadError):
        transform_response(body_for(f2, traces=traces), LABEL, 100)


def test_transform_rejects_non_json():
    with pytest.raises(RejectedPayloadError):
        transform_response(b"<html>", LABEL, 10)


def test_offline_without_cache(tmp_path):
    with pytest.raises(OfflineError, match="14.2.a.a.coeffs"):
        client(tmp_path, Stub(error=AssertionError()), offline=True).fetch_coefficients(LABEL, 50)


def test_offline_uses_cache(tmp_path, f2):
    client(tmp_path, Stub(body_for(f2))).fetch_coefficients(LABEL, 100)
    assert client(tmp_path, Stub(error=AssertionError()), offline=True).fetch_coefficients(LABEL, 100)


def test_not_found(tmp_path):
    err = urllib.error.HTTPError("u", 404, "Not Found", {}, io.BytesIO())
    with pytest.raises(NotFoundError):
        client(tmp_path, Stub(error=err)).fetch_coefficients("11.2.a.z", 10)
    with pytest.raises(NotFoundError):
        client(tmp_path, Stub(json.dumps({"data": []}).encode())).fetch_coefficients("11.2.a.z", 10)


@pytest.mark.parametrize(
    "error",
    [urllib.error.URLError("Name or service not known"), TimeoutError("timed out"),
     urllib.error.HTTPError("u", 503, "Busy", {}, io.BytesIO())],
)
def test_network_failures_are_offline_errors(tmp_path, error):
    with pytest.raises(OfflineError, match="populate"):
        client(tmp_path, Stub(error=error)).fetch_coefficients(LABEL, 10)


def test_url_template_is_configurable(tmp_path, f2):
    stub = Stub(body_for(f2))
    client(tmp_path, stub, lmfdb_url_template="http://mirror.test/{label}.json").fetch_coefficients(LABEL, 50)
    assert stub.urls == ["http://mirror.test/14.2.a.a.json"]


def test_labels():
    assert parse_label("14.4.a.a") == (14, 4)
    for bad in ("14.4.a", "14-4-a-a", "x.4.a.a"):
        with pytest.raises(ValueError):
            parse_label(bad)


def test_cache_dir_env(monkeypatch, tmp_path):
    monkeypatch.setenv("PERIODLAB_CACHE", str(tmp_path / "c"))
    assert default_cache_dir() == tmp_path / "c"
    assert ClientConfig().cache_dir == tmp_path / "c"


def test_url_template_env(monkeypatch):
    monkeypatch.setenv("PERIODLAB_LMFDB_URL", "http://mirror.test/{label}")
    assert ClientConfig().lmfdb_url_template == "http://mirror.test/{label}"


def test_concurrent_fetches_write_once(tmp_path, f2):
    stub = Stub(body_for(f2))
    c = client(tmp_path, stub)
    threads = [threading.Thread(target=c.fetch_coefficients, args=(LABEL, 100)) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(stub.urls) == 1
    assert [p.name for p in tmp_path.iterdir()] == ["14.2.a.a.coeffs"]
