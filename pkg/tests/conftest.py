import json
import threading
import urllib.error
import urllib.request

import numpy as np
import pytest

from watson.freqtable import FreqTable, _make
from watson.ingest import Schema, Variable
from watson.server import Registry, WatsonServer


def make_table(spec: dict[str, list[str]], counts, scores: dict | None = None) -> FreqTable:
    """Hand-build a FreqTable from {var: [categories]} and a nested count list."""
    scores = scores or {}
    variables = tuple(
        Variable(name=name, categories=tuple(cats),
                 scores=tuple(scores[name]) if name in scores else None)
        for name, cats in spec.items()
    )
    return _make(Schema(variables=variables), np.asarray(counts, dtype=np.int64))


def random_table(rng, n_vars=2, max_cats=4, max_count=20, names=None) -> FreqTable:
    names = names or [f"v{i}" for i in range(n_vars)]
    sizes = [int(rng.integers(2, max_cats + 1)) for _ in range(n_vars)]
    variables = tuple(
        Variable(name=names[i], categories=tuple(f"{names[i]}c{j}" for j in range(sizes[i])))
        for i in range(n_vars)
    )
    counts = rng.integers(0, max_count, size=sizes)
    return _make(Schema(variables=variables), counts.astype(np.int64))


def http(method: str, url: str, body=None, content_type="application/json"):
    """Tiny HTTP client returning (status, headers, body_bytes)."""
    data = None
    if body is not None:
        data = json.dumps(body).encode() if isinstance(body, dict) else body
    req = urllib.request.Request(url, method=method, data=data)
    if data is not None:
        req.add_header("Content-Type", content_type)
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, dict(resp.headers), resp.read()
    except urllib.error.HTTPError as err:
        return err.code, dict(err.headers), err.read()


@pytest.fixture()
def live_server():
    registry = Registry()
    server = WatsonServer(("127.0.0.1", 0), registry)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    yield base, registry
    server.shutdown()
    server.server_close()
    thread.join(timeout=5)
