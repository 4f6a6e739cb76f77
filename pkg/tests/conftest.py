import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def fixture_paths() -> dict[str, Path]:
    return {name: DATA_DIR / f"fixture_{name}.conll" for name in ("train", "dev", "test")}


class StubTranslationServer:
    """Local identity translation service that counts requests."""

    def __init__(self, fail_first: int = 0, transform=None):
        self.request_count = 0
        self.seen_auth: list[str | None] = []
        self._fail_first = fail_first
        self._transform = transform or (lambda t: t)
        self._lock = threading.Lock()

        stub = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
                with stub._lock:
                    stub.request_count += 1
                    stub.seen_auth.append(self.headers.get("Authorization"))
                    should_fail = stub._fail_first > 0
                    if should_fail:
                        stub._fail_first -= 1
                if should_fail:
                    self.send_response(503)
                    self.end_headers()
                    return
                payload = json.dumps(
                    {"translations": [stub._transform(t) for t in body["texts"]]}
                ).encode("utf-8")
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args):
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self._server.server_port}/translate"
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    def close(self):
        self._server.shutdown()
        self._server.server_close()


@pytest.fixture
def stub_server():
    servers = []

    def make(**kwargs) -> StubTranslationServer:
        server = StubTranslationServer(**kwargs)
        servers.append(server)
        return server

    yield make
    for server in servers:
        server.close()
