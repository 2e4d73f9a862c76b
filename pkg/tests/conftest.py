import json
import random
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from pathlib import Path
from urllib.parse import parse_qs

import pytest

from wikirank.graph import SemanticGraph

DATA = Path(str(resources.files("wikirank") / "data"))
SAMPLE_DOC = DATA / "sample_document.jsonl"
SAMPLE_GAZETTEER = DATA / "sample_gazetteer.tsv"
TEST_DATA = Path(__file__).parent / "data"


def random_graph(rng: random.Random, max_phrases=12, max_concepts=10, max_weight=16, density=None):
    n_p = rng.randint(1, max_phrases)
    n_c = rng.randint(0, max_concepts)
    p_edge = density if density is not None else rng.uniform(0.1, 0.5)
    weights = {f"c{j}": rng.randint(1, max_weight) for j in range(n_c)}
    edges = [(f"p{i}", f"c{j}") for i in range(n_p) for j in range(n_c) if rng.random() < p_edge]
    return SemanticGraph.from_parts(((f"p{i}", f"phrase {i}", 10 * i) for i in range(n_p)), weights, edges)


def small_graph():
    """p1-{c1}, p2-{c1,c2}, p3-{c2}; w(c1)=4, w(c2)=3."""
    return SemanticGraph.from_parts(
        [("p1", "p1", 0), ("p2", "p2", 10), ("p3", "p3", 20)],
        {"c1": 4, "c2": 3},
        [("p1", "c1"), ("p2", "c1"), ("p2", "c2"), ("p3", "c2")],
    )


@pytest.fixture
def rng():
    return random.Random(20240601)


class StubTagMe:
    """Scripted TagMe server. Each scripted step is ("status", code, body),
    ("drop",) to close the connection without answering, or ("ok", payload)."""

    def __init__(self):
        self.script = []
        self.default = ("ok", {"annotations": []})
        self.requests = []
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                form = {k: v[0] for k, v in parse_qs(self.rfile.read(length).decode()).items()}
                stub.requests.append((self.path, form))
                step = stub.script.pop(0) if stub.script else stub.default
                if step[0] == "drop":
                    self.close_connection = True
                    self.connection.shutdown(2)
                    return
                if step[0] == "status":
                    body = step[2].encode()
                    self.send_response(step[1])
                else:
                    payload = step[1](form) if callable(step[1]) else step[1]
                    body = json.dumps(payload).encode()
                    self.send_response(200)
                    self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, args=(0.05,), daemon=True)
        self.thread.start()

    @property
    def endpoint(self):
        host, port = self.server.server_address
        return f"http://{host}:{port}/tagme"

    def close(self):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def tagme_stub():
    stub = StubTagMe()
    yield stub
    stub.close()


ACCEPTANCE: list[str] = []


def record_criterion(name: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
