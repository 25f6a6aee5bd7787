import threading

import pytest
import requests

from virtrep.gripper import GripperApp
from virtrep.httpd import AppServer
from virtrep.server import Response, VrServerApp
from virtrep.store import ResourceStore
from virtrep.turtle import serialize_turtle
from virtrep.vocab import MT_N3, MT_SPARQL_QUERY, MT_TURTLE, TYPE_VIRTUAL_RESOURCE, TYPE_VR_CONTAINER


class StaticApp:
    """Serves a fixed path->turtle-document map; handy upstream stub."""

    def __init__(self, documents=None):
        self.documents = documents or {}
        self.hits = []
        self.lock = threading.Lock()

    def set_graph(self, path, graph, prefixes=None):
        self.documents[path] = serialize_turtle(graph, prefixes or {})

    def handle(self, method, path, headers, body):
        with self.lock:
            self.hits.append((method, path))
        doc = self.documents.get(path)
        if doc is None:
            return Response(404, {"Content-Type": "text/plain"}, b"not here\n")
        return Response(200, {"Content-Type": MT_TURTLE}, doc.encode("utf-8"))


@pytest.fixture
def http_server():
    """Factory fixture: spin up AppServers on ephemeral ports, torn down
    after the test."""
    servers = []

    def start(app):
        server = AppServer(app, "127.0.0.1", 0)
        server.serve_in_background()
        servers.append(server)
        return server

    yield start
    for server in servers:
        server.shutdown()
        server.server_close()


@pytest.fixture
def gripper_server(http_server):
    return http_server(GripperApp())


@pytest.fixture
def vr_server(http_server):
    return http_server(VrServerApp(ResourceStore("/ldp")))


def deploy_vr(base, container_name, program, query, vr_name="vr", simulates=None):
    """The documented POST sequence; returns (container_iri, vr_iri)."""
    r = requests.post(
        f"{base}/ldp",
        headers={"Link": f'<{TYPE_VR_CONTAINER}>; rel="type"', "Slug": container_name},
    )
    assert r.status_code == 201, r.text
    container = r.headers["Location"]
    r = requests.post(container, data=program.encode(), headers={"Content-Type": MT_N3, "Slug": "program"})
    assert r.status_code == 201, r.text
    r = requests.post(
        container, data=query.encode(), headers={"Content-Type": MT_SPARQL_QUERY, "Slug": "query"}
    )
    assert r.status_code == 201, r.text
    headers = {"Link": f'<{TYPE_VIRTUAL_RESOURCE}>; rel="type"', "Slug": vr_name}
    r = requests.post(container, headers=headers)
    assert r.status_code == 201, r.text
    vr_iri = r.headers["Location"]
    if simulates:
        g = f"<{vr_iri}> <http://purl.org/virtrep#simulates> <{simulates}> ."
        r = requests.put(container, data=g.encode(), headers={"Content-Type": MT_TURTLE})
        assert r.status_code == 204, r.text
    return container, vr_iri


def drive_arm(gripper_base, changes, session=None):
    """Issue ``changes`` accepted state-changing PUTs on the arm."""
    http = session or requests
    r = http.get(f"{gripper_base}/gripper/arm/")
    current = 'down' if '"down"' in r.text else 'up'
    for _ in range(changes):
        current = "down" if current == "up" else "up"
        body = f'<{gripper_base}/gripper/arm/> <https://w3id.org/saref#hasState> "{current}" .'
        r = http.put(
            f"{gripper_base}/gripper/arm/", data=body.encode(), headers={"Content-Type": MT_TURTLE}
        )
        assert r.status_code == 204, r.text
