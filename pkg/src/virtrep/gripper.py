"""Mock IoT device: the demo gripper with a writable arm and claw.

Each component exposes its state (``saref:hasState``) and a monotonic
action counter; an accepted state-changing PUT increments the counter by
exactly one, a same-state PUT is accepted without counting. The counter is
what the abrasion heuristics consume upstream.
"""

from __future__ import annotations

import threading
from typing import Optional

from .errors import ParseError
from .server import Response, _accept_allows, _media_type
from .store import normalize_path
from .terms import Graph, IRI, Literal, Triple
from .turtle import parse_turtle, serialize_turtle
from .vocab import (
    DEFAULT_PREFIXES,
    DEMO_ACTION_COUNT,
    DEMO_NS,
    LDP_BASIC_CONTAINER,
    LDP_CONTAINS,
    MT_TURTLE,
    RDF_TYPE,
    SAREF_HAS_STATE,
    VR_ERROR_DETAIL,
    VR_ERROR_KIND,
    XSD_INTEGER,
)


class Component:
    def __init__(self, name: str, type_iri: str, legal_states: tuple[str, ...]):
        self.name = name
        self.type_iri = type_iri
        self.legal_states = legal_states
        self.state = legal_states[0]
        self.action_count = 0
        self.lock = threading.Lock()

    def snapshot(self) -> tuple[str, int]:
        with self.lock:
            return self.state, self.action_count

    def put_state(self, new_state: str) -> bool:
        """Apply an accepted state write; True when it counted as an action."""
        with self.lock:
            if new_state != self.state:
                self.state = new_state
                self.action_count += 1
                return True
            return False


class GripperApp:
    """HTTP app for ``/gripper/``, ``/gripper/arm/`` and ``/gripper/claw/``."""

    def __init__(self, default_host: str = "localhost"):
        self.default_host = default_host
        self.components = {
            "arm": Component("arm", DEMO_NS + "GripperArm", ("up", "down")),
            "claw": Component("claw", DEMO_NS + "GripperClaw", ("opened", "closed")),
        }

    def handle(self, method: str, path: str, headers: dict[str, str], body: bytes) -> Response:
        headers = {k.lower(): v for k, v in headers.items()}
        host = headers.get("host", self.default_host)
        norm = normalize_path(path)
        if norm == "/gripper":
            if method in ("GET", "HEAD"):
                response = self.get_container(headers.get("accept"), host)
            else:
                response = self._error(405, "MethodNotAllowed", "the gripper container is read-only",
                                       "/gripper/", host, {"Allow": "GET, HEAD"})
        elif norm in ("/gripper/arm", "/gripper/claw"):
            name = norm.rsplit("/", 1)[1]
            if method in ("GET", "HEAD"):
                response = self.get_component(name, headers.get("accept"), host)
            elif method == "PUT":
                response = self.put_component(name, body, headers.get("content-type"), host)
            else:
                response = self._error(405, "MethodNotAllowed", "components support GET and PUT",
                                       f"/gripper/{name}/", host, {"Allow": "GET, HEAD, PUT"})
        else:
            response = self._error(404, "NotFound", "no such resource", path, host)
        if method == "HEAD":
            response.body = b""
        return response

    def _iri(self, host: str, path: str) -> str:
        return f"http://{host}{path}"

    def _error(self, status, kind, detail, path, host, extra: Optional[dict] = None) -> Response:
        subject = IRI(self._iri(host, path))
        graph = Graph([
            Triple(subject, IRI(VR_ERROR_KIND), Literal(kind)),
            Triple(subject, IRI(VR_ERROR_DETAIL), Literal(detail)),
        ])
        headers = {"Content-Type": MT_TURTLE}
        if extra:
            headers.update(extra)
        return Response(status, headers, serialize_turtle(graph, DEFAULT_PREFIXES).encode("utf-8"))

    def get_container(self, accept: Optional[str], host: str) -> Response:
        if not _accept_allows(accept, MT_TURTLE):
            return self._error(406, "NotAcceptable", "only text/turtle is served", "/gripper/", host)
        subject = IRI(self._iri(host, "/gripper/"))
        triples = [
            Triple(subject, IRI(RDF_TYPE), IRI(LDP_BASIC_CONTAINER)),
            Triple(subject, IRI(RDF_TYPE), IRI(DEMO_NS + "Gripper")),
        ]
        for name in self.components:
            triples.append(Triple(subject, IRI(LDP_CONTAINS), IRI(self._iri(host, f"/gripper/{name}/"))))
        body = serialize_turtle(Graph(triples), DEFAULT_PREFIXES).encode("utf-8")
        return Response(200, {"Content-Type": MT_TURTLE, "Cache-Control": "no-store"}, body)

    def get_component(self, name: str, accept: Optional[str], host: str) -> Response:
        if not _accept_allows(accept, MT_TURTLE):
            return self._error(406, "NotAcceptable", "only text/turtle is served", f"/gripper/{name}/", host)
        component = self.components[name]
        state, count = component.snapshot()
        subject = IRI(self._iri(host, f"/gripper/{name}/"))
        graph = Graph([
            Triple(subject, IRI(RDF_TYPE), IRI(component.type_iri)),
            Triple(subject, IRI(SAREF_HAS_STATE), Literal(state)),
            Triple(subject, IRI(DEMO_ACTION_COUNT), Literal(str(count), XSD_INTEGER)),
        ])
        body = serialize_turtle(graph, DEFAULT_PREFIXES).encode("utf-8")
        return Response(200, {"Content-Type": MT_TURTLE, "Cache-Control": "no-store"}, body)

    def put_component(self, name: str, body: bytes, content_type: Optional[str], host: str) -> Response:
        path = f"/gripper/{name}/"
        if _media_type(content_type) != MT_TURTLE:
            return self._error(400, "InvalidBody", "state writes are text/turtle", path, host)
        base = self._iri(host, path)
        try:
            graph = parse_turtle(body.decode("utf-8"), base=base)
        except (ParseError, UnicodeDecodeError) as exc:
            return self._error(400, "InvalidBody", str(exc), path, host)

        writes = [t for t in graph if t.predicate.value == SAREF_HAS_STATE]
        if len(writes) != 1:
            return self._error(
                400, "InvalidBody",
                f"expected exactly one saref:hasState triple, found {len(writes)}", path, host,
            )
        triple = writes[0]
        accepted_subjects = (base, base.rstrip("/"))
        if not (isinstance(triple.subject, IRI) and triple.subject.value in accepted_subjects):
            return self._error(400, "InvalidBody", "the hasState subject must be this component", path, host)
        if not isinstance(triple.object, Literal):
            return self._error(400, "InvalidBody", "the new state must be a string literal", path, host)

        component = self.components[name]
        new_state = triple.object.lexical
        if new_state not in component.legal_states:
            legal = "/".join(component.legal_states)
            return self._error(
                422, "IllegalState", f"{new_state!r} is not one of {legal}", path, host
            )
        component.put_state(new_state)
        return Response(204, {})
