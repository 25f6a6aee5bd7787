"""The virtual-representation server: LDP-subset CRUD over the resource
store plus the on-GET resolution pipeline.

A GET on a virtual resource snapshots its container's configuration under
the store lock (a program PUT swaps one record atomically, so every
resolution sees an entirely-old or entirely-new configuration), then runs
collection, forward chaining and the CONSTRUCT query outside any lock.
Configurations are validated on write: a PUT or POST whose body does not
parse leaves the stored state untouched and the live representation
serving the previous logic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from . import store as st
from .errors import (
    AmbiguousConfiguration,
    CollectionFailed,
    ConfigurationIncomplete,
    NonTerminationError,
    ParseError,
    SafetyError,
)
from .fetch import DataCollector, FetchPolicy, ON_FAILURE_ABORT, ON_FAILURE_PARTIAL
from .n3 import parse_program
from .rules import evaluate
from .sparql import execute_construct, parse_construct
from .store import (
    BASIC_CONTAINER,
    NON_RDF_SOURCE,
    RDF_SOURCE,
    ResourceRecord,
    ResourceStore,
    VIRTUAL_RESOURCE,
    VR_CONTAINER,
    normalize_path,
    sanitize_slug,
)
from .terms import EMPTY_GRAPH, Graph, IRI, Literal, Triple
from .turtle import parse_turtle, serialize_turtle
from .vocab import (
    DEFAULT_PREFIXES,
    LDP_BASIC_CONTAINER,
    LDP_CONTAINS,
    LDP_NON_RDF_SOURCE,
    LDP_RDF_SOURCE,
    LDP_RESOURCE,
    MT_N3,
    MT_SPARQL_QUERY,
    MT_TURTLE,
    TYPE_VIRTUAL_RESOURCE,
    TYPE_VR_CONTAINER,
    VR_ERROR_DETAIL,
    VR_ERROR_KIND,
    VR_HAS_PROGRAM,
    VR_HAS_QUERY,
    VR_ON_FAILURE,
    VR_SIMULATES,
    VR_TIMEOUT_MS,
)


@dataclass
class Response:
    status: int
    headers: dict[str, str] = field(default_factory=dict)
    body: bytes = b""


@dataclass
class VrContainerConfig:
    container_path: str
    vr_path: str
    program_path: str
    query_path: str
    fetch_policy: FetchPolicy


_LINK_TYPE_RE = re.compile(r"<([^>]*)>\s*;\s*rel\s*=\s*\"?type\"?", re.IGNORECASE)


def _link_types(header: Optional[str]) -> set[str]:
    if not header:
        return set()
    return set(_LINK_TYPE_RE.findall(header))


def _media_type(content_type: Optional[str]) -> Optional[str]:
    if not content_type:
        return None
    return content_type.split(";", 1)[0].strip().lower()


def _accept_allows(accept: Optional[str], offered: str) -> bool:
    if not accept or not accept.strip():
        return True
    major = offered.split("/", 1)[0]
    for part in accept.split(","):
        fields = part.split(";")
        mt = fields[0].strip().lower()
        q = 1.0
        for param in fields[1:]:
            param = param.strip()
            if param.startswith("q="):
                try:
                    q = float(param[2:])
                except ValueError:
                    q = 0.0
        if q <= 0:
            continue
        if mt in ("*/*", offered, f"{major}/*"):
            return True
    return False


class VrServerApp:
    def __init__(
        self,
        resource_store: Optional[ResourceStore] = None,
        default_policy: Optional[FetchPolicy] = None,
        default_host: str = "localhost",
    ):
        self.store = resource_store or ResourceStore()
        self.default_policy = default_policy or FetchPolicy()
        self.default_host = default_host

    # --- plumbing ---------------------------------------------------------

    def handle(self, method: str, path: str, headers: dict[str, str], body: bytes) -> Response:
        headers = {k.lower(): v for k, v in headers.items()}
        host = headers.get("host", self.default_host)
        path = normalize_path(path)
        if method == "GET" or method == "HEAD":
            response = self.handle_get(path, headers.get("accept"), host)
            if method == "HEAD":
                response.body = b""
            return response
        if method == "PUT":
            return self.handle_put(
                path, body, headers.get("content-type"), headers.get("if-match"), host
            )
        if method == "POST":
            return self.handle_post(
                path, body, headers.get("content-type"), headers.get("slug"),
                headers.get("link"), host,
            )
        if method == "DELETE":
            return self.handle_delete(path, host)
        return self._error(405, "MethodNotAllowed", f"{method} is not supported", path, host,
                           extra_headers={"Allow": "GET, HEAD, PUT, POST, DELETE"})

    def iri(self, host: str, path: str) -> str:
        return f"http://{host}{path}"

    def _turtle(self, graph: Graph) -> bytes:
        return serialize_turtle(graph, DEFAULT_PREFIXES).encode("utf-8")

    def _error(
        self,
        status: int,
        kind: str,
        detail: str,
        path: str,
        host: str,
        extra_headers: Optional[dict] = None,
    ) -> Response:
        subject = IRI(self.iri(host, path))
        graph = Graph(
            [
                Triple(subject, IRI(VR_ERROR_KIND), Literal(kind)),
                Triple(subject, IRI(VR_ERROR_DETAIL), Literal(detail)),
            ]
        )
        headers = {"Content-Type": MT_TURTLE}
        if extra_headers:
            headers.update(extra_headers)
        return Response(status, headers, self._turtle(graph))

    def _type_links(self, record: ResourceRecord) -> str:
        types = [LDP_RESOURCE]
        if record.kind in (RDF_SOURCE, BASIC_CONTAINER, VR_CONTAINER, VIRTUAL_RESOURCE):
            types.append(LDP_RDF_SOURCE)
        else:
            types.append(LDP_NON_RDF_SOURCE)
        if record.is_container:
            types.append(LDP_BASIC_CONTAINER)
        if record.kind == VR_CONTAINER:
            types.append(TYPE_VR_CONTAINER)
        if record.kind == VIRTUAL_RESOURCE:
            types.append(TYPE_VIRTUAL_RESOURCE)
        return ", ".join(f'<{t}>; rel="type"' for t in types)

    # --- GET ----------------------------------------------------------------

    def handle_get(self, path: str, accept: Optional[str], host: str) -> Response:
        with self.store.lock:
            record = self.store.get(path)
            if record is None:
                return self._error(404, "NotFound", "no such resource", path, host)
            if record.kind == NON_RDF_SOURCE:
                if not _accept_allows(accept, record.media_type or "application/octet-stream"):
                    return self._error(406, "NotAcceptable", f"resource is {record.media_type}", path, host)
                return Response(
                    200,
                    {
                        "Content-Type": record.media_type or "application/octet-stream",
                        "ETag": record.etag,
                        "Link": self._type_links(record),
                    },
                    record.data,
                )
            if not _accept_allows(accept, MT_TURTLE):
                return self._error(406, "NotAcceptable", "only text/turtle is served", path, host)
            if record.kind in (RDF_SOURCE, BASIC_CONTAINER, VR_CONTAINER):
                graph = record.graph
                if record.is_container:
                    graph = graph.with_triples(self._container_triples(record, host))
                return Response(
                    200,
                    {"Content-Type": MT_TURTLE, "ETag": record.etag, "Link": self._type_links(record)},
                    self._turtle(graph),
                )
            # virtual resource: snapshot config under the lock, then compute
            try:
                snapshot = self._config_snapshot(record)
            except ConfigurationIncomplete as exc:
                return self._error(409, "ConfigurationIncomplete", str(exc), path, host)
            except AmbiguousConfiguration as exc:
                return self._error(409, "AmbiguousConfiguration", str(exc), path, host)
            etag = record.etag
            link = self._type_links(record)

        try:
            body = self.resolve_vr_snapshot(snapshot, host)
        except CollectionFailed as exc:
            return self._error(502, "CollectionFailed", str(exc), path, host)
        except NonTerminationError as exc:
            return self._error(500, "NonTermination", str(exc), path, host)
        except (ParseError, SafetyError) as exc:
            return self._error(500, "InvalidConfiguration", str(exc), path, host)
        return Response(
            200,
            {
                "Content-Type": MT_TURTLE,
                "ETag": etag,
                "Link": link,
                "Cache-Control": "no-store",
            },
            self._turtle(body),
        )

    def _container_triples(self, record: ResourceRecord, host: str) -> list[Triple]:
        subject = IRI(self.iri(host, record.path))
        triples = [
            Triple(subject, IRI(LDP_CONTAINS), IRI(self.iri(host, child)))
            for child in record.children
        ]
        if record.kind == VR_CONTAINER:
            roles = self._configuration_roles(record)
            vr = roles.get("vr")
            if vr:
                vr_iri = IRI(self.iri(host, vr))
                if roles.get("program"):
                    triples.append(Triple(vr_iri, IRI(VR_HAS_PROGRAM), IRI(self.iri(host, roles["program"]))))
                if roles.get("query"):
                    triples.append(Triple(vr_iri, IRI(VR_HAS_QUERY), IRI(self.iri(host, roles["query"]))))
        return triples

    # --- configuration location -------------------------------------------

    def _configuration_roles(self, container: ResourceRecord) -> dict[str, Optional[str]]:
        """Role -> child path map; raises AmbiguousConfiguration on a
        duplicated role. Missing roles map to None."""
        roles: dict[str, Optional[str]] = {"vr": None, "program": None, "query": None}
        for child_path in container.children:
            child = self.store.get(child_path)
            if child is None:
                continue
            role = None
            if child.kind == VIRTUAL_RESOURCE:
                role = "vr"
            elif child.kind == NON_RDF_SOURCE and child.media_type == MT_N3:
                role = "program"
            elif child.kind == NON_RDF_SOURCE and child.media_type == MT_SPARQL_QUERY:
                role = "query"
            if role:
                if roles[role] is not None:
                    raise AmbiguousConfiguration(role)
                roles[role] = child_path
        return roles

    def locate_configuration(self, container_path: str) -> VrContainerConfig:
        """Identify the VR, program and query children of a VR container
        (callers must hold the store lock)."""
        container = self.store.get(container_path)
        if container is None or container.kind != VR_CONTAINER:
            raise ConfigurationIncomplete(["vr-container"])
        roles = self._configuration_roles(container)
        missing = [role for role in ("vr", "program", "query") if roles[role] is None]
        if missing:
            raise ConfigurationIncomplete(missing)
        return VrContainerConfig(
            container_path=container_path,
            vr_path=roles["vr"],
            program_path=roles["program"],
            query_path=roles["query"],
            fetch_policy=self._container_policy(container),
        )

    def _container_policy(self, container: ResourceRecord) -> FetchPolicy:
        policy = self.default_policy
        on_failure, timeout_ms = policy.on_failure, policy.timeout_ms
        for t in container.graph:
            if t.predicate.value == VR_ON_FAILURE and isinstance(t.object, Literal):
                value = t.object.lexical.lower()
                if value in (ON_FAILURE_ABORT, ON_FAILURE_PARTIAL):
                    on_failure = value
            if t.predicate.value == VR_TIMEOUT_MS and isinstance(t.object, Literal):
                value = t.object.numeric_value
                if isinstance(value, int) and value > 0:
                    timeout_ms = value
        if (on_failure, timeout_ms) == (policy.on_failure, policy.timeout_ms):
            return policy
        return FetchPolicy(
            timeout_ms=timeout_ms,
            on_failure=on_failure,
            max_parallel=policy.max_parallel,
            max_body_bytes=policy.max_body_bytes,
        )

    def _config_snapshot(self, vr_record: ResourceRecord) -> dict:
        """Consistent view of everything a resolution needs; taken under
        the store lock so a concurrent config PUT is all-or-nothing."""
        config = self.locate_configuration(vr_record.parent)
        program_rec = self.store.get(config.program_path)
        query_rec = self.store.get(config.query_path)
        container = self.store.get(config.container_path)
        simulates = [
            t.object
            for t in container.graph
            if t.predicate.value == VR_SIMULATES and isinstance(t.object, IRI)
        ]
        return {
            "config": config,
            "program_bytes": program_rec.data,
            "program_parsed": program_rec.parsed,
            "query_bytes": query_rec.data,
            "query_parsed": query_rec.parsed,
            "simulates": simulates,
        }

    # --- VR resolution ------------------------------------------------------

    def resolve_vr(self, config: VrContainerConfig, host: Optional[str] = None) -> Graph:
        """Run the configured pipeline for a VR container and return the
        descriptor-augmented representation."""
        with self.store.lock:
            vr_record = self.store.get(config.vr_path)
            if vr_record is None:
                raise ConfigurationIncomplete(["vr"])
            snapshot = self._config_snapshot(vr_record)
        return self.resolve_vr_snapshot(snapshot, host or self.default_host)

    def resolve_vr_snapshot(self, snapshot: dict, host: str) -> Graph:
        config: VrContainerConfig = snapshot["config"]
        program = snapshot["program_parsed"]
        if program is None:  # defensive re-parse (e.g. restored snapshot)
            program = parse_program(snapshot["program_bytes"].decode("utf-8"))
        query = snapshot["query_parsed"]
        if query is None:
            query = parse_construct(snapshot["query_bytes"].decode("utf-8"))

        collector = DataCollector(config.fetch_policy)
        derived = evaluate(program, EMPTY_GRAPH, collector)
        result = execute_construct(query, derived)

        vr_iri = IRI(self.iri(host, config.vr_path))
        descriptor = [
            Triple(vr_iri, IRI(VR_HAS_PROGRAM), IRI(self.iri(host, config.program_path))),
            Triple(vr_iri, IRI(VR_HAS_QUERY), IRI(self.iri(host, config.query_path))),
        ]
        descriptor.extend(Triple(vr_iri, IRI(VR_SIMULATES), target) for target in snapshot["simulates"])
        return result.with_triples(descriptor)

    # --- PUT ------------------------------------------------------------------

    def handle_put(
        self,
        path: str,
        body: bytes,
        content_type: Optional[str],
        if_match: Optional[str],
        host: str,
    ) -> Response:
        media = _media_type(content_type)
        with self.store.lock:
            record = self.store.get(path)
            if record is None:
                return self._error(404, "NotFound", "no such resource (PUT does not create)", path, host)
            if if_match and if_match.strip() != "*" and if_match.strip() != record.etag:
                return self._error(412, "PreconditionFailed", "entity tag mismatch", path, host)
            if record.kind == VIRTUAL_RESOURCE:
                return self._error(
                    409, "KindConflict", "virtual resources store no state; update the configuration",
                    path, host,
                )
            if record.kind == NON_RDF_SOURCE:
                if media != record.media_type:
                    return self._error(
                        409, "MediaTypeConflict",
                        f"configuration resource is {record.media_type}", path, host,
                    )
                return self._put_config(record, body, path, host)
            # RDF source or container
            if media != MT_TURTLE:
                return self._error(409, "KindConflict", "RDF sources take text/turtle", path, host)
            try:
                graph = parse_turtle(body.decode("utf-8"), base=self.iri(host, path))
            except (ParseError, UnicodeDecodeError) as exc:
                return self._error(400, "InvalidBody", str(exc), path, host)
            if record.is_container and any(t.predicate.value == LDP_CONTAINS for t in graph):
                return self._error(
                    409, "ContainmentManaged", "ldp:contains is server-managed", path, host
                )
            record.graph = graph
            self.store.bump(record)
            return Response(204, {"ETag": record.etag})

    def _put_config(self, record: ResourceRecord, body: bytes, path: str, host: str) -> Response:
        try:
            text = body.decode("utf-8")
            parsed = parse_program(text) if record.media_type == MT_N3 else parse_construct(text)
        except (ParseError, SafetyError, UnicodeDecodeError) as exc:
            return self._error(400, "InvalidConfiguration", str(exc), path, host)
        # single assignment pair under the lock: swap is atomic for readers
        record.data = body
        record.parsed = parsed
        self.store.bump(record)
        return Response(204, {"ETag": record.etag})

    # --- POST -------------------------------------------------------------------

    def handle_post(
        self,
        path: str,
        body: bytes,
        content_type: Optional[str],
        slug: Optional[str],
        link: Optional[str],
        host: str,
    ) -> Response:
        media = _media_type(content_type)
        types = _link_types(link)
        with self.store.lock:
            parent = self.store.get(path)
            if parent is None or not parent.is_container:
                return self._error(404, "NotFound", "POST target must be an existing container", path, host)

            if TYPE_VR_CONTAINER in types or LDP_BASIC_CONTAINER in types:
                kind = VR_CONTAINER if TYPE_VR_CONTAINER in types else BASIC_CONTAINER
                graph = EMPTY_GRAPH
                if body:
                    if media not in (None, MT_TURTLE):
                        return self._error(400, "InvalidBody", "container bodies are text/turtle", path, host)
                    try:
                        graph = parse_turtle(body.decode("utf-8"), base=self.iri(host, path))
                    except (ParseError, UnicodeDecodeError) as exc:
                        return self._error(400, "InvalidBody", str(exc), path, host)
                default_name = "vr-container" if kind == VR_CONTAINER else "container"
                return self._create(parent, kind, slug, default_name, host, named=bool(slug), graph=graph)

            if TYPE_VIRTUAL_RESOURCE in types:
                if parent.kind != VR_CONTAINER:
                    return self._error(
                        409, "KindConflict", "virtual resources live in VR containers", path, host
                    )
                if any(
                    (child := self.store.get(c)) and child.kind == VIRTUAL_RESOURCE
                    for c in parent.children
                ):
                    return self._error(
                        409, "SingleVirtualResource",
                        "this container already holds its virtual representation", path, host,
                    )
                return self._create(parent, VIRTUAL_RESOURCE, slug, "vr", host, named=bool(slug))

            if media == MT_TURTLE:
                try:
                    # created path unknown yet; parse against the container base
                    graph = parse_turtle(body.decode("utf-8"), base=self.iri(host, path))
                except (ParseError, UnicodeDecodeError) as exc:
                    return self._error(400, "InvalidBody", str(exc), path, host)
                return self._create(parent, RDF_SOURCE, slug, "resource", host, graph=graph)

            if media in (MT_N3, MT_SPARQL_QUERY):
                try:
                    text = body.decode("utf-8")
                    parsed = parse_program(text) if media == MT_N3 else parse_construct(text)
                except (ParseError, SafetyError, UnicodeDecodeError) as exc:
                    return self._error(400, "InvalidConfiguration", str(exc), path, host)
                default_name = "program" if media == MT_N3 else "query"
                return self._create(
                    parent, NON_RDF_SOURCE, slug, default_name, host,
                    data=body, media_type=media, parsed=parsed,
                )

            return self._error(
                400, "UnsupportedMediaType",
                "POST bodies must be text/turtle, text/n3 or application/sparql-query", path, host,
            )

    def _create(
        self,
        parent: ResourceRecord,
        kind: str,
        slug: Optional[str],
        default_name: str,
        host: str,
        named: bool = False,
        graph: Graph = EMPTY_GRAPH,
        data: bytes = b"",
        media_type: Optional[str] = None,
        parsed: object = None,
    ) -> Response:
        name = sanitize_slug(slug) if slug else ""
        if named and kind in (VR_CONTAINER, VIRTUAL_RESOURCE):
            # deployment names are meaningful: a taken name is a conflict
            path = self.store.exact_path(parent, name or default_name)
            if path is None:
                return self._error(
                    409, "NameTaken", f"{name or default_name} already exists", parent.path, host
                )
        else:
            path = self.store.suffixed_path(parent, name or default_name)
        record = ResourceRecord(
            path=path,
            kind=kind,
            parent=parent.path,
            graph=graph,
            data=data,
            media_type=media_type,
            parsed=parsed,
        )
        self.store.bump(record)
        self.store.add(record)
        return Response(
            201,
            {"Location": self.iri(host, path), "ETag": record.etag, "Link": self._type_links(record)},
        )

    # --- DELETE --------------------------------------------------------------

    def handle_delete(self, path: str, host: str) -> Response:
        with self.store.lock:
            record = self.store.get(path)
            if record is None:
                return self._error(404, "NotFound", "no such resource", path, host)
            if path == self.store.root:
                return self._error(409, "RootDeletion", "the root container cannot be deleted", path, host)
            self.store.delete_subtree(path)
            return Response(204, {})
