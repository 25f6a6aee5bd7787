"""Upstream data collection: dispatch a program's GET directives and merge
the RDF responses.

Failures never raise from a single fetch; they are classified into the
report. ``fetch_all`` applies the policy: under Abort any failure discards
the merged graph and raises CollectionFailed, under Partial the successful
responses are merged and returned alongside the report.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence
from urllib.parse import urlsplit

import requests

from .errors import CollectionFailed, ParseError
from .n3 import RequestDirective
from .terms import EMPTY_GRAPH, Graph, merge
from .turtle import parse_turtle
from .vocab import MT_TURTLE

OUTCOME_OK = "OK"
OUTCOME_HTTP_ERROR = "HTTPError"
OUTCOME_TIMEOUT = "Timeout"
OUTCOME_PARSE_ERROR = "ParseError"
OUTCOME_CONNECT_ERROR = "ConnectError"

ON_FAILURE_ABORT = "abort"
ON_FAILURE_PARTIAL = "partial"

MAX_REDIRECTS = 5


@dataclass(frozen=True)
class FetchPolicy:
    timeout_ms: int = 5000
    on_failure: str = ON_FAILURE_ABORT
    max_parallel: int = 4
    max_body_bytes: int = 1 << 20

    def __post_init__(self):
        if self.timeout_ms <= 0 or self.max_parallel <= 0 or self.max_body_bytes <= 0:
            raise ValueError("fetch policy bounds must be positive")
        if self.on_failure not in (ON_FAILURE_ABORT, ON_FAILURE_PARTIAL):
            raise ValueError(f"unknown failure policy {self.on_failure!r}")


@dataclass
class FetchEntry:
    target: str
    outcome: str
    elapsed_ms: float
    triple_count: int = 0
    status: Optional[int] = None
    detail: str = ""


@dataclass
class FetchReport:
    entries: list[FetchEntry] = field(default_factory=list)

    def all_ok(self) -> bool:
        return all(e.outcome == OUTCOME_OK for e in self.entries)

    def failures(self) -> list[FetchEntry]:
        return [e for e in self.entries if e.outcome != OUTCOME_OK]


def fetch_rdf(iri: str, policy: FetchPolicy) -> tuple[Graph, FetchEntry]:
    """GET one resource with ``Accept: text/turtle`` and parse the body
    (base = final request IRI after up to 5 redirects)."""
    start = time.monotonic()

    def entry(outcome: str, status: Optional[int] = None, detail: str = "", count: int = 0) -> FetchEntry:
        return FetchEntry(
            target=iri,
            outcome=outcome,
            elapsed_ms=(time.monotonic() - start) * 1000.0,
            triple_count=count,
            status=status,
            detail=detail,
        )

    scheme = urlsplit(iri).scheme
    if scheme not in ("http", "https"):
        return EMPTY_GRAPH, entry(OUTCOME_CONNECT_ERROR, detail=f"unsupported scheme {scheme!r}")

    try:
        with requests.Session() as session:
            session.max_redirects = MAX_REDIRECTS
            with session.get(
                iri,
                headers={"Accept": MT_TURTLE},
                timeout=policy.timeout_ms / 1000.0,
                stream=True,
                allow_redirects=True,
            ) as response:
                if response.status_code != 200:
                    return EMPTY_GRAPH, entry(OUTCOME_HTTP_ERROR, status=response.status_code)
                body = b""
                for chunk in response.iter_content(chunk_size=8192):
                    body += chunk
                    if len(body) > policy.max_body_bytes:
                        return EMPTY_GRAPH, entry(
                            OUTCOME_PARSE_ERROR,
                            status=200,
                            detail=f"body exceeds {policy.max_body_bytes} bytes",
                        )
                final_iri = str(response.url)
    except requests.Timeout:
        return EMPTY_GRAPH, entry(OUTCOME_TIMEOUT, detail=f"no response within {policy.timeout_ms} ms")
    except requests.TooManyRedirects:
        return EMPTY_GRAPH, entry(OUTCOME_CONNECT_ERROR, detail="redirect limit exceeded")
    except requests.RequestException as exc:
        return EMPTY_GRAPH, entry(OUTCOME_CONNECT_ERROR, detail=str(exc))

    try:
        graph = parse_turtle(body.decode("utf-8"), base=final_iri)
    except (ParseError, UnicodeDecodeError) as exc:
        return EMPTY_GRAPH, entry(OUTCOME_PARSE_ERROR, status=200, detail=str(exc))
    return graph, entry(OUTCOME_OK, status=200, count=len(graph))


def fetch_all(
    directives: Sequence[RequestDirective], policy: FetchPolicy
) -> tuple[Graph, FetchReport]:
    """Fetch every directive (bounded parallelism, report in directive
    order). Raises CollectionFailed under Abort when any entry failed."""
    report = FetchReport()
    if not directives:
        return EMPTY_GRAPH, report

    if len(directives) == 1:
        results = [fetch_rdf(directives[0].target, policy)]
    else:
        workers = min(policy.max_parallel, len(directives))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda d: fetch_rdf(d.target, policy), directives))

    merged = EMPTY_GRAPH
    for graph, entry in results:
        report.entries.append(entry)
        if entry.outcome == OUTCOME_OK:
            merged = merge(merged, graph)

    if not report.all_ok() and policy.on_failure == ON_FAILURE_ABORT:
        raise CollectionFailed(report)
    return merged, report


class DataCollector:
    """Shareable fetcher handle bound to a policy; per-call state is
    isolated, so concurrent resolutions can use one collector."""

    def __init__(self, policy: Optional[FetchPolicy] = None):
        self.policy = policy or FetchPolicy()

    def __call__(self, directives: Sequence[RequestDirective]) -> tuple[Graph, FetchReport]:
        return fetch_all(directives, self.policy)
