"""In-memory LDP resource tree with optional JSON snapshot persistence.

One lock guards the tree and record metadata; it is held only for
microsecond bookkeeping (never across upstream fetches or rule runs), so
readers and virtual-resource resolutions proceed concurrently. Graph and
bytes payloads are immutable values: replacing them under the lock gives
writers atomicity, and a reader that snapshotted them keeps a consistent
view without holding anything.
"""

from __future__ import annotations

import base64
import itertools
import json
import re
import threading
from dataclasses import dataclass, field
from typing import Optional

from .terms import EMPTY_GRAPH, Graph
from .turtle import parse_turtle, serialize_turtle

RDF_SOURCE = "RdfSource"
NON_RDF_SOURCE = "NonRdfSource"
BASIC_CONTAINER = "BasicContainer"
VR_CONTAINER = "VrContainer"
VIRTUAL_RESOURCE = "VirtualResource"

_CONTAINER_KINDS = (BASIC_CONTAINER, VR_CONTAINER)

_SLUG_RE = re.compile(r"[^A-Za-z0-9._-]+")


@dataclass
class ResourceRecord:
    path: str
    kind: str
    parent: Optional[str] = None
    graph: Graph = EMPTY_GRAPH
    data: bytes = b""
    media_type: Optional[str] = None
    parsed: object = None  # validated Program / ConstructQuery for config resources
    children: list[str] = field(default_factory=list)
    version: int = 1

    @property
    def etag(self) -> str:
        return f'"v{self.version}"'

    @property
    def is_container(self) -> bool:
        return self.kind in _CONTAINER_KINDS


def normalize_path(path: str) -> str:
    path = path.split("?", 1)[0].split("#", 1)[0]
    if not path.startswith("/"):
        path = "/" + path
    while "//" in path:
        path = path.replace("//", "/")
    if len(path) > 1 and path.endswith("/"):
        path = path.rstrip("/")
        if not path:
            path = "/"
    return path


def sanitize_slug(slug: str) -> str:
    return _SLUG_RE.sub("-", slug).strip("-.")


class ResourceStore:
    def __init__(self, root_path: str = "/ldp"):
        self.lock = threading.RLock()
        self.root = normalize_path(root_path)
        self._versions = itertools.count(2)
        self.resources: dict[str, ResourceRecord] = {
            self.root: ResourceRecord(self.root, BASIC_CONTAINER)
        }

    # Callers hold self.lock around compound operations; these helpers do
    # not lock on their own.

    def get(self, path: str) -> Optional[ResourceRecord]:
        return self.resources.get(path)

    def bump(self, record: ResourceRecord) -> None:
        record.version = next(self._versions)

    def child_path(self, parent: ResourceRecord, name: str) -> str:
        return f"{parent.path}/{name}" if parent.path != "/" else f"/{name}"

    def exact_path(self, parent: ResourceRecord, name: str) -> Optional[str]:
        """Path for exactly this child name; None when taken."""
        path = self.child_path(parent, name)
        return None if path in self.resources else path

    def suffixed_path(self, parent: ResourceRecord, name: str) -> str:
        """First free path for the name, suffixing -2, -3, ... when taken."""
        path = self.child_path(parent, name)
        if path not in self.resources:
            return path
        for n in itertools.count(2):
            candidate = f"{path}-{n}"
            if candidate not in self.resources:
                return candidate

    def add(self, record: ResourceRecord) -> None:
        parent = self.resources[record.parent]
        self.resources[record.path] = record
        parent.children.append(record.path)
        self.bump(parent)

    def delete_subtree(self, path: str) -> None:
        record = self.resources[path]
        for child in list(record.children):
            self.delete_subtree(child)
        if record.parent and record.parent in self.resources:
            parent = self.resources[record.parent]
            if path in parent.children:
                parent.children.remove(path)
            self.bump(parent)
        del self.resources[path]

    # --- snapshot persistence -------------------------------------------

    def to_snapshot(self) -> dict:
        with self.lock:
            resources = []
            for rec in self.resources.values():
                entry = {
                    "path": rec.path,
                    "kind": rec.kind,
                    "parent": rec.parent,
                    "children": list(rec.children),
                    "version": rec.version,
                    "media_type": rec.media_type,
                }
                if rec.kind in (RDF_SOURCE, BASIC_CONTAINER, VR_CONTAINER):
                    entry["graph"] = serialize_turtle(rec.graph)
                if rec.kind == NON_RDF_SOURCE:
                    entry["data"] = base64.b64encode(rec.data).decode("ascii")
                resources.append(entry)
            return {"format": "virtrep-snapshot", "version": 1, "root": self.root, "resources": resources}

    @classmethod
    def from_snapshot(cls, snapshot: dict) -> "ResourceStore":
        if snapshot.get("format") != "virtrep-snapshot" or snapshot.get("version") != 1:
            raise ValueError("unrecognized snapshot format")
        store = cls(snapshot["root"])
        store.resources.clear()
        max_version = 1
        for entry in snapshot["resources"]:
            record = ResourceRecord(
                path=entry["path"],
                kind=entry["kind"],
                parent=entry["parent"],
                children=list(entry["children"]),
                media_type=entry["media_type"],
                version=entry["version"],
            )
            if "graph" in entry:
                record.graph = parse_turtle(entry["graph"], base="http://snapshot.invalid/")
            if "data" in entry:
                record.data = base64.b64decode(entry["data"])
            max_version = max(max_version, record.version)
            store.resources[record.path] = record
        if store.root not in store.resources:
            raise ValueError("snapshot lacks the root container")
        store._versions = itertools.count(max_version + 1)
        return store

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_snapshot(), fh, indent=2)

    @classmethod
    def load(cls, path: str) -> "ResourceStore":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_snapshot(json.load(fh))
