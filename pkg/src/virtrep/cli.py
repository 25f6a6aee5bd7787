"""Command line: run the server and the device simulator, deploy a VR
container from local files, fetch resources, and hot-swap configurations.

Every client command is exactly its documented raw-HTTP sequence; stdout
carries response bodies only (errors go to stderr), and the exit code is 0
iff the HTTP outcome was 2xx (or the server shut down cleanly).
"""

from __future__ import annotations

import argparse
import os
import signal
import sys
import threading
from typing import Optional

import requests

from .fetch import FetchPolicy, ON_FAILURE_ABORT, ON_FAILURE_PARTIAL
from .gripper import GripperApp
from .httpd import AppServer
from .server import VrServerApp
from .store import ResourceStore
from .terms import Graph, IRI, Triple
from .turtle import parse_turtle, serialize_turtle
from .vocab import (
    MT_N3,
    MT_SPARQL_QUERY,
    MT_TURTLE,
    TYPE_VIRTUAL_RESOURCE,
    TYPE_VR_CONTAINER,
    VR_HAS_PROGRAM,
    VR_HAS_QUERY,
    VR_SIMULATES,
)

DEFAULT_PORT = 8080
DEFAULT_GRIPPER_PORT = 8081


def _env_int(name: str, fallback: int) -> int:
    value = os.environ.get(name)
    if value is None:
        return fallback
    try:
        return int(value)
    except ValueError:
        print(f"warning: ignoring non-integer {name}={value!r}", file=sys.stderr)
        return fallback


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="virtrep")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the virtual-representation server")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--root", default="ldp", help="name of the root container")
    serve.add_argument("--snapshot", default=None, help="store state file (loaded on start, written on shutdown)")
    serve.add_argument("--timeout-ms", type=int, default=None, help="upstream fetch timeout")
    serve.add_argument("--on-failure", choices=[ON_FAILURE_ABORT, ON_FAILURE_PARTIAL], default=ON_FAILURE_ABORT)

    sim = sub.add_parser("sim-gripper", help="run the mock gripper device")
    sim.add_argument("--host", default="127.0.0.1")
    sim.add_argument("--port", type=int, default=None)

    deploy = sub.add_parser("deploy", help="create a VR container with its configuration")
    deploy.add_argument("server_base", help="IRI of the container to deploy into")
    deploy.add_argument("container_name")
    deploy.add_argument("program_file")
    deploy.add_argument("query_file")
    deploy.add_argument("vr_name")
    deploy.add_argument("--simulates", default=None, help="IRI of the represented physical object")
    deploy.add_argument("--timeout-ms", type=int, default=None)

    get = sub.add_parser("get", help="GET an IRI and print the body")
    get.add_argument("iri")
    get.add_argument("--timeout-ms", type=int, default=None)

    swap_p = sub.add_parser("swap-program", help="replace a container's program resource")
    swap_p.add_argument("container_iri")
    swap_p.add_argument("program_file")
    swap_p.add_argument("--timeout-ms", type=int, default=None)

    swap_q = sub.add_parser("swap-query", help="replace a container's query resource")
    swap_q.add_argument("container_iri")
    swap_q.add_argument("query_file")
    swap_q.add_argument("--timeout-ms", type=int, default=None)

    return parser


def _client_timeout(args) -> float:
    ms = args.timeout_ms if args.timeout_ms is not None else _env_int("VIRTREP_TIMEOUT_MS", 5000)
    return ms / 1000.0


def _fail(step: str, response: Optional[requests.Response] = None, error: Optional[Exception] = None) -> int:
    if response is not None:
        print(f"error: {step} -> HTTP {response.status_code}", file=sys.stderr)
        if response.content:
            print(response.text, file=sys.stderr)
    else:
        print(f"error: {step}: {error}", file=sys.stderr)
    return 1


def cmd_serve(args) -> int:
    port = args.port if args.port is not None else _env_int("VIRTREP_PORT", DEFAULT_PORT)
    if args.snapshot and os.path.exists(args.snapshot):
        try:
            store = ResourceStore.load(args.snapshot)
        except (OSError, ValueError) as exc:
            print(f"error: cannot load snapshot {args.snapshot}: {exc}", file=sys.stderr)
            return 1
    else:
        store = ResourceStore("/" + args.root.strip("/"))
    timeout_ms = args.timeout_ms if args.timeout_ms is not None else _env_int("VIRTREP_TIMEOUT_MS", 5000)
    policy = FetchPolicy(timeout_ms=timeout_ms, on_failure=args.on_failure)
    app = VrServerApp(store, policy, default_host=f"{args.host}:{port}")
    return _run_server(app, args.host, port, snapshot=args.snapshot, store=store)


def cmd_sim_gripper(args) -> int:
    port = args.port if args.port is not None else _env_int("VIRTREP_PORT", DEFAULT_GRIPPER_PORT)
    app = GripperApp(default_host=f"{args.host}:{port}")
    return _run_server(app, args.host, port)


def _run_server(app, host: str, port: int, snapshot: Optional[str] = None, store=None) -> int:
    try:
        server = AppServer(app, host, port)
    except OSError as exc:
        print(f"error: cannot bind {host}:{port}: {exc}", file=sys.stderr)
        return 1

    def request_shutdown(signum, frame):
        threading.Thread(target=server.shutdown, daemon=True).start()

    signal.signal(signal.SIGINT, request_shutdown)
    signal.signal(signal.SIGTERM, request_shutdown)
    print(f"listening on {server.base_url}", file=sys.stderr)
    try:
        server.serve_forever()
    finally:
        server.server_close()
        if snapshot and store is not None:
            try:
                store.save(snapshot)
                print(f"snapshot written to {snapshot}", file=sys.stderr)
            except OSError as exc:
                print(f"error: cannot write snapshot: {exc}", file=sys.stderr)
                return 1
    return 0


def cmd_deploy(args) -> int:
    try:
        with open(args.program_file, "rb") as fh:
            program = fh.read()
        with open(args.query_file, "rb") as fh:
            query = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    timeout = _client_timeout(args)
    base = args.server_base.rstrip("/")
    try:
        step = "create VR container"
        r = requests.post(
            base,
            headers={"Link": f'<{TYPE_VR_CONTAINER}>; rel="type"', "Slug": args.container_name},
            timeout=timeout,
        )
        if r.status_code != 201:
            return _fail(step, response=r)
        container = r.headers["Location"]

        step = "upload program"
        r = requests.post(
            container,
            data=program,
            headers={"Content-Type": MT_N3, "Slug": "program"},
            timeout=timeout,
        )
        if r.status_code != 201:
            return _fail(step, response=r)

        step = "upload query"
        r = requests.post(
            container,
            data=query,
            headers={"Content-Type": MT_SPARQL_QUERY, "Slug": "query"},
            timeout=timeout,
        )
        if r.status_code != 201:
            return _fail(step, response=r)

        step = "create virtual resource"
        r = requests.post(
            container,
            headers={"Link": f'<{TYPE_VIRTUAL_RESOURCE}>; rel="type"', "Slug": args.vr_name},
            timeout=timeout,
        )
        if r.status_code != 201:
            return _fail(step, response=r)
        vr_iri = r.headers["Location"]

        if args.simulates:
            step = "record simulated object"
            graph = Graph([Triple(IRI(vr_iri), IRI(VR_SIMULATES), IRI(args.simulates))])
            r = requests.put(
                container,
                data=serialize_turtle(graph).encode("utf-8"),
                headers={"Content-Type": MT_TURTLE},
                timeout=timeout,
            )
            if r.status_code != 204:
                return _fail(step, response=r)
    except requests.RequestException as exc:
        return _fail(step, error=exc)

    print(vr_iri)
    return 0


def cmd_get(args) -> int:
    try:
        r = requests.get(args.iri, headers={"Accept": MT_TURTLE}, timeout=_client_timeout(args))
    except requests.RequestException as exc:
        return _fail("GET", error=exc)
    sys.stdout.buffer.write(r.content)
    sys.stdout.buffer.flush()
    if not 200 <= r.status_code < 300:
        print(f"HTTP {r.status_code}", file=sys.stderr)
        return 1
    return 0


def _swap(args, file_attr: str, relation: str, media_type: str, role: str) -> int:
    try:
        with open(getattr(args, file_attr), "rb") as fh:
            payload = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    timeout = _client_timeout(args)
    try:
        step = "locate configuration"
        r = requests.get(args.container_iri, headers={"Accept": MT_TURTLE}, timeout=timeout)
        if r.status_code != 200:
            return _fail(step, response=r)
        graph = parse_turtle(r.text, base=args.container_iri)
        targets = [t.object.value for t in graph if t.predicate.value == relation and isinstance(t.object, IRI)]
        if len(targets) != 1:
            print(f"error: container lists {len(targets)} {role} resources", file=sys.stderr)
            return 1

        step = f"replace {role}"
        r = requests.put(targets[0], data=payload, headers={"Content-Type": media_type}, timeout=timeout)
        if r.status_code != 204:
            return _fail(step, response=r)
    except requests.RequestException as exc:
        return _fail(step, error=exc)
    return 0


def cmd_swap_program(args) -> int:
    return _swap(args, "program_file", VR_HAS_PROGRAM, MT_N3, "program")


def cmd_swap_query(args) -> int:
    return _swap(args, "query_file", VR_HAS_QUERY, MT_SPARQL_QUERY, "query")


_COMMANDS = {
    "serve": cmd_serve,
    "sim-gripper": cmd_sim_gripper,
    "deploy": cmd_deploy,
    "get": cmd_get,
    "swap-program": cmd_swap_program,
    "swap-query": cmd_swap_query,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
