"""virtrep: virtual representations for unconnected IoT assets.

An LDP-subset HTTP server where a virtual resource's RDF state is computed
per GET by running a hot-swappable configuration: an N3-subset rule program
(upstream data collection + forward-chaining derivation) piped into a
SPARQL CONSTRUCT query.
"""

from .bgp import KERNEL, Binding, TriplePattern, match_bgp
from .errors import (
    AmbiguousConfiguration,
    CollectionFailed,
    ConfigurationIncomplete,
    IsomorphismUndecided,
    NonTerminationError,
    ParseError,
    SafetyError,
    TypeMismatchError,
    VirtrepError,
)
from .isomorphism import graph_isomorphic
from .terms import (
    BlankNode,
    Graph,
    IRI,
    Literal,
    Term,
    Triple,
    Variable,
    merge,
)
from .turtle import parse_turtle, serialize_turtle

__version__ = "0.1.0"

__all__ = [
    "AmbiguousConfiguration",
    "Binding",
    "BlankNode",
    "CollectionFailed",
    "ConfigurationIncomplete",
    "Graph",
    "IRI",
    "IsomorphismUndecided",
    "KERNEL",
    "Literal",
    "NonTerminationError",
    "ParseError",
    "SafetyError",
    "Term",
    "Triple",
    "TriplePattern",
    "TypeMismatchError",
    "Variable",
    "VirtrepError",
    "graph_isomorphic",
    "match_bgp",
    "merge",
    "parse_turtle",
    "serialize_turtle",
    "__version__",
]
