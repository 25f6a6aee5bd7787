"""Fixed vocabulary IRIs used across the server, engines and demo."""

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"
LDP_NS = "http://www.w3.org/ns/ldp#"
SAREF_NS = "https://w3id.org/saref#"
VR_NS = "http://purl.org/virtrep#"
DEMO_NS = "http://purl.org/virtrep/demo#"

HTTP_NS = "http://www.w3.org/2011/http#"
HTTPM_NS = "http://www.w3.org/2011/http-methods#"
MATH_NS = "http://www.w3.org/2000/10/swap/math#"

RDF_TYPE = RDF_NS + "type"
RDF_LANGSTRING = RDF_NS + "langString"

XSD_STRING = XSD_NS + "string"
XSD_BOOLEAN = XSD_NS + "boolean"
XSD_INTEGER = XSD_NS + "integer"
XSD_DECIMAL = XSD_NS + "decimal"
XSD_DOUBLE = XSD_NS + "double"

LDP_CONTAINS = LDP_NS + "contains"
LDP_BASIC_CONTAINER = LDP_NS + "BasicContainer"
LDP_RDF_SOURCE = LDP_NS + "RDFSource"
LDP_NON_RDF_SOURCE = LDP_NS + "NonRDFSource"
LDP_RESOURCE = LDP_NS + "Resource"

SAREF_HAS_STATE = SAREF_NS + "hasState"

VR_HAS_PROGRAM = VR_NS + "hasProgram"
VR_HAS_QUERY = VR_NS + "hasQuery"
VR_SIMULATES = VR_NS + "simulates"
VR_ERROR_KIND = VR_NS + "errorKind"
VR_ERROR_DETAIL = VR_NS + "errorDetail"
VR_ON_FAILURE = VR_NS + "onFailure"
VR_TIMEOUT_MS = VR_NS + "timeoutMs"

DEMO_ACTION_COUNT = DEMO_NS + "actionCount"
DEMO_ABRASION = DEMO_NS + "abrasion"

HTTP_MTHD = HTTP_NS + "mthd"
HTTP_REQUEST_URI = HTTP_NS + "requestURI"
HTTPM_GET = HTTPM_NS + "GET"

# Interaction-model markers carried in POST Link headers.
TYPE_VR_CONTAINER = "tag:virtrep:VrContainer"
TYPE_VIRTUAL_RESOURCE = "tag:virtrep:VirtualResource"

# Media types.
MT_TURTLE = "text/turtle"
MT_N3 = "text/n3"
MT_SPARQL_QUERY = "application/sparql-query"

# Prefix map used for server-produced Turtle.
DEFAULT_PREFIXES = {
    "rdf": RDF_NS,
    "xsd": XSD_NS,
    "ldp": LDP_NS,
    "saref": SAREF_NS,
    "vr": VR_NS,
    "ex": DEMO_NS,
}
