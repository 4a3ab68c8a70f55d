"""Knowledge graph built from interaction edge lists, scored by hop distance.

The graph is undirected and unweighted; all source databases are flattened
into one edge set before pathfinding. A drug-target pair is scored from the
shortest-path hop count h:

    score = 0            if either endpoint is absent or no path exists
    score = 1            if h == 1 (direct interaction edge)
    score = 1 / ln(1+h)  otherwise

which lands in (0, 1) for h >= 2 and decreases as the pair grows further
apart. Querying a pair that normalizes to one and the same entity is
refused (SameEntity) -- the score is undefined for h == 0.

Edge lists are tab-separated text: ``source<TAB>dest<TAB>provenance`` with
``#`` comment lines, UTF-8. The built graph can be persisted to a small
versioned binary cache (see save_graph for the layout).
"""

from __future__ import annotations

import math
import struct
from collections import deque
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

from .core import EntityId, normalize_entity
from .errors import GraphCacheError, IngestError, InvalidEntity, SameEntity

__all__ = [
    "Provenance",
    "InteractionEdge",
    "KnowledgeGraph",
    "HopCount",
    "IngestionReport",
    "build_graph",
    "parse_edge_lines",
    "load_edge_file",
    "build_graph_from_files",
    "shortest_hops",
    "hop_score",
    "kg_dti_score",
    "save_graph",
    "load_graph",
]


class Provenance(str, Enum):
    """Which interaction database an edge came from."""

    DGIDB = "DGIDB"
    DRUGBANK = "DRUGBANK"
    CTD = "CTD"
    STITCH = "STITCH"
    OTHER = "OTHER"

    @classmethod
    def parse(cls, text: str) -> "Provenance":
        """Map a provenance label onto the enum; unrecognized labels become OTHER."""
        try:
            return cls(text.strip().upper())
        except ValueError:
            return cls.OTHER


@dataclass(frozen=True)
class InteractionEdge:
    """One undirected interaction between two distinct entities."""

    source: EntityId
    dest: EntityId
    provenance: Provenance = Provenance.OTHER

    def __post_init__(self):
        if self.source.normalized == self.dest.normalized:
            raise ValueError(f"self-loop edge on {self.source.raw!r}")


@dataclass(frozen=True)
class HopCount:
    """Shortest-path length in edges; -1 encodes "no path exists"."""

    value: int

    def __post_init__(self):
        if self.value != -1 and self.value < 1:
            raise ValueError(f"hop count must be -1 or >= 1, got {self.value}")

    @property
    def reachable(self) -> bool:
        return self.value != -1


@dataclass(frozen=True)
class IngestionReport:
    """What happened while reading edge lines: counts plus skip diagnostics."""

    lines_read: int = 0
    edges_parsed: int = 0
    malformed_skipped: int = 0
    self_loops_skipped: int = 0
    problems: tuple[str, ...] = ()

    def merged_with(self, other: "IngestionReport") -> "IngestionReport":
        return IngestionReport(
            lines_read=self.lines_read + other.lines_read,
            edges_parsed=self.edges_parsed + other.edges_parsed,
            malformed_skipped=self.malformed_skipped + other.malformed_skipped,
            self_loops_skipped=self.self_loops_skipped + other.self_loops_skipped,
            problems=self.problems + other.problems,
        )

    def as_dict(self) -> dict:
        return {
            "lines_read": self.lines_read,
            "edges_parsed": self.edges_parsed,
            "malformed_skipped": self.malformed_skipped,
            "self_loops_skipped": self.self_loops_skipped,
            "problems": list(self.problems),
        }


class KnowledgeGraph:
    """Immutable undirected graph over normalized entity identifiers.

    Nodes are the normalized entity names; adjacency sets are symmetric by
    construction. Instances are safe for concurrent readers.
    """

    def __init__(self, adjacency: dict[str, set[str]]):
        frozen = {node: frozenset(neighbors) for node, neighbors in adjacency.items()}
        for node, neighbors in frozen.items():
            for other in neighbors:
                if node not in frozen.get(other, frozenset()):
                    raise ValueError(f"asymmetric adjacency between {node!r} and {other!r}")
        self._adjacency = frozen
        self._nodes = frozenset(frozen)
        self._edge_count = sum(len(n) for n in frozen.values()) // 2

    @property
    def nodes(self) -> frozenset[str]:
        return self._nodes

    @property
    def edge_count(self) -> int:
        return self._edge_count

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    def __contains__(self, entity: EntityId | str) -> bool:
        return _as_key(entity) in self._nodes

    def neighbors(self, entity: EntityId | str) -> frozenset[str]:
        return self._adjacency.get(_as_key(entity), frozenset())

    def degree(self, entity: EntityId | str) -> int:
        return len(self.neighbors(entity))


def _as_key(entity: EntityId | str) -> str:
    return entity.normalized if isinstance(entity, EntityId) else entity


def build_graph(edges: Iterable[InteractionEdge]) -> KnowledgeGraph:
    """Build a deduplicated undirected graph; ingestion order is irrelevant."""
    adjacency: dict[str, set[str]] = {}
    for edge in edges:
        a, b = edge.source.normalized, edge.dest.normalized
        adjacency.setdefault(a, set()).add(b)
        adjacency.setdefault(b, set()).add(a)
    return KnowledgeGraph(adjacency)


def parse_edge_lines(
    lines: Iterable[str], origin: str = "<memory>"
) -> tuple[list[InteractionEdge], IngestionReport]:
    """Parse tab-separated edge lines, skipping (and counting) bad rows.

    A usable line has at least two non-empty tab-separated fields; the
    optional third field names the source database. Malformed lines and
    self-loops are skipped, never fatal.
    """
    edges: list[InteractionEdge] = []
    lines_read = 0
    malformed = 0
    self_loops = 0
    problems: list[str] = []

    for lineno, line in enumerate(lines, start=1):
        stripped = line.rstrip("\n")
        if not stripped.strip() or stripped.lstrip().startswith("#"):
            continue
        lines_read += 1
        fields = stripped.split("\t")
        if len(fields) < 2:
            malformed += 1
            problems.append(f"{origin}:{lineno}: expected at least 2 tab-separated fields")
            continue
        try:
            source = normalize_entity(fields[0])
            dest = normalize_entity(fields[1])
        except InvalidEntity:
            malformed += 1
            problems.append(f"{origin}:{lineno}: empty endpoint")
            continue
        provenance = Provenance.parse(fields[2]) if len(fields) > 2 and fields[2].strip() else Provenance.OTHER
        if source.normalized == dest.normalized:
            self_loops += 1
            problems.append(f"{origin}:{lineno}: self-loop on {source.raw!r}")
            continue
        edges.append(InteractionEdge(source, dest, provenance))

    report = IngestionReport(
        lines_read=lines_read,
        edges_parsed=len(edges),
        malformed_skipped=malformed,
        self_loops_skipped=self_loops,
        problems=tuple(problems),
    )
    return edges, report


def load_edge_file(path: str | Path) -> tuple[list[InteractionEdge], IngestionReport]:
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as handle:
            return parse_edge_lines(handle, origin=str(path))
    except UnicodeDecodeError as exc:
        raise IngestError(f"edge file {path} is not UTF-8: {exc}") from exc


def build_graph_from_files(paths: Iterable[str | Path]) -> tuple[KnowledgeGraph, IngestionReport]:
    """Flatten several edge-list files into one graph plus a combined report."""
    all_edges: list[InteractionEdge] = []
    report = IngestionReport()
    for path in paths:
        edges, file_report = load_edge_file(path)
        all_edges.extend(edges)
        report = report.merged_with(file_report)
    return build_graph(all_edges), report


def shortest_hops(graph: KnowledgeGraph, drug: EntityId, target: EntityId) -> HopCount:
    """Breadth-first shortest path length between drug and target, in edges.

    Returns HopCount(-1) when either endpoint is absent or no path exists.

    Raises:
        SameEntity: if drug and target normalize to the same entity.
    """
    start, goal = drug.normalized, target.normalized
    if start == goal:
        raise SameEntity(f"drug and target are the same entity: {drug.raw!r}")
    if start not in graph or goal not in graph:
        return HopCount(-1)

    seen = {start}
    frontier = deque([(start, 0)])
    while frontier:
        node, dist = frontier.popleft()
        for neighbor in graph.neighbors(node):
            if neighbor == goal:
                return HopCount(dist + 1)
            if neighbor not in seen:
                seen.add(neighbor)
                frontier.append((neighbor, dist + 1))
    return HopCount(-1)


def hop_score(hops: HopCount | int) -> float:
    """Map a hop count onto [0, 1]: 0 unreachable, 1 direct, 1/ln(1+h) beyond."""
    h = hops.value if isinstance(hops, HopCount) else hops
    if h == -1:
        return 0.0
    if h == 1:
        return 1.0
    if h < 1:
        raise ValueError(f"hop count must be -1 or >= 1, got {h}")
    return 1.0 / math.log1p(h)


def kg_dti_score(graph: KnowledgeGraph, drug: EntityId, target: EntityId) -> float:
    """Knowledge-graph interaction score for a drug-target pair, in [0, 1]."""
    return hop_score(shortest_hops(graph, drug, target))


# Cache layout (little-endian):
#   magic "DTFKG", version byte, u32 node count,
#   node table: per node, u16 byte length + UTF-8 normalized id (sorted),
#   adjacency: per node, u32 degree + degree * u32 neighbor indices (sorted).
CACHE_MAGIC = b"DTFKG"
CACHE_VERSION = 1


def save_graph(graph: KnowledgeGraph, path: str | Path) -> None:
    """Write the graph to its binary cache format (deterministic bytes)."""
    nodes = sorted(graph.nodes)
    index = {node: i for i, node in enumerate(nodes)}
    parts = [CACHE_MAGIC, struct.pack("<B", CACHE_VERSION), struct.pack("<I", len(nodes))]
    for node in nodes:
        encoded = node.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise GraphCacheError(f"entity id too long to cache: {node[:40]!r}...")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
    for node in nodes:
        neighbor_ids = sorted(index[n] for n in graph.neighbors(node))
        parts.append(struct.pack("<I", len(neighbor_ids)))
        parts.append(struct.pack(f"<{len(neighbor_ids)}I", *neighbor_ids))
    Path(path).write_bytes(b"".join(parts))


def load_graph(path: str | Path) -> KnowledgeGraph:
    """Read a graph cache written by save_graph.

    Raises:
        GraphCacheError: on missing file, bad magic/version, or truncation.
    """
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise GraphCacheError(f"cannot read graph cache {path}: {exc}") from exc

    reader = _BlobReader(blob, path)
    if reader.take(len(CACHE_MAGIC)) != CACHE_MAGIC:
        raise GraphCacheError(f"{path}: not a graph cache (bad magic bytes)")
    (version,) = struct.unpack("<B", reader.take(1))
    if version != CACHE_VERSION:
        raise GraphCacheError(f"{path}: unsupported cache version {version}")
    (node_count,) = struct.unpack("<I", reader.take(4))

    nodes: list[str] = []
    for _ in range(node_count):
        (length,) = struct.unpack("<H", reader.take(2))
        try:
            nodes.append(reader.take(length).decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise GraphCacheError(f"{path}: corrupt node table: {exc}") from exc

    adjacency: dict[str, set[str]] = {node: set() for node in nodes}
    for node in nodes:
        (degree,) = struct.unpack("<I", reader.take(4))
        neighbor_ids = struct.unpack(f"<{degree}I", reader.take(4 * degree))
        for neighbor_id in neighbor_ids:
            if neighbor_id >= node_count:
                raise GraphCacheError(f"{path}: neighbor index {neighbor_id} out of range")
            adjacency[node].add(nodes[neighbor_id])
    if reader.remaining():
        raise GraphCacheError(f"{path}: {reader.remaining()} trailing bytes after adjacency")

    try:
        return KnowledgeGraph(adjacency)
    except ValueError as exc:
        raise GraphCacheError(f"{path}: {exc}") from exc


class _BlobReader:
    """Cursor over cache bytes that turns truncation into GraphCacheError."""

    def __init__(self, blob: bytes, origin):
        self._blob = blob
        self._origin = origin
        self._pos = 0

    def take(self, count: int) -> bytes:
        end = self._pos + count
        if end > len(self._blob):
            raise GraphCacheError(f"{self._origin}: truncated graph cache")
        chunk = self._blob[self._pos:end]
        self._pos = end
        return chunk

    def remaining(self) -> int:
        return len(self._blob) - self._pos
