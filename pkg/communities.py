"""
Community detection on similarity graphs
Walktrap (default), Louvain (python-louvain), Newman weighted modularity and
an exhaustive oracle for small graphs
"""

import csv
import json
import logging
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

import networkx as nx
import numpy as np
from community import community_louvain

from constants import (
    CommunityAlgorithm,
    DEFAULT_WALK_LENGTH,
    EDGE_CSV_HEADER,
    EXHAUSTIVE_MAX_NODES,
    FLOAT_FORMAT,
    MODULARITY_TIE_TOLERANCE,
)
from errors import DatasetError, DegenerateGraphError, InsufficientPopulationError, ParameterError
from models import MergeStep, Partition, SimilarityGraph

logger = logging.getLogger(__name__)


# ════════════════════════════════════════════════════════════════
# GRAPHS
# ════════════════════════════════════════════════════════════════


def build_graph(nodes: List[str], weights: Mapping[Tuple[str, str], float]) -> SimilarityGraph:
    """Similarity graph with negatives clamped to 0 and self-loops dropped"""
    return SimilarityGraph(nodes=list(nodes), weights=dict(weights))


def to_networkx(graph: SimilarityGraph) -> nx.Graph:
    """networkx view holding every node and the positive-weight edges"""
    g = nx.Graph()
    g.add_nodes_from(graph.nodes)
    g.add_weighted_edges_from((i, j, w) for (i, j), w in sorted(graph.weights.items()) if w > 0.0)
    return g


def modularity(graph: SimilarityGraph, assignment: Mapping[str, int]) -> float:
    """
    Newman weighted modularity of an assignment.

    Raises:
        ParameterError: If the assignment misses a node
        DegenerateGraphError: If the graph has no positive weight
    """
    missing = set(graph.nodes) - set(assignment)
    if missing:
        raise ParameterError(f"assignment misses nodes {sorted(missing)}")
    if graph.total_weight() <= 0.0:
        raise DegenerateGraphError("modularity is undefined on a graph without weight")
    return float(community_louvain.modularity(dict(assignment), to_networkx(graph), weight="weight"))


def _matrix_modularity(matrix: np.ndarray, labels: np.ndarray) -> float:
    """Same quantity on an adjacency matrix (used inside the search loops)"""
    two_w = matrix.sum()
    degree = matrix.sum(axis=1)
    same = labels[:, None] == labels[None, :]
    return float(((matrix - np.outer(degree, degree) / two_w) * same).sum() / two_w)


def _singletons(graph: SimilarityGraph) -> Partition:
    return Partition(assignment={node: k for k, node in enumerate(graph.nodes)}, modularity=0.0)


# ════════════════════════════════════════════════════════════════
# WALKTRAP
# ════════════════════════════════════════════════════════════════


def _transition_powers(matrix: np.ndarray, steps: int) -> Tuple[np.ndarray, np.ndarray]:
    """P^t of the walk with a self-loop per node, and the looped degrees"""
    looped = matrix.copy()
    n_neighbours = (matrix > 0).sum(axis=1)
    strength = matrix.sum(axis=1)
    # self-loop carries the node's mean incident weight (1 when isolated)
    loop = np.where(n_neighbours > 0, strength / np.maximum(n_neighbours, 1), 1.0)
    looped[np.diag_indices_from(looped)] = loop
    degree = looped.sum(axis=1)
    transition = looped / degree[:, None]
    return np.linalg.matrix_power(transition, steps), degree


def walktrap(
    graph: SimilarityGraph,
    steps: int = DEFAULT_WALK_LENGTH,
) -> Tuple[Partition, List[MergeStep]]:
    """
    Walktrap agglomerative clustering.

    Communities are merged pairwise, always the adjacent pair whose merge least
    increases the mean squared random-walk distance. The cut with maximum
    modularity is returned; ties go to the cut with fewer communities.

    Args:
        graph: Similarity graph
        steps: Random-walk length t

    Returns:
        (best partition, merge trace)
    """
    if steps < 1:
        raise ParameterError(f"walk length must be >= 1, got {steps}")
    n = graph.size
    matrix = graph.to_matrix()
    if matrix.sum() <= 0.0:
        logger.debug("Walktrap on a weightless graph: singletons")
        return _singletons(graph), []

    walk, degree = _transition_powers(matrix, steps)
    labels = np.arange(n)
    members: Dict[int, List[int]] = {k: [k] for k in range(n)}
    profiles: Dict[int, np.ndarray] = {k: walk[k] for k in range(n)}
    adjacency = matrix > 0

    best_labels = labels.copy()
    best_q = _matrix_modularity(matrix, labels)
    trace: List[MergeStep] = []
    next_id = n

    while len(members) > 1:
        candidate: Optional[Tuple[float, int, int]] = None
        ids = sorted(members)
        for a_pos, a in enumerate(ids):
            for b in ids[a_pos + 1:]:
                if not adjacency[np.ix_(members[a], members[b])].any():
                    continue
                size_a, size_b = len(members[a]), len(members[b])
                diff = profiles[a] - profiles[b]
                delta = (size_a * size_b / (size_a + size_b)) * float(np.sum(diff * diff / degree)) / n
                if candidate is None or delta < candidate[0]:
                    candidate = (delta, a, b)
        if candidate is None:
            break

        delta, a, b = candidate
        size_a, size_b = len(members[a]), len(members[b])
        merged = sorted(members[a] + members[b])
        profiles[next_id] = (size_a * profiles[a] + size_b * profiles[b]) / (size_a + size_b)
        members[next_id] = merged
        names = ([graph.nodes[k] for k in members[a]], [graph.nodes[k] for k in members[b]])
        for old in (a, b):
            del members[old], profiles[old]
        labels[merged] = next_id
        next_id += 1

        q = _matrix_modularity(matrix, labels)
        trace.append(MergeStep(n_communities=len(members), modularity=q, merged=names, delta_sigma=max(delta, 0.0)))
        if q >= best_q - MODULARITY_TIE_TOLERANCE:
            best_q = max(q, best_q)
            best_labels = labels.copy()

    partition = Partition(
        assignment={node: int(best_labels[k]) for k, node in enumerate(graph.nodes)},
        modularity=float(np.clip(best_q, -1.0, 1.0)),
    )
    logger.debug(f"Walktrap: {partition.n_communities} communities, Q={partition.modularity:.4f}")
    return partition, trace


# ════════════════════════════════════════════════════════════════
# LOUVAIN
# ════════════════════════════════════════════════════════════════


def louvain(graph: SimilarityGraph, seed: int = 0) -> Partition:
    """Louvain greedy modularity optimization (python-louvain)"""
    if graph.total_weight() <= 0.0:
        return _singletons(graph)
    g = to_networkx(graph)
    assignment = community_louvain.best_partition(g, weight="weight", random_state=seed)
    return Partition(
        assignment=assignment,
        modularity=float(community_louvain.modularity(assignment, g, weight="weight")),
    )


def detect_communities(
    graph: SimilarityGraph,
    algorithm: CommunityAlgorithm = CommunityAlgorithm.WALKTRAP,
    walk_length: int = DEFAULT_WALK_LENGTH,
    seed: int = 0,
) -> Partition:
    """
    Partition a similarity graph into communities.

    A graph without positive weight yields singletons with modularity 0.

    Raises:
        InsufficientPopulationError: If the graph has fewer than two nodes
    """
    if graph.size < 2:
        raise InsufficientPopulationError("community detection needs at least two nodes")
    if algorithm == CommunityAlgorithm.LOUVAIN:
        return louvain(graph, seed)
    partition, _ = walktrap(graph, walk_length)
    return partition


# ════════════════════════════════════════════════════════════════
# EXHAUSTIVE ORACLE
# ════════════════════════════════════════════════════════════════


def _set_partitions(n: int) -> Iterator[List[int]]:
    """Restricted growth strings of length n (every set partition once)"""
    labels = [0] * n

    def _extend(position: int, highest: int) -> Iterator[List[int]]:
        if position == n:
            yield list(labels)
            return
        for label in range(highest + 2):
            labels[position] = label
            yield from _extend(position + 1, max(highest, label))

    if n == 0:
        return
    yield from _extend(1, 0)


def exhaustive_best(graph: SimilarityGraph) -> Partition:
    """
    Maximum-modularity partition by enumerating all set partitions.

    Raises:
        ParameterError: If the graph has more than the enumeration limit of nodes
    """
    if graph.size > EXHAUSTIVE_MAX_NODES:
        raise ParameterError(f"exhaustive search is limited to {EXHAUSTIVE_MAX_NODES} nodes")
    matrix = graph.to_matrix()
    if matrix.sum() <= 0.0:
        return _singletons(graph)

    best: Optional[Tuple[float, int, List[int]]] = None
    for labels in _set_partitions(graph.size):
        q = _matrix_modularity(matrix, np.array(labels))
        k = max(labels) + 1
        if (
            best is None
            or q > best[0] + MODULARITY_TIE_TOLERANCE
            or (abs(q - best[0]) <= MODULARITY_TIE_TOLERANCE and k < best[1])
        ):
            best = (q, k, labels)
    q, _, labels = best
    return Partition(assignment=dict(zip(graph.nodes, labels)), modularity=float(np.clip(q, -1.0, 1.0)))


# ════════════════════════════════════════════════════════════════
# IMPORT / EXPORT
# ════════════════════════════════════════════════════════════════


def write_edge_csv(graph: SimilarityGraph, path: Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(EDGE_CSV_HEADER)
        for (i, j), w in sorted(graph.weights.items()):
            writer.writerow([i, j, FLOAT_FORMAT.format(w)])


def load_edge_csv(path: Path) -> SimilarityGraph:
    """Graph over the nodes named in an edge list"""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"edge list not found: {path}")
    weights: Dict[Tuple[str, str], float] = {}
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != EDGE_CSV_HEADER:
            raise DatasetError(f"{path}: expected header {','.join(EDGE_CSV_HEADER)}")
        for row in reader:
            weights[(row["node_i"], row["node_j"])] = float(row["weight"])
    nodes = sorted({n for edge in weights for n in edge})
    return build_graph(nodes, weights)


def partition_to_json(partition: Partition) -> Dict:
    return {"communities": partition.communities(), "modularity": round(partition.modularity, 6)}


def write_partition_json(partition: Partition, path: Path) -> None:
    Path(path).write_text(json.dumps(partition_to_json(partition), indent=2) + "\n", encoding="utf-8")


def load_partition_json(path: Path) -> Partition:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    assignment = {node: k for k, members in enumerate(data["communities"]) for node in members}
    return Partition(assignment=assignment, modularity=data["modularity"])
