"""
Tests for modularity, Walktrap, Louvain and the exhaustive oracle
"""

import numpy as np
import pytest

from communities import (
    build_graph,
    detect_communities,
    exhaustive_best,
    load_edge_csv,
    load_partition_json,
    modularity,
    walktrap,
    write_edge_csv,
    write_partition_json,
)
from constants import CommunityAlgorithm
from errors import DegenerateGraphError, InsufficientPopulationError, ParameterError
from models import SimilarityGraph


def _planted(rng, sizes, intra=(0.7, 1.0), inter=(0.0, 0.15)) -> SimilarityGraph:
    nodes = [f"n{k}" for k in range(sum(sizes))]
    block = np.repeat(np.arange(len(sizes)), sizes)
    weights = {}
    for a in range(len(nodes)):
        for b in range(a + 1, len(nodes)):
            low, high = intra if block[a] == block[b] else inter
            weights[(nodes[a], nodes[b])] = float(rng.uniform(low, high))
    return build_graph(nodes, weights)


def _corpus():
    """Planted-block graphs of 3 to 8 nodes"""
    rng = np.random.default_rng(99)
    shapes = [(2, 1), (2, 2), (3, 2), (3, 3), (4, 2), (2, 2, 2), (4, 3), (3, 2, 2), (4, 4), (3, 3, 2)]
    return [_planted(rng, shape) for shape in shapes for _ in range(3)]


class TestModularity:
    def test_uniform_graph_single_community(self, uniform_graph):
        assert modularity(uniform_graph, {n: 0 for n in uniform_graph.nodes}) == pytest.approx(0.0, abs=1e-12)

    def test_two_cliques_correct_split(self, two_cliques):
        assignment = {n: (0 if n in "abc" else 1) for n in two_cliques.nodes}
        assert modularity(two_cliques, assignment) == pytest.approx(0.5, abs=1e-9)

    def test_two_cliques_all_in_one(self, two_cliques):
        assert modularity(two_cliques, {n: 0 for n in two_cliques.nodes}) == pytest.approx(0.0, abs=1e-12)

    def test_weightless_graph(self):
        graph = build_graph(["a", "b"], {("a", "b"): 0.0})
        with pytest.raises(DegenerateGraphError):
            modularity(graph, {"a": 0, "b": 1})

    def test_assignment_must_cover_nodes(self, two_cliques):
        with pytest.raises(ParameterError):
            modularity(two_cliques, {"a": 0})

    def test_negative_weights_clamped(self):
        graph = build_graph(["a", "b", "c"], {("b", "a"): -0.4, ("a", "c"): 0.5})
        assert graph.weight("a", "b") == 0.0
        assert graph.weight("c", "a") == 0.5


class TestDetectCommunities:
    @pytest.mark.parametrize("algorithm", list(CommunityAlgorithm))
    def test_two_cliques(self, two_cliques, algorithm):
        partition = detect_communities(two_cliques, algorithm)
        assert partition.communities() == [["a", "b", "c"], ["d", "e", "f"]]
        assert partition.modularity == pytest.approx(0.5, abs=1e-9)

    def test_uniform_graph_is_one_community(self, uniform_graph):
        partition = detect_communities(uniform_graph)
        assert partition.n_communities == 1
        assert partition.modularity == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("algorithm", list(CommunityAlgorithm))
    def test_planted_blocks_recovered(self, algorithm):
        nodes = list("abcdef")
        weights = {
            (i, j): (0.9 if (i in "abc") == (j in "abc") else 0.1)
            for k, i in enumerate(nodes)
            for j in nodes[k + 1:]
        }
        graph = build_graph(nodes, weights)
        partition = detect_communities(graph, algorithm)
        assert partition.communities() == exhaustive_best(graph).communities() == [["a", "b", "c"], ["d", "e", "f"]]

    def test_weightless_graph_gives_singletons(self):
        graph = build_graph(["a", "b", "c"], {})
        partition = detect_communities(graph)
        assert partition.n_communities == 3
        assert partition.modularity == 0.0

    def test_needs_two_nodes(self):
        with pytest.raises(InsufficientPopulationError):
            detect_communities(build_graph(["a"], {}))

    @pytest.mark.parametrize("algorithm", list(CommunityAlgorithm))
    def test_close_to_exhaustive_optimum(self, algorithm):
        for graph in _corpus():
            best = exhaustive_best(graph)
            found = detect_communities(graph, algorithm)
            assert found.modularity >= best.modularity - 0.02
            assert found.modularity == pytest.approx(modularity(graph, found.assignment), abs=1e-9)

    def test_louvain_is_seeded(self):
        graph = _corpus()[-1]
        first = detect_communities(graph, CommunityAlgorithm.LOUVAIN, seed=5)
        second = detect_communities(graph, CommunityAlgorithm.LOUVAIN, seed=5)
        assert first.assignment == second.assignment


def _scaled(graph: SimilarityGraph, factor: float) -> SimilarityGraph:
    return build_graph(graph.nodes, {e: factor * w for e, w in graph.weights.items()})


def _renamed(graph: SimilarityGraph, names) -> SimilarityGraph:
    return build_graph([names[n] for n in graph.nodes], {(names[i], names[j]): w for (i, j), w in graph.weights.items()})


def _blocks(partition) -> set:
    return {frozenset(c) for c in partition.communities()}


class TestInvariances:
    @pytest.mark.parametrize("factor", [0.25, 4.0, 1024.0])
    @pytest.mark.parametrize("algorithm", list(CommunityAlgorithm))
    def test_uniform_scaling(self, algorithm, factor):
        for graph in _corpus():
            base = detect_communities(graph, algorithm)
            scaled = detect_communities(_scaled(graph, factor), algorithm)
            assert scaled.communities() == base.communities()
            assert scaled.modularity == pytest.approx(base.modularity, abs=1e-9)

    @pytest.mark.parametrize("factor", [0.3, 7.0])
    def test_scaling_keeps_modularity_of_any_assignment(self, factor):
        rng = np.random.default_rng(4)
        for graph in _corpus():
            assignment = {n: int(rng.integers(0, 3)) for n in graph.nodes}
            assert modularity(_scaled(graph, factor), assignment) == pytest.approx(modularity(graph, assignment), abs=1e-9)

    def test_relabelling_permutes_the_partition(self):
        for graph in _corpus():
            # reversed names reverse the internal node order
            names = {n: f"m{graph.size - 1 - k}" for k, n in enumerate(graph.nodes)}
            back = {v: k for k, v in names.items()}
            for search in (lambda g: detect_communities(g), exhaustive_best):
                base = search(graph)
                renamed = search(_renamed(graph, names))
                assert {frozenset(back[m] for m in block) for block in _blocks(renamed)} == _blocks(base)
                assert renamed.modularity == pytest.approx(base.modularity, abs=1e-9)

    @pytest.mark.parametrize("algorithm", list(CommunityAlgorithm))
    def test_never_worse_than_one_community(self, algorithm, uniform_graph, two_cliques):
        for graph in _corpus() + [uniform_graph, two_cliques]:
            found = detect_communities(graph, algorithm)
            whole = modularity(graph, {n: 0 for n in graph.nodes})
            assert found.modularity >= whole - 1e-12


class TestWalktrap:
    def test_merge_trace_ends_in_one_community(self, uniform_graph):
        _, trace = walktrap(uniform_graph, steps=4)
        assert len(trace) == uniform_graph.size - 1
        assert trace[-1].n_communities == 1
        assert trace[-1].modularity == pytest.approx(0.0, abs=1e-12)

    def test_disconnected_components_never_merge(self, two_cliques):
        _, trace = walktrap(two_cliques)
        assert trace[-1].n_communities == 2

    def test_walk_length_validated(self, two_cliques):
        with pytest.raises(ParameterError):
            walktrap(two_cliques, steps=0)


class TestExhaustive:
    def test_node_limit(self):
        nodes = [f"n{k}" for k in range(11)]
        with pytest.raises(ParameterError):
            exhaustive_best(build_graph(nodes, {(nodes[0], nodes[1]): 1.0}))

    def test_uniform_prefers_fewest_communities(self, uniform_graph):
        best = exhaustive_best(uniform_graph)
        assert best.n_communities == 1


class TestFiles:
    def test_edge_list_and_partition(self, tmp_path, two_cliques):
        write_edge_csv(two_cliques, tmp_path / "edges.csv")
        graph = load_edge_csv(tmp_path / "edges.csv")
        assert graph.nodes == two_cliques.nodes
        assert graph.total_weight() == pytest.approx(6.0)

        partition = detect_communities(graph)
        write_partition_json(partition, tmp_path / "partition.json")
        loaded = load_partition_json(tmp_path / "partition.json")
        assert loaded.communities() == partition.communities()
