import itertools
from functools import lru_cache

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from surfqre.code import build_memory_circuit
from surfqre.code.circuit import StabCircuit
from surfqre.decoder import (DetectorGraph, build_detector_graph, count_failures, decode_batch,
                             decode_shot, logical_error_rate, matching_weight, max_weight_matching,
                             merge_probabilities)
from surfqre.hwmodel import NoiseChannelSet, derive_noise_channels, preset
from surfqre.stabsim import enumerate_faults, inject_fault_signature, sample

BASE = derive_noise_channels(preset("baseline"))


def graph_for(d, rounds, noise=BASE):
    c = build_memory_circuit(d, rounds, noise)
    return c, build_detector_graph(enumerate_faults(c))


def apsp(graph: DetectorGraph) -> np.ndarray:
    g = nx.Graph()
    g.add_nodes_from(range(graph.num_detectors + 1))
    for a, b, w in zip(graph.u, graph.v, np.maximum(graph.weights, 1e-9)):
        a, b = int(a), int(b)
        if not g.has_edge(a, b) or g[a][b]["weight"] > w:
            g.add_edge(a, b, weight=float(w))
    n = graph.num_detectors + 1
    D = np.full((n, n), np.inf)
    for s, lengths in nx.all_pairs_dijkstra_path_length(g):
        for t, L in lengths.items():
            D[s, t] = L
    return D


def brute_force_weight(D: np.ndarray, defects, boundary: int) -> float:
    @lru_cache(maxsize=None)
    def best(rest):
        if not rest:
            return 0.0
        a, tail = rest[0], rest[1:]
        out = D[a, boundary] + best(tail)
        for i, b in enumerate(tail):
            out = min(out, D[a, b] + best(tail[:i] + tail[i + 1:]))
        return out
    return best(tuple(defects))


def test_merge_probabilities():
    assert merge_probabilities([0.1, 0.1]) == pytest.approx(0.18)
    assert merge_probabilities([0.1, 0.2, 0.3]) == pytest.approx(
        merge_probabilities([merge_probabilities([0.1, 0.2]), 0.3]))


def test_parallel_faults_merge_into_one_edge():
    c = StabCircuit.from_text("QUBITS 1\nR 0\nTICK\nX_ERROR(0.1) 0\nX_ERROR(0.1) 0\nM 0\nTICK\n"
                              "DETECTOR 0\n")
    g = build_detector_graph(enumerate_faults(c))
    assert g.num_edges == 1
    assert (int(g.u[0]), int(g.v[0])) == (0, g.boundary)
    assert g.p[0] == pytest.approx(0.18)


def test_empty_catalog_graph():
    _, g = graph_for(3, 3, NoiseChannelSet.noiseless())
    assert g.num_edges == 0
    assert g.boundary == g.num_detectors


def test_weights_positive_finite():
    _, g = graph_for(3, 3)
    assert np.all(np.isfinite(g.weights)) and np.all(g.weights > 0)


def test_single_round_graph_is_chain_like():
    c, g = graph_for(3, 1)
    z_dets = [k for k, b in enumerate(c.detector_basis) if b == "Z"]
    # every Z detector reaches the boundary through some edge path
    D = apsp(g)
    assert np.all(np.isfinite(D[z_dets, g.boundary]))


def test_graph_json_roundtrip():
    _, g = graph_for(3, 2)
    back = DetectorGraph.from_json(g.to_json())
    assert np.array_equal(back.u, g.u) and np.allclose(back.p, g.p)
    assert np.array_equal(back.obs, g.obs)


def test_zero_syndrome_no_flip():
    _, g = graph_for(3, 3)
    assert not decode_shot(g, np.zeros(g.num_detectors, bool)).any()
    assert matching_weight(g, np.zeros(g.num_detectors, bool)) == 0.0


@pytest.mark.parametrize("d,rounds", [(3, 3), (5, 1)])
def test_matching_weight_vs_brute_force_random(d, rounds):
    _, g = graph_for(d, rounds)
    D = apsp(g)
    rng = np.random.default_rng(d)
    n = g.num_detectors
    syns = np.zeros((400, n), bool)
    for s in range(400):
        k = int(rng.integers(1, 7))
        syns[s, rng.choice(n, k, replace=False)] = True
    _, w = g.matcher().decode(syns)
    for s in range(400):
        ref = brute_force_weight(D, tuple(np.flatnonzero(syns[s])), g.boundary)
        assert w[s] == pytest.approx(ref, rel=1e-9, abs=1e-5)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 9), st.data())
def test_blossom_vs_networkx(n, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 10_000)))
    W = rng.integers(0, 20, (n, n))
    W = np.triu(W, 1)
    W = W + W.T
    mate = max_weight_matching(W.astype(np.int64))
    ours = sum(W[i, mate[i]] for i in range(n) if mate[i] > i)
    g = nx.Graph()
    for i, j in itertools.combinations(range(n), 2):
        if W[i, j] > 0:
            g.add_edge(i, j, weight=int(W[i, j]))
    ref = sum(g[a][b]["weight"] for a, b in nx.max_weight_matching(g))
    assert ours == ref
    for i in range(n):
        if mate[i] >= 0:
            assert mate[mate[i]] == i


def _data_qubits(circuit, d):
    return [circuit.qubit_coords.index((float(x), float(y))) for y in range(d) for x in range(d)]


def _between_rounds(circuit):
    m = [k for k, ins in enumerate(circuit.instructions) if ins.name == "M"]
    ticks = [k for k, ins in enumerate(circuit.instructions) if ins.name == "TICK" and k > m[0]]
    return ticks[1]


@pytest.mark.parametrize("d", [3, 5])
def test_weight_one_faults_corrected(d):
    c, g = graph_for(d, d)
    at = _between_rounds(c)
    for q in _data_qubits(c, d):
        for p in "XYZ":
            det, obs = inject_fault_signature(c, at, {q: p})
            assert np.array_equal(decode_shot(g, det), obs)


def test_decoder_disabled_equals_raw_flip_rate():
    c, g = graph_for(3, 3)
    data = sample(c, 5000, seed=1)
    est, se = logical_error_rate(data, g, decode=False)
    assert est == pytest.approx(data.observable_bits.any(axis=1).mean())
    assert se > 0


def test_noiseless_rate_zero():
    c = build_memory_circuit(3, 3, NoiseChannelSet.noiseless())
    _, g = graph_for(3, 3)
    data = sample(c, 500, seed=1)
    assert logical_error_rate(data, g) == (0.0, 0.0)


def test_threads_identical():
    c, g = graph_for(5, 5)
    data = sample(c, 5000, seed=4)
    assert np.array_equal(decode_batch(g, data, threads=1), decode_batch(g, data, threads=3))


def test_suppression_d3_vs_d5():
    shots = 100_000
    rates = []
    for d in (3, 5):
        c, g = graph_for(d, d)
        data = sample(c, shots, seed=d)
        rates.append(count_failures(g, data) / shots)
    assert rates[0] > rates[1]


@pytest.mark.parametrize("pauli", ["X", "Z"])
def test_weight_two_faults_corrected_d5(pauli):
    c, g = graph_for(5, 5)
    at = _between_rounds(c)
    for a, b in itertools.combinations(_data_qubits(c, 5), 2):
        det, obs = inject_fault_signature(c, at, {a: pauli, b: pauli})
        assert np.array_equal(decode_shot(g, det), obs), (a, b)
