"""Matching graphs from fault catalogs and exact minimum-weight matching decoding.

Decoding a syndrome with defects D reduces to a maximum-weight matching on the
complete graph over D with w_ij = b_i + b_j - d_ij, where d_ij is the shortest
path distance and b_i the distance to the boundary; unmatched defects are
paired with the boundary.  Only pairs with w_ij > 0 can appear in an optimum,
so the problem splits into independent clusters which are solved with an
integer-weight blossom algorithm.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from numba import njit
from scipy.sparse.csgraph import dijkstra

from .errors import DecompositionError, ValidationError
from .stabsim import DetectionData, FaultCatalog, FaultStructure

log = logging.getLogger(__name__)

P_MAX = 0.5 - 1e-12


@dataclass
class DetectorGraph:
    """Detectors 0..n-1 plus the boundary node n.

    Edge k joins ``u[k] < v[k]`` with flip probability ``p[k]`` and flips the
    observables in bit mask ``obs[k]``.
    """

    num_detectors: int
    num_observables: int
    u: np.ndarray
    v: np.ndarray
    p: np.ndarray
    obs: np.ndarray
    undetectable_p: float = 0.0
    _matcher: Optional["Matcher"] = field(default=None, init=False, repr=False, compare=False)

    @property
    def boundary(self) -> int:
        return self.num_detectors

    @property
    def num_edges(self) -> int:
        return len(self.p)

    @property
    def weights(self) -> np.ndarray:
        p = np.clip(self.p, 1e-300, P_MAX)
        return np.log((1.0 - p) / p)

    def edge_map(self) -> Dict[Tuple[int, int], Tuple[float, int]]:
        return {(int(a), int(b)): (float(p), int(m)) for a, b, p, m in zip(self.u, self.v, self.p, self.obs)}

    def matcher(self) -> "Matcher":
        if self._matcher is None:
            self._matcher = Matcher(self)
        return self._matcher

    def to_json(self) -> str:
        nodes = [{"id": i, "kind": "detector"} for i in range(self.num_detectors)]
        nodes.append({"id": self.boundary, "kind": "boundary"})
        edges = [{"u": int(a), "v": int(b), "p": float(p), "weight": float(w),
                  "observables": [i for i in range(self.num_observables) if (int(m) >> i) & 1]}
                 for a, b, p, w, m in zip(self.u, self.v, self.p, self.weights, self.obs)]
        return json.dumps({"num_detectors": self.num_detectors,
                           "num_observables": self.num_observables,
                           "boundary": self.boundary,
                           "undetectable_p": self.undetectable_p,
                           "nodes": nodes, "edges": edges}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "DetectorGraph":
        data = json.loads(text)
        edges = data["edges"]
        mask = [sum(1 << i for i in e["observables"]) for e in edges]
        return cls(int(data["num_detectors"]), int(data["num_observables"]),
                   np.array([e["u"] for e in edges], dtype=np.int64),
                   np.array([e["v"] for e in edges], dtype=np.int64),
                   np.array([e["p"] for e in edges], dtype=np.float64),
                   np.array(mask, dtype=np.uint64), float(data.get("undetectable_p", 0.0)))


# --- graph construction ---------------------------------------------------------

@dataclass
class GraphTemplate:
    """Rate-independent mapping from fault components to graph edges.

    Entry e = (key, mask) collects the components listed in ``incidence[e]``;
    a key is a detector pair with the boundary written as ``n``.
    """

    num_detectors: int
    num_observables: int
    key_u: np.ndarray
    key_v: np.ndarray
    entry_key: np.ndarray
    entry_mask: np.ndarray
    incidence: sp.csr_matrix        # entries x components
    undetectable: np.ndarray        # components flipping an observable but no detector

    def graph(self, comp_p: np.ndarray) -> DetectorGraph:
        q = np.clip(comp_p, 0.0, P_MAX)
        logs = self.incidence @ np.log1p(-2.0 * q)
        entry_p = 0.5 * -np.expm1(logs)
        keep = entry_p > 0
        order = np.lexsort((-entry_p, self.entry_key))
        order = order[keep[order]]
        first = np.ones(len(order), dtype=bool)
        first[1:] = self.entry_key[order][1:] != self.entry_key[order][:-1]
        chosen = order[first]
        n_conflict = len(order) - len(chosen)
        if n_conflict:
            log.debug("%d edges with conflicting observable masks; kept the most likely", n_conflict)
        k = self.entry_key[chosen]
        und = comp_p[self.undetectable]
        und_p = float(0.5 * -np.expm1(np.log1p(-2.0 * np.clip(und, 0, P_MAX)).sum())) if len(und) else 0.0
        return DetectorGraph(self.num_detectors, self.num_observables,
                             self.key_u[k].copy(), self.key_v[k].copy(), entry_p[chosen],
                             self.entry_mask[chosen].copy(), und_p)


def _rows(m: sp.csr_matrix, i: int) -> np.ndarray:
    return m.indices[m.indptr[i]:m.indptr[i + 1]]


def _decompose(dets: Sequence[int], mask: int, known: Dict[Tuple[int, int], set], n: int):
    """Split a detector set into known edges whose masks XOR to ``mask``."""
    dets = sorted(dets)
    if not dets:
        return [] if mask == 0 else None
    a = dets[0]
    rest = dets[1:]
    options = [((a, n), rest)] + [((a, b), rest[:i] + rest[i + 1:]) for i, b in enumerate(rest)]
    for key, remaining in options:
        for m in sorted(known.get(key, ())):
            sub = _decompose(remaining, mask ^ m, known, n)
            if sub is not None:
                return [(key, m)] + sub
    return None


def graph_template(structure: FaultStructure) -> GraphTemplate:
    cached = getattr(structure, "_graph_template", None)
    if cached is not None:
        return cached
    n = structure.num_detectors
    comp_entries: List[List[Tuple[Tuple[int, int], int]]] = []
    hard: List[int] = []
    undetectable = []
    sizes = np.diff(structure.sig.indptr)
    for c in range(len(structure.instr)):
        dets = _rows(structure.sig, c)
        if len(dets) == 0:
            if structure.obs[c]:
                undetectable.append(c)
            comp_entries.append([])
            continue
        if sizes[c] <= 2:
            comp_entries.append([(_key(dets, n), int(structure.obs[c]))])
            continue
        parts = []
        ok = True
        for sig, obs in ((structure.sig_x, structure.obs_x), (structure.sig_z, structure.obs_z)):
            pd = _rows(sig, c)
            if len(pd) == 0:
                continue
            if len(pd) > 2:
                ok = False
                break
            parts.append((_key(pd, n), int(obs[c])))
        comp_entries.append(parts if ok else [])
        if not ok:
            hard.append(c)
    if hard:
        known: Dict[Tuple[int, int], set] = {}
        for ents in comp_entries:
            for key, m in ents:
                known.setdefault(key, set()).add(m)
        for c in hard:
            dec = _decompose(list(_rows(structure.sig, c)), int(structure.obs[c]), known, n)
            if dec is None:
                raise DecompositionError(
                    f"fault component {c} (instruction {structure.instr[c]}, group "
                    f"{structure.group[c]}) flips detectors {list(_rows(structure.sig, c))} "
                    "and cannot be split into graph-like edges")
            comp_entries[c] = dec
    entry_index: Dict[Tuple[Tuple[int, int], int], int] = {}
    key_index: Dict[Tuple[int, int], int] = {}
    rows, cols = [], []
    for c, ents in enumerate(comp_entries):
        for key, m in ents:
            key_index.setdefault(key, len(key_index))
            eid = entry_index.setdefault((key, m), len(entry_index))
            rows.append(eid)
            cols.append(c)
    keys = list(key_index)
    entries = list(entry_index)
    tmpl = GraphTemplate(
        n, structure.num_observables,
        np.array([k[0] for k in keys], dtype=np.int64), np.array([k[1] for k in keys], dtype=np.int64),
        np.array([key_index[k] for k, _ in entries], dtype=np.int64),
        np.array([m for _, m in entries], dtype=np.uint64),
        sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(entries), len(structure.instr))),
        np.array(undetectable, dtype=np.int64))
    structure._graph_template = tmpl
    return tmpl


def _key(dets, n: int) -> Tuple[int, int]:
    if len(dets) == 1:
        return (int(dets[0]), n)
    a, b = int(dets[0]), int(dets[1])
    return (a, b) if a < b else (b, a)


def build_detector_graph(catalog: FaultCatalog) -> DetectorGraph:
    """Merge the catalog's faults into a weighted matching graph.

    Faults flipping more than two detectors are split into their X and Z
    parts; if a part is still too large it is expressed through edges that
    other faults already provide.
    """
    tmpl = graph_template(catalog.structure)
    p = np.zeros(len(catalog.structure.instr))
    p[catalog.index] = catalog.probability[catalog.index]
    return tmpl.graph(p)


def merge_probabilities(ps: Sequence[float]) -> float:
    """Probability that an odd number of independent events fire."""
    return float(0.5 * (1.0 - np.prod(1.0 - 2.0 * np.asarray(ps, dtype=np.float64))))


# --- exact blossom (integer weights, maximum weight matching) -------------------
# Vertices are 1..n, blossoms n+1..2n.  Rows of V:
_LAB, _MATCH, _SLACK, _ST, _PA, _S, _VIS, _FLEN = range(8)
# QS: head, tail, lca stamp, n, n_x
_INF = np.int64(2) ** 62


@njit(cache=True)
def _edelta(GU, GV, GW, V, a, b):
    eu = GU[a, b]
    ev = GV[a, b]
    return V[_LAB, eu] + V[_LAB, ev] - 2 * GW[eu, ev]


@njit(cache=True)
def _update_slack(GU, GV, GW, V, u, x):
    s = V[_SLACK, x]
    if s == 0 or _edelta(GU, GV, GW, V, u, x) < _edelta(GU, GV, GW, V, s, x):
        V[_SLACK, x] = u


@njit(cache=True)
def _set_slack(GU, GV, GW, V, QS, x):
    n = QS[3]
    V[_SLACK, x] = 0
    for u in range(1, n + 1):
        if GW[u, x] > 0 and V[_ST, u] != x and V[_S, V[_ST, u]] == 0:
            _update_slack(GU, GV, GW, V, u, x)


@njit(cache=True)
def _q_push(V, FL, Q, QS, x, stack):
    n = QS[3]
    stack[0] = x
    top = 1
    while top > 0:
        top -= 1
        y = stack[top]
        if y <= n:
            if QS[1] >= Q.shape[0]:
                h = QS[0]
                L = QS[1] - h
                for i in range(L):
                    Q[i] = Q[h + i]
                QS[0] = 0
                QS[1] = L
            Q[QS[1]] = y
            QS[1] += 1
        else:
            for i in range(V[_FLEN, y] - 1, -1, -1):
                stack[top] = FL[y, i]
                top += 1


@njit(cache=True)
def _set_st(V, FL, QS, x, b, stack):
    n = QS[3]
    stack[0] = x
    top = 1
    while top > 0:
        top -= 1
        y = stack[top]
        V[_ST, y] = b
        if y > n:
            for i in range(V[_FLEN, y]):
                stack[top] = FL[y, i]
                top += 1


@njit(cache=True)
def _get_pr(V, FL, b, xr):
    L = V[_FLEN, b]
    pr = 0
    while FL[b, pr] != xr:
        pr += 1
    if pr % 2 == 1:
        i = 1
        j = L - 1
        while i < j:
            t = FL[b, i]
            FL[b, i] = FL[b, j]
            FL[b, j] = t
            i += 1
            j -= 1
        return L - pr
    return pr


@njit(cache=True)
def _set_match(GU, GV, V, FF, FL, QS, u0, v0, pairs, tmp):
    n = QS[3]
    pairs[0, 0] = u0
    pairs[0, 1] = v0
    top = 1
    while top > 0:
        top -= 1
        u = pairs[top, 0]
        v = pairs[top, 1]
        V[_MATCH, u] = GV[u, v]
        if u > n:
            xr = FF[u, GU[u, v]]
            pr = _get_pr(V, FL, u, xr)
            for i in range(pr):
                pairs[top, 0] = FL[u, i]
                pairs[top, 1] = FL[u, i ^ 1]
                top += 1
            pairs[top, 0] = xr
            pairs[top, 1] = v
            top += 1
            L = V[_FLEN, u]
            for i in range(L):
                tmp[i] = FL[u, (i + pr) % L]
            for i in range(L):
                FL[u, i] = tmp[i]


@njit(cache=True)
def _augment(GU, GV, V, FF, FL, QS, u, v, pairs, tmp):
    while True:
        xnv = V[_ST, V[_MATCH, u]]
        _set_match(GU, GV, V, FF, FL, QS, u, v, pairs, tmp)
        if xnv == 0:
            return
        _set_match(GU, GV, V, FF, FL, QS, xnv, V[_ST, V[_PA, xnv]], pairs, tmp)
        u = V[_ST, V[_PA, xnv]]
        v = xnv


@njit(cache=True)
def _get_lca(V, QS, u, v):
    QS[2] += 1
    t = QS[2]
    while u != 0 or v != 0:
        if u != 0:
            if V[_VIS, u] == t:
                return u
            V[_VIS, u] = t
            u = V[_ST, V[_MATCH, u]]
            if u != 0:
                u = V[_ST, V[_PA, u]]
        w = u
        u = v
        v = w
    return 0


@njit(cache=True)
def _add_blossom(GU, GV, GW, V, FF, FL, Q, QS, u, lca, v, stack):
    n = QS[3]
    b = n + 1
    while b <= QS[4] and V[_ST, b] != 0:
        b += 1
    if b > QS[4]:
        QS[4] += 1
    n_x = QS[4]
    V[_LAB, b] = 0
    V[_S, b] = 0
    V[_MATCH, b] = V[_MATCH, lca]
    L = 0
    FL[b, L] = lca
    L += 1
    x = u
    while x != lca:
        FL[b, L] = x
        L += 1
        y = V[_ST, V[_MATCH, x]]
        FL[b, L] = y
        L += 1
        V[_FLEN, b] = L
        _q_push(V, FL, Q, QS, y, stack)
        x = V[_ST, V[_PA, y]]
    i = 1
    j = L - 1
    while i < j:
        t = FL[b, i]
        FL[b, i] = FL[b, j]
        FL[b, j] = t
        i += 1
        j -= 1
    x = v
    while x != lca:
        FL[b, L] = x
        L += 1
        y = V[_ST, V[_MATCH, x]]
        FL[b, L] = y
        L += 1
        V[_FLEN, b] = L
        _q_push(V, FL, Q, QS, y, stack)
        x = V[_ST, V[_PA, y]]
    V[_FLEN, b] = L
    _set_st(V, FL, QS, b, b, stack)
    for x in range(1, n_x + 1):
        GW[b, x] = 0
        GW[x, b] = 0
    for x in range(1, n + 1):
        FF[b, x] = 0
    for i in range(L):
        xs = FL[b, i]
        for x in range(1, n_x + 1):
            if GW[b, x] == 0 or _edelta(GU, GV, GW, V, xs, x) < _edelta(GU, GV, GW, V, b, x):
                GU[b, x] = GU[xs, x]
                GV[b, x] = GV[xs, x]
                GW[b, x] = GW[xs, x]
                GU[x, b] = GU[x, xs]
                GV[x, b] = GV[x, xs]
                GW[x, b] = GW[x, xs]
        for x in range(1, n + 1):
            if FF[xs, x] != 0:
                FF[b, x] = xs
    _set_slack(GU, GV, GW, V, QS, b)


@njit(cache=True)
def _expand_blossom(GU, GV, GW, V, FF, FL, Q, QS, b, stack):
    L = V[_FLEN, b]
    for i in range(L):
        _set_st(V, FL, QS, FL[b, i], FL[b, i], stack)
    xr = FF[b, GU[b, V[_PA, b]]]
    pr = _get_pr(V, FL, b, xr)
    for i in range(0, pr, 2):
        xs = FL[b, i]
        xns = FL[b, i + 1]
        V[_PA, xs] = GU[xns, xs]
        V[_S, xs] = 1
        V[_S, xns] = 0
        V[_SLACK, xs] = 0
        _set_slack(GU, GV, GW, V, QS, xns)
        _q_push(V, FL, Q, QS, xns, stack)
    V[_S, xr] = 1
    V[_PA, xr] = V[_PA, b]
    for i in range(pr + 1, L):
        xs = FL[b, i]
        V[_S, xs] = -1
        _set_slack(GU, GV, GW, V, QS, xs)
    V[_ST, b] = 0


@njit(cache=True)
def _on_found_edge(GU, GV, GW, V, FF, FL, Q, QS, a, c, stack, pairs, tmp):
    eu = GU[a, c]
    ev = GV[a, c]
    u = V[_ST, eu]
    v = V[_ST, ev]
    if V[_S, v] == -1:
        V[_PA, v] = eu
        V[_S, v] = 1
        nu = V[_ST, V[_MATCH, v]]
        V[_SLACK, v] = 0
        V[_SLACK, nu] = 0
        V[_S, nu] = 0
        _q_push(V, FL, Q, QS, nu, stack)
    elif V[_S, v] == 0:
        lca = _get_lca(V, QS, u, v)
        if lca == 0:
            _augment(GU, GV, V, FF, FL, QS, u, v, pairs, tmp)
            _augment(GU, GV, V, FF, FL, QS, v, u, pairs, tmp)
            return True
        _add_blossom(GU, GV, GW, V, FF, FL, Q, QS, u, lca, v, stack)
    return False


@njit(cache=True)
def _matching_phase(GU, GV, GW, V, FF, FL, Q, QS, stack, pairs, tmp):
    n = QS[3]
    n_x = QS[4]
    for x in range(1, n_x + 1):
        V[_S, x] = -1
        V[_SLACK, x] = 0
    QS[0] = 0
    QS[1] = 0
    for x in range(1, n_x + 1):
        if V[_ST, x] == x and V[_MATCH, x] == 0:
            V[_PA, x] = 0
            V[_S, x] = 0
            _q_push(V, FL, Q, QS, x, stack)
    if QS[1] == QS[0]:
        return False
    while True:
        while QS[0] < QS[1]:
            u = Q[QS[0]]
            QS[0] += 1
            if V[_S, V[_ST, u]] == 1:
                continue
            for v in range(1, n + 1):
                if GW[u, v] > 0 and V[_ST, u] != V[_ST, v]:
                    if _edelta(GU, GV, GW, V, u, v) == 0:
                        if _on_found_edge(GU, GV, GW, V, FF, FL, Q, QS, u, v, stack, pairs, tmp):
                            return True
                    else:
                        _update_slack(GU, GV, GW, V, u, V[_ST, v])
        n_x = QS[4]
        d = _INF
        for b in range(n + 1, n_x + 1):
            if V[_ST, b] == b and V[_S, b] == 1:
                d = min(d, V[_LAB, b] // 2)
        for x in range(1, n_x + 1):
            s = V[_SLACK, x]
            if V[_ST, x] == x and s != 0:
                if V[_S, x] == -1:
                    d = min(d, _edelta(GU, GV, GW, V, s, x))
                elif V[_S, x] == 0:
                    d = min(d, _edelta(GU, GV, GW, V, s, x) // 2)
        for u in range(1, n + 1):
            su = V[_S, V[_ST, u]]
            if su == 0:
                if V[_LAB, u] <= d:
                    return False
                V[_LAB, u] -= d
            elif su == 1:
                V[_LAB, u] += d
        for b in range(n + 1, n_x + 1):
            if V[_ST, b] == b:
                sb = V[_S, V[_ST, b]]
                if sb == 0:
                    V[_LAB, b] += 2 * d
                elif sb == 1:
                    V[_LAB, b] -= 2 * d
        QS[0] = 0
        QS[1] = 0
        for x in range(1, n_x + 1):
            s = V[_SLACK, x]
            if V[_ST, x] == x and s != 0 and V[_ST, s] != x and _edelta(GU, GV, GW, V, s, x) == 0:
                if _on_found_edge(GU, GV, GW, V, FF, FL, Q, QS, s, x, stack, pairs, tmp):
                    return True
        for b in range(n + 1, QS[4] + 1):
            if V[_ST, b] == b and V[_S, b] == 1 and V[_LAB, b] == 0:
                _expand_blossom(GU, GV, GW, V, FF, FL, Q, QS, b, stack)


@njit(cache=True)
def max_weight_matching(W):
    """Maximum-weight matching of a symmetric non-negative int64 matrix.

    Zero entries are non-edges.  Returns ``mate`` with ``mate[i] = -1`` for
    unmatched vertices.
    """
    n = W.shape[0]
    M = 2 * n + 2
    GU = np.zeros((M, M), np.int64)
    GV = np.zeros((M, M), np.int64)
    GW = np.zeros((M, M), np.int64)
    V = np.zeros((8, M), np.int64)
    FF = np.zeros((M, n + 1), np.int64)
    FL = np.zeros((M, M), np.int64)
    Q = np.zeros(M * M + 16, np.int64)
    QS = np.zeros(5, np.int64)
    stack = np.zeros(4 * M + 16, np.int64)
    pairs = np.zeros((4 * M + 16, 2), np.int64)
    tmp = np.zeros(M, np.int64)
    QS[3] = n
    QS[4] = n
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            GU[u, v] = u
            GV[u, v] = v
            GW[u, v] = W[u - 1, v - 1]
    for u in range(M):
        V[_ST, u] = u
    w_max = 0
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            FF[u, v] = u if u == v else 0
            if GW[u, v] > w_max:
                w_max = GW[u, v]
    for u in range(n + 1, M):
        V[_ST, u] = 0
    for u in range(1, n + 1):
        V[_LAB, u] = w_max
    while _matching_phase(GU, GV, GW, V, FF, FL, Q, QS, stack, pairs, tmp):
        pass
    mate = np.full(n, -1, np.int64)
    for u in range(1, n + 1):
        if V[_MATCH, u] != 0:
            mate[u - 1] = V[_MATCH, u] - 1
    return mate


# --- shortest paths and decoding --------------------------------------------------

@njit(cache=True)
def _path_parity(pred, indptr, indices, masks):
    N = pred.shape[0]
    par = np.zeros((N, N), np.uint64)
    done = np.zeros(N, np.bool_)
    stack = np.empty(N, np.int64)
    for s in range(N):
        done[:] = False
        done[s] = True
        for v in range(N):
            if done[v]:
                continue
            top = 0
            x = v
            while not done[x] and pred[s, x] >= 0:
                stack[top] = x
                top += 1
                x = pred[s, x]
            if not done[x]:
                done[x] = True
                for i in range(top):
                    done[stack[i]] = True
                continue
            while top > 0:
                top -= 1
                y = stack[top]
                p = pred[s, y]
                m = np.uint64(0)
                for k in range(indptr[p], indptr[p + 1]):
                    if indices[k] == y:
                        m = masks[k]
                        break
                par[s, y] = par[s, p] ^ m
                done[y] = True
    return par


_BIG = 1.0e6


@njit(cache=True)
def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@njit(cache=True, nogil=True)
def _decode_rows(syndromes, dist, par, B, scale, out_pred, out_w):
    S = syndromes.shape[0]
    n = syndromes.shape[1]
    defects = np.empty(n, np.int64)
    for s in range(S):
        k = 0
        for i in range(n):
            if syndromes[s, i]:
                defects[k] = i
                k += 1
        pred = np.uint64(0)
        w = 0.0
        if k == 0:
            out_pred[s] = pred
            out_w[s] = w
            continue
        bd = np.empty(k)
        for a in range(k):
            x = dist[defects[a], B]
            bd[a] = x if x < _BIG else _BIG
        parent = np.arange(k)
        for a in range(k):
            da = defects[a]
            for b in range(a + 1, k):
                if dist[da, defects[b]] < bd[a] + bd[b]:
                    ra = _find(parent, a)
                    rb = _find(parent, b)
                    if ra != rb:
                        if ra < rb:
                            parent[rb] = ra
                        else:
                            parent[ra] = rb
        root = np.empty(k, np.int64)
        for a in range(k):
            root[a] = _find(parent, a)
        handled = np.zeros(k, np.bool_)
        members = np.empty(k, np.int64)
        for a in range(k):
            if handled[a]:
                continue
            r = root[a]
            m = 0
            for b in range(a, k):
                if root[b] == r:
                    members[m] = b
                    m += 1
                    handled[b] = True
            if m == 1:
                pred ^= par[defects[a], B]
                w += bd[a]
            elif m == 2:
                i = defects[members[0]]
                j = defects[members[1]]
                pred ^= par[i, j]
                w += dist[i, j]
            else:
                Wm = np.zeros((m, m), np.int64)
                for x in range(m):
                    for y in range(x + 1, m):
                        gain = bd[members[x]] + bd[members[y]] - dist[defects[members[x]], defects[members[y]]]
                        if gain > 0:
                            iv = np.int64(np.round(gain * scale))
                            if iv < 1:
                                iv = 1
                            Wm[x, y] = iv
                            Wm[y, x] = iv
                mate = max_weight_matching(Wm)
                for x in range(m):
                    y = mate[x]
                    if y < 0:
                        pred ^= par[defects[members[x]], B]
                        w += bd[members[x]]
                    elif x < y:
                        i = defects[members[x]]
                        j = defects[members[y]]
                        pred ^= par[i, j]
                        w += dist[i, j]
        out_pred[s] = pred
        out_w[s] = w


class Matcher:
    """All-pairs shortest paths plus path observable parities for one graph."""

    def __init__(self, graph: DetectorGraph, scale: float = 2.0 ** 20):
        n = graph.num_detectors
        N = n + 1
        self.graph = graph
        self.B = n
        self.scale = float(scale)
        w = np.maximum(graph.weights, 1e-9)
        u, v = graph.u, graph.v
        adj = sp.csr_matrix((np.concatenate([w, w]), (np.concatenate([u, v]), np.concatenate([v, u]))),
                            shape=(N, N))
        adj.sum_duplicates()
        masks = sp.csr_matrix((np.concatenate([graph.obs, graph.obs]).astype(np.float64),
                               (np.concatenate([u, v]), np.concatenate([v, u]))), shape=(N, N))
        if N > 1 and graph.num_edges:
            self.dist, pred = dijkstra(adj, directed=True, return_predecessors=True)
            mcsr = masks.tocsr()
            mcsr.sort_indices()
            self.par = _path_parity(pred.astype(np.int64), mcsr.indptr.astype(np.int64),
                                    mcsr.indices.astype(np.int64),
                                    np.round(mcsr.data).astype(np.uint64))
        else:
            self.dist = np.full((N, N), np.inf)
            np.fill_diagonal(self.dist, 0.0)
            self.par = np.zeros((N, N), np.uint64)

    def decode(self, syndromes: np.ndarray, threads: int = 1) -> Tuple[np.ndarray, np.ndarray]:
        """Predicted observable masks and matching weights for a (shots, n) bit matrix."""
        syn = np.ascontiguousarray(syndromes, dtype=np.bool_)
        if syn.ndim != 2 or syn.shape[1] != self.B:
            raise ValidationError(f"syndrome length must be {self.B}")
        S = syn.shape[0]
        pred = np.zeros(S, np.uint64)
        w = np.zeros(S)
        if threads <= 1 or S < 2048:
            _decode_rows(syn, self.dist, self.par, self.B, self.scale, pred, w)
        else:
            bounds = np.linspace(0, S, threads + 1).astype(int)
            with ThreadPoolExecutor(threads) as ex:
                futs = [ex.submit(_decode_rows, syn[a:b], self.dist, self.par, self.B, self.scale,
                                  pred[a:b], w[a:b]) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
                for f in futs:
                    f.result()
        return pred, w


def decode_shot(graph: DetectorGraph, syndrome: Sequence[bool]) -> np.ndarray:
    """Observable flips predicted for one syndrome (bool vector per observable)."""
    syn = np.asarray(syndrome, dtype=bool)
    if syn.shape != (graph.num_detectors,):
        raise ValidationError(f"syndrome length must be {graph.num_detectors}, got {syn.shape}")
    pred, _ = graph.matcher().decode(syn[None, :])
    return _mask_bits(pred, graph.num_observables)[0]


def matching_weight(graph: DetectorGraph, syndrome: Sequence[bool]) -> float:
    _, w = graph.matcher().decode(np.asarray(syndrome, dtype=bool)[None, :])
    return float(w[0])


def _mask_bits(masks: np.ndarray, k: int) -> np.ndarray:
    return ((masks[:, None] >> np.arange(k, dtype=np.uint64)) & np.uint64(1)).astype(bool)


def decode_batch(graph: DetectorGraph, data: DetectionData, threads: int = 1) -> np.ndarray:
    pred, _ = graph.matcher().decode(data.detector_bits, threads)
    return _mask_bits(pred, graph.num_observables)


def count_failures(graph: DetectorGraph, data: DetectionData, threads: int = 1,
                   decode: bool = True) -> int:
    """Shots where any predicted observable flip differs from the actual one."""
    if decode:
        pred = decode_batch(graph, data, threads)
    else:
        pred = np.zeros_like(data.observable_bits)
    return int(np.any(pred != data.observable_bits, axis=1).sum())


def logical_error_rate(data: DetectionData, graph: DetectorGraph, decode: bool = True,
                       threads: int = 1) -> Tuple[float, float]:
    """Failure fraction and its binomial standard error."""
    if data.num_detectors != graph.num_detectors:
        raise ValidationError("detection data and graph disagree on the detector count")
    fails = count_failures(graph, data, threads, decode)
    p = fails / data.shots
    return p, math.sqrt(p * (1.0 - p) / data.shots)
