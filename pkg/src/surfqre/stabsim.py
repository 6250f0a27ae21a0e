"""Pauli-frame Monte Carlo sampling and single-fault enumeration."""

from __future__ import annotations

import io
import logging
import struct
from collections import OrderedDict
from dataclasses import dataclass
from typing import Iterator, List, Tuple

import numpy as np
import scipy.sparse as sp

from .code.circuit import ARITY, StabCircuit
from .errors import ValidationError

log = logging.getLogger(__name__)

SHOT_BLOCK = 1024
_DENSE_THRESHOLD = 0.08

# Pauli codes: 0=I, 1=X, 2=Y, 3=Z.  Two-qubit component k in 1..15 is (k >> 2, k & 3).
_HAS_X = np.array([0, 1, 1, 0], dtype=bool)
_HAS_Z = np.array([0, 0, 1, 1], dtype=bool)


@dataclass
class DetectionData:
    shots: int
    detector_bits: np.ndarray      # (shots, n_detectors) bool
    observable_bits: np.ndarray    # (shots, n_observables) bool
    seed: int

    def __post_init__(self) -> None:
        if self.detector_bits.shape[0] != self.shots or self.observable_bits.shape[0] != self.shots:
            raise ValidationError("DetectionData dimensions disagree with shot count")

    @property
    def num_detectors(self) -> int:
        return self.detector_bits.shape[1]

    @property
    def num_observables(self) -> int:
        return self.observable_bits.shape[1]

    _MAGIC = b"SQDD"

    def to_bytes(self) -> bytes:
        """Header (magic, version, shots, detectors, observables, seed) and packed rows."""
        head = struct.pack("<4sIQIIq", self._MAGIC, 1, self.shots, self.num_detectors,
                           self.num_observables, self.seed)
        det = np.packbits(self.detector_bits, axis=1, bitorder="little")
        obs = np.packbits(self.observable_bits, axis=1, bitorder="little")
        return head + det.tobytes() + obs.tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "DetectionData":
        size = struct.calcsize("<4sIQIIq")
        magic, version, shots, nd, no, seed = struct.unpack("<4sIQIIq", blob[:size])
        if magic != cls._MAGIC or version != 1:
            raise ValidationError("not a detection-data file")
        rd, ro = (nd + 7) // 8, (no + 7) // 8
        body = np.frombuffer(blob, dtype=np.uint8, offset=size)
        if body.size != shots * (rd + ro):
            raise ValidationError("truncated detection-data file")
        det = np.unpackbits(body[:shots * rd].reshape(shots, rd), axis=1, count=nd,
                            bitorder="little").astype(bool)
        obs = np.unpackbits(body[shots * rd:].reshape(shots, ro), axis=1, count=no,
                            bitorder="little").astype(bool)
        return cls(int(shots), det, obs, int(seed))

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = [f"D{i}" for i in range(self.num_detectors)] + [f"L{i}" for i in range(self.num_observables)]
        buf.write("shot," + ",".join(cols) + "\n")
        both = np.concatenate([self.detector_bits, self.observable_bits], axis=1).astype(np.uint8)
        for s, row in enumerate(both):
            buf.write(f"{s}," + ",".join(map(str, row)) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, seed: int = 0) -> "DetectionData":
        lines = [ln for ln in text.strip().splitlines() if ln]
        header = lines[0].split(",")[1:]
        nd = sum(1 for h in header if h.startswith("D"))
        rows = np.array([[int(v) for v in ln.split(",")[1:]] for ln in lines[1:]], dtype=np.uint8)
        rows = rows.reshape(len(lines) - 1, len(header)).astype(bool)
        return cls(rows.shape[0], rows[:, :nd].copy(), rows[:, nd:].copy(), seed)


# --- compiled circuit ----------------------------------------------------------

@dataclass
class _Compiled:
    ops: list
    n_qubits: int
    n_meas: int
    det_matrix: sp.csr_matrix
    obs_matrix: sp.csr_matrix


def _compile(circuit: StabCircuit) -> _Compiled:
    cached = circuit._cache.get("compiled")
    if cached is not None:
        return cached
    ops = []
    rec = 0
    for ins in circuit.instructions:
        t = np.asarray(ins.targets, dtype=np.int64)
        if ins.name == "TICK":
            continue
        if ins.name == "M":
            ops.append(("M", t, None, rec))
            rec += len(t)
        elif ins.name in ("R", "H"):
            ops.append((ins.name, t, None, 0))
        elif ins.name == "CX":
            ops.append(("CX", t, None, 0))
        else:
            probs = np.asarray(ins.probs, dtype=np.float64)
            if probs.max(initial=0.0) > 0:
                ops.append((ins.name, t, probs, 0))
    det = _parity_matrix(circuit.detectors, rec)
    obs = _parity_matrix(circuit.observables, rec)
    comp = _Compiled(ops, circuit.num_qubits, rec, det, obs)
    circuit._cache["compiled"] = comp
    return comp


def _parity_matrix(rows, n_meas) -> sp.csr_matrix:
    indptr = [0]
    indices: List[int] = []
    for r in rows:
        if any(m < 0 or m >= n_meas for m in r):
            raise ValidationError("detector/observable references a missing measurement")
        indices.extend(r)
        indptr.append(len(indices))
    data = np.ones(len(indices), dtype=np.uint8)
    return sp.csr_matrix((data, np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
                         shape=(len(rows), n_meas))


def _bernoulli_events(rng: np.random.Generator, probs: np.ndarray, shots: int) -> Tuple[np.ndarray, np.ndarray]:
    """(group, shot) positions of independent Bernoulli(probs[group]) successes."""
    k = len(probs)
    pmax = float(probs.max())
    if pmax <= 0.0:
        e = np.empty(0, dtype=np.int64)
        return e, e
    if pmax >= _DENSE_THRESHOLD:
        g, s = np.nonzero(rng.random((k, shots)) < probs[:, None])
        return g, s
    n = k * shots
    expected = n * pmax
    chunk = int(expected + 6.0 * np.sqrt(expected) + 16)
    parts = []
    pos = -1
    while True:
        cs = pos + np.cumsum(rng.geometric(pmax, size=chunk))
        if cs[-1] >= n:
            parts.append(cs[cs < n])
            break
        parts.append(cs)
        pos = int(cs[-1])
    flat = np.concatenate(parts) if len(parts) > 1 else parts[0]
    g, s = np.divmod(flat, shots)
    if probs.min() < pmax:
        keep = rng.random(len(flat)) * pmax < probs[g]
        g, s = g[keep], s[keep]
    return g, s


def _run_block(comp: _Compiled, shots: int, rng: np.random.Generator):
    x = np.zeros((comp.n_qubits, shots), dtype=bool)
    z = np.zeros((comp.n_qubits, shots), dtype=bool)
    rec = np.zeros((comp.n_meas, shots), dtype=np.uint8)
    for name, t, probs, r0 in comp.ops:
        if name == "CX":
            c, tg = t[0::2], t[1::2]
            x[tg] ^= x[c]
            z[c] ^= z[tg]
        elif name == "H":
            tmp = x[t].copy()
            x[t] = z[t]
            z[t] = tmp
        elif name == "R":
            x[t] = False
            z[t] = rng.random((len(t), shots)) < 0.5
        elif name == "M":
            rec[r0:r0 + len(t)] = x[t]
            z[t] = rng.random((len(t), shots)) < 0.5
        elif name == "X_ERROR":
            g, s = _bernoulli_events(rng, probs, shots)
            x[t[g], s] ^= True
        elif name == "DEPOLARIZE1":
            g, s = _bernoulli_events(rng, probs, shots)
            p = rng.integers(1, 4, size=len(g))
            q = t[g]
            hx, hz = _HAS_X[p], _HAS_Z[p]
            x[q[hx], s[hx]] ^= True
            z[q[hz], s[hz]] ^= True
        elif name == "DEPOLARIZE2":
            g, s = _bernoulli_events(rng, probs, shots)
            k = rng.integers(1, 16, size=len(g))
            for q, pa in ((t[0::2][g], k >> 2), (t[1::2][g], k & 3)):
                hx, hz = _HAS_X[pa], _HAS_Z[pa]
                x[q[hx], s[hx]] ^= True
                z[q[hz], s[hz]] ^= True
    det = (comp.det_matrix @ rec) & 1
    obs = (comp.obs_matrix @ rec) & 1
    return det.T.astype(bool), obs.T.astype(bool)


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed) & (2**63 - 1), block])))


def sample_blocks(circuit: StabCircuit, shots: int, seed: int,
                  first_block: int = 0) -> Iterator[DetectionData]:
    """Yield DetectionData chunks of at most SHOT_BLOCK shots.

    Block i draws from a stream seeded by (seed, i), so results do not depend
    on how blocks are distributed over workers.
    """
    if isinstance(shots, bool) or int(shots) != shots or shots < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")
    comp = _compile(circuit)
    done = 0
    block = first_block
    while done < shots:
        n = min(SHOT_BLOCK, shots - done)
        det, obs = _run_block(comp, n, block_rng(seed, block))
        yield DetectionData(n, det, obs, seed)
        done += n
        block += 1


def sample(circuit: StabCircuit, shots: int, seed: int) -> DetectionData:
    parts = list(sample_blocks(circuit, shots, seed))
    return DetectionData(shots, np.concatenate([p.detector_bits for p in parts]),
                         np.concatenate([p.observable_bits for p in parts]), seed)


def sample_range(circuit: StabCircuit, block_start: int, block_stop: int, seed: int,
                 total_shots: int) -> DetectionData:
    """Blocks [block_start, block_stop) of a run of ``total_shots`` shots (worker helper)."""
    comp = _compile(circuit)
    dets, obss = [], []
    for block in range(block_start, block_stop):
        n = min(SHOT_BLOCK, total_shots - block * SHOT_BLOCK)
        if n <= 0:
            break
        d, o = _run_block(comp, n, block_rng(seed, block))
        dets.append(d)
        obss.append(o)
    det = np.concatenate(dets)
    return DetectionData(det.shape[0], det, np.concatenate(obss), seed)


# --- fault enumeration -----------------------------------------------------------

@dataclass
class FaultStructure:
    """Rate-independent part of a fault catalog, shared by circuits with one structure.

    Component c belongs to noise instruction ``instr[c]``, target group
    ``group[c]`` and has Pauli code ``pauli[c]``.  Signatures are CSR over
    detectors; ``*_x`` / ``*_z`` hold the X-part and Z-part of the component.
    """

    instr: np.ndarray
    group: np.ndarray
    pauli: np.ndarray
    kind: np.ndarray           # 1-qubit: 1, 2-qubit: 2, X_ERROR: 0
    sig: sp.csr_matrix
    sig_x: sp.csr_matrix
    sig_z: sp.csr_matrix
    obs: np.ndarray
    obs_x: np.ndarray
    obs_z: np.ndarray
    num_detectors: int
    num_observables: int

    def probabilities(self, circuit: StabCircuit) -> np.ndarray:
        rates = {}
        for k, ins in circuit.noise_instructions():
            rates[k] = np.asarray(ins.probs, dtype=np.float64)
        p = np.empty(len(self.instr))
        for k in np.unique(self.instr):
            sel = self.instr == k
            r = rates[int(k)][self.group[sel]]
            div = np.where(self.kind[sel] == 2, 15.0, np.where(self.kind[sel] == 1, 3.0, 1.0))
            p[sel] = r / div
        return p


@dataclass
class FaultCatalog:
    structure: FaultStructure
    probability: np.ndarray
    index: np.ndarray          # indices into structure components with p > 0

    def __len__(self) -> int:
        return len(self.index)

    def entries(self) -> List[dict]:
        """Explicit (site, component, probability, detectors, observables) records."""
        s = self.structure
        out = []
        for c in self.index:
            dets = s.sig.indices[s.sig.indptr[c]:s.sig.indptr[c + 1]]
            out.append({
                "instruction": int(s.instr[c]), "group": int(s.group[c]),
                "pauli": _pauli_label(int(s.kind[c]), int(s.pauli[c])),
                "probability": float(self.probability[c]),
                "detectors": tuple(int(d) for d in dets),
                "observables": tuple(i for i in range(s.num_observables) if (int(s.obs[c]) >> i) & 1),
            })
        return out


def _pauli_label(kind: int, code: int) -> str:
    letters = "IXYZ"
    if kind == 2:
        return letters[code >> 2] + letters[code & 3]
    return letters[code]


_STRUCT_CACHE: "OrderedDict[str, FaultStructure]" = OrderedDict()
_STRUCT_CACHE_SIZE = 8


def fault_structure(circuit: StabCircuit) -> FaultStructure:
    key = circuit.structure_key()
    hit = _STRUCT_CACHE.get(key)
    if hit is not None:
        _STRUCT_CACHE.move_to_end(key)
        return hit
    st = _build_structure(circuit)
    _STRUCT_CACHE[key] = st
    if len(_STRUCT_CACHE) > _STRUCT_CACHE_SIZE:
        _STRUCT_CACHE.popitem(last=False)
    return st


def enumerate_faults(circuit: StabCircuit) -> FaultCatalog:
    """One entry per (noise annotation, non-identity Pauli component) with p > 0."""
    st = fault_structure(circuit)
    p = st.probabilities(circuit) if len(st.instr) else np.empty(0)
    idx = np.nonzero(p > 0)[0]
    return FaultCatalog(st, p, idx)


def _build_structure(circuit: StabCircuit) -> FaultStructure:
    """Backward sensitivity sweep.

    Walking the circuit in reverse we track, for every detector and observable,
    the Pauli it is equivalent to at the current time (Heisenberg picture).
    A fault P at qubit q flips a detector iff P anticommutes with that Pauli:
    X faults see its Z part and Z faults its X part.
    """
    nd, no = circuit.num_detectors, circuit.num_observables
    if no > 64:
        raise ValidationError("at most 64 observables are supported")
    ncol = nd + no
    rec_cols: List[List[int]] = [[] for _ in range(circuit.num_measurements)]
    for i, det in enumerate(circuit.detectors):
        for m in det:
            rec_cols[m].append(i)
    for j, ob in enumerate(circuit.observables):
        for m in ob:
            rec_cols[m].append(nd + j)
    ox = np.zeros((circuit.num_qubits, ncol), dtype=bool)
    oz = np.zeros((circuit.num_qubits, ncol), dtype=bool)
    rec = circuit.num_measurements
    # per noise instruction: (instr index, targets, sens to X faults, sens to Z faults)
    snaps = []
    for k in range(len(circuit.instructions) - 1, -1, -1):
        ins = circuit.instructions[k]
        t = np.asarray(ins.targets, dtype=np.int64)
        if ins.name == "M":
            rec -= len(t)
            for i, q in enumerate(t):
                cols = rec_cols[rec + i]
                if cols:
                    oz[q, cols] ^= True
        elif ins.name == "R":
            ox[t] = False
            oz[t] = False
        elif ins.name == "H":
            tmp = ox[t].copy()
            ox[t] = oz[t]
            oz[t] = tmp
        elif ins.name == "CX":
            c, tg = t[0::2], t[1::2]
            ox[tg] ^= ox[c]
            oz[c] ^= oz[tg]
        elif ins.is_noise:
            snaps.append((k, ins, oz[t].copy(), ox[t].copy()))
    snaps.reverse()

    instr, group, pauli, kind = [], [], [], []
    sx_rows, sz_rows = [], []
    for k, ins, sens_xf, sens_zf in snaps:
        ng = len(ins.targets) // ARITY[ins.name]
        if ins.name == "X_ERROR":
            instr.append(np.full(ng, k))
            group.append(np.arange(ng))
            pauli.append(np.full(ng, 1))
            kind.append(np.zeros(ng, dtype=np.int64))
            sx_rows.append(sens_xf)
            sz_rows.append(np.zeros_like(sens_xf))
        elif ins.name == "DEPOLARIZE1":
            codes = np.array([1, 2, 3])
            instr.append(np.full(3 * ng, k))
            group.append(np.repeat(np.arange(ng), 3))
            pauli.append(np.tile(codes, ng))
            kind.append(np.ones(3 * ng, dtype=np.int64))
            hx = np.tile(_HAS_X[codes], ng)
            hz = np.tile(_HAS_Z[codes], ng)
            rx = np.repeat(sens_xf, 3, axis=0)
            rz = np.repeat(sens_zf, 3, axis=0)
            sx_rows.append(rx & hx[:, None])
            sz_rows.append(rz & hz[:, None])
        else:
            codes = np.arange(1, 16)
            instr.append(np.full(15 * ng, k))
            group.append(np.repeat(np.arange(ng), 15))
            pauli.append(np.tile(codes, ng))
            kind.append(np.full(15 * ng, 2, dtype=np.int64))
            pa, pb = codes >> 2, codes & 3
            ax = np.repeat(sens_xf[0::2], 15, axis=0)
            az = np.repeat(sens_zf[0::2], 15, axis=0)
            bx = np.repeat(sens_xf[1::2], 15, axis=0)
            bz = np.repeat(sens_zf[1::2], 15, axis=0)
            sx_rows.append((ax & np.tile(_HAS_X[pa], ng)[:, None]) ^ (bx & np.tile(_HAS_X[pb], ng)[:, None]))
            sz_rows.append((az & np.tile(_HAS_Z[pa], ng)[:, None]) ^ (bz & np.tile(_HAS_Z[pb], ng)[:, None]))

    if not snaps:
        empty = sp.csr_matrix((0, nd), dtype=np.uint8)
        z64 = np.zeros(0, dtype=np.uint64)
        zi = np.zeros(0, dtype=np.int64)
        return FaultStructure(zi, zi, zi, zi, empty, empty, empty, z64, z64, z64, nd, no)

    SX = np.concatenate(sx_rows)
    SZ = np.concatenate(sz_rows)
    S = SX ^ SZ
    weights = (np.uint64(1) << np.arange(no, dtype=np.uint64)) if no else np.zeros(0, dtype=np.uint64)

    def obs_mask(M):
        if no == 0:
            return np.zeros(M.shape[0], dtype=np.uint64)
        return (M[:, nd:].astype(np.uint64) * weights).sum(axis=1).astype(np.uint64)

    return FaultStructure(
        np.concatenate(instr).astype(np.int64), np.concatenate(group).astype(np.int64),
        np.concatenate(pauli).astype(np.int64), np.concatenate(kind).astype(np.int64),
        sp.csr_matrix(S[:, :nd]), sp.csr_matrix(SX[:, :nd]), sp.csr_matrix(SZ[:, :nd]),
        obs_mask(S), obs_mask(SX), obs_mask(SZ), nd, no)


def inject_fault_signature(circuit: StabCircuit, instr_index: int, qubit_paulis: dict) -> Tuple[np.ndarray, np.ndarray]:
    """Forward-propagate Paulis inserted after instruction ``instr_index`` in a noiseless run.

    ``qubit_paulis`` maps qubit -> 'X' | 'Y' | 'Z'.  Returns (detector bits,
    observable bits).  Used as an independent check of the backward sweep.
    """
    x = np.zeros(circuit.num_qubits, dtype=bool)
    z = np.zeros(circuit.num_qubits, dtype=bool)
    rec: List[bool] = []
    for k, ins in enumerate(circuit.instructions):
        t = list(ins.targets)
        if ins.name == "R":
            x[t] = False
            z[t] = False
        elif ins.name == "M":
            rec.extend(bool(x[q]) for q in t)
        elif ins.name == "H":
            x[t], z[t] = z[t].copy(), x[t].copy()
        elif ins.name == "CX":
            for c, tg in zip(t[0::2], t[1::2]):
                x[tg] ^= x[c]
                z[c] ^= z[tg]
        if k == instr_index:
            for q, p in qubit_paulis.items():
                x[q] ^= p in ("X", "Y")
                z[q] ^= p in ("Y", "Z")
    rec_arr = np.array(rec, dtype=bool)
    det = np.array([rec_arr[list(d)].sum() % 2 for d in circuit.detectors], dtype=bool)
    obs = np.array([rec_arr[list(o)].sum() % 2 for o in circuit.observables], dtype=bool)
    return det, obs
