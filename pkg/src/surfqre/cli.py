"""Command-line front end.

Every subcommand prints its summary JSON to stdout.  With ``--out DIR`` it also
writes manifest.json, summary.json and detail.csv into DIR.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as _dt
import hashlib
import io
import json
import logging
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .code import TeleportSpec, build_memory_circuit, build_teleport_circuit
from .compiler import parse_hamiltonian
from .decoder import build_detector_graph
from .errors import SurfqreError, ValidationError
from .estimator import (BudgetSplit, assemble, classical_dmrg_time, classical_fci_time,
                        commutator_sums, load_logical_summary, multi_dr_embed, optimize_budget,
                        plan_trotter, qubitization_budget)
from .fitting import (DEFAULT_CUT, GROUPS, SuppressionModel, cut_threshold_scan, fit_memory,
                      fit_suppression, fit_surgery, load_calibration, run_memory,
                      sensitivity_sweep, tailedness_study, teleport_grid)
from .hwmodel import derive_noise_channels, resolve_hardware
from .stabsim import enumerate_faults, sample

log = logging.getLogger("surfqre")

SIG = 12


# --- number formatting --------------------------------------------------------------

def fmt_num(v):
    """Round floats to 12 significant digits; non-finite values become strings."""
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
        return float(f"{v:.{SIG}g}")
    return v


def clean(obj):
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    return fmt_num(obj)


def dumps(obj) -> str:
    return json.dumps(clean(obj), indent=2, sort_keys=True) + "\n"


def csv_text(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    cols = list(rows[0])
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        out = []
        for c in cols:
            v = r.get(c)
            if v is None:
                out.append("")
            elif isinstance(v, (float, np.floating)):
                out.append(f"{float(v):.{SIG}g}")
            else:
                out.append(str(v))
        w.writerow(out)
    return buf.getvalue()


# --- argument types ---------------------------------------------------------------

def positive_int(text: str) -> int:
    try:
        v = int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v != float(text) or v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text!r}")
    return v


def int_list(text: str) -> List[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def float_list(text: str) -> List[float]:
    try:
        return [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def link_list(text: str) -> List[Optional[float]]:
    out: List[Optional[float]] = []
    for t in text.replace(" ", "").split(","):
        if t.lower() in ("none", "nocut"):
            out.append(None)
        elif t:
            try:
                out.append(float(t))
            except ValueError:
                raise argparse.ArgumentTypeError(f"bad p_link value {t!r}") from None
    return out


def cut_value(text: str) -> Optional[float]:
    if text.lower() == "none":
        return None
    return float(text)


def big_int(text: str) -> int:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v != int(v) or v < 0:
        raise argparse.ArgumentTypeError(f"must be a non-negative integer, got {text!r}")
    return int(v)


# --- reports ----------------------------------------------------------------------

class Report:
    def __init__(self, summary: dict, detail: Optional[List[dict]] = None,
                 extra: Optional[Dict[str, bytes]] = None, inputs: Sequence[str] = ()):
        self.summary = summary
        self.detail = detail or []
        self.extra = extra or {}
        self.inputs = list(inputs)


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_report(out: Path, args: argparse.Namespace, report: Report, started: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    config = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    manifest = {
        "command": args.command_path,
        "config": config,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "inputs": {p: _digest(p) for p in report.inputs},
        "started": started,
        "finished": _now(),
    }
    (out / "manifest.json").write_text(dumps(manifest))
    (out / "summary.json").write_text(dumps(report.summary))
    (out / "detail.csv").write_text(csv_text(report.detail))
    for name, blob in report.extra.items():
        (out / name).write_bytes(blob)


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


# --- subcommands --------------------------------------------------------------------

def cmd_memory(a) -> Report:
    hw = resolve_hardware(a.hw)
    res = run_memory(derive_noise_channels(hw, a.single_meas), a.distances, a.shots, a.seed,
                     a.rounds, a.threads)
    rows = [r.row() for r in res]
    summary = {"hardware": a.hw, "rows": rows}
    if len(res) >= 2 and all(r.failures > 0 for r in res):
        summary["fit"] = fit_memory(res, a.variant, cut=a.cut).to_dict()
    return Report(summary, rows, inputs=_files(a.hw))


def _files(*paths) -> List[str]:
    return [p for p in paths if p and Path(p).is_file()]


def cmd_fit(a) -> Report:
    text = Path(a.input).read_text()
    reader = csv.DictReader(io.StringIO(text))
    need = {"d", "infidelity"}
    if not reader.fieldnames or not need <= set(reader.fieldnames):
        raise ValidationError("fit input needs columns d, infidelity (and optionally std_err)")
    pts = []
    for row in reader:
        se = row.get("std_err")
        pts.append((int(row["d"]), float(row["infidelity"])) + ((float(se),) if se else ()))
    model = fit_suppression(pts, a.variant, cut=a.cut)
    rows = [{"d": p[0], "infidelity": p[1], "predicted": float(model(p[0]))} for p in pts]
    return Report({"model": model.to_dict(), "cut": a.cut}, rows, inputs=[a.input])


def cmd_teleport(a) -> Report:
    hw = resolve_hardware(a.hw)
    if a.p_link is not None or a.cuts:
        template = {"b": lambda d: a.bus_factors[0] * d, "r_m": lambda d: a.round_factors[0] * d,
                    "n_cuts": a.cuts}
        cells = cut_threshold_scan(a.distances, a.p_link or [None], template, hw, a.shots, a.seed,
                                   a.threads)
        rows = [dataclasses.asdict(c) for c in cells]
        return Report({"mode": "cuts", "cells": rows}, rows, inputs=_files(a.hw))
    pts = teleport_grid(a.distances, a.bus_factors, a.round_factors, hw, a.shots, a.seed, a.threads)
    rows = [dataclasses.asdict(p) for p in pts]
    summary = {"mode": "grid", "points": rows}
    try:
        summary["fit"] = fit_surgery(pts).to_dict()
    except SurfqreError as exc:
        summary["fit_error"] = str(exc)
    return Report(summary, rows, inputs=_files(a.hw))


def cmd_sensitivity(a) -> Report:
    hw = resolve_hardware(a.hw)
    groups = a.groups or sorted(GROUPS)
    base = sensitivity_sweep(hw, groups[0], [1.0], a.distances, a.shots, a.seed, a.cut, a.threads)[0]
    rows = []
    summary: dict = {"baseline_lambda": base.lam, "baseline_lambda_err": base.lam_err, "groups": {}}
    for g in groups:
        pts = sensitivity_sweep(hw, g, a.factors, a.distances, a.shots, a.seed, a.cut, a.threads)
        summary["groups"][g] = []
        for p in pts:
            row = {"group": g, "factor": p.factor, "lambda": p.lam, "lambda_err": p.lam_err,
                   "mu": p.mu, "delta_lambda": p.lam - base.lam, "error": p.error or ""}
            rows.append(row)
            summary["groups"][g].append(row)
    return Report(summary, rows, inputs=_files(a.hw))


def cmd_tailedness(a) -> Report:
    calib = load_calibration(a.calibration)
    hw = resolve_hardware(a.gate_times)
    if a.sigmas is not None:
        sigmas = a.sigmas
    else:
        sigmas = [f * calib.t1_sigma for f in a.sigma_fractions]
    res = tailedness_study(calib, sigmas, a.d, a.samples, hw, a.shots, a.seed, a.rounds, a.threads)
    return Report(res.summary(), res.rows(), inputs=_files(a.calibration, a.gate_times))


def cmd_estimate_trotter(a) -> Report:
    terms = parse_hamiltonian(a.hamiltonian)
    if a.split:
        if len(a.split) != 3:
            raise ValidationError("--split needs three values eps1,eps2,eps3")
        split = BudgetSplit(*a.split)
        plan = plan_trotter(terms, split, a.order, a.literal_bound)
    else:
        split, plan = optimize_budget(terms, a.epsilon, a.order, a.grid, literal=a.literal_bound)
    s = commutator_sums(terms)
    summary = {"plan": plan.to_dict(), "n_terms": s.n_terms, "pair_sum": s.pair,
               "triple_sum": s.triple, "double_sum": s.double,
               "logical_summary": {"num_data_qubits": terms[0].n, "t_count": plan.t_count,
                                   "algorithm": "trotter"}}
    row = {k: v for k, v in plan.to_dict().items() if k != "split"}
    row.update(eps1=split.eps1, eps2=split.eps2, eps3=split.eps3)
    return Report(summary, [row], inputs=[a.hamiltonian])


def cmd_estimate_qubitization(a) -> Report:
    lam = a.lam
    inputs = []
    if a.hamiltonian:
        terms = parse_hamiltonian(a.hamiltonian)
        lam = sum(abs(t.coeff) for t in terms)
        inputs.append(a.hamiltonian)
    if lam is None:
        raise ValidationError("give --lambda or --hamiltonian")
    plan = qubitization_budget(lam, a.delta_e, a.h_norm, a.omega, a.eps_qpe)
    d = plan.to_dict()
    d["qpe_bound"] = plan.qpe_bound()
    return Report({"plan": d}, [d], inputs=inputs)


def cmd_assemble(a) -> Report:
    inputs = []
    Q, T = a.q, a.t
    if a.summary:
        s = load_logical_summary(a.summary)
        Q, T = s.num_data_qubits, s.t_count
        inputs.append(a.summary)
    if Q is None or T is None:
        raise ValidationError("give --q and --t, or --summary")
    hw = resolve_hardware(a.hw)
    model = SuppressionModel(a.mu, a.lam)
    est = assemble(Q, T, model, hw, a.budget, a.e_prep, a.cap, a.core_fraction,
                   single_meas=a.single_meas)
    summary = {"estimate": est.to_dict()}
    if a.dr_capacity:
        n, links = multi_dr_embed(est, a.dr_capacity)
        summary["embedding"] = {"n_drs": n, "interconnects_per_boundary": links}
    rows = [{"level": l + 1, "distance": d, "units": u, "e_mem": e}
            for l, (d, u, e) in enumerate(zip(est.distances, est.units, est.e_mem))]
    rows.append({"level": "core", "distance": est.d_core, "units": 1, "e_mem": None})
    return Report(summary, rows, inputs=inputs + _files(a.hw))


def cmd_classical_fci(a) -> Report:
    r = classical_fci_time(a.orbitals, a.electrons, a.parallelism, a.literal)
    return Report({"fci": r.to_dict()}, [r.to_dict()])


def cmd_classical_dmrg(a) -> Report:
    pts = []
    inputs = []
    if a.points_file:
        inputs.append(a.points_file)
        for row in csv.DictReader(io.StringIO(Path(a.points_file).read_text())):
            pts.append((float(row["chi"]), float(row["time"])))
    for tok in a.points or []:
        chi, _, t = tok.partition(":")
        try:
            pts.append((float(chi), float(t)))
        except ValueError:
            raise ValidationError(f"bad fit point {tok!r}; expected chi:time") from None
    r = classical_dmrg_time(a.chi, pts, a.parallelism)
    return Report({"dmrg": r.to_dict(), "fit_points": pts}, [r.to_dict()], inputs=inputs)


def cmd_circuit(a) -> Report:
    noise = derive_noise_channels(resolve_hardware(a.hw), a.single_meas)
    if a.kind == "memory":
        circuit = build_memory_circuit(a.d, a.rounds or a.d, noise)
    else:
        spec = TeleportSpec(a.d, a.b or a.d, r_m=a.rounds, source_state=a.state)
        circuit = build_teleport_circuit(spec, noise)
    graph = build_detector_graph(enumerate_faults(circuit))
    extra = {"circuit.txt": circuit.to_text().encode(), "graph.json": graph.to_json().encode()}
    summary = {"num_qubits": circuit.num_qubits, "num_detectors": circuit.num_detectors,
               "num_observables": circuit.num_observables, "num_edges": graph.num_edges}
    if a.shots:
        data = sample(circuit, a.shots, a.seed)
        extra["detections.bin"] = data.to_bytes()
        summary["shots"] = a.shots
    return Report(summary, [], extra, inputs=_files(a.hw))


# --- parser -------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, seed: bool = True, threads: bool = True) -> None:
    p.add_argument("--out", type=Path, help="write manifest.json, summary.json, detail.csv here")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    if threads:
        p.add_argument("--threads", type=positive_int, default=1, help="worker threads")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="surfqre", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("memory", help="memory experiments over code distances")
    p.add_argument("--hw", default="baseline", help="preset name or hardware JSON path")
    p.add_argument("--distances", type=int_list, default=[3, 5, 7])
    p.add_argument("--rounds", type=positive_int, help="check rounds (default d)")
    p.add_argument("--shots", type=positive_int, default=100_000)
    p.add_argument("--variant", choices=("d_squared", "per_cycle"), default="d_squared")
    p.add_argument("--cut", type=cut_value, default=None,
                   help="exclude rates at or above this value from the fit ('none' keeps all)")
    p.add_argument("--single-meas", action="store_true", help="one measurement interval per round")
    _common(p)
    p.set_defaults(func=cmd_memory)

    p = sub.add_parser("fit", help="fit mu and lambda to (d, infidelity) data")
    p.add_argument("--input", required=True, help="CSV with columns d, infidelity[, std_err]")
    p.add_argument("--variant", choices=("d_squared", "per_cycle"), default="d_squared")
    p.add_argument("--cut", type=cut_value, default=DEFAULT_CUT)
    _common(p, seed=False, threads=False)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("teleport", help="teleportation grid or cut scan")
    p.add_argument("--hw", default="baseline")
    p.add_argument("--distances", type=int_list, default=[3, 5])
    p.add_argument("--bus-factors", type=int_list, default=[1, 3], help="b = k d")
    p.add_argument("--round-factors", type=int_list, default=[1, 3], help="r_m = k d")
    p.add_argument("--cuts", type=int, default=0, help="number of weak-link columns")
    p.add_argument("--p-link", type=link_list, default=None,
                   help="comma list of link error rates; 'none' for no cuts")
    p.add_argument("--shots", type=positive_int, default=100_000)
    _common(p)
    p.set_defaults(func=cmd_teleport)

    p = sub.add_parser("sensitivity", help="lambda gain from improving parameter groups")
    p.add_argument("--hw", default="baseline")
    p.add_argument("--groups", type=lambda s: s.split(","), default=None,
                   help=f"comma list from {sorted(GROUPS)}")
    p.add_argument("--factors", type=float_list, default=[2.0, 4.0])
    p.add_argument("--distances", type=int_list, default=[3, 5, 7])
    p.add_argument("--shots", type=positive_int, default=100_000)
    p.add_argument("--cut", type=cut_value, default=None)
    _common(p)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("tailedness", help="logical infidelity vs spread of T1")
    p.add_argument("--calibration", default=None, help="calibration CSV (default: bundled table)")
    p.add_argument("--gate-times", default="ibm_torino", help="preset or hardware JSON")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--sigmas", type=float_list, default=None, help="T1 std devs in seconds")
    g.add_argument("--sigma-fractions", type=float_list, default=[0.25, 0.5, 1.0],
                   help="std devs as fractions of the table's own spread")
    p.add_argument("-d", type=positive_int, default=9)
    p.add_argument("--rounds", type=positive_int, default=None)
    p.add_argument("--samples", type=positive_int, default=100)
    p.add_argument("--shots", type=positive_int, default=1000)
    _common(p)
    p.set_defaults(func=cmd_tailedness)

    p = sub.add_parser("estimate", help="logical-level cost of phase estimation")
    est = p.add_subparsers(dest="algorithm", required=True)
    q = est.add_parser("trotter", help="product-formula QPE T count")
    q.add_argument("--hamiltonian", required=True)
    q.add_argument("--epsilon", type=float, default=1.6e-3, help="total error budget (hartree)")
    q.add_argument("--order", type=int, choices=(1, 2), default=2)
    q.add_argument("--grid", type=positive_int, default=100, help="budget grid resolution")
    q.add_argument("--split", type=float_list, default=None, help="fixed eps1,eps2,eps3")
    q.add_argument("--literal-bound", action="store_true",
                   help="use 1/8 instead of 1/6 on the order-2 double sum")
    _common(q, seed=False, threads=False)
    q.set_defaults(func=cmd_estimate_trotter)
    q = est.add_parser("qubitization", help="QPE precision budget for qubitization")
    q.add_argument("--lambda", dest="lam", type=float, default=None, help="1-norm (hartree)")
    q.add_argument("--hamiltonian", default=None, help="take lambda from a term file")
    q.add_argument("--delta-e", type=float, default=1.6e-3)
    q.add_argument("--h-norm", type=float, default=None, help="bound on ||H|| (default lambda)")
    q.add_argument("--omega", type=float, default=None, help="T cost per walk iteration")
    q.add_argument("--eps-qpe", type=float, default=None)
    _common(q, seed=False, threads=False)
    q.set_defaults(func=cmd_estimate_qubitization)

    p = sub.add_parser("assemble", help="physical qubits and runtime for a logical circuit")
    p.add_argument("--q", type=positive_int, default=None, help="logical data qubits")
    p.add_argument("--t", type=big_int, default=None, help="T count")
    p.add_argument("--summary", default=None, help="logical-circuit summary JSON")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--hw", default="baseline")
    p.add_argument("--budget", type=float, default=0.01)
    p.add_argument("--e-prep", type=float, default=1e-3, help="injected magic-state error")
    p.add_argument("--cap", type=positive_int, default=199, help="largest allowed distance")
    p.add_argument("--core-fraction", type=float, default=0.5)
    p.add_argument("--single-meas", action="store_true")
    p.add_argument("--dr-capacity", type=positive_int, default=None,
                   help="physical qubits per refrigerator")
    _common(p, seed=False, threads=False)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("classical", help="classical baseline runtimes")
    cl = p.add_subparsers(dest="method", required=True)
    q = cl.add_parser("fci", help="full CI extrapolation")
    q.add_argument("--orbitals", type=positive_int, required=True)
    q.add_argument("--electrons", type=positive_int, required=True)
    q.add_argument("--parallelism", type=positive_int, default=1000)
    q.add_argument("--literal", action="store_true", help="squared C(N_o, N_e) determinant count")
    _common(q, seed=False, threads=False)
    q.set_defaults(func=cmd_classical_fci)
    q = cl.add_parser("dmrg", help="DMRG cubic extrapolation")
    q.add_argument("--chi", type=positive_int, required=True)
    q.add_argument("--points", nargs="*", help="fit points as chi:time")
    q.add_argument("--points-file", default=None, help="CSV with columns chi,time")
    q.add_argument("--parallelism", type=float, default=100.0)
    _common(q, seed=False, threads=False)
    q.set_defaults(func=cmd_classical_dmrg)

    p = sub.add_parser("circuit", help="export a circuit, its decoding graph and samples")
    p.add_argument("--kind", choices=("memory", "teleport"), default="memory")
    p.add_argument("--hw", default="baseline")
    p.add_argument("-d", type=positive_int, default=3)
    p.add_argument("-b", type=positive_int, default=None, help="bus width (teleport)")
    p.add_argument("--rounds", type=positive_int, default=None)
    p.add_argument("--state", choices=("zero", "plus"), default="zero")
    p.add_argument("--shots", type=int, default=0, help="also sample this many shots")
    p.add_argument("--single-meas", action="store_true")
    _common(p, threads=False)
    p.set_defaults(func=cmd_circuit)
    return ap


def _command_path(a) -> str:
    parts = [a.command]
    for k in ("algorithm", "method"):
        if getattr(a, k, None):
            parts.append(getattr(a, k))
    return " ".join(parts)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    args.command_path = _command_path(args)
    started = _now()
    try:
        report = args.func(args)
        if args.out is not None:
            write_report(args.out, args, report, started)
    except SurfqreError as exc:
        return _fail(exc.exit_code, type(exc).__name__, str(exc))
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        return _fail(3, "ValidationError", str(exc))
    except ValueError as exc:
        return _fail(3, "ValidationError", str(exc))
    except Exception as exc:  # noqa: BLE001 - last-resort envelope
        log.debug("internal error", exc_info=True)
        return _fail(5, type(exc).__name__, str(exc))
    sys.stdout.write(dumps(report.summary))
    return 0


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": {"code": code, "type": kind, "message": message}}) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
