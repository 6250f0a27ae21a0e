import csv
import json
import subprocess
import sys

import pytest

from surfqre.cli import build_parser, main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def summary(out):
    return json.loads(out)


def test_memory_rows_and_suppression(capsys, tmp_path):
    code, out, _ = run(capsys, "memory", "--hw", "target", "--distances", "3,5", "--shots", 20000,
                       "--out", tmp_path)
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "detail.csv")))
    assert [r["d"] for r in rows] == ["3", "5"]
    assert set(rows[0]) >= {"d", "rounds", "shots", "failures", "infidelity", "std_err"}
    assert float(rows[1]["infidelity"]) < float(rows[0]["infidelity"])
    assert sorted(p.name for p in tmp_path.iterdir()) == ["detail.csv", "manifest.json",
                                                          "summary.json"]
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["seed"] == 0 and "version" in man and man["command"].startswith("memory")


def test_memory_deterministic_across_threads(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(capsys, "memory", "--distances", "3", "--shots", 5000, "--seed", 9, "--out", a)
    run(capsys, "memory", "--distances", "3", "--shots", 5000, "--seed", 9, "--threads", 3,
        "--out", b)
    assert (a / "detail.csv").read_bytes() == (b / "detail.csv").read_bytes()
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()


@pytest.mark.parametrize("argv", [
    ["memory", "--shots", "0"], ["memory", "--bogus"], ["nope"], ["assemble", "--q", "3"],
    ["classical", "fci", "--orbitals", "x", "--electrons", "2"],
])
def test_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_validation_error_envelope(capsys, tmp_path):
    code, _, err = run(capsys, "fit", "--input", tmp_path / "missing.csv")
    assert code == 3
    env = json.loads(err.strip().splitlines()[-1])["error"]
    assert env["code"] == 3 and env["message"]


def test_infeasible_exit(capsys):
    code, _, err = run(capsys, "assemble", "--q", 10, "--t", 1000, "--mu", 0.01, "--lambda", 0.9)
    assert code == 4
    assert json.loads(err.strip().splitlines()[-1])["error"]["type"] == "InfeasibleError"


def test_fit_command(capsys, tmp_path):
    f = tmp_path / "pts.csv"
    rows = [(d, 0.0038 * d * d * 2.34 ** (-(d + 1) / 2)) for d in (5, 7, 9, 11)]
    f.write_text("d,infidelity\n" + "".join(f"{d},{p!r}\n" for d, p in rows))
    code, out, _ = run(capsys, "fit", "--input", f, "--cut", "none")
    assert code == 0
    assert summary(out)["model"]["lam"] == pytest.approx(2.34, rel=1e-6)


def test_estimate_trotter(capsys, tmp_path):
    h = tmp_path / "h.txt"
    h.write_text("0.7 XI\n-0.4 ZZ\n0.2 IY\n")
    code, out, _ = run(capsys, "estimate", "trotter", "--hamiltonian", h, "--epsilon", 1.6e-3,
                       "--order", 2, "--grid", 20)
    assert code == 0
    s = summary(out)["plan"]
    for key in ("t", "r", "delta", "qpe_repetitions", "t_count"):
        assert key in s, key
    assert int(s["t_count"]) > 0


def test_estimate_qubitization(capsys):
    code, out, _ = run(capsys, "estimate", "qubitization", "--lambda", 100, "--delta-e", 1.6e-3)
    assert code == 0 and summary(out)["plan"]["m"] == 18


def test_assemble_reference_case(capsys, tmp_path):
    code, out, _ = run(capsys, "assemble", "--q", 1789, "--t", "7.7e11", "--mu", 0.0038,
                       "--lambda", 2.34, "--hw", "baseline", "--budget", 0.01,
                       "--dr-capacity", 120000)
    assert code == 0
    s = summary(out)
    assert abs(s["estimate"]["d_core"] - 107) <= 6
    assert s["embedding"]["n_drs"] >= 1


def test_assemble_from_summary(capsys, tmp_path):
    f = tmp_path / "s.json"
    f.write_text(json.dumps({"num_data_qubits": 100, "t_count": 10 ** 8, "algorithm": "trotter"}))
    code, out, _ = run(capsys, "assemble", "--summary", f, "--mu", 0.019, "--lambda", 9.3,
                       "--hw", "target", "--out", tmp_path / "o")
    assert code == 0
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert any(len(v) == 64 for v in man["inputs"].values())


def test_classical(capsys):
    code, out, _ = run(capsys, "classical", "fci", "--orbitals", 23, "--electrons", 26,
                       "--parallelism", 512)
    assert code == 0
    assert summary(out)["fci"]["wall_hours"] == pytest.approx(113.6, rel=0.05)
    code, out, _ = run(capsys, "classical", "dmrg", "--chi", 1000, "--points", "100:2000005",
                       "200:16000005")
    assert code == 0
    assert summary(out)["dmrg"]["a"] == pytest.approx(2.0, rel=1e-9)


def test_circuit_export(capsys, tmp_path):
    code, _, _ = run(capsys, "circuit", "-d", 3, "--shots", 100, "--out", tmp_path)
    assert code == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert {"circuit.txt", "graph.json", "detections.bin", "manifest.json"} <= names


def test_small_studies(capsys, tmp_path):
    code, _, _ = run(capsys, "teleport", "--distances", 3, "--bus-factors", 1, "--round-factors", 1,
                     "--shots", 2000, "--out", tmp_path / "t")
    assert code == 0
    code, _, _ = run(capsys, "teleport", "--distances", 3, "--bus-factors", 1, "--round-factors", 1,
                     "--cuts", 2, "--p-link", "none,0.05", "--shots", 2000)
    assert code == 0
    code, _, _ = run(capsys, "sensitivity", "--groups", "gates", "--factors", 2,
                     "--distances", "3,5", "--shots", 3000)
    assert code == 0
    code, _, _ = run(capsys, "tailedness", "-d", 3, "--samples", 3, "--shots", 500)
    assert code == 0


def test_every_subcommand_has_help():
    parser = build_parser()
    for argv in (["memory"], ["fit"], ["teleport"], ["sensitivity"], ["tailedness"],
                 ["estimate", "trotter"], ["estimate", "qubitization"], ["assemble"],
                 ["classical", "fci"], ["classical", "dmrg"], ["circuit"]):
        with pytest.raises(SystemExit) as exc:
            parser.parse_args(argv + ["--help"])
        assert exc.value.code == 0


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "surfqre", "classical", "fci", "--orbitals", "10",
                        "--electrons", "10"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["fci"]["n_det"] == 252 ** 2
