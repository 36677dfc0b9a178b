import random
import shutil
import subprocess
from pathlib import Path

import pytest

from cycver import io
from cycver.cli import main
from cycver.cyclotomic import CycNum
from cycver.homology import octahedron
from cycver.linalg import CycMatrix
from cycver.statesim import SimState

from helpers import rand_matrix, rand_vector

DATA = Path(__file__).resolve().parent.parent / "demos" / "data"


def test_matrix_round_trip():
    rng = random.Random(0)
    for k in (1, 2, 3):
        M = rand_matrix(rng, k, 3, 2)
        for fmt in ("dense", "coo"):
            assert io.parse_matrix(io.format_matrix(M, fmt)) == M


def test_circuit_round_trip():
    c = io.load(DATA / "g2.circuit", "circuit")
    assert c.gates == [("HH", (1, 2)), ("CX", (1, 0)), ("X", (0,))]
    again = io.parse_circuit(io.format_circuit(c))
    assert again.gates == c.gates and str(again.gateset) == "G2"


def test_state_sparse_graph_round_trips():
    rng = random.Random(1)
    s = SimState.from_vector(rand_vector(rng, 3, 4))
    s2 = io.parse_state(io.format_state(s))
    assert list(s2.amps) == list(s.amps)
    H = io.load(DATA / "example.sparse", "sparse")
    assert H.h == 2 and H.d == 2
    assert io.parse_sparse(io.format_sparse(H)).entries == H.entries
    G = io.load(DATA / "octahedron.graph", "graph")
    assert G.edges == octahedron().edges and G.weights[3] == 0.5
    G2 = io.parse_graph(io.format_graph(G))
    assert G2.edges == G.edges and G2.weights == G.weights


def test_ham_round_trip():
    from cycver.hamiltonian import build_hclock

    h = build_hclock(2)
    h2 = io.parse_ham(io.format_ham(h))
    assert h2.matrix() == h.matrix()


@pytest.mark.parametrize("text,line", [
    ("", None),
    ("k=3 rows=2\n1 0\n0 1\n", 1),
    ("k=3 rows=2 cols=2\n1 0\n0 x\n", 3),
    ("k=3 rows=2 cols=2\n1 0\n", None),
    ("k=0 rows=1 cols=1\n1\n", 1),
    ("k=3 rows=1 cols=1 colour=red\n1\n", 1),
])
def test_matrix_parse_errors(text, line):
    with pytest.raises(io.ParseError) as exc:
        io.parse_matrix(text, "m.txt")
    if line is not None:
        assert exc.value.line == line
    assert str(exc.value).startswith("m.txt")


def test_circuit_parse_errors():
    with pytest.raises(io.ParseError) as exc:
        io.parse_circuit("k=1 ancillas=1 proof_qubits=1 gateset=G2\nCX 1,7\n")
    assert exc.value.line == 2
    with pytest.raises(io.ParseError):
        io.parse_circuit("k=1 ancillas=1 proof_qubits=1 gateset=G2\nH 1\n")
    with pytest.raises(io.ParseError):
        io.load("/nonexistent/file.circuit", "circuit")
    with pytest.raises(ValueError):
        io.load(DATA / "g2.circuit", "banana")


def test_graph_parse_errors():
    with pytest.raises(io.ParseError) as exc:
        io.parse_graph("n 3\ne 0 0\n")
    assert exc.value.line == 2
    with pytest.raises(io.ParseError):
        io.parse_graph("e 0 1\n")


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_golden(capsys):
    code, out, _ = _run(capsys, "golden")
    assert code == 0
    assert "status=FAIL" not in out
    assert out.strip().splitlines()[-1].startswith("summary status=PASS")


def test_cli_verify_gadget(capsys):
    for argv in (("split",), ("u", "--gate", "H", "--k", "3"), ("cx",), ("qsat4-ccx",)):
        code, out, _ = _run(capsys, "verify-gadget", *argv)
        assert code == 0, out


def test_cli_files(capsys):
    d = str(DATA)
    cases = [
        ("run-verifier", f"{d}/h_cx.circuit", f"{d}/proof1.state"),
        ("lcu-sim", f"{d}/h_cx.circuit"),
        ("pauli-decomp", f"{d}/t8.matrix"),
        ("psi-transform", f"{d}/t8.matrix"),
        ("sparse-decomp", f"{d}/example.sparse"),
        ("esh-check", f"{d}/example.sparse", f"{d}/null.state"),
        ("assemble", "qsat4", f"{d}/g2.circuit", "--proof", f"{d}/g2_accept.state"),
        ("homology", f"{d}/c4.graph"),
        ("homology", f"{d}/octahedron.graph", "--k", "2", "--weighted"),
        ("clique-laplacian", f"{d}/c4.graph", "--k", "0"),
        ("join", f"{d}/s0.graph", f"{d}/s0.graph"),
    ]
    for argv in cases:
        code, out, err = _run(capsys, *argv)
        assert code == 0, (argv, out, err)
        assert out.startswith("command: cycver")


def test_cli_failing_check_exit_code(capsys, tmp_path):
    plus = tmp_path / "plus.state"
    plus.write_text("k=3 n=1\n1\n1\n")
    code, out, _ = _run(capsys, "run-verifier", str(DATA / "h_cx.circuit"), str(plus))
    assert code == 1 and "summary status=FAIL" in out


def test_cli_errors(capsys, tmp_path):
    code, _, err = _run(capsys, "nullspace", str(tmp_path / "missing.txt"))
    assert code == 2 and err.startswith("error:")
    bad = tmp_path / "bad.matrix"
    bad.write_text("k=3 rows=1 cols=1\n[1, 2]\n")
    code, _, err = _run(capsys, "pauli-decomp", str(bad))
    assert code == 2 and "bad.matrix:2" in err


def test_cli_deterministic(capsys):
    runs = [_run(capsys, "sparse-decomp", str(DATA / "example.sparse"))[1] for _ in range(2)]
    assert runs[0] == runs[1]


@pytest.mark.skipif(shutil.which("cycver") is None, reason="console script not installed")
def test_console_script():
    r = subprocess.run(["cycver", "homology", str(DATA / "c4.graph")], capture_output=True, text=True)
    assert r.returncode == 0 and "betti" in r.stdout


def test_package_root_exports():
    import cycver

    assert cycver.CycNum is CycNum and cycver.CycMatrix is CycMatrix
