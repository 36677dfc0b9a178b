"""cycver command line front end.

Every command prints a deterministic report: a `command` echo, one `check`
line per verification with status PASS or FAIL, witness lines, and a final
`summary`.  The exit code is 0 iff every check passed, 1 if some check
failed and 2 on bad input.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from importlib import resources

import numpy as np

from . import hamiltonian as ham
from . import homology as hom
from . import io
from . import sparse as sp
from . import statesim as ss
from .cyclotomic import CycNum, format_cycnum, psi, sqrt2
from .linalg import (CycMatrix, is_unitary, kernel, norm2, pauli_decompose, pauli_reconstruct,
                     spectral_report)


def _val(v) -> str:
    if isinstance(v, CycNum):
        return str(v.to_fraction()) if v.is_rational() else format_cycnum(v)
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


class Report:
    def __init__(self, argv):
        self.lines = ["command: cycver " + " ".join(argv)]
        self.passed = 0
        self.failed = 0

    def check(self, name, ok, **info):
        ok = bool(ok)
        self.passed += ok
        self.failed += not ok
        extra = "".join(f" {k}={_val(v)}" for k, v in info.items())
        self.lines.append(f"check {name} status={'PASS' if ok else 'FAIL'}{extra}")

    def info(self, name, **info):
        self.lines.append(f"info {name}" + "".join(f" {k}={_val(v)}" for k, v in info.items()))

    def raw(self, text):
        self.lines.extend(text.rstrip("\n").split("\n"))

    def merge(self, other):
        self.lines.extend(other.lines[1:])
        self.passed += other.passed
        self.failed += other.failed

    def finish(self, out=None) -> int:
        out = sys.stdout if out is None else out
        status = "PASS" if self.failed == 0 else "FAIL"
        self.lines.append(f"summary status={status} passed={self.passed} failed={self.failed}")
        out.write("\n".join(self.lines) + "\n")
        return 0 if self.failed == 0 else 1


def _vec_str(vec) -> str:
    return "(" + ", ".join(_val(a) for a in vec) + ")"


# ---------------------------------------------------------------- gadgets


def _report_gadget(rep, r: ham.GadgetReport, expected: int):
    rep.check(f"{r.name}.corank", r.corank == expected, corank=r.corank, expected=expected)
    rep.check(f"{r.name}.hermitian", r.hermitian)
    rep.check(f"{r.name}.psd_on_clock", r.psd_on_clock)
    for key in sorted(r.checks):
        if key == "corank":
            continue
        rep.check(f"{r.name}.{key}", r.checks[key])
    if r.delta is not None:
        rep.info(f"{r.name}.delta", value=r.delta)
    for i, v in enumerate(r.kernel):
        rep.info(f"{r.name}.kernel[{i}]", vector=_vec_str(v))


def _split_report(k):
    one, zero = CycNum.one(k), CycNum.zero(k)
    P0, P1 = ham.split_projectors([one, zero], [zero, one])
    return ham.hsplit_report(P0, P1)


def cmd_verify_gadget(args, rep):
    k = args.k
    if args.which == "split":
        _report_gadget(rep, _split_report(k or 1), 2)
    elif args.which == "u":
        gate = args.gate
        k = k or (3 if gate in ("T", "H") else 2 if gate == "S" else 1)
        g = ham.build_gate_gadget(ham.gate_eigendata(gate, k), gate)
        _report_gadget(rep, ham.verify_gadget(g, 2), 2)
    elif args.which == "cx":
        g = ham.build_cx_gadget(k or 1)
        _report_gadget(rep, ham.verify_gadget(g, 4), 4)
        H = g.ham
        for lab, vec in ham.cx_kernel_states(k or 1).items():
            rep.check(f"CX.kernel_state[{lab}]", H.annihilates(vec))
    else:
        name = args.which.split("-", 1)[1].upper()
        r = ham.qsat4_gadget_report(name, k or 1)
        rep.check(f"qsat4-{name}.corank", r["corank"] == r["expected"], corank=r["corank"],
                  expected=r["expected"])
        rep.check(f"qsat4-{name}.psd", r["psd"])
        rep.check(f"qsat4-{name}.rational", r["rational"])
        rep.check(f"qsat4-{name}.locality", r["locality"] <= 4, locality=r["locality"])


def cmd_nullspace(args, rep):
    H = io.load(args.file, "ham")
    if H.n > ss.MAX_QUBITS:
        raise ValueError(f"{H.n} qubits exceeds the dense cap {ss.MAX_QUBITS}")
    M = H.matrix()
    kb = kernel(M)
    rep.info("instance", n=H.n, terms=len(H.terms), locality=H.locality, kind=H.kind)
    rep.check("terms_hermitian", H.terms_hermitian())
    rep.check("kernel_verified", all(H.annihilates({i: a for i, a in enumerate(v) if a}) for v in kb.vectors),
              corank=kb.corank)
    for i, v in enumerate(kb.vectors):
        rep.info(f"kernel[{i}]", vector=_vec_str(v))
    if M.rows <= 1 << 10:
        sr = spectral_report(M, args.tolerance)
        rep.info("spectrum", lambda_min=sr.lambda_min, gamma=sr.gamma, tolerance=sr.tolerance)


def cmd_pauli(args, rep):
    U = io.load(args.file, "matrix")
    coeffs = pauli_decompose(U)
    kk = max(U.k, 2)
    for x in sorted(coeffs):
        if coeffs[x]:
            rep.info(f"coeff[{x}]", value=coeffs[x])
    rep.check("reconstruct", pauli_reconstruct(coeffs, kk) == U.lift(kk))
    if is_unitary(U):
        total = sum((a * a.conj() for a in coeffs.values()), CycNum.zero(kk))
        rep.check("unitary_weight_sum", total == 1, value=total)


def _state_or_zero(path, k, nq):
    if path is None:
        return ss.SimState.basis(k, nq, 0)
    s = io.load(path, "state")
    if s.nqubits != nq:
        raise ValueError(f"state has {s.nqubits} qubits, expected {nq}")
    return s


def cmd_lcu(args, rep):
    c = io.load(args.circuit, "circuit")
    U, w = ss.circuit_unitary(c)
    U = U.scale(w) if w != 1 else U
    s = _state_or_zero(args.state, c.k, c.qubits)
    outs = ss.lcu_apply(U, s.amps)
    n = c.qubits
    kk = max(c.k, 2)
    target = U.lift(kk).apply([a.lift(kk) for a in s.amps])
    unitary = is_unitary(U)
    for y in sorted(outs):
        o = outs[y]
        rep.info(f"branch[{y}]", probability=o.squared_norm)
        if unitary:
            rep.check(f"branch[{y}].probability", o.squared_norm == Fraction(1, 4 ** n))
    rep.check("branch[0].equals_U_psi", list(outs["0" * 2 * n].branch) == target)


def cmd_run_verifier(args, rep):
    c = io.load(args.circuit, "circuit")
    proof = io.load(args.proof, "state") if args.proof else \
        ss.SimState.basis(c.k, c.proof_qubits, 0) if c.proof_qubits else None
    p = ss.run_verifier(c, proof)
    rep.info("acceptance", probability=p, approx=p.embed().real)
    rep.check("accepts_with_certainty", p == 1)


def cmd_psi(args, rep):
    U = io.load(args.file, "matrix")
    P = psi(U)
    rep.raw(io.format_matrix(P))
    if is_unitary(U):
        rep.check("image_orthogonal", P.T @ P == CycMatrix.identity(1, P.rows))


def cmd_sparse(args, rep):
    H = io.load(args.file, "sparse")
    pieces = sp.split_d_sparse(H)
    S = pieces[0].matrix()
    for p in pieces[1:]:
        S = S + p.matrix()
    rep.info("instance", n=H.n, d=H.d, h=H.h, entries=len(H.entries))
    rep.check("colour_bound", len(pieces) <= max(1, H.d ** 2), pieces=len(pieces))
    rep.check("colours_reconstruct_lift", S == H.lift())
    for j, p in enumerate(pieces):
        rep.check(f"piece[{j}].one_sparse", p.check())
        us = sp.one_sparse_to_unitaries(p)
        rep.check(f"piece[{j}].reconstruct", sp.reconstruct(us) == p.matrix(), unitaries=len(us))
        rep.check(f"piece[{j}].unitary", all(u.is_unitary() for u in us))
        # measured spectral norms: the piece and the + sign completion alone
        plus = sp.reconstruct([u for u in us if u.sign > 0])
        rep.info(f"piece[{j}].norms", piece=_spec_norm(p.matrix()), completed=_spec_norm(plus))
        for u in us:
            rep.info(f"piece[{j}].{u.label}", weight=u.weight)


def _spec_norm(M) -> float:
    return float(np.linalg.norm(M.to_numpy(), 2))


def cmd_esh(args, rep):
    H = io.load(args.ham, "sparse")
    s = io.load(args.state, "state")
    r = sp.esh_reject_probability(H, s)
    vec = list(s.amps)
    if len(vec) == H.dim:
        vec += [CycNum.zero(H.k)] * H.dim
    hv = H.lift().apply(vec)
    rep.info("verifier", ancilla_qubits=r.ancilla_qubits, unitaries=r.terms, eta=r.eta,
             prep_probability=r.prep_probability)
    rep.info("rejection", probability=r.probability, approx=r.probability.embed().real)
    rep.check("matches_norm_formula", r.probability == norm2(hv) / norm2(vec) * r.eta)
    rep.info("nullstate", value=r.probability.is_zero())


def _register_input(c, proof_path):
    proof = io.load(proof_path, "state") if proof_path else ss.SimState.basis(c.k, c.proof_qubits, 0)
    if proof.nqubits != c.proof_qubits:
        raise ValueError(f"proof has {proof.nqubits} qubits, circuit expects {c.proof_qubits}")
    anc = ss.SimState.basis(c.k, c.ancillas, 0)
    return list(anc.kron(proof).amps) if c.ancillas else list(proof.amps)


def cmd_assemble(args, rep):
    c = io.load(args.circuit, "circuit")
    if args.kind == "2local":
        a = ham.assemble_2local(c, args.jclock)
        rep.info("instance", qubits=a.n, clock=len(a.clock), jclock=a.jclock)
        # kernel on the clock space without the input/output penalties
        b = ham.assemble_2local(c, a.jclock.to_fraction(), with_in=False, with_out=False)
        R = b.total().restrict(b.clock_space())
        kb = kernel(R)
        rep.check("kernel_dimension", kb.corank == 1 << b.nreg, corank=kb.corank, expected=1 << b.nreg)
        pb = ham.projection_bound(a.h1(), a.hclock, a.jclock, sector_qubits=a.clock, tol=args.tolerance)
        rep.info("projection", lower=pb.lower, lambda_min=pb.lambda_min, upper=pb.upper,
                 h1_norm=pb.h1_norm, j_eff=pb.j_eff)
        rep.check("projection_sandwich", pb.holds)
    else:
        q = ham.build_qsat4_g2(c)
        H = q.ham
        rep.info("instance", qubits=H.n, terms=len(H.terms), locality=H.locality)
        rep.check("locality", H.locality <= 4)
        rep.check("terms_psd", H.terms_psd(args.tolerance))
        rep.check("rational", all(e.is_rational() for _, M in H.terms for e in M.entries()))
        x = _register_input(c, args.proof)
        hist = q.history_state(x)
        p = ss.run_verifier(c, io.load(args.proof, "state") if args.proof else None)
        energy = H.expectation(hist) / norm2(list(hist.values()))
        rep.info("proof", acceptance=p, history_energy=energy, approx=energy.embed().real)
        if p == 1:
            for i, name in enumerate(H.names):
                rep.check(f"term[{i}].{name}.annihilates", not any(H.apply_term(i, hist).values()))
        else:
            rep.check("history_energy_positive", energy.embed().real >= 1e-6)


def _graph_complex(args, path):
    G = io.load(path, "graph")
    if not getattr(args, "weighted", True):
        G = G.reweighted([1] * G.n)
    return G, hom.clique_complex(G, args.max_dim)


def cmd_homology(args, rep):
    G, K = _graph_complex(args, args.graph)
    k = args.k
    r = hom.gch_report(K, k, tol=args.tolerance)
    rep.info("complex", counts=",".join(map(str, K.counts())), euler=hom.euler_characteristic(K))
    rep.info("homology", k=k, betti=r.betti, lambda_min=r.lambda_min, verdict=r.verdict)
    rep.check("corank_equals_betti", hom.laplacian_corank(K, k) == r.betti)
    rep.check("closed_form_laplacian", hom.laplacian(K, k) == hom.laplacian_closed_form(K, k))
    rep.check("euler_matches_betti", hom.euler_characteristic(K) ==
              sum((-1) ** j * b for j, b in enumerate(hom.betti_numbers(K))))
    rep.check("coboundary_squares_to_zero", all(hom.composition_is_zero(K, j) for j in range(K.dim + 1)))


def cmd_laplacian(args, rep):
    G, K = _graph_complex(args, args.graph)
    L = hom.laplacian(K, args.k)
    rep.info("basis", simplices=" ".join("[" + ",".join(map(str, s)) + "]" for s in K.layer(args.k)))
    if L:
        rep.raw(io.format_matrix(CycMatrix.from_rationals(L)))
    rep.check("closed_form_laplacian", L == hom.laplacian_closed_form(K, args.k))


def cmd_join(args, rep):
    G1, K1 = _graph_complex(args, args.a)
    G2, K2 = _graph_complex(args, args.b)
    J = hom.join(K1, K2)
    GJ = hom.graph_join(G1, G2)
    rep.info("join", counts=",".join(map(str, J.counts())),
             betti=",".join(map(str, hom.betti_numbers(J))), euler=hom.euler_characteristic(J))
    rep.check("downward_closed", J.check())
    rep.check("equals_clique_complex_of_graph_join",
              J.simplices == hom.clique_complex(GJ, max(args.max_dim, J.dim)).simplices)
    rep.raw(io.format_graph(GJ))


# ----------------------------------------------------------------- golden


def _data(name):
    return io.parse_matrix(resources.files("cycver").joinpath("data", name).read_text(), name)


def _golden_psi(name):
    def run(rep):
        U, P = _data(f"{name}.txt"), _data(f"{name}_psi.txt")
        rep.check(f"psi({name})", psi(U) == P)
    return run


def _golden_gadgets(rep):
    _report_gadget(rep, _split_report(1), 2)
    for gate in ("T", "H"):
        g = ham.build_gate_gadget(ham.gate_eigendata(gate, 3), gate)
        r = ham.verify_gadget(g, 2)
        rep.check(f"H_{gate}.corank", r.corank == 2 and r.ok, corank=r.corank)
    r = ham.verify_gadget(ham.build_cx_gadget(1), 4)
    rep.check("H_CX.corank", r.corank == 4 and r.ok, corank=r.corank)


def _golden_clock(rep):
    for T in (2, 3, 5):
        H = ham.build_hclock(T)
        M = H.matrix()
        kb = kernel(M)
        e0 = M[0, 0]
        sr = spectral_report(M)
        rep.check(f"Hclock[T={T}]", kb.corank == T + 1 and e0 == T + 1 and sr.gamma >= T - 1e-9,
                  corank=kb.corank, zero_energy=e0, gamma=sr.gamma)


def _golden_probabilities(rep):
    k = 3
    one, z = CycNum.one(k), CycNum.zero(k)
    s = ss.SimState.from_vector([one, sqrt2(k), z, one])
    for g in ("T", "H"):
        U, w = ss.gate_matrix(g, k)
        outs = ss.lcu_apply(U.scale(w) if w != 1 else U, [one, sqrt2(k)])
        rep.check(f"lcu[{g}].branches", all(o.squared_norm == Fraction(1, 4) for o in outs.values()))
    U, _ = ss.gate_matrix("CX", k)
    outs = ss.lcu_apply(U, s.amps)
    rep.check("lcu[CX].branches", all(o.squared_norm == Fraction(1, 16) for o in outs.values()))
    for r, cp in ((2, 3), (4, 13)):
        rep.check(f"padding_overlap[r={r},c={cp}]", ss.padding_overlap(r, cp) == Fraction(cp, 2 ** r))
    for a in ([2, 1], [3, 1, 1, 2]):
        _, rec = ss.prepare_integer_state([CycNum.rational(1, x) for x in a])
        rep.check(f"integer_state[{','.join(map(str, a))}]", rec.probability.to_fraction() >= rec.bound,
                  probability=rec.probability, bound=rec.bound)


def _golden_sparse(rep):
    k = 3
    zp = lambda e: CycNum.zeta_power(k, e)  # noqa: E731
    o = CycNum.one(k)
    P = sp.OneSparsePiece(4, k, {0: (0, o), 1: (1, zp(1) - zp(3)), 2: (3, o + zp(2)), 3: (2, o - zp(2))})
    _, parts = sp.bit_split(P)
    got = [(kind, m, l) for kind, m, l, _ in parts]
    rep.check("sparse_example_split", got == [("C", 0, 0), ("C", 2, 0), ("D", 0, 0), ("D", 1, 0), ("D", 3, 0)])


def _golden_qsat4(rep):
    for name, exp in (("X", 2), ("CX", 4), ("HH", 4), ("CCX", 8)):
        r = ham.qsat4_gadget_report(name)
        rep.check(f"qsat4[{name}].corank", r["corank"] == exp and r["psd"] and r["rational"], corank=r["corank"])


def _golden_toffoli(rep):
    k = 2
    c = ss.Circuit(k, 0, 3, ss.Gateset("CS", 2), ss.toffoli_from_cs(0, 1, 2))
    U, w = ss.circuit_unitary(c)
    U = U.scale(w)
    T, _ = ss.gate_matrix("CCX", k)
    phase = U[0, 0] / T[0, 0]
    rep.check("toffoli_from_cs", U == T.scale(phase) and phase.abs2() == 1, phase=phase)


GOLDEN = [
    _golden_psi("sqrt_h"),
    _golden_psi("f8"),
    _golden_gadgets,
    _golden_clock,
    _golden_probabilities,
    _golden_sparse,
    _golden_qsat4,
    _golden_toffoli,
]


def cmd_golden(args, rep):
    threads = max(1, int(os.environ.get("CYCVER_THREADS", "1") or 1))

    def run(fn):
        sub = Report([])
        fn(sub)
        return sub

    with ThreadPoolExecutor(max_workers=threads) as pool:
        for sub in pool.map(run, GOLDEN):
            rep.merge(sub)


# ------------------------------------------------------------------ parser


def build_parser():
    p = argparse.ArgumentParser(prog="cycver", description="Exact verification of cyclotomic quantum constructions.")
    p.add_argument("--tolerance", type=float, default=1e-9, help="floating tolerance for spectral checks")
    p.add_argument("--max-dim", type=int, default=hom.DEFAULT_MAX_DIM, help="clique enumeration cap")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("verify-gadget", help="exact corank and checklist of a built-in gadget")
    g.add_argument("which", choices=["split", "u", "cx", "qsat4-x", "qsat4-cx", "qsat4-hh", "qsat4-ccx"])
    g.add_argument("--gate", default="T", choices=["I", "T", "S", "Z", "H", "X"])
    g.add_argument("--k", type=int, default=None)
    g.set_defaults(func=cmd_verify_gadget)

    g = sub.add_parser("nullspace", help="exact kernel of a Hamiltonian file")
    g.add_argument("file")
    g.set_defaults(func=cmd_nullspace)

    g = sub.add_parser("pauli-decomp", help="Pauli coefficients of a matrix file")
    g.add_argument("file")
    g.set_defaults(func=cmd_pauli)

    g = sub.add_parser("lcu-sim", help="LCU branches of a circuit's unitary")
    g.add_argument("circuit")
    g.add_argument("--state", default=None)
    g.set_defaults(func=cmd_lcu)

    g = sub.add_parser("run-verifier", help="exact acceptance probability")
    g.add_argument("circuit")
    g.add_argument("proof", nargs="?", default=None)
    g.set_defaults(func=cmd_run_verifier)

    g = sub.add_parser("psi-transform", help="rational image of a cyclotomic matrix")
    g.add_argument("file")
    g.set_defaults(func=cmd_psi)

    g = sub.add_parser("sparse-decomp", help="1-sparse pieces and signed unitaries")
    g.add_argument("file")
    g.set_defaults(func=cmd_sparse)

    g = sub.add_parser("esh-check", help="rejection probability of the sparse verifier")
    g.add_argument("ham")
    g.add_argument("state")
    g.set_defaults(func=cmd_esh)

    g = sub.add_parser("assemble", help="build and check a circuit Hamiltonian")
    g.add_argument("kind", choices=["2local", "qsat4"])
    g.add_argument("circuit")
    g.add_argument("--proof", default=None)
    g.add_argument("--jclock", type=int, default=None)
    g.set_defaults(func=cmd_assemble)

    for name, func, hlp in (("homology", cmd_homology, "Betti number and gap"),
                            ("clique-laplacian", cmd_laplacian, "exact Laplacian")):
        g = sub.add_parser(name, help=hlp)
        g.add_argument("graph")
        g.add_argument("--k", type=int, default=1)
        g.add_argument("--weighted", action="store_true", help="use the file's vertex weights")
        g.set_defaults(func=func)

    g = sub.add_parser("join", help="join of two clique complexes")
    g.add_argument("a")
    g.add_argument("b")
    g.add_argument("--weighted", action="store_true")
    g.set_defaults(func=cmd_join)

    g = sub.add_parser("golden", help="replay the built-in reference fixtures")
    g.set_defaults(func=cmd_golden)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    rep = Report(argv)
    try:
        args.func(args, rep)
    except io.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return rep.finish()


if __name__ == "__main__":
    sys.exit(main())
