"""Plain-text file formats.

Every file starts with a header line of `key=value` tokens.  Blank lines and
`#` comments are ignored.  Field elements are written `[n/d, n/d, ...]` in
the power basis, or as a bare rational.
"""

from __future__ import annotations

import re
from fractions import Fraction
from pathlib import Path

from .cyclotomic import CycNum, FieldSpec, format_cycnum, parse_cycnum
from .linalg import CycMatrix

_TOKEN = re.compile(r"\[[^\]]*\]|[^\s\[\]]+")


class ParseError(ValueError):
    def __init__(self, msg, line=None, source="<text>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + msg)


def _lines(text: str):
    out = []
    for no, raw in enumerate(text.splitlines(), 1):
        s = raw.split("#", 1)[0].strip()
        if s:
            out.append((no, s))
    return out


def _header(lines, required, source, optional=()):
    if not lines:
        raise ParseError("empty file", None, source)
    no, s = lines[0]
    hdr = {}
    for tok in s.split():
        if "=" not in tok:
            raise ParseError(f"header token {tok!r} is not key=value", no, source)
        key, val = tok.split("=", 1)
        hdr[key] = val
    missing = [r for r in required if r not in hdr]
    if missing:
        raise ParseError(f"header missing {', '.join(missing)}", no, source)
    unknown = set(hdr) - set(required) - set(optional)
    if unknown:
        raise ParseError(f"unknown header keys {sorted(unknown)}", no, source)
    return hdr, lines[1:]


def _int(val, what, no, source):
    try:
        return int(val)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {val!r}", no, source) from None


def _cyc(tok, k, no, source):
    try:
        a = parse_cycnum(tok, k)
    except ValueError as exc:
        raise ParseError(str(exc), no, source) from None
    return a


def _check_k(k, no, source):
    try:
        FieldSpec(k)
    except ValueError as exc:
        raise ParseError(str(exc), no, source) from None


def _fmt(a: CycNum) -> str:
    """Bare rational when possible, power-basis list otherwise."""
    return str(a.to_fraction()) if a.is_rational() else format_cycnum(a)


def read_text(path) -> tuple[str, str]:
    p = Path(path)
    try:
        return p.read_text(), str(p)
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", None, str(p)) from None


# ------------------------------------------------------------- matrices


def _matrix_body(body, k, rows, cols, fmt, source):
    z = CycNum.zero(k)
    M = [[z] * cols for _ in range(rows)]
    if fmt == "dense":
        if len(body) != rows:
            ln = body[-1][0] if body else None
            raise ParseError(f"expected {rows} dense rows, found {len(body)}", ln, source)
        for r, (no, s) in enumerate(body):
            toks = _TOKEN.findall(s)
            if len(toks) != cols:
                raise ParseError(f"expected {cols} entries, found {len(toks)}", no, source)
            M[r] = [_cyc(t, k, no, source) for t in toks]
    elif fmt == "coo":
        for no, s in body:
            toks = _TOKEN.findall(s)
            if len(toks) != 3:
                raise ParseError("COO line must be `row col value`", no, source)
            i, j = _int(toks[0], "row", no, source), _int(toks[1], "col", no, source)
            if not (0 <= i < rows and 0 <= j < cols):
                raise ParseError(f"index ({i}, {j}) out of range", no, source)
            M[i][j] = _cyc(toks[2], k, no, source)
    else:
        raise ParseError(f"unknown matrix format {fmt!r}", None, source)
    return CycMatrix(k, M)


def parse_matrix(text: str, source="<text>") -> CycMatrix:
    lines = _lines(text)
    hdr, body = _header(lines, ("k", "rows", "cols"), source, ("format",))
    no = lines[0][0]
    k = _int(hdr["k"], "k", no, source)
    _check_k(k, no, source)
    rows, cols = _int(hdr["rows"], "rows", no, source), _int(hdr["cols"], "cols", no, source)
    return _matrix_body(body, k, rows, cols, hdr.get("format", "dense"), source)


def format_matrix(M: CycMatrix, fmt: str = "dense") -> str:
    out = [f"k={M.k} rows={M.rows} cols={M.cols} format={fmt}"]
    if fmt == "dense":
        for i in range(M.rows):
            out.append(" ".join(_fmt(M[i, j]) for j in range(M.cols)))
    else:
        for i in range(M.rows):
            for j in range(M.cols):
                if M[i, j]:
                    out.append(f"{i} {j} {_fmt(M[i, j])}")
    return "\n".join(out) + "\n"


# -------------------------------------------------------------- circuits


def parse_circuit(text: str, source="<text>"):
    from .statesim import GATE_ARITY, Circuit, Gateset

    lines = _lines(text)
    hdr, body = _header(lines, ("k", "ancillas", "proof_qubits", "gateset"), source, ("qubits",))
    no = lines[0][0]
    k = _int(hdr["k"], "k", no, source)
    _check_k(k, no, source)
    na = _int(hdr["ancillas"], "ancillas", no, source)
    npf = _int(hdr["proof_qubits"], "proof_qubits", no, source)
    if "qubits" in hdr and _int(hdr["qubits"], "qubits", no, source) != na + npf:
        raise ParseError("qubits must equal ancillas + proof_qubits", no, source)
    try:
        gs = Gateset.parse(hdr["gateset"])
    except ValueError as exc:
        raise ParseError(str(exc), no, source) from None
    c = Circuit(k, na, npf, gs)
    for no, s in body:
        parts = s.split()
        if len(parts) != 2:
            raise ParseError("gate line must be `NAME t1[,t2[,t3]]`", no, source)
        name = parts[0]
        if name not in GATE_ARITY:
            raise ParseError(f"unknown gate {name!r}", no, source)
        targets = tuple(_int(t, "target", no, source) for t in parts[1].split(","))
        c.add(name, *targets)
        try:
            c.validate()
        except ValueError as exc:
            raise ParseError(str(exc), no, source) from None
    return c


def format_circuit(c) -> str:
    out = [f"k={c.k} qubits={c.qubits} ancillas={c.ancillas} "
           f"proof_qubits={c.proof_qubits} gateset={c.gateset}"]
    for name, targets in c.gates:
        out.append(f"{name} {','.join(map(str, targets))}")
    return "\n".join(out) + "\n"


# ----------------------------------------------------------- hamiltonians


def parse_ham(text: str, source="<text>"):
    """Terms are a line `S=q0,q1,...` followed by 2^|S| dense rows."""
    from .hamiltonian import HamInstance

    lines = _lines(text)
    hdr, body = _header(lines, ("k", "n"), source, ("locality", "kind"))
    no = lines[0][0]
    k = _int(hdr["k"], "k", no, source)
    _check_k(k, no, source)
    n = _int(hdr["n"], "n", no, source)
    terms = []
    i = 0
    while i < len(body):
        no, s = body[i]
        m = re.fullmatch(r"S=\[?([\d,\s]*)\]?", s)
        if not m:
            raise ParseError("expected a term line `S=q0,q1,...`", no, source)
        S = tuple(_int(q, "qubit", no, source) for q in m.group(1).replace(" ", "").split(",") if q)
        dim = 1 << len(S)
        block = body[i + 1:i + 1 + dim]
        if len(block) < dim or any(re.match(r"S=", b) for _, b in block):
            raise ParseError(f"term needs {dim} matrix rows", no, source)
        terms.append((S, _matrix_body(block, k, dim, dim, "dense", source)))
        i += 1 + dim
    try:
        H = HamInstance(n, terms, k, hdr.get("kind", "kLH"))
    except ValueError as exc:
        raise ParseError(str(exc), None, source) from None
    if "locality" in hdr and H.locality > _int(hdr["locality"], "locality", no, source):
        raise ParseError(f"a term acts on {H.locality} qubits, above the declared locality", None, source)
    return H


def format_ham(H) -> str:
    out = [f"k={H.k} n={H.n} locality={H.locality} kind={H.kind}"]
    for S, M in H.terms:
        out.append("S=" + ",".join(map(str, S)))
        for i in range(M.rows):
            out.append(" ".join(_fmt(M[i, j]) for j in range(M.cols)))
    return "\n".join(out) + "\n"


def parse_sparse(text: str, source="<text>"):
    from .sparse import SparseHam

    lines = _lines(text)
    hdr, body = _header(lines, ("k", "n", "d"), source, ("h",))
    no = lines[0][0]
    k = _int(hdr["k"], "k", no, source)
    _check_k(k, no, source)
    H = SparseHam(k, _int(hdr["n"], "n", no, source), _int(hdr["d"], "d", no, source),
                  _int(hdr.get("h", "1"), "h", no, source))
    for no, s in body:
        toks = _TOKEN.findall(s)
        if len(toks) != 3:
            raise ParseError("triplet line must be `row col value`", no, source)
        i, j = _int(toks[0], "row", no, source), _int(toks[1], "col", no, source)
        H.entries[(i, j)] = _cyc(toks[2], k, no, source)
    try:
        H.validate()
    except ValueError as exc:
        raise ParseError(str(exc), None, source) from None
    return H


def format_sparse(H) -> str:
    out = [f"k={H.k} n={H.n} d={H.d} h={H.h}"]
    for (i, j) in sorted(H.entries):
        out.append(f"{i} {j} {_fmt(H.entries[(i, j)])}")
    return "\n".join(out) + "\n"


# ----------------------------------------------------------------- states


def parse_state(text: str, source="<text>"):
    """Header `k= n=`, then 2^n amplitudes, or `index value` pairs."""
    from .statesim import SimState

    lines = _lines(text)
    hdr, body = _header(lines, ("k", "n"), source)
    no = lines[0][0]
    k = _int(hdr["k"], "k", no, source)
    _check_k(k, no, source)
    n = _int(hdr["n"], "n", no, source)
    z = CycNum.zero(k)
    amps = [z] * (1 << n)
    sparse = body and len(_TOKEN.findall(body[0][1])) == 2
    if sparse:
        for no, s in body:
            toks = _TOKEN.findall(s)
            if len(toks) != 2:
                raise ParseError("sparse state line must be `index value`", no, source)
            i = _int(toks[0], "index", no, source)
            if not 0 <= i < len(amps):
                raise ParseError(f"index {i} out of range", no, source)
            amps[i] = _cyc(toks[1], k, no, source)
    else:
        if len(body) != len(amps):
            raise ParseError(f"expected {len(amps)} amplitudes, found {len(body)}",
                             body[-1][0] if body else no, source)
        amps = [_cyc(s, k, no, source) for no, s in body]
    return SimState(k, n, tuple(amps), Fraction(1))


def format_state(s) -> str:
    out = [f"k={s.k} n={s.nqubits}"]
    out += [_fmt(a) for a in s.amps]
    return "\n".join(out) + "\n"


# ----------------------------------------------------------------- graphs


def parse_graph(text: str, source="<text>"):
    """`n N`, then `w v weight` and `e u v` lines."""
    from .homology import WeightedGraph

    lines = _lines(text)
    if not lines:
        raise ParseError("empty file", None, source)
    no, s = lines[0]
    m = re.fullmatch(r"(?:n\s*=?\s*)?(\d+)", s)
    if not m:
        raise ParseError("first line must give the vertex count `n N`", no, source)
    n = int(m.group(1))
    weights = [Fraction(1)] * n
    edges = set()
    for no, s in lines[1:]:
        toks = s.split()
        if toks[0] == "w" and len(toks) == 3:
            v = _int(toks[1], "vertex", no, source)
            try:
                w = Fraction(toks[2])
            except (ValueError, ZeroDivisionError):
                raise ParseError(f"bad weight {toks[2]!r}", no, source) from None
            if not 0 <= v < n:
                raise ParseError(f"vertex {v} out of range", no, source)
            if w <= 0:
                raise ParseError("weights must be positive", no, source)
            weights[v] = w
        elif toks[0] == "e" and len(toks) == 3:
            u, v = _int(toks[1], "vertex", no, source), _int(toks[2], "vertex", no, source)
            if u == v or not (0 <= u < n and 0 <= v < n):
                raise ParseError(f"bad edge ({u}, {v})", no, source)
            edges.add((min(u, v), max(u, v)))
        else:
            raise ParseError("expected `w v weight` or `e u v`", no, source)
    return WeightedGraph(n, edges, weights)


def format_graph(G) -> str:
    out = [f"n {G.n}"]
    for v, w in enumerate(G.weights):
        if w != 1:
            out.append(f"w {v} {w}")
    out += [f"e {u} {v}" for u, v in sorted(G.edges)]
    return "\n".join(out) + "\n"


_PARSERS = {
    "matrix": parse_matrix,
    "circuit": parse_circuit,
    "ham": parse_ham,
    "sparse": parse_sparse,
    "state": parse_state,
    "graph": parse_graph,
}


def load(path, kind: str):
    if kind not in _PARSERS:
        raise ValueError(f"unknown file kind {kind!r}")
    text, src = read_text(path)
    return _PARSERS[kind](text, src)
