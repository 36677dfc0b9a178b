"""Run a tiny verifier exactly, then apply its unitary by Pauli LCU."""

from pathlib import Path

from cycver import io
from cycver.statesim import circuit_unitary, lcu_apply, run_verifier

data = Path(__file__).parent / "data"
c = io.load(data / "h_cx.circuit", "circuit")
proof = io.load(data / "proof1.state", "state")
print("acceptance probability:", run_verifier(c, proof).to_fraction())

# the full register: ancilla |0> then the proof
U, w = circuit_unitary(c)
state = list(io.parse_state("k=3 n=2\n1 1\n0 1\n").amps)
outs = lcu_apply(U, state)
print("y = 0000 branch equals U|psi>:", list(outs["0000"].branch) == U.apply(state))
for y, o in list(outs.items())[:4]:
    print(f"branch y={y}: probability {o.squared_norm.to_fraction()}")
