"""Exact kernels of the clock and gadget Hamiltonians."""

from cycver.hamiltonian import build_cx_gadget, build_gate_gadget, build_hclock, gate_eigendata, verify_gadget
from cycver.linalg import kernel

for T in (2, 3, 5):
    print(f"Hclock T={T}: corank", kernel(build_hclock(T).matrix()).corank)

for gate in ("T", "H"):
    r = verify_gadget(build_gate_gadget(gate_eigendata(gate, 3), gate), 2)
    print(f"H_{gate}: corank {r.corank}, delta {r.delta.to_fraction()}, checks ok {r.ok}")

r = verify_gadget(build_cx_gadget(1), 4)
print("H_CX: corank", r.corank, "checks", sorted(k for k, v in r.checks.items() if v))
