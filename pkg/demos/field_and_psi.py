"""Arithmetic in Q(zeta_8) and the rational image of the T gate."""

from cycver import embed, psi, small_sum_bound
from cycver.cyclotomic import zeta
from cycver.statesim import gate_matrix

z = zeta(3)
print("zeta^2          =", z * z)
print("zeta - zeta^3   =", z - z ** 3, "~", embed(z - z ** 3))
a = 1 + z - z * z
print("|1+z-z^2|       ~", abs(embed(a)), ">= bound", small_sum_bound(a))

T, _ = gate_matrix("T", 3)
P = psi(T)
print("psi(T) is a", P.rows, "x", P.cols, "rational orthogonal matrix:", P.T @ P == P.identity(1, P.rows))
