"""Exact cyclotomic verification toolkit."""

from .cyclotomic import CycNum, FieldSpec, embed, in_ring_D, psi, reg_rep, small_sum_bound
from .linalg import CycMatrix, kernel, rank, rref

__all__ = [
    "CycNum",
    "FieldSpec",
    "CycMatrix",
    "embed",
    "in_ring_D",
    "kernel",
    "psi",
    "rank",
    "reg_rep",
    "rref",
    "small_sum_bound",
]
