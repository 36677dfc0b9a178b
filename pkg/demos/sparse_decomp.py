"""Split a sparse cyclotomic Hamiltonian into 1-sparse pieces and signed unitaries."""

from pathlib import Path

from cycver import io
from cycver.sparse import esh_reject_probability, one_sparse_to_unitaries, reconstruct, split_d_sparse

data = Path(__file__).parent / "data"
H = io.load(data / "example.sparse", "sparse")
pieces = split_d_sparse(H)
print(len(pieces), "one-sparse pieces; sum equals the lift:",
      sum((p.matrix() for p in pieces[1:]), pieces[0].matrix()) == H.lift())
for j, p in enumerate(pieces):
    us = one_sparse_to_unitaries(p)
    print(f"piece {j}: {len(us)} unitaries", " ".join(u.label for u in us), "exact:", reconstruct(us) == p.matrix())

r = esh_reject_probability(H, io.load(data / "null.state", "state"))
print("rejection probability on the null state:", r.probability.to_fraction())
