"""Betti numbers of small clique complexes and the octahedron as a join."""

from cycver.homology import betti_numbers, clique_complex, cycle_graph, euler_characteristic, join, octahedron, points

print("C5:", betti_numbers(clique_complex(cycle_graph(5))))
K = clique_complex(octahedron())
print("octahedron:", K.counts(), betti_numbers(K), "chi", euler_characteristic(K))
S0 = points(2)
print("S0*S0*S0 matches:", join(join(S0, S0), S0).simplices == K.simplices)
