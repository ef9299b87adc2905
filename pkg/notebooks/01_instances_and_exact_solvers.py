"""Reading instances and solving them exactly.

Generates a random Euclidean instance, writes and re-reads it as TSPLIB text,
then solves it three ways: Held-Karp, branch-and-cut, and enumeration of
every optimal tour.
"""
from tsp_sparsify import (branch_and_cut, enumerate_optimal_tours, generate_random_instance, held_karp,
                          parse_instance, write_instance)

inst = generate_random_instance(12, seed=7)
text = write_instance(inst)
print(text.splitlines()[:6])

again = parse_instance(text)
assert (again.weights == inst.weights).all()

# Held-Karp is exact but exponential; it is the reference for small n.
hk = held_karp(inst)
print("Held-Karp length", hk.length, "order", [v + 1 for v in hk.order])

# Branch-and-cut reaches the same optimum and reports how much work it did.
bc = branch_and_cut(inst)
print(f"branch-and-cut length {bc.length}, root bound {bc.root_bound:.1f}, nodes {bc.nodes}, LP solves {bc.lp_solves}")
assert bc.length == hk.length and bc.proven

# Ties are common on small integer grids, so enumerate all optimal tours there.
grid = generate_random_instance(8, seed=1, box=5.0)
tours = enumerate_optimal_tours(grid)
print(f"{len(tours.tours)} optimal tours of length {tours.optimal_length}, truncated={tours.truncated}")
