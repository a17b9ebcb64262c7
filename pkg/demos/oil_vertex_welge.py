"""Welge points of the three curves that reach the oil vertex.

For a few coefficient triples the effective flux of each curve is built in
the coordinate l = u3, and the tangency from l = 1 is compared with its
closed form. The separatrix point always lies below both edge points.

    python3 demos/oil_vertex_welge.py
"""

from rieff import CoreyModel, corey_welge_closed_form, welge_point
from rieff.validation import oil_vertex_effs

triples = [(1.0, 1.0, 1.0), (2.0, 1.0, 1.0), (0.5, 3.0, 1.5), (4.0, 0.3, 0.8)]
print(f"{'A':>5} {'B':>5} {'C':>5} | {'edge 1':>12} {'edge 2':>12} {'separatrix':>12} | max err")
for A, B, C in triples:
    exact = corey_welge_closed_form(A, B, C)
    found = [welge_point(e, 1.0) for e in oil_vertex_effs(CoreyModel(A, B, C))]
    err = max(abs(a - b) for a, b in zip(found, exact))
    print(f"{A:5.2f} {B:5.2f} {C:5.2f} | " + " ".join(f"{v:12.9f}" for v in found) + f" | {err:.1e}")
