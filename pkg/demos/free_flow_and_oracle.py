"""Free Robin flow, checked three ways.

An odd Gaussian pair is evolved by the spectral propagator U(t) = B^-1 U_D(t) B,
by the whole-line formula for the odd extension (exact while the packet stays
away from x = 0), and by the Crank-Nicolson oracle.  Run with

    python3 demos/free_flow_and_oracle.py
"""
import numpy as np

from halfline_nls import fd_oracle as fd
from halfline_nls import nls_solver as ns
from halfline_nls import spectral_transforms as st
from halfline_nls import trajectory as tr

ALPHA = -1.0
grid = st.make_grid(40.0, 1024)
datum = tr.gaussian_odd(1.0, x0=10.0, width=1.0)
u0 = st.ComplexField(grid, datum(grid.x))

print("t     spectral vs analytic   oracle vs spectral   mass change")
params = ns.ModelParams(0.0, 3, ALPHA, datum)
oracle = fd.crank_nicolson_robin(fd.FDConfig(40.0, 1024, 0.005, params), 2.0, snapshot_every=0.5)
for snap in oracle.snapshots[1:]:
    t = snap.t
    u = st.free_evolution_robin(u0, t, ALPHA)
    exact = datum.free_solution(grid.x, t)
    a = np.linalg.norm(u.values - exact) / np.linalg.norm(exact)
    b = np.linalg.norm(snap.u - u.values) / np.linalg.norm(u.values)
    dm = st.l2_norm(u) / st.l2_norm(u0) - 1
    print(f"{t:4.1f}  {a:20.2e}   {b:18.2e}   {dm:11.1e}")

# The group law holds exactly: two half steps equal one full step.
half = st.free_evolution_robin(st.free_evolution_robin(u0, 0.75, ALPHA), 0.75, ALPHA)
full = st.free_evolution_robin(u0, 1.5, ALPHA)
print("group law defect", np.linalg.norm(half.values - full.values) / np.linalg.norm(full.values))
