"""The self-similar boundary profile Lambda(xi) and what a linear run shows.

Both quadrature variants of Lambda are tabulated, the statement variant is
checked against its Beta-function value at xi = 0, and a short linear run with
h = A t (1+t)^(-1-beta) is sampled along x = xi sqrt(t).

    python3 demos/self_similar_profile.py
"""
import numpy as np

from halfline_nls import analysis as an
from halfline_nls import boundary_kernels as bk
from halfline_nls import nls_solver as ns
from halfline_nls import spectral_transforms as st
from halfline_nls import trajectory as tr

ALPHA, BETA, A = -1.0, 0.9, 1e-2

print("xi     |Lambda| statement   |Lambda| closing")
for xi in (0.0, 0.5, 1.0, 2.0, 4.0, 20.0):
    s = an.lambda_profile(xi, BETA, ALPHA, "statement").value
    c = an.lambda_profile(xi, BETA, ALPHA, "closing").value
    print(f"{xi:4.1f}  {abs(s):18.4f}  {abs(c):17.4f}")
print("Beta oracle at 0:", abs(an.lambda_at_zero_oracle(BETA)))

grid = st.make_grid(80.0, 1024)
params = ns.ModelParams(0.0, 4, ALPHA, tr.zero_datum())
traj = ns.solve(params, bk.theorem8_profile(A, BETA), 30.0, 0.01, grid, snapshot_every=1.0)
xi = np.linspace(0.0, 4.0, 9)
times, rows = an.sample_self_similar(traj, xi)
print("\nt     |u(t,0)|/h(t)   max over xi of |t^(beta-1/2) u / A|")
for t in (5, 10, 20, 30):
    k = int(np.argmin(abs(times - t)))
    h = A * t / (1 + t) ** (1 + BETA)
    scaled = np.abs(rows[k]) * times[k] ** (BETA - 0.5) / A
    print(f"{t:3d}  {abs(rows[k][0]) / h:14.3f}  {scaled.max():14.4f}")
