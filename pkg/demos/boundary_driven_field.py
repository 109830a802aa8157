"""The field driven by boundary data alone.

With zero initial datum the solution z of the free problem is fixed by h(t).
It is computed here from the closed-form boundary integral and from the
spectral time stepper, and the Robin condition is read off at x = 0.

    python3 demos/boundary_driven_field.py
"""
import numpy as np

from halfline_nls import boundary_kernels as bk
from halfline_nls import spectral_transforms as st

ALPHA = -1.0
grid = st.make_grid(80.0, 2047)
families = {
    "theorem4-class": bk.theorem4_class(1e-2),
    "theorem7-class": bk.theorem7_class(1e-2, 0.9),
    "theorem8-profile": bk.theorem8_profile(1e-2, 0.9),
}

print("family             closed form vs spectral   z + alpha z_x - h at x=0")
for name, h in families.items():
    ze = bk.z_exact(h, 1.0, grid, ALPHA)
    zs = bk.z_spectral(h, 1.0, grid, ALPHA)
    gap = np.linalg.norm(ze.values - zs.values) / np.linalg.norm(zs.values)
    z0, zx, _ = bk.z_traces(h, 1.0, ALPHA)
    print(f"{name:18s} {gap:24.1e}   {abs(z0 + ALPHA * zx - h.h(1.0)):12.1e}")

# The kernel split: the leading term carries the singular part, the remainder
# decays in s.
for s in (1.0, 4.0, 16.0):
    k = bk.kernel_I(s, 1.0, ALPHA)
    print(f"s={s:5.1f}  |leading| {abs(k.leading):.3e}  |remainder| {abs(k.remainder):.3e}")
