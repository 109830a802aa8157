"""Nonlinear Schrodinger equation on the half-line with a Robin boundary condition.

Submodules are imported on first use, so ``halfline_nls.fd_oracle`` can be
loaded without the spectral machinery.
"""
import importlib

__all__ = ["spectral_transforms", "boundary_kernels", "nls_solver", "fd_oracle", "analysis",
           "experiment_cli", "trajectory"]
__version__ = "0.1.0"


def __getattr__(name):
    if name in __all__:
        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
