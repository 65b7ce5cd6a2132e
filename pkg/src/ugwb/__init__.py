"""Ultra-generalized Wannier bases for gapped projections.

Eigenbases of W = P exp(-q <X>) P concentrate on spheres whose radii are
read off the eigenvalues; this package builds them on grids, checks the
certificates that come with them, and ships Landau-level analytics plus a
magnetic lattice model as test beds.

Submodules import numpy; attribute access is lazy so that the command-line
entry point can cap thread counts before any numerics load.
"""

__version__ = "0.1.0"

_EXPORTS = {
    "laguerre": "special_functions",
    "jbracket": "special_functions",
    "gauss_laguerre": "special_functions",
    "integrate_adaptive": "special_functions",
    "QuadratureRule": "special_functions",
    "landau_energy": "landau",
    "landau_basis": "landau",
    "lambda_nk": "landau",
    "lambda_bounds_n0": "landau",
    "radius_from_lambda": "landau",
    "mean_radius_from_lambda": "landau",
    "radius_bracket_n0": "landau",
    "toeplitz_element": "landau",
    "projection_kernel": "landau",
    "projection_kernel_matrix": "landau",
    "GridSpec": "operator_core",
    "LocalizationFunction": "operator_core",
    "exponential_weight": "operator_core",
    "KernelProjection": "operator_core",
    "assemble_wf": "operator_core",
    "eigendecompose": "operator_core",
    "group_degeneracies": "operator_core",
    "localization_integral": "operator_core",
    "hs_bound": "operator_core",
    "build_ugwb": "operator_core",
    "check_ugwb": "operator_core",
    "verify_projection": "operator_core",
    "Ugwb": "operator_core",
    "UgwbLevel": "operator_core",
    "LatticeModel": "discrete_models",
    "hofstadter_hamiltonian": "discrete_models",
    "spectral_projection": "discrete_models",
    "kernel_decay_fit": "discrete_models",
    "chern_marker": "discrete_models",
    "trace_per_unit_volume": "analysis",
    "radius_gap_stats": "analysis",
    "prop24_diagnostic": "analysis",
    "write_kernel": "kernel_io",
    "read_kernel": "kernel_io",
}

__all__ = sorted(_EXPORTS) + ["errors"]


def __getattr__(name):
    if name in _EXPORTS:
        import importlib

        module = importlib.import_module(f".{_EXPORTS[name]}", __name__)
        value = getattr(module, name)
        globals()[name] = value
        return value
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(set(globals()) | set(__all__))
