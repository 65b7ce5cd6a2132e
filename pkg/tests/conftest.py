"""Shared fixtures.

The two reference stacks (continuum level kernel on the 64^2 box, flux-1/3
lattice band on the open 48-site square) cost full dense eigensystems, so
they are built once per session. Tests must treat them as read-only.
"""

import math

import numpy as np
import pytest

from ugwb.discrete_models import (
    LatticeModel,
    auto_lowest_window,
    chern_marker,
    hofstadter_hamiltonian,
    kernel_decay_fit,
    marker_bulk_average,
    spectral_projection,
)
from ugwb.landau import lambda_nk, projection_kernel_matrix
from ugwb.operator_core import GridSpec, KernelProjection, build_ugwb
from ugwb.special_functions import jbracket

REF_B = 2.0
REF_Q = 1.0


@pytest.fixture(scope="session")
def landau_ref():
    """Lowest-level kernel at b=2 compressed with q=1 on the reference box."""
    grid = GridSpec(dim=2, half_width=6.0, points_per_axis=64)
    p = KernelProjection(kernel=projection_kernel_matrix(0, REF_B, grid), grid=grid)
    # keep levels whose weight exceeds the boundary weight scale; smaller ones
    # concentrate on shells the box cannot hold
    floor = math.exp(-REF_Q * jbracket(grid.half_width - 2.0))
    u = build_ugwb(p, REF_Q, floor=floor)
    lam_radial = np.array([lambda_nk(0, k, REF_Q, REF_B) for k in range(41)])
    return {
        "b": REF_B,
        "q": REF_Q,
        "grid": grid,
        "p": p,
        "u": u,
        "floor": floor,
        "lam_radial": lam_radial,
    }


@pytest.fixture(scope="session")
def hof48():
    """Flux-1/3 lowest band on the open 48x48 lattice, with decay fit and marker."""
    model = LatticeModel(size=48, flux_p=1, flux_q=3, boundary="open")
    h = hofstadter_hamiltonian(model)
    evals = np.linalg.eigvalsh(h)
    window = auto_lowest_window(evals)
    p = spectral_projection(h, window)
    fit = kernel_decay_fit(p, periodic=False)
    field = chern_marker(p, model)
    return {
        "model": model,
        "evals": evals,
        "window": window,
        "p": p,
        "fit": fit,
        "marker_field": field,
        "marker_bulk": marker_bulk_average(field),
    }


@pytest.fixture(scope="session")
def hof48_ugwb(hof48):
    """Weighted eigenbasis of the lattice band at a rate under the fitted decay."""
    p = hof48["p"]
    fit = hof48["fit"]
    p.decay = (fit.c, fit.beta)
    return build_ugwb(p, 0.25)


@pytest.fixture(scope="session")
def rank1_gauss():
    """Rank-one projection onto a grid-normalized Gaussian, exact by construction."""
    grid = GridSpec(dim=2, half_width=6.0, points_per_axis=48)
    g = np.exp(-0.5 * grid.radii() ** 2).astype(complex)
    g /= np.sqrt(np.sum(np.abs(g) ** 2) * grid.weight)
    p = KernelProjection(kernel=np.outer(g, g.conj()), grid=grid)
    u = build_ugwb(p, 1.0)
    return {"grid": grid, "g": g, "p": p, "u": u}
