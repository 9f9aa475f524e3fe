import numpy as np
import pytest

from wavestab import BoundaryCondition, Field, State, make_grid

L_PI = float(np.pi)


@pytest.fixture
def neumann_grid():
    return make_grid(L_PI, 128, BoundaryCondition.NEUMANN)


@pytest.fixture
def dirichlet_grid():
    return make_grid(L_PI, 128, BoundaryCondition.DIRICHLET)


def random_trig_field(grid, rng, degree=12):
    """Trigonometric polynomial with uniform[-1,1] coefficients.

    Dirichlet grids get sines only so the boundary values stay exactly zero.
    """
    x = grid.nodes
    vals = np.zeros_like(x)
    if grid.bc is BoundaryCondition.NEUMANN:
        vals += rng.uniform(-1.0, 1.0)
    for j in range(1, degree + 1):
        vals += rng.uniform(-1.0, 1.0) * np.sin(j * np.pi * x / grid.L)
        if grid.bc is BoundaryCondition.NEUMANN:
            vals += rng.uniform(-1.0, 1.0) * np.cos(j * np.pi * x / grid.L)
    return Field(grid, vals)


def random_state(grid, rng, degree=12):
    return State(random_trig_field(grid, rng, degree), random_trig_field(grid, rng, degree))
