import numpy as np
import pytest

import grainkin as gk


@pytest.fixture(scope="session")
def solver_cache():
    """Memoized steady-state solves shared across test modules."""
    cache = {}

    def solve(beta=1.0, cells=400, n_max=25, domain_length=20, kind="random",
              tol=1e-9, seed=0, max_steps=10_000_000):
        key = (beta, cells, n_max, domain_length, kind, tol, seed)
        if key not in cache:
            params = gk.Parameters(
                beta=beta, n_max=n_max, domain_length=domain_length,
                cells=cells, seed=seed,
            )
            grid = gk.Grid.from_parameters(params)
            init = gk.initial_state(params, grid, kind=kind)
            report = gk.integrate_to_steady(
                init, grid, params, tol=tol, max_steps=max_steps
            )
            cache[key] = (params, grid, report)
        return cache[key]

    return solve


@pytest.fixture
def small_params():
    """Cheap grid for unit tests: N=9, L=4, K=40."""
    return gk.Parameters(beta=1.0, n_max=9, domain_length=4, cells=40, seed=7)


@pytest.fixture
def small_grid(small_params):
    return gk.Grid.from_parameters(small_params)


def random_admissible(params, grid, seed):
    """Random state projected onto the admissible set."""
    rng = np.random.default_rng(seed)
    raw = np.zeros((params.num_classes, params.cells + 1))
    raw[:, 1:-1] = rng.uniform(0.0, 1.0, size=(params.num_classes, params.cells - 1))
    return gk.project_initial(raw, grid, params)
