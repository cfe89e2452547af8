import numpy as np
import pytest

import helpers


@pytest.fixture(scope="session", autouse=True)
def warm_lp_kernel():
    """Compile the simplex kernel once so timed tests measure the
    algorithm, not numba's first-call compilation."""
    from grcert.lp import LpProblem, solve_lp, MAX
    p = LpProblem(MAX, c=np.array([1.0]), A=np.array([[1.0]]), b=np.array([1.0]),
                  senses=np.array([-1]), lb=np.array([0.0]), ub=np.array([2.0]))
    solve_lp(p)


@pytest.fixture(scope="session")
def fixture_net():
    return helpers.fixture_net()
