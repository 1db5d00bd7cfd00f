import math
from types import SimpleNamespace

import numpy as np
import pytest

from inexact_ipm.lp_core import LinearProgram

SQRT2 = math.sqrt(2.0)

E1_MPS = """\
NAME          E1
ROWS
 N  COST
 E  R1
COLUMNS
    X1        COST         1.0   R1           1.0
    X2        COST         1.0   R1           1.0
RHS
    RHS       R1           2.0
ENDATA
"""

INFEASIBLE_MPS = """\
NAME          PINF
ROWS
 N  COST
 E  R1
COLUMNS
    X1        COST         1.0   R1           1.0
    X2        COST         1.0   R1           1.0
RHS
    RHS       R1          -1.0
ENDATA
"""


def point(x, y, z):
    return SimpleNamespace(
        x=np.asarray(x, dtype=float), y=np.asarray(y, dtype=float), z=np.asarray(z, dtype=float)
    )


@pytest.fixture
def e1():
    """``A = [1 1]``, ``b = 2``, ``c = (1, 1)`` at ``x = z = e``, ``y = 0``."""
    lp = LinearProgram.from_dense(np.array([[1.0, 1.0]]), np.array([2.0]), np.array([1.0, 1.0]), "E1")
    return lp, point([1, 1], [0], [1, 1])


@pytest.fixture
def e2():
    """``A = [1 1]``, ``b = 2``, ``c = (1, 2)`` at ``x = e``, ``y = 0``, ``z = (1, 2)``."""
    lp = LinearProgram.from_dense(np.array([[1.0, 1.0]]), np.array([2.0]), np.array([1.0, 2.0]), "E2")
    return lp, point([1, 1], [0], [1, 2])


@pytest.fixture
def primal_infeasible():
    return LinearProgram.from_dense(
        np.array([[1.0, 1.0]]), np.array([-1.0]), np.array([1.0, 1.0]), "pinf"
    )


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])
