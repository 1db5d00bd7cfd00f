import os
import subprocess
import sys

import numpy as np
import pytest

from inexact_ipm import _kernels_py, kernels
from inexact_ipm.linalg import SparseMatrix

compiled = pytest.importorskip("inexact_ipm._kernels")


@pytest.fixture
def problem():
    rng = np.random.default_rng(3)
    M = rng.uniform(-1, 1, size=(40, 90))
    M[rng.random(M.shape) > 0.2] = 0.0
    A = SparseMatrix.from_dense(M)
    return A, M, rng


@pytest.mark.parametrize("name", ["csc_matvec", "csc_rmatvec", "csc_normal_apply", "csc_normal_diagonal"])
def test_backends_agree(problem, name):
    A, M, rng = problem
    v = rng.standard_normal(90)
    u = rng.standard_normal(40)
    d2 = rng.uniform(0.1, 4.0, size=90)
    args = {
        "csc_matvec": (v, 40),
        "csc_rmatvec": (u,),
        "csc_normal_apply": (d2, u),
        "csc_normal_diagonal": (d2, 40),
    }[name]
    full = (A.indptr, A.indices, A.data) + args
    out_c = np.asarray(getattr(compiled, name)(*full))
    out_py = getattr(_kernels_py, name)(*full)
    assert np.allclose(out_c, out_py, rtol=1e-13, atol=1e-13)


def test_reference_products(problem):
    A, M, rng = problem
    v = rng.standard_normal(90)
    assert np.allclose(kernels.csc_matvec(A.indptr, A.indices, A.data, v, 40), M @ v)


def test_env_var_forces_fallback():
    env = dict(os.environ, INEXACT_IPM_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c", "from inexact_ipm.kernels import BACKEND; print(BACKEND)"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "python"


def test_compiled_backend_selected_by_default():
    if os.environ.get("INEXACT_IPM_PURE", "") not in ("", "0"):
        pytest.skip("fallback forced by environment")
    assert kernels.BACKEND == "cython"


def test_solver_runs_on_fallback_backend():
    code = (
        "from inexact_ipm import generate_feasible_instance, run_feasible, SolveParams, BACKEND\n"
        "inst = generate_feasible_instance(3, 6, 18)\n"
        "r = run_feasible(inst.lp, inst.strict_start, SolveParams(kappa=0.5))\n"
        "print(BACKEND, r.status, r.iterations)\n"
    )
    env = dict(os.environ, INEXACT_IPM_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True)
    backend, status, iterations = out.stdout.split()
    from inexact_ipm import SolveParams, generate_feasible_instance, run_feasible

    inst = generate_feasible_instance(3, 6, 18)
    here = run_feasible(inst.lp, inst.strict_start, SolveParams(kappa=0.5))
    assert backend == "python" and status == "optimal"
    assert abs(int(iterations) - here.iterations) <= 2
