"""Small dense square solves with an explicit singularity verdict."""

from __future__ import annotations

import warnings
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg

PIVOT_TOL = 1e-9


class SquareSolve(NamedTuple):
    x: Optional[np.ndarray]
    min_pivot: float
    singular: bool
    consistent: bool


def solve_square(A: np.ndarray, b: np.ndarray, pivot_tol: float = PIVOT_TOL) -> SquareSolve:
    """LU-solve ``A x = b``.

    When some pivot of the partially pivoted factorization falls below
    ``pivot_tol`` the system is reported singular and ``x`` is None;
    ``consistent`` then says whether ``b`` lies in the range of ``A``
    (a continuum of solutions) or not (no solution at all).
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    min_pivot = float(np.min(np.abs(np.diag(lu)))) if A.size else np.inf
    if min_pivot < pivot_tol:
        y, *_ = np.linalg.lstsq(A, b, rcond=None)
        resid = float(np.max(np.abs(A @ y - b))) if b.size else 0.0
        scale = 1.0 + float(np.max(np.abs(b))) if b.size else 1.0
        return SquareSolve(None, min_pivot, True, resid <= 1e-9 * scale)
    x = scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
    return SquareSolve(x, min_pivot, False, True)
