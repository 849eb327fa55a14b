import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg

from errors import NumericalError


def linear_solver(
    A: sp.spmatrix, b: np.ndarray, x0: np.ndarray = None, rtol: float = 1e-8
) -> np.ndarray:
    """
    Conjugate gradients with a Jacobi preconditioner

    Parameters
    ----------
    A : sp.spmatrix
        Symmetric positive definite
    b : np.ndarray
    x0 : np.ndarray
        Initial guess
    rtol : float
        Target relative residual ||b - Ax|| / ||b||

    Returns
    -------
    np.ndarray
    """
    A = sp.csr_matrix(A)
    b = np.asarray(b, dtype=np.float64)
    n = b.size

    if not np.any(b):
        return np.zeros(n)

    diagonal = A.diagonal()
    if np.any(diagonal <= 0):
        raise NumericalError("matrix has a non-positive diagonal entry")

    inverse_diagonal = 1.0 / diagonal
    preconditioner = LinearOperator(
        (n, n), matvec=lambda r: inverse_diagonal * r, dtype=np.float64
    )

    x, info = cg(A, b, x0=x0, rtol=rtol, atol=0.0, maxiter=10 * n, M=preconditioner)
    if info > 0:
        raise NumericalError(
            f"conjugate gradients did not converge in {10 * n} iterations"
        )
    if info < 0:
        raise NumericalError("conjugate gradients broke down")

    return x
