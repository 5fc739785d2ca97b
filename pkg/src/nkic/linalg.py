"""Small dense Hermitian linear algebra.

``hermitian_eigenvalues`` is a cyclic Jacobi solver vectorised over a stack of
matrices, so a Monte Carlo batch of 10^6 tiny Gram matrices is diagonalised
in a handful of array passes.  ``spd_logdet`` goes through Cholesky.
"""

import numpy as np

from .errors import NumericError

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
HERMITIAN_TOL = 1e-12


def _as_stack(M):
    A = np.asarray(M)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {A.shape}")
    return A


def _check_hermitian(A):
    if not np.all(np.isfinite(A)):
        raise NumericError("matrix has non-finite entries")
    scale = np.maximum(1.0, np.linalg.norm(A, axis=(-2, -1)))
    skew = np.linalg.norm(A - np.conj(np.swapaxes(A, -1, -2)), axis=(-2, -1))
    if np.any(skew > HERMITIAN_TOL * scale):
        raise ValueError("matrix is not Hermitian")


def _off_norm(A):
    # summed directly; total minus diagonal cancels badly near convergence
    off = ~np.eye(A.shape[-1], dtype=bool)
    return np.sqrt(np.sum(np.abs(A[..., off]) ** 2, axis=-1))


def _rotate(A, p, q):
    """One Jacobi rotation in the (p, q) plane, applied to every matrix in A."""
    h = A[:, p, q]
    mag = np.abs(h)
    live = mag > 0
    safe = np.where(live, mag, 1.0)
    phase = np.where(live, h / safe, 1.0)
    app = A[:, p, p].real
    aqq = A[:, q, q].real
    theta = (aqq - app) / (2.0 * safe)
    t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
    t = np.where(live, t, 0.0)
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c

    # columns: A <- A G with G = [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
    cp = np.conj(phase)
    colp = A[:, :, p].copy()
    colq = A[:, :, q].copy()
    A[:, :, p] = c[:, None] * colp - (s * cp)[:, None] * colq
    A[:, :, q] = s[:, None] * colp + (c * cp)[:, None] * colq
    # rows: A <- G^H A
    rowp = A[:, p, :].copy()
    rowq = A[:, q, :].copy()
    A[:, p, :] = c[:, None] * rowp - (s * phase)[:, None] * rowq
    A[:, q, :] = s[:, None] * rowp + (c * phase)[:, None] * rowq

    A[:, p, q] = 0.0
    A[:, q, p] = 0.0
    A[:, p, p] = A[:, p, p].real
    A[:, q, q] = A[:, q, q].real


def hermitian_eigenvalues(M, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigenvalues of a Hermitian matrix (or a stack of them), ascending.

    Cyclic Jacobi sweeps run until the off-diagonal Frobenius norm of every
    matrix is at most ``tol`` times its original Frobenius norm.

    Raises ValueError for non-Hermitian input and NumericError when a matrix
    fails to converge within ``max_sweeps``.
    """
    A0 = _as_stack(M)
    _check_hermitian(A0)
    batch_shape = A0.shape[:-2]
    n = A0.shape[-1]
    A = np.array(A0, dtype=complex).reshape((-1, n, n))
    # symmetrise away the round-off tolerated by the Hermitian check
    A = 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))
    target = tol * np.linalg.norm(A, axis=(-2, -1))

    todo = np.flatnonzero(_off_norm(A) > target)
    sweeps = 0
    while todo.size:
        if sweeps == max_sweeps:
            raise NumericError(f"Jacobi did not converge in {max_sweeps} sweeps")
        sub = A[todo]
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(sub, p, q)
        A[todo] = sub
        sweeps += 1
        todo = todo[_off_norm(sub) > target[todo]]

    w = np.sort(np.einsum("...ii->...i", A).real, axis=-1)
    return w.reshape(batch_shape + (n,))


def cholesky(M):
    A = _as_stack(M)
    _check_hermitian(A)
    try:
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NumericError("matrix is not positive definite") from exc


def spd_logdet(M):
    """Natural-log determinant of a Hermitian positive-definite matrix (or stack)."""
    L = cholesky(M)
    diag = np.einsum("...ii->...i", L).real
    out = 2.0 * np.sum(np.log(diag), axis=-1)
    return float(out) if np.ndim(out) == 0 else out
