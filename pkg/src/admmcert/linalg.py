"""Minimal dense symmetric linear algebra.

Everything the certification pipeline needs from an eigensolver lives
here: exact-enough spectra for tiny matrices (Jacobi rotations, n <= 8),
extreme eigenvalues of moderately sized symmetric matrices (shifted
power iteration), and a tolerance-aware negative-semidefiniteness test.
All routines are pure functions and safe to call concurrently.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError, DomainError, UnsupportedSizeError

_JACOBI_MAX_DIM = 8
_JACOBI_SWEEPS = 64
_LANCZOS_MAX_STEPS = 400
_LANCZOS_SEED = 0x5EED


class SymMatrix:
    """A real symmetric matrix stored densely.

    The constructor symmetrizes its input by averaging with the
    transpose, so callers may pass matrices that are symmetric only up
    to roundoff. Entries must be finite.
    """

    __slots__ = ("array",)

    def __init__(self, entries) -> None:
        arr = np.asarray(entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DomainError(f"expected a square matrix, got shape {arr.shape}")
        if arr.shape[0] == 0:
            raise DomainError("matrix must be at least 1x1")
        if not np.all(np.isfinite(arr)):
            raise DomainError("matrix entries must be finite")
        self.array = 0.5 * (arr + arr.T)

    @property
    def n(self) -> int:
        return self.array.shape[0]

    def __repr__(self) -> str:
        return f"SymMatrix(n={self.n})"


def _as_sym_array(matrix) -> np.ndarray:
    if isinstance(matrix, SymMatrix):
        return matrix.array
    return SymMatrix(matrix).array


def _jacobi(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization; returns (eigenvalues, eigenvectors).

    Sweeps rows in a fixed order until the off-diagonal Frobenius norm
    drops below 1e-14 times the matrix norm, so the result is
    deterministic for a given input.
    """
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n)
    norm = np.linalg.norm(a)
    if norm == 0.0 or n == 1:
        return np.diag(a).copy(), v
    threshold = 1e-14 * norm
    mask = ~np.eye(n, dtype=bool)
    for _ in range(_JACOBI_SWEEPS):
        # Masked norm: the naive total-minus-diagonal form cancels
        # catastrophically once the off-diagonal part is small.
        off = np.linalg.norm(a[mask])
        if off < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(tau) if tau != 0.0 else 1.0
                t = t / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                rows = a[[p, q], :]
                a[[p, q], :] = rot.T @ rows
                cols = a[:, [p, q]]
                a[:, [p, q]] = cols @ rot
                a[p, q] = 0.0
                a[q, p] = 0.0
                v[:, [p, q]] = v[:, [p, q]] @ rot
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def sym_eigs(matrix) -> np.ndarray:
    """All eigenvalues of a small symmetric matrix, sorted ascending.

    Parameters
    ----------
    matrix : SymMatrix or array_like
        Symmetric matrix of dimension at most 8.

    Raises
    ------
    UnsupportedSizeError
        If the dimension exceeds 8.
    """
    a = _as_sym_array(matrix)
    if a.shape[0] > _JACOBI_MAX_DIM:
        raise UnsupportedSizeError(
            f"sym_eigs supports n <= {_JACOBI_MAX_DIM}, got n = {a.shape[0]}"
        )
    w, _ = _jacobi(a)
    return w


def _lanczos_extremes(a: np.ndarray, tol: float) -> tuple[float, float]:
    """Extreme eigenvalues by the Lanczos iteration with reorthogonalization.

    Builds a Krylov basis from a fixed-seed start vector and tracks the
    extreme Ritz values; the classical bound ``beta_j * |last Ritz
    component|`` certifies each of them, and iteration stops once both
    certificates reach ``tol`` relative to the spectral-radius estimate.
    Full reorthogonalization keeps the basis trustworthy, which is cheap
    at the matrix sizes this kernel targets.
    """
    n = a.shape[0]
    rng = np.random.default_rng(_LANCZOS_SEED)
    q = rng.standard_normal(n)
    q /= np.linalg.norm(q)
    basis = np.empty((min(n, _LANCZOS_MAX_STEPS), n))
    alphas: list[float] = []
    betas: list[float] = []
    scale = 1.0 + float(np.abs(a).max())
    best: tuple[float, float] | None = None
    for j in range(basis.shape[0]):
        basis[j] = q
        w = a @ q
        alpha = float(q @ w)
        alphas.append(alpha)
        w -= alpha * q
        if j > 0:
            w -= betas[-1] * basis[j - 1]
        # two reorthogonalization passes against the stored basis
        for _ in range(2):
            w -= basis[: j + 1].T @ (basis[: j + 1] @ w)
        beta = float(np.linalg.norm(w))
        t = np.diag(np.asarray(alphas))
        if betas:
            off = np.asarray(betas)
            t += np.diag(off, 1) + np.diag(off, -1)
        ritz, vecs = np.linalg.eigh(t)
        radius = max(abs(ritz[0]), abs(ritz[-1]), 1e-300)
        err_lo = beta * abs(vecs[-1, 0])
        err_hi = beta * abs(vecs[-1, -1])
        best = (float(ritz[0]), float(ritz[-1]))
        if max(err_lo, err_hi) <= tol * radius or beta <= 1e-14 * scale:
            return best
        betas.append(beta)
        q = w / beta
    raise ConvergenceError(
        f"Lanczos did not certify the extremes within {basis.shape[0]} steps",
        best_estimate=best,
    )


def extreme_eigs(matrix, tol: float) -> tuple[float, float]:
    """Smallest and largest eigenvalues of a symmetric matrix.

    Both values are accurate to ``tol`` relative to the spectral radius.

    Raises
    ------
    ConvergenceError
        If the iteration exhausts its step budget; carries the best
        estimates found.
    """
    a = _as_sym_array(matrix)
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    if float(np.abs(a).max()) == 0.0:
        return 0.0, 0.0
    if a.shape[0] <= _JACOBI_MAX_DIM:
        w = sym_eigs(a)
        return float(w[0]), float(w[-1])
    return _lanczos_extremes(a, tol)


def is_negative_semidefinite(matrix, margin: float) -> bool:
    """Whether the largest eigenvalue is at most ``margin``.

    ``margin`` must be nonnegative; it absorbs roundoff in matrices that
    are negative semidefinite only up to floating-point noise.
    """
    if margin < 0.0:
        raise DomainError("margin must be nonnegative")
    a = _as_sym_array(matrix)
    if a.shape[0] <= _JACOBI_MAX_DIM:
        lam_max = sym_eigs(a)[-1]
    else:
        scale = 1.0 + float(np.abs(a).max())
        _, lam_max = extreme_eigs(a, tol=min(1e-10, margin / scale + 1e-12))
    return bool(lam_max <= margin)
