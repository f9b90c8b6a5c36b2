import dataclasses
import logging
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import ConvergenceError, InvalidArgumentError, NumericalError
from .fem import Pencil, assemble
from .meshgen import coarse_size, refine, triangulate
from .settings import get_settings

logger = logging.getLogger(__name__)

# pencils this small go straight to a dense generalized solver
_DENSE_LIMIT = 64


@dataclasses.dataclass(frozen=True, eq=False)
class Spectrum:
    values: np.ndarray  # ascending
    vectors: np.ndarray  # (n, k), M-orthonormal columns
    residuals: np.ndarray

    @property
    def k(self):
        return len(self.values)

    def ratios(self):
        """(lambda2/lambda1, lambda3/lambda1)."""
        return float(self.values[1] / self.values[0]), float(self.values[2] / self.values[0])

    def delta4(self):
        return float((self.values[3] - self.values[2]) / self.values[2])


def _fix_signs(vectors):
    # first vector: positive sum; others: largest-magnitude entry positive
    for j in range(vectors.shape[1]):
        v = vectors[:, j]
        s = v.sum() if j == 0 else v[np.argmax(np.abs(v))]
        if s < 0:
            vectors[:, j] = -v
    return vectors


def _residuals(k, m, values, vectors):
    r = k @ vectors - (m @ vectors) * values
    return np.linalg.norm(r, axis=0) / np.linalg.norm(vectors, axis=0)


def _rayleigh_ritz(k, m, basis):
    a = basis.T @ (k @ basis)
    b = basis.T @ (m @ basis)
    a, b = 0.5 * (a + a.T), 0.5 * (b + b.T)
    w, c = scipy.linalg.eigh(a, b)
    return w, basis @ c


def smallest_eigenpairs(p, k=None, tol=None, seed=None):
    """
    The k smallest eigenpairs of K u = lambda M u. Shift-invert Lanczos around 0 with
    k + 2 Ritz pairs, followed by a Rayleigh-Ritz pass over all of them so that
    clustered eigenvalues come back M-orthonormal.
    """
    settings = get_settings()
    k = settings.k if k is None else int(k)
    tol = settings.eig_tol if tol is None else tol
    seed = settings.eig_seed if seed is None else seed
    stiffness, mass = (p.stiffness, p.mass) if isinstance(p, Pencil) else p
    stiffness, mass = sp.csr_matrix(stiffness, dtype=float), sp.csr_matrix(mass, dtype=float)
    n = stiffness.shape[0]
    if k < 1 or k > n:
        raise InvalidArgumentError(f'Invalid eigenpair count {k} for a pencil of size {n}')
    if not tol > 0:
        raise InvalidArgumentError(f'Invalid tolerance: {tol}')

    if n <= max(_DENSE_LIMIT, k + 2):
        try:
            w, v = scipy.linalg.eigh(stiffness.toarray(), mass.toarray(), subset_by_index=[0, k - 1])
        except np.linalg.LinAlgError as e:
            raise NumericalError(f'dense eigensolver failed: {e}') from e
    else:
        nev = min(k + 2, n - 1)
        v0 = np.random.default_rng(seed).standard_normal(n)
        try:
            w, v = eigsh(stiffness.tocsc(), k=nev, M=mass.tocsc(), sigma=0.0, which='LM', v0=v0)
        except ArpackNoConvergence as e:
            partial = None
            if e.eigenvalues is not None and len(e.eigenvalues):
                order = np.argsort(e.eigenvalues)
                pv = _fix_signs(e.eigenvectors[:, order].copy())
                pw = e.eigenvalues[order]
                partial = Spectrum(pw, pv, _residuals(stiffness, mass, pw, pv))
            raise ConvergenceError(f'shift-invert Lanczos did not converge: {e}', partial=partial,
                                   residuals=None if partial is None else partial.residuals) from e
        except RuntimeError as e:
            raise NumericalError(f'factorization of the stiffness matrix failed: {e}') from e
        w, v = _rayleigh_ritz(stiffness, mass, v[:, np.argsort(w)])
        w, v = w[:k], v[:, :k]

    v = _fix_signs(np.array(v, dtype=float))
    res = _residuals(stiffness, mass, w, v)
    spectrum = Spectrum(np.asarray(w, dtype=float), v, res)
    if w[0] <= 0:
        raise NumericalError(f'nonpositive smallest eigenvalue {w[0]:.6g}; the pencil is not definite')
    bad = res > tol * np.maximum(1.0, np.abs(w))
    if bad.any():
        raise ConvergenceError(f'{int(bad.sum())} eigenpairs exceed the residual tolerance {tol:g}',
                               partial=spectrum, residuals=res)
    logger.debug('eigenpairs of size-%d pencil: %s (max residual %.2e)', n, np.array2string(w, precision=6),
                 res.max())
    return spectrum


@dataclasses.dataclass(frozen=True, eq=False)
class Solution:
    domain: object
    mesh: object
    pencil: Pencil
    spectrum: Spectrum
    level: int
    coarse_values: Optional[np.ndarray] = None  # eigenvalues one refinement level below

    @property
    def values(self):
        return self.spectrum.values

    @property
    def extrapolated(self):
        """Richardson extrapolation over the last two levels, lambda + (lambda - lambda_coarse) / 3."""
        if self.coarse_values is None:
            return None
        return self.values + (self.values - self.coarse_values) / 3.0


def solve_domain(d, level=None, k=None, extrapolate=False, tol=None, h_target=None):
    """Mesh `d` coarsely, refine `level` times and return the first k eigenpairs on the finest mesh."""
    settings = get_settings()
    level = settings.refine_levels if level is None else int(level)
    k = settings.k if k is None else int(k)
    if level < 0:
        raise InvalidArgumentError(f'Invalid refinement level: {level}')
    if extrapolate and level < 1:
        raise InvalidArgumentError('extrapolation needs at least one refinement')
    mesh = triangulate(d, coarse_size(d) if h_target is None else h_target)
    coarse_values = None
    for i in range(level):
        if extrapolate and i == level - 1:
            coarse_values = smallest_eigenpairs(assemble(mesh), k, tol).values
        mesh = refine(mesh)
    pencil = assemble(mesh)
    spectrum = smallest_eigenpairs(pencil, k, tol)
    logger.info('solved %r at level %d: %d dofs', d, level, pencil.n)
    return Solution(d, mesh, pencil, spectrum, level, coarse_values)
