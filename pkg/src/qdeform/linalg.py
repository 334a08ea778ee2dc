"""Exact rank and kernels over Q(zeta_N).

A matrix over Q(zeta_N) is expanded to a rational matrix phi(N) times larger
(each entry becomes its multiplication matrix in the power basis) and handed
to FLINT.  Tall systems are first compressed to the Hermitian square K^* K,
which has the same kernel because conjugation is a field automorphism.
"""
from __future__ import annotations

from fractions import Fraction

import flint
import numpy as np

from .cyclotomic import euler_phi, lcm, reduction_matrix
from .sparse import CycTensor, _conv


def expand(M: CycTensor) -> np.ndarray:
    """Integer matrix Psi(den * M) of shape (rows*phi, cols*phi)."""
    r, c = M.shape
    N = M.N
    phi = euler_phi(N)
    red = reduction_matrix(N)
    out = np.zeros((r * phi, c * phi), dtype=object)
    for l in range(phi):
        shifted = np.roll(M.num, l, axis=1) @ red  # coefficients of entry * zeta^l
        rows = M.coords[:, 0][:, None] * phi + np.arange(phi)[None, :]
        cols = np.broadcast_to(M.coords[:, 1][:, None] * phi + l, rows.shape)
        vals = shifted[:, :phi]
        out[rows.ravel(), cols.ravel()] = vals.ravel().astype(object)
    return out


def _to_flint(a: np.ndarray) -> flint.fmpz_mat:
    r, c = a.shape
    return flint.fmpz_mat(r, c, [int(x) for x in a.ravel()])


def gram(K: CycTensor) -> CycTensor:
    """K^* K (conjugate transpose times K), computed channel by channel."""
    N = K.N
    chans = K.channels()
    n = K.shape[1]
    coords, nums = [], []
    for k in range(N):
        if chans[k].nnz == 0:
            continue
        kt = chans[k].T.tocsr()
        for l in range(N):
            if chans[l].nnz == 0:
                continue
            prod = (kt @ chans[l]).tocoo()
            if prod.nnz == 0:
                continue
            e = (l - k) % N
            num = np.zeros((prod.nnz, N), np.int64)
            num[:, e] = prod.data
            coords.append(np.stack([prod.row, prod.col], 1))
            nums.append(num)
    if not coords:
        return CycTensor.zeros((n, n), N)
    return CycTensor((n, n), np.concatenate(coords), np.concatenate(nums), K.den * K.den, N)


def _square(K: CycTensor) -> CycTensor:
    return gram(K) if K.shape[0] > K.shape[1] else K


def rank(M: CycTensor) -> int:
    """Rank over Q(zeta_N)."""
    if M.nnz == 0:
        return 0
    S = _square(M)
    phi = euler_phi(S.N)
    r = _to_flint(expand(S)).rank()
    assert r % phi == 0
    return r // phi


def nullspace(M: CycTensor) -> list[CycTensor]:
    """Vectors spanning the right kernel {x : M x = 0} over Q(zeta_N).

    The list may be larger than the kernel dimension (it spans the kernel as
    a Q-space).
    """
    n = M.shape[1]
    if M.nnz == 0:
        return [CycTensor.basis_vector(n, i, M.N) for i in range(n)]
    S = _square(M)
    N = S.N
    phi = euler_phi(N)
    X, nullity = _to_flint(expand(S)).nullspace()
    vecs = []
    cols = np.array([[int(X[i, j]) for j in range(nullity)] for i in range(X.nrows())], dtype=object)
    for j in range(nullity):
        v = cols[:, j].reshape(n, phi)
        num = np.zeros((n, N), dtype=np.int64)
        num[:, :phi] = v.astype(np.int64)
        nz = np.flatnonzero(np.any(num != 0, axis=1))
        vecs.append(CycTensor((n,), nz[:, None], num[nz], 1, N))
    return vecs


def kernel_dim(M: CycTensor) -> int:
    return M.shape[1] - rank(M)


def solve_unique_kernel(M: CycTensor) -> CycTensor:
    """The kernel vector when the kernel is one-dimensional."""
    if kernel_dim(M) != 1:
        raise ValueError(f"kernel has dimension {kernel_dim(M)}, expected 1")
    return nullspace(M)[0]


def matrix_rank_numeric(M: CycTensor, tol: float = 1e-9) -> int:
    """Numerical rank via SVD of the embedded matrix (a cross-check only)."""
    a = M.to_complex()
    if not a.size:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))
