"""Dense complex linear algebra helpers and seeded random sampling.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Functions here
never mutate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_TOL = 1e-10


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def as_state(psi, tol: float = DEFAULT_TOL, normalized: bool = True) -> np.ndarray:
    v = np.asarray(psi, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError("state has non-finite entries")
    if normalized and abs(np.vdot(v, v).real - 1.0) > tol:
        raise ValueError(f"state is not normalized (norm^2 = {np.vdot(v, v).real})")
    return v


def is_hermitian(a: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def is_unitary(u: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def check_unitary(u, tol: float = DEFAULT_TOL, name: str = "operator") -> np.ndarray:
    m = as_matrix(u, name)
    if not is_unitary(m, tol):
        raise ValueError(f"{name} is not unitary within {tol:g}")
    return m


def check_density_matrix(rho, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Return ``rho`` as an array after checking it is a (sub-normalized) state.

    Hermitian within ``tol``, eigenvalues >= -tol and trace in (0, 1 + tol].
    """
    m = as_matrix(rho, "density matrix")
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"density matrix must be square, got {m.shape}")
    if not is_hermitian(m, tol):
        raise ValueError("density matrix is not Hermitian")
    evals = np.linalg.eigvalsh((m + m.conj().T) / 2)
    if evals[0] < -tol:
        raise ValueError(f"density matrix has negative eigenvalue {evals[0]:.3e}")
    tr = np.trace(m).real
    if not 0.0 < tr <= 1.0 + tol:
        raise ValueError(f"density matrix trace {tr} outside (0, 1]")
    return m


# ---------------------------------------------------------------------------
# Basic operations
# ---------------------------------------------------------------------------

def tensor(*ops) -> np.ndarray:
    """Kronecker product of one or more matrices (or vectors), left to right."""
    if not ops:
        raise ValueError("tensor() needs at least one operand")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def adjoint(a) -> np.ndarray:
    return np.asarray(a, dtype=complex).conj().T


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product Tr(a^dagger b)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def gram_matrix(ops: Sequence[np.ndarray]) -> np.ndarray:
    """Matrix of pairwise Hilbert-Schmidt inner products ``G[i, j] = Tr(A_i^† A_j)``."""
    flat = np.array([np.asarray(op, dtype=complex).reshape(-1) for op in ops])
    return flat.conj() @ flat.T


def partial_trace(rho, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Reduced matrix of a bipartite operator.

    Args:
        rho: operator on a space of dimension ``dims[0] * dims[1]``.
        dims: subsystem dimensions ``(d_a, d_b)``.
        keep: 0 to keep the first subsystem, 1 to keep the second.
    """
    rho = as_matrix(rho, "rho")
    da, db = dims
    if rho.shape != (da * db, da * db):
        raise ValueError(f"rho has shape {rho.shape}, expected {(da * db, da * db)}")
    r = rho.reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ijkj->ik", r)
    if keep == 1:
        return np.einsum("ijil->jl", r)
    raise ValueError(f"keep must be 0 or 1, got {keep!r}")


def eigh(h, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition with eigenvalues sorted in descending order.

    Returns ``(evals, V)`` with ``h = V @ diag(evals) @ V^†``. Eigenvectors
    inside degenerate subspaces are not canonicalised.
    """
    h = as_matrix(h, "h")
    if h.shape[0] != h.shape[1] or not is_hermitian(h, tol):
        raise ValueError("eigh() requires a Hermitian matrix")
    evals, vecs = np.linalg.eigh((h + h.conj().T) / 2)
    return evals[::-1].copy(), vecs[:, ::-1].copy()


def sqrtm_psd(h) -> np.ndarray:
    evals, vecs = np.linalg.eigh((h + h.conj().T) / 2)
    return (vecs * np.sqrt(np.clip(evals, 0.0, None))) @ vecs.conj().T


def gram_schmidt_operators(partial: Sequence[np.ndarray], dim: int,
                           tol: float = 1e-8) -> list[np.ndarray]:
    """Complete a Hilbert-Schmidt orthogonal family to a basis of operator space.

    Every operator is normalised to ``Tr(A^† A) = dim``, the norm of a unitary.
    The inputs are returned first and unchanged; completion vectors are taken
    from the matrix units ``|i><j|`` in row-major order.

    Raises:
        ValueError: if the inputs are not pairwise orthogonal with norm
            ``sqrt(dim)`` within ``tol`` (this includes linearly dependent
            families) or have the wrong shape.
    """
    ops = [as_matrix(p, "operator") for p in partial]
    for op in ops:
        if op.shape != (dim, dim):
            raise ValueError(f"operator shape {op.shape} != {(dim, dim)}")
    if len(ops) > dim * dim:
        raise ValueError("more operators than the dimension of operator space")
    if ops:
        g = gram_matrix(ops)
        if np.max(np.abs(g - dim * np.eye(len(ops)))) > tol * dim:
            raise ValueError("input operators are not orthogonal with norm sqrt(dim) "
                             "(linearly dependent or mis-normalised family)")

    n2 = dim * dim
    q = np.zeros((n2, n2), dtype=complex)
    for i, op in enumerate(ops):
        q[:, i] = op.reshape(-1) / np.sqrt(dim)
    k = len(ops)
    out = list(ops)
    for idx in range(n2):
        if k == n2:
            break
        v = np.zeros(n2, dtype=complex)
        v[idx] = 1.0
        # classical Gram-Schmidt applied twice ("twice is enough")
        for _ in range(2):
            v = v - q[:, :k] @ (q[:, :k].conj().T @ v)
        norm = np.linalg.norm(v)
        if norm < 1e-6:
            continue
        q[:, k] = v / norm
        out.append(np.sqrt(dim) * q[:, k].reshape(dim, dim))
        k += 1
    return out


# ---------------------------------------------------------------------------
# Seeded randomness
# ---------------------------------------------------------------------------

@dataclass
class RandomStream:
    """A reproducible random stream keyed by ``(master_seed, stream_index)``.

    Each stream owns a ``numpy`` generator seeded from a ``SeedSequence``
    whose spawn key is the stream path, so equal keys give equal draws.
    ``derive`` makes independent child streams for parallel tasks.
    """

    master_seed: int = 0
    stream_index: int = 0
    _path: tuple[int, ...] = field(default=(), repr=False)
    _rng: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        key = (int(self.stream_index),) + tuple(self._path)
        seq = np.random.SeedSequence(int(self.master_seed) & (2**64 - 1), spawn_key=key)
        self._rng = np.random.Generator(np.random.PCG64(seq))

    @property
    def rng(self) -> np.random.Generator:
        return self._rng

    def derive(self, task_index: int) -> "RandomStream":
        return RandomStream(self.master_seed, self.stream_index,
                            self._path + (int(task_index),))


def ginibre(rows: int, cols: int, stream: RandomStream) -> np.ndarray:
    """Matrix of i.i.d. standard complex Gaussians (E|z|^2 = 1)."""
    z = stream.rng.standard_normal((rows, cols, 2))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def haar_isometry(rows: int, cols: int, stream: RandomStream) -> np.ndarray:
    """Haar-random isometry (``rows >= cols``) from QR of a Gaussian matrix.

    The phases of R's diagonal are folded into Q so the result does not
    depend on the QR implementation's sign convention.
    """
    if rows < cols or cols < 1:
        raise ValueError(f"cannot build a {rows}x{cols} isometry")
    q, r = np.linalg.qr(ginibre(rows, cols, stream))
    d = np.diag(r)
    phases = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    return q * phases


def haar_unitary(dim: int, stream: RandomStream) -> np.ndarray:
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return haar_isometry(dim, dim, stream)


def random_pure_state(dim: int, stream: RandomStream) -> np.ndarray:
    return haar_unitary(dim, stream)[:, 0]


def random_density_matrix(dim: int, stream: RandomStream, rank: int | None = None) -> np.ndarray:
    """Random state ``G G^† / Tr(G G^†)`` with ``G`` Gaussian of shape ``dim x rank``."""
    g = ginibre(dim, rank or dim, stream)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(dim: int, stream: RandomStream) -> np.ndarray:
    g = ginibre(dim, dim, stream)
    return (g + g.conj().T) / 2
