"""Complementary input/output bases and the two orthogonal unitary blocks.

Conventions: indices are 0-based and ``omega = exp(2*pi*i/N)``.

* ``fourier_basis``: ``|k'> = N^{-1/2} sum_n omega^{-k n} |n>``.
* ``first_block``: ``U_q |n> = omega^{-q n} U_0 |n>`` for ``q = 0..N-1``; every
  member sends the primary inputs to the same outputs as ``U_0``.
* ``second_block``: ``V_s |k'> = omega^{-s k} U_0 |k'>`` for ``s = 1..N-1``;
  every member reproduces the complementary outputs of ``U_0``.

The two blocks share only ``U_0`` and are Hilbert-Schmidt orthogonal for any
mutually unbiased pair, not only the Fourier pair.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import linalg
from .linalg import DEFAULT_TOL


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def basis_labels(dim: int) -> list[str]:
    """Big-endian bit strings when ``dim`` is a power of two, else decimal indices."""
    if dim >= 2 and is_power_of_two(dim):
        width = dim.bit_length() - 1
        return [format(i, f"0{width}b") for i in range(dim)]
    return [str(i) for i in range(dim)]


@dataclass(frozen=True)
class OrthonormalBasis:
    """``dim`` orthonormal vectors stored as the columns of ``matrix``."""

    dim: int
    label: str
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = linalg.as_matrix(self.matrix, f"basis {self.label!r}")
        if m.shape != (self.dim, self.dim):
            raise ValueError(f"basis {self.label!r}: shape {m.shape}, expected {(self.dim,) * 2}")
        if not linalg.is_unitary(m, DEFAULT_TOL):
            raise ValueError(f"basis {self.label!r} is not orthonormal")
        object.__setattr__(self, "matrix", m)

    @property
    def vectors(self) -> list[np.ndarray]:
        return [self.matrix[:, i].copy() for i in range(self.dim)]

    @property
    def labels(self) -> list[str]:
        return basis_labels(self.dim)

    def vector(self, i: int) -> np.ndarray:
        return self.matrix[:, i].copy()

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown label {label!r} for dim {self.dim}") from None


@dataclass(frozen=True)
class BasisPair:
    """Primary and complementary input bases."""

    input_primary: OrthonormalBasis
    input_complementary: OrthonormalBasis

    @property
    def dim(self) -> int:
        return self.input_primary.dim


@dataclass(frozen=True)
class OperatorBasis:
    """``N^2`` operators with ``Tr(A_q^† A_r) = N delta_qr``.

    ``operators[0]`` is the target; ``operators[:N]`` is the first block,
    ``operators[N:2N-1]`` the second block, the rest a Gram-Schmidt
    completion (``unitary_flags`` marks which members are unitary).
    """

    dim: int
    operators: tuple[np.ndarray, ...] = field(repr=False)
    block_boundaries: tuple[int, int]
    unitary_flags: tuple[bool, ...]
    pair: BasisPair | None = field(default=None, repr=False)

    @property
    def target(self) -> np.ndarray:
        return self.operators[0]

    def gram(self) -> np.ndarray:
        return linalg.gram_matrix(self.operators)


# ---------------------------------------------------------------------------
# Bases
# ---------------------------------------------------------------------------

def computational_basis(dim: int) -> OrthonormalBasis:
    return OrthonormalBasis(dim, "computational", np.eye(dim, dtype=complex))


def fourier_matrix(dim: int) -> np.ndarray:
    """Unitary whose column ``k`` is ``|k'>``; also the "qft" target gate."""
    n = np.arange(dim)
    return np.exp(-2j * np.pi * np.outer(n, n) / dim) / np.sqrt(dim)


def fourier_basis(dim: int) -> OrthonormalBasis:
    if dim < 2:
        raise ValueError("a complementary basis needs dim >= 2")
    return OrthonormalBasis(dim, "fourier", fourier_matrix(dim))


def tensor_hadamard_basis(qubits: int) -> OrthonormalBasis:
    """Hadamard applied to each qubit; ``|0_X> = (|0> + |1>)/sqrt 2``, ``|1_X> = (|0> - |1>)/sqrt 2``."""
    if qubits < 1:
        raise ValueError("qubits must be >= 1")
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    return OrthonormalBasis(2**qubits, "hadamard", linalg.tensor(*[h] * qubits))


_ALIASES = {
    "computational": "computational", "z": "computational",
    "fourier": "fourier", "f": "fourier",
    "hadamard": "hadamard", "x": "hadamard",
}


def named_basis(name: str, dim: int) -> OrthonormalBasis:
    """Resolve a built-in basis name.

    Accepts ``computational``/``Z``, ``fourier``/``F`` and ``hadamard``/``X``.
    ``X`` falls back to the Fourier basis when ``dim`` is not a power of two.
    """
    key = _ALIASES.get(name.strip().lower())
    if key is None:
        raise KeyError(f"unknown basis name {name!r}")
    if key == "computational":
        return computational_basis(dim)
    if key == "hadamard":
        if not is_power_of_two(dim) or dim < 2:
            if name.strip().lower() == "x":
                return fourier_basis(dim)
            raise ValueError(f"hadamard basis needs a power-of-two dim, got {dim}")
        return tensor_hadamard_basis(dim.bit_length() - 1)
    return fourier_basis(dim)


def default_pair(dim: int, multi_qubit: bool = False) -> BasisPair:
    """Computational/Fourier, or computational/tensor-Hadamard for qubit registers."""
    comp = tensor_hadamard_basis(dim.bit_length() - 1) if multi_qubit else fourier_basis(dim)
    return BasisPair(computational_basis(dim), comp)


def check_mutually_unbiased(pair: BasisPair, tol: float = 1e-9) -> bool:
    """True iff every ``|<n|k'>|^2`` is within ``tol`` of ``1/N``."""
    a, b = pair.input_primary, pair.input_complementary
    if a.dim != b.dim:
        raise ValueError("bases have different dimensions")
    overlaps = np.abs(a.matrix.conj().T @ b.matrix) ** 2
    return bool(np.max(np.abs(overlaps - 1.0 / a.dim)) <= tol)


def _require_pair(u0, pair: BasisPair, tol: float) -> np.ndarray:
    u0 = linalg.check_unitary(u0, tol, "target")
    if u0.shape[0] != pair.dim or pair.input_complementary.dim != pair.dim:
        raise ValueError(f"target dim {u0.shape[0]} does not match basis dim {pair.dim}")
    if pair.dim < 2:
        raise ValueError("dim 1 has no complementary basis")
    return u0


def output_bases(u0, pair: BasisPair, tol: float = DEFAULT_TOL
                 ) -> tuple[OrthonormalBasis, OrthonormalBasis]:
    """Images of both input bases under the target: ``f_n = U_0|n>``, ``g'_k = U_0|k'>``."""
    u0 = _require_pair(u0, pair, tol)
    f = OrthonormalBasis(pair.dim, f"image:{pair.input_primary.label}", u0 @ pair.input_primary.matrix)
    g = OrthonormalBasis(pair.dim, f"image:{pair.input_complementary.label}",
                         u0 @ pair.input_complementary.matrix)
    return f, g


def _phase_diagonal(basis: OrthonormalBasis, shift: int) -> np.ndarray:
    n = basis.dim
    phases = np.exp(-2j * np.pi * shift * np.arange(n) / n)
    return (basis.matrix * phases) @ basis.matrix.conj().T


def first_block(u0, pair: BasisPair, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    u0 = _require_pair(u0, pair, tol)
    return [u0 @ _phase_diagonal(pair.input_primary, q) for q in range(pair.dim)]


def second_block(u0, pair: BasisPair, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """The ``N - 1`` unitaries other than ``U_0`` that act like ``U_0`` on the complementary inputs.

    Shift ``s = 1..N-1`` corresponds to operator index ``q = N - 1 + s``.
    Cyclic phases are used for every pair; they stay orthogonal to the first
    block whenever the pair is mutually unbiased.
    """
    u0 = _require_pair(u0, pair, tol)
    if not check_mutually_unbiased(pair, 1e-9):
        raise ValueError("second_block requires a mutually unbiased pair")
    return [u0 @ _phase_diagonal(pair.input_complementary, s) for s in range(1, pair.dim)]


def full_operator_basis(u0, pair: BasisPair, tol: float = DEFAULT_TOL) -> OperatorBasis:
    n = pair.dim
    blocks = first_block(u0, pair, tol) + second_block(u0, pair, tol)
    ops = linalg.gram_schmidt_operators(blocks, n)
    flags = tuple(linalg.is_unitary(op, 1e-9) for op in ops)
    return OperatorBasis(n, tuple(ops), (n, 2 * n - 1), flags, pair)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _encode_complex(values) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values).reshape(-1)]


def _decode_complex(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def basis_to_json(basis: OrthonormalBasis) -> dict:
    return {"dim": basis.dim, "label": basis.label,
            "vectors": [_encode_complex(v) for v in basis.vectors]}


def basis_from_json(data: dict) -> OrthonormalBasis:
    dim = int(data["dim"])
    vecs = [_decode_complex(v) for v in data["vectors"]]
    if len(vecs) != dim or any(v.shape != (dim,) for v in vecs):
        raise ValueError("basis JSON: need dim vectors of length dim")
    return OrthonormalBasis(dim, str(data.get("label", "custom")), np.column_stack(vecs))


def resolve_basis(ref: str, dim: int) -> OrthonormalBasis:
    """A named built-in basis, or a path to a basis JSON file."""
    try:
        return named_basis(ref, dim)
    except KeyError:
        pass
    path = Path(ref)
    if not path.is_file():
        raise KeyError(f"unknown basis {ref!r} (not a built-in name or a file)")
    basis = basis_from_json(json.loads(path.read_text()))
    if basis.dim != dim:
        raise ValueError(f"basis file {ref} has dim {basis.dim}, expected {dim}")
    return basis
