"""Quantum channels in Kraus, Choi and process-matrix (chi) form.

Choi convention: ``rho_C = (E x 1)|phi><phi|`` with
``|phi> = N^{-1/2} sum_n |n>|n>``, system first, reference second. With
row-major vectorization ``(A x 1)|phi> = vec(A) / sqrt(N)``, so
``rho_C = (1/N) sum_i vec(K_i) vec(K_i)^†``.

The chi matrix relative to an operator basis ``{U_q}`` is
``chi_qr = <e_q|rho_C|e_r>`` with ``|e_q> = (U_q x 1)|phi> = vec(U_q)/sqrt(N)``
(orthonormal because ``Tr(U_q^† U_r) = N delta_qr``), giving
``E(rho) = sum_qr chi_qr U_q rho U_r^†``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .bases import OperatorBasis, is_power_of_two, _decode_complex, _encode_complex
from .linalg import RandomStream

CHANNEL_TOL = 1e-9
KRAUS_CUTOFF = 1e-11

PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def cnot_matrix() -> np.ndarray:
    """Controlled-NOT with the first (most significant) qubit as control."""
    u = np.eye(4, dtype=complex)
    u[2:, 2:] = PAULI["x"]
    return u


@dataclass(frozen=True)
class QuantumChannel:
    """A completely positive, trace non-increasing map given by Kraus operators."""

    dim: int
    kraus: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        ops = tuple(linalg.as_matrix(k, "Kraus operator") for k in self.kraus)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        for k in ops:
            if k.shape != (self.dim, self.dim):
                raise ValueError(f"Kraus operator shape {k.shape}, expected {(self.dim,) * 2}")
        object.__setattr__(self, "kraus", ops)
        gap = np.linalg.eigvalsh(np.eye(self.dim) - self.success_operator())
        if gap[0] < -CHANNEL_TOL:
            raise ValueError(f"sum K^†K exceeds identity by {-gap[0]:.3e}")

    def success_operator(self) -> np.ndarray:
        """``sum_i K_i^† K_i``; the identity for trace-preserving channels."""
        s = sum(k.conj().T @ k for k in self.kraus)
        return (s + s.conj().T) / 2

    @property
    def is_trace_preserving(self) -> bool:
        return bool(np.max(np.abs(self.success_operator() - np.eye(self.dim))) <= CHANNEL_TOL)

    @property
    def success_trace(self) -> float:
        """Success probability averaged over a maximally mixed input."""
        return float(np.trace(self.success_operator()).real / self.dim)


@dataclass(frozen=True)
class ChoiState:
    dim: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = linalg.as_matrix(self.matrix, "Choi matrix")
        n2 = self.dim * self.dim
        if m.shape != (n2, n2):
            raise ValueError(f"Choi matrix shape {m.shape}, expected {(n2, n2)}")
        if not linalg.is_hermitian(m, CHANNEL_TOL):
            raise ValueError("Choi matrix is not Hermitian")
        if np.linalg.eigvalsh((m + m.conj().T) / 2)[0] < -CHANNEL_TOL:
            raise ValueError("Choi matrix is not positive semidefinite")
        if np.trace(m).real > 1 + CHANNEL_TOL:
            raise ValueError("Choi matrix trace exceeds one")
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


@dataclass(frozen=True)
class ProcessMatrix:
    dim: int
    basis: OperatorBasis = field(repr=False)
    chi: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = linalg.as_matrix(self.chi, "chi")
        if not linalg.is_hermitian(m, CHANNEL_TOL):
            raise ValueError("chi is not Hermitian")
        if np.linalg.eigvalsh((m + m.conj().T) / 2)[0] < -CHANNEL_TOL:
            raise ValueError("chi is not positive semidefinite")
        if np.trace(m).real > 1 + CHANNEL_TOL:
            raise ValueError("chi trace exceeds one")
        object.__setattr__(self, "chi", m)

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.chi).real.copy()


@dataclass(frozen=True)
class NoiseSpec:
    """Description of a standard noise channel.

    ``kind`` is one of ``dephasing``, ``depolarizing``, ``amplitude-damping``,
    ``unitary-overrotation`` or ``mixture``. ``strength`` is a probability
    (or ``gamma``), or an angle in radians for over-rotations.

    ``qubits`` selects qubits of a power-of-two register, 0 being the most
    significant. ``None`` means every qubit (or the whole space when the
    dimension is not a power of two); an empty tuple treats the whole
    register as a single qudit. ``axis`` picks the dephasing basis or the
    rotation generator (``x``, ``y``, ``z``); ``basis`` / ``generator``
    override it with an explicit matrix.
    """

    kind: str
    strength: float = 0.0
    axis: str = "z"
    qubits: tuple[int, ...] | None = None
    basis: np.ndarray | None = field(default=None, repr=False)
    generator: np.ndarray | None = field(default=None, repr=False)
    components: tuple[tuple[float, "NoiseSpec"], ...] = ()

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "mixture":
            if not self.components:
                raise ValueError("mixture needs components")
            weights = [w for w, _ in self.components]
            if min(weights) < 0 or abs(sum(weights) - 1) > 1e-12:
                raise ValueError("mixture weights must be >= 0 and sum to 1")
        elif self.kind != "unitary-overrotation" and not 0.0 <= self.strength <= 1.0:
            raise ValueError(f"{self.kind} strength must lie in [0, 1], got {self.strength}")
        if self.axis.lower() not in ("x", "y", "z"):
            raise ValueError(f"axis must be x, y or z, got {self.axis!r}")


NOISE_KINDS = ("dephasing", "depolarizing", "amplitude-damping", "unitary-overrotation", "mixture")


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def identity_channel(dim: int) -> QuantumChannel:
    return QuantumChannel(dim, (np.eye(dim, dtype=complex),))


def unitary_channel(u, tol: float = linalg.DEFAULT_TOL) -> QuantumChannel:
    u = linalg.check_unitary(u, tol, "unitary")
    return QuantumChannel(u.shape[0], (u,))


def compose(a: QuantumChannel, b: QuantumChannel) -> QuantumChannel:
    """The channel ``a(b(rho))``: apply ``b`` first."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return QuantumChannel(a.dim, tuple(ka @ kb for ka in a.kraus for kb in b.kraus))


def mix(weighted: Sequence[tuple[float, QuantumChannel]]) -> QuantumChannel:
    dim = weighted[0][1].dim
    ops = []
    for w, ch in weighted:
        if ch.dim != dim:
            raise ValueError("dimension mismatch in mixture")
        if w > 0:
            ops.extend(np.sqrt(w) * k for k in ch.kraus)
    return QuantumChannel(dim, tuple(ops))


def weyl_operators(dim: int) -> list[np.ndarray]:
    """Clock-and-shift unitaries ``X^a Z^b``; ``(a, b) = (0, 0)`` first."""
    omega = np.exp(2j * np.pi / dim)
    shift = np.roll(np.eye(dim, dtype=complex), 1, axis=0)
    clock = np.diag(omega ** np.arange(dim))
    return [np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            for a in range(dim) for b in range(dim)]


def _qubit_basis(spec: NoiseSpec) -> np.ndarray:
    if spec.basis is not None:
        return linalg.check_unitary(spec.basis, linalg.DEFAULT_TOL, "dephasing basis")
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    s = np.diag([1, 1j])
    return {"z": np.eye(2, dtype=complex), "x": h, "y": s @ h}[spec.axis.lower()]


def _qudit_basis(spec: NoiseSpec, dim: int) -> np.ndarray:
    if spec.basis is not None:
        b = linalg.check_unitary(spec.basis, linalg.DEFAULT_TOL, "dephasing basis")
        if b.shape != (dim, dim):
            raise ValueError("dephasing basis has the wrong dimension")
        return b
    if spec.axis.lower() == "z":
        return np.eye(dim, dtype=complex)
    from .bases import fourier_matrix
    return fourier_matrix(dim)


def _single_qubit_kraus(spec: NoiseSpec) -> list[np.ndarray]:
    p = spec.strength
    if spec.kind == "dephasing":
        b = _qubit_basis(spec)
        z_b = b @ PAULI["z"] @ b.conj().T
        return [np.sqrt(1 - p) * PAULI["i"], np.sqrt(p) * z_b]
    if spec.kind == "depolarizing":
        return _depolarizing_kraus(p, 2)
    if spec.kind == "amplitude-damping":
        return [np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex),
                np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex)]
    if spec.kind == "unitary-overrotation":
        g = spec.generator if spec.generator is not None else PAULI[spec.axis.lower()]
        return [_expm_hermitian(g, spec.strength)]
    raise ValueError(f"no single-qubit form for {spec.kind!r}")


def _depolarizing_kraus(p: float, dim: int) -> list[np.ndarray]:
    # (1/N^2) sum_W W rho W^† = Tr(rho) I/N over the N^2 Weyl operators
    ws = weyl_operators(dim)
    ops = [np.sqrt(1 - p + p / dim**2) * ws[0]]
    ops += [np.sqrt(p) / dim * w for w in ws[1:]]
    return ops


def _expm_hermitian(g, angle: float) -> np.ndarray:
    g = linalg.as_matrix(g, "generator")
    if not linalg.is_hermitian(g, linalg.DEFAULT_TOL):
        raise ValueError("rotation generator must be Hermitian")
    evals, vecs = np.linalg.eigh((g + g.conj().T) / 2)
    return (vecs * np.exp(-1j * angle * evals)) @ vecs.conj().T


def _embed(op: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    eye = np.eye(2, dtype=complex)
    return linalg.tensor(*[op if i == qubit else eye for i in range(n_qubits)])


def _qudit_kraus(spec: NoiseSpec, dim: int) -> list[np.ndarray]:
    p = spec.strength
    if spec.kind == "dephasing":
        # rho -> (1 - p) rho + p diag_B(rho)
        b = _qudit_basis(spec, dim)
        projs = [np.outer(b[:, j], b[:, j].conj()) for j in range(dim)]
        return [np.sqrt(1 - p) * np.eye(dim, dtype=complex)] + [np.sqrt(p) * pr for pr in projs]
    if spec.kind == "depolarizing":
        return _depolarizing_kraus(p, dim)
    if spec.kind == "unitary-overrotation":
        if spec.generator is not None:
            g = spec.generator
        else:
            jz = np.diag(np.arange(dim) - (dim - 1) / 2).astype(complex)
            if spec.axis.lower() == "z":
                g = jz
            else:
                from .bases import fourier_matrix
                f = fourier_matrix(dim)
                g = f @ jz @ f.conj().T
        return [_expm_hermitian(g, spec.strength)]
    raise ValueError(f"{spec.kind!r} is not supported on a dimension-{dim} qudit")


def make_noise(spec: NoiseSpec, dim: int) -> QuantumChannel:
    """Build the trace-preserving channel described by ``spec`` on a ``dim``-level system."""
    if spec.kind == "mixture":
        return mix([(w, make_noise(s, dim)) for w, s in spec.components])

    qubit_register = is_power_of_two(dim) and dim >= 2
    qubits = spec.qubits
    if qubits is None:
        qubits = tuple(range(dim.bit_length() - 1)) if qubit_register else ()
    if spec.qubits is None and spec.generator is not None and np.shape(spec.generator) == (dim, dim):
        qubits = ()

    if not qubits:
        if spec.kind == "amplitude-damping" and dim != 2:
            raise ValueError(f"amplitude damping is only defined on qubits, not dim {dim}")
        return QuantumChannel(dim, tuple(_qudit_kraus(spec, dim)))

    if not qubit_register:
        raise ValueError(f"qubit-targeted noise needs a power-of-two dim, got {dim}")
    n_qubits = dim.bit_length() - 1
    if any(not 0 <= q < n_qubits for q in qubits):
        raise ValueError(f"qubit index out of range for {n_qubits} qubits: {qubits}")
    single = _single_qubit_kraus(spec)
    ch = identity_channel(dim)
    for q in qubits:
        ch = compose(QuantumChannel(dim, tuple(_embed(k, q, n_qubits) for k in single)), ch)
    return ch


def random_cptp(dim: int, kraus_rank: int, stream: RandomStream) -> QuantumChannel:
    """Random trace-preserving channel from a Haar isometry ``C^dim -> C^(dim*rank)``."""
    if not 1 <= kraus_rank <= dim * dim:
        raise ValueError(f"kraus_rank must be in [1, {dim * dim}]")
    v = linalg.haar_isometry(dim * kraus_rank, dim, stream)
    return QuantumChannel(dim, tuple(v[j * dim:(j + 1) * dim] for j in range(kraus_rank)))


def random_subchannel(dim: int, kraus_rank: int, stream: RandomStream) -> QuantumChannel:
    """Trace-decreasing channel: a random CPTP map with one Kraus operator discarded."""
    full = random_cptp(dim, kraus_rank + 1, stream)
    return QuantumChannel(dim, full.kraus[:-1])


# ---------------------------------------------------------------------------
# Action and conversions
# ---------------------------------------------------------------------------

def apply(ch: QuantumChannel, rho) -> np.ndarray:
    """``sum_i K_i rho K_i^†``. Linear, so any square operator is accepted."""
    rho = linalg.as_matrix(rho, "rho")
    if rho.shape != (ch.dim, ch.dim):
        raise ValueError(f"input has shape {rho.shape}, channel dim is {ch.dim}")
    return sum(k @ rho @ k.conj().T for k in ch.kraus)


def choi_matrix(ch: QuantumChannel) -> np.ndarray:
    vecs = np.array([k.reshape(-1) for k in ch.kraus])
    return vecs.T @ vecs.conj() / ch.dim


def choi_of(ch: QuantumChannel) -> ChoiState:
    return ChoiState(ch.dim, choi_matrix(ch))


def kraus_of(choi: ChoiState) -> QuantumChannel:
    """Kraus operators ``sqrt(N lambda_j) unvec(v_j)`` from the Choi eigendecomposition."""
    evals, vecs = linalg.eigh(choi.matrix, CHANNEL_TOL)
    if evals[-1] < -CHANNEL_TOL:
        raise ValueError(f"Choi matrix has negative eigenvalue {evals[-1]:.3e}")
    n = choi.dim
    ops = [np.sqrt(n * lam) * vecs[:, j].reshape(n, n)
           for j, lam in enumerate(evals) if lam >= KRAUS_CUTOFF]
    if not ops:
        raise ValueError("Choi matrix is numerically zero")
    return QuantumChannel(n, tuple(ops))


def _check_operator_basis(basis: OperatorBasis, dim: int) -> np.ndarray:
    if basis.dim != dim:
        raise ValueError(f"basis dim {basis.dim} != channel dim {dim}")
    if len(basis.operators) != dim * dim:
        raise ValueError(f"operator basis is incomplete: {len(basis.operators)} of {dim * dim}")
    flat = np.array([op.reshape(-1) for op in basis.operators]).T / np.sqrt(dim)
    if np.max(np.abs(flat.conj().T @ flat - np.eye(dim * dim))) > CHANNEL_TOL:
        raise ValueError("operator basis is not Hilbert-Schmidt orthogonal")
    return flat


def chi_of(ch: QuantumChannel, basis: OperatorBasis) -> ProcessMatrix:
    """Process matrix: Choi state projected onto ``(U_q x 1)|phi>``."""
    e = _check_operator_basis(basis, ch.dim)
    chi = e.conj().T @ choi_matrix(ch) @ e
    return ProcessMatrix(ch.dim, basis, (chi + chi.conj().T) / 2)


def reconstruct_channel(pm: ProcessMatrix) -> QuantumChannel:
    """Kraus form of ``E(rho) = sum_qr chi_qr U_q rho U_r^†``."""
    evals, vecs = linalg.eigh(pm.chi, CHANNEL_TOL)
    if evals[-1] < -CHANNEL_TOL:
        raise ValueError(f"chi has negative eigenvalue {evals[-1]:.3e}")
    ops_stack = np.array(pm.basis.operators)
    kraus = [np.sqrt(lam) * np.tensordot(vecs[:, j], ops_stack, axes=1)
             for j, lam in enumerate(evals) if lam >= KRAUS_CUTOFF]
    if not kraus:
        raise ValueError("chi is numerically zero")
    return QuantumChannel(pm.dim, tuple(kraus))


def action_distance(a: QuantumChannel, b: QuantumChannel) -> float:
    """Largest entrywise difference between the two Choi matrices."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    return float(np.max(np.abs(choi_matrix(a) - choi_matrix(b))))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def channel_to_json(ch: QuantumChannel) -> dict:
    return {"dim": ch.dim, "kraus": [_encode_complex(k) for k in ch.kraus]}


def channel_from_json(data: dict) -> QuantumChannel:
    dim = int(data["dim"])
    ops = []
    for entry in data["kraus"]:
        flat = _decode_complex(entry)
        if flat.size != dim * dim:
            raise ValueError(f"Kraus operator has {flat.size} entries, expected {dim * dim}")
        ops.append(flat.reshape(dim, dim))
    return QuantumChannel(dim, tuple(ops))


def dumps_channel(ch: QuantumChannel) -> str:
    return json.dumps(channel_to_json(ch))


def loads_channel(text: str) -> QuantumChannel:
    return channel_from_json(json.loads(text))
