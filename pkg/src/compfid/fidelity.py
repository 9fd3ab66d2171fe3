"""Classical fidelities, process fidelity, bounds and entanglement estimates.

Two classical fidelities measured on complementary bases pin down the
process fidelity of an operation:

    f_primary + f_complementary - 1  <=  F_process  <=  min(f_primary, f_complementary)

Fidelities of trace-decreasing channels are raw (not renormalized by the
success probability) unless ``per_success=True`` is requested.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import linalg
from .bases import BasisPair, OperatorBasis, OrthonormalBasis, output_bases
from .channels import QuantumChannel, chi_of, choi_matrix, PAULI
from .linalg import RandomStream

BOUND_TOL = 1e-9
MC_CHUNK = 4096


@dataclass(frozen=True)
class EntanglementEstimate:
    f_entangle_lower: float
    concurrence_lower: float
    concurrence_lower_clamped: float


@dataclass(frozen=True)
class FidelityReport:
    dim: int
    f_primary: float
    f_complementary: float
    lower_bound: float
    lower_bound_clamped: float
    upper_bound: float
    avg_fidelity_bounds: tuple[float, float]
    epsilon: float
    epsilon_interval: tuple[float, float]
    f_process: float | None = None
    avg_fidelity_exact: float | None = None
    entangle: EntanglementEstimate | None = None
    success_trace: float | None = None
    stderr_primary: float | None = None
    stderr_complementary: float | None = None

    def to_dict(self) -> dict:
        """Machine-readable form with the stable field names used by the CLI."""
        return {
            "dim": self.dim,
            "f_primary": self.f_primary,
            "f_complementary": self.f_complementary,
            "lower_bound": self.lower_bound,
            "lower_bound_clamped": self.lower_bound_clamped,
            "upper_bound": self.upper_bound,
            "f_process": self.f_process,
            "avg_fidelity_lower": self.avg_fidelity_bounds[0],
            "avg_fidelity_upper": self.avg_fidelity_bounds[1],
            "epsilon": self.epsilon,
            "concurrence_lower": None if self.entangle is None else self.entangle.concurrence_lower,
            "success_trace": self.success_trace,
            "stderr_primary": self.stderr_primary,
            "stderr_complementary": self.stderr_complementary,
        }


# ---------------------------------------------------------------------------
# Fidelities
# ---------------------------------------------------------------------------

def transition_probabilities(ch: QuantumChannel, inputs: OrthonormalBasis,
                             outputs: OrthonormalBasis) -> np.ndarray:
    """``P[n, m] = <out_m| E(|in_n><in_n|) |out_m>``."""
    if inputs.dim != ch.dim or outputs.dim != ch.dim:
        raise ValueError(f"basis dims ({inputs.dim}, {outputs.dim}) != channel dim {ch.dim}")
    # amplitudes[i, m, n] = <out_m| K_i |in_n>
    amps = np.einsum("am,iab,bn->imn", outputs.matrix.conj(), np.array(ch.kraus), inputs.matrix)
    return np.sum(np.abs(amps) ** 2, axis=0).T


def classical_fidelity(ch: QuantumChannel, inputs: OrthonormalBasis, outputs: OrthonormalBasis,
                       per_success: bool = False) -> float:
    """Mean probability that input ``n`` is detected as output ``n``.

    ``outputs`` lists the expected output state of each input in the same
    order (e.g. the image basis from :func:`output_bases`).
    """
    probs = transition_probabilities(ch, inputs, outputs)
    hits = np.diag(probs)
    if per_success:
        hits = hits / probs.sum(axis=1)
    return float(np.mean(hits))


def complementary_fidelities(ch: QuantumChannel, u0, pair: BasisPair,
                             per_success: bool = False) -> tuple[float, float]:
    f_basis, g_basis = output_bases(u0, pair)
    return (classical_fidelity(ch, pair.input_primary, f_basis, per_success),
            classical_fidelity(ch, pair.input_complementary, g_basis, per_success))


def process_fidelity(ch: QuantumChannel, u0) -> float:
    """Overlap of the Choi state with the target's: ``<phi|(U0^† x 1) rho_C (U0 x 1)|phi>``."""
    u0 = linalg.check_unitary(u0, linalg.DEFAULT_TOL, "target")
    if u0.shape[0] != ch.dim:
        raise ValueError(f"target dim {u0.shape[0]} != channel dim {ch.dim}")
    e0 = u0.reshape(-1) / np.sqrt(ch.dim)
    return float(np.vdot(e0, choi_matrix(ch) @ e0).real)


def bounds(f1: float, f2: float) -> tuple[float, float]:
    """Raw lower bound ``f1 + f2 - 1`` and upper bound ``min(f1, f2)``."""
    for f in (f1, f2):
        if not -BOUND_TOL <= f <= 1 + BOUND_TOL:
            raise ValueError(f"fidelity {f} outside [0, 1]")
    return f1 + f2 - 1.0, min(f1, f2)


def average_fidelity(f_process: float, dim: int) -> float:
    """Haar-averaged state fidelity ``(N F_process + 1) / (N + 1)``."""
    return (dim * f_process + 1.0) / (dim + 1.0)


def _mc_chunk(kraus: np.ndarray, u0: np.ndarray, n: int, stream: RandomStream) -> np.ndarray:
    dim = u0.shape[0]
    psi = linalg.ginibre(n, dim, stream)
    psi /= np.linalg.norm(psi, axis=1, keepdims=True)
    target = psi @ u0.T  # rows are U0|psi>
    # <psi|U0^† K_i|psi> for every sample and Kraus operator
    amps = np.einsum("sa,iab,sb->si", target.conj(), kraus, psi)
    return np.sum(np.abs(amps) ** 2, axis=1)


def average_fidelity_monte_carlo(ch: QuantumChannel, u0, samples: int, stream: RandomStream,
                                 workers: int = 1) -> tuple[float, float]:
    """Mean and standard error of ``<psi|U0^† E(|psi><psi|) U0|psi>`` over Haar-random ``psi``.

    Samples are drawn in fixed-size chunks, chunk ``c`` from ``stream.derive(c)``,
    so the result is bit-identical for any ``workers``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    u0 = linalg.check_unitary(u0, linalg.DEFAULT_TOL, "target")
    kraus = np.array(ch.kraus)
    sizes = [min(MC_CHUNK, samples - start) for start in range(0, samples, MC_CHUNK)]
    jobs = [(kraus, u0, n, stream.derive(c)) for c, n in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _mc_chunk(*job), jobs))
    else:
        parts = [_mc_chunk(*job) for job in jobs]
    values = np.concatenate(parts)
    std_err = float(np.std(values, ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return float(np.mean(values)), std_err


def chi_diagonal_identity_check(ch: QuantumChannel, basis: OperatorBasis,
                                pair: BasisPair) -> tuple[float, float]:
    """Residuals of ``f_primary = sum of first-block chi_qq`` and the complementary analogue."""
    if basis.pair is None or not _same_pair(basis.pair, pair):
        raise ValueError("operator basis was not built for this basis pair")
    n = ch.dim
    pm = chi_of(ch, basis)
    d = pm.diagonal
    f1, f2 = complementary_fidelities(ch, basis.target, pair)
    first_end, second_end = basis.block_boundaries
    return (abs(f1 - d[:first_end].sum()),
            abs(f2 - (d[0] + d[n:second_end].sum())))


def _same_pair(a: BasisPair, b: BasisPair) -> bool:
    return (np.allclose(a.input_primary.matrix, b.input_primary.matrix, atol=1e-12)
            and np.allclose(a.input_complementary.matrix, b.input_complementary.matrix, atol=1e-12))


# ---------------------------------------------------------------------------
# Entanglement
# ---------------------------------------------------------------------------

def entangle_capability(f1: float, f2: float) -> EntanglementEstimate:
    """Concurrence lower bound ``2 (f1 + f2) - 3`` implied by the process-fidelity lower bound."""
    c = 2.0 * (f1 + f2) - 3.0
    return EntanglementEstimate(f1 + f2 - 1.0, c, min(1.0, max(0.0, c)))


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit state.

    ``max(0, l1 - l2 - l3 - l4)`` where ``l_i`` are the decreasing square
    roots of the eigenvalues of ``rho (Y x Y) rho* (Y x Y)``, computed as the
    eigenvalues of ``sqrt(sqrt(rho) rho_tilde sqrt(rho))``.
    """
    rho = linalg.check_density_matrix(rho, 1e-9)
    if rho.shape != (4, 4):
        raise ValueError(f"concurrence needs a two-qubit state, got shape {rho.shape}")
    yy = np.kron(PAULI["y"], PAULI["y"])
    rho_tilde = yy @ rho.conj() @ yy
    s = linalg.sqrtm_psd(rho)
    m = s @ rho_tilde @ s
    lam = np.sqrt(np.clip(np.linalg.eigvalsh((m + m.conj().T) / 2), 0.0, None))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def bell_states() -> list[np.ndarray]:
    """``Phi+, Psi+, Phi-, Psi-``: ideal CNOT outputs for inputs ``|0_X 0>, |0_X 1>, |1_X 0>, |1_X 1>``."""
    s = 1 / np.sqrt(2)
    return [np.array([s, 0, 0, s], dtype=complex), np.array([0, s, s, 0], dtype=complex),
            np.array([s, 0, 0, -s], dtype=complex), np.array([0, s, -s, 0], dtype=complex)]


def entangle_fidelity(ch: QuantumChannel, control, target_states: OrthonormalBasis,
                      bell_targets) -> float:
    """Mean overlap of the outputs for product inputs with their expected Bell states.

    ``control`` is either one control state or an :class:`OrthonormalBasis`;
    inputs are ``control_i x target_j`` in row-major order and
    ``bell_targets`` lists the expected output for each. Only when the inputs
    form a complete basis is the result a classical fidelity, and only then is
    it guaranteed to be at least the process fidelity.
    """
    if ch.dim != 4 or target_states.dim != 2:
        raise ValueError("entangle_fidelity is defined for two-qubit channels")
    controls = control.vectors if isinstance(control, OrthonormalBasis) else [linalg.as_state(control)]
    inputs = [np.kron(c, t) for c in controls for t in target_states.vectors]
    targets = [linalg.as_state(b) for b in bell_targets]
    if len(targets) != len(inputs):
        raise ValueError(f"need {len(inputs)} Bell targets, got {len(targets)}")
    for b in targets:
        reduced = linalg.partial_trace(np.outer(b, b.conj()), (2, 2), 0)
        if np.max(np.abs(reduced - np.eye(2) / 2)) > 1e-10:
            raise ValueError("Bell target is not maximally entangled")
    total = 0.0
    for psi, b in zip(inputs, targets):
        total += sum(abs(np.vdot(b, k @ psi)) ** 2 for k in ch.kraus)
    return float(total / len(inputs))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def build_report(f1: float, f2: float, dim: int, *, f_process: float | None = None,
                 success_trace: float | None = None, stderr_primary: float | None = None,
                 stderr_complementary: float | None = None,
                 cnot_mode: bool = False) -> FidelityReport:
    lower, upper = bounds(f1, f2)
    lower_c = max(0.0, lower)
    eps = 1.0 - max(f1, f2)
    low_f = min(f1, f2)
    avg_bounds = (average_fidelity(lower_c, dim), average_fidelity(min(1.0, upper), dim))
    return FidelityReport(
        dim=dim,
        f_primary=f1,
        f_complementary=f2,
        lower_bound=lower,
        lower_bound_clamped=lower_c,
        upper_bound=upper,
        avg_fidelity_bounds=avg_bounds,
        epsilon=eps,
        epsilon_interval=(low_f - eps, low_f),
        f_process=f_process,
        avg_fidelity_exact=None if f_process is None else average_fidelity(f_process, dim),
        entangle=entangle_capability(f1, f2) if cnot_mode else None,
        success_trace=success_trace,
        stderr_primary=stderr_primary,
        stderr_complementary=stderr_complementary,
    )


def report_for_channel(ch: QuantumChannel, u0, pair: BasisPair,
                       cnot_mode: bool = False) -> FidelityReport:
    f1, f2 = complementary_fidelities(ch, u0, pair)
    return build_report(f1, f2, ch.dim, f_process=process_fidelity(ch, u0),
                        success_trace=ch.success_trace, cnot_mode=cnot_mode)


def sandwich_violation(report: FidelityReport) -> float:
    """How far ``f_process`` lies outside ``[lower, upper]`` (<= 0 when inside)."""
    if report.f_process is None:
        raise ValueError("report has no exact process fidelity")
    return max(report.lower_bound - report.f_process, report.f_process - report.upper_bound)
