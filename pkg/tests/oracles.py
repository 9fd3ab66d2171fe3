"""Brute-force reference computations used only by the tests.

Each oracle works from the action of a map on matrix units and never calls
the Choi/chi code paths it is used to check.
"""

import numpy as np


def matrix_unit(n, a, b):
    e = np.zeros((n, n), dtype=complex)
    e[a, b] = 1.0
    return e


def kraus_action(kraus):
    def act(rho):
        return sum(k @ rho @ k.conj().T for k in kraus)
    return act


def superoperator(act, n):
    """Matrix S with vec(E(rho)) = S vec(rho), row-major vec."""
    s = np.zeros((n * n, n * n), dtype=complex)
    for a in range(n):
        for b in range(n):
            s[:, a * n + b] = act(matrix_unit(n, a, b)).reshape(-1)
    return s


def choi_from_action(act, n):
    """(1/n) sum_ab E(|a><b|) x |a><b|, system first."""
    out = np.zeros((n * n, n * n), dtype=complex)
    for a in range(n):
        for b in range(n):
            out += np.kron(act(matrix_unit(n, a, b)), matrix_unit(n, a, b))
    return out / n


def chi_by_tomography(act, ops):
    """Solve E(rho) = sum_qr chi_qr U_q rho U_r^dagger by linear inversion over matrix units."""
    n = ops[0].shape[0]
    target = superoperator(act, n).reshape(-1)
    cols = []
    for uq in ops:
        for ur in ops:
            cols.append(np.kron(uq, ur.conj()).reshape(-1))
    design = np.array(cols).T
    sol, *_ = np.linalg.lstsq(design, target, rcond=None)
    return sol.reshape(len(ops), len(ops))


def classical_fidelity_loop(act, inputs, outputs):
    n = inputs.shape[0]
    total = 0.0
    for i in range(n):
        psi = inputs[:, i]
        phi = outputs[:, i]
        total += np.vdot(phi, act(np.outer(psi, psi.conj())) @ phi).real
    return total / n


def concurrence_nonhermitian(rho):
    """Wootters concurrence from the eigenvalues of the non-Hermitian product rho * rho_tilde."""
    y = np.array([[0, -1j], [1j, 0]])
    yy = np.kron(y, y)
    r = rho @ yy @ rho.conj() @ yy
    lam = np.sort(np.sqrt(np.clip(np.linalg.eigvals(r).real, 0, None)))[::-1]
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])
