"""Executable checks of the fidelity identities against the process-matrix oracle.

Every property reports its worst residual over the sampled cases; a property
passes when that residual is within its tolerance.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import bases, channels, fidelity, linalg
from .linalg import RandomStream


@dataclass
class PropertyResult:
    name: str
    worst: float
    tol: float
    cases: int
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = bool(self.worst <= self.tol)


@dataclass
class VerifyConfig:
    dims: tuple[int, ...] = (2, 3, 4)
    channels: int = 200
    seed: int = 0
    block_dims: tuple[int, ...] = tuple(range(2, 17))
    states: int = 1000


def _pairs_for(dim: int) -> list[bases.BasisPair]:
    pairs = [bases.default_pair(dim)]
    if bases.is_power_of_two(dim) and dim >= 4:
        pairs.append(bases.default_pair(dim, multi_qubit=True))
    return pairs


def _random_channels(dim: int, count: int, stream: RandomStream):
    for i in range(count):
        sub = stream.derive(i)
        rank = int(sub.rng.integers(1, dim * dim + 1))
        u0 = linalg.haar_unitary(dim, sub)
        if i % 10 == 9:
            ch = channels.random_subchannel(dim, min(rank, dim * dim - 1), sub)
        else:
            ch = channels.random_cptp(dim, rank, sub)
        yield u0, ch


def check_sandwich(cfg: VerifyConfig) -> list[PropertyResult]:
    """Lower/upper bounds hold and each classical fidelity dominates the process fidelity."""
    worst_bound = worst_dom = -np.inf
    cases = 0
    for dim in cfg.dims:
        stream = RandomStream(cfg.seed, 1000 + dim)
        for u0, ch in _random_channels(dim, cfg.channels, stream):
            fp = fidelity.process_fidelity(ch, u0)
            for pair in _pairs_for(dim):
                f1, f2 = fidelity.complementary_fidelities(ch, u0, pair)
                lower, upper = fidelity.bounds(f1, f2)
                worst_bound = max(worst_bound, lower - fp, fp - upper)
                worst_dom = max(worst_dom, fp - f1, fp - f2)
                cases += 1
    return [PropertyResult("bound-sandwich", float(worst_bound), 1e-9, cases),
            PropertyResult("classical-dominates-process", float(worst_dom), 1e-9, cases)]


def check_chi_identities(cfg: VerifyConfig) -> PropertyResult:
    worst, cases = 0.0, 0
    for dim in cfg.dims:
        stream = RandomStream(cfg.seed, 2000 + dim)
        for u0, ch in _random_channels(dim, min(cfg.channels, 100), stream):
            for pair in _pairs_for(dim):
                basis = bases.full_operator_basis(u0, pair)
                worst = max(worst, *fidelity.chi_diagonal_identity_check(ch, basis, pair))
                cases += 1
    return PropertyResult("chi-diagonal-identities", worst, 1e-9, cases)


def check_blocks(cfg: VerifyConfig) -> list[PropertyResult]:
    """Gram matrix of the 2N-1 block unitaries, the shift property and vanishing overlaps."""
    gram_worst = shift_worst = zero_worst = 0.0
    stream = RandomStream(cfg.seed, 3000)
    for dim in cfg.block_dims:
        pair = bases.default_pair(dim)
        u0 = linalg.haar_unitary(dim, stream.derive(dim))
        first = bases.first_block(u0, pair)
        ops = first + bases.second_block(u0, pair)
        gram = linalg.gram_matrix(ops)
        gram_worst = max(gram_worst, float(np.max(np.abs(gram - dim * np.eye(2 * dim - 1)))))
        _, g = bases.output_bases(u0, pair)
        kp = pair.input_complementary.matrix
        for q, uq in enumerate(first):
            # amp[j, k] = <g'_j| U_q |k'>
            amp = g.matrix.conj().T @ uq @ kp
            for k in range(dim):
                shift_worst = max(shift_worst, abs(abs(amp[(k + q) % dim, k]) - 1.0))
                if q > 0:
                    zero_worst = max(zero_worst, abs(amp[k, k]))
    n = len(cfg.block_dims)
    return [PropertyResult("block-orthogonality", gram_worst, 1e-9, n),
            PropertyResult("shift-property", shift_worst, 1e-10, n),
            PropertyResult("only-target-doubly-classical", zero_worst, 1e-10, n)]


def check_oracles(cfg: VerifyConfig) -> PropertyResult:
    """chi/reconstruct and Choi/Kraus round trips reproduce the channel."""
    worst, cases = 0.0, 0
    for dim in cfg.dims:
        stream = RandomStream(cfg.seed, 4000 + dim)
        for u0, ch in _random_channels(dim, min(cfg.channels, 50), stream):
            basis = bases.full_operator_basis(u0, bases.default_pair(dim))
            back = channels.reconstruct_channel(channels.chi_of(ch, basis))
            worst = max(worst, channels.action_distance(back, ch),
                        channels.action_distance(channels.kraus_of(channels.choi_of(ch)), ch))
            cases += 1
    return PropertyResult("oracle-round-trip", worst, 1e-8, cases)


def check_concurrence_bound(cfg: VerifyConfig) -> PropertyResult:
    stream = RandomStream(cfg.seed, 5000)
    bell = fidelity.bell_states()[0]
    worst = -np.inf
    for i in range(cfg.states):
        sub = stream.derive(i)
        rho = linalg.random_density_matrix(4, sub, rank=int(sub.rng.integers(1, 5)))
        overlap = float(np.vdot(bell, rho @ bell).real)
        worst = max(worst, 2 * overlap - 1 - fidelity.concurrence(rho))
    return PropertyResult("concurrence-bound", float(worst), 1e-9, cfg.states)


def run_verification(cfg: VerifyConfig) -> list[PropertyResult]:
    results = check_sandwich(cfg)
    results.append(check_chi_identities(cfg))
    results.extend(check_blocks(cfg))
    results.append(check_oracles(cfg))
    results.append(check_concurrence_bound(cfg))
    return results


def summary(results: list[PropertyResult]) -> dict:
    return {"passed": all(r.passed for r in results),
            "properties": [asdict(r) for r in results]}
