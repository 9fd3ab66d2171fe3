"""Measurement records: conditional probability tables ``p(out | in)`` for one basis pair.

Record JSON::

    {"dim": 4, "input_basis": "computational", "output_basis": "computational",
     "shots": 100000, "rows": {"10": {"11": 0.93, "10": 0.05}, ...}}

Only the cells named by the expected mapping are required; every other cell
is optional. Labels are big-endian bit strings for qubit registers
(``"10"``: first qubit 1) and decimal indices otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import linalg
from .bases import OrthonormalBasis, basis_labels
from .channels import QuantumChannel
from .fidelity import transition_probabilities
from .linalg import RandomStream

ROW_TOL = 0.02
PROB_TOL = 1e-12


class RecordError(ValueError):
    """A record that cannot be used to estimate a fidelity."""


class NotClassicalError(ValueError):
    """The target does not permute the chosen input basis onto the output basis."""


@dataclass(frozen=True)
class MeasurementRecord:
    dim: int
    input_basis: str
    output_basis: str
    rows: dict[str, dict[str, float]]
    shots: int | None = None

    @property
    def labels(self) -> list[str]:
        return basis_labels(self.dim)

    def to_json(self) -> dict:
        out = {"dim": self.dim, "input_basis": self.input_basis,
               "output_basis": self.output_basis}
        if self.shots is not None:
            out["shots"] = self.shots
        out["rows"] = {k: dict(v) for k, v in self.rows.items()}
        return out

    @classmethod
    def from_json(cls, data: dict) -> "MeasurementRecord":
        try:
            dim = int(data["dim"])
            rows_in = data["rows"]
        except (KeyError, TypeError, ValueError) as exc:
            raise RecordError(f"malformed record: {exc}") from None
        labels = set(basis_labels(dim))
        rows: dict[str, dict[str, float]] = {}
        for lab_in, row in rows_in.items():
            if lab_in not in labels:
                raise RecordError(f"unknown input label {lab_in!r} for dim {dim}")
            if not isinstance(row, dict):
                raise RecordError(f"row {lab_in!r} is not an object")
            for lab_out in row:
                if lab_out not in labels:
                    raise RecordError(f"unknown output label {lab_out!r} in row {lab_in!r}")
            rows[lab_in] = {k: float(v) for k, v in row.items()}
        shots = data.get("shots")
        return cls(dim, str(data.get("input_basis", "custom")),
                   str(data.get("output_basis", "custom")), rows,
                   None if shots is None else int(shots))


def dump_record(rec: MeasurementRecord, path) -> None:
    Path(path).write_text(json.dumps(rec.to_json(), indent=2) + "\n")


def load_record(path) -> MeasurementRecord:
    return MeasurementRecord.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class ExpectedMapping:
    """Bijection from input labels to the output label each input should produce."""

    permutation: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.permutation.values())) != len(self.permutation):
            raise ValueError("expected mapping is not bijective")

    def __getitem__(self, label: str) -> str:
        return self.permutation[label]

    def items(self):
        return self.permutation.items()


@dataclass(frozen=True)
class Finding:
    kind: str
    row: str | None
    detail: str

    def __str__(self) -> str:
        where = f" [row {self.row}]" if self.row is not None else ""
        return f"{self.kind}{where}: {self.detail}"


# ---------------------------------------------------------------------------

def simulate_record(ch: QuantumChannel, inputs: OrthonormalBasis,
                    outputs: OrthonormalBasis) -> MeasurementRecord:
    """Exact table of ``<out_m| E(|in_n><in_n|) |out_m>`` for all ``n, m``."""
    probs = transition_probabilities(ch, inputs, outputs)
    labels = basis_labels(ch.dim)
    rows = {labels[n]: {labels[m]: float(probs[n, m]) for m in range(ch.dim)}
            for n in range(ch.dim)}
    return MeasurementRecord(ch.dim, inputs.label, outputs.label, rows)


def sample_record(rec: MeasurementRecord, shots: int, stream: RandomStream) -> MeasurementRecord:
    """Empirical frequencies from ``shots`` multinomial draws per input row.

    Probability missing from a row (a trace-decreasing process) becomes a
    no-click outcome that is not reported. Rows are sampled in label order.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    labels = basis_labels(rec.dim)
    rows = {}
    for lab_in in labels:
        if lab_in not in rec.rows:
            continue
        row = rec.rows[lab_in]
        p = np.array([max(0.0, row.get(lab, 0.0)) for lab in labels])
        total = p.sum()
        if total > 1.0:
            p = p / total
        p = np.append(p, max(0.0, 1.0 - p.sum()))
        counts = stream.rng.multinomial(shots, p / p.sum())
        rows[lab_in] = {lab: float(counts[m] / shots) for m, lab in enumerate(labels)}
    return MeasurementRecord(rec.dim, rec.input_basis, rec.output_basis, rows, shots)


def expected_mapping(u0, inputs: OrthonormalBasis, outputs: OrthonormalBasis,
                     tol: float = 1e-9) -> ExpectedMapping:
    """The permutation ``n -> sigma(n)`` with ``|<out_sigma(n)|U0|in_n>| = 1``.

    Raises:
        NotClassicalError: if some input is sent to a superposition of outputs.
    """
    u0 = linalg.check_unitary(u0, linalg.DEFAULT_TOL, "target")
    if not u0.shape[0] == inputs.dim == outputs.dim:
        raise ValueError("dimension mismatch between target and bases")
    amps = np.abs(outputs.matrix.conj().T @ u0 @ inputs.matrix)  # [m, n]
    labels = basis_labels(inputs.dim)
    perm = {}
    for n in range(inputs.dim):
        m = int(np.argmax(amps[:, n]))
        if abs(amps[m, n] - 1.0) > tol:
            raise NotClassicalError(
                f"target maps input {labels[n]} ({inputs.label}) to a superposition "
                f"of {outputs.label} outputs; not classical on this basis pair")
        perm[labels[n]] = labels[m]
    return ExpectedMapping(perm)


def validate_record(rec: MeasurementRecord, mapping: ExpectedMapping | None = None,
                    row_tol: float = ROW_TOL) -> list[Finding]:
    """List everything that makes ``rec`` unusable; an empty list means usable.

    Missing rows are always reported. Missing cells are reported only when
    ``mapping`` says they are required.
    """
    findings = []
    labels = basis_labels(rec.dim)
    for lab_in in labels:
        if lab_in not in rec.rows:
            findings.append(Finding("missing-row", lab_in, "input row absent"))
            continue
        row = rec.rows[lab_in]
        for lab_out, p in row.items():
            if lab_out not in labels:
                findings.append(Finding("unknown-label", lab_in, f"output label {lab_out!r}"))
            if not (-PROB_TOL <= p <= 1 + PROB_TOL) or math.isnan(p):
                findings.append(Finding("range", lab_in, f"p({lab_out}|{lab_in}) = {p}"))
        total = sum(row.values())
        if total > 1 + row_tol or total < 0:
            findings.append(Finding("row-sum", lab_in, f"row sums to {total:.6g}"))
        if mapping is not None and mapping[lab_in] not in row:
            findings.append(Finding("missing-required", lab_in,
                                    f"p({mapping[lab_in]}|{lab_in}) is required"))
    for lab_in in rec.rows:
        if lab_in not in labels:
            findings.append(Finding("unknown-label", lab_in, "input label"))
    return findings


def classical_fidelity_from_record(rec: MeasurementRecord, mapping: ExpectedMapping,
                                   row_tol: float = ROW_TOL, renormalize: bool = False) -> float:
    """Mean of the mapped diagonal probabilities ``p(sigma(n) | n)``.

    With ``renormalize`` each required cell is divided by its row sum, which
    needs complete rows.
    """
    problems = validate_record(rec, mapping, row_tol)
    if problems:
        raise RecordError("; ".join(str(f) for f in problems))
    labels = basis_labels(rec.dim)
    hits = []
    for lab in labels:
        row = rec.rows[lab]
        p = row[mapping[lab]]
        if renormalize:
            if len(row) != rec.dim:
                raise RecordError(f"row {lab} is partial; cannot renormalize")
            total = sum(row.values())
            p = p / total if total > 0 else 0.0
        hits.append(p)
    return float(np.mean(hits))


def fidelity_stderr(rec: MeasurementRecord, mapping: ExpectedMapping) -> float | None:
    """Binomial standard error of the record fidelity, ``None`` for exact records.

    Each required cell is treated as an independent binomial estimate from
    ``rec.shots`` trials (a naive propagation, no finite-sample correction).
    """
    if rec.shots is None:
        return None
    var = sum(p * (1 - p) / rec.shots
              for p in (min(1.0, max(0.0, rec.rows[lab][mapping[lab]])) for lab in basis_labels(rec.dim)))
    return float(math.sqrt(var) / rec.dim)
