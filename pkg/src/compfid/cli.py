"""Command-line front end.

    compfid estimate --target cnot --records z.json x.json
    compfid simulate --target cnot --noise kind=dephasing,strength=0.1,qubits=0 --out-dir out
    compfid verify --dims 2,3,4 --channels 200

Exit codes: 0 ok, 1 verification failure, 2 invalid input or record
findings, 3 target not classical on the record bases, 4 bases not mutually
unbiased, 5 simulated fidelities violate the bounds.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bases, channels, fidelity, linalg, records, verify
from .bases import BasisPair, OrthonormalBasis
from .channels import NoiseSpec
from .linalg import RandomStream

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INVALID = 2
EXIT_NOT_CLASSICAL = 3
EXIT_BIASED = 4
EXIT_SANDWICH = 5

NAMED_TARGETS = ("cnot", "identity", "qft")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# Argument resolution
# ---------------------------------------------------------------------------

def resolve_target(target: str, dim: int | None) -> tuple[np.ndarray, bool]:
    """Return ``(U0, is_cnot)`` for a named gate or a JSON matrix file."""
    name = target.lower()
    if name == "cnot":
        if dim not in (None, 4):
            raise CliError(f"cnot acts on dim 4, not {dim}")
        return channels.cnot_matrix(), True
    if name in ("identity", "qft"):
        dim = dim or 2
        u = np.eye(dim, dtype=complex) if name == "identity" else bases.fourier_matrix(dim)
        return u, False
    path = Path(target)
    if not path.is_file():
        raise CliError(f"unknown target {target!r}; use one of {NAMED_TARGETS} or a matrix file")
    data = json.loads(path.read_text())
    n = int(data["dim"])
    flat = data["matrix"] if "matrix" in data else data["kraus"][0]
    u = bases._decode_complex(flat).reshape(n, n)
    if dim not in (None, n):
        raise CliError(f"--dim {dim} does not match target file dim {n}")
    if not linalg.is_unitary(u, 1e-10):
        raise CliError(f"target in {target} is not unitary")
    return u, n == 4 and np.allclose(u, channels.cnot_matrix(), atol=1e-12)


def resolve_pair(spec: str | None, dim: int, multi_qubit: bool) -> BasisPair:
    if spec is None:
        return bases.default_pair(dim, multi_qubit)
    parts = [p.strip() for p in spec.replace("/", ",").split(",")]
    if len(parts) != 2:
        raise CliError(f"--basis-pair needs two bases, got {spec!r}")
    try:
        return BasisPair(bases.resolve_basis(parts[0], dim), bases.resolve_basis(parts[1], dim))
    except (KeyError, ValueError) as exc:
        raise CliError(str(exc)) from None


def parse_noise(text: str) -> NoiseSpec:
    """``kind=dephasing,strength=0.1,qubits=0+1,axis=z``; ``qubits=all|whole`` also allowed."""
    fields = {}
    for item in text.split(","):
        if "=" not in item:
            raise CliError(f"bad --noise item {item!r}; expected key=value")
        key, value = item.split("=", 1)
        fields[key.strip().lower()] = value.strip()
    try:
        kind = fields.pop("kind")
        strength = float(fields.pop("strength", fields.pop("angle", "0")))
        qubits_raw = fields.pop("qubits", "all")
        if qubits_raw == "all":
            qubits = None
        elif qubits_raw == "whole":
            qubits = ()
        else:
            qubits = tuple(int(q) for q in qubits_raw.split("+"))
        axis = fields.pop("axis", "z")
        if fields:
            raise CliError(f"unknown --noise keys: {sorted(fields)}")
        return NoiseSpec(kind, strength, axis=axis, qubits=qubits)
    except KeyError:
        raise CliError("--noise needs kind=...") from None
    except ValueError as exc:
        raise CliError(f"bad --noise {text!r}: {exc}") from None


def measurement_setup(u0: np.ndarray, inputs: OrthonormalBasis
                      ) -> tuple[OrthonormalBasis, records.ExpectedMapping]:
    """Measure in the input basis when the target permutes it, else in its image."""
    try:
        return inputs, records.expected_mapping(u0, inputs, inputs)
    except records.NotClassicalError:
        image = OrthonormalBasis(inputs.dim, f"image:{inputs.label}", u0 @ inputs.matrix)
        return image, records.expected_mapping(u0, inputs, image)


def resolve_record_basis(ref: str, u0: np.ndarray) -> OrthonormalBasis:
    dim = u0.shape[0]
    try:
        if ref.startswith("image:"):
            inner = bases.resolve_basis(ref[len("image:"):], dim)
            return OrthonormalBasis(dim, ref, u0 @ inner.matrix)
        return bases.resolve_basis(ref, dim)
    except (KeyError, ValueError) as exc:
        raise CliError(f"record basis {ref!r}: {exc}") from None


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return "n/a" if x is None else f"{x:.6f}"


def report_text(rep: fidelity.FidelityReport) -> str:
    lines = [
        f"dimension                 {rep.dim}",
        f"primary fidelity          {_fmt(rep.f_primary)}"
        + (f" +/- {rep.stderr_primary:.6f}" if rep.stderr_primary is not None else ""),
        f"complementary fidelity    {_fmt(rep.f_complementary)}"
        + (f" +/- {rep.stderr_complementary:.6f}" if rep.stderr_complementary is not None else ""),
        f"process fidelity bounds   [{_fmt(rep.lower_bound_clamped)}, {_fmt(rep.upper_bound)}]"
        f"  (raw lower {rep.lower_bound:.6f})",
        f"average fidelity bounds   [{_fmt(rep.avg_fidelity_bounds[0])}, {_fmt(rep.avg_fidelity_bounds[1])}]",
        f"exact process fidelity    {_fmt(rep.f_process)}",
    ]
    if rep.success_trace is not None:
        lines.append(f"success trace             {_fmt(rep.success_trace)}")
    if rep.entangle is not None:
        lines.append(f"concurrence lower bound   {rep.entangle.concurrence_lower:.6f}"
                     f"  (clamped {rep.entangle.concurrence_lower_clamped:.6f}, CNOT mode)")
    if rep.lower_bound >= 0:
        lo, hi = rep.epsilon_interval
        lines.append(f"with epsilon = {rep.epsilon:.6f} the process fidelity lies in an interval "
                     f"of width epsilon below the smaller fidelity: [{lo:.6f}, {hi:.6f}]")
    return "\n".join(lines)


def emit_report(rep: fidelity.FidelityReport, fmt: str, out_dir: Path | None) -> None:
    text = json.dumps(rep.to_dict(), indent=2)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(text + "\n")
    print(text if fmt == "json" else report_text(rep))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_estimate(args) -> int:
    u0, is_cnot = resolve_target(args.target, args.dim)
    dim = u0.shape[0]
    recs = [records.load_record(p) for p in args.records]
    for path, rec in zip(args.records, recs):
        if rec.dim != dim:
            raise CliError(f"{path}: record dim {rec.dim} != target dim {dim}")
    in_bases = [resolve_record_basis(r.input_basis, u0) for r in recs]
    out_bases = [resolve_record_basis(r.output_basis, u0) for r in recs]
    pair = BasisPair(in_bases[0], in_bases[1])
    if not bases.check_mutually_unbiased(pair, args.tol_unbiased):
        raise CliError(f"input bases {in_bases[0].label!r} and {in_bases[1].label!r} "
                       "are not mutually unbiased", EXIT_BIASED)
    try:
        maps = [records.expected_mapping(u0, i, o) for i, o in zip(in_bases, out_bases)]
    except records.NotClassicalError as exc:
        raise CliError(str(exc), EXIT_NOT_CLASSICAL) from None

    findings = []
    for path, rec, mp in zip(args.records, recs, maps):
        findings += [f"{path}: {f}" for f in records.validate_record(rec, mp, args.row_tol)]
    if findings:
        raise CliError("record validation failed:\n  " + "\n  ".join(findings))

    f1, f2 = (records.classical_fidelity_from_record(r, m, args.row_tol, args.renormalize_rows)
              for r, m in zip(recs, maps))
    se1, se2 = (records.fidelity_stderr(r, m) for r, m in zip(recs, maps))
    rep = fidelity.build_report(f1, f2, dim, stderr_primary=se1, stderr_complementary=se2,
                                cnot_mode=is_cnot)
    emit_report(rep, args.format, args.out_dir)
    return EXIT_OK


def cmd_simulate(args) -> int:
    u0, is_cnot = resolve_target(args.target, args.dim)
    dim = u0.shape[0]
    pair = resolve_pair(args.basis_pair, dim, is_cnot)
    if not bases.check_mutually_unbiased(pair, args.tol_unbiased):
        raise CliError("basis pair is not mutually unbiased", EXIT_BIASED)
    ch = channels.unitary_channel(u0, args.tol_structural)
    try:
        for text in args.noise or []:
            ch = channels.compose(channels.make_noise(parse_noise(text), dim), ch)
    except ValueError as exc:
        raise CliError(str(exc)) from None

    recs, maps = [], []
    for index, inputs in enumerate((pair.input_primary, pair.input_complementary)):
        outputs, mapping = measurement_setup(u0, inputs)
        rec = records.simulate_record(ch, inputs, outputs)
        if args.shots:
            rec = records.sample_record(rec, args.shots, RandomStream(args.seed, index))
        recs.append(rec)
        maps.append(mapping)

    f1, f2 = (records.classical_fidelity_from_record(r, m, renormalize=args.renormalize_rows)
              for r, m in zip(recs, maps))
    se1, se2 = (records.fidelity_stderr(r, m) for r, m in zip(recs, maps))
    f_process = fidelity.process_fidelity(ch, u0)

    exact1, exact2 = fidelity.complementary_fidelities(ch, u0, pair)
    lower, upper = fidelity.bounds(exact1, exact2)
    if lower - f_process > args.tol_sandwich or f_process - upper > args.tol_sandwich:
        print(f"internal consistency failure: {lower} <= {f_process} <= {upper} violated",
              file=sys.stderr)
        return EXIT_SANDWICH

    rep = fidelity.build_report(f1, f2, dim, f_process=f_process, success_trace=ch.success_trace,
                                stderr_primary=se1, stderr_complementary=se2, cnot_mode=is_cnot)
    if args.out_dir is not None:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        records.dump_record(recs[0], args.out_dir / "record_primary.json")
        records.dump_record(recs[1], args.out_dir / "record_complementary.json")
        (args.out_dir / "channel.json").write_text(channels.dumps_channel(ch) + "\n")
    emit_report(rep, args.format, args.out_dir)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = verify.VerifyConfig(dims=tuple(args.dims), channels=args.channels, seed=args.seed)
    results = verify.run_verification(cfg)
    summ = verify.summary(results)
    if args.format == "json":
        print(json.dumps(summ, indent=2))
    else:
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            print(f"[{status}] {r.name:30s} worst {r.worst:+.3e}  tol {r.tol:.0e}  cases {r.cases}")
        print("all properties passed" if summ["passed"] else "verification FAILED")
    return EXIT_OK if summ["passed"] else EXIT_VERIFY


# ---------------------------------------------------------------------------

def _dims(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compfid",
        description="Bound the process fidelity of a quantum gate from two complementary "
                    "classical fidelities.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol-structural", type=float, default=linalg.DEFAULT_TOL,
                       help="tolerance for unitarity checks")
        p.add_argument("--tol-unbiased", type=float, default=1e-9)

    est = sub.add_parser("estimate", help="bounds from two measured records")
    common(est)
    est.add_argument("--target", required=True)
    est.add_argument("--dim", type=int)
    est.add_argument("--records", nargs=2, required=True, metavar=("PRIMARY", "COMPLEMENTARY"))
    est.add_argument("--renormalize-rows", action="store_true",
                     help="divide each required probability by its row sum")
    est.add_argument("--row-tol", type=float, default=records.ROW_TOL)
    est.add_argument("--out-dir", type=Path)
    est.set_defaults(func=cmd_estimate)

    sim = sub.add_parser("simulate", help="simulate a noisy gate end to end")
    common(sim)
    sim.add_argument("--target", required=True)
    sim.add_argument("--dim", type=int)
    sim.add_argument("--basis-pair", help="two basis names or files, e.g. computational,fourier")
    sim.add_argument("--noise", action="append",
                     help="kind=...,strength=...[,qubits=0+1][,axis=z]; repeat to compose in order")
    sim.add_argument("--shots", type=int, help="finite-shot sampling per input")
    sim.add_argument("--renormalize-rows", action="store_true")
    sim.add_argument("--tol-sandwich", type=float, default=1e-9)
    sim.add_argument("--out-dir", type=Path)
    sim.set_defaults(func=cmd_simulate)

    ver = sub.add_parser("verify", help="run the identity and bound checks")
    common(ver)
    ver.add_argument("--dims", type=_dims, default=[2, 3, 4])
    ver.add_argument("--channels", type=int, default=200)
    ver.set_defaults(func=cmd_verify, format="text")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (records.RecordError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
