"""Command-line front end: verifications, region/curve scans, bound search."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .bounds import numeric_search, sample_region, scan_curve
from .conditional import (
    ConditionalScheme,
    DensityMatrix,
    apply_conditional,
    completeness_defect,
    kraus_operator,
)
from .fock import LopCircuit, haar_unitary
from .gate import (
    CONDITION_TOL,
    ancilla_block,
    klm_design,
    reduce_general_ancilla,
    verify_ns,
)

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_IO = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _emit(text: str, output: str | None) -> int:
    if output is None:
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as err:
        print(f"cannot write {output}: {err}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _table(header: list[str], rows: list[list], fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"header": header, "rows": rows}, sort_keys=True) + "\n"
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def _cmd_verify_klm(args) -> int:
    design = klm_design(2**-0.25, 2**-0.25)
    report = verify_ns(design.matrix, design.scheme())
    print(f"modes: {design.total_modes}")
    print(f"m0 = {report.m0:.12g}")
    print(f"m1 = {report.m1:.12g}")
    print(f"m2 = {report.m2:.12g}")
    print(f"condition residual:  {report.condition_residual:.3e}")
    print(f"success probability: {report.success_probability:.12g}")
    ok = (
        report.condition_residual <= args.tol
        and abs(report.success_probability - 0.25) <= args.tol
    )
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_VERIFY


def _cmd_scan_curve(args) -> int:
    rows = [[s.x2, s.y2, s.p] for s in scan_curve(args.grid_n)]
    return _emit(_table(["x2", "y2", "p"], rows, args.format), args.output)


def _cmd_region(args) -> int:
    rows = [
        [x2, y2, int(flag), p] for x2, y2, flag, p in sample_region(args.grid_n)
    ]
    return _emit(_table(["x2", "y2", "feasible", "p"], rows, args.format), args.output)


def _cmd_optimize(args) -> int:
    result = numeric_search(
        total_modes=args.modes,
        rank_s=args.rank,
        restarts=args.restarts,
        seed=args.seed,
        penalty_weight=args.penalty,
    )
    payload = {
        "best_probability": result.best_probability,
        "residual": result.residual,
        "restarts": result.restarts,
        "seed": result.seed,
        "evaluations": result.evaluations,
        "matrix": [
            [z.real, z.imag] for z in result.best_matrix.matrix.reshape(-1)
        ],
    }
    return _emit(json.dumps(payload, sort_keys=True) + "\n", args.output)


def _load_matrix(path: str) -> LopCircuit:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return LopCircuit(np.array([[complex(re, im) for re, im in row] for row in raw]))


def _cmd_kraus_check(args) -> int:
    if args.matrix_file is not None:
        try:
            lop = _load_matrix(args.matrix_file)
        except (OSError, ValueError) as err:
            print(f"cannot read {args.matrix_file}: {err}", file=sys.stderr)
            return EXIT_IO
    else:
        lop = haar_unitary(args.modes, np.random.default_rng(args.seed))
    ancilla = lop.dim - 1
    scheme = ConditionalScheme(
        system_modes=1,
        ancilla_modes=ancilla,
        ancilla_input=tuple(1 if m == 0 else 0 for m in range(ancilla)),
        outcomes=(tuple(1 if m == 0 else 0 for m in range(ancilla)),),
        system_photons=(0, 1, 2),
    ).all_outcomes()
    defect = completeness_defect(scheme, lop)
    print(f"modes: {lop.dim}")
    print(f"outcomes enumerated: {scheme.rank}")
    print(f"completeness defect: {defect:.3e}")
    ok = defect <= args.tol
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_VERIFY


def _cmd_reduce_demo(args) -> int:
    rng = np.random.default_rng(args.seed)
    k = args.modes - 1
    chi = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    chi /= np.linalg.norm(chi)
    upstream = haar_unitary(args.modes, rng)
    scheme = ConditionalScheme(
        system_modes=1,
        ancilla_modes=k,
        ancilla_input=tuple(1 if m == 0 else 0 for m in range(k)),
        outcomes=(tuple(1 if m == 0 else 0 for m in range(k)),),
        system_photons=(0, 1, 2),
    )
    rho = DensityMatrix.pure(
        scheme.system_basis, np.full(scheme.system_basis.dim, 1.0)
    )

    # Route 1: superposed one-photon input, Kraus operator by linearity.
    basis_inputs = [tuple(1 if m == a else 0 for m in range(k)) for a in range(k)]
    m_chi = sum(
        chi[a]
        * kraus_operator(
            ConditionalScheme(
                system_modes=1,
                ancilla_modes=k,
                ancilla_input=basis_inputs[a],
                outcomes=scheme.outcomes,
                system_photons=scheme.system_photons,
            ),
            upstream,
            scheme.outcomes[0],
        ).entries
        for a in range(k)
    )
    p_direct = float(np.trace(m_chi @ rho.entries @ m_chi.conj().T).real)

    # Route 2: fold the preparation into the circuit, basis-state input.
    folded = LopCircuit(
        upstream.matrix @ ancilla_block(1, reduce_general_ancilla(chi)).matrix
    )
    p_reduced = apply_conditional(scheme, folded, rho).probability

    print(f"probability with superposed input: {p_direct:.12g}")
    print(f"probability with reduced circuit:  {p_reduced:.12g}")
    diff = abs(p_direct - p_reduced)
    print(f"difference: {diff:.3e}")
    ok = diff <= args.tol
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> _Parser:
    parser = _Parser(prog="nsgate", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-klm", help="verify the canonical 3-mode design")
    p.add_argument("--tol", type=float, default=CONDITION_TOL)
    p.set_defaults(func=_cmd_verify_klm)

    p = sub.add_parser("scan-curve", help="emit boundary-curve samples")
    p.add_argument("--grid-n", type=int, default=201)
    p.add_argument("--output", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_scan_curve)

    p = sub.add_parser("region", help="emit the feasibility-region grid")
    p.add_argument("--grid-n", type=int, default=101)
    p.add_argument("--output", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_region)

    p = sub.add_parser("optimize", help="run the numeric bound search")
    p.add_argument("--modes", type=int, default=3)
    p.add_argument("--rank", type=int, default=1)
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--penalty", type=float, default=100.0)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("kraus-check", help="completeness defect of a unitary")
    p.add_argument("--modes", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--matrix-file", default=None)
    p.add_argument("--tol", type=float, default=CONDITION_TOL)
    p.set_defaults(func=_cmd_kraus_check)

    p = sub.add_parser("reduce-demo", help="one-photon input reduction check")
    p.add_argument("--modes", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=CONDITION_TOL)
    p.set_defaults(func=_cmd_reduce_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as err:
        print(f"{parser.prog}: error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
