"""Command-line front end.

Subcommands: ``reps`` (spin and representation matrices as JSON),
``geometry-check`` (rotation-geometry invariant suite), ``spectrum``
(assemble + solve + convergence), ``planar`` (separable n = 2 pipeline),
``validate-wavefunction`` (amplitude-file checks), ``acceptance`` (the full
acceptance suite).

Configuration comes from an optional key = value text file plus flag
overrides (flags win); every output embeds the resolved configuration and the
seed.  Exit codes: 0 success, 1 validation error, 2 solver non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import acceptance as acceptance_mod
from .grids import GridSpec
from .models import (
    AssemblyError,
    InertialParams,
    ModelKind,
    SectorLabel,
    assemble,
    dilatational_harmonic,
)
from .planar import PlanarSector, dalembert_planar, discreteness_criterion, planar_quantum_operators
from .rotation import geometry_checks
from .solver import convergence_study, solve_lowest
from .spin import SpinLabel, build_spin_matrices, su2_from_rotation_vector, wigner_d
from .wavefunc import (
    degenerate_constraint_check,
    exchange_symmetry_check,
    halfness_validate,
    k_plus_elements,
    read_amplitude,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NO_CONVERGENCE = 2


class _Parser(argparse.ArgumentParser):
    """argparse that exits with the validation code on bad flags."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_VALIDATION)


def _complex_matrix_json(mat: np.ndarray):
    """Row-major nested lists of [re, im] pairs."""
    mat = np.asarray(mat, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in mat]


def _parse_config_file(path) -> dict:
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line: {raw.rstrip()}")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _parse_grid(text: str, offset: float = 0.0) -> GridSpec:
    """Grid syntax: 'lo:hi:points' per axis, axes comma-separated."""
    axes = []
    for part in text.split(","):
        bits = part.split(":")
        if len(bits) != 3:
            raise ValueError(f"bad grid axis {part!r}, expected lo:hi:points")
        axes.append((float(bits[0]), float(bits[1]), int(bits[2])))
    return GridSpec(axes=tuple(axes), offset=offset)


def _parse_potential(spec: str, n: int):
    """'none' or 'harmonic:kappa=K' (dilatational harmonic well)."""
    if spec in (None, "", "none"):
        return None
    name, _, args = spec.partition(":")
    opts = {}
    if args:
        for item in args.split(","):
            key, _, val = item.partition("=")
            opts[key.strip()] = float(val)
    if name == "harmonic":
        return dilatational_harmonic(opts.get("kappa", 1.0), n)
    raise ValueError(f"unknown potential {spec!r}")


def _require(resolved: dict, key: str) -> str:
    if key not in resolved:
        raise ValueError(f"missing required option: {key.replace('_', '-')}")
    return resolved[key]


def _merge_config(args, file_keys: dict, flag_names: list[str]) -> dict:
    resolved = dict(file_keys)
    for name in flag_names:
        val = getattr(args, name, None)
        if val is not None:
            resolved[name] = val
    return resolved


def _write_json(path, payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _fmt_energy(value: float) -> str:
    return f"{value:.12g}"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_reps(args) -> int:
    label = SpinLabel.from_spin(args.spin)
    spin = build_spin_matrices(label)
    payload = {
        "config": {"spin": str(label), "rotation_vector": args.rotation_vector},
        "dimension": label.dim,
        "S1": _complex_matrix_json(spin.s1),
        "S2": _complex_matrix_json(spin.s2),
        "S3": _complex_matrix_json(spin.s3),
    }
    if args.rotation_vector:
        k = np.array([float(x) for x in args.rotation_vector.split(",")])
        u = su2_from_rotation_vector(k)
        payload["su2_element"] = _complex_matrix_json(u)
        payload["wigner_d"] = _complex_matrix_json(wigner_d(label, u))
    _write_json(args.out, payload)
    return EXIT_OK


def _cmd_geometry_check(args) -> int:
    report = geometry_checks(seed=args.seed)
    _write_json(args.out, {"config": {"seed": args.seed}, "checks": report})
    return EXIT_OK if all(entry["pass"] for entry in report) else EXIT_VALIDATION


def _sector_from_args(n: int, resolved: dict) -> SectorLabel:
    if n == 3:
        return SectorLabel.spins(resolved.get("s", 0), resolved.get("j", 0))
    return SectorLabel.fourier(int(resolved.get("m", 0)), int(resolved.get("n_label", 0)))


def _cmd_spectrum(args) -> int:
    file_keys = _parse_config_file(args.config) if args.config else {}
    resolved = _merge_config(
        args, file_keys,
        ["kind", "n", "I", "A", "B", "m", "n_label", "s", "j", "grid", "potential",
         "levels", "tol", "seed", "offset", "energy_scale"],
    )
    kind = ModelKind(resolved.get("kind", "aff-aff"))
    n = int(resolved.get("n", 2))
    params = InertialParams(
        A=float(resolved.get("A", 1.0)),
        B=float(resolved.get("B", 0.0)),
        I=float(resolved.get("I", 0.0)),
        n=n,
    )
    sector = _sector_from_args(n, resolved)
    grid = _parse_grid(_require(resolved, "grid"), float(resolved.get("offset", 0.0)))
    potential = _parse_potential(resolved.get("potential", "none"), n)
    levels = int(resolved.get("levels", 4))
    tol = float(resolved.get("tol", 1e-8))
    seed = int(resolved.get("seed", 0))
    scale = float(resolved.get("energy_scale", 1.0))

    op = assemble(kind, params, sector, grid, potential=potential)
    if args.export_matrix:
        op.export_coo(args.export_matrix)
    spectrum = solve_lowest(op, levels, tol=tol, seed=seed)

    rows = [
        (i, _fmt_energy(scale * e), f"{r:.3e}")
        for i, (e, r) in enumerate(zip(spectrum.eigenvalues, spectrum.residuals))
    ]
    if args.out_csv:
        with open(args.out_csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["level", "energy", "residual"])
            writer.writerows(rows)
    else:
        print("level,energy,residual")
        for row in rows:
            print(",".join(str(x) for x in row))
    meta = {
        "config": {k: str(v) for k, v in resolved.items()},
        "seed": seed,
        "dim": op.dim,
        "converged": spectrum.converged,
        "iterations": spectrum.meta.get("iterations"),
        "method": spectrum.meta.get("method"),
        "symmetry_defect": op.symmetry_defect(),
    }
    if args.out_json:
        _write_json(args.out_json, meta)
    return EXIT_OK if spectrum.converged else EXIT_NO_CONVERGENCE


def _cmd_planar(args) -> int:
    file_keys = _parse_config_file(args.config) if args.config else {}
    resolved = _merge_config(
        args, file_keys,
        ["kind", "I", "A", "B", "m", "n_label", "qgrid", "xgrid", "potential",
         "levels", "tol", "seed", "x_form", "offset", "energy_scale"],
    )
    kind = ModelKind(resolved.get("kind", "aff-aff"))
    params = InertialParams(
        A=float(resolved.get("A", 1.0)),
        B=float(resolved.get("B", 0.0)),
        I=float(resolved.get("I", 0.0)),
        n=2,
    )
    sector = PlanarSector(int(resolved.get("m", 0)), int(resolved.get("n_label", 0)))
    levels = int(resolved.get("levels", 4))
    tol = float(resolved.get("tol", 1e-8))
    seed = int(resolved.get("seed", 0))
    scale = float(resolved.get("energy_scale", 1.0))
    potential = _parse_potential(resolved.get("potential", "none"), 2)
    v_dil = (lambda q: potential(np.stack([q, q], axis=1))) if potential else None

    convergence = {}
    offset = float(resolved.get("offset", 0.0))
    if kind is ModelKind.DAlembert:
        grid = _parse_grid(_require(resolved, "qgrid"), offset)
        op = dalembert_planar(params, sector, grid, potential=potential)
        spectra = {"rotated-invariants": solve_lowest(op, levels, tol=tol, seed=seed)}
        factory = lambda res, box: dalembert_planar(
            params, sector, grid.with_points(int(res)), potential=potential
        )
        base = grid.axes[0][2]
        report = convergence_study(factory, [base // 2, int(base / 1.33), base],
                                   count=levels, tol=tol, seed=seed)
        convergence["rotated-invariants"] = report.as_dict()
    else:
        qgrid = _parse_grid(_require(resolved, "qgrid"), offset)
        xgrid = _parse_grid(_require(resolved, "xgrid"), offset)
        q_op, x_op = planar_quantum_operators(
            kind, params, sector, qgrid, xgrid,
            v_dil=v_dil, x_form=resolved.get("x_form", "auto"),
        )
        spectra = {
            "dilatation": solve_lowest(q_op, levels, tol=tol, seed=seed),
            "shear": solve_lowest(x_op, levels, tol=tol, seed=seed),
        }
        for role, grid_1d in (("dilatation", qgrid), ("shear", xgrid)):
            def factory(res, box, _role=role):
                ops = planar_quantum_operators(
                    kind, params, sector,
                    qgrid.with_points(int(res)) if _role == "dilatation" else qgrid,
                    xgrid.with_points(int(res)) if _role == "shear" else xgrid,
                    v_dil=v_dil, x_form=resolved.get("x_form", "auto"),
                )
                return ops[0] if _role == "dilatation" else ops[1]

            base = grid_1d.axes[0][2]
            report = convergence_study(factory, [base // 2, int(base / 1.33), base],
                                       count=levels, tol=tol, seed=seed)
            convergence[role] = report.as_dict()

    writer = csv.writer(open(args.out_csv, "w", newline="")) if args.out_csv else csv.writer(sys.stdout)
    writer.writerow(["sector", "operator", "level", "energy", "residual"])
    converged = True
    for role, spec in spectra.items():
        converged &= spec.converged
        for i, (e, r) in enumerate(zip(spec.eigenvalues, spec.residuals)):
            writer.writerow([f"({sector.m},{sector.n})", role, i, _fmt_energy(scale * e), f"{r:.3e}"])
    meta = {
        "config": {k: str(v) for k, v in resolved.items()},
        "seed": seed,
        "discreteness": discreteness_criterion(sector).value
        if kind is not ModelKind.DAlembert
        else None,
        "converged": converged,
        "iterations": {role: spec.meta.get("iterations") for role, spec in spectra.items()},
        "convergence": convergence,
    }
    if args.out_json:
        _write_json(args.out_json, meta)
    return EXIT_OK if converged else EXIT_NO_CONVERGENCE


def _cmd_validate_wavefunction(args) -> int:
    amp = read_amplitude(args.amplitude)
    report = {
        "config": {"amplitude": args.amplitude, "degeneracy_point": args.degeneracy_point},
        "sector": str(amp.sector),
        "grid": {"axes": list(amp.grid.axes), "offset": amp.grid.offset},
    }
    sel = halfness_validate([amp.sector])
    report["superselection"] = {
        "classes": sorted(sel.classes),
        "projectable": sel.projectable,
        "violations": list(sel.violations),
    }
    if args.degeneracy_point is not None:
        report["degeneracy_violation"] = degenerate_constraint_check(amp, args.degeneracy_point)
    same_axes = all(ax == amp.grid.axes[0] for ax in amp.grid.axes)
    if same_axes:
        exchange = {}
        for i, w in enumerate(k_plus_elements(amp.sector.n)):
            exchange[f"element_{i}"] = exchange_symmetry_check(amp, w)
        report["exchange_violations"] = exchange
    else:
        report["exchange_violations"] = "skipped (axis boxes differ)"
    _write_json(args.out, report)
    return EXIT_OK


def _cmd_acceptance(args) -> int:
    results = acceptance_mod.run_acceptance(only=args.only)
    for res in results:
        status = "PASS" if res["passed"] else "FAIL"
        print(f"[{status}] criterion {res['criterion']:2d}: {res['name']} "
              f"({res['runtime_s']:.1f} s)")
    if args.out:
        _write_json(args.out, {"seed": acceptance_mod.SEED, "results": results})
    return EXIT_OK if all(r["passed"] for r in results) else EXIT_VALIDATION


# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="affinebody", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reps", help="dump spin and representation matrices as JSON")
    p.add_argument("--spin", required=True, help="spin label, e.g. 1 or 1/2")
    p.add_argument("--rotation-vector", help="comma-separated kx,ky,kz")
    p.add_argument("--out", help="output JSON path (default stdout)")
    p.set_defaults(func=_cmd_reps)

    p = sub.add_parser("geometry-check", help="run the rotation-geometry invariant suite")
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--out", help="output JSON path (default stdout)")
    p.set_defaults(func=_cmd_geometry_check)

    p = sub.add_parser("spectrum", help="assemble a reduced operator and solve")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--kind", choices=[k.value for k in ModelKind])
    p.add_argument("--n", type=int)
    p.add_argument("--I", type=float)
    p.add_argument("--A", type=float)
    p.add_argument("--B", type=float)
    p.add_argument("--m", type=int, help="left Fourier label (n = 2)")
    p.add_argument("--n-label", dest="n_label", type=int, help="right Fourier label (n = 2)")
    p.add_argument("--s", help="spin label (n = 3), e.g. 1/2")
    p.add_argument("--j", help="vorticity label (n = 3), e.g. 1/2")
    p.add_argument("--grid", help="per-axis lo:hi:points, comma-separated")
    p.add_argument("--offset", type=float)
    p.add_argument("--potential", help="none | harmonic:kappa=K")
    p.add_argument("--levels", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--energy-scale", dest="energy_scale", type=float,
                   help="multiply printed energies (presentation only)")
    p.add_argument("--export-matrix", help="write the operator as 'row col value' text")
    p.add_argument("--out-csv", help="spectrum CSV path (default stdout)")
    p.add_argument("--out-json", help="metadata JSON path")
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("planar", help="separable n = 2 pipeline")
    p.add_argument("--config")
    p.add_argument("--kind", choices=[k.value for k in ModelKind])
    p.add_argument("--I", type=float)
    p.add_argument("--A", type=float)
    p.add_argument("--B", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--n-label", dest="n_label", type=int)
    p.add_argument("--qgrid", help="dilatation axis lo:hi:points (rotated axes for the rational kind)")
    p.add_argument("--xgrid", help="shear axis lo:hi:points")
    p.add_argument("--potential", help="none | harmonic:kappa=K (dilatational)")
    p.add_argument("--offset", type=float, help="node offset as a fraction of the spacing")
    p.add_argument("--x-form", dest="x_form", choices=["auto", "flat", "divergence"])
    p.add_argument("--levels", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--energy-scale", dest="energy_scale", type=float)
    p.add_argument("--out-csv")
    p.add_argument("--out-json")
    p.set_defaults(func=_cmd_planar)

    p = sub.add_parser("validate-wavefunction", help="check an amplitude file")
    p.add_argument("--amplitude", required=True, help="binary amplitude path")
    p.add_argument("--degeneracy-point", type=float, help="check the total-degeneracy constraint at q = c")
    p.add_argument("--out", help="output JSON path (default stdout)")
    p.set_defaults(func=_cmd_validate_wavefunction)

    p = sub.add_parser("acceptance", help="run the acceptance suite")
    p.add_argument("--only", type=int, nargs="*", help="criteria numbers to run (default all)")
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=_cmd_acceptance)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (AssemblyError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
