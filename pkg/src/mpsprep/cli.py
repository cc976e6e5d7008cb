"""Command-line interface.

Verbs map one-to-one onto the library entry points: ``encode`` builds a
single circuit, ``sweep-sigma`` / ``sweep-degree`` produce CSV campaigns,
``spectra`` reports decay fits and accuracy bounds, ``oracle-compare``
scores runs against the exact-SVD baseline, and ``validate`` checks a
serialized circuit. An optional ``key = value`` config file supplies
defaults; explicit flags win. Exit codes: 0 success, 1 usage error,
2 numerical failure, 3 I/O or file-format error.

Example:
    mpsprep encode --dist gaussian --mu 1 --sigma 1 --domain 0,2 \\
        --n 10 --k 3 --p 3 --chi 2 --out circuit.json --report report.json
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from .functions import DistributionSpec
from .mps import CompressionOptions
from .circuits import validate_circuit
from .pipeline import (
    RunConfig,
    SchemaError,
    deserialize_circuit,
    encode,
    oracle_compare,
    render_csv,
    serialize_circuit,
    spectra,
    sweep_degree,
    sweep_sigma,
)

USAGE_ERROR, NUMERICAL_ERROR, IO_ERROR = 1, 2, 3

DEFAULT_DOMAINS = {
    "gaussian": (0.0, 2.0),
    "lorentzian": (0.0, 2.0),
    "lognormal": (0.0, 5.0),  # lower bound auto-shifted off the singularity
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _sig12(x: float) -> str:
    return f"{x:.12g}"


def _parse_domain(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("domain must be 'a,b'")
    return float(parts[0]), float(parts[1])


def _parse_floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t]


def _parse_ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def _load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


_CONFIG_KEYS = {
    "dist": str,
    "mu": float,
    "sigma": float,
    "domain": _parse_domain,
    "n": int,
    "k": int,
    "p": int,
    "samples": int,
    "chi": int,
    "max_sweeps": int,
    "tol": float,
    "seed": int,
}


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file supplying defaults")
    p.add_argument("--dist", choices=sorted(DEFAULT_DOMAINS), default=None)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--domain", type=_parse_domain, default=None, metavar="A,B")
    p.add_argument("--n", type=int, default=None, help="number of qubits")
    p.add_argument("--k", type=int, default=None, help="support bit (2^k regions)")
    p.add_argument("--p", type=int, default=None, help="polynomial degree")
    p.add_argument("--samples", type=int, default=None, help="fit samples per region")
    p.add_argument("--chi", type=int, default=None, help="target bond dimension")
    p.add_argument("--max-sweeps", dest="max_sweeps", type=int, default=None)
    p.add_argument("--tol", type=float, default=None, help="sweep convergence tolerance")
    p.add_argument("--seed", type=int, default=None)


_RUN_DEFAULTS = {
    "dist": "gaussian",
    "mu": 1.0,
    "sigma": 1.0,
    "domain": None,  # resolved per distribution
    "n": 10,
    "k": 3,
    "p": 3,
    "samples": 64,
    "chi": 2,
    "max_sweeps": 50,
    "tol": 1e-10,
    "seed": 0,
}


def _resolve_run_config(args: argparse.Namespace) -> RunConfig:
    file_values: dict = {}
    if args.config:
        for key, raw in _load_config_file(args.config).items():
            if key not in _CONFIG_KEYS:
                raise ValueError(f"unknown config key {key!r}")
            file_values[key] = _CONFIG_KEYS[key](raw)

    def pick(name):
        cli = getattr(args, name, None)
        if cli is not None:
            return cli
        if name in file_values:
            return file_values[name]
        return _RUN_DEFAULTS[name]

    dist = pick("dist")
    domain = pick("domain") or DEFAULT_DOMAINS[dist]
    spec = DistributionSpec(
        kind=dist, mu=pick("mu"), sigma=pick("sigma"), domain=domain
    )
    opts = CompressionOptions(
        target_chi=pick("chi"),
        max_sweeps=pick("max_sweeps"),
        convergence_tol=pick("tol"),
    )
    return RunConfig(
        spec=spec,
        n_qubits=pick("n"),
        support_bit=pick("k"),
        degree=pick("p"),
        samples_per_region=pick("samples"),
        target_chi=pick("chi"),
        compression=opts,
        seed=pick("seed"),
    )


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_encode(args) -> int:
    config = _resolve_run_config(args)
    circuit, report = encode(config)
    if args.out:
        serialize_circuit(circuit, args.out)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=1)
            fh.write("\n")
    print(f"fidelity {_sig12(report.fidelity)} (vs {report.fidelity_vs})")
    if report.errors is not None:
        e = report.errors
        print(
            "errors pp {} mps {} gate {} total {}".format(
                _sig12(e.pp_error),
                _sig12(e.mps_error),
                _sig12(e.gate_error),
                _sig12(e.total),
            )
        )
    print(f"gates {report.gate_count} max_bond {max(report.compressed_bonds)}")
    return 0


def _cmd_sweep_sigma(args) -> int:
    config = _resolve_run_config(args)
    dists = args.dists.split(",") if args.dists else [config.spec.kind]
    specs = []
    for d in dists:
        if d not in DEFAULT_DOMAINS:
            raise ValueError(f"unknown distribution {d!r}")
        domain = args.domain or DEFAULT_DOMAINS[d]
        specs.append(replace(config.spec, kind=d, domain=domain, pdf_fn=None))
    n_values = args.n_list or [config.n_qubits]
    rows = sweep_sigma(config, args.sigmas, specs=specs, n_values=n_values)
    _write_text(args.out, render_csv(rows))
    failures = [r for r in rows if r.error]
    for r in failures:
        print(
            f"warning: {r.distribution} sigma={r.sigma} N={r.N}: {r.error}",
            file=sys.stderr,
        )
    return 0


def _cmd_sweep_degree(args) -> int:
    config = _resolve_run_config(args)
    rows = sweep_degree(config, args.degrees)
    _write_text(args.out, render_csv(rows))
    return 0


def _cmd_spectra(args) -> int:
    config = _resolve_run_config(args)
    sigmas = args.sigmas or [config.spec.sigma]
    results = spectra(config.spec, config.n_qubits, sigmas, chi=config.target_chi)
    lines = ["sigma,beta,alpha,r_squared,chi_bound,max_derivative"]
    for res in results:
        alpha, beta = res.decay.joint
        lines.append(
            ",".join(
                _sig12(v)
                for v in (
                    res.sigma,
                    beta,
                    alpha,
                    res.decay.r_squared,
                    res.chi_bound_value,
                    res.max_pdf_derivative,
                )
            )
        )
    _write_text(args.out, "\n".join(lines) + "\n")
    if args.detail:
        detail = ["sigma,cut,k,singular_value"]
        for res in results:
            for cut, spectrum in enumerate(res.spectra, start=1):
                for k, value in enumerate(spectrum, start=1):
                    detail.append(
                        f"{_sig12(res.sigma)},{cut},{k},{_sig12(float(value))}"
                    )
        _write_text(args.detail, "\n".join(detail) + "\n")
    return 0


def _cmd_oracle_compare(args) -> int:
    config = _resolve_run_config(args)
    n_values = args.n_list or [config.n_qubits]
    lines = ["distribution,sigma,N,f_circuit,f_optimal,ratio,exceeds_one"]
    for n in n_values:
        rep = oracle_compare(replace(config, n_qubits=n))
        lines.append(
            ",".join(
                [
                    config.spec.kind,
                    _sig12(config.spec.sigma),
                    str(n),
                    _sig12(rep.f_circuit),
                    _sig12(rep.f_optimal),
                    _sig12(rep.ratio),
                    str(rep.exceeds_one).lower(),
                ]
            )
        )
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_validate(args) -> int:
    circuit = deserialize_circuit(args.circuit)
    report = validate_circuit(circuit)
    print(
        f"qubits {report.n_qubits} gates {report.gate_count} "
        f"(two-qubit {report.two_qubit_count}) "
        f"max_orthogonality_deviation {_sig12(report.max_orthogonality_deviation)} "
        f"staircase {str(report.staircase).lower()}"
    )
    for issue in report.issues:
        print(f"issue: {issue}")
    return 0 if report.ok else NUMERICAL_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mpsprep", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="build one state-preparation circuit")
    _add_run_flags(p)
    p.add_argument("--out", help="circuit JSON output path")
    p.add_argument("--report", help="report JSON output path")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("sweep-sigma", help="fidelity vs standard deviation CSV")
    _add_run_flags(p)
    p.add_argument("--sigmas", type=_parse_floats, required=True, metavar="S1,S2,...")
    p.add_argument("--dists", help="comma list, e.g. gaussian,lognormal,lorentzian")
    p.add_argument("--n-list", dest="n_list", type=_parse_ints, metavar="N1,N2,...")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=_cmd_sweep_sigma)

    p = sub.add_parser("sweep-degree", help="fidelity vs polynomial degree CSV")
    _add_run_flags(p)
    p.add_argument("--degrees", type=_parse_ints, required=True, metavar="D1,D2,...")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=_cmd_sweep_degree)

    p = sub.add_parser("spectra", help="unfolding spectra and decay fits")
    _add_run_flags(p)
    p.add_argument("--sigmas", type=_parse_floats, metavar="S1,S2,...")
    p.add_argument("--out", help="summary CSV path (default stdout)")
    p.add_argument("--detail", help="optional per-singular-value CSV path")
    p.set_defaults(func=_cmd_spectra)

    p = sub.add_parser("oracle-compare", help="score against the exact-SVD baseline")
    _add_run_flags(p)
    p.add_argument("--n-list", dest="n_list", type=_parse_ints, metavar="N1,N2,...")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=_cmd_oracle_compare)

    p = sub.add_parser("validate", help="check a serialized circuit")
    p.add_argument("circuit", help="circuit JSON path")
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return IO_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return IO_ERROR
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
