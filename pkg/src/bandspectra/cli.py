"""Command-line front end.

    bandspectra <command> --config cfg.json [--out PATH] [--format json|csv]
                [--jobs N] [--resolution R] [--schedule n1,n2,...]

Commands: spectrum, classify, distribution, moments, sweep, diagnose.

The config file holds one operator source, either an operator document
(``diagonal``/``bands``/``filtration``) or a discretization (``potential``
and ``sigma``), plus optional run settings such as ``schedule``,
``grid_resolution``, ``lambda``, ``width``, ``n``, ``moments_up_to``,
``oracle_window``, ``sigmas`` and ``interval``.

Exit codes: 0 success, 2 unreadable or malformed config, 3 precondition
violation.  Errors are written to stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .operator_model import (
    BandOperatorSpec,
    Constant,
    Filtration,
    degree_estimate,
    filtration_norm_bound,
    periodicity_diagnostic,
)
from .schrodinger import (
    DiscretizationParams,
    PeriodicRegimeWarning,
    build_hamiltonian,
    hamiltonian_spectrum,
)
from .serialize import (
    SCHEMA_VERSION,
    ConfigError,
    csv_text,
    dumps,
    filtration_from_json,
    potential_from_json,
    report_to_json,
    schedule_from_json,
    spec_from_json,
    spec_to_json,
)
from .spectral_analysis import (
    PreconditionError,
    Schedule,
    accumulation_rate_check,
    classify_point,
    distribution_limit,
    empirical_distribution,
    essential_spectrum_estimate,
    trace_moment_oracle,
)

COMMANDS = ("spectrum", "classify", "distribution", "moments", "sweep", "diagnose")
OPERATOR_KEYS = ("diagonal", "bands")
PARAM_KEYS = ("potential", "sigma")
CSV_COMMANDS = ("spectrum", "distribution", "moments", "sweep")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3


@dataclass
class RunConfig:
    command: str
    document: dict[str, Any]
    schedule: tuple[int, ...] | None = None
    grid_resolution: float = 0.05
    output_path: str | None = None
    output_format: str | None = None
    jobs: int = 1
    options: dict[str, Any] = field(default_factory=dict)

    @property
    def is_discretization(self) -> bool:
        return any(k in self.document for k in PARAM_KEYS)

    @property
    def fmt(self) -> str:
        if self.output_format:
            return self.output_format
        return "csv" if self.command in ("distribution", "sweep") else "json"


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def validate(config: RunConfig) -> list[str]:
    """Precondition violations; an empty list means ``run`` can proceed."""
    doc = config.document
    out: list[str] = []
    has_op = any(k in doc for k in OPERATOR_KEYS)
    has_params = config.is_discretization
    if has_op == has_params:
        out.append("config needs exactly one operator source: 'diagonal' or 'potential'+'sigma'")
    if has_params:
        sigma = doc.get("sigma")
        if config.command == "sweep" and sigma is None:
            pass
        elif not _is_number(sigma) or not sigma > 0:
            out.append("sigma must be positive")
    diag = doc.get("diagonal")
    if isinstance(diag, dict) and diag.get("kind") == "schrodinger":
        if not _is_number(diag.get("sigma")) or not diag["sigma"] > 0:
            out.append("sigma must be positive")
    if config.schedule is not None:
        out += Schedule.check(config.schedule)
    if not config.grid_resolution > 0:
        out.append("grid resolution must be positive")
    if config.jobs < 1:
        out.append("jobs must be >= 1")
    if config.output_format not in (None, "json", "csv"):
        out.append("format must be json or csv")
    if config.fmt == "csv" and config.command not in CSV_COMMANDS:
        out.append(f"{config.command} output is json only")

    opts = config.options
    cmd = config.command
    if cmd in ("spectrum", "sweep") and has_op and not has_params:
        try:
            spec, _ = spec_from_json(doc)
        except ConfigError:
            spec = None
        if spec is not None and not (spec.is_tridiagonal and spec.has_unit_offdiagonal):
            out.append("spectrum needs a tridiagonal operator with unit off-diagonals")
    if cmd == "classify":
        if not _is_number(opts.get("lambda")):
            out.append("classify needs a numeric 'lambda'")
        width = opts.get("width", config.grid_resolution)
        if not _is_number(width) or not width > 0:
            out.append("window width must be positive")
    if cmd == "distribution" and "n" in opts:
        if not isinstance(opts["n"], int) or opts["n"] < 1:
            out.append("n must be a positive integer")
    if cmd == "moments":
        k = opts.get("moments_up_to", 8)
        if not isinstance(k, int) or not 1 <= k <= 12:
            out.append("moments_up_to must be an integer in 1..12")
        w = opts.get("oracle_window", 2000)
        if not isinstance(w, int) or w < 1:
            out.append("oracle_window must be a positive integer")
    if cmd == "sweep":
        sigmas = opts.get("sigmas")
        if not has_params:
            out.append("sweep needs a 'potential'")
        if not isinstance(sigmas, list) or not sigmas:
            out.append("sweep needs a nonempty 'sigmas' list")
        elif not all(_is_number(s) and s > 0 for s in sigmas):
            out.append("sigma must be positive")
    if "interval" in opts:
        iv = opts["interval"]
        if not (isinstance(iv, list) and len(iv) == 2 and all(map(_is_number, iv)) and iv[0] < iv[1]):
            out.append("interval must be [a, b] with a < b")
    if cmd == "diagnose":
        w = opts.get("periodicity_window", 512)
        if not isinstance(w, int) or w < 16:
            out.append("periodicity_window must be an integer >= 16")
    # keep order, drop duplicates
    return list(dict.fromkeys(out))


# ---------------------------------------------------------------------------
# building objects from a validated config


def _filtration(config: RunConfig) -> Filtration:
    return filtration_from_json(config.document.get("filtration", "bilateral"))


def _schedule(config: RunConfig) -> Schedule:
    return Schedule(config.schedule) if config.schedule is not None else Schedule()


def _params(config: RunConfig, sigma: float | None = None) -> DiscretizationParams:
    doc = config.document
    pot = potential_from_json(doc.get("potential"))
    return DiscretizationParams(float(doc["sigma"] if sigma is None else sigma), pot)


def _operator(config: RunConfig) -> BandOperatorSpec:
    """The tridiagonal/band operator T the analyses act on."""
    if config.is_discretization:
        spec, _ = build_hamiltonian(_params(config))
        return spec
    spec, _ = spec_from_json(config.document)
    return spec


# ---------------------------------------------------------------------------
# commands


def _cmd_spectrum(config: RunConfig):
    sched = _schedule(config)
    filt = _filtration(config)
    if config.is_discretization:
        report = hamiltonian_spectrum(
            _params(config), config.grid_resolution, sched, filt, jobs=config.jobs
        )
    else:
        report = essential_spectrum_estimate(
            _operator(config), filt, config.grid_resolution, sched, jobs=config.jobs
        )
    if config.fmt == "csv":
        return csv_text(["interval_lo", "interval_hi"], list(report.essential_support))
    doc = report_to_json(report)
    if config.is_discretization:
        doc["discretization"] = {"sigma": float(config.document["sigma"]),
                                 "potential": config.document["potential"]}
    return doc


def _cmd_classify(config: RunConfig):
    opts = config.options
    width = float(opts.get("width", config.grid_resolution))
    verdict = classify_point(
        _operator(config), _filtration(config), float(opts["lambda"]), width,
        _schedule(config), jobs=config.jobs,
    )
    return {"schema_version": SCHEMA_VERSION, "point": verdict.to_dict()}


def _cmd_distribution(config: RunConfig):
    sched = _schedule(config)
    n = int(config.options.get("n", sched.sizes[-1]))
    dist = empirical_distribution(_operator(config), _filtration(config), n, jobs=config.jobs)
    if config.fmt == "csv":
        return csv_text(["index", "lambda"], [(i + 1, float(x)) for i, x in enumerate(dist.values)])
    return {
        "schema_version": SCHEMA_VERSION,
        "n": n,
        "dimension": dist.n,
        "tol": dist.sample.tol,
        "eigenvalues": [float(x) for x in dist.values],
    }


def _cmd_moments(config: RunConfig):
    opts = config.options
    kmax = int(opts.get("moments_up_to", 8))
    window = int(opts.get("oracle_window", 2000))
    spec = _operator(config)
    sched = _schedule(config)
    estimates = distribution_limit(spec, _filtration(config), sched, kmax, jobs=config.jobs)
    rows = []
    for m in estimates:
        rows.append(
            {
                "k": m.k,
                "estimate": m.estimate,
                "oracle": trace_moment_oracle(spec, m.k, window),
                "per_schedule": list(m.values),
            }
        )
    if config.fmt == "csv":
        return csv_text(["k", "estimate", "oracle"], [(r["k"], r["estimate"], r["oracle"]) for r in rows])
    out = {
        "schema_version": SCHEMA_VERSION,
        "schedule": list(sched.sizes),
        "oracle_window": window,
        "moments": rows,
    }
    if "interval" in opts:
        a, b = opts["interval"]
        acc = accumulation_rate_check(spec, _filtration(config), (a, b), sched, jobs=config.jobs)
        out["accumulation"] = {
            "interval": [a, b],
            "alpha": acc.alpha,
            "beta": acc.beta,
            "pass": acc.passed,
            "counts": [list(c) for c in acc.counts],
        }
    return out


def _cmd_sweep(config: RunConfig):
    sched = _schedule(config)
    filt = _filtration(config)
    rows = []
    for sigma in config.options["sigmas"]:
        report = hamiltonian_spectrum(
            _params(config, sigma), config.grid_resolution, sched, filt, jobs=config.jobs
        )
        rows += [(float(sigma), lo, hi) for lo, hi in report.essential_support]
    rows.sort()
    if config.fmt == "csv":
        return csv_text(["sigma", "interval_lo", "interval_hi"], rows)
    return {
        "schema_version": SCHEMA_VERSION,
        "rows": [{"sigma": s, "interval_lo": lo, "interval_hi": hi} for s, lo, hi in rows],
    }


def _cmd_diagnose(config: RunConfig):
    spec = _operator(config)
    filt = _filtration(config)
    n_max = 2 * spec.bandwidth + 4
    opts = config.options
    periodicity = periodicity_diagnostic(
        spec.diagonal,
        int(opts.get("periodicity_window", 512)),
        float(opts.get("periodicity_tol", 1e-9)),
    )
    band_degrees = {
        str(k): degree_estimate(BandOperatorSpec(Constant(0.0), {k: seq}), filt, n_max)
        for k, seq in spec.bands.items()
    }
    return {
        "schema_version": SCHEMA_VERSION,
        "operator": spec_to_json(spec, filt),
        "degree": {
            "diagonal": degree_estimate(BandOperatorSpec(spec.diagonal, {}), filt, n_max),
            "bands": band_degrees,
            "total": degree_estimate(spec, filt, n_max),
        },
        "filtration_norm_bound": filtration_norm_bound(spec),
        "periodicity": periodicity.to_dict(),
    }


HANDLERS = {
    "spectrum": _cmd_spectrum,
    "classify": _cmd_classify,
    "distribution": _cmd_distribution,
    "moments": _cmd_moments,
    "sweep": _cmd_sweep,
    "diagnose": _cmd_diagnose,
}


def run(config: RunConfig) -> int:
    problems = validate(config)
    if problems:
        _error("precondition", "config violates preconditions", problems)
        return EXIT_PRECONDITION
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PeriodicRegimeWarning)
            result = HANDLERS[config.command](config)
    except ConfigError as exc:
        _error("config", str(exc))
        return EXIT_CONFIG
    except (PreconditionError, ValueError) as exc:
        _error("precondition", str(exc))
        return EXIT_PRECONDITION
    text = result if isinstance(result, str) else dumps(result)
    if config.output_path:
        Path(config.output_path).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _error(kind: str, message: str, violations: list[str] | None = None) -> None:
    doc: dict[str, Any] = {"error": kind, "message": message}
    if violations:
        doc["violations"] = violations
    sys.stderr.write(json.dumps(doc) + "\n")


# ---------------------------------------------------------------------------
# argument parsing


def _parse_schedule(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"cannot parse schedule {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _error("usage", message)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="bandspectra",
        description="Spectra of band operators from finite sections.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=("json", "csv"))
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--resolution", type=float, help="grid resolution / window width")
    parser.add_argument("--schedule", help="comma-separated section sizes")
    parser.add_argument("--lambda", dest="lam", type=float, help="point to classify")
    parser.add_argument("--width", type=float, help="classification window width")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror or exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")

    document = {k: doc[k] for k in ("diagonal", "bands", "filtration", "potential", "sigma") if k in doc}
    options = {k: v for k, v in doc.items() if k not in document and k not in ("schedule", "grid_resolution")}

    schedule = schedule_from_json(doc["schedule"]) if "schedule" in doc else None
    if args.schedule is not None:
        schedule = _parse_schedule(args.schedule)
    resolution = doc.get("grid_resolution", 0.05)
    if not _is_number(resolution):
        raise ConfigError("grid_resolution must be a number")
    if args.resolution is not None:
        resolution = args.resolution
    if args.lam is not None:
        options["lambda"] = args.lam
    if args.width is not None:
        options["width"] = args.width

    config = RunConfig(
        command=args.command,
        document=document,
        schedule=schedule,
        grid_resolution=float(resolution),
        output_path=args.out,
        output_format=args.format,
        jobs=args.jobs,
        options=options,
    )
    # structural parse of the operator source, so schema errors exit with 2
    if "diagonal" in document:
        _check_structure(lambda: spec_from_json(_structural(document)))
    if "potential" in document:
        _check_structure(lambda: potential_from_json(document["potential"]))
    return config


def _structural(document: dict) -> dict:
    # a nonpositive sigma is a precondition violation, not a schema error
    diag = document["diagonal"]
    if isinstance(diag, dict) and diag.get("kind") == "schrodinger" and _is_number(diag.get("sigma")):
        diag = dict(diag, sigma=abs(diag["sigma"]) or 1.0)
    return dict(document, diagonal=diag)


def _check_structure(fn) -> None:
    try:
        fn()
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help exits 0; usage errors exit 2
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        config = load_config(args)
    except ConfigError as exc:
        _error("config", str(exc))
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
