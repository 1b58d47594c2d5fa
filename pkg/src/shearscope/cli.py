"""Command-line surface tying the pipeline together.

Subcommands: analyze, transform, frame-check, auto-truncate, tight-window,
reconstruct, radon, slice-check, wavefront, synth.  Reports are JSON,
profiles and maps CSV, fields SF2D, coefficient volumes CV1.  Failures exit
nonzero with one machine-readable JSON object on stderr:
0 ok, 2 config error, 3 numerical-precondition failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import admissibility, frames, wavefront, xform
from . import radon as radon_mod
from .generators import generator_from_label
from .grid import GridError, centered_field, dft_forward, field_norm2, read_sf2d, write_sf2d
from .xform import ConeSpec

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str, **detail):
        super().__init__(message)
        self.code = code
        self.kind = kind
        self.detail = detail


def _emit_error(err: CliError) -> int:
    payload = {"error": {"kind": err.kind, "message": str(err), **err.detail}}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return err.code


def _config_error(message: str, **detail) -> CliError:
    return CliError(EXIT_CONFIG, "config", message, **detail)


def _require_range(name: str, value: float, lo: float | None = None,
                   hi: float | None = None, strict_lo: bool = False) -> float:
    rng = []
    if lo is not None:
        rng.append(f"> {lo}" if strict_lo else f">= {lo}")
    if hi is not None:
        rng.append(f"<= {hi}")
    doc = " and ".join(rng) or "finite"
    bad = not np.isfinite(value)
    if lo is not None:
        bad = bad or (value <= lo if strict_lo else value < lo)
    if hi is not None:
        bad = bad or value > hi
    if bad:
        raise _config_error(f"flag {name} must be {doc}, got {value}", flag=name, range=doc)
    return value


def _load_field(path: str):
    if not os.path.exists(path):
        raise CliError(EXIT_IO, "io", f"input file not found: {path}", path=path)
    try:
        return read_sf2d(path)
    except GridError as exc:
        raise CliError(EXIT_IO, "io", f"cannot read {path}: {exc}", path=path)


def _generator(label: str):
    try:
        return generator_from_label(label)
    except ValueError as exc:
        raise _config_error(str(exc), flag="generator")


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")


def _grids_from_args(args, spacing: float):
    gamma = _require_range("--gamma", args.gamma, lo=0.0, strict_lo=True)
    xi = _require_range("--xi", args.xi, lo=0.0, strict_lo=True)
    a_min = args.a_min
    if a_min is None:
        a_min = 4.0 * spacing * spacing
    a_min = _require_range("--a-min", a_min, lo=0.0, strict_lo=True)
    if a_min >= gamma:
        raise _config_error(
            f"flag --a-min must be < gamma ({gamma}), got {a_min}", flag="--a-min"
        )
    step = _require_range("--s-step", args.s_step, lo=0.0, strict_lo=True)
    a_grid = xform.default_a_grid(spacing, gamma=gamma, a_min=a_min)
    s_grid = xform.default_s_grid(xi=xi, step=step)
    return a_grid, s_grid


def _cone_from_args(args) -> ConeSpec:
    u = _require_range("--u", args.u, lo=0.0)
    v = _require_range("--v", args.v, lo=0.0, strict_lo=True)
    return ConeSpec(u, v)


def _threads(args) -> int | None:
    value = args.threads
    if value is None:
        env = os.environ.get("SHEARSCOPE_THREADS")
        if env:
            try:
                value = int(env)
            except ValueError:
                raise _config_error(
                    f"SHEARSCOPE_THREADS must be an integer, got {env!r}",
                    flag="SHEARSCOPE_THREADS",
                )
    if value is not None and value < 1:
        raise _config_error(f"--threads must be >= 1, got {value}", flag="--threads")
    return value


# --- subcommands ----------------------------------------------------------------


def _cmd_analyze(args) -> int:
    spec = _generator(args.generator)
    try:
        report = admissibility.build_report(spec)
    except admissibility.NotAdmissibleError as exc:
        raise CliError(EXIT_NUMERIC, "numerical", str(exc))
    _write_text(args.output, report.to_json())
    return EXIT_OK


def _cmd_transform(args) -> int:
    field = _load_field(args.field)
    spec = _generator(args.generator)
    a_grid, s_grid = _grids_from_args(args, field.spacing)
    vol = xform.shearlet_transform(field, spec, a_grid, s_grid, threads=_threads(args))
    xform.write_cv1(vol, args.output)
    return EXIT_OK


def _cmd_frame_check(args) -> int:
    spec = _generator(args.generator)
    cone = _cone_from_args(args)
    gamma = _require_range("--gamma", args.gamma, lo=0.0, strict_lo=True)
    xi = _require_range("--xi", args.xi, lo=0.0, strict_lo=True)
    try:
        report = frames.frame_bounds(spec, frames.SystemParams(gamma, xi, cone))
    except frames.PreconditionError as exc:
        raise CliError(EXIT_NUMERIC, "numerical", str(exc))
    _write_text(args.output, report.to_json())
    return EXIT_OK


def _cmd_auto_truncate(args) -> int:
    spec = _generator(args.generator)
    cone = _cone_from_args(args)
    slack = _require_range("--slack", args.slack, lo=0.0, strict_lo=True)
    try:
        params = frames.select_truncation(spec, cone, slack)
    except frames.PreconditionError as exc:
        raise CliError(EXIT_NUMERIC, "numerical", str(exc))
    except RuntimeError as exc:
        raise CliError(EXIT_NUMERIC, "numerical", str(exc))
    _write_text(args.output, params.to_json())
    return EXIT_OK


def _read_params(path: str) -> frames.SystemParams:
    if not os.path.exists(path):
        raise CliError(EXIT_IO, "io", f"params file not found: {path}", path=path)
    try:
        with open(path) as fh:
            return frames.SystemParams.from_json(fh.read())
    except (ValueError, KeyError) as exc:
        raise CliError(EXIT_IO, "io", f"cannot parse params {path}: {exc}", path=path)


def _cmd_tight_window(args) -> int:
    spec = _generator(args.generator)
    params = _read_params(args.params)
    if params.cone is None:
        params = frames.SystemParams(params.gamma, params.xi, _cone_from_args(args))
    if args.like is not None:
        like = _load_field(args.like)
        n1, n2, spacing = like.n1, like.n2, like.spacing
    else:
        n1 = n2 = int(_require_range("--n", args.n, lo=8))
        spacing = _require_range("--spacing", args.spacing, lo=0.0, strict_lo=True)
        if n1 % 2:
            raise _config_error(f"--n must be even, got {n1}", flag="--n")
    try:
        win = frames.synthesize_tight_window(spec, params, n1, n2, spacing)
    except frames.PreconditionError as exc:
        raise CliError(EXIT_NUMERIC, "numerical", str(exc))
    frames.write_window(win, args.output + ".json", args.output + ".sf2d")
    return EXIT_OK


def _cmd_reconstruct(args) -> int:
    field = _load_field(args.field)
    spec = _generator(args.generator)
    params = _read_params(args.params)
    if params.cone is None:
        raise _config_error("params file carries no cone; reconstruct needs one")
    window = None
    if args.window is not None:
        if not os.path.exists(args.window):
            raise CliError(EXIT_IO, "io", f"window file not found: {args.window}")
        window = frames.read_window(args.window)
    try:
        rec = frames.reconstruct_cone(field, spec, params, window)
    except frames.PreconditionError as exc:
        raise CliError(EXIT_NUMERIC, "numerical", str(exc))
    write_sf2d(rec, args.output)
    reference = xform.cone_project(field, params.cone)
    err_num = np.linalg.norm(rec.values - reference.values)
    err_den = np.linalg.norm(reference.values)
    report = {
        "relative_l2_error": float(err_num / err_den) if err_den > 0 else 0.0,
        "cone_energy_fraction": (
            field_norm2(reference) / field_norm2(field) if field_norm2(field) > 0 else 0.0
        ),
    }
    _write_text(args.report, json.dumps(report, sort_keys=True, indent=2))
    return EXIT_OK


def _cmd_radon(args) -> int:
    field = _load_field(args.field)
    slope = _require_range("--slope", args.slope, lo=-radon_mod.MAX_SLOPE, hi=radon_mod.MAX_SLOPE)
    prof = radon_mod.radon(field, slope)
    lines = ["u,re,im"]
    lines += [f"{u!r},{a!r},{b!r}" for u, a, b in radon_mod.profile_csv_rows(prof)]
    _write_text(args.output, "\n".join(lines))
    return EXIT_OK


def _cmd_slice_check(args) -> int:
    field = _load_field(args.field)
    slope = _require_range("--slope", args.slope, lo=-radon_mod.MAX_SLOPE, hi=radon_mod.MAX_SLOPE)
    err = radon_mod.projection_slice_check(field, slope)
    _write_text(args.output, json.dumps({"max_relative_error": err}, sort_keys=True))
    return EXIT_OK


def _cmd_wavefront(args) -> int:
    field = _load_field(args.field)
    spec = _generator(args.generator)
    threshold = _require_range("--threshold", args.threshold, lo=0.0, strict_lo=True)
    a_hi = _require_range("--a-max", args.a_max, lo=0.0, strict_lo=True)
    a_lo = args.a_min
    if a_lo is None:
        a_lo = 4.0 * field.spacing ** 2
    a_lo = _require_range("--a-min", a_lo, lo=0.0, strict_lo=True)
    if a_lo >= a_hi:
        raise _config_error(f"--a-min must be < --a-max, got {a_lo} >= {a_hi}")
    step = _require_range("--s-step", args.s_step, lo=0.0, strict_lo=True)
    a_grid = xform.default_a_grid(field.spacing, gamma=a_hi, a_min=a_lo)
    s_grid = xform.default_s_grid(xi=1.0, step=step)
    wfmap = wavefront.wavefront_map(
        field, spec, a_grid, s_grid, threshold, threads=_threads(args)
    )
    wavefront.export_wavefront_csv(wfmap, args.output + ".csv")
    wavefront.export_min_slope_pgm(wfmap, args.output + ".pgm")
    return EXIT_OK


def _cmd_synth(args) -> int:
    n = int(_require_range("--n", args.n, lo=8))
    if n % 2:
        raise _config_error(f"--n must be even, got {n}", flag="--n")
    spacing = _require_range("--spacing", args.spacing, lo=0.0, strict_lo=True)
    if args.kind == "gaussian":
        sigma = _require_range("--sigma", args.sigma, lo=0.0, strict_lo=True)
        template = centered_field(np.zeros((n, n)), spacing)
        X1, X2 = template.meshgrid()
        c1, c2 = args.center
        values = np.exp(-np.pi * ((X1 - c1) ** 2 + (X2 - c2) ** 2) / sigma ** 2)
        field = centered_field(values, spacing)
    else:
        width = _require_range("--width", args.width, lo=0.0, strict_lo=True)
        ls = radon_mod.LineSingularity(
            s0=args.s0,
            u0=args.u0,
            width=width,
            cutoff_center=tuple(args.cutoff_center),
            cutoff_radius=args.cutoff_radius,
        )
        field = radon_mod.make_line_singularity(ls, n, spacing)
    write_sf2d(field, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="shearscope",
        description="Cone-adapted shearlet analysis, frame certification, "
                    "and wavefront-set estimation for 2-D sampled fields.",
    )
    ap.add_argument("--threads", type=int, default=None,
                    help="cap worker threads (env SHEARSCOPE_THREADS)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="admissibility report for a generator")
    p.add_argument("generator")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("transform", help="coefficient volume of a field")
    p.add_argument("field")
    p.add_argument("generator")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--xi", type=float, default=2.0)
    p.add_argument("--a-min", type=float, default=None)
    p.add_argument("--s-step", type=float, default=0.125)
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("frame-check", help="frame bounds of a truncated system")
    p.add_argument("generator")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--xi", type=float, default=2.0)
    p.add_argument("--u", type=float, default=1.0)
    p.add_argument("--v", type=float, default=1.0)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_frame_check)

    p = sub.add_parser("auto-truncate", help="select (gamma, xi) from tail bounds")
    p.add_argument("generator")
    p.add_argument("--slack", type=float, required=True)
    p.add_argument("--u", type=float, default=1.0)
    p.add_argument("--v", type=float, default=1.0)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_auto_truncate)

    p = sub.add_parser("tight-window", help="synthesize the tight-frame window")
    p.add_argument("generator")
    p.add_argument("params")
    p.add_argument("-o", "--output", required=True,
                   help="output prefix (.json and .sf2d are appended)")
    p.add_argument("--like", default=None, help="match this field's frequency grid")
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--spacing", type=float, default=1 / 16)
    p.add_argument("--u", type=float, default=1.0)
    p.add_argument("--v", type=float, default=1.0)
    p.set_defaults(func=_cmd_tight_window)

    p = sub.add_parser("reconstruct", help="cone reconstruction from multipliers")
    p.add_argument("field")
    p.add_argument("generator")
    p.add_argument("params")
    p.add_argument("--window", default=None)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("radon", help="line-integral profile at one slope")
    p.add_argument("field")
    p.add_argument("--slope", type=float, required=True)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_radon)

    p = sub.add_parser("slice-check", help="projection-slice consistency error")
    p.add_argument("field")
    p.add_argument("--slope", type=float, required=True)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_slice_check)

    p = sub.add_parser("wavefront", help="wavefront map (CSV + PGM)")
    p.add_argument("field")
    p.add_argument("generator")
    p.add_argument("-o", "--output", required=True, help="output prefix")
    p.add_argument("--threshold", type=float, default=2.0)
    p.add_argument("--a-min", type=float, default=None)
    p.add_argument("--a-max", type=float, default=0.25)
    p.add_argument("--s-step", type=float, default=0.125)
    p.set_defaults(func=_cmd_wavefront)

    p = sub.add_parser("synth", help="synthetic test fields")
    p.add_argument("kind", choices=["gaussian", "line"])
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--spacing", type=float, default=1 / 16)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--center", type=float, nargs=2, default=(0.0, 0.0))
    p.add_argument("--s0", type=float, default=0.0)
    p.add_argument("--u0", type=float, default=0.0)
    p.add_argument("--width", type=float, default=None)
    p.add_argument("--cutoff-center", type=float, nargs=2, default=(0.0, 0.0))
    p.add_argument("--cutoff-radius", type=float, default=float("inf"))
    p.set_defaults(func=_cmd_synth)

    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_CONFIG
        if code == 0:
            return EXIT_OK
        print(
            json.dumps({"error": {"kind": "config", "message": "bad command line"}}),
            file=sys.stderr,
        )
        return EXIT_CONFIG
    if getattr(args, "kind", None) == "line" and args.width is None:
        args.width = 2.0 * args.spacing
    try:
        return args.func(args)
    except CliError as err:
        return _emit_error(err)
    except GridError as exc:
        return _emit_error(CliError(EXIT_IO, "io", str(exc)))
    except frames.SingularMultiplierError as exc:
        return _emit_error(CliError(EXIT_NUMERIC, "numerical", str(exc)))


if __name__ == "__main__":
    sys.exit(main())
