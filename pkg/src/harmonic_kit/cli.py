"""``harmonic-kit`` command line: means, geometry, figure, recon, verify.

Every run emits one JSON object ``{config, results, provenance}`` (or a CSV
projection of it) and nothing time- or host-dependent, so a fixed config and
seed reproduce the output byte for byte.

Exit codes: 0 ok, 1 property failure, 2 input error, 3 Newton non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__, geometry, means, reconstruction, verify
from ._backend import BACKEND
from .errors import HarmonicKitError, NoConvergence

DEFAULT_SEED = 20240917
SEED_ENV = "HK_DEFAULT_SEED"

EXIT_OK, EXIT_PROPERTY, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3

SIGNALS = {
    "sin": (np.sin, (0.6, 2.5)),
    "cubic": (lambda x: ((x - 1.5) * x + 0.25) * x - 2.0, (0.6, 2.5)),
}


class InputError(Exception):
    """Bad command-line input; reported with exit code 2."""


# {{{ parsing


def _floats(text: str, flag: str) -> list:
    try:
        vals = [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise InputError(f"{flag}: expected comma-separated numbers, got {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise InputError(f"{flag}: values must be finite, got {text!r}")
    return vals


def _sample_and_weights(args) -> tuple:
    if args.a is None:
        raise InputError("--a is required")
    a = _floats(args.a, "--a")
    if args.w is None or args.w == "uniform":
        w = [1.0 / len(a)] * len(a) if len(a) >= 2 else []
    else:
        w = _floats(args.w, "--w")
    try:
        wv = means.validate_weights(w)
    except HarmonicKitError as exc:
        raise InputError(f"--w: {exc}") from None
    try:
        a = means.validate_sample(a, len(wv))
    except HarmonicKitError as exc:
        raise InputError(f"--a: {exc}") from None
    return a, wv


def resolve_seed(flag: Optional[int]) -> int:
    """Flag first, then ``HK_DEFAULT_SEED``, then the built-in default."""
    if flag is not None:
        seed = flag
    elif os.environ.get(SEED_ENV):
        try:
            seed = int(os.environ[SEED_ENV])
        except ValueError:
            raise InputError(f"{SEED_ENV} must be an integer, got {os.environ[SEED_ENV]!r}") from None
    else:
        seed = DEFAULT_SEED
    if seed < 0:
        raise InputError(f"seed must be unsigned, got {seed}")
    return seed


def _policy(args) -> means.SignPolicy:
    try:
        return means.SignPolicy(args.policy, args.lam)
    except ValueError as exc:
        raise InputError(f"--policy/--lam: {exc}") from None


def read_samples(path: str) -> reconstruction.GridFunction:
    """Two numeric columns ``x, f`` separated by commas or whitespace; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"--samples: cannot read {path!r}: {exc.strerror}") from None
    xs, fs = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        try:
            x, f = (float(p) for p in parts)
        except ValueError:
            raise InputError(f"--samples: line {lineno}: expected two numbers, got {line!r}") from None
        if not (math.isfinite(x) and math.isfinite(f)):
            raise InputError(f"--samples: line {lineno}: non-finite value")
        xs.append(x)
        fs.append(f)
    try:
        return reconstruction.GridFunction(np.array(xs), np.array(fs))
    except (HarmonicKitError, ValueError) as exc:
        raise InputError(f"--samples: {exc}") from None


# }}}


# {{{ commands
#
# Each returns ``(results, tables, status)``: the JSON payload, CSV sections
# as ``(name, header, rows)`` and the exit code.


def cmd_means(args, seed):
    a, w = _sample_and_weights(args)
    rep = means.mean_gap(a, w)
    n_h = rep.n * rep.h_w
    h_star = means.scaled_uniform_harmonic(a, w)
    scaling = {"n_times_h_w": n_h, "h_star": h_star, "agrees": abs(n_h - h_star) <= 1e-12 * abs(h_star)}
    results = {"report": rep.to_dict(), "scaling": scaling}
    row = {**rep.to_dict(), **scaling}
    return results, [("means", list(row), [list(row.values())])], EXIT_OK


def _newton_block(scene, seed, starts):
    block = {"start": list(scene.barycenter) + [scene.m_w]}
    status = EXIT_OK
    try:
        r = geometry.numeric_intersection(scene, block["start"])
        block.update(converged=True, x=list(r.x), iterations=r.iterations, residual=r.residual,
                     max_deviation=max(abs(p - q) for p, q in zip(r.x, scene.x_bar)))
    except NoConvergence as exc:
        block.update(converged=False, x=list(exc.x), iterations=exc.iterations, residual=exc.residual,
                     message=str(exc))
        status = EXIT_SOLVER
    if starts:
        rng = np.random.default_rng(seed)
        converged = failed = 0
        dev = 0.0
        for _ in range(starts):
            try:
                r = geometry.numeric_intersection(scene, geometry.random_interior_start(scene, rng))
            except NoConvergence:
                failed += 1
                continue
            converged += 1
            dev = max(dev, max(abs(p - q) for p, q in zip(r.x, scene.x_bar)))
        block["random_starts"] = {"count": starts, "converged": converged, "failed": failed, "max_deviation": dev}
        if failed:
            status = EXIT_SOLVER
    return block, status


def _scene(args, a, w):
    try:
        return geometry.build_scene(a, w, args.variant)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_geometry(args, seed):
    a, w = _sample_and_weights(args)
    scene = _scene(args, a, w)
    residuals = geometry.surface_residuals(scene, scene.x_bar)
    newton, status = _newton_block(scene, seed, args.starts)
    results = {
        "n": scene.n,
        "variant": scene.variant,
        "b": list(scene.b),
        "c": list(scene.c),
        "x_bar": list(scene.x_bar),
        "residuals": residuals,
        "max_residual": max(abs(r) for r in residuals),
        "h_w": scene.h_w,
        "m_w": scene.m_w,
        "heights": geometry.prism_heights(scene),
        "degenerate": scene.degenerate,
        "newton": newton,
    }
    if scene.h_star is not None:
        results.update(h_star=scene.h_star, m_star=scene.m_star)
    rows = [[i + 1, scene.x_bar[i], residuals[i], scene.b[i] if i < scene.n - 1 else ""] for i in range(scene.n)]
    tables = [("coordinates", ["index", "x_bar", "residual", "b"], rows)]
    if scene.c:
        tables.append(("cap", ["index", "c"], [[i + 1, c] for i, c in enumerate(scene.c)]))
    return results, tables, status


def _surface_tables(fig):
    tables = []
    for name, arr in fig.surfaces.items():
        header = [f"x{k + 1}" for k in range(arr.shape[1] - 1)] + ["height"]
        tables.append((name, header, arr.tolist()))
    return tables


def cmd_figure(args, seed):
    a, w = _sample_and_weights(args)
    n = len(a)
    if n == 2 and args.variant != "corollary":
        pair = geometry.parabola_pair_2d(a[0], a[1], w[0], w[1], args.case)
        fig = geometry.sample_parabola_pair(pair, a[0], a[1], args.resolution)
    else:
        if n > 3 and not args.markers_only:
            raise InputError(f"surface samples need n in (2, 3), got n={n}; pass --markers-only")
        fig = geometry.sample_surfaces(_scene(args, a, w), args.resolution)
    surfaces = {} if args.markers_only else fig.surfaces
    results = {"n": fig.n, "surfaces": {k: v.tolist() for k, v in surfaces.items()}, "markers": fig.markers}
    tables = [] if args.markers_only else _surface_tables(fig)
    marker_rows = [[k, json.dumps(v)] for k, v in fig.markers.items()]
    return results, tables + [("markers", ["name", "value"], marker_rows)], EXIT_OK


def _operators(args):
    return list(reconstruction.OPERATORS) if args.operator == "both" else [args.operator]


def cmd_recon(args, seed):
    ops = _operators(args)
    policy = _policy(args)
    if args.signal in ("step", "custom"):
        if args.signal == "step":
            g = reconstruction.step_function(args.resolution, args.jump)
        else:
            if not args.samples:
                raise InputError("--signal custom needs --samples PATH")
            g = read_samples(args.samples)
        rep = reconstruction.recon_report(g, ops, policy)
        results = {"grid": g.grid.tolist(), "values": g.values.tolist(), **rep.to_dict()}
        header = ["midpoint"] + ops
        rows = [[m] + [rep.predictions[op][k] for op in ops] for k, m in enumerate(rep.midpoints)]
        over = [[op, rep.overshoot[op]] for op in ops]
        return results, [("predictions", header, rows), ("overshoot", ["operator", "overshoot"], over)], EXIT_OK
    f, domain = SIGNALS[args.signal]
    if args.levels < 3:
        raise InputError(f"--levels must be at least 3, got {args.levels}")
    tables, convergence = [], {}
    for op in ops:
        rows = reconstruction.convergence_order(f, domain, args.levels, op, policy)
        convergence[op] = reconstruction.rows_to_dicts(rows)
        tables.append((f"convergence_{op}", ["level", "intervals", "h", "error", "slope"],
                       [[r.level, r.intervals, r.h, r.error, "" if r.slope is None else r.slope] for r in rows]))
    finest = reconstruction.GridFunction.sample(f, list(reconstruction.dyadic_grids(domain, args.levels, 16))[-1])
    rep = reconstruction.recon_report(finest, ops, policy, f)
    results = {
        "domain": list(domain),
        "convergence": convergence,
        "final_slope": {op: convergence[op][-1]["slope"] for op in ops},
        "overshoot": rep.overshoot,
    }
    return results, tables, EXIT_OK


def cmd_verify(args, seed):
    if args.cases < 1:
        raise InputError(f"--cases must be positive, got {args.cases}")
    report = verify.run_suite(seed, args.cases)
    failed = report["summary"]["failed"]
    rows = [[p["name"], p["checked"], p["failed"], p["passed"]] for p in report["properties"]]
    status = EXIT_PROPERTY if failed else EXIT_OK
    for p in report["properties"]:
        if not p["passed"]:
            print(f"property failure: {p['name']}: minimal input {json.dumps(p['example'])}", file=sys.stderr)
    return report, [("properties", ["property", "checked", "failed", "passed"], rows)], status


COMMANDS = {
    "means": cmd_means,
    "geometry": cmd_geometry,
    "figure": cmd_figure,
    "recon": cmd_recon,
    "verify": cmd_verify,
}


# }}}


# {{{ output


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, means.WeightVector):
        return list(obj)
    return obj


def config_of(args, seed) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "func")}
    cfg["seed"] = seed
    return cfg


def render_json(doc: dict) -> str:
    # json writes floats with repr, the shortest string that round-trips
    return json.dumps(_plain(doc), indent=2, allow_nan=False) + "\n"


def render_csv(doc: dict, tables) -> str:
    buf = io.StringIO()
    for k, v in doc["config"].items():
        buf.write(f"# {k}={json.dumps(_plain(v))}\n")
    for k, v in doc["provenance"].items():
        buf.write(f"# provenance.{k}={json.dumps(v)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    for name, header, rows in tables:
        buf.write(f"# section: {name}\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in _plain(row)])
    return buf.getvalue()


# }}}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="harmonic-kit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=None, help=f"RNG seed (default: ${SEED_ENV} or {DEFAULT_SEED})")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--out", metavar="PATH", help="write here instead of stdout")

    def sample(sp):
        sp.add_argument("--a", help="comma-separated positive values")
        sp.add_argument("--w", default="uniform", help="comma-separated positive weights, or 'uniform'")

    sp = sub.add_parser("means", help="weighted means, gap and bound")
    sample(sp)
    common(sp)

    sp = sub.add_parser("geometry", help="prism scene, intersection and Newton check")
    sample(sp)
    sp.add_argument("--variant", choices=geometry.VARIANTS, default="thm4")
    sp.add_argument("--starts", type=int, default=0, help="extra seeded random Newton starts")
    common(sp)

    sp = sub.add_parser("figure", help="surface samples and markers for plotting")
    sample(sp)
    sp.add_argument("--variant", choices=geometry.VARIANTS, default="thm4")
    sp.add_argument("--case", type=int, choices=geometry.CASES, default=3)
    sp.add_argument("--resolution", type=int, default=51)
    sp.add_argument("--markers-only", action="store_true")
    common(sp)

    sp = sub.add_parser("recon", help="linear vs harmonic midpoint reconstruction")
    sp.add_argument("--signal", choices=("step", "sin", "cubic", "custom"), default="step")
    sp.add_argument("--samples", metavar="PATH", help="x,f columns for --signal custom")
    sp.add_argument("--operator", choices=("linear", "pph", "both"), default="both")
    sp.add_argument("--policy", choices=("clip", "translate"), default="clip")
    sp.add_argument("--lam", type=float, default=2.0, help="translation factor")
    sp.add_argument("--levels", type=int, default=6)
    sp.add_argument("--resolution", type=int, default=16, help="step signal node count")
    sp.add_argument("--jump", type=float, default=1.0, help="step signal jump height")
    common(sp)

    sp = sub.add_parser("verify", help="seeded randomized invariant suite")
    sp.add_argument("--cases", type=int, default=1000)
    common(sp)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        seed = resolve_seed(args.seed)
        if getattr(args, "resolution", 2) < 2 or getattr(args, "starts", 0) < 0:
            raise InputError("--resolution must be >= 2 and --starts >= 0")
        results, tables, status = COMMANDS[args.command](args, seed)
    except InputError as exc:
        print(f"harmonic-kit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    doc = {
        "config": config_of(args, seed),
        "results": results,
        "provenance": {"seed": seed, "version": __version__, "generator": verify.GENERATOR, "backend": BACKEND},
    }
    text = render_json(doc) if args.format == "json" else render_csv(doc, tables)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if status == EXIT_SOLVER:
        print(f"harmonic-kit {args.command}: Newton did not converge", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
