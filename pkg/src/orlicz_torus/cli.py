"""Command-line entry point: ``orlicz-torus <command> [options]``.

Exit codes: 0 success, 1 a required claim failed or a computation raised,
2 malformed configuration or arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Optional

import numpy as np

from . import claims, embed, metric, pde, spectral
from .config import RunConfig
from .errors import ConfigError, MembershipFailed, OrliczTorusError, TruncationTooSmall
from .qtorus import LatticeGrid, TorusElement
from .verdict import Verdict
from .young import luxemburg_norm, series_membership

SIG_DIGITS = 15


def jsonable(obj):
    """Plain JSON types with floats rounded to 15 significant digits."""
    if isinstance(obj, Verdict):
        return jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(obj.real), jsonable(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2) + "\n"


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and obj and any(isinstance(v, (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def to_csv(rows: list, header: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([json.dumps(v) if isinstance(v, (list, dict)) else v for v in jsonable(row)])
    return buf.getvalue()


class Output:
    def __init__(self, out_dir: Optional[str], fmt: str):
        self.dir = out_dir
        self.fmt = fmt
        self.written = []

    def write(self, name: str, text: str):
        if self.dir is None:
            sys.stdout.write(text)
            return
        os.makedirs(self.dir, exist_ok=True)
        path = os.path.join(self.dir, name)
        with open(path, "w", newline="") as fh:
            fh.write(text)
        self.written.append(path)

    def report(self, stem: str, payload: dict):
        """Write ``payload`` as ``stem.json`` or as a flattened ``stem.csv``."""
        if self.fmt == "csv":
            rows = [[k, v] for k, v in _flatten(jsonable(payload))]
            self.write(f"{stem}.csv", to_csv(rows, ["key", "value"]))
        else:
            self.write(f"{stem}.json", dumps(payload))


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(cfg: RunConfig, out: Output, args) -> int:
    grid = LatticeGrid(cfg.d, cfg.R)
    eig_rows = [[i, *map(int, n), lam] for i, (n, lam) in enumerate(zip(grid.points, grid.eigenvalues), 1)]
    mu = spectral.ls_values(grid, cfg.s)
    try:
        weyl = spectral.weyl_fit(grid).to_json()
        status = 0
    except TruncationTooSmall as exc:
        weyl = {"error": "TruncationTooSmall", "message": str(exc), "analytic_C": spectral.weyl_constant(cfg.d)}
        print(f"warning: {exc}; spectra emitted without a Weyl fit", file=sys.stderr)
        status = 0
    if out.fmt == "csv":
        header = ["rank"] + [f"n{j + 1}" for j in range(cfg.d)] + ["lambda"]
        out.write("eigenvalues.csv", to_csv(eig_rows, header))
        out.write("singular_values.csv", spectral.export_csv(mu))
    else:
        out.write("eigenvalues.json", dumps({"d": cfg.d, "R": cfg.R, "rows": eig_rows}))
        out.write("singular_values.json", dumps({"d": cfg.d, "R": cfg.R, "s": cfg.s, "values": mu}))
    out.write("weyl.json", dumps(weyl))
    return status


def _read_sequence(path: str) -> np.ndarray:
    vals = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                vals.append(abs(float(line)))
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: not a number: {line!r}") from exc
    return np.sort(np.asarray(vals, dtype=float))[::-1]


def cmd_norm(cfg: RunConfig, out: Output, args) -> int:
    if args.input is None:
        raise ConfigError("norm needs --input FILE (one value per line)")
    mu = _read_sequence(args.input)
    value = luxemburg_norm(mu, cfg.phi)
    out.report("norm", {"phi": cfg.phi.descriptor, "length": int(mu.size), "luxemburg_norm": value})
    return 0


def cmd_membership(cfg: RunConfig, out: Output, args) -> int:
    grid = LatticeGrid(cfg.d, cfg.R)
    ls_spec = spectral.ls_spectrum(grid, cfg.s)
    v = series_membership(ls_spec.tail, cfg.phi, ls_spec.values[: spectral.resolved_rank(grid)])
    out.report("membership", {"d": cfg.d, "R": cfg.R, "s": cfg.s, "phi": cfg.phi.descriptor, "verdict": v})
    return 0


def cmd_factorize(cfg: RunConfig, out: Output, args) -> int:
    b = cfg.block("factorize")
    try:
        rep = embed.factorize(LatticeGrid(cfg.d, cfg.R), cfg.s, cfg.phi, seed=cfg.seed,
                              n_vectors=b["n_vectors"], n_families=b["n_families"], n_jobs=b["n_jobs"])
    except MembershipFailed as exc:
        out.report("factorization", {"error": "MembershipFailed", "message": str(exc), "membership": exc.verdict})
        return 1
    out.report("factorization", rep.to_json())
    return 0


def cmd_solve(cfg: RunConfig, out: Output, args) -> int:
    grid = LatticeGrid(cfg.d, cfg.R)
    V = claims._potential(cfg)
    prob = pde.EllipticProblem(V, cfg.s, cfg.phi)
    if args.input is not None:
        with open(args.input) as fh:
            f = TorusElement.from_json(json.load(fh)).extend(grid)
    else:
        f = TorusElement.random(grid, cfg.theta, np.random.default_rng(cfg.seed), decay=1.0)
    gap = pde.spectral_gap(prob)
    u = pde.solve(prob, f)
    verdict = pde.regularity_check(prob, f, gap)
    out.report(
        "solve",
        {
            "gap": gap.to_json(),
            "residual": pde.residual(prob, u, f),
            "regularity": verdict,
            "u": u.to_json(),
        },
    )
    return 0


def cmd_heat(cfg: RunConfig, out: Output, args) -> int:
    grid = LatticeGrid(cfg.d, cfg.R)
    h = cfg.block("heat")
    rows, flat = [], []
    for i, t in enumerate(h["t_list"]):
        v = pde.heat_smoothing_check(grid, t, cfg.phi, trials=h["trials"], seed=cfg.seed + i)
        rows.append({"t": t, "verdict": v})
        flat += [[t, r["k"], r["norm"], r["ratio"]] for r in pde.flat_low_mode_ratios(grid, t, cfg.phi)]
    fit = pde.heat_scaling_fit(grid, h["p"], h["scaling_t"])
    if out.fmt == "csv":
        out.write("heat_flat.csv", to_csv(flat, ["t", "k", "norm", "ratio"]))
        out.write("heat_scaling.csv", to_csv([[r["t"], r["operator"], r["kernel"]] for r in fit["rows"]],
                                             ["t", "operator", "kernel"]))
    else:
        out.write("heat.json", dumps({"smoothing": rows, "flat_low_modes": flat, "scaling": fit}))
    return 0


def cmd_distance(cfg: RunConfig, out: Output, args) -> int:
    grid = LatticeGrid(cfg.d, cfg.R)
    m = cfg.block("metric")
    rng = np.random.default_rng(cfg.seed)
    rho = metric.DensityOperator.random(grid, rng)
    sigma = metric.DensityOperator.random(grid, rng)
    pool = metric.default_pool(grid, cfg.theta, seed=cfg.seed, n_random=m["n_random"])
    v = metric.transport_check(rho, sigma, cfg.phi, pool)
    out.report("distance", {"lip": metric.lip_constant_estimate(grid, pool), "transport": v})
    return 0


def cmd_check_all(cfg: RunConfig, out: Output, args) -> int:
    reports = []
    for claim in claims.REGISTRY:
        if args.only and claim.id not in args.only:
            continue
        rep = claims.run_claim(claim, cfg)
        reports.append(rep)
        tier = "required" if rep.required else "report"
        print(f"[{'PASS' if rep.passed else 'FAIL'}] {rep.id:<32} {tier:<8} {rep.status}", file=sys.stderr)
    failed = [r.id for r in reports if not r.passed]
    payload = {
        "config": cfg.data,
        "claims": [r.to_json(timings=args.timings) for r in reports],
        "summary": {"n_claims": len(reports), "required_failed": failed, "exit_code": 1 if failed else 0},
    }
    if out.fmt == "csv":
        rows = [[r.id, "required" if r.required else "report-only", r.status, r.passed] for r in reports]
        out.write("claims.csv", to_csv(rows, ["id", "tier", "status", "passed"]))
    else:
        out.write("claims.json", dumps(payload))
    return 1 if failed else 0


COMMANDS = {
    "spectrum": cmd_spectrum,
    "norm": cmd_norm,
    "membership": cmd_membership,
    "factorize": cmd_factorize,
    "solve": cmd_solve,
    "heat": cmd_heat,
    "distance": cmd_distance,
    "check-all": cmd_check_all,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML run configuration")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", metavar="DIR", help="output directory (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--d", type=int, help="dimension")
    common.add_argument("--R", type=int, help="grid radius")
    common.add_argument("--s", type=float, help="Sobolev order")
    common.add_argument("--phi", help="Young function, e.g. 'powerlog:p=2.5,alpha=0'")

    parser = argparse.ArgumentParser(prog="orlicz-torus", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name in ("norm", "solve"):
            p.add_argument("--input", metavar="FILE", help="sequence file (norm) or source element JSON (solve)")
        if name == "check-all":
            p.add_argument("--only", nargs="+", metavar="ID", help="run a subset of claim ids")
            p.add_argument("--timings", action="store_true", help="include runtimes (breaks byte-identity)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed must be a nonnegative integer")
        cfg = RunConfig.from_sources(
            args.config, {"d": args.d, "R": args.R, "s": args.s, "phi": args.phi, "seed": args.seed}
        )
        out = Output(args.out, args.format)
        return COMMANDS[args.command](cfg, out, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except claims.ClaimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OrliczTorusError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
