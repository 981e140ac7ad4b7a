"""Command-line surface: weighted norms, sparseness reports, implication
sweeps, decaying-flow simulation, and criterion evaluation.

Every command writes a run manifest next to its outputs.  All numeric output
is serialized with 17 significant digits (lossless float round trip); rerun
with identical arguments and seeds reproduces byte-identical reports (the
manifest is the one exception: it carries the wall time).

Exit codes: 0 success, 1 computation error, 2 usage, 3 bad input file,
4 scheduling (criterion window too sparse).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .grid import FieldFileError, load_field
from .morrey import MorreyParams, WeightSpec, classical_morrey, clm_norm, gm_norm, lm_norm
from .nse import (
    CriterionSpec,
    SchedulingError,
    SolverConfig,
    detect_escape_times,
    evaluate_criterion,
    load_trajectory,
    save_trajectory,
    simulate,
)
from .sparseness import (
    InadmissiblePairError,
    admissible_pair,
    semi_mixed,
    sparse_constants,
    superlevel_sets,
    z_alpha_member,
)
from .verify import SweepConfig, summarize, sweep

EXIT_OK = 0
EXIT_COMPUTE = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_SCHEDULING = 4


class UsageError(ValueError):
    pass


def _fmt(x) -> str:
    return format(float(x), ".17g")


def dumps_17g(obj) -> str:
    """Deterministic JSON with every float at 17 significant digits."""
    if isinstance(obj, dict):
        items = [f'{json.dumps(str(k))}: {dumps_17g(v)}' for k, v in obj.items()]
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps_17g(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v) or math.isinf(v):
            return json.dumps(str(v))
        return _fmt(v)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"unserializable {type(obj)!r}")


def _write_json(path: Path, obj) -> Path:
    path.write_text(dumps_17g(obj) + "\n")
    return path


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(outdir: Path, command: str, params: dict, inputs: list,
                    outputs: list, t0: float) -> None:
    manifest = {
        "command": command,
        "params": params,
        "version": __version__,
        "input_hashes": {str(p): _sha256(Path(p)) for p in inputs if Path(p).is_file()},
        "outputs": sorted(str(p) for p in outputs),
        "wall_time_s": time.time() - t0,
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True,
                                                     default=float) + "\n")


def _parse_theta(s: str) -> float:
    return math.inf if s in ("inf", "infinity") else float(s)


def _parse_floats(s: str) -> tuple[float, ...]:
    return tuple(float(v) for v in s.split(",") if v)


def _parse_center(s: str) -> tuple[int, int, int]:
    parts = [int(v) for v in s.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("center must be i,j,k")
    return tuple(parts)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="morrey-sparse",
                                     description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--threads", type=int, default=None,
                        help="worker pool size (env MORREY_SPARSE_THREADS)")
    common.add_argument("--config", default=None,
                        help="JSON file whose entries replace flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", parents=[common], help="weighted Morrey-type norms")
    p.add_argument("--field", required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--theta", type=_parse_theta, default=math.inf)
    p.add_argument("--nu", type=float, default=0.5)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--kind", choices=("lm", "gm", "clm", "classical"), default="gm")
    p.add_argument("--center", type=_parse_center, default=None)
    p.add_argument("--alpha", type=float, default=1.0, help="classical exponent")
    p.add_argument("--r-min", type=float, default=None)
    p.add_argument("--r-max", type=float, default=1.0)
    p.add_argument("--scales", type=int, default=32)

    p = sub.add_parser("sparseness", parents=[common], help="level-set sparseness reports")
    p.add_argument("--field", default=None)
    p.add_argument("--pair-from-delta", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--delta", type=float, default=0.75)
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--z-alpha", type=float, default=None)
    p.add_argument("--c0", type=float, default=2.0)

    p = sub.add_parser("verify", parents=[common], help="implication sweeps")
    p.add_argument("--lemma", choices=("l2", "gm"), default="l2")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--deltas", type=_parse_floats, default=(0.75,))
    p.add_argument("--scales", type=_parse_floats, default=(0.2, 0.5))
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--adversarial", action="store_true")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--thetas", default="inf")
    p.add_argument("--alphas", type=_parse_floats, default=(0.5,))
    p.add_argument("--rho", type=float, default=0.05)
    p.add_argument("--modes", default="curl")

    p = sub.add_parser("simulate", parents=[common], help="decaying-flow run")
    p.add_argument("--ic", default="taylor-green",
                   choices=("shear", "taylor-green", "abc", "random"))
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--snapshot-every", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--kmax", type=int, default=4)

    p = sub.add_parser("criterion", parents=[common], help="dynamic criterion reports")
    p.add_argument("--traj", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--nu-w", type=float, required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--theta", type=_parse_theta, default=math.inf)
    p.add_argument("--eps0", type=float, default=0.1)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--c0", type=float, default=2.0)
    p.add_argument("--field-mode", choices=("u", "omega"), default="u")
    p.add_argument("--window-mode", choices=("velocity", "vorticity"), default="vorticity")
    p.add_argument("--reference", choices=("u", "omega"), default="omega")
    p.add_argument("--at", type=_parse_floats, default=None,
                   help="evaluate at these reference times")
    p.add_argument("--escape", choices=("u", "omega"), default=None,
                   help="evaluate at detected escape times of this norm")
    return parser


def _apply_config(args: argparse.Namespace) -> None:
    if getattr(args, "config", None):
        overrides = json.loads(Path(args.config).read_text())
        for key, value in overrides.items():
            attr = key.replace("-", "_")
            if not hasattr(args, attr):
                raise ValueError(f"unknown config key {key!r}")
            setattr(args, attr, value)


def _resolve_threads(args: argparse.Namespace) -> int:
    if getattr(args, "threads", None):
        return max(1, args.threads)
    env = os.environ.get("MORREY_SPARSE_THREADS")
    return max(1, int(env)) if env else 1


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_norm(args) -> int:
    t0 = time.time()
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    f = load_field(args.field)
    if not 0.0 <= args.rho < 1.0:
        raise UsageError(f"rho must lie in [0, 1), got {args.rho}")
    grid = f.grid
    report: dict = {"kind": args.kind, "params": {
        "p": args.p, "theta": "inf" if math.isinf(args.theta) else args.theta,
        "nu": args.nu, "rho": args.rho}, "quadrature_nodes": args.scales}
    if args.kind == "classical":
        r_min = args.r_min if args.r_min is not None else 2 * grid.spacing
        res = classical_morrey(f, args.p, args.alpha, r_min, args.r_max, count=args.scales)
        report.update(norm=res.value, argmax_center=list(res.center), argmax_r=res.scale)
    else:
        w = WeightSpec(nu=args.nu, rho=args.rho, theta=args.theta)
        params = MorreyParams.default(grid, w, p=args.p, count=args.scales,
                                      r_max=args.r_max)
        if args.kind == "gm":
            res = gm_norm(f, params)
            report.update(norm=res.value, argmax_center=list(res.center),
                          argmax_r=res.scale if res.scale is not None else "none")
        else:
            center = args.center or (0, 0, 0)
            fn = lm_norm if args.kind == "lm" else clm_norm
            report.update(norm=fn(f, params, center), center=list(center))
    out = _write_json(outdir / "norm_report.json", report)
    _write_manifest(outdir, "norm", vars_no_private(args), [args.field], [out], t0)
    return EXIT_OK


def cmd_sparseness(args) -> int:
    t0 = time.time()
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    outputs = []
    if args.pair_from_delta is not None:
        pair = admissible_pair(args.pair_from_delta)
        consts = sparse_constants(pair)
        report = {"delta": pair.delta, "lambda": pair.lam, "h": pair.h,
                  "kappa": consts.kappa, "cstar": consts.cstar, "eps": consts.eps,
                  "cal": consts.cal}
        outputs.append(_write_json(outdir / "pair_report.json", report))
        print(f"delta={pair.delta} -> lambda={pair.lam:.6f} (kappa={consts.kappa:.6f})")
        if args.field is None:
            _write_manifest(outdir, "sparseness", vars_no_private(args), [], outputs, t0)
            return EXIT_OK
    if args.field is None:
        raise UsageError("either --field or --pair-from-delta is required")
    f = load_field(args.field)
    lam = args.lam
    if lam is None:
        lam = admissible_pair(args.delta).lam
    sets = superlevel_sets(f, lam)
    set_reports = []
    for label, S in sets.items():
        res = semi_mixed(S, args.r, args.delta)
        set_reports.append({"set": label, "r": args.r, "delta": args.delta,
                            "max_density": res.max_density,
                            "witness": list(res.witness), "ok": res.ok})
    report = {"lambda": lam, "sets": set_reports}
    if args.z_alpha is not None:
        pair = admissible_pair(args.delta)
        ok, witnesses = z_alpha_member(f, args.z_alpha, pair, args.c0)
        report["z_alpha"] = {"alpha": args.z_alpha, "c0": args.c0, "ok": ok,
                             "witnesses": [list(wv) for wv in witnesses]}
    outputs.append(_write_json(outdir / "sparseness_report.json", report))
    _write_manifest(outdir, "sparseness", vars_no_private(args), [args.field], outputs, t0)
    return EXIT_OK


def cmd_verify(args) -> int:
    t0 = time.time()
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    thetas = tuple(_parse_theta(s) for s in str(args.thetas).split(","))
    modes = tuple(str(args.modes).split(","))
    cfg = SweepConfig(lemma=args.lemma, n=args.n, deltas=tuple(args.deltas),
                      scales=tuple(args.scales), seeds=tuple(range(args.seeds)),
                      kmax=args.kmax, adversarial=args.adversarial, p=args.p,
                      thetas=thetas, alphas=tuple(args.alphas), rho=args.rho,
                      modes=modes)
    reports = sweep(cfg, threads=args._threads)
    summary = summarize(reports)
    rows = [{"premise_lhs": r.premise_lhs, "premise_rhs": r.premise_rhs,
             "premise_holds": r.premise_holds, "conclusion_holds": r.conclusion_holds,
             "marginal": r.marginal, "degenerate": r.degenerate,
             "verdict": r.verdict, "per_set_densities": list(r.per_set_densities),
             "params": r.params} for r in reports]
    out_json = _write_json(outdir / "verify_reports.json", {
        "summary": {"total": summary.total, "premise_holding": summary.premise_holding,
                    "degenerate": summary.degenerate, "marginal": summary.marginal,
                    "violations": summary.violations,
                    "marginal_violations": summary.marginal_violations},
        "reports": rows})
    csv_path = outdir / "verify_reports.csv"
    with open(csv_path, "w") as fh:
        fh.write("premise_lhs,premise_rhs,premise_holds,conclusion_holds,"
                 "marginal,degenerate,verdict,delta,r\n")
        for r in reports:
            fh.write(",".join([_fmt(r.premise_lhs), _fmt(r.premise_rhs),
                               str(r.premise_holds), str(r.conclusion_holds),
                               str(r.marginal), str(r.degenerate), str(r.verdict),
                               _fmt(r.params["delta"]), _fmt(r.params["r"])]) + "\n")
    _write_manifest(outdir, "verify", vars_no_private(args), [], [out_json, csv_path], t0)
    print(f"sweep: {summary.total} reports, {summary.premise_holding} premise-holding, "
          f"{summary.violations} violations")
    return EXIT_OK if summary.violations == 0 and summary.marginal_violations == 0 \
        else EXIT_COMPUTE


def cmd_simulate(args) -> int:
    t0 = time.time()
    outdir = Path(args.out)
    cfg = SolverConfig(n=args.n, dt=args.dt, t_end=args.t_end, ic=args.ic,
                       ic_params={"amplitude": args.amplitude, "kmax": args.kmax},
                       snapshot_every=args.snapshot_every, seed=args.seed)
    traj = simulate(cfg)
    written = save_trajectory(traj, outdir)
    _write_manifest(outdir, "simulate", vars_no_private(args), [], written, t0)
    print(f"simulated {args.ic} to t={args.t_end} ({len(traj.snapshots)} snapshots)")
    return EXIT_OK


def cmd_criterion(args) -> int:
    t0 = time.time()
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    traj = load_trajectory(args.traj)
    spec = CriterionSpec(alpha=args.alpha, beta=args.beta, nu_w=args.nu_w, p=args.p,
                         theta=args.theta, c=args.c, c0=args.c0, eps0=args.eps0,
                         field_mode=args.field_mode, window_mode=args.window_mode,
                         reference=args.reference)
    if args.at is not None:
        times = list(args.at)
    elif args.escape is not None:
        times = detect_escape_times(traj.series, args.escape)
        if not times:
            print("no escape times detected (decaying flow); use --at")
    else:
        times = [float(traj.series["t"][0])]
    evaluated = [(t, evaluate_criterion(traj, t, spec)) for t in times]
    reports = [{
        "t_ref": t, "s_star": rep.s_star, "lhs": rep.lhs, "rhs": rep.rhs,
        "exponent": rep.exponent, "satisfied": rep.satisfied,
        "scale_window": list(rep.scale_window),
        "witness_center": list(rep.witness[0]),
        "witness_r": rep.witness[1] if rep.witness[1] is not None else "none",
        "eta_clipped": rep.eta_clipped, "window": list(rep.window),
    } for t, rep in evaluated]
    out_json = _write_json(outdir / "criterion_report.json", {"reports": reports})
    csv_path = outdir / "criterion.csv"
    with open(csv_path, "w") as fh:
        fh.write("t_ref,s,eta,criterion_lhs,criterion_rhs,satisfied\n")
        for t, rep in evaluated:
            for (s, eta, lhs, rhs, sat) in rep.rows:
                fh.write(",".join([_fmt(t), _fmt(s), _fmt(eta), _fmt(lhs), _fmt(rhs),
                                   str(sat)]) + "\n")
    # merged time series: criterion columns filled at window snapshots,
    # blank everywhere else
    by_time: dict[float, tuple] = {}
    for _, rep in evaluated:
        for row in rep.rows:
            by_time[row[0]] = row
    series_path = outdir / "series_with_criterion.csv"
    with open(series_path, "w") as fh:
        fh.write("t,u_sup,omega_sup,energy,enstrophy,eta,criterion_lhs,"
                 "criterion_rhs,satisfied\n")
        ts = traj.series["t"]
        for i in range(ts.size):
            base = [_fmt(traj.series[c][i]) for c in
                    ("t", "u_sup", "omega_sup", "energy", "enstrophy")]
            match = next((row for tt, row in by_time.items()
                          if abs(tt - ts[i]) < 1e-12), None)
            if match is None:
                base += ["", "", "", ""]
            else:
                base += [_fmt(match[1]), _fmt(match[2]), _fmt(match[3]), str(match[4])]
            fh.write(",".join(base) + "\n")
    _write_manifest(outdir, "criterion", vars_no_private(args), [],
                    [out_json, csv_path, series_path], t0)
    return EXIT_OK


def vars_no_private(args) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else v)
            for k, v in vars(args).items() if not k.startswith("_")}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors already
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        _apply_config(args)
        args._threads = _resolve_threads(args)
        handler = {
            "norm": cmd_norm,
            "sparseness": cmd_sparseness,
            "verify": cmd_verify,
            "simulate": cmd_simulate,
            "criterion": cmd_criterion,
        }[args.command]
        return handler(args)
    except (FileNotFoundError, FieldFileError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SchedulingError as exc:
        print(f"scheduling error: {exc}", file=sys.stderr)
        return EXIT_SCHEDULING
    except (UsageError, InadmissiblePairError, argparse.ArgumentTypeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
