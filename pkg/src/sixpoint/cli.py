"""Command-line entry point: ``sixpoint {solve,ransac,enum,stability,synth}``.

Exit codes: 0 success, 1 usage or configuration error, 2 no solution / no model.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import enum
import json
import sys

import numpy as np

from . import fileio
from .configs import count_by_cameras, count_by_match_type, enumerate_configs
from .errors import InvalidProblem, NoModelFound, SixPointError
from .geometry import (essential_matrix, epipolar_residual, rotation_error, translation_dir_error,
                       translation_error)
from .ransac import RansacConfig, run_ransac
from .solvers import SolverKind, solve_detailed
from .synthetic import (Motion, PCType, Scenario, SceneConfig, kind_pc_type, make_instance,
                        minimal_sample, run_stability_experiment)

EXIT_OK, EXIT_CONFIG, EXIT_NO_SOLUTION = 0, 1, 2
SOLVER_CHOICES = ["auto"] + [k.value for k in SolverKind]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for "no solution" here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _max_residual(pose, rig, pcs) -> float:
    """Largest epipolar residual over unit-normalized bearings."""
    worst = 0.0
    for pc in pcs:
        E = essential_matrix(pose, rig[pc.i], rig[pc.ip])
        r = epipolar_residual(E, pc) / (np.linalg.norm(pc.x) * np.linalg.norm(pc.xp))
        worst = max(worst, abs(r))
    return worst


def _errors(gt, pose) -> dict:
    out = {"rotation_error_deg": rotation_error(gt.R, pose.R),
           "translation_error": translation_error(gt.t, pose.t)}
    try:
        out["translation_dir_error_deg"] = translation_dir_error(gt.t, pose.t)
    except SixPointError:
        out["translation_dir_error_deg"] = None
    return out


def cmd_solve(args) -> int:
    rig, pcs, gt = fileio.load_problem(args.input)
    if len(pcs) != 6:
        raise InvalidProblem(f"expected 6 correspondences, got {len(pcs)}")
    report = solve_detailed(pcs, rig, args.solver)
    poses = []
    for pose in report.poses:
        entry = fileio.pose_to_dict(pose)
        entry["residual"] = _max_residual(pose, rig, pcs)
        if gt is not None:
            entry.update(_errors(gt, pose))
        poses.append(entry)
    fileio.write_json({"solver": report.kind.value, "n_poses": len(poses), "poses": poses}, args.out)
    return EXIT_OK if poses else EXIT_NO_SOLUTION


def cmd_ransac(args) -> int:
    rig, pcs, gt = fileio.load_problem(args.input)
    try:
        cfg = RansacConfig(confidence=args.confidence, max_iterations=args.max_iters,
                           threshold_deg=args.threshold_deg, seed=args.seed,
                           aggregation=args.aggregation, threads=args.threads)
    except ValueError as e:
        raise UsageError(str(e)) from None
    res = run_ransac(pcs, rig, args.solver, cfg)
    doc = {"pose": fileio.pose_to_dict(res.pose), "inliers": res.inliers.tolist(),
           "n_inliers": res.n_inliers, "iterations": res.iterations,
           "outlier_ratio": res.outlier_ratio}
    if gt is not None:
        doc.update(_errors(gt, res.pose))
    fileio.write_json(doc, args.out)
    return EXIT_OK


def cmd_enum(args) -> int:
    if not 1 <= args.edges <= 7:
        raise UsageError("--edges must be between 1 and 7")
    graphs = enumerate_configs(args.edges)
    by_mt = count_by_match_type(graphs)
    doc = {
        "edges": args.edges,
        "total": len(graphs),
        "by_cameras": {str(k): v for k, v in count_by_cameras(graphs).items()},
        "by_match_type": {mt.value: c for mt, c in by_mt.items()},
        "graphs": [dict(zip(("top", "bottom"), g.as_rows())) for g in graphs],
    }
    fileio.write_json(doc, args.out)
    if args.out not in (None, "-"):
        print(f"total {len(graphs)}")
    return EXIT_OK


def cmd_stability(args) -> int:
    kind = SolverKind(args.solver)
    scenario = args.scenario or ("generalized" if kind is SolverKind.GENERIC64 else "rig")
    cfg = SceneConfig(scenario=Scenario(scenario), pc_type=kind_pc_type(kind),
                      motion=Motion(args.motion))
    try:
        res = run_stability_experiment(kind, cfg, trials=args.trials, seed=args.seed,
                                       threads=args.threads)
    except ValueError as e:
        raise UsageError(str(e)) from None
    rows = zip(range(args.trials), res.log_eps_R, res.log_eps_t, res.log_eps_tdir)
    f = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="", encoding="utf-8")
    try:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["trial_id", "eps_R_log10", "eps_t_log10", "eps_tdir_log10"])
        for k, a, b, c in rows:
            w.writerow([k] + [repr(float(v)) for v in (a, b, c)])
    finally:
        if f is not sys.stdout:
            f.close()
    if f is not sys.stdout:
        print(f"median eps_R_log10 {np.nanmedian(res.log_eps_R):.3f}  failures {res.failures}  "
              f"p2 {res.p2:.3f}")
    return EXIT_OK


_ENUM_FIELDS = {"scenario": Scenario, "pc_type": PCType, "motion": Motion}


def scene_config_from_dict(d: dict) -> SceneConfig:
    names = {f.name for f in dataclasses.fields(SceneConfig)}
    unknown = sorted(set(d) - names)
    if unknown:
        raise UsageError(f"unknown scene config keys: {', '.join(unknown)}")
    kw = {}
    for k, v in d.items():
        try:
            kw[k] = _ENUM_FIELDS[k](v) if k in _ENUM_FIELDS else v
        except ValueError:
            raise UsageError(f"bad value for {k}: {v!r}") from None
    return SceneConfig(**kw)


def scene_config_to_dict(cfg: SceneConfig) -> dict:
    return {k: (v.value if isinstance(v, enum.Enum) else v)
            for k, v in dataclasses.asdict(cfg).items()}


def cmd_synth(args) -> int:
    d = {}
    if args.config:
        with open(args.config, encoding="utf-8") as f:
            try:
                d = json.load(f)
            except json.JSONDecodeError as e:
                raise UsageError(f"{args.config}: not valid JSON ({e})") from None
    if args.seed is not None:
        d["seed"] = args.seed
    if args.minimal:
        d.setdefault("pc_type", kind_pc_type(SolverKind(args.minimal)).value)
        if args.minimal == SolverKind.GENERIC64.value:
            d.setdefault("scenario", Scenario.GENERALIZED.value)
    cfg = scene_config_from_dict(d)
    inst = make_instance(cfg)
    pcs = inst.pcs
    if args.minimal:
        pcs = minimal_sample(inst, SolverKind(args.minimal), np.random.default_rng(cfg.seed))
    fileio.write_json(fileio.problem_to_dict(inst.rig, pcs, inst.pose), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sixpoint", description="Six-point relative pose for multi-camera rigs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="minimal solve of a six-correspondence problem file")
    s.add_argument("--input", required=True)
    s.add_argument("--solver", choices=SOLVER_CHOICES, default="auto")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("ransac", help="robust estimation on a problem file")
    r.add_argument("--input", required=True)
    r.add_argument("--solver", choices=SOLVER_CHOICES, default="auto")
    r.add_argument("--threshold-deg", type=float, default=0.1)
    r.add_argument("--confidence", type=float, default=0.99)
    r.add_argument("--max-iters", type=int, default=20000)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--aggregation", choices=["max", "sum"], default="max")
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--out", default="-")
    r.set_defaults(func=cmd_ransac)

    e = sub.add_parser("enum", help="enumerate correspondence configurations")
    e.add_argument("--edges", type=int, required=True)
    e.add_argument("--out", default="-")
    e.set_defaults(func=cmd_enum)

    st = sub.add_parser("stability", help="noise-free stability samples as CSV")
    st.add_argument("--solver", choices=[k.value for k in SolverKind], default="intra")
    st.add_argument("--scenario", choices=[x.value for x in Scenario],
                    help="default: generalized for the generic solver, rig otherwise")
    st.add_argument("--motion", choices=[x.value for x in Motion], default="random")
    st.add_argument("--trials", type=int, default=1000)
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--threads", type=int, default=1)
    st.add_argument("--out", default="-")
    st.set_defaults(func=cmd_stability)

    sy = sub.add_parser("synth", help="write a synthetic problem file")
    sy.add_argument("--config", help="JSON object with scene settings")
    sy.add_argument("--seed", type=int)
    sy.add_argument("--minimal", choices=[k.value for k in SolverKind],
                    help="keep only a six-correspondence sample for this solver")
    sy.add_argument("--out", default="-")
    sy.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_CONFIG
    if getattr(args, "threads", 1) < 1:
        print("sixpoint: error: --threads must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except NoModelFound as e:
        print(f"sixpoint: no model found: {e}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except (UsageError, SixPointError, ValueError, OSError) as e:
        print(f"sixpoint: error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
