"""Minimal solver frontends and six-correspondence match-type classification."""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, replace

from .equations import SixPointProblem, build_equations, detect_ray_bundle_groups
from .errors import ConfigurationMismatch, InvalidProblem, SolveFailure
from .geometry import RigPose
from .roots import (DEFAULT_DEGREE, SolutionSet, SolverConfig, assemble_poses, solve_system,
                    without_ray_bundles)


class SolverKind(enum.Enum):
    GENERIC64 = "generic"
    INTER56 = "inter56"
    INTER48 = "inter48"
    INTRA48 = "intra"


class MatchType(enum.Enum):
    SIX = "6∪φ"
    FIVE = "5∪x"
    FOUR = "4∪x"
    THREE_THREE = "3∪3"
    THREE = "3∪x"
    SINGLES = "∪ᵢxᵢ"


# isolated complex solution counts per match type for six correspondences
MATCH_TYPE_SOLUTIONS = {
    MatchType.SIX: 0,
    MatchType.FIVE: 20,
    MatchType.FOUR: 40,
    MatchType.THREE_THREE: 48,
    MatchType.THREE: 56,
    MatchType.SINGLES: 64,
}


def match_type_from_multiplicities(mult) -> MatchType:
    m = sorted(mult, reverse=True)
    if not m:
        raise ValueError("empty configuration")
    if m[0] >= 6:
        return MatchType.SIX
    if m[0] == 5:
        return MatchType.FIVE
    if m[0] == 4:
        return MatchType.FOUR
    if m[0] == 3:
        return MatchType.THREE_THREE if len(m) > 1 and m[1] == 3 else MatchType.THREE
    return MatchType.SINGLES


def classify_configuration(pcs) -> MatchType:
    """Match type of six correspondences from the multiplicities of their camera pairs."""
    pcs = list(pcs)
    if len(pcs) != 6:
        raise InvalidProblem(f"expected 6 correspondences, got {len(pcs)}")
    return match_type_from_multiplicities(Counter(pc.pair for pc in pcs).values())


def _bundle_kinds(problem: SixPointProblem):
    groups = detect_ray_bundle_groups(problem)
    return groups, [g.pair[0] == g.pair[1] for g in groups]


def auto_kind(pcs, rig) -> SolverKind:
    """Specific solvers take priority; inter56 is preferred over inter48."""
    problem = SixPointProblem(rig, pcs)
    groups, intra = _bundle_kinds(problem)
    if len(groups) == 2 and all(g.size == 3 for g in groups):
        if all(intra):
            return SolverKind.INTRA48
        if not any(intra):
            return SolverKind.INTER56
    return SolverKind.GENERIC64


def _check_kind(problem: SixPointProblem, kind: SolverKind):
    mt = classify_configuration(problem.pcs)
    if mt in (MatchType.SIX, MatchType.FIVE):
        raise ConfigurationMismatch(f"match type {mt.value} is not supported by the six-point solvers")
    if kind is SolverKind.GENERIC64:
        return
    groups, intra = _bundle_kinds(problem)
    if mt is not MatchType.THREE_THREE or len(groups) != 2:
        raise ConfigurationMismatch(f"{kind.value} needs two ray bundles of three, got {mt.value}")
    if kind is SolverKind.INTRA48 and not all(intra):
        raise ConfigurationMismatch("intra solver needs both ray bundles inside one camera")
    if kind in (SolverKind.INTER56, SolverKind.INTER48) and any(intra):
        raise ConfigurationMismatch("inter solver needs both ray bundles across two cameras")


@dataclass
class SolveReport:
    kind: SolverKind
    poses: list
    solutions: SolutionSet


# 3+3 systems already separate their roots at expansion degree 7
_LOW_DEGREE_KINDS = (SolverKind.INTER56, SolverKind.INTER48, SolverKind.INTRA48)


def _solve_with_fallback(system, kind, cfg):
    if cfg.degree is not None or cfg.backend != "macaulay" or kind not in _LOW_DEGREE_KINDS:
        return solve_system(system, cfg)
    try:
        return solve_system(system, replace(cfg, degree=7))
    except SolveFailure:
        return solve_system(system, replace(cfg, degree=DEFAULT_DEGREE))


def solve_detailed(pcs, rig, kind: SolverKind | str = "auto",
                   cfg: SolverConfig | None = None) -> SolveReport:
    pcs, rig = tuple(pcs), tuple(rig)
    problem = SixPointProblem(rig, pcs)
    if isinstance(kind, str):
        kind = auto_kind(pcs, rig) if kind == "auto" else SolverKind(kind)
    _check_kind(problem, kind)
    system = build_equations(problem)
    if kind is SolverKind.INTER56 or (kind is SolverKind.GENERIC64 and not system.groups):
        system = without_ray_bundles(system)
    # a generic-routed configuration with ray bundles keeps its bundle
    # equations: an intra bundle leaves the minors alone with a curve of roots
    sols = _solve_with_fallback(system, kind, cfg or SolverConfig())
    return SolveReport(kind, assemble_poses(system, sols), sols)


def solve(pcs, rig, kind: SolverKind | str = "auto", cfg: SolverConfig | None = None) -> list[RigPose]:
    """All real relative poses consistent with six correspondences."""
    return solve_detailed(pcs, rig, kind, cfg).poses
