"""Command-line front end.

    circumcentered iterate  --config run.json
    circumcentered classify --w1 '{"type": "halfspace", ...}' --w2 ... --x '[...]'
    circumcentered cco      --points '[[0, 0], [2, 0], [0, 2]]'
    circumcentered verify   --theorem S2_three_step --trials 1000 --seed 42
    circumcentered perturb  --config run.json --eps 0.1

Exit codes: 0 ok, 1 violations found, 2 bad input, 3 infeasible or empty
set, 4 dimension mismatch, 5 unknown theorem.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import geometry as geo
from .ccmap import COMPOSED_PREFIX, ID_PREFIXED, PLAIN, OperatorFamily, iterate, projector, reflector
from .circumcenter import circumcenter
from .errors import (
    CaseNotCovered,
    CircumcenteredError,
    DimensionMismatch,
    EmptySet,
    InfeasibleIntersection,
    InfeasiblePair,
    PreconditionViolated,
    UnknownTheorem,
)
from .geometry import Ball, Halfspace, Hyperplane
from .halfspace_analysis import COMPOSED, DIRECT, classify_pair, explain_pair
from .harness import ALL, run_theorem_suite, step_counts_csv
from .oracles import oracle_proj_polyhedron, perturb_composed, perturb_plain
from .tolerances import MAX_ITER, STOP_TOL

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_DIMENSION = 4
EXIT_UNKNOWN_THEOREM = 5

FAMILIES = (PLAIN, ID_PREFIXED, COMPOSED_PREFIX)
OPERATORS = {"reflector": reflector, "projector": projector}
_RANDOM = re.compile(r"^random\((\d+)\)$")


class ConfigError(ValueError):
    pass


def random_start(seed: int, dim: int) -> np.ndarray:
    """x0 for "random(seed)": dim standard normals from numpy's default_rng(seed)."""
    return np.random.default_rng(seed).standard_normal(dim)


@dataclass
class RunConfig:
    dimension: int
    sets: list
    family: str = ID_PREFIXED
    operators: list = field(default_factory=list)
    x0: object = "random(0)"
    max_iter: int = MAX_ITER
    stop_tol: float = STOP_TOL
    target: object = "oracle"
    output: Optional[str] = None

    @classmethod
    def from_json(cls, obj: dict) -> "RunConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(obj) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            dim = obj["dimension"]
            raw_sets = obj["sets"]
        except KeyError as exc:
            raise ConfigError(f"missing key {exc}") from exc
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
            raise ConfigError("dimension must be a positive integer")
        if not isinstance(raw_sets, list) or not raw_sets:
            raise ConfigError("sets must be a nonempty list")
        try:
            sets = [geo.set_from_json(s) for s in raw_sets]
        except DimensionMismatch:
            raise
        except (KeyError, TypeError, ValueError, PreconditionViolated) as exc:
            raise ConfigError(f"bad set: {exc}") from exc
        cfg = cls(dimension=dim, sets=sets)
        cfg.family = obj.get("family", ID_PREFIXED)
        if cfg.family not in FAMILIES:
            raise ConfigError(f"family must be one of {FAMILIES}")
        cfg.operators = list(obj.get("operators", ["reflector"] * len(sets)))
        if len(cfg.operators) != len(sets) or any(op not in OPERATORS for op in cfg.operators):
            raise ConfigError("operators must list 'reflector' or 'projector' once per set")
        cfg.x0 = obj.get("x0", "random(0)")
        if isinstance(cfg.x0, str):
            if not _RANDOM.match(cfg.x0):
                raise ConfigError("x0 must be a list of numbers or 'random(<seed>)'")
        else:
            cfg.x0 = _vector(cfg.x0, "x0")
        cfg.max_iter = obj.get("max_iter", MAX_ITER)
        cfg.stop_tol = obj.get("stop_tol", STOP_TOL)
        if not isinstance(cfg.max_iter, int) or cfg.max_iter < 0:
            raise ConfigError("max_iter must be a nonnegative integer")
        if not isinstance(cfg.stop_tol, (int, float)) or cfg.stop_tol < 0:
            raise ConfigError("stop_tol must be a nonnegative number")
        cfg.stop_tol = float(cfg.stop_tol)
        cfg.target = obj.get("target", "oracle")
        if cfg.target not in ("oracle", None):
            cfg.target = _vector(cfg.target, "target")
        cfg.output = obj.get("output")
        if cfg.output is not None and not isinstance(cfg.output, str):
            raise ConfigError("output must be a path")
        vectors = [cfg.x0] if not isinstance(cfg.x0, str) else []
        if not isinstance(cfg.target, (str, type(None))):
            vectors.append(cfg.target)
        for C in sets:
            if geo.set_dim(C) != dim:
                raise DimensionMismatch(f"a set has dimension {geo.set_dim(C)}, expected {dim}")
        for v in vectors:
            if v.shape[0] != dim:
                raise DimensionMismatch(f"a vector has dimension {v.shape[0]}, expected {dim}")
        return cfg

    def to_json(self) -> dict:
        def enc(v):
            return v.tolist() if isinstance(v, np.ndarray) else v

        return {
            "dimension": self.dimension,
            "sets": [geo.set_to_json(C) for C in self.sets],
            "family": self.family,
            "operators": list(self.operators),
            "x0": enc(self.x0),
            "max_iter": self.max_iter,
            "stop_tol": self.stop_tol,
            "target": enc(self.target),
            "output": self.output,
        }

    def start(self) -> np.ndarray:
        if isinstance(self.x0, str):
            return random_start(int(_RANDOM.match(self.x0).group(1)), self.dimension)
        return np.asarray(self.x0, dtype=float)

    def family_spec(self) -> OperatorFamily:
        ops = [OPERATORS[name](C) for name, C in zip(self.operators, self.sets)]
        return OperatorFamily.build(self.family, ops)


def _vector(v, name: str) -> np.ndarray:
    if not isinstance(v, list) or not v or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in v):
        raise ConfigError(f"{name} must be a nonempty list of numbers")
    return np.asarray(v, dtype=float)


def _load_json(text_or_path: str):
    """Parse an inline JSON value, or the contents of a file when given a path."""
    stripped = text_or_path.strip()
    if stripped[:1] in "{[" or stripped[:1].isdigit() or stripped[:1] == "-":
        return json.loads(stripped)
    return json.loads(Path(text_or_path).read_text(encoding="utf-8"))


def load_config(path: str) -> RunConfig:
    return RunConfig.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def _check_nonempty(cfg: RunConfig) -> None:
    for C in cfg.sets:
        if isinstance(C, (Hyperplane, Halfspace)) and C.degeneracy == geo.EMPTY:
            raise EmptySet(f"{type(C).__name__.lower()} with u = 0 is empty")


def _resolve_target(cfg: RunConfig, x0: np.ndarray):
    if cfg.target is None:
        return None
    if isinstance(cfg.target, np.ndarray):
        return cfg.target
    if any(isinstance(C, Ball) for C in cfg.sets):
        return None
    return oracle_proj_polyhedron(cfg.sets, x0)


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


# Subcommands ----------------------------------------------------------------

def cmd_iterate(args) -> int:
    cfg = load_config(args.config)
    _check_nonempty(cfg)
    x0 = cfg.start()
    target = _resolve_target(cfg, x0)
    trace = iterate(cfg.family_spec(), x0, max_iter=cfg.max_iter, stop_tol=cfg.stop_tol, target=target)
    text = trace.to_csv()
    out = args.output or cfg.output
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_classify(args) -> int:
    W1 = geo.set_from_json(_load_json(args.w1))
    W2 = geo.set_from_json(_load_json(args.w2))
    if not (isinstance(W1, Halfspace) and isinstance(W2, Halfspace)):
        raise ConfigError("classify takes two halfspaces")
    x = _vector(_load_json(args.x), "x")
    geo.check_same_dim([W1, W2], x)
    c = classify_pair(W1, W2, x)
    out = {"classification": c.to_json(), "predictions": {}}
    for kind in (DIRECT, COMPOSED):
        try:
            pred = explain_pair(W1, W2, kind, x)
            out["predictions"][kind] = {"case": pred.case, "boundary": pred.boundary, **pred.outcome.to_json()}
        except CaseNotCovered as exc:
            out["predictions"][kind] = {"case": None, "error": str(exc)}
    _emit(out)
    return EXIT_OK


def cmd_cco(args) -> int:
    pts = _load_json(args.points)
    if not isinstance(pts, list) or not pts:
        raise ConfigError("points must be a nonempty list of vectors")
    points = [_vector(p, "point") for p in pts]
    _emit(circumcenter(points).to_json())
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.trials < 0:
        raise ConfigError("trials must be nonnegative")
    report = run_theorem_suite(args.theorem, args.trials, args.seed, workers=args.workers)
    _emit(report.to_json())
    if args.steps_csv and args.theorem != ALL:
        Path(args.steps_csv).write_text(step_counts_csv(args.theorem, args.trials, args.seed), encoding="utf-8")
    return EXIT_OK if report.ok else EXIT_VIOLATIONS


def cmd_perturb(args) -> int:
    cfg = load_config(args.config)
    _check_nonempty(cfg)
    if not all(isinstance(C, Hyperplane) for C in cfg.sets):
        raise ConfigError("perturb takes hyperplanes only")
    x0 = cfg.start()
    fn = perturb_composed if cfg.family == COMPOSED_PREFIX else perturb_plain
    y = fn(cfg.sets, x0, args.eps)
    _emit({"x": x0.tolist(), "y": y.tolist(), "distance": float(np.linalg.norm(y - x0)), "eps": args.eps})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="circumcentered", description="Circumcenter operators and circumcentered iterations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("iterate", help="run an iteration and write its trace as CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--output", help="overrides the config's output path")
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("classify", help="classify a halfspace pair and predict CC_S x")
    p.add_argument("--w1", required=True)
    p.add_argument("--w2", required=True)
    p.add_argument("--x", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("cco", help="circumcenter of a point list")
    p.add_argument("--points", required=True)
    p.set_defaults(func=cmd_cco)

    p = sub.add_parser("verify", help="run a theorem campaign")
    p.add_argument("--theorem", required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--steps-csv", help="write per-trial step counts here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("perturb", help="move x0 to a generic point with the same projection")
    p.add_argument("--config", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.set_defaults(func=cmd_perturb)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except UnknownTheorem as exc:
        print(f"error: unknown theorem {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_THEOREM
    except DimensionMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except (EmptySet, InfeasibleIntersection, InfeasiblePair) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, json.JSONDecodeError, OSError, KeyError, TypeError, ValueError, CircumcenteredError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
