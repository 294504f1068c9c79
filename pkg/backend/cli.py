#!/usr/bin/env python3
"""
Command-line interface for hexfam.

    hexfam generate KIND [key=value ...] [--out FILE]
    hexfam verify FILE [--relation R]
    hexfam classify FILE I J [--relation R]
    hexfam pipeline FILE [--c C] [--cos-alpha X] [--phi auto|q] [--seed S] [--direction x,y,z]
    hexfam search FILE --k K [--relation R] [--node-budget N] [--time-budget S]
    hexfam export FILE --format svg|obj [--direction x,y,z] [--out FILE]
    hexfam stats FILE [--c C] [--cos-alpha X]

Reports go to stdout as YAML, logs to stderr. Exit codes: 0 success or
certified clean, 1 a violation or bad pair was found, 2 invalid input,
3 no certificate (inconclusive pipeline, exhausted budget).
"""

import argparse
import logging
import sys
from collections import Counter
from enum import Enum, IntEnum
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import yaml

from classify import (
    Relation,
    classify_pair,
    intersects_badly,
    is_almost_disjoint,
    is_vertex_or_edge_compatible,
    relation_holds,
    verify_family,
)
from config import config
from constructions import (
    almost_disjoint_example,
    bad_pair_example,
    christmas_tree,
    fat_hexagon_stack,
    parse_vector,
    prism_quadrilaterals,
)
from exporters import export_obj, export_svg
from extremal_search import (
    BoundViolationError,
    BudgetExceededError,
    SearchProblem,
    check_paper_bounds,
    link_planarity,
    max_family,
    point_incidence_bounds,
)
from family_document import FamilyDocument
from geom_kernel import Point3, to_scalar
from models import Family, FatnessParams, is_fat_hexagon
from pipeline import (
    PipelineOutcome,
    PipelineSettings,
    choose_projection,
    projection_for_direction,
    run_pipeline,
)

logger = logging.getLogger("hexfam")


class ExitStatus(IntEnum):
    OK = 0
    FINDING = 1
    INVALID_INPUT = 2
    NO_CERTIFICATE = 3


def _plain(value: Any) -> Any:
    """Reduce a report to YAML-safe builtins"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, Point3):
        return value.to_strings()
    return value


def _emit(data: Dict[str, Any]) -> None:
    sys.stdout.write(yaml.safe_dump(_plain(data), sort_keys=False, default_flow_style=None))


def _load_family(path: str) -> Family:
    document = FamilyDocument.load(path)
    return document.to_family()


def _write_text(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text)


def parse_params(tokens: List[str]) -> Dict[str, str]:
    params = {}
    for token in tokens:
        if "=" not in token:
            raise ValueError(f"Expected key=value, got {token!r}")
        key, value = token.split("=", 1)
        params[key.strip()] = value.strip()
    return params


def _integer(params: Dict[str, str], key: str, default: Optional[int] = None) -> int:
    if key not in params:
        if default is None:
            raise ValueError(f"Missing required parameter {key}=...")
        return default
    try:
        return int(params[key])
    except ValueError:
        raise ValueError(f"Parameter {key} must be an integer, got {params[key]!r}")


def _generate_christmas_tree(params):
    m = _integer(params, "m")
    return christmas_tree(m), {"m": str(m)}


def _generate_prism(params):
    m = _integer(params, "m")
    seed = _integer(params, "seed", 0)
    v = parse_vector(params.get("v", "0,0,1"))
    return prism_quadrilaterals(m, seed, v), {"m": str(m), "seed": str(seed), "v": ",".join(v.to_strings())}


def _generate_hexagon_stack(params):
    count = _integer(params, "count", 3)
    seed = _integer(params, "seed", 0)
    c = to_scalar(params.get("c", "2"))
    cos_alpha = to_scalar(params.get("cos_alpha", "1/2"))
    variant = params.get("variant", "stack")
    if variant not in ("stack", "disjoint"):
        raise ValueError(f"variant must be 'stack' or 'disjoint', got {variant!r}")
    family = fat_hexagon_stack(count, FatnessParams.from_c(c, cos_alpha), seed, disjoint=variant == "disjoint")
    return family, {
        "count": str(count), "seed": str(seed), "c": str(c), "cos_alpha": str(cos_alpha), "variant": variant,
    }


GENERATORS: Dict[str, Callable] = {
    "christmas-tree": _generate_christmas_tree,
    "prism-quads": _generate_prism,
    "hexagon-stack": _generate_hexagon_stack,
    "bad-pair": lambda params: (bad_pair_example(), {}),
    "almost-disjoint": lambda params: (almost_disjoint_example(), {}),
}
GENERATOR_KEYS = {
    "christmas-tree": {"m"},
    "prism-quads": {"m", "seed", "v"},
    "hexagon-stack": {"count", "seed", "c", "cos_alpha", "variant"},
    "bad-pair": set(),
    "almost-disjoint": set(),
}


def cmd_generate(args) -> ExitStatus:
    params = parse_params(args.params)
    unknown = set(params) - GENERATOR_KEYS[args.kind]
    if unknown:
        raise ValueError(f"Unknown parameter(s) for {args.kind}: {', '.join(sorted(unknown))}")
    family, metadata = GENERATORS[args.kind](params)
    metadata = {"construction": args.kind, **metadata}
    document = FamilyDocument.from_family(family, metadata)
    summary = {"construction": args.kind, "points": len(family.point_set), "polygons": len(family)}
    if args.out:
        document.save(args.out)
        _emit({**summary, "out": args.out})
    else:
        # stdout carries the document itself
        sys.stdout.write(document.serialize())
        logger.info(f"Generated {summary['polygons']} polygons on {summary['points']} points")
    return ExitStatus.OK


def cmd_verify(args) -> ExitStatus:
    family = _load_family(args.file)
    report = verify_family(family, Relation.parse(args.relation), threads=args.threads)
    _emit(report.to_dict())
    return ExitStatus.OK if report.ok else ExitStatus.FINDING


def cmd_classify(args) -> ExitStatus:
    family = _load_family(args.file)
    for index in (args.i, args.j):
        if not 0 <= index < len(family):
            raise IndexError(f"Polygon index {index} out of range for {len(family)} polygons")
    cls = classify_pair(family.polygons[args.i], family.polygons[args.j])
    _emit({
        "pair": [args.i, args.j],
        "classification": cls.to_dict(),
        "almost_disjoint": is_almost_disjoint(cls),
        "vertex_or_edge": is_vertex_or_edge_compatible(cls),
        "intersects_badly": intersects_badly(cls),
    })
    relation = Relation.parse(args.relation)
    return ExitStatus.OK if relation_holds(cls, relation) else ExitStatus.FINDING


def _fatness_params(args) -> FatnessParams:
    return FatnessParams.from_c(to_scalar(args.c), to_scalar(args.cos_alpha))


def cmd_pipeline(args) -> ExitStatus:
    family = _load_family(args.file)
    overrides: Dict[str, Any] = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.phi is not None:
        overrides["phi"] = None if args.phi == "auto" else to_scalar(args.phi)
    if args.direction:
        overrides["direction"] = parse_vector(args.direction)
    settings = PipelineSettings.from_config(config.get_pipeline_config(), **overrides)

    report = run_pipeline(family, _fatness_params(args), settings)
    _emit(report.to_dict())
    return {
        PipelineOutcome.WITNESS: ExitStatus.FINDING,
        PipelineOutcome.CERTIFIED_CLEAN: ExitStatus.OK,
        PipelineOutcome.INCONCLUSIVE: ExitStatus.NO_CERTIFICATE,
    }[report.outcome]


def cmd_search(args) -> ExitStatus:
    document = FamilyDocument.load(args.file)
    problem = SearchProblem(
        point_set=document.point_set(),
        k=args.k,
        relation=Relation.parse(args.relation),
        node_budget=args.node_budget,
        time_budget_seconds=args.time_budget,
    )
    try:
        result = max_family(problem)
    except BudgetExceededError as e:
        _emit({"search": e.best_result.to_dict(), "error": str(e)})
        return ExitStatus.NO_CERTIFICATE

    output: Dict[str, Any] = {"search": result.to_dict()}
    status = ExitStatus.OK
    try:
        output["bounds"] = check_paper_bounds(result).to_dict()
    except BoundViolationError as e:
        output["bounds"] = e.report.to_dict()
        output["error"] = str(e)
        status = ExitStatus.FINDING
    if problem.k == 3:
        output["incidences"] = point_incidence_bounds(result.witness_family, problem.relation).to_dict()
        output["link_planarity"] = link_planarity(result.witness_family)
    _emit(output)
    return status


def cmd_export(args) -> ExitStatus:
    family = _load_family(args.file)
    export_config = config.get_export_config()
    if args.format == "obj":
        _write_text(export_obj(family, args.digits or export_config.significant_digits), args.out)
        return ExitStatus.OK

    if args.direction:
        projection = projection_for_direction(family, parse_vector(args.direction))
    else:
        projection = choose_projection(family, seed=config.get_pipeline_config().seed)
    _write_text(export_svg(family, projection, args.size or export_config.svg_size), args.out)
    return ExitStatus.OK


def cmd_stats(args) -> ExitStatus:
    family = _load_family(args.file)
    incidences = family.point_incidences()
    output: Dict[str, Any] = {
        "points": len(family.point_set),
        "polygons": len(family),
        "vertex_counts": dict(sorted(Counter(p.k for p in family.polygons).items())),
        "distinct_planes": len({p.plane for p in family.polygons}),
        "max_point_incidence": max(incidences, default=0),
    }
    if len(family.point_set):
        coords = [p.as_tuple() for p in family.point_set]
        output["bounding_box"] = {
            "min": [min(c[axis] for c in coords) for axis in range(3)],
            "max": [max(c[axis] for c in coords) for axis in range(3)],
        }
    if len(family) and all(p.k == 3 for p in family.polygons):
        output["links_planar"] = all(link_planarity(family).values())
    if family.is_hexagon_family() and len(family):
        params = _fatness_params(args)
        output["fat_hexagons"] = sum(1 for h in family.polygons if is_fat_hexagon(h, params).is_fat)
        output["fatness_params"] = params.to_dict()
    _emit(output)
    return ExitStatus.OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help="Worker threads (default: HEXFAM_THREADS or 1)")
    common.add_argument("--verbose", action="store_true", help="Enable verbose logging")

    parser = argparse.ArgumentParser(
        prog="hexfam",
        description="Exact geometry of polygon families in 3-space",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser("generate", parents=[common], help="Write a constructed family")
    generate.add_argument("kind", choices=sorted(GENERATORS))
    generate.add_argument("params", nargs="*", help="key=value parameters")
    generate.add_argument("--out", help="Output file (default: stdout)")
    generate.set_defaults(handler=cmd_generate)

    verify = commands.add_parser("verify", parents=[common], help="Check every pair of a family")
    verify.add_argument("file")
    verify.add_argument("--relation", default=Relation.NO_BAD.value, choices=[r.value for r in Relation])
    verify.set_defaults(handler=cmd_verify)

    classify = commands.add_parser("classify", parents=[common], help="Classify one pair of polygons")
    classify.add_argument("file")
    classify.add_argument("i", type=int)
    classify.add_argument("j", type=int)
    classify.add_argument("--relation", default=Relation.NO_BAD.value, choices=[r.value for r in Relation])
    classify.set_defaults(handler=cmd_classify)

    pipeline = commands.add_parser("pipeline", parents=[common], help="Search a hexagon family for a bad pair")
    pipeline.add_argument("file")
    pipeline.add_argument("--c", default="2", help="Side-ratio bound c (default: 2)")
    pipeline.add_argument("--cos-alpha", default="1/2", help="Angle bound as cos(alpha) (default: 1/2)")
    pipeline.add_argument("--phi", default=None, help="Bucket width in radians, or 'auto'")
    pipeline.add_argument("--seed", type=int, default=None)
    pipeline.add_argument("--direction", default=None, help="Projection direction x,y,z")
    pipeline.set_defaults(handler=cmd_pipeline)

    search = commands.add_parser("search", parents=[common], help="Exhaustive extremal search on a point set")
    search.add_argument("file")
    search.add_argument("--k", type=int, required=True)
    search.add_argument("--relation", default=Relation.NO_BAD.value, choices=[r.value for r in Relation])
    search.add_argument("--node-budget", type=int, default=None)
    search.add_argument("--time-budget", type=float, default=None)
    search.set_defaults(handler=cmd_search)

    export = commands.add_parser("export", parents=[common], help="Render a family as OBJ or SVG")
    export.add_argument("file")
    export.add_argument("--format", choices=["obj", "svg"], required=True)
    export.add_argument("--direction", default=None, help="Projection direction x,y,z (svg)")
    export.add_argument("--digits", type=int, default=None, help="Significant digits (obj)")
    export.add_argument("--size", type=int, default=None, help="Canvas size in pixels (svg)")
    export.add_argument("--out", default=None)
    export.set_defaults(handler=cmd_export)

    stats = commands.add_parser("stats", parents=[common], help="Summary counts for a family")
    stats.add_argument("file")
    stats.add_argument("--c", default="2")
    stats.add_argument("--cos-alpha", default="1/2")
    stats.set_defaults(handler=cmd_stats)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 for --help
        return int(e.code or 0)

    logging_config = config.get_logging_config()
    logging.basicConfig(level=logging_config["level"], format=logging_config["format"], stream=sys.stderr)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    if args.threads is not None and args.threads < 1:
        logger.error(f"--threads must be >= 1, got {args.threads}")
        return int(ExitStatus.INVALID_INPUT)

    try:
        return int(args.handler(args))
    except (ValueError, IndexError, TypeError, OSError) as e:
        logger.error(f"{args.command}: {e}")
        return int(ExitStatus.INVALID_INPUT)


if __name__ == "__main__":
    sys.exit(main())
