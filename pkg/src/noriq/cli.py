from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .env import ConfigurationError, Settings, apply_overrides, load_environment, resolve_settings
from .exactlin import ShapeError
from .formats import (
    DocumentError,
    dump_document,
    load_manifest,
    load_map,
    load_module,
    load_pair,
    load_quiver,
    pair_document,
)
from .hocalc import LatticeError, ZigzagError
from .noriquiver import QuiverError, commutant, verify_structure
from .pairtop import (
    CohomologyCheckError,
    ComplexError,
    SPair,
    cone,
    glue_pushout,
    mapping_cylinder,
    relative_cohomology,
    smash,
    suspension,
    wedge,
)
from .presentation import PresentationError, quotient_presentation, sub_presentation
from .reports import (
    ReportRenderError,
    checks_context,
    cohomology_context,
    commutant_context,
    pair_summary,
    render_report,
)
from .rewrites import RewriteError, normalize, verify
from .selftest import Corpus, build_corpus, extend_from_manifest, run_suite, summarize

EXIT_SUCCESS = 0
EXIT_VERIFICATION = 1
EXIT_INPUT = 2

INPUT_ERRORS = (DocumentError, ConfigurationError, ComplexError, QuiverError, ShapeError, ReportRenderError)
VERIFICATION_ERRORS = (CohomologyCheckError, PresentationError, RewriteError, ZigzagError, LatticeError)

BUILD_OPS = ("wedge", "smash", "cone", "suspend", "cylinder", "pushout")

LOG = logging.getLogger(__name__)


class JsonLogFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:  # pragma: no cover - formatting logic
        payload = {
            "level": record.levelname.lower(),
            "message": record.getMessage(),
        }
        if record.exc_info:
            payload["exc_info"] = self.formatException(record.exc_info)
        return json.dumps(payload)


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.INFO
    if args.quiet:
        level = logging.WARNING
    if args.verbose:
        level = logging.DEBUG

    handler = logging.StreamHandler()
    if args.verbose_json:
        handler.setFormatter(JsonLogFormatter())
    else:
        handler.setFormatter(logging.Formatter("%(levelname)s - %(message)s"))

    root = logging.getLogger()
    root.handlers.clear()
    root.setLevel(level)
    root.addHandler(handler)


def _resolve_version() -> str:
    try:
        from importlib.metadata import version
    except ImportError:  # pragma: no cover - Python <3.8 fallback
        from importlib_metadata import version  # type: ignore

    try:
        return version("noriq-workbench")
    except Exception:
        return "0.0.0"


def _parse_args(argv: Optional[Sequence[str]]) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="noriq",
        description="Exact cohomology of simplicial pairs, quiver commutants and elementary presentations.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Enable debug logging.")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Reduce output.")
    parser.add_argument("--verbose-json", action="store_true", help="Emit structured JSON logs.")
    parser.add_argument("--env", help="Path to a .env file with defaults.")
    parser.add_argument("--version", action="version", version=_resolve_version())

    commands = parser.add_subparsers(dest="command", required=True)

    cohomology = commands.add_parser("cohomology", help="Relative cohomology of a pair document.")
    cohomology.add_argument("pair", help="Pair document (JSON).")
    cohomology.add_argument("--degree", type=int, required=True, help="Cohomological degree n.")

    build = commands.add_parser("build", help="Build a new pair from pair or map documents.")
    build.add_argument("--op", choices=BUILD_OPS, required=True, help="Construction to apply.")
    build.add_argument("inputs", nargs="+", help="Pair documents, or map documents for cylinder/pushout.")
    build.add_argument("--output", help="Write the resulting pair document here instead of stdout.")

    commutant_cmd = commands.add_parser("commutant", help="Commutant algebra of a quiver representation.")
    commutant_cmd.add_argument("quiver", help="Quiver document (JSON).")

    normalize_cmd = commands.add_parser("normalize", help="Rewrite a quiver to a single object.")
    normalize_cmd.add_argument("quiver", help="Quiver document (JSON).")
    normalize_cmd.add_argument("--verify", action="store_true", help="Recompute every rewrite check.")

    present = commands.add_parser("present", help="Present a module through an elementary object.")
    present.add_argument("quiver", help="Quiver document (JSON).")
    present.add_argument("--module", default="regular", help="Module document, 'regular' or 'zero'.")
    present.add_argument("--mode", choices=("quotient", "sub"), default="quotient")

    selftest = commands.add_parser("selftest", help="Run the randomized invariant suite.")
    selftest.add_argument("--corpus", help="Directory holding a manifest.json of file-based cases.")
    selftest.add_argument("--seed", type=int, help="Corpus seed (NORIQ_SEED overrides).")

    for sub in (cohomology, build, commutant_cmd, normalize_cmd, present, selftest):
        sub.add_argument("--templates", help="Directory with report templates.")

    return parser.parse_args(argv)


def _emit(text: str) -> None:
    sys.stdout.write(text)
    sys.stdout.flush()


# -- commands ----------------------------------------------------------------------


def cmd_cohomology(args: argparse.Namespace, settings: Settings) -> int:
    pair = load_pair(Path(args.pair))
    if args.degree < 0:
        raise ConfigurationError("Degree must be nonnegative")
    basis = relative_cohomology(pair, args.degree)
    LOG.debug("H^%s has dimension %s", args.degree, basis.dim)
    _emit(render_report("cohomology", cohomology_context(pair, basis), templates_dir=settings.templates_dir))
    return EXIT_SUCCESS


def _build_pair(op: str, inputs: List[str]) -> SPair:
    if op in ("cylinder", "pushout"):
        maps = [load_map(Path(p)) for p in inputs]
        if op == "cylinder":
            if len(maps) != 1:
                raise ConfigurationError("cylinder takes exactly one map document")
            return mapping_cylinder(maps[0]).pair
        if len(maps) != 2:
            raise ConfigurationError("pushout takes exactly two map documents")
        return glue_pushout(maps[0], maps[1]).pair
    pairs = [load_pair(Path(p)) for p in inputs]
    if op == "wedge":
        return wedge(pairs)[0]
    if op == "smash":
        if len(pairs) != 2:
            raise ConfigurationError("smash takes exactly two pair documents")
        return smash(pairs[0], pairs[1])
    if len(pairs) != 1:
        raise ConfigurationError(f"{op} takes exactly one pair document")
    return cone(pairs[0]) if op == "cone" else suspension(pairs[0])


def cmd_build(args: argparse.Namespace, settings: Settings) -> int:
    pair = _build_pair(args.op, args.inputs)
    document = dump_document(pair_document(pair))
    if not args.output:
        _emit(document)
        return EXIT_SUCCESS
    Path(args.output).write_text(document, encoding="utf-8")
    context = {"op": args.op, "output": args.output, "pair": pair_summary(pair)}
    _emit(render_report("build", context, templates_dir=settings.templates_dir))
    return EXIT_SUCCESS


def cmd_commutant(args: argparse.Namespace, settings: Settings) -> int:
    c = commutant(load_quiver(Path(args.quiver)))
    associative = verify_structure(c)
    context = dict(commutant_context(c), associative=associative)
    _emit(render_report("commutant", context, templates_dir=settings.templates_dir))
    return EXIT_SUCCESS if associative else EXIT_VERIFICATION


def cmd_normalize(args: argparse.Namespace, settings: Settings) -> int:
    chain = normalize(load_quiver(Path(args.quiver)))
    steps = []
    failed = False
    for step in chain.steps:
        checks = verify(step) if args.verify else []
        failed = failed or not all(ok for _, ok in checks)
        steps.append(
            {
                "name": step.step,
                "objects": [o.id for o in step.reduced.objects],
                "added": len(step.enlarged.objects) - len(step.original.objects),
                "squares": len(step.squares),
                "checks": checks_context(checks),
            }
        )
    final = chain.final
    context = {
        "objects": len(chain.original.objects),
        "steps": steps,
        "final_objects": [o.id for o in final.objects],
        "final_dims": [final.dims[o.id] for o in final.objects],
        "commutant_dim": commutant(final).dim,
        "verified": args.verify,
    }
    _emit(render_report("normalize", context, templates_dir=settings.templates_dir))
    return EXIT_VERIFICATION if failed else EXIT_SUCCESS


def cmd_present(args: argparse.Namespace, settings: Settings) -> int:
    rep = load_quiver(Path(args.quiver))
    m = load_module(args.module, commutant(rep))
    if args.mode == "quotient":
        witness = quotient_presentation(rep, m)
        source = witness.source
        context: Dict[str, object] = {
            "mode": "quotient",
            "module_dim": m.dim,
            "copies": witness.copies,
            "carrier_dim": witness.carrier.dim,
            "rank": witness.rank,
            "geometric": witness.geometric,
            "source": None if source is None else {
                "pair": pair_summary(source.pair),
                "degree": source.degree,
                "twist": source.twist,
                "dim": source.dim,
            },
            "map": witness.map,
            "embedding": witness.embedding,
            "checks": checks_context(witness.checks),
        }
    else:
        sub = sub_presentation(rep, m)
        context = {
            "mode": "sub",
            "module_dim": m.dim,
            "copies": sub.copies,
            "carrier_dim": sub.carrier.dim,
            "rank": sub.rank,
            "dual_geometry_constructed": sub.dual_geometry_constructed,
            "map": sub.map,
            "checks": checks_context(sub.checks),
        }
    _emit(render_report("present", context, templates_dir=settings.templates_dir))
    return EXIT_SUCCESS


def _selftest_context(seed: int, results) -> Dict[str, object]:
    return {
        "seed": seed,
        "results": [{"name": r.name, "cases": r.cases, "passed": r.passed} for r in results],
        "summary": summarize(results),
    }


def cmd_selftest(args: argparse.Namespace, settings: Settings) -> int:
    manifest = None
    if args.corpus:
        manifest = Path(args.corpus) / "manifest.json"
        load_manifest(manifest)

    def rebuild() -> Corpus:
        corpus = build_corpus(settings.seed, settings.max_simplices)
        return extend_from_manifest(corpus, manifest) if manifest is not None else corpus

    def render(results) -> str:
        context = _selftest_context(settings.seed, results)
        return render_report("selftest", context, templates_dir=settings.templates_dir)

    results = run_suite(rebuild(), rebuild=rebuild, render=render)
    for result in results:
        for failure in result.failures:
            LOG.warning("%s %s", result.name, failure)
    _emit(render(results))
    return EXIT_SUCCESS if all(r.passed for r in results) else EXIT_VERIFICATION


COMMANDS = {
    "cohomology": cmd_cohomology,
    "build": cmd_build,
    "commutant": cmd_commutant,
    "normalize": cmd_normalize,
    "present": cmd_present,
    "selftest": cmd_selftest,
}


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _parse_args(argv)
    except SystemExit as exc:
        return EXIT_SUCCESS if exc.code == 0 else EXIT_INPUT

    _configure_logging(args)

    env_path = Path(args.env).expanduser() if args.env else None
    try:
        env_values = load_environment(env_path)
        overrides = {"NORIQ_TEMPLATES": args.templates}
        settings = resolve_settings(
            apply_overrides(env_values, overrides),
            seed=getattr(args, "seed", None),
        )
    except ConfigurationError as exc:
        LOG.error("Failed to load configuration: %s", exc)
        return EXIT_INPUT

    try:
        return COMMANDS[args.command](args, settings)
    except VERIFICATION_ERRORS as exc:
        LOG.error("Verification failed: %s", exc)
        return EXIT_VERIFICATION
    except INPUT_ERRORS as exc:
        LOG.error(str(exc))
        return EXIT_INPUT
    except OSError as exc:
        LOG.error("I/O error: %s", exc)
        return EXIT_INPUT
