from __future__ import annotations

import logging
import re
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from jinja2 import Environment, FileSystemLoader, StrictUndefined
from jinja2 import TemplateError as JinjaTemplateError

from .exactlin import RatMatrix, format_rational
from .noriquiver import Commutant
from .pairtop import CohomologyBasis, SPair, cohomology_dims, render_label

logger = logging.getLogger(__name__)

LINE_PATTERN = re.compile(r"^[A-Za-z0-9_.\[\]-]+ = \S.*$")


class ReportRenderError(RuntimeError):
    """Raised when a report template fails or renders lines outside the KEY = value grammar."""


def _rat(value: object) -> str:
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return format_rational(Fraction(value))
    raise ReportRenderError(f"rat filter needs an exact rational, got {type(value).__name__}")


def _matrix(value: object) -> str:
    if not isinstance(value, RatMatrix):
        raise ReportRenderError(f"matrix filter needs a RatMatrix, got {type(value).__name__}")
    return value.format()


def _build_environment(templates_dir: Path) -> Environment:
    env = Environment(
        loader=FileSystemLoader(str(templates_dir)),
        autoescape=False,
        undefined=StrictUndefined,
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
    env.filters["rat"] = _rat
    env.filters["matrix"] = _matrix
    env.filters["label"] = render_label
    return env


def render_report(name: str, context: Mapping[str, object], *, templates_dir: Path) -> str:
    try:
        template = _build_environment(templates_dir).get_template(f"{name}.txt.j2")
        rendered = template.render(context)
    except ReportRenderError:
        raise
    except JinjaTemplateError as exc:
        logger.debug("Report rendering failed: %s", exc, exc_info=True)
        raise ReportRenderError(f"Report '{name}' failed to render: {exc}") from exc

    for number, line in enumerate(rendered.splitlines(), start=1):
        if line.strip() and not LINE_PATTERN.match(line):
            raise ReportRenderError(f"Report '{name}' line {number} is not 'KEY = value': {line!r}")
    return rendered


# -- contexts ----------------------------------------------------------------------


def pair_summary(pair: SPair) -> Dict[str, object]:
    return {
        "vertices": len(pair.total.vertices),
        "simplices": len(pair.total.simplices),
        "sub_simplices": len(pair.sub.simplices),
        "dimension": pair.total.dimension,
        "cohomology": cohomology_dims(pair),
    }


def cohomology_context(pair: SPair, basis: CohomologyBasis) -> Dict[str, object]:
    cells = pair.cells(basis.degree)
    return {
        "pair": pair_summary(pair),
        "degree": basis.degree,
        "dim": basis.dim,
        "cells": [render_label(c) for c in cells],
        "basis": [basis.basis.column(k) for k in range(basis.dim)],
    }


def commutant_context(c: Commutant) -> Dict[str, object]:
    basis = []
    for family in c.basis:
        basis.append(list(zip(c.object_ids, family)))
    return {
        "objects": list(c.object_ids),
        "dims": [c.quiver.dims[q] for q in c.object_ids],
        "dim": c.dim,
        "basis": basis,
        "structure": [
            (i, j, c.structure_constants[i][j]) for i in range(c.dim) for j in range(c.dim)
        ],
        "identity": c.identity,
    }


def checks_context(checks: Sequence[Tuple[str, bool]]) -> List[Dict[str, object]]:
    return [{"key": re.sub(r"[^A-Za-z0-9]+", "_", name).strip("_"), "ok": ok} for name, ok in checks]
