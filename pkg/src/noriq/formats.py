from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Type, TypeVar, Union

from pydantic import BaseModel, ConfigDict, StrictInt, StrictStr, ValidationError, model_validator

from .exactlin import RatMatrix, ShapeError, format_rational
from .hocalc import BACKWARD, FORWARD, Arrow, Zigzag, ZigzagError
from .noriquiver import (
    Commutant,
    ModuleOverCommutant,
    QMorphism,
    QObject,
    QuiverError,
    QuiverRep,
    module_from_object,
    regular_module,
    zero_module,
)
from .pairtop import ComplexError, OrderedComplex, PairMap, SPair, Triple, interval_pair, render_label, smash

logger = logging.getLogger(__name__)

Rational = Union[StrictInt, StrictStr]
MatrixRows = List[List[Rational]]
Model = TypeVar("Model", bound=BaseModel)


class DocumentError(RuntimeError):
    """Raised when a JSON document cannot be parsed or does not describe a valid object."""


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class PairDocument(_Document):
    vertices: List[str]
    simplices: List[List[str]]
    sub: List[List[str]]


class MapDocument(_Document):
    source: Union[str, PairDocument]
    target: Union[str, PairDocument]
    vertex_map: Dict[str, str]


class TripleDocument(_Document):
    vertices: List[str]
    simplices: List[List[str]]
    middle: List[List[str]]
    inner: List[List[str]]


class ArrowMapDocument(_Document):
    vertex_map: Dict[str, str]
    source: Optional[Union[str, PairDocument]] = None
    target: Optional[Union[str, PairDocument]] = None


class ArrowDocument(_Document):
    map: ArrowMapDocument
    direction: Literal["forward", "backward"]


class ObjectDocument(_Document):
    id: str
    degree: int = 0
    twist: int = 0
    pair: Optional[Union[str, PairDocument]] = None
    circle_twist_of: Optional[str] = None
    dim: Optional[int] = None

    @model_validator(mode="after")
    def _one_space(self) -> "ObjectDocument":
        given = [self.pair is not None, self.circle_twist_of is not None, self.dim is not None]
        if sum(given) != 1:
            raise ValueError(f"object '{self.id}' needs exactly one of pair, circle_twist_of or dim")
        return self


class MorphismDocument(_Document):
    id: str
    kind: Literal["a", "b", "c"]
    source: str
    target: str
    matrix: Optional[MatrixRows] = None
    zigzag: Optional[List[ArrowDocument]] = None
    triple: Optional[TripleDocument] = None


class QuiverDocument(_Document):
    objects: List[ObjectDocument]
    morphisms: List[MorphismDocument] = []

    @model_validator(mode="after")
    def _unique_ids(self) -> "QuiverDocument":
        for label, ids in (("object", [o.id for o in self.objects]), ("morphism", [m.id for m in self.morphisms])):
            if len(ids) != len(set(ids)):
                raise ValueError(f"{label} ids must be unique")
        return self


class ModuleDocument(_Document):
    kind: Literal["regular", "zero", "object", "explicit"]
    object: Optional[str] = None
    dim: Optional[int] = None
    action: Optional[List[MatrixRows]] = None

    @model_validator(mode="after")
    def _payload(self) -> "ModuleDocument":
        if self.kind == "object" and self.object is None:
            raise ValueError("module of kind 'object' needs an object id")
        if self.kind == "explicit" and (self.dim is None or self.action is None):
            raise ValueError("explicit module needs dim and action")
        return self


class ManifestEntry(_Document):
    name: str
    kind: Literal["pair", "map", "triple", "quiver", "module"]
    path: str


class ManifestDocument(_Document):
    version: Literal["1"]
    entries: List[ManifestEntry] = []

    @model_validator(mode="after")
    def _unique_names(self) -> "ManifestDocument":
        names = [entry.name for entry in self.entries]
        if len(names) != len(set(names)):
            raise ValueError("manifest entry names must be unique")
        return self


# -- reading -----------------------------------------------------------------------


def parse_document(text: str, model: Type[Model], *, origin: str = "<document>") -> Model:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{origin}: {exc.msg} (line {exc.lineno} column {exc.colno})") from exc
    try:
        return model.model_validate(payload)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise DocumentError(f"{origin}: {exc.error_count()} validation error(s), at {where}: {first['msg']}") from exc


def read_document(path: Path, model: Type[Model]) -> Model:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentError(f"Cannot read {path}: {exc.strerror}") from exc
    return parse_document(text, model, origin=str(path))


def parse_matrix(rows: Sequence[Sequence[object]], *, cols: Optional[int] = None) -> RatMatrix:
    try:
        return RatMatrix.from_rows(rows, cols=cols)
    except ShapeError as exc:
        raise DocumentError(str(exc)) from exc


def _pair_from(doc: PairDocument) -> SPair:
    try:
        return SPair.build(doc.vertices, doc.simplices, doc.sub)
    except ComplexError as exc:
        raise DocumentError(f"Invalid pair: {exc}") from exc


def _resolve_pair(ref: Union[str, PairDocument], base: Path) -> SPair:
    if isinstance(ref, PairDocument):
        return _pair_from(ref)
    return load_pair(base / ref)


def load_pair(path: Path) -> SPair:
    pair = _pair_from(read_document(path, PairDocument))
    logger.debug("Loaded pair %s with %s simplices", path, len(pair.total.simplices))
    return pair


def _build_map(source: SPair, target: SPair, vertex_map: Dict[str, str]) -> PairMap:
    try:
        return PairMap(source, target, tuple((v, vertex_map[v]) for v in source.total.vertices))
    except KeyError as exc:
        raise DocumentError(f"Vertex map misses {exc.args[0]!r}") from None
    except ComplexError as exc:
        raise DocumentError(f"Invalid map: {exc}") from exc


def load_map(path: Path) -> PairMap:
    doc = read_document(path, MapDocument)
    base = path.parent
    return _build_map(_resolve_pair(doc.source, base), _resolve_pair(doc.target, base), doc.vertex_map)


def _triple_from(doc: TripleDocument) -> Triple:
    try:
        return Triple.build(OrderedComplex.build(doc.vertices, doc.simplices), doc.middle, doc.inner)
    except ComplexError as exc:
        raise DocumentError(f"Invalid triple: {exc}") from exc


def load_triple(path: Path) -> Triple:
    return _triple_from(read_document(path, TripleDocument))


def _zigzag_from(arrows: List[ArrowDocument], start: SPair, end: SPair, base: Path, label: str) -> Zigzag:
    """Arrow pairs default to the neighbouring objects' pairs at the two ends of the chain."""
    built: List[Arrow] = []
    current = start
    for index, arrow in enumerate(arrows):
        last = index == len(arrows) - 1
        source = _resolve_pair(arrow.map.source, base) if arrow.map.source is not None else None
        target = _resolve_pair(arrow.map.target, base) if arrow.map.target is not None else None
        far = end if last else None
        if arrow.direction == "forward":
            source = current if source is None else source
            target = far if target is None else target
        else:
            target = current if target is None else target
            source = far if source is None else source
        if source is None or target is None:
            raise DocumentError(f"Arrow {index} of '{label}' needs explicit source and target pairs")
        direction = FORWARD if arrow.direction == "forward" else BACKWARD
        built.append(Arrow(_build_map(source, target, arrow.map.vertex_map), direction))
        current = built[-1].end
    try:
        return Zigzag(start, tuple(built))
    except ZigzagError as exc:
        raise DocumentError(f"Invalid zigzag for '{label}': {exc}") from exc


def quiver_from_document(doc: QuiverDocument, base: Path) -> QuiverRep:
    pairs: Dict[str, SPair] = {}
    for obj in doc.objects:
        if obj.pair is not None:
            pairs[obj.id] = _resolve_pair(obj.pair, base)
    for obj in doc.objects:
        if obj.circle_twist_of is not None:
            if obj.circle_twist_of not in pairs:
                raise DocumentError(f"Object '{obj.id}' twists unknown or abstract object '{obj.circle_twist_of}'")
            pairs[obj.id] = smash(pairs[obj.circle_twist_of], interval_pair())
    try:
        objects = [QObject(o.id, o.degree, o.twist, pair=pairs.get(o.id), dim=o.dim) for o in doc.objects]
        dims = {o.id: o.dim for o in doc.objects}
        morphisms = []
        for m in doc.morphisms:
            if m.source not in dims or m.target not in dims:
                raise DocumentError(f"Morphism '{m.id}' names an unknown object")
            matrix = zigzag = triple = None
            if m.matrix is not None:
                cols = dims[m.source] if dims[m.source] is not None else None
                matrix = parse_matrix(m.matrix, cols=cols)
            if m.triple is not None:
                triple = _triple_from(m.triple)
            if m.zigzag is not None:
                if m.target not in pairs or m.source not in pairs:
                    raise DocumentError(f"Morphism '{m.id}' carries a zigzag between abstract objects")
                start = triple.pair_yz if triple is not None else pairs[m.target]
                zigzag = _zigzag_from(m.zigzag, start, pairs[m.source], base, m.id)
            morphisms.append(QMorphism(m.id, m.kind, m.source, m.target, zigzag=zigzag, triple=triple, matrix=matrix))
        return QuiverRep.build(objects, morphisms)
    except (QuiverError, ComplexError, ShapeError) as exc:
        raise DocumentError(f"Invalid quiver: {exc}") from exc


def load_quiver(path: Path) -> QuiverRep:
    rep = quiver_from_document(read_document(path, QuiverDocument), path.parent)
    logger.debug("Loaded quiver %s: %s objects, %s morphisms", path, len(rep.objects), len(rep.morphisms))
    return rep


def module_from_document(doc: ModuleDocument, c: Commutant) -> ModuleOverCommutant:
    try:
        if doc.kind == "regular":
            return regular_module(c)
        if doc.kind == "zero":
            return zero_module(c)
        if doc.kind == "object":
            if doc.object not in c.object_ids:
                raise DocumentError(f"Module object '{doc.object}' is not in the quiver")
            return module_from_object(c, doc.object)
        action = tuple(parse_matrix(rows, cols=doc.dim) for rows in doc.action)
        return ModuleOverCommutant(doc.dim, action).validate(c)
    except QuiverError as exc:
        raise DocumentError(f"Invalid module: {exc}") from exc


def load_module(choice: str, c: Commutant) -> ModuleOverCommutant:
    """*choice* is ``regular``, ``zero`` or a path to a module document."""
    if choice in ("regular", "zero"):
        return module_from_document(ModuleDocument(kind=choice), c)
    return module_from_document(read_document(Path(choice), ModuleDocument), c)


def load_manifest(path: Path) -> Tuple[ManifestDocument, Dict[str, Path]]:
    doc = read_document(path, ManifestDocument)
    resolved: Dict[str, Path] = {}
    for entry in doc.entries:
        target = path.parent / entry.path
        if not target.is_file():
            raise DocumentError(f"Manifest entry '{entry.name}' points to missing file {entry.path}")
        resolved[entry.name] = target
    return doc, resolved


# -- writing -----------------------------------------------------------------------


def pair_document(pair: SPair) -> PairDocument:
    names = [render_label(v) for v in pair.total.vertices]
    if len(set(names)) != len(names):
        raise DocumentError("Vertex labels collide when rendered as text")
    return PairDocument(
        vertices=names,
        simplices=[[render_label(v) for v in s] for s in pair.total.maximal],
        sub=[[render_label(v) for v in s] for s in pair.sub.maximal],
    )


def dump_document(doc: BaseModel) -> str:
    return json.dumps(doc.model_dump(exclude_none=True), indent=2, ensure_ascii=False) + "\n"


def matrix_rows(m: RatMatrix) -> List[List[str]]:
    return [[format_rational(v) for v in m.row(i)] for i in range(m.rows)]
