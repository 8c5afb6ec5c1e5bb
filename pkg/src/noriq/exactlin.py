from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from sympy.polys.domains import QQ, ZZ
from sympy.polys.matrices import DomainMatrix

logger = logging.getLogger(__name__)

Rational = Fraction
Scalar = Union[int, Fraction]


class ShapeError(RuntimeError):
    """Raised when matrix or block shapes do not fit together."""


def as_rational(value: object) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to an exact rational."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ShapeError(f"Booleans are not rationals: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ShapeError(f"Invalid rational literal '{value}'") from exc
    raise ShapeError(f"Cannot read {type(value).__name__} as an exact rational")


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class RatMatrix:
    rows: int
    cols: int
    entries: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise ShapeError(f"Negative shape {self.rows}x{self.cols}")
        if len(self.entries) != self.rows * self.cols:
            raise ShapeError(
                f"Matrix {self.rows}x{self.cols} needs {self.rows * self.cols} entries, got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[object]], *, cols: Optional[int] = None) -> "RatMatrix":
        if not rows:
            return cls(0, cols or 0, ())
        width = len(rows[0])
        entries: List[Fraction] = []
        for index, row in enumerate(rows):
            if len(row) != width:
                raise ShapeError(f"Row {index} has {len(row)} entries, expected {width}")
            entries.extend(as_rational(value) for value in row)
        return cls(len(rows), width, tuple(entries))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls(rows, cols, (Fraction(0),) * (rows * cols))

    @classmethod
    def identity(cls, size: int) -> "RatMatrix":
        entries = [Fraction(0)] * (size * size)
        for i in range(size):
            entries[i * size + i] = Fraction(1)
        return cls(size, size, tuple(entries))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[object]], *, rows: int) -> "RatMatrix":
        entries = [Fraction(0)] * (rows * len(columns))
        for j, column in enumerate(columns):
            if len(column) != rows:
                raise ShapeError(f"Column {j} has {len(column)} entries, expected {rows}")
            for i, value in enumerate(column):
                entries[i * len(columns) + j] = as_rational(value)
        return cls(rows, len(columns), tuple(entries))

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, index: Tuple[int, int]) -> Fraction:
        i, j = index
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Tuple[Fraction, ...]:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def column(self, j: int) -> Tuple[Fraction, ...]:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def to_rows(self) -> List[List[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "RatMatrix":
        return RatMatrix(
            self.cols,
            self.rows,
            tuple(self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)),
        )

    @property
    def T(self) -> "RatMatrix":
        return self.transpose()

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        if self.shape != other.shape:
            raise ShapeError(f"Cannot add {self.shape} and {other.shape}")
        return RatMatrix(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        if self.shape != other.shape:
            raise ShapeError(f"Cannot subtract {other.shape} from {self.shape}")
        return RatMatrix(self.rows, self.cols, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "RatMatrix":
        return RatMatrix(self.rows, self.cols, tuple(-a for a in self.entries))

    def scale(self, factor: Scalar) -> "RatMatrix":
        factor = as_rational(factor)
        return RatMatrix(self.rows, self.cols, tuple(factor * a for a in self.entries))

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise ShapeError(f"Cannot multiply {self.shape} by {other.shape}")
        if not (self.rows and self.cols and other.cols):
            return RatMatrix.zeros(self.rows, other.cols)
        return _from_domain(_to_domain(self).matmul(_to_domain(other)))

    def is_zero(self) -> bool:
        return not any(self.entries)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def rank(self) -> int:
        return rref(self)[1]

    def is_invertible(self) -> bool:
        return self.is_square() and self.rank() == self.rows

    def inverse(self) -> "RatMatrix":
        if not self.is_square():
            raise ShapeError(f"Only square matrices are invertible, got {self.shape}")
        augmented = hstack([self, RatMatrix.identity(self.rows)])
        reduced, rank, pivots = rref(augmented)
        if rank < self.rows or any(p >= self.rows for p in pivots):
            raise ShapeError("Matrix is singular")
        return reduced.submatrix(range(self.rows), range(self.rows, 2 * self.rows))

    def submatrix(self, rows: Iterable[int], cols: Iterable[int]) -> "RatMatrix":
        rows = list(rows)
        cols = list(cols)
        return RatMatrix(
            len(rows),
            len(cols),
            tuple(self.entries[i * self.cols + j] for i in rows for j in cols),
        )

    def format(self) -> str:
        body = ", ".join(
            "[" + ", ".join(format_rational(v) for v in self.row(i)) + "]" for i in range(self.rows)
        )
        return f"[{body}]"


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows * self.cols:
            raise ShapeError(
                f"Integer matrix {self.rows}x{self.cols} needs {self.rows * self.cols} entries"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], *, cols: Optional[int] = None) -> "IntMatrix":
        if not rows:
            return cls(0, cols or 0, ())
        width = len(rows[0])
        if any(len(row) != width for row in rows):
            raise ShapeError("Ragged integer matrix")
        return cls(len(rows), width, tuple(int(v) for row in rows for v in row))

    @classmethod
    def identity(cls, size: int) -> "IntMatrix":
        return cls(size, size, tuple(int(i == j) for i in range(size) for j in range(size)))

    def __getitem__(self, index: Tuple[int, int]) -> int:
        i, j = index
        return self.entries[i * self.cols + j]

    def to_rows(self) -> List[List[int]]:
        return [list(self.entries[i * self.cols : (i + 1) * self.cols]) for i in range(self.rows)]

    def _to_domain(self) -> DomainMatrix:
        return DomainMatrix([[ZZ(v) for v in row] for row in self.to_rows()], (self.rows, self.cols), ZZ)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ShapeError(f"Cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        if not (self.rows and self.cols and other.cols):
            return IntMatrix(self.rows, other.cols, (0,) * (self.rows * other.cols))
        product = self._to_domain().matmul(other._to_domain())
        return IntMatrix.from_rows([[int(v) for v in row] for row in product.to_list()], cols=other.cols)

    def to_rational(self) -> RatMatrix:
        return RatMatrix(self.rows, self.cols, tuple(Fraction(v) for v in self.entries))

    def determinant(self) -> int:
        if self.rows != self.cols:
            raise ShapeError("Determinant needs a square matrix")
        if self.rows == 0:
            return 1
        return int(self._to_domain().det())


@dataclass(frozen=True)
class Subspace:
    ambient_dim: int
    basis: RatMatrix

    @property
    def dim(self) -> int:
        return self.basis.cols

    def contains(self, vectors: RatMatrix) -> bool:
        if vectors.rows != self.ambient_dim:
            raise ShapeError(f"Vectors live in Q^{vectors.rows}, subspace in Q^{self.ambient_dim}")
        return hstack([self.basis, vectors]).rank() == self.dim

    def sum(self, other: "Subspace") -> "Subspace":
        _check_ambient([self, other])
        return image_basis(hstack([self.basis, other.basis]))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, RatMatrix.identity(ambient_dim))

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, RatMatrix.zeros(ambient_dim, 0))


@dataclass(frozen=True)
class TwistTag:
    i: int = 0

    def shifted(self, by: int = 1) -> "TwistTag":
        return TwistTag(self.i + by)


def hstack(blocks: Sequence[RatMatrix]) -> RatMatrix:
    blocks = list(blocks)
    if not blocks:
        return RatMatrix(0, 0, ())
    rows = blocks[0].rows
    if any(block.rows != rows for block in blocks):
        raise ShapeError("hstack needs equal row counts")
    cols = sum(block.cols for block in blocks)
    entries: List[Fraction] = []
    for i in range(rows):
        for block in blocks:
            entries.extend(block.row(i))
    return RatMatrix(rows, cols, tuple(entries))


def vstack(blocks: Sequence[RatMatrix]) -> RatMatrix:
    blocks = list(blocks)
    if not blocks:
        return RatMatrix(0, 0, ())
    cols = blocks[0].cols
    if any(block.cols != cols for block in blocks):
        raise ShapeError("vstack needs equal column counts")
    entries: List[Fraction] = []
    for block in blocks:
        entries.extend(block.entries)
    return RatMatrix(sum(block.rows for block in blocks), cols, tuple(entries))


def block_diag(blocks: Sequence[RatMatrix]) -> RatMatrix:
    blocks = list(blocks)
    rows = sum(block.rows for block in blocks)
    cols = sum(block.cols for block in blocks)
    entries = [Fraction(0)] * (rows * cols)
    r0 = c0 = 0
    for block in blocks:
        for i in range(block.rows):
            for j in range(block.cols):
                entries[(r0 + i) * cols + c0 + j] = block[i, j]
        r0 += block.rows
        c0 += block.cols
    return RatMatrix(rows, cols, tuple(entries))


def _to_domain(m: RatMatrix) -> DomainMatrix:
    data: Dict[int, Dict[int, object]] = {}
    for i in range(m.rows):
        row: Dict[int, object] = {}
        for j, value in enumerate(m.row(i)):
            if value:
                row[j] = QQ(value.numerator, value.denominator)
        if row:
            data[i] = row
    return DomainMatrix(data, (m.rows, m.cols), QQ)


def _from_domain(dm: DomainMatrix) -> RatMatrix:
    rows, cols = dm.shape
    entries = [Fraction(0)] * (rows * cols)
    for i, row in dm.to_sparse().rep.items():
        for j, value in row.items():
            entries[i * cols + j] = Fraction(int(value.numerator), int(value.denominator))
    return RatMatrix(rows, cols, tuple(entries))


def rref(m: RatMatrix) -> Tuple[RatMatrix, int, List[int]]:
    """Reduced row-echelon form, rank and pivot columns, computed exactly over QQ."""
    if m.rows == 0 or m.cols == 0 or m.is_zero():
        return m, 0, []
    reduced, pivots = _to_domain(m).rref()
    return _from_domain(reduced), len(pivots), list(pivots)


def _canonical_columns(vectors: RatMatrix) -> RatMatrix:
    # reduced column-echelon form: transpose of the rref of the transpose, zero columns dropped
    if vectors.cols == 0:
        return RatMatrix.zeros(vectors.rows, 0)
    reduced, rank, _ = rref(vectors.transpose())
    return reduced.submatrix(range(rank), range(reduced.cols)).transpose()


def kernel_basis(m: RatMatrix) -> Subspace:
    if m.rows == 0 or m.is_zero():
        return Subspace.full(m.cols)
    reduced, rank, pivots = rref(m)
    free = [j for j in range(m.cols) if j not in set(pivots)]
    columns: List[List[Fraction]] = []
    for f in free:
        vector = [Fraction(0)] * m.cols
        vector[f] = Fraction(1)
        for r, p in enumerate(pivots):
            vector[p] = -reduced[r, f]
        columns.append(vector)
    basis = RatMatrix.from_columns(columns, rows=m.cols)
    return Subspace(m.cols, _canonical_columns(basis))


def image_basis(m: RatMatrix) -> Subspace:
    return Subspace(m.rows, _canonical_columns(m))


def _check_ambient(subspaces: Sequence[Subspace]) -> None:
    dims = {s.ambient_dim for s in subspaces}
    if len(dims) > 1:
        raise ShapeError(f"Subspaces live in different ambient dimensions: {sorted(dims)}")


def annihilator(s: Subspace) -> RatMatrix:
    """Rows spanning the linear forms that vanish on *s*."""
    if s.dim == 0:
        return RatMatrix.identity(s.ambient_dim)
    return kernel_basis(s.basis.transpose()).basis.transpose()


def intersect(subspaces: Sequence[Subspace], *, ambient_dim: Optional[int] = None) -> Subspace:
    subspaces = list(subspaces)
    if not subspaces:
        if ambient_dim is None:
            raise ShapeError("Empty intersection needs an ambient dimension")
        return Subspace.full(ambient_dim)
    _check_ambient(subspaces)
    if ambient_dim is not None and subspaces[0].ambient_dim != ambient_dim:
        raise ShapeError("Ambient dimension hint does not match the subspaces")
    constraints = vstack([annihilator(s) for s in subspaces])
    return kernel_basis(constraints)


def kron(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    if not (a.rows and a.cols and b.rows and b.cols):
        return RatMatrix.zeros(a.rows * b.rows, a.cols * b.cols)
    db = _to_domain(b)
    bands = []
    for i in range(a.rows):
        blocks = [db.mul(QQ(x.numerator, x.denominator)) for x in a.row(i)]
        bands.append(blocks[0].hstack(*blocks[1:]) if len(blocks) > 1 else blocks[0])
    return _from_domain(bands[0].vstack(*bands[1:]) if len(bands) > 1 else bands[0])


def solve_right(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    """Return x with a·x = b, free variables set to zero; ShapeError when inconsistent."""
    if a.rows != b.rows:
        raise ShapeError(f"Cannot solve {a.shape} against right-hand side {b.shape}")
    if b.cols == 0:
        return RatMatrix.zeros(a.cols, 0)
    reduced, _, pivots = rref(hstack([a, b]))
    if any(p >= a.cols for p in pivots):
        raise ShapeError("Linear system is inconsistent")
    solution = [[Fraction(0)] * b.cols for _ in range(a.cols)]
    for r, p in enumerate(pivots):
        for j in range(b.cols):
            solution[p][j] = reduced[r, a.cols + j]
    return RatMatrix.from_rows(solution, cols=b.cols) if a.cols else RatMatrix.zeros(0, b.cols)


def coordinates(basis: RatMatrix, vectors: RatMatrix) -> RatMatrix:
    """Coordinates of *vectors* in the column basis *basis* (which must be independent)."""
    return solve_right(basis, vectors)


# -- Smith normal form ------------------------------------------------------


def smith_normal_form(m: IntMatrix) -> Tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return (U, D, V) with U·m·V = D, U and V unimodular, d_i | d_(i+1)."""
    rows, cols = m.rows, m.cols
    a = m.to_rows()
    u = IntMatrix.identity(rows).to_rows()
    v = IntMatrix.identity(cols).to_rows()

    def swap_rows(i: int, j: int) -> None:
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i: int, j: int) -> None:
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(target: int, source: int, factor: int) -> None:
        a[target] = [x + factor * y for x, y in zip(a[target], a[source])]
        u[target] = [x + factor * y for x, y in zip(u[target], u[source])]

    def add_col(target: int, source: int, factor: int) -> None:
        for row in a:
            row[target] += factor * row[source]
        for row in v:
            row[target] += factor * row[source]

    t = 0
    while t < min(rows, cols):
        candidates = [(abs(a[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if a[i][j]]
        if not candidates:
            break
        _, i0, j0 = min(candidates)
        swap_rows(t, i0)
        swap_cols(t, j0)
        while True:
            line = [(abs(a[i][t]), i, t) for i in range(t, rows) if a[i][t]]
            line += [(abs(a[t][j]), t, j) for j in range(t + 1, cols) if a[t][j]]
            _, i1, j1 = min(line)
            if i1 != t:
                swap_rows(t, i1)
            if j1 != t:
                swap_cols(t, j1)
            pivot = a[t][t]
            for i in range(t + 1, rows):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // pivot))
            for j in range(t + 1, cols):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // pivot))
            if any(a[i][t] for i in range(t + 1, rows)) or any(a[t][j] for j in range(t + 1, cols)):
                continue
            offender = next(
                (i for i in range(t + 1, rows) for j in range(t + 1, cols) if a[i][j] % pivot),
                None,
            )
            if offender is None:
                break
            add_row(t, offender, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1

    return (
        IntMatrix.from_rows(u, cols=rows),
        IntMatrix.from_rows(a, cols=cols),
        IntMatrix.from_rows(v, cols=cols),
    )


def integer_inverse(m: IntMatrix) -> IntMatrix:
    inverse = m.to_rational().inverse()
    if any(value.denominator != 1 for value in inverse.entries):
        raise ShapeError("Matrix is not unimodular")
    return IntMatrix(m.rows, m.cols, tuple(int(value) for value in inverse.entries))


# -- commutation systems -----------------------------------------------------


@dataclass(frozen=True)
class BlockConstraint:
    """The equation x[row_block]·matrix = matrix·x[col_block]."""

    row_block: int
    col_block: int
    matrix: RatMatrix


def _flat_offsets(block_dims: Sequence[int]) -> List[int]:
    offsets = []
    total = 0
    for dim in block_dims:
        offsets.append(total)
        total += dim * dim
    offsets.append(total)
    return offsets


def solve_linear_system(
    block_dims: Sequence[int],
    constraints: Sequence[Union[BlockConstraint, Tuple[RatMatrix, RatMatrix]]],
) -> List[List[RatMatrix]]:
    """
    Basis of block-diagonal unknowns satisfying every constraint.

    A plain ``(A, B)`` pair is read as ``A·x = x·B`` on a single block. Unknown
    entries are flattened block by block in row-major order and the solution
    space is the canonical kernel of the stacked system, so solutions come out
    ordered by pivot position.
    """
    block_dims = list(block_dims)
    offsets = _flat_offsets(block_dims)
    total = offsets[-1]
    equations: List[List[Fraction]] = []

    for raw in constraints:
        if isinstance(raw, BlockConstraint):
            a_block, b_block, matrix = raw.row_block, raw.col_block, raw.matrix
            if not (0 <= a_block < len(block_dims) and 0 <= b_block < len(block_dims)):
                raise ShapeError(f"Constraint refers to missing block {a_block} or {b_block}")
            da, db = block_dims[a_block], block_dims[b_block]
            if matrix.shape != (da, db):
                raise ShapeError(f"Constraint matrix {matrix.shape} does not fit blocks {da}x{db}")
            for r in range(da):
                for c in range(db):
                    row = [Fraction(0)] * total
                    for k in range(da):
                        value = matrix[k, c]
                        if value:
                            row[offsets[a_block] + r * da + k] += value
                    for k in range(db):
                        value = matrix[r, k]
                        if value:
                            row[offsets[b_block] + k * db + c] -= value
                    if any(row):
                        equations.append(row)
        else:
            left, right = raw
            if len(block_dims) != 1:
                raise ShapeError("Unlabelled constraints need exactly one unknown block")
            d = block_dims[0]
            if left.shape != (d, d) or right.shape != (d, d):
                raise ShapeError(f"Constraint pair {left.shape}/{right.shape} does not fit block {d}")
            for r in range(d):
                for c in range(d):
                    row = [Fraction(0)] * total
                    for k in range(d):
                        if left[r, k]:
                            row[k * d + c] += left[r, k]
                        if right[k, c]:
                            row[r * d + k] -= right[k, c]
                    if any(row):
                        equations.append(row)

    system = RatMatrix.from_rows(equations, cols=total) if equations else RatMatrix.zeros(0, total)
    kernel = kernel_basis(system)
    logger.debug("Commutation system: %s unknowns, %s equations, %s solutions", total, len(equations), kernel.dim)
    return [unflatten_blocks(kernel.basis.column(j), block_dims) for j in range(kernel.dim)]


def flatten_blocks(blocks: Sequence[RatMatrix]) -> List[Fraction]:
    flat: List[Fraction] = []
    for block in blocks:
        flat.extend(block.entries)
    return flat


def unflatten_blocks(vector: Sequence[Fraction], block_dims: Sequence[int]) -> List[RatMatrix]:
    offsets = _flat_offsets(block_dims)
    return [
        RatMatrix(dim, dim, tuple(vector[offsets[b] : offsets[b + 1]]))
        for b, dim in enumerate(block_dims)
    ]
