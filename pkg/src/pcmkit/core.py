"""Core domain types for pairwise comparison matrices.

A pairwise comparison matrix stores positive judgment ratios: entry (i, j)
says how many times alternative i is preferred to alternative j.  The
diagonal is exactly one and mirrored entries multiply to one (reciprocity).
This module owns construction, validation, the elementary transformations,
and the plain-text matrix file format consumed by the CLI.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DimensionMismatchError,
    NonPositiveEntryError,
    NonPositiveWeightError,
    NonSquareError,
    ReciprocityViolationError,
)

# Reciprocity residuals beyond this are rejected outright whatever the
# policy: the input is then not a rounded reciprocal matrix but a
# different matrix altogether.
MAX_RECIPROCITY_TOLERANCE = 0.1

# Programmatic construction is expected to be exact up to float rounding;
# file input is typically printed with 3-4 decimals, hence the looser gate.
DEFAULT_API_TOLERANCE = 1e-9
DEFAULT_FILE_TOLERANCE = 1e-3


class Normalization(enum.Enum):
    """Target total for a priority vector: unit sum or percentage sum."""

    SUM_ONE = 1.0
    SUM_HUNDRED = 100.0


class ReciprocityMode(enum.Enum):
    STRICT = "strict"
    REPAIR_FROM_UPPER = "repair-from-upper"


@dataclass(frozen=True)
class ReciprocityPolicy:
    """How validation treats imperfect reciprocity.

    STRICT rejects any mirrored pair whose product deviates from one by
    more than `tolerance`.  REPAIR_FROM_UPPER keeps the upper triangle and
    overwrites the lower triangle with exact reciprocals (diagonal forced
    to one), which is the right default when feeding matrices into
    simulations that must never see asymmetric noise.
    """

    mode: ReciprocityMode = ReciprocityMode.STRICT
    tolerance: float = DEFAULT_API_TOLERANCE

    def __post_init__(self):
        if not (0.0 < self.tolerance <= MAX_RECIPROCITY_TOLERANCE):
            raise ValueError(
                f"reciprocity tolerance must lie in (0, {MAX_RECIPROCITY_TOLERANCE}], "
                f"got {self.tolerance}"
            )


STRICT_API_POLICY = ReciprocityPolicy()
STRICT_FILE_POLICY = ReciprocityPolicy(tolerance=DEFAULT_FILE_TOLERANCE)
REPAIR_POLICY = ReciprocityPolicy(
    mode=ReciprocityMode.REPAIR_FROM_UPPER, tolerance=DEFAULT_FILE_TOLERANCE
)


def _as_readonly(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=float)
    if out is a:
        out = out.copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class PCMatrix:
    """Immutable positive reciprocal judgment matrix.

    Structural invariants are enforced on construction: square with at
    least two alternatives, strictly positive entries, unit diagonal, and
    mirrored products within the hard reciprocity bound.  Instances are
    safe to share across concurrent workers.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise NonSquareError(f"expected a square matrix, got shape {a.shape}")
        n = a.shape[0]
        if n < 2:
            raise NonSquareError("a pairwise comparison matrix needs at least 2 alternatives")
        _check_positive(a)
        diag = np.diag(a)
        if not np.all(diag == 1.0):
            i = int(np.argmax(diag != 1.0))
            raise ReciprocityViolationError(i, i, diag[i] * diag[i] - 1.0)
        residual = np.abs(a * a.T - 1.0)
        if residual.max() > MAX_RECIPROCITY_TOLERANCE:
            i, j = np.unravel_index(int(np.argmax(residual)), residual.shape)
            raise ReciprocityViolationError(int(i), int(j), float(a[i, j] * a[j, i] - 1.0))
        object.__setattr__(self, "entries", _as_readonly(a))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, key):
        return self.entries[key]


@dataclass(frozen=True)
class WeightVector:
    """Normalized priority vector with optional provenance tag.

    `method` records which derivation produced the vector (for display
    only); it does not affect equality of the numbers.
    """

    priorities: np.ndarray
    normalization: Normalization = Normalization.SUM_ONE
    method: str | None = None

    def __post_init__(self):
        p = np.asarray(self.priorities, dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise NonPositiveWeightError(f"expected a vector of >= 2 priorities, got shape {p.shape}")
        if not np.all(np.isfinite(p) & (p > 0.0)):
            raise NonPositiveWeightError("all priorities must be strictly positive and finite")
        target = self.normalization.value
        if abs(p.sum() - target) > 1e-9 * target:
            raise NonPositiveWeightError(
                f"priorities sum to {p.sum()!r}, expected {target} within 1e-9 relative"
            )
        object.__setattr__(self, "priorities", _as_readonly(p))

    @property
    def n(self) -> int:
        return self.priorities.shape[0]

    def rescaled(self, target: Normalization) -> "WeightVector":
        """The same priorities expressed on another normalization scale."""
        if target is self.normalization:
            return self
        scaled = self.priorities * (target.value / self.normalization.value)
        return WeightVector(scaled, target, self.method)

    def unit(self) -> np.ndarray:
        """Priorities on the unit-sum scale as a plain array."""
        if self.normalization is Normalization.SUM_ONE:
            return self.priorities
        return self.priorities / self.normalization.value


def _check_positive(a: np.ndarray) -> None:
    ok = np.isfinite(a) & (a > 0.0)
    if not ok.all():
        i, j = np.unravel_index(int(np.argmax(~ok)), a.shape)
        raise NonPositiveEntryError(int(i), int(j), float(a[i, j]))


def validate(matrix, policy: ReciprocityPolicy | None = None) -> PCMatrix:
    """Validate raw judgments into a PCMatrix under a reciprocity policy.

    STRICT returns a matrix only if every invariant holds within the
    policy tolerance; REPAIR_FROM_UPPER trusts the upper triangle and
    rebuilds the rest.  Orders below 3 are rejected here because the
    consistency machinery (CI denominator n-1, random indices) is
    meaningless for them.
    """
    if policy is None:
        policy = STRICT_API_POLICY
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquareError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n < 3:
        raise NonSquareError(f"validation requires order >= 3, got n = {n}")

    if policy.mode is ReciprocityMode.REPAIR_FROM_UPPER:
        iu, ju = np.triu_indices(n, 1)
        upper = a[iu, ju]
        bad = ~(np.isfinite(upper) & (upper > 0.0))
        if bad.any():
            k = int(np.argmax(bad))
            raise NonPositiveEntryError(int(iu[k]), int(ju[k]), float(upper[k]))
        repaired = np.ones((n, n))
        repaired[iu, ju] = upper
        repaired[ju, iu] = 1.0 / upper
        return PCMatrix(repaired)

    _check_positive(a)
    diag = np.diag(a)
    if not np.all(diag == 1.0):
        i = int(np.argmax(diag != 1.0))
        raise ReciprocityViolationError(i, i, float(diag[i] * diag[i] - 1.0))
    residual = a * a.T - 1.0
    worst = np.abs(residual)
    np.fill_diagonal(worst, 0.0)
    if worst.max() > policy.tolerance:
        i, j = np.unravel_index(int(np.argmax(worst)), worst.shape)
        raise ReciprocityViolationError(int(i), int(j), float(residual[i, j]))
    return PCMatrix(a)


def consistent_from_weights(weights) -> PCMatrix:
    """Build the consistent matrix of ratios w_i / w_j."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise NonPositiveWeightError(f"expected a vector of >= 2 weights, got shape {w.shape}")
    if not np.all(np.isfinite(w) & (w > 0.0)):
        raise NonPositiveWeightError("all generating weights must be strictly positive")
    a = w[:, None] / w[None, :]
    np.fill_diagonal(a, 1.0)
    return PCMatrix(a)


def is_consistent(matrix: PCMatrix, tol: float) -> bool:
    """True iff every triad satisfies a_ij * a_jk = a_ik within `tol` relative."""
    a = matrix.entries
    prod = a[:, :, None] * a[None, :, :]  # prod[i, j, k] = a_ij * a_jk
    residual = np.abs(prod / a[:, None, :] - 1.0)
    return bool(residual.max() <= tol)


def transpose(matrix: PCMatrix) -> PCMatrix:
    """The reversed-question matrix: entry (i, j) becomes entry (j, i)."""
    return PCMatrix(matrix.entries.T.copy())


def normalize(raw, target: Normalization = Normalization.SUM_ONE,
              method: str | None = None) -> WeightVector:
    """Scale positive components so they sum to the target total."""
    p = np.asarray(raw, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise NonPositiveWeightError(f"expected a vector of >= 2 components, got shape {p.shape}")
    if not np.all(np.isfinite(p) & (p > 0.0)):
        raise NonPositiveWeightError("all components must be strictly positive and finite")
    return WeightVector(p * (target.value / p.sum()), target, method)


# ---------------------------------------------------------------------------
# Matrix text format: first data line holds n, the next n lines hold n
# whitespace-separated tokens each, every token a decimal or a fraction
# "p/q".  Lines starting with '#' are comments.
# ---------------------------------------------------------------------------

def _parse_token(token: str, lineno: int) -> float:
    try:
        if "/" in token:
            # Fractions are parsed exactly, then rounded once to float.
            return float(Fraction(token))
        return float(token)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"line {lineno}: cannot parse entry {token!r}") from exc


def parse_matrix_text(text: str) -> np.ndarray:
    """Parse the text format into a raw entry array (no validation)."""
    rows: list[list[float]] = []
    n: int | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if n is None:
            try:
                n = int(stripped)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: expected the matrix order, got {stripped!r}") from exc
            if n < 2:
                raise ValueError(f"line {lineno}: order must be >= 2, got {n}")
            continue
        tokens = stripped.split()
        if len(tokens) != n:
            raise ValueError(f"line {lineno}: expected {n} entries, got {len(tokens)}")
        rows.append([_parse_token(t, lineno) for t in tokens])
        if len(rows) == n:
            break
    if n is None:
        raise ValueError("empty matrix file")
    if len(rows) != n:
        raise ValueError(f"expected {n} matrix rows, found {len(rows)}")
    return np.array(rows, dtype=float)


def load_matrix(path, policy: ReciprocityPolicy | None = None) -> PCMatrix:
    """Read a matrix file.  Default policy: STRICT at the file tolerance."""
    if policy is None:
        policy = STRICT_FILE_POLICY
    with open(path, "r", encoding="utf-8") as fh:
        raw = parse_matrix_text(fh.read())
    return validate(raw, policy)


def format_matrix_text(matrix: PCMatrix, comments: tuple[str, ...] = ()) -> str:
    """Render a matrix in the text format with full float precision."""
    lines = [f"# {c}" for c in comments]
    lines.append(str(matrix.n))
    for row in matrix.entries:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def permute(matrix: PCMatrix, order) -> PCMatrix:
    """Reindex alternatives: entry (i, j) of the result compares order[i] to order[j]."""
    idx = np.asarray(order, dtype=int)
    if sorted(idx.tolist()) != list(range(matrix.n)):
        raise DimensionMismatchError(f"not a permutation of 0..{matrix.n - 1}: {order!r}")
    return PCMatrix(matrix.entries[np.ix_(idx, idx)])
