"""
Exact calculus on multivector-valued polynomial fields.

A :class:`PolyField` is a finite sum ``sum c * x^j e_A`` with rational ``c``.
Generalized Dirac operators are built from :class:`StructuralSet` frames,
and the Lame-Navier operator and its first-order factor ``M`` act exactly.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .clifford import (
    DimensionMismatchError,
    Multivector,
    blade_to_mask,
    grade_of,
    mask_to_blade,
    product_table,
)

MAX_SYMBOLIC_DEGREE = 8


def as_fraction(v) -> Fraction:
    """Exact rational from int, Fraction, decimal/ratio string, or float (via its repr)."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, (float, np.floating)):
        return Fraction(repr(float(v)))
    if isinstance(v, str):
        return Fraction(v.strip().replace("−", "-"))
    raise TypeError(f"cannot convert {v!r} to an exact rational")


# ---------------------------------------------------------------------------
# structural sets and Lame parameters

class StructuralSetError(ValueError):
    pass


@dataclass(frozen=True)
class StructuralSet:
    """Ordered orthonormal frame ``phi_1..phi_m`` of R^m with exact entries.

    Row ``j`` of ``matrix`` holds the coefficients of ``phi_j`` on
    ``e_1..e_m``.  Orthonormality is checked exactly, which is equivalent to
    ``phi_i phi_j + phi_j phi_i = -2 delta_ij``.
    """

    matrix: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(as_fraction(c) for c in row) for row in self.matrix)
        m = len(rows)
        if m < 1 or any(len(r) != m for r in rows):
            raise StructuralSetError("structural set matrix must be square")
        for i in range(m):
            for j in range(m):
                dot = sum((rows[i][k] * rows[j][k] for k in range(m)), Fraction(0))
                if dot != (1 if i == j else 0):
                    raise StructuralSetError(
                        f"frame is not orthonormal: <phi_{i + 1}, phi_{j + 1}> = {dot}")
        object.__setattr__(self, "matrix", rows)

    @property
    def dim(self) -> int:
        return len(self.matrix)

    @cached_property
    def vectors(self) -> tuple[Multivector, ...]:
        return tuple(Multivector.vector(row) for row in self.matrix)

    @cached_property
    def array(self) -> np.ndarray:
        a = np.array([[float(c) for c in row] for row in self.matrix])
        a.setflags(write=False)
        return a

    @classmethod
    def standard(cls, m: int) -> "StructuralSet":
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(m)) for i in range(m)))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "StructuralSet":
        return cls(tuple(tuple(as_fraction(c) for c in r) for r in rows))

    @classmethod
    def random(cls, m: int, rng: random.Random | int | None = None, rotations: int = 3) -> "StructuralSet":
        """Random exact orthogonal frame.

        A random signed permutation composed with ``rotations`` plane
        rotations whose cosine/sine come from Pythagorean triples.
        """
        rng = rng if isinstance(rng, random.Random) else random.Random(rng)
        perm = list(range(m))
        rng.shuffle(perm)
        Q = [[Fraction(0)] * m for _ in range(m)]
        for i, p in enumerate(perm):
            Q[i][p] = Fraction(rng.choice((-1, 1)))
        for _ in range(rotations if m > 1 else 0):
            i, j = rng.sample(range(m), 2)
            q = rng.randint(1, 4)
            p = rng.randint(q + 1, q + 4)
            h = p * p + q * q
            c = Fraction(p * p - q * q, h)
            s = Fraction(2 * p * q, h) * rng.choice((-1, 1))
            for row in Q:
                a, b = row[i], row[j]
                row[i], row[j] = c * a - s * b, s * a + c * b
        return cls(tuple(tuple(r) for r in Q))

    def to_json_obj(self) -> list[list[str]]:
        return [[str(c) for c in row] for row in self.matrix]


class LameParamsError(ValueError):
    pass


@dataclass(frozen=True)
class LameParams:
    """Lame parameters ``mu > 0``, ``lam > -2 mu / 3`` (stored exactly)."""

    mu: Fraction
    lam: Fraction

    def __post_init__(self):
        mu, lam = as_fraction(self.mu), as_fraction(self.lam)
        if mu <= 0:
            raise LameParamsError(f"mu must be positive, got {mu}")
        if lam <= Fraction(-2, 3) * mu:
            raise LameParamsError(f"lambda must exceed -2/3 mu, got {lam}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "lam", lam)

    @property
    def alpha(self) -> Fraction:
        """Weight of the sandwich term, ``(mu + lam) / 2``."""
        return (self.mu + self.lam) / 2

    @property
    def beta(self) -> Fraction:
        """Weight of the harmonic term, ``(3 mu + lam) / 2``."""
        return (3 * self.mu + self.lam) / 2

    @property
    def _den(self) -> Fraction:
        return 4 * self.mu * (2 * self.mu + self.lam)

    @property
    def dagger_infra(self) -> Fraction:
        """Coefficient of the infra transform in the dagger combination (enters with a minus)."""
        return 2 * (self.mu + self.lam) / self._den

    @property
    def dagger_pair(self) -> Fraction:
        return 2 * (3 * self.mu + self.lam) / self._den

    @property
    def c_left(self) -> Fraction:
        return (3 * self.mu + self.lam) ** 2 / self._den

    @property
    def c_right(self) -> Fraction:
        return (self.mu + self.lam) ** 2 / self._den

    @property
    def c_mixed(self) -> Fraction:
        return (3 * self.mu + self.lam) * (self.mu + self.lam) / self._den

    def to_json_obj(self) -> dict:
        return {"mu": str(self.mu), "lam": str(self.lam)}


# ---------------------------------------------------------------------------
# polynomial fields

Key = tuple[tuple[int, ...], int]


class PolyField:
    """Multivector-valued polynomial in ``x_1..x_m`` with exact coefficients.

    ``terms`` maps ``(powers, blade_mask)`` to a nonzero ``Fraction``.
    """

    __slots__ = ("dim", "_terms")

    def __init__(self, dim: int, terms: Mapping[Key, object] | None = None):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self.dim = dim
        clean: dict[Key, Fraction] = {}
        n = 1 << dim
        for (powers, mask), c in (terms or {}).items():
            powers = tuple(int(p) for p in powers)
            if len(powers) != dim or any(p < 0 for p in powers):
                raise ValueError(f"invalid multi-index {powers} for m={dim}")
            if not 0 <= mask < n:
                raise ValueError(f"invalid blade mask {mask} for m={dim}")
            c = as_fraction(c)
            if c:
                clean[(powers, int(mask))] = clean.get((powers, int(mask)), Fraction(0)) + c
                if not clean[(powers, int(mask))]:
                    del clean[(powers, int(mask))]
        self._terms = clean

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, dim: int) -> "PolyField":
        return cls(dim)

    @classmethod
    def constant(cls, value: Multivector | int | Fraction, dim: int | None = None) -> "PolyField":
        if isinstance(value, Multivector):
            if not value.exact:
                raise TypeError("PolyField coefficients must be exact")
            z = (0,) * value.dim
            return cls(value.dim, {(z, k): c for k, c in value.terms.items()})
        return cls(dim, {((0,) * dim, 0): value})

    @classmethod
    def coordinate(cls, j: int, dim: int) -> "PolyField":
        """The scalar field ``x_j`` (1-based)."""
        p = [0] * dim
        p[j - 1] = 1
        return cls(dim, {(tuple(p), 0): 1})

    @classmethod
    def monomial(cls, powers: Sequence[int], blade: Sequence[int] = (), coeff=1) -> "PolyField":
        dim = len(powers)
        return cls(dim, {(tuple(powers), blade_to_mask(blade, dim)): coeff})

    @classmethod
    def position(cls, dim: int, frame: "StructuralSet | None" = None) -> "PolyField":
        """``x = sum x_j e_j`` (or ``x_phi = sum x_j phi_j`` for a frame)."""
        out = cls.zero(dim)
        for j in range(1, dim + 1):
            v = frame.vectors[j - 1] if frame is not None else Multivector.basis_vector(j, dim)
            out = out + cls.coordinate(j, dim) * v
        return out

    # -- accessors --------------------------------------------------------
    @property
    def terms(self) -> dict[Key, Fraction]:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        return max((sum(p) for p, _ in self._terms), default=-1)

    def blades(self) -> set[int]:
        return {k for _, k in self._terms}

    def grades_present(self) -> set[int]:
        return {grade_of(k) for _, k in self._terms}

    def blade_polynomial(self, mask: int) -> dict[tuple[int, ...], Fraction]:
        return {p: c for (p, k), c in self._terms.items() if k == mask}

    def grade(self, k: int) -> "PolyField":
        if k < 0 or k > self.dim:
            raise ValueError(f"grade {k} out of range 0..{self.dim}")
        return PolyField(self.dim, {key: c for key, c in self._terms.items() if grade_of(key[1]) == k})

    # -- arithmetic -------------------------------------------------------
    def _check(self, other: "PolyField") -> None:
        if other.dim != self.dim:
            raise DimensionMismatchError(f"dimensions differ: {self.dim} vs {other.dim}")

    def __add__(self, other):
        if not isinstance(other, PolyField):
            if isinstance(other, (int, Fraction, Multivector)):
                other = PolyField.constant(other, self.dim)
            else:
                return NotImplemented
        self._check(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, Fraction(0)) + c
        return PolyField(self.dim, out)

    __radd__ = __add__

    def __neg__(self):
        return PolyField(self.dim, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _mul_mv(self, mv: Multivector, left: bool) -> "PolyField":
        if mv.dim != self.dim:
            raise DimensionMismatchError(f"dimensions differ: {self.dim} vs {mv.dim}")
        if not mv.exact:
            raise TypeError("PolyField arithmetic needs exact multivectors")
        sign, index = product_table(self.dim)
        out: dict[Key, Fraction] = {}
        for (p, a), c in self._terms.items():
            for b, d in mv.terms.items():
                if left:
                    k, s = int(index[b, a]), int(sign[b, a])
                else:
                    k, s = int(index[a, b]), int(sign[a, b])
                out[(p, k)] = out.get((p, k), Fraction(0)) + s * c * d
        return PolyField(self.dim, out)

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return self._mul_mv(other, left=False)
        if isinstance(other, PolyField):
            self._check(other)
            sign, index = product_table(self.dim)
            out: dict[Key, Fraction] = {}
            for (p, a), c in self._terms.items():
                for (q, b), d in other._terms.items():
                    key = (tuple(x + y for x, y in zip(p, q)), int(index[a, b]))
                    out[key] = out.get(key, Fraction(0)) + int(sign[a, b]) * c * d
            return PolyField(self.dim, out)
        if isinstance(other, (int, Fraction)):
            return PolyField(self.dim, {k: c * other for k, c in self._terms.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Multivector):
            return self._mul_mv(other, left=True)
        if isinstance(other, (int, Fraction)):
            return self * other
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, PolyField):
            return self.dim == other.dim and self._terms == other._terms
        if other == 0:
            return self.is_zero()
        return NotImplemented

    def __hash__(self):
        return hash((self.dim, tuple(sorted(self._terms.items()))))

    def __repr__(self):
        if not self._terms:
            return "PolyField(0)"
        parts = []
        for (p, k), c in self.items():
            mono = "*".join(f"x{j + 1}^{e}" if e > 1 else f"x{j + 1}" for j, e in enumerate(p) if e)
            blade = "e" + "".join(map(str, mask_to_blade(k))) if k else ""
            parts.append("*".join(s for s in (str(c), mono, blade) if s))
        return "PolyField(" + " + ".join(parts) + ")"

    # -- evaluation -------------------------------------------------------
    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Float evaluation at ``points`` of shape ``(..., m)``; returns ``(..., 2**m)``."""
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.dim:
            raise DimensionMismatchError(f"points have {pts.shape[-1]} coordinates, field has m={self.dim}")
        out = np.zeros(pts.shape[:-1] + (1 << self.dim,))
        cache: dict[tuple[int, ...], np.ndarray] = {}
        for (p, k), c in self._terms.items():
            mono = cache.get(p)
            if mono is None:
                mono = np.ones(pts.shape[:-1])
                for j, e in enumerate(p):
                    if e:
                        mono = mono * pts[..., j] ** e
                cache[p] = mono
            out[..., k] += float(c) * mono
        return out

    __call__ = evaluate

    def evaluate_exact(self, point: Sequence) -> Multivector:
        x = [as_fraction(v) for v in point]
        out: dict[int, Fraction] = {}
        for (p, k), c in self._terms.items():
            v = c
            for xj, e in zip(x, p):
                v *= xj ** e
            out[k] = out.get(k, Fraction(0)) + v
        return Multivector(self.dim, out)

    # -- serialization ----------------------------------------------------
    def to_json_obj(self) -> dict:
        return {
            "dim": self.dim,
            "terms": [{"powers": list(p), "blade": list(mask_to_blade(k)), "coeff": str(c)}
                      for (p, k), c in self.items()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "PolyField":
        dim = int(obj["dim"])
        terms: dict[Key, Fraction] = {}
        for t in obj.get("terms", []):
            key = (tuple(int(e) for e in t["powers"]), blade_to_mask(t.get("blade", []), dim))
            terms[key] = terms.get(key, Fraction(0)) + as_fraction(t["coeff"])
        return cls(dim, terms)

    @classmethod
    def from_json(cls, text: str) -> "PolyField":
        return cls.from_json_obj(json.loads(text))


def random_polyfield(m: int, degree: int, rng: random.Random | int | None = None,
                     n_terms: int = 6, max_num: int = 5, grades: Iterable[int] | None = None) -> PolyField:
    """Random sparse field of total degree <= ``degree`` with small rational coefficients."""
    if degree > MAX_SYMBOLIC_DEGREE:
        raise ValueError(f"degree capped at {MAX_SYMBOLIC_DEGREE}")
    rng = rng if isinstance(rng, random.Random) else random.Random(rng)
    allowed = [k for k in range(1 << m) if grades is None or grade_of(k) in set(grades)]
    terms: dict[Key, Fraction] = {}
    for _ in range(n_terms):
        d = rng.randint(0, degree)
        p = [0] * m
        for _ in range(d):
            p[rng.randrange(m)] += 1
        c = Fraction(rng.randint(-max_num, max_num), rng.randint(1, max_num))
        key = (tuple(p), rng.choice(allowed))
        terms[key] = terms.get(key, Fraction(0)) + c
    return PolyField(m, terms)


# ---------------------------------------------------------------------------
# differential operators

def partial_derivative(P: PolyField, axis: int) -> PolyField:
    if axis < 1 or axis > P.dim:
        raise ValueError(f"axis {axis} out of range 1..{P.dim}")
    j = axis - 1
    out: dict[Key, Fraction] = {}
    for (p, k), c in P.terms.items():
        if p[j]:
            q = list(p)
            q[j] -= 1
            out[(tuple(q), k)] = c * p[j]
    return PolyField(P.dim, out)


def _check_frame(frame: StructuralSet, P: PolyField) -> None:
    if frame.dim != P.dim:
        raise DimensionMismatchError(f"structural set has m={frame.dim}, field has m={P.dim}")


def dirac_left(phi: StructuralSet, P: PolyField) -> PolyField:
    """``sum_j phi_j d_j P``."""
    _check_frame(phi, P)
    out = PolyField.zero(P.dim)
    for j, v in enumerate(phi.vectors, start=1):
        out = out + v * partial_derivative(P, j)
    return out


def dirac_right(P: PolyField, psi: StructuralSet) -> PolyField:
    """``sum_j (d_j P) psi_j``."""
    _check_frame(psi, P)
    out = PolyField.zero(P.dim)
    for j, v in enumerate(psi.vectors, start=1):
        out = out + partial_derivative(P, j) * v
    return out


def laplacian(P: PolyField) -> PolyField:
    out = PolyField.zero(P.dim)
    for j in range(1, P.dim + 1):
        out = out + partial_derivative(partial_derivative(P, j), j)
    return out


def apply_lame(phi: StructuralSet, psi: StructuralSet, lam: LameParams, P: PolyField) -> PolyField:
    """Generalized Lame-Navier operator ``alpha phi_D P psi_D + beta phi_D psi_D P``."""
    _check_frame(phi, P)
    _check_frame(psi, P)
    sandwich = dirac_right(dirac_left(phi, P), psi)
    harmonic = dirac_left(phi, dirac_left(psi, P))
    return sandwich * lam.alpha + harmonic * lam.beta


def apply_M(P: PolyField, psi: StructuralSet, lam: LameParams) -> PolyField:
    """First-order factor ``M = alpha (.) psi_D + beta psi_D (.)``; ``phi_D M = L``."""
    _check_frame(psi, P)
    return dirac_right(P, psi) * lam.alpha + dirac_left(psi, P) * lam.beta


# ---------------------------------------------------------------------------
# grade-split identities

def dirac_inner(phi: StructuralSet, F: PolyField, k: int) -> PolyField:
    """``phi_D . F_k = (phi_D F_k - (-1)^k F_k phi_D) / 2`` for a grade-k field."""
    s = 1 if k % 2 == 0 else -1
    return (dirac_left(phi, F) - dirac_right(F, phi) * s) * Fraction(1, 2)


def dirac_outer(phi: StructuralSet, F: PolyField, k: int) -> PolyField:
    s = 1 if k % 2 == 0 else -1
    return (dirac_left(phi, F) + dirac_right(F, phi) * s) * Fraction(1, 2)


@dataclass
class GradeSplitReport:
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def grade_split_check(P: PolyField, phi: StructuralSet) -> GradeSplitReport:
    """Check the inner/outer splitting of ``phi_D`` and the two grade-sum rewrites.

    Per grade ``k``: the symmetric/antisymmetric formulas give the ``k-1``
    and ``k+1`` parts of ``phi_D P_k`` and add up to it.  Summed over grades:
    ``sum (-1)^k (in(out P_k) - out(in P_k)) = phi_D P phi_D`` and
    ``sum (in(out P_k) + out(in P_k)) = phi_D phi_D P``.
    """
    _check_frame(phi, P)
    rep = GradeSplitReport()
    m = P.dim
    sandwich_sum = PolyField.zero(m)
    laplace_sum = PolyField.zero(m)
    for k in range(m + 1):
        Fk = P.grade(k)
        full = dirac_left(phi, Fk)
        inner = dirac_inner(phi, Fk, k)
        outer = dirac_outer(phi, Fk, k)
        rep.checks[f"split_sum_grade{k}"] = (inner + outer) == full
        rep.checks[f"inner_is_grade{k - 1}_part"] = inner == (full.grade(k - 1) if k >= 1 else PolyField.zero(m))
        rep.checks[f"outer_is_grade{k + 1}_part"] = outer == (full.grade(k + 1) if k < m else PolyField.zero(m))
        in_out = dirac_inner(phi, outer, k + 1)
        out_in = dirac_outer(phi, inner, k - 1)
        s = 1 if k % 2 == 0 else -1
        sandwich_sum = sandwich_sum + (in_out - out_in) * s
        laplace_sum = laplace_sum + in_out + out_in
    rep.checks["sandwich_rewrite"] = sandwich_sum == dirac_right(dirac_left(phi, P), phi)
    rep.checks["laplace_rewrite"] = laplace_sum == dirac_left(phi, dirac_left(phi, P))
    return rep


# ---------------------------------------------------------------------------
# boundary divisibility and the homogeneous Dirichlet counterexample

def _to_sympy(poly: Mapping[tuple[int, ...], Fraction], gens):
    import sympy

    expr = sympy.Integer(0)
    for p, c in poly.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for g, e in zip(gens, p):
            term *= g ** e
        expr += term
    return sympy.Poly(expr, *gens, domain="QQ")


def vanishes_on(P: PolyField, surface: Mapping[tuple[int, ...], Fraction]) -> bool:
    """True iff every blade coefficient of ``P`` is divisible by the scalar polynomial ``surface``.

    ``surface`` maps multi-indices to rationals, e.g. ``{(2,0,0): 6, ..., (0,0,0): -1}``.
    Divisibility implies that ``P`` vanishes identically on the zero set.
    """
    import sympy

    gens = sympy.symbols(f"x1:{P.dim + 1}")
    q = _to_sympy({k: as_fraction(v) for k, v in surface.items()}, gens)
    if q.is_zero:
        raise ValueError("surface polynomial is zero")
    for mask in P.blades():
        _, r = sympy.div(_to_sympy(P.blade_polynomial(mask), gens), q)
        if not r.is_zero:
            return False
    return True


ELLIPSOID_SURFACE = {(2, 0, 0): Fraction(6), (0, 2, 0): Fraction(1), (0, 0, 2): Fraction(1), (0, 0, 0): Fraction(-1)}


@dataclass(frozen=True)
class Counterexample:
    phi: StructuralSet
    psi: StructuralSet
    lam: LameParams
    field: PolyField
    surface: Mapping[tuple[int, ...], Fraction]


def dirichlet_counterexample() -> Counterexample:
    """Nonzero null solution of the generalized system vanishing on an ellipsoid.

    ``F = (6 x1^2 + x2^2 + x3^2 - 1) e2`` with ``phi = {-e1, e2, e3}``, ``psi``
    standard, and weights 0.2 / 0.3 (``mu = 1/10``, ``lam = 3/10``).
    """
    m = 3
    phi = StructuralSet.from_rows([[-1, 0, 0], [0, 1, 0], [0, 0, 1]])
    psi = StructuralSet.standard(m)
    lam = LameParams(Fraction(1, 10), Fraction(3, 10))
    e2 = blade_to_mask((2,), m)
    F = PolyField(m, {((p, q, r), e2): c for (p, q, r), c in ELLIPSOID_SURFACE.items()})
    return Counterexample(phi, psi, lam, F, ELLIPSOID_SURFACE)
