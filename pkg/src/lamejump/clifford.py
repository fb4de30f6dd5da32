"""
Arithmetic in the real Clifford algebra R_{0,m}.

Basis blades e_A are keyed by bitmasks (bit ``j-1`` set <=> e_j occurs in A).
Two representations live side by side:

* :class:`Multivector` -- sparse, immutable, coefficients either exact
  (``int``/``Fraction``) or ``float``.  Used for symbolic verification.
* dense ``numpy`` arrays of shape ``(..., 2**m)`` together with the helpers
  :func:`gp`, :func:`conj_dense`, ... used by the quadrature code.

Conversion between exact and floating coefficients is always explicit
(:meth:`Multivector.to_float`, :meth:`Multivector.to_exact`).
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_DIM = 16


class CliffordError(ValueError):
    """Base class for algebra errors."""


class InvalidBladeError(CliffordError):
    pass


class DimensionMismatchError(CliffordError):
    pass


class GradeError(CliffordError):
    pass


def _check_dim(m: int) -> None:
    if not isinstance(m, (int, np.integer)) or m < 1 or m > MAX_DIM:
        raise CliffordError(f"dimension must be an integer in [1, {MAX_DIM}], got {m!r}")


# ---------------------------------------------------------------------------
# blades

def blade_to_mask(indices: Iterable[int], m: int) -> int:
    idx = list(indices)
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise InvalidBladeError(f"blade indices must be strictly increasing: {idx}")
    mask = 0
    for i in idx:
        if i < 1 or i > m:
            raise InvalidBladeError(f"blade index {i} out of range for m={m}")
        mask |= 1 << (i - 1)
    return mask


def mask_to_blade(mask: int) -> tuple[int, ...]:
    out = []
    j = 1
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return tuple(out)


def grade_of(mask: int) -> int:
    return bin(mask).count("1")


def blade_product(a: Sequence[int], b: Sequence[int], m: int) -> tuple[int, tuple[int, ...]]:
    """Product of two basis blades, ``e_a e_b = sign * e_result``.

    The index lists are concatenated and insertion-sorted; every adjacent
    transposition flips the sign and every contracted pair ``e_i e_i = -1``
    contributes another factor ``-1``.

    >>> blade_product((1, 2), (2, 3), 3)
    (-1, (1, 3))
    """
    for blade in (a, b):
        for i in blade:
            if i < 1 or i > m:
                raise InvalidBladeError(f"blade index {i} out of range for m={m}")
    word = list(a) + list(b)
    sign = 1
    # insertion sort, counting swaps
    for i in range(1, len(word)):
        j = i
        while j > 0 and word[j - 1] > word[j]:
            word[j - 1], word[j] = word[j], word[j - 1]
            sign = -sign
            j -= 1
    result = []
    for i in word:
        if result and result[-1] == i:
            result.pop()
            sign = -sign
        else:
            result.append(i)
    return sign, tuple(result)


def _mask_product_sign(a: int, b: int) -> int:
    # same rule as blade_product, on bitmasks
    swaps = 0
    aa = a >> 1
    while aa:
        swaps += grade_of(aa & b)
        aa >>= 1
    swaps += grade_of(a & b)  # each contraction e_i e_i = -1
    return -1 if swaps & 1 else 1


@lru_cache(maxsize=None)
def _product_lists(m: int) -> tuple[list[list[int]], list[list[int]]]:
    # plain-int copy of the table for the sparse exact product loop
    sign, index = product_table(m)
    return sign.tolist(), index.tolist()


@lru_cache(maxsize=None)
def product_table(m: int) -> tuple[np.ndarray, np.ndarray]:
    """``(sign, index)`` tables with ``e_a e_b = sign[a, b] * e_{index[a, b]}``."""
    _check_dim(m)
    n = 1 << m
    sign = np.empty((n, n), dtype=np.int8)
    for a in range(n):
        for b in range(n):
            sign[a, b] = _mask_product_sign(a, b)
    index = np.bitwise_xor.outer(np.arange(n), np.arange(n))
    sign.setflags(write=False)
    index.setflags(write=False)
    return sign, index


@lru_cache(maxsize=None)
def grades(m: int) -> np.ndarray:
    g = np.array([grade_of(a) for a in range(1 << m)], dtype=np.int64)
    g.setflags(write=False)
    return g


@lru_cache(maxsize=None)
def conj_signs(m: int) -> np.ndarray:
    g = grades(m)
    s = np.where(((g * (g + 1)) // 2) % 2 == 0, 1.0, -1.0)
    s.setflags(write=False)
    return s


def vector_masks(m: int) -> np.ndarray:
    return 1 << np.arange(m)


# ---------------------------------------------------------------------------
# dense numeric helpers

def gp(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Geometric product of dense multivector arrays (broadcast over leading axes)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.shape[-1]
    if b.shape[-1] != n:
        raise DimensionMismatchError(f"dense sizes differ: {n} vs {b.shape[-1]}")
    m = n.bit_length() - 1
    sign, index = product_table(m)
    shape = np.broadcast_shapes(a.shape, b.shape)
    out = np.zeros(shape, dtype=float)
    for i in range(n):
        ai = a[..., i : i + 1]
        if not np.any(ai):
            continue
        out[..., index[i]] += sign[i] * ai * b
    return out


def gp_chain(*factors: np.ndarray) -> np.ndarray:
    out = factors[0]
    for f in factors[1:]:
        out = gp(out, f)
    return out


def conj_dense(a: np.ndarray) -> np.ndarray:
    m = a.shape[-1].bit_length() - 1
    return a * conj_signs(m)


def grade_dense(a: np.ndarray, k: int) -> np.ndarray:
    m = a.shape[-1].bit_length() - 1
    return np.where(grades(m) == k, a, 0.0)


def norm_dense(a: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.asarray(a, dtype=float) ** 2, axis=-1))


def embed_vectors(coords: np.ndarray, frame: np.ndarray | None = None) -> np.ndarray:
    """Dense multivectors ``sum_j x_j phi_j`` for coordinates ``(..., m)``.

    ``frame`` is the ``m x m`` coefficient matrix of a structural set (row j
    holds phi_j in the standard basis); ``None`` means the standard basis.
    """
    coords = np.asarray(coords, dtype=float)
    m = coords.shape[-1]
    if frame is not None:
        coords = coords @ np.asarray(frame, dtype=float)
    out = np.zeros(coords.shape[:-1] + (1 << m,))
    out[..., vector_masks(m)] = coords
    return out


def scalar_dense(value: float, m: int) -> np.ndarray:
    out = np.zeros(1 << m)
    out[0] = value
    return out


# ---------------------------------------------------------------------------
# sparse multivectors

def _is_exact(c) -> bool:
    return isinstance(c, (int, Fraction, Rational)) and not isinstance(c, bool)


class Multivector:
    """Immutable sparse element of R_{0,m}.

    ``terms`` maps blade bitmask -> coefficient; zero coefficients are dropped.
    All coefficients are exact rationals or all are floats.
    """

    __slots__ = ("_dim", "_terms", "_exact")

    def __init__(self, dim: int, terms: Mapping[int, object] | None = None, *, exact: bool | None = None):
        _check_dim(dim)
        clean: dict[int, object] = {}
        n = 1 << dim
        kinds = set()
        for mask, c in (terms or {}).items():
            mask = int(mask)
            if mask < 0 or mask >= n:
                raise InvalidBladeError(f"blade mask {mask} invalid for m={dim}")
            if _is_exact(c):
                c = Fraction(c)
                kinds.add(True)
            elif isinstance(c, (float, np.floating)):
                c = float(c)
                kinds.add(False)
            else:
                raise TypeError(f"unsupported coefficient type {type(c).__name__}")
            if c != 0:
                clean[mask] = c
        if len(kinds) > 1:
            raise TypeError("mixed exact and floating coefficients; convert explicitly")
        if exact is None:
            exact = kinds.pop() if kinds else True
        elif kinds and kinds.pop() != exact:
            raise TypeError("coefficient kind does not match requested mode")
        object.__setattr__(self, "_dim", dim)
        object.__setattr__(self, "_terms", clean)
        object.__setattr__(self, "_exact", exact)

    def __setattr__(self, name, value):
        raise AttributeError("Multivector is immutable")

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, dim: int, exact: bool = True) -> "Multivector":
        return cls(dim, {}, exact=exact)

    @classmethod
    def scalar(cls, value, dim: int) -> "Multivector":
        return cls(dim, {0: value})

    @classmethod
    def blade(cls, indices: Sequence[int], dim: int, coeff=1) -> "Multivector":
        return cls(dim, {blade_to_mask(indices, dim): coeff})

    @classmethod
    def basis_vector(cls, j: int, dim: int, coeff=1) -> "Multivector":
        return cls.blade((j,), dim, coeff)

    @classmethod
    def vector(cls, coeffs: Sequence, dim: int | None = None) -> "Multivector":
        dim = len(coeffs) if dim is None else dim
        return cls(dim, {1 << j: c for j, c in enumerate(coeffs)})

    @classmethod
    def from_dense(cls, arr: np.ndarray) -> "Multivector":
        arr = np.asarray(arr, dtype=float)
        m = arr.shape[-1].bit_length() - 1
        return cls(m, {i: float(c) for i, c in enumerate(arr) if c != 0.0}, exact=False)

    # -- accessors --------------------------------------------------------
    @property
    def dim(self) -> int:
        return self._dim

    @property
    def terms(self) -> Mapping[int, object]:
        return dict(self._terms)

    @property
    def exact(self) -> bool:
        return self._exact

    def __getitem__(self, blade) -> object:
        mask = blade if isinstance(blade, int) else blade_to_mask(blade, self._dim)
        return self._terms.get(mask, Fraction(0) if self._exact else 0.0)

    def items(self):
        return sorted(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def grades_present(self) -> set[int]:
        return {grade_of(k) for k in self._terms}

    def to_dense(self) -> np.ndarray:
        out = np.zeros(1 << self._dim)
        for k, c in self._terms.items():
            out[k] = float(c)
        return out

    def to_float(self) -> "Multivector":
        return Multivector(self._dim, {k: float(c) for k, c in self._terms.items()}, exact=False)

    def to_exact(self) -> "Multivector":
        # exact binary value of each float
        return Multivector(self._dim, {k: Fraction(c) for k, c in self._terms.items()}, exact=True)

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "Multivector":
        if isinstance(other, Multivector):
            if other._dim != self._dim:
                raise DimensionMismatchError(f"dimensions differ: {self._dim} vs {other._dim}")
            if other._exact != self._exact and other._terms and self._terms:
                raise TypeError("mixing exact and floating multivectors; convert explicitly")
            return other
        if _is_exact(other) or isinstance(other, (float, np.floating)):
            return Multivector(self._dim, {0: other})
        return NotImplemented

    def _mode(self, other: "Multivector") -> bool:
        if not self._terms:
            return other._exact
        return self._exact

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return Multivector(self._dim, out, exact=self._mode(other))

    __radd__ = __add__

    def __neg__(self):
        return Multivector(self._dim, {k: -c for k, c in self._terms.items()}, exact=self._exact)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _scale(self, s) -> "Multivector":
        if _is_exact(s):
            if not self._exact and self._terms:
                s = float(s)
            return Multivector(self._dim, {k: c * s for k, c in self._terms.items()}, exact=self._exact)
        if isinstance(s, (float, np.floating)):
            if self._exact and self._terms:
                raise TypeError("float scalar times exact multivector; convert explicitly")
            return Multivector(self._dim, {k: c * float(s) for k, c in self._terms.items()}, exact=False)
        return NotImplemented

    def __mul__(self, other):
        if not isinstance(other, Multivector):
            return self._scale(other)
        other = self._coerce(other)
        sign, index = _product_lists(self._dim)
        exact = self._mode(other)
        if exact:
            # integer numerators over a common denominator: one Fraction per output blade
            da = math.lcm(*(c.denominator for c in self._terms.values()))
            db = math.lcm(*(c.denominator for c in other._terms.values()))
            ta = [(a, c.numerator * (da // c.denominator)) for a, c in self._terms.items()]
            tb = [(b, c.numerator * (db // c.denominator)) for b, c in other._terms.items()]
        else:
            ta, tb = list(self._terms.items()), list(other._terms.items())
        out: dict[int, object] = {}
        for a, ca in ta:
            sa, ia = sign[a], index[a]
            for b, cb in tb:
                k = ia[b]
                p = ca * cb
                out[k] = out.get(k, 0) + (p if sa[b] > 0 else -p)
        if exact:
            d = da * db
            out = {k: Fraction(v, d) for k, v in out.items() if v}
        else:
            out = {k: float(v) for k, v in out.items() if v != 0}
        return Multivector._trusted(self._dim, out, exact)

    @classmethod
    def _trusted(cls, dim: int, terms: dict, exact: bool) -> "Multivector":
        """Skip validation for terms already normalized (nonzero, correct kind)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "_dim", dim)
        object.__setattr__(obj, "_terms", terms)
        object.__setattr__(obj, "_exact", exact)
        return obj

    def __rmul__(self, other):
        return self._scale(other)

    def __truediv__(self, s):
        if isinstance(s, Multivector):
            return NotImplemented
        if _is_exact(s):
            return self._scale(Fraction(1) / Fraction(s))
        return self._scale(1.0 / s)

    def __eq__(self, other):
        if isinstance(other, Multivector):
            return self._dim == other._dim and self._terms == other._terms
        if _is_exact(other) or isinstance(other, float):
            return self._terms == ({0: other} if other != 0 else {})
        return NotImplemented

    def __hash__(self):
        return hash((self._dim, tuple(sorted(self._terms.items()))))

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for k, c in self.items():
            name = "e" + "".join(str(i) for i in mask_to_blade(k)) if k else ""
            parts.append(f"{c}{'*' + name if name else ''}")
        return " + ".join(parts)

    # -- algebra operations -----------------------------------------------
    def grade(self, k: int) -> "Multivector":
        return grade_project(self, k)

    def conjugate(self) -> "Multivector":
        return conjugate(self)

    def norm(self) -> float:
        return norm(self)

    def norm_squared(self):
        return sum((c * c for c in self._terms.values()), Fraction(0) if self._exact else 0.0)

    def max_abs(self) -> float:
        return max((abs(float(c)) for c in self._terms.values()), default=0.0)

    # -- serialization ----------------------------------------------------
    def to_json_obj(self) -> dict:
        terms = []
        for k, c in self.items():
            coeff = str(c) if self._exact else float(c)
            terms.append({"blade": list(mask_to_blade(k)), "coeff": coeff})
        return {"dim": self._dim, "terms": terms}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "Multivector":
        dim = int(obj["dim"])
        terms: dict[int, object] = {}
        for t in obj.get("terms", []):
            mask = blade_to_mask(t["blade"], dim)
            c = t["coeff"]
            c = Fraction(c) if isinstance(c, (str, int)) else float(c)
            terms[mask] = terms.get(mask, 0) + c
        return cls(dim, terms)

    @classmethod
    def from_json(cls, text: str) -> "Multivector":
        return cls.from_json_obj(json.loads(text))


def mv_mul(a: Multivector, b: Multivector) -> Multivector:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimensions differ: {a.dim} vs {b.dim}")
    return a * b


def grade_project(a: Multivector, k: int) -> Multivector:
    if k < 0 or k > a.dim:
        raise GradeError(f"grade {k} out of range 0..{a.dim}")
    return Multivector(a.dim, {m: c for m, c in a.terms.items() if grade_of(m) == k}, exact=a.exact)


def conjugate(a: Multivector) -> Multivector:
    out = {}
    for m, c in a.terms.items():
        g = grade_of(m)
        out[m] = c if (g * (g + 1) // 2) % 2 == 0 else -c
    return Multivector(a.dim, out, exact=a.exact)


def norm(a: Multivector) -> float:
    """Euclidean norm; ``norm(a)**2 == [a conj(a)]_0 == sum of squared coefficients``."""
    return float(a.norm_squared()) ** 0.5


def homogeneous_grade(a: Multivector) -> int | None:
    present = a.grades_present()
    if len(present) > 1:
        return None
    return present.pop() if present else None


def vector_split(u: Multivector, F: Multivector) -> tuple[Multivector, Multivector]:
    """Split ``u F_k`` into its grade ``k-1`` (inner) and ``k+1`` (outer) parts.

    ``F`` must be homogeneous; a zero ``F`` is accepted and gives two zeros.
    """
    if u.dim != F.dim:
        raise DimensionMismatchError(f"dimensions differ: {u.dim} vs {F.dim}")
    if u.grades_present() - {1}:
        raise GradeError("u must be a vector")
    present = F.grades_present()
    if len(present) > 1:
        raise GradeError(f"F is not homogeneous (grades {sorted(present)})")
    k = present.pop() if present else 0
    uf = u * F
    fu = F * u
    s = 1 if k % 2 == 0 else -1
    half = Fraction(1, 2) if (u.exact and F.exact) else 0.5
    inner = (uf - fu * s) * half
    outer = (uf + fu * s) * half
    return inner, outer
