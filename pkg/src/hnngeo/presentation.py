"""HNN data for extensions of Z^n by a stable letter.

A presentation bundles two injective integer matrices m1, m2 (the
inclusions i1, i2 of the base lattice into itself) and a rational
matrix phi with phi @ m1 == m2.  The group is

    Gamma = < x_1..x_n, t | t (m1 h) t^-1 = m2 h  for all h in Z^n >,

i.e. conjugation by t carries the sublattice m1 Z^n onto m2 Z^n via
phi.  phi is simultaneously the automorphism of R^n used by the
semidirect-product image of Gamma and by the warped-space action, so
the conjugacy check here is what makes those maps homomorphisms.

Convention note: the classical two-parameter family <x,t | t x^p t^-1
= x^q> enters through the ``bs:p:q`` preset as m1=[[p]], m2=[[q]],
which forces phi=[[q/p]].  The same relation direction is applied to
everything (Britton pinches, tree orientation, semidirect law).
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConjugacyMismatch, SingularMatrix, UnknownLetter
from .ratmat import (
    FracMatrix,
    IntMatrix,
    det,
    frac_matrix,
    identity,
    int_matrix,
    mat_eq,
    mat_inv,
    mat_mul,
    mat_vec,
    parse_fraction,
)


class CosetTable:
    """Canonical transversal of lattice @ Z^n inside Z^n.

    Representatives are chosen once and for all: enumerate the box
    [0, K)^n with K = |det lattice| (the box meets every class because
    K * Z^n is contained in lattice @ Z^n), keep the lexicographically
    least vector per class.  The zero class is represented by zero.
    """

    def __init__(self, lattice: IntMatrix):
        self.lattice = lattice
        self.n = len(lattice)
        d = det(lattice)
        if d == 0:
            raise SingularMatrix("coset lattice is singular")
        self.index = abs(int(d))
        self._inv = mat_inv(lattice)
        reps_by_class: dict[tuple, tuple[int, ...]] = {}
        for cand in itertools.product(range(self.index), repeat=self.n):
            key = self._class_key(cand)
            if key not in reps_by_class:
                reps_by_class[key] = cand
        if len(reps_by_class) != self.index:
            raise AssertionError("coset enumeration disagrees with |det|")
        self.reps: list[tuple[int, ...]] = sorted(reps_by_class.values())
        self._rep_of_class = {self._class_key(r): r for r in self.reps}
        zero = (0,) * self.n
        # box enumeration starts at the origin, so the zero class gets zero
        assert self._rep_of_class[self._class_key(zero)] == zero

    def _class_key(self, v) -> tuple:
        w = mat_vec(self._inv, v)
        return tuple(x - (x.numerator // x.denominator) for x in w)

    def rep(self, v) -> tuple[int, ...]:
        return self._rep_of_class[self._class_key(v)]

    def decompose(self, v) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Split v = rep + lattice @ u exactly; u is integral."""
        r = self.rep(v)
        diff = tuple(int(a) - int(b) for a, b in zip(v, r))
        u = mat_vec(self._inv, diff)
        out = []
        for x in u:
            if x.denominator != 1:
                raise AssertionError("decompose produced a non-integer quotient")
            out.append(int(x))
        return r, tuple(out)

    def is_member(self, v) -> bool:
        return self.rep(v) == (0,) * self.n


@dataclass(frozen=True)
class Presentation:
    """Checked HNN datum.  Built through :func:`validate_presentation`."""

    n: int
    m1: IntMatrix
    m2: IntMatrix
    phi: FracMatrix
    label: str = field(compare=False, default="")
    # derived, filled in by validate_presentation
    table1: CosetTable = field(compare=False, repr=False, default=None)
    table2: CosetTable = field(compare=False, repr=False, default=None)
    phi_inv: FracMatrix = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_phi_pow_cache", {})

    # -- generator alphabet -------------------------------------------------
    def generator_names(self) -> list[str]:
        base = [f"x{i + 1}" for i in range(self.n)]
        return base + ["t"]

    def basis_vector(self, i: int) -> tuple[int, ...]:
        return tuple(1 if j == i else 0 for j in range(self.n))

    def phi_power(self, k: int) -> FracMatrix:
        cache = self._phi_pow_cache
        if k not in cache:
            if k == 0:
                cache[k] = frac_matrix(identity(self.n))
            elif k > 0:
                cache[k] = mat_mul(self.phi_power(k - 1), self.phi)
            else:
                cache[k] = mat_mul(self.phi_power(k + 1), self.phi_inv)
        return cache[k]

    def index1(self) -> int:
        return self.table1.index

    def index2(self) -> int:
        return self.table2.index


def validate_presentation(n, m1, m2, phi, label: str = "") -> Presentation:
    """Check the HNN invariants and attach coset tables.

    Raises SingularMatrix when an inclusion is not injective, and
    ConjugacyMismatch when phi @ m1 != m2.
    """
    m1 = int_matrix(m1)
    m2 = int_matrix(m2)
    phi = frac_matrix(phi)
    if len(m1) != n or len(m2) != n or len(phi) != n:
        raise ValueError("matrix sizes disagree with n")
    if det(m1) == 0:
        raise SingularMatrix("m1 has determinant 0")
    if det(m2) == 0:
        raise SingularMatrix("m2 has determinant 0")
    if not mat_eq(mat_mul(phi, m1), m2):
        raise ConjugacyMismatch("phi @ m1 != m2")
    pres = Presentation(n=n, m1=m1, m2=m2, phi=phi, label=label)
    object.__setattr__(pres, "table1", CosetTable(m1))
    object.__setattr__(pres, "table2", CosetTable(m2))
    object.__setattr__(pres, "phi_inv", mat_inv(phi))
    return pres


# -- presets and serialization ----------------------------------------------

_PRESET_BS = re.compile(r"^bs:(-?\d+):(-?\d+)$")
_PRESET_ABC = re.compile(r"^abc:(\d+):(.+)$")


def _parse_matrix_arg(n: int, text: str) -> IntMatrix:
    rows = [r for r in text.split(";") if r.strip()]
    if len(rows) != n:
        raise ValueError(f"expected {n} matrix rows, got {len(rows)}")
    return int_matrix([[int(v) for v in row.split(",")] for row in rows])


def preset(name: str) -> Presentation:
    """Expand ``bs:p:q`` or ``abc:n:<rows>`` (rows ';'-separated,
    entries ','-separated) into a checked presentation.

    ``bs:p:q``  -> n=1, m1=[[p]], m2=[[q]], phi=[[q/p]].
    ``abc:n:M`` -> m1 = identity, m2 = M, phi = M (M in GL_n(Z)).
    """
    m = _PRESET_BS.match(name)
    if m:
        p, q = int(m.group(1)), int(m.group(2))
        if p == 0 or q == 0:
            raise SingularMatrix("bs preset needs nonzero p, q")
        return validate_presentation(
            1, [[p]], [[q]], [[Fraction(q, p)]], label=name)
    m = _PRESET_ABC.match(name)
    if m:
        n = int(m.group(1))
        mat = _parse_matrix_arg(n, m.group(2))
        if abs(det(mat)) != 1:
            raise ConjugacyMismatch("abc preset needs m2 in GL_n(Z)")
        return validate_presentation(n, identity(n), mat, mat, label=name)
    raise ValueError(f"unknown preset {name!r}")


def from_json_dict(doc: dict, label: str = "") -> Presentation:
    """Schema: {"n": int, "m1": [[int]], "m2": [[int]], "phi": [["a/b"]]}"""
    n = int(doc["n"])
    phi = [[parse_fraction(v) for v in row] for row in doc["phi"]]
    return validate_presentation(n, doc["m1"], doc["m2"], phi, label=label)


def load(source: str) -> Presentation:
    """Load a presentation from a preset string or a JSON file path."""
    if source.startswith(("bs:", "abc:")):
        return preset(source)
    with open(source) as fh:
        return from_json_dict(json.load(fh), label=source)


# -- word tokens --------------------------------------------------------------

_TOKEN = re.compile(r"^([a-zA-Z]\w*?)(?:\^(-?\d+))?$")


def parse_word(pres: Presentation, text: str) -> list[tuple[str, int]]:
    """Parse "t x^2 t^-1" into [(letter, exponent), ...].

    Letters are x1..xn and t; for n == 1 the alias "x" is accepted.
    Raises UnknownLetter with the offending token position.
    """
    out = []
    names = set(pres.generator_names())
    for pos, token in enumerate(text.split()):
        m = _TOKEN.match(token)
        if not m:
            raise UnknownLetter(f"cannot parse token {token!r} at position {pos}")
        name, exp = m.group(1), int(m.group(2) or 1)
        if name == "x" and pres.n == 1:
            name = "x1"
        if name not in names:
            raise UnknownLetter(f"unknown generator {name!r} at position {pos}")
        if exp != 0:
            out.append((name, exp))
    return out
