"""Exact arithmetic in Gamma = HNN(Z^n, Z^n, m1, m2).

Elements are kept in a reduced normal form

    g  =  r_1 t^{e_1}  r_2 t^{e_2}  ...  r_k t^{e_k}  *  head

where head is a free Z^n factor, each r_i is the canonical coset
representative of m2 Z^n when e_i = +1 and of m1 Z^n when e_i = -1,
and no syllable with zero representative follows a syllable of the
opposite sign (that pattern is a pinch t^e 0 t^-e and is rewritten
away).  With these constraints the form is unique, so equality of
group elements is structural equality.

Normalization is a right fold: multiplying on the right by a lattice
vector only touches head; multiplying by t^e splits head against the
appropriate sublattice, emits one syllable, and possibly cancels a
pinch.  Multiplication and inversion replay one operand letter by
letter, so their cost is linear in syllable count.

The trailing position of head is what makes Bass-Serre bookkeeping
cheap: the left coset g * Z^n is exactly the syllable part of g.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .errors import BudgetExceeded, NotWithinBudget, UnsupportedPresentation
from .presentation import Presentation, parse_word
from .ratmat import mat_vec, vec_neg

Syllable = tuple[tuple[int, ...], int]  # (representative, sign)


class GroupElement:
    """Immutable reduced form; hashable; compares structurally."""

    __slots__ = ("pres", "syllables", "head", "_hash")

    def __init__(self, pres: Presentation, syllables: tuple[Syllable, ...], head: tuple[int, ...]):
        self.pres = pres
        self.syllables = syllables
        self.head = head
        self._hash = hash((syllables, head))

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return (self.syllables == other.syllables
                and self.head == other.head
                and (self.pres is other.pres or self.pres == other.pres))

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"GroupElement({to_string(self)!r})"

    def __mul__(self, other):
        return multiply(self, other)

    def is_identity(self) -> bool:
        return not self.syllables and all(v == 0 for v in self.head)


def identity(pres: Presentation) -> GroupElement:
    return GroupElement(pres, (), (0,) * pres.n)


def from_vector(pres: Presentation, v: Sequence[int]) -> GroupElement:
    return GroupElement(pres, (), tuple(int(x) for x in v))


# -- incremental normalization ------------------------------------------------

def _append_g(sylls: list, head: list, v) -> None:
    for i, x in enumerate(v):
        head[i] += x


def _append_t(pres: Presentation, sylls: list, head: list, eps: int) -> None:
    if eps == 1:
        rep, u = pres.table2.decompose(head)
        carried = mat_vec(pres.m1, u)
    else:
        rep, u = pres.table1.decompose(head)
        carried = mat_vec(pres.m2, u)
    carried = [int(x) for x in carried]
    zero = all(r == 0 for r in rep)
    if zero and sylls and sylls[-1][1] == -eps:
        # pinch t^-e 0 t^e: cancel the previous syllable into the head
        prev_rep, _ = sylls.pop()
        for i in range(len(head)):
            head[i] = prev_rep[i] + carried[i]
    else:
        sylls.append((rep, eps))
        for i in range(len(head)):
            head[i] = carried[i]


def _append_element(pres, sylls, head, g: GroupElement) -> None:
    for rep, eps in g.syllables:
        _append_g(sylls, head, rep)
        _append_t(pres, sylls, head, eps)
    _append_g(sylls, head, g.head)


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    if a.pres is not b.pres and a.pres != b.pres:
        raise ValueError("operands live over different presentations")
    sylls = list(a.syllables)
    head = list(a.head)
    _append_element(a.pres, sylls, head, b)
    return GroupElement(a.pres, tuple(sylls), tuple(head))


def inverse(a: GroupElement) -> GroupElement:
    sylls: list = []
    head = [0] * a.pres.n
    _append_g(sylls, head, vec_neg(a.head))
    for rep, eps in reversed(a.syllables):
        _append_t(a.pres, sylls, head, -eps)
        _append_g(sylls, head, vec_neg(rep))
    return GroupElement(a.pres, tuple(sylls), tuple(head))


def britton_reduce(pres: Presentation, word: Iterable[tuple[str, int]]) -> GroupElement:
    """Reduce a letter sequence [(generator, exponent), ...] to normal form.

    Letters come from :func:`hnngeo.presentation.parse_word` or are built
    programmatically; "x<i>" moves the head, "t" folds in syllables.
    Reducing the letters of an already reduced element is the identity
    operation, which is the uniqueness check used by the tests.
    """
    sylls: list = []
    head = [0] * pres.n
    for name, exp in word:
        if name == "t":
            step = 1 if exp > 0 else -1
            for _ in range(abs(exp)):
                _append_t(pres, sylls, head, step)
        else:
            i = int(name[1:]) - 1
            if not (0 <= i < pres.n):
                raise ValueError(f"generator index out of range: {name}")
            head[i] += exp
    return GroupElement(pres, tuple(sylls), tuple(head))


def reduce_string(pres: Presentation, text: str) -> GroupElement:
    return britton_reduce(pres, parse_word(pres, text))


def to_letters(g: GroupElement) -> list[tuple[str, int]]:
    out: list[tuple[str, int]] = []

    def emit_vec(v):
        for i, x in enumerate(v):
            if x:
                out.append((f"x{i + 1}", int(x)))

    for rep, eps in g.syllables:
        emit_vec(rep)
        out.append(("t", eps))
    emit_vec(g.head)
    return out


def to_string(g: GroupElement) -> str:
    letters = to_letters(g)
    if not letters:
        return "e"
    merged: list[tuple[str, int]] = []
    for name, exp in letters:
        if merged and merged[-1][0] == name:
            merged[-1] = (name, merged[-1][1] + exp)
        else:
            merged.append((name, exp))
    parts = []
    for name, exp in merged:
        if exp == 0:
            continue
        if g.pres.n == 1 and name == "x1":
            name = "x"
        parts.append(name if exp == 1 else f"{name}^{exp}")
    return " ".join(parts) if parts else "e"


# -- homomorphisms -------------------------------------------------------------

def t_exponent(g: GroupElement) -> int:
    return sum(eps for _, eps in g.syllables)


def j_N(g: GroupElement) -> tuple[tuple[Fraction, ...], int]:
    """Image in R^n x| Z under x_i -> (e_i, 0), t -> (0, 1).

    The semidirect law (v, k)(v', k') = (v + phi^k v', k + k') makes this
    a homomorphism precisely because phi @ m1 == m2.  Exact rationals.
    """
    pres = g.pres
    v = tuple(Fraction(0) for _ in range(pres.n))
    k = 0

    def absorb(vec):
        nonlocal v
        shifted = mat_vec(pres.phi_power(k), vec)
        v = tuple(a + b for a, b in zip(v, shifted))

    for rep, eps in g.syllables:
        absorb(rep)
        k += eps
    absorb(g.head)
    return v, k


# -- word metric ---------------------------------------------------------------

def generators(pres: Presentation) -> list[GroupElement]:
    """The 2n+2 monoid generators: basis vectors, t, and inverses."""
    gens = []
    for i in range(pres.n):
        e = pres.basis_vector(i)
        gens.append(from_vector(pres, e))
        gens.append(from_vector(pres, vec_neg(e)))
    t_sylls: list = []
    t_head = [0] * pres.n
    _append_t(pres, t_sylls, t_head, 1)
    gens.append(GroupElement(pres, tuple(t_sylls), tuple(t_head)))
    s: list = []
    h = [0] * pres.n
    _append_t(pres, s, h, -1)
    gens.append(GroupElement(pres, tuple(s), tuple(h)))
    return gens


def ball(pres: Presentation, radius: int, max_elements: int = 2_000_000) -> dict[GroupElement, int]:
    """All reduced forms of word length <= radius, mapped to exact length.

    Breadth-first search over normal forms; the guard protects against
    the exponential growth of these balls.
    """
    gens = generators(pres)
    dist = {identity(pres): 0}
    frontier = [identity(pres)]
    for r in range(1, radius + 1):
        nxt = []
        for g in frontier:
            for s in gens:
                h = multiply(g, s)
                if h not in dist:
                    dist[h] = r
                    nxt.append(h)
                    if len(dist) > max_elements:
                        raise BudgetExceeded(
                            f"ball({radius}) exceeds {max_elements} elements")
        frontier = nxt
    return dist


def word_length(g: GroupElement, budget: int) -> int:
    """Shortest word over the generators, by BFS from the identity.

    Raises NotWithinBudget when |g| > budget; this flags the search
    bound, not an arithmetic failure.
    """
    if g.is_identity():
        return 0
    gens = generators(g.pres)
    seen = {identity(g.pres)}
    frontier = [identity(g.pres)]
    for r in range(1, budget + 1):
        nxt = []
        for e in frontier:
            for s in gens:
                h = multiply(e, s)
                if h == g:
                    return r
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
    raise NotWithinBudget(f"element not within word-length budget {budget}")


# -- affine oracle for rank-1 ascending presentations --------------------------

def affine_oracle(g: GroupElement) -> tuple[Fraction, Fraction]:
    """Faithful affine image for n = 1, m1 = [[1]], |q| >= 2.

    x acts on the line as y -> y + 1 and t as y -> q y; the relation
    t x t^-1 = x^q holds, and for |q| >= 2 the representation is
    faithful, so it is an independent equality oracle for reduced
    forms.  Returns (scale, offset) with g(y) = scale * y + offset.
    """
    pres = g.pres
    if pres.n != 1 or pres.m1 != ((1,),):
        raise UnsupportedPresentation("affine oracle needs n=1 and m1=[[1]]")
    q = pres.m2[0][0]
    if abs(q) < 2:
        raise UnsupportedPresentation("affine oracle needs |q| >= 2 to be faithful")
    scale, offset = Fraction(1), Fraction(0)

    def compose(a2, b2):
        nonlocal scale, offset
        scale, offset = scale * a2, scale * b2 + offset

    for name, exp in to_letters(g):
        if name == "t":
            compose(Fraction(q) ** exp, Fraction(0))
        else:
            compose(Fraction(1), Fraction(exp))
    return scale, offset


def affine_of_word(pres: Presentation, word: Iterable[tuple[str, int]]) -> tuple[Fraction, Fraction]:
    """Affine image of a raw letter sequence (no reduction involved)."""
    if pres.n != 1 or pres.m1 != ((1,),):
        raise UnsupportedPresentation("affine oracle needs n=1 and m1=[[1]]")
    q = pres.m2[0][0]
    if abs(q) < 2:
        raise UnsupportedPresentation("affine oracle needs |q| >= 2 to be faithful")
    scale, offset = Fraction(1), Fraction(0)
    for name, exp in word:
        if name == "t":
            scale = scale * Fraction(q) ** exp
        else:
            scale, offset = scale, scale * exp + offset
    return scale, offset


def random_word(pres: Presentation, length: int, rng) -> list[tuple[str, int]]:
    """Uniform letters over the symmetric generating set."""
    names = [f"x{i + 1}" for i in range(pres.n)] + ["t"]
    out = []
    for _ in range(length):
        name = rng.choice(names)
        out.append((name, rng.choice((1, -1))))
    return out


def random_element(pres: Presentation, length: int, rng) -> GroupElement:
    return britton_reduce(pres, random_word(pres, length, rng))
