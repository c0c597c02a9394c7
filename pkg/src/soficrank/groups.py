"""Concrete group families with exact normal forms, plus finite permutation models.

Supported families: free abelian groups Z^d (integer vectors), free groups
F_k (reduced words), and finite groups given by an explicit multiplication
table.  A FiniteQuotient is a single finite-degree permutation model of the
group, one permutation per generator, flagged ``genuine`` when it arises
from an actual homomorphism onto a finite group acting on itself.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from sympy import factorint

__all__ = [
    "GroupFamily",
    "FreeAbelian",
    "Free",
    "FiniteTable",
    "GroupElement",
    "FiniteQuotient",
    "QuotientSequence",
    "PairDefect",
    "extend_to_word",
    "soficity_defect",
    "grid_quotient",
    "sanov_quotient",
    "regular_quotient",
    "random_quotient",
    "grid_sequence",
    "sanov_sequence",
    "regular_sequence",
    "identity_perm",
    "perm_compose",
    "perm_inverse",
    "perm_power",
]

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


# ---------------------------------------------------------------------------
# permutations (images of 0..d-1, stored as tuples)

def identity_perm(d):
    return tuple(range(d))


def perm_compose(p, q):
    """(p . q)(v) = p[q[v]], i.e. apply q first."""
    return tuple(p[x] for x in q)


def perm_inverse(p):
    inv = [0] * len(p)
    for v, w in enumerate(p):
        inv[w] = v
    return tuple(inv)


def perm_power(p, k):
    """p^k for any integer k, via cycle decomposition (cost O(d) regardless of k)."""
    d = len(p)
    if k == 0:
        return identity_perm(d)
    out = [0] * d
    seen = [False] * d
    for start in range(d):
        if seen[start]:
            continue
        cycle = [start]
        seen[start] = True
        v = p[start]
        while v != start:
            seen[v] = True
            cycle.append(v)
            v = p[v]
        n = len(cycle)
        shift = k % n
        for i, v in enumerate(cycle):
            out[v] = cycle[(i + shift) % n]
    return tuple(out)


def _check_perm(p, d):
    if len(p) != d or sorted(p) != list(range(d)):
        raise ValueError("gen_image is not a permutation of range(%d)" % d)


# ---------------------------------------------------------------------------
# group families

class GroupElement:
    """Normal-form element of one of the supported families.

    Payloads: integer vector (FreeAbelian), reduced word as a tuple of
    nonzero signed 1-based generator indices (Free), element index
    (FiniteTable).  Equality is equality of normal forms.
    """

    __slots__ = ("family", "payload")

    def __init__(self, family, payload):
        self.family = family
        self.payload = payload

    def __mul__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.family.multiply(self, other)

    def __invert__(self):
        return self.family.inverse(self)

    def __pow__(self, k):
        return self.family.power(self, k)

    def __eq__(self, other):
        return (
            isinstance(other, GroupElement)
            and self.family == other.family
            and self.payload == other.payload
        )

    def __hash__(self):
        return hash((self.family, self.payload))

    def is_identity(self):
        return self == self.family.identity()

    def __repr__(self):
        return self.family.element_str(self.payload)


class GroupFamily:
    """Base class; concrete families implement the group law on payloads."""

    gen_names: tuple

    def _wrap(self, payload):
        return GroupElement(self, payload)

    def check_member(self, a):
        if not isinstance(a, GroupElement) or a.family != self:
            raise ValueError("element does not belong to this group family")

    def generators(self):
        return [self.generator(i) for i in range(len(self.gen_names))]

    def generator_named(self, name):
        try:
            return self.generator(self.gen_names.index(name))
        except ValueError:
            raise KeyError("unknown generator name %r" % name) from None

    def power(self, a, k):
        self.check_member(a)
        k = int(k)
        if k == 0:
            return self.identity()
        base = a if k > 0 else self.inverse(a)
        k = abs(k)
        result = None
        while k:
            if k & 1:
                result = base if result is None else self.multiply(result, base)
            k >>= 1
            if k:
                base = self.multiply(base, base)
        return result


class FreeAbelian(GroupFamily):
    """Z^d with elements stored as integer vectors; generators commute."""

    def __init__(self, rank, gen_names=None):
        rank = int(rank)
        if rank < 1:
            raise ValueError("rank must be positive")
        if gen_names is None:
            if rank == 1:
                gen_names = ("t",)
            elif rank <= 3:
                gen_names = tuple("xyz"[:rank])
            else:
                gen_names = tuple("x%d" % (i + 1) for i in range(rank))
        gen_names = tuple(gen_names)
        if len(gen_names) != rank or len(set(gen_names)) != rank:
            raise ValueError("need %d distinct generator names" % rank)
        self.rank = rank
        self.gen_names = gen_names

    def __eq__(self, other):
        return (
            isinstance(other, FreeAbelian)
            and self.rank == other.rank
            and self.gen_names == other.gen_names
        )

    def __hash__(self):
        return hash(("FreeAbelian", self.rank, self.gen_names))

    def __repr__(self):
        return "FreeAbelian(%d)" % self.rank

    def identity(self):
        return self._wrap((0,) * self.rank)

    def generator(self, i):
        v = [0] * self.rank
        v[i] = 1
        return self._wrap(tuple(v))

    def multiply(self, a, b):
        self.check_member(a)
        self.check_member(b)
        return self._wrap(tuple(x + y for x, y in zip(a.payload, b.payload)))

    def inverse(self, a):
        self.check_member(a)
        return self._wrap(tuple(-x for x in a.payload))

    def power(self, a, k):
        self.check_member(a)
        k = int(k)
        return self._wrap(tuple(x * k for x in a.payload))

    def sort_key(self, payload):
        return payload

    def element_str(self, payload):
        parts = []
        for name, e in zip(self.gen_names, payload):
            if e == 0:
                continue
            parts.append(name if e == 1 else "%s^%d" % (name, e))
        return "*".join(parts) if parts else "e"


class Free(GroupFamily):
    """Free group F_k; elements are reduced words over x_1^{+-1},...,x_k^{+-1}.

    A word is a tuple of nonzero ints: +i for generator i (1-based), -i for
    its inverse, with no adjacent cancelling pair.
    """

    def __init__(self, rank, gen_names=None):
        rank = int(rank)
        if rank < 1:
            raise ValueError("rank must be positive")
        if gen_names is None:
            if rank <= 26:
                gen_names = tuple(_ALPHABET[:rank])
            else:
                gen_names = tuple("g%d" % (i + 1) for i in range(rank))
        gen_names = tuple(gen_names)
        if len(gen_names) != rank or len(set(gen_names)) != rank:
            raise ValueError("need %d distinct generator names" % rank)
        self.rank = rank
        self.gen_names = gen_names

    def __eq__(self, other):
        return (
            isinstance(other, Free)
            and self.rank == other.rank
            and self.gen_names == other.gen_names
        )

    def __hash__(self):
        return hash(("Free", self.rank, self.gen_names))

    def __repr__(self):
        return "Free(%d)" % self.rank

    def identity(self):
        return self._wrap(())

    def generator(self, i):
        if not 0 <= i < self.rank:
            raise IndexError("generator index out of range")
        return self._wrap((i + 1,))

    def reduce_word(self, letters):
        word = []
        for l in letters:
            if l == 0 or abs(l) > self.rank:
                raise ValueError("invalid letter %r" % (l,))
            if word and word[-1] == -l:
                word.pop()
            else:
                word.append(l)
        return self._wrap(tuple(word))

    def multiply(self, a, b):
        self.check_member(a)
        self.check_member(b)
        word = list(a.payload)
        for l in b.payload:
            if word and word[-1] == -l:
                word.pop()
            else:
                word.append(l)
        return self._wrap(tuple(word))

    def inverse(self, a):
        self.check_member(a)
        return self._wrap(tuple(-l for l in reversed(a.payload)))

    def sort_key(self, payload):
        # length first, then letters; inverses sort after positives
        return (len(payload), tuple((abs(l), l < 0) for l in payload))

    def element_str(self, payload):
        if not payload:
            return "e"
        runs = []
        for l in payload:
            if runs and runs[-1][0] == l:
                runs[-1][1] += 1
            else:
                runs.append([l, 1])
        parts = []
        for l, n in runs:
            name = self.gen_names[abs(l) - 1]
            e = n if l > 0 else -n
            parts.append(name if e == 1 else "%s^%d" % (name, e))
        return "*".join(parts)


class FiniteTable(GroupFamily):
    """Finite group from an explicit multiplication table (0-based internally).

    ``table[i][j]`` is the index of element i * j.  Associativity, identity
    and inverses are verified on construction (O(g^3) for associativity).
    Every element counts as a generator for permutation models.
    """

    def __init__(self, table, inverse=None, identity_index=0, names=None):
        table = tuple(tuple(int(x) for x in row) for row in table)
        g = len(table)
        if g < 1 or any(len(row) != g for row in table):
            raise ValueError("table must be square and nonempty")
        for row in table:
            for x in row:
                if not 0 <= x < g:
                    raise ValueError("table entry out of range")
        e = int(identity_index)
        if not 0 <= e < g:
            raise ValueError("identity index out of range")
        for j in range(g):
            if table[e][j] != j or table[j][e] != j:
                raise ValueError("index %d is not a two-sided identity" % e)
        if inverse is None:
            inverse = []
            for i in range(g):
                inv_i = next((j for j in range(g) if table[i][j] == e), None)
                if inv_i is None or table[inv_i][i] != e:
                    raise ValueError("element %d has no two-sided inverse" % i)
                inverse.append(inv_i)
        inverse = tuple(int(x) for x in inverse)
        if len(inverse) != g:
            raise ValueError("inverse table has wrong length")
        for i in range(g):
            if table[i][inverse[i]] != e or table[inverse[i]][i] != e:
                raise ValueError("inverse table wrong at element %d" % i)
        for a in range(g):
            for b in range(g):
                ab = table[a][b]
                for c in range(g):
                    if table[ab][c] != table[a][table[b][c]]:
                        raise ValueError(
                            "table is not associative at (%d,%d,%d)" % (a, b, c)
                        )
        if names is None:
            names = tuple(
                "e" if i == e else "g%d" % (i + 1) for i in range(g)
            )
        names = tuple(str(n) for n in names)
        if len(names) != g or len(set(names)) != g:
            raise ValueError("need %d distinct element names" % g)
        self.table = table
        self.inverse_table = inverse
        self.identity_index = e
        self.order = g
        self.gen_names = names

    @classmethod
    def cyclic(cls, n, names=None):
        """Z/n with generator t: element i is t^i."""
        n = int(n)
        if n < 1:
            raise ValueError("order must be positive")
        table = [[(i + j) % n for j in range(n)] for i in range(n)]
        if names is None and n > 1:
            names = tuple("e" if i == 0 else ("t" if i == 1 else "t%d" % i)
                          for i in range(n))
        return cls(table, identity_index=0, names=names)

    @classmethod
    def from_text(cls, text, names=None):
        """Parse the plain-text table format.

        First line: g.  Then g lines of g 1-based indices (row i, column j
        holds the index of element i*j).  Then one line of 1-based inverse
        indices.  Identity is index 1.
        """
        lines = [l.split("#", 1)[0].strip() for l in text.splitlines()]
        lines = [l for l in lines if l]
        if not lines:
            raise ValueError("empty table file")
        try:
            g = int(lines[0])
        except ValueError:
            raise ValueError("first line must be the group order") from None
        if len(lines) != g + 2:
            raise ValueError("expected %d lines, got %d" % (g + 2, len(lines)))
        table = []
        for l in lines[1 : g + 1]:
            row = [int(x) - 1 for x in l.split()]
            table.append(row)
        inverse = [int(x) - 1 for x in lines[g + 1].split()]
        return cls(table, inverse=inverse, identity_index=0, names=names)

    def to_text(self):
        out = [str(self.order)]
        for row in self.table:
            out.append(" ".join(str(x + 1) for x in row))
        out.append(" ".join(str(x + 1) for x in self.inverse_table))
        return "\n".join(out) + "\n"

    def __eq__(self, other):
        return (
            isinstance(other, FiniteTable)
            and self.table == other.table
            and self.identity_index == other.identity_index
            and self.gen_names == other.gen_names
        )

    def __hash__(self):
        return hash(("FiniteTable", self.table, self.identity_index, self.gen_names))

    def __repr__(self):
        return "FiniteTable(order=%d)" % self.order

    def identity(self):
        return self._wrap(self.identity_index)

    def generator(self, i):
        if not 0 <= i < self.order:
            raise IndexError("element index out of range")
        return self._wrap(i)

    def element(self, i):
        return self.generator(i)

    def elements(self):
        return [self._wrap(i) for i in range(self.order)]

    def multiply(self, a, b):
        self.check_member(a)
        self.check_member(b)
        return self._wrap(self.table[a.payload][b.payload])

    def inverse(self, a):
        self.check_member(a)
        return self._wrap(self.inverse_table[a.payload])

    def sort_key(self, payload):
        return payload

    def element_str(self, payload):
        return self.gen_names[payload]


# ---------------------------------------------------------------------------
# finite permutation models

@dataclass(frozen=True)
class FiniteQuotient:
    """A degree-d permutation model sigma: generators -> Sym(d).

    ``genuine`` means the model comes from an actual homomorphism onto a
    finite group; for FreeAbelian and FiniteTable families this is verified
    on construction by extending the gen_images along the defining relators.
    """

    family: GroupFamily
    degree: int
    gen_images: tuple
    genuine: bool
    label: str = ""

    def __post_init__(self):
        d = self.degree
        if d < 1:
            raise ValueError("degree must be positive")
        images = tuple(tuple(p) for p in self.gen_images)
        object.__setattr__(self, "gen_images", images)
        expected = (
            self.family.order
            if isinstance(self.family, FiniteTable)
            else self.family.rank
        )
        if len(images) != expected:
            raise ValueError(
                "expected %d generator images, got %d" % (expected, len(images))
            )
        for p in images:
            _check_perm(p, d)
        if self.genuine:
            self._check_relators()

    def _check_relators(self):
        fam = self.family
        images = self.gen_images
        if isinstance(fam, FreeAbelian):
            for i in range(len(images)):
                for j in range(i + 1, len(images)):
                    if perm_compose(images[i], images[j]) != perm_compose(
                        images[j], images[i]
                    ):
                        raise ValueError(
                            "genuine FreeAbelian model requires commuting images"
                        )
        elif isinstance(fam, FiniteTable):
            if images[fam.identity_index] != identity_perm(self.degree):
                raise ValueError("genuine model must send the identity to id")
            for a in range(fam.order):
                for b in range(fam.order):
                    ab = fam.table[a][b]
                    if perm_compose(images[a], images[b]) != images[ab]:
                        raise ValueError(
                            "genuine FiniteTable model must respect the table"
                        )
        # Free families: any generator assignment extends to a homomorphism.

    def permutation_of(self, w):
        return extend_to_word(self, w)


def extend_to_word(q, w):
    """Compose the quotient's gen_images along the normal form of w.

    Returns the identity permutation for the identity element.  For genuine
    quotients the result depends only on the group element, not its spelling.
    """
    fam = q.family
    fam.check_member(w)
    if isinstance(fam, FiniteTable):
        if w.payload == fam.identity_index:
            return identity_perm(q.degree)
        return q.gen_images[w.payload]
    if isinstance(fam, FreeAbelian):
        result = identity_perm(q.degree)
        for i, e in enumerate(w.payload):
            if e:
                result = perm_compose(result, perm_power(q.gen_images[i], e))
        return result
    # Free: compose letter images left to right (apply the last letter first)
    result = None
    for l in w.payload:
        p = q.gen_images[abs(l) - 1]
        if l < 0:
            p = perm_inverse(p)
        result = p if result is None else perm_compose(result, p)
    return result if result is not None else identity_perm(q.degree)


@dataclass(frozen=True)
class PairDefect:
    s: GroupElement
    t: GroupElement
    mult_defect: Fraction
    sep_defect: object  # Fraction, or None when s == t


def soficity_defect(q, pairs):
    """Per-pair multiplicativity and separation defects of a finite model.

    mult_defect(s,t) = 1 - |{v : sigma_s sigma_t v = sigma_{st} v}| / d and
    sep_defect(s,t) = 1 - |{v : sigma_s v != sigma_t v}| / d (None for s = t).
    A sequence of models is a sofic approximation when both tend to 0.
    """
    d = q.degree
    out = []
    for s, t in pairs:
        ps = extend_to_word(q, s)
        pt = extend_to_word(q, t)
        pst = extend_to_word(q, s * t)
        good = sum(1 for v in range(d) if ps[pt[v]] == pst[v])
        mult = 1 - Fraction(good, d)
        if s == t:
            sep = None
        else:
            apart = sum(1 for v in range(d) if ps[v] != pt[v])
            sep = 1 - Fraction(apart, d)
        out.append(PairDefect(s, t, mult, sep))
    return out


# ---------------------------------------------------------------------------
# providers

def grid_quotient(rank, modulus, family=None):
    """Z^rank acting by translation on (Z/modulus)^rank; genuine, degree modulus^rank."""
    rank = int(rank)
    n = int(modulus)
    if n < 1:
        raise ValueError("modulus must be positive")
    if family is None:
        family = FreeAbelian(rank)
    elif not isinstance(family, FreeAbelian) or family.rank != rank:
        raise ValueError("family does not match grid parameters")
    d = n ** rank
    images = []
    for i in range(rank):
        stride = n ** i
        block = n ** (i + 1)
        img = [0] * d
        for v in range(d):
            coord = (v // stride) % n
            img[v] = v + stride if coord != n - 1 else v + stride - block
        images.append(tuple(img))
    return FiniteQuotient(family, d, tuple(images), True, "grid mod %d" % n)


def _sl2_size(m):
    size = m ** 3
    for p in factorint(m):
        size = size // (p * p) * (p * p - 1)
    return size


def _sl2_mul(x, y, m):
    a, b, c, d = x
    e, f, g, h = y
    return ((a * e + b * g) % m, (a * f + b * h) % m,
            (c * e + d * g) % m, (c * f + d * h) % m)


def sanov_quotient(modulus, family=None):
    """F_2 -> SL_2(Z/m) via a -> [[1,2],[0,1]], b -> [[1,0],[2,1]], m odd >= 3.

    The permutation model is the left regular action on SL_2(Z/m); for odd m
    the two images generate the whole group (2 is a unit, so powers of the
    images give all elementary matrices).  Kernels form a chain with trivial
    intersection along divisibility of the moduli.
    """
    m = int(modulus)
    if m < 3 or m % 2 == 0:
        raise ValueError("sanov modulus must be odd and >= 3")
    if family is None:
        family = Free(2)
    elif not isinstance(family, Free) or family.rank != 2:
        raise ValueError("sanov quotient needs a rank-2 free family")
    gen_a = (1, 2 % m, 0, 1)
    gen_b = (1, 0, 2 % m, 1)
    inv_a = (1, (-2) % m, 0, 1)
    inv_b = (1, 0, (-2) % m, 1)
    identity = (1, 0, 0, 1)
    seen = {identity}
    frontier = [identity]
    steps = (gen_a, gen_b, inv_a, inv_b)
    while frontier:
        nxt = []
        for x in frontier:
            for s in steps:
                y = _sl2_mul(s, x, m)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    elements = sorted(seen)
    d = len(elements)
    if d != _sl2_size(m):
        raise RuntimeError("Sanov images failed to generate SL2(Z/%d)" % m)
    index = {x: i for i, x in enumerate(elements)}
    img_a = tuple(index[_sl2_mul(gen_a, x, m)] for x in elements)
    img_b = tuple(index[_sl2_mul(gen_b, x, m)] for x in elements)
    return FiniteQuotient(family, d, (img_a, img_b), True, "Sanov mod %d" % m)


def regular_quotient(family):
    """Left regular action of a finite-table group on itself; genuine, degree g."""
    if not isinstance(family, FiniteTable):
        raise ValueError("regular quotient needs a FiniteTable family")
    images = tuple(tuple(row) for row in family.table)
    return FiniteQuotient(
        family, family.order, images, True, "regular |G|=%d" % family.order
    )


def random_quotient(family, degree, seed):
    """Uniformly random permutation per generator; heuristic (genuine = False)."""
    d = int(degree)
    if d < 1:
        raise ValueError("degree must be positive")
    rng = random.Random(seed)
    if isinstance(family, FiniteTable):
        count = family.order
    else:
        count = family.rank
    images = []
    for i in range(count):
        if isinstance(family, FiniteTable) and i == family.identity_index:
            images.append(identity_perm(d))
            continue
        img = list(range(d))
        rng.shuffle(img)
        images.append(tuple(img))
    return FiniteQuotient(
        family, d, tuple(images), False, "random d=%d seed=%r" % (d, seed)
    )


# ---------------------------------------------------------------------------
# sequences

@dataclass(frozen=True)
class QuotientSequence:
    """A finite prefix of a sofic approximation, one model per stage.

    ``chain`` asserts that the underlying kernels form a decreasing chain
    with trivial intersection; a finite prefix cannot certify this, so the
    flag is provider-asserted (providers set it from modulus divisibility).
    """

    quotients: tuple
    chain: bool = False

    def __post_init__(self):
        qs = tuple(self.quotients)
        object.__setattr__(self, "quotients", qs)
        if not qs:
            raise ValueError("empty quotient sequence")
        fam = qs[0].family
        for q in qs:
            if q.family != fam:
                raise ValueError("all quotients must share one family")
        degrees = [q.degree for q in qs]
        if any(a >= b for a, b in zip(degrees, degrees[1:])):
            raise ValueError("degrees must strictly increase")

    @property
    def family(self):
        return self.quotients[0].family

    def __iter__(self):
        return iter(self.quotients)

    def __len__(self):
        return len(self.quotients)


def _divisibility_chain(moduli):
    return all(b % a == 0 for a, b in zip(moduli, moduli[1:]))


def grid_sequence(rank, moduli, family=None):
    moduli = [int(m) for m in moduli]
    qs = tuple(grid_quotient(rank, m, family) for m in moduli)
    return QuotientSequence(qs, chain=_divisibility_chain(moduli))


def sanov_sequence(moduli, family=None):
    moduli = [int(m) for m in moduli]
    qs = tuple(sanov_quotient(m, family) for m in moduli)
    return QuotientSequence(qs, chain=_divisibility_chain(moduli))


def regular_sequence(family):
    # single exact stage; the kernel is already trivial
    return QuotientSequence((regular_quotient(family),), chain=True)
