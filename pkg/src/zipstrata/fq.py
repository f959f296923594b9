"""Small finite fields F_q (q = p^d <= 64, p in {2, 3, 5}) via exhaustive tables.

Elements are integer codes 0..q-1: the code sum(c_i p^i) stands for the
residue sum(c_i x^i) modulo a pinned Conway polynomial.  All arithmetic is
table-driven (q x q add/mul tables plus log/antilog arrays), so the field
axioms are checkable by brute force and towers embed deterministically: the
generator of F_{p^m} maps to g^((p^n-1)/(p^m-1)) in F_{p^n} whenever m | n.
"""

from __future__ import annotations

import numpy as np

from .exceptions import ConfigurationError, UsageError

# Conway polynomials, ascending coefficients, monic of degree d.
CONWAY = {
    (2, 1): (1, 1),
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (2, 6): (1, 1, 0, 1, 1, 0, 1),
    (3, 1): (1, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (5, 1): (3, 1),
    (5, 2): (2, 4, 1),
}

MAX_Q = 64


def _poly_mul_mod(a, b, modulus, p):
    """Product of coefficient lists, reduced mod (modulus, p)."""
    deg = len(modulus) - 1
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] = (out[i + j] + ca * cb) % p
    for k in range(len(out) - 1, deg - 1, -1):
        c = out[k]
        if c:
            out[k] = 0
            for j in range(deg):
                out[k - deg + j] = (out[k - deg + j] - c * modulus[j]) % p
    return out[:deg]


class Fq:
    """The field with p^degree elements, all operations precomputed."""

    def __init__(self, p: int, degree: int):
        if (p, degree) not in CONWAY:
            raise ConfigurationError(
                f"no pinned modulus for p={p}, degree={degree}"
                f" (supported: p in (2,3,5), q = p^degree <= {MAX_Q})"
            )
        self.p = p
        self.degree = degree
        self.q = p**degree
        if self.q > MAX_Q:
            raise ConfigurationError(f"q = {self.q} exceeds the supported bound {MAX_Q}")
        self.modulus = CONWAY[(p, degree)]
        q = self.q

        def decode(code):
            c, out = code, []
            for _ in range(degree):
                out.append(c % p)
                c //= p
            return out

        def encode(coeffs):
            return sum(c * p**i for i, c in enumerate(coeffs))

        add = np.zeros((q, q), dtype=np.uint8)
        for a in range(q):
            da = decode(a)
            for b in range(q):
                db = decode(b)
                add[a, b] = encode([(x + y) % p for x, y in zip(da, db)])
        mul = np.zeros((q, q), dtype=np.uint8)
        for a in range(q):
            da = decode(a)
            for b in range(a, q):
                prod = encode(_poly_mul_mod(da, decode(b), self.modulus, p))
                mul[a, b] = prod
                mul[b, a] = prod
        self.add_table = add
        self.mul_table = mul
        self.neg_table = np.array(
            [encode([(-c) % p for c in decode(a)]) for a in range(q)], dtype=np.uint8
        )
        # discrete log base the residue class of x (the Conway generator)
        gen = p % q if degree == 1 else p  # code of the polynomial "x"
        if degree == 1:
            # for prime fields the generator is the smallest primitive root,
            # i.e. the root of the Conway polynomial x - r
            gen = (-self.modulus[0]) % p
        antilog = [1]
        for _ in range(q - 2):
            antilog.append(int(mul[antilog[-1], gen]))
        if len(set(antilog)) != q - 1:
            raise ConfigurationError(
                f"pinned modulus for ({p},{degree}) is not primitive; table is corrupt"
            )
        self.generator = gen
        self.antilog = tuple(antilog)  # antilog[k] = gen^k
        log = [0] * q
        for k, v in enumerate(antilog):
            log[v] = k
        self.log = tuple(log)  # log[v] for v != 0
        inv = [0] * q
        for a in range(1, q):
            inv[a] = antilog[(q - 1 - log[a]) % (q - 1)]
        self.inv_table = np.array(inv, dtype=np.uint8)
        frob = [0] * q
        for a in range(1, q):
            frob[a] = antilog[(log[a] * p) % (q - 1)]
        self.frob_table = np.array(frob, dtype=np.uint8)  # x -> x^p

    # -- scalar operations --------------------------------------------------

    def add(self, a, b):
        return int(self.add_table[a, b])

    def sub(self, a, b):
        return int(self.add_table[a, self.neg_table[b]])

    def mul(self, a, b):
        return int(self.mul_table[a, b])

    def neg(self, a):
        return int(self.neg_table[a])

    def inv(self, a):
        if a == 0:
            raise UsageError("division by zero")
        return int(self.inv_table[a])

    def frob(self, a):
        """The p-power (arithmetic Frobenius) map."""
        return int(self.frob_table[a])

    def pow(self, a, n):
        if a == 0:
            return 0 if n else 1
        return self.antilog[(self.log[a] * n) % (self.q - 1)]

    def elements(self):
        return range(self.q)

    def units(self):
        return range(1, self.q)

    def fixed_by_frobenius(self, a) -> bool:
        return self.frob(a) == a

    def label(self) -> str:
        return f"F{self.q}"

    def __repr__(self):
        return f"Fq(p={self.p}, degree={self.degree})"

    # -- towers --------------------------------------------------------------

    def extension(self, m: int) -> "Fq":
        return Fq(self.p, self.degree * m)

    def embedding_table(self, big: "Fq") -> np.ndarray:
        """Codes of the canonical embedding into a larger field of the tower."""
        if big.p != self.p or big.degree % self.degree:
            raise UsageError(f"{big!r} is not an extension of {self!r}")
        step = (big.q - 1) // (self.q - 1)
        table = np.zeros(self.q, dtype=np.uint8)
        for a in range(1, self.q):
            table[a] = big.antilog[(self.log[a] * step) % (big.q - 1)]
        return table


def field_for_q(q: int) -> Fq:
    """The field of order q, inferring the characteristic."""
    for p in (2, 3, 5):
        d = 0
        n = q
        while n % p == 0:
            n //= p
            d += 1
        if n == 1 and d > 0:
            return Fq(p, d)
    raise ConfigurationError(f"q = {q} is not a supported prime power (p in 2,3,5; q <= {MAX_Q})")
