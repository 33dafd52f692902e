"""Exact sparse arithmetic in Z[A^{+-1}, M].

Polynomials are Laurent in the variable A and ordinary (non-negative
exponents) in M, with arbitrary-precision integer coefficients.  The
representation is a map (a_exp, m_exp) -> coeff with zero coefficients
pruned, so equality is plain map equality and everything is exact.
"""

from __future__ import annotations

from typing import Iterable, Iterator

from .errors import NotDivisibleError

Monomial = tuple[int, int]  # (a_exp, m_exp)


class LaurentBipoly:
    """Immutable sparse polynomial in Z[A^{+-1}, M]."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable[tuple[Monomial, int]] | dict[Monomial, int] = ()):
        items = terms.items() if isinstance(terms, dict) else terms
        acc: dict[Monomial, int] = {}
        for (a, m), c in items:
            if m < 0:
                raise ValueError(f"negative M exponent {m}")
            key = (a, m)
            c = acc.get(key, 0) + c
            if c:
                acc[key] = c
            elif key in acc:
                del acc[key]
        self._terms = acc

    # -- constructors ------------------------------------------------

    @staticmethod
    def zero() -> "LaurentBipoly":
        return LaurentBipoly()

    @staticmethod
    def one() -> "LaurentBipoly":
        return LaurentBipoly({(0, 0): 1})

    @staticmethod
    def monomial(coeff: int, a_exp: int = 0, m_exp: int = 0) -> "LaurentBipoly":
        return LaurentBipoly({(a_exp, m_exp): coeff})

    # -- basic queries -----------------------------------------------

    def items(self) -> Iterator[tuple[Monomial, int]]:
        """Terms in canonical order: ascending (a_exp, m_exp)."""
        return iter(sorted(self._terms.items()))

    def is_zero(self) -> bool:
        return not self._terms

    def is_m_free(self) -> bool:
        return all(m == 0 for _, m in self._terms)

    def coeff(self, a_exp: int, m_exp: int = 0) -> int:
        return self._terms.get((a_exp, m_exp), 0)

    def a_exponents(self) -> set[int]:
        return {a for a, _ in self._terms}

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    # -- ring structure ----------------------------------------------

    def __add__(self, other: "LaurentBipoly") -> "LaurentBipoly":
        acc = dict(self._terms)
        for key, c in other._terms.items():
            s = acc.get(key, 0) + c
            if s:
                acc[key] = s
            elif key in acc:
                del acc[key]
        out = LaurentBipoly()
        out._terms = acc
        return out

    def __neg__(self) -> "LaurentBipoly":
        out = LaurentBipoly()
        out._terms = {k: -c for k, c in self._terms.items()}
        return out

    def __sub__(self, other: "LaurentBipoly") -> "LaurentBipoly":
        return self + (-other)

    def __mul__(self, other: "LaurentBipoly") -> "LaurentBipoly":
        acc: dict[Monomial, int] = {}
        for (a1, m1), c1 in self._terms.items():
            for (a2, m2), c2 in other._terms.items():
                key = (a1 + a2, m1 + m2)
                s = acc.get(key, 0) + c1 * c2
                if s:
                    acc[key] = s
                elif key in acc:
                    del acc[key]
        out = LaurentBipoly()
        out._terms = acc
        return out

    def __pow__(self, n: int) -> "LaurentBipoly":
        if n < 0:
            raise ValueError("negative powers are not defined in Z[A^{+-1}, M]")
        result = LaurentBipoly.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LaurentBipoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(tuple(sorted(self._terms.items())))

    # -- display and serialization -----------------------------------

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts: list[str] = []
        for (a, m), c in self.items():
            factors: list[str] = []
            if a:
                factors.append(f"A^{a}" if a != 1 else "A")
            if m:
                factors.append(f"M^{m}" if m != 1 else "M")
            if not factors:
                body = str(abs(c))
            else:
                body = "*".join(factors)
                if abs(c) != 1:
                    body = f"{abs(c)}*{body}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"LaurentBipoly({self})"

    def to_triples(self) -> list[list[int]]:
        """JSON form: [a_exp, m_exp, coeff] triples in canonical order."""
        return [[a, m, c] for (a, m), c in self.items()]

    @staticmethod
    def from_triples(triples: Iterable[Iterable[int]]) -> "LaurentBipoly":
        return LaurentBipoly([((a, m), c) for a, m, c in triples])


# Frequently used elements.
ZERO = LaurentBipoly.zero()
ONE = LaurentBipoly.one()
A = LaurentBipoly.monomial(1, 1, 0)
M = LaurentBipoly.monomial(1, 0, 1)
# Value of a disjoint bar-free circle.
DELTA = LaurentBipoly({(-2, 0): -1, (2, 0): -1})


def a_power(n: int) -> LaurentBipoly:
    """A^n for any integer n."""
    return LaurentBipoly.monomial(1, n, 0)


def minus_a_power(n: int) -> LaurentBipoly:
    """(-A)^n for any integer n."""
    return LaurentBipoly.monomial(-1 if n % 2 else 1, n, 0)


def poly_mul(p: LaurentBipoly, q: LaurentBipoly) -> LaurentBipoly:
    return p * q


def poly_eval_M(p: LaurentBipoly, s: LaurentBipoly) -> LaurentBipoly:
    """Substitute the polynomial s for the variable M and collect."""
    powers: dict[int, LaurentBipoly] = {0: ONE}
    out = ZERO
    for (a, m), c in p.items():
        if m not in powers:
            powers[m] = s**m
        out = out + LaurentBipoly.monomial(c, a, 0) * powers[m]
    return out


def poly_div_exact(p: LaurentBipoly, q: LaurentBipoly) -> LaurentBipoly | None:
    """Return r with q*r = p, or None when no such r exists in Z[A^{+-1}, M].

    Long division eliminating the lex-leading term (m_exp first, then
    a_exp) of the remainder against the leading term of q.  Since Z[M]
    coefficients form a domain, an exact quotient's exponents are confined
    to a window computed from the extremal exponents of p and q; a ratio
    escaping the window proves non-divisibility and bounds the loop.
    """
    if q.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if p.is_zero():
        return ZERO

    q_terms = dict(q._terms)
    (qa, qm) = max(q_terms, key=lambda k: (k[1], k[0]))
    qc = q_terms[(qa, qm)]

    p_as = [a for a, _ in p._terms]
    q_as = [a for a, _ in q._terms]
    p_ms = [m for _, m in p._terms]
    q_ms = [m for _, m in q._terms]
    a_lo, a_hi = min(p_as) - min(q_as), max(p_as) - max(q_as)
    m_hi = max(p_ms) - max(q_ms)
    if a_lo > a_hi or m_hi < 0:
        return None

    remainder = dict(p._terms)
    quotient: dict[Monomial, int] = {}
    max_steps = (a_hi - a_lo + 1) * (m_hi + 1)
    for _ in range(max_steps + 1):
        if not remainder:
            out = LaurentBipoly()
            out._terms = quotient
            return out
        (ra, rm) = max(remainder, key=lambda k: (k[1], k[0]))
        rc = remainder[(ra, rm)]
        da, dm = ra - qa, rm - qm
        if dm < 0 or not (a_lo <= da <= a_hi) or rc % qc:
            return None
        dc = rc // qc
        quotient[(da, dm)] = dc
        for (ta, tm), tc in q_terms.items():
            key = (ta + da, tm + dm)
            s = remainder.get(key, 0) - dc * tc
            if s:
                remainder[key] = s
            elif key in remainder:
                del remainder[key]
    return None
