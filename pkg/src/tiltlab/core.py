"""Exact arithmetic in truncated tower-layer rings.

A layer ring is a finite stand-in for the ring of integers in a p-power
ramified extension:

* mixed characteristic: coefficients in Z/p^N, one generator t with
  t^e = p, so monomials t^k (0 <= k < e) form a free basis;
* characteristic p: coefficients in F_p, generator t with t^K = 0, the
  t-adic truncation used for quotients and small tilts.

Optional "perfectoid" variables x1..xv carry exponents with p-power
denominators and are truncated by a fixed total-degree cap; dropping a
term at the cap is the one operation that genuinely discards information,
and it marks the result as lossy.  Everything else is exact modulo the
stated precision (p^N, respectively t^K).

Elements are sparse maps from exponent keys (t-index, variable-index
tuple) to nonzero residues; exponent indices are integers in the lattice
with denominators e (for t) and var_den (for the variables).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction

from . import _backend

MIXED = "mixed"
CHAR_P = "char_p"

_ENUM_LIMIT = 1 << 20


class NonPrime(ValueError):
    pass


class BadIdealExponent(ValueError):
    pass


class RingMismatch(TypeError):
    pass


class ParseError(ValueError):
    pass


class EnumerationTooLarge(ValueError):
    pass


class NotInvertible(ArithmeticError):
    pass


class DimensionTooLarge(ValueError):
    pass


class _AbovePrecision:
    """Valuation marker for elements indistinguishable from 0 at precision."""

    def __repr__(self):
        return "ABOVE_PRECISION"


ABOVE_PRECISION = _AbovePrecision()


def val_is_at_least(v, bound) -> bool:
    return v is ABOVE_PRECISION or v >= bound


def val_as_fraction(v, cap: Fraction) -> Fraction:
    """Clamp a valuation to the ring's precision cap for reporting."""
    return cap if v is ABOVE_PRECISION else min(v, cap)


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class Prime:
    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise NonPrime(f"{self.p} is not prime")


@dataclass(frozen=True)
class PrecisionBudget:
    """Finite working precision: p-adic digits, tilt depth, variable cap."""

    n_digits: int
    depth: int = 0
    var_degree_cap: Fraction = Fraction(0)

    def __post_init__(self):
        if self.n_digits < 1:
            raise ValueError("n_digits must be >= 1")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        cap = Fraction(self.var_degree_cap)
        object.__setattr__(self, "var_degree_cap", cap)
        if cap < 0:
            raise ValueError("var_degree_cap must be >= 0")
        # Cap denominators must be p-powers; checked in layer_make where the
        # prime is known.


@dataclass(frozen=True)
class ExpLattice:
    denominator: int

    def __post_init__(self):
        if self.denominator < 1:
            raise ValueError("lattice denominator must be >= 1")


def _vp(x: int, p: int, cap: int) -> int:
    if x == 0:
        return cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


class LayerRing:
    """One layer of a tower, truncated to finite precision.

    mode MIXED: (Z/p^n_digits)[t]/(t^e - p), basis t^k for 0 <= k < e.
    mode CHAR_P: F_p[t]/(t^window) with the exponent lattice (1/e)Z, the
    shape of layer quotients and small-tilt presentations.

    ideal_num is the t-index of the distinguished ideal generator f0, so
    f0 = t^ideal_num has valuation ideal_num/e.
    """

    def __init__(
        self,
        *,
        mode: str,
        p: int,
        e: int,
        ideal_num: int,
        n_digits: int | None = None,
        window: int | None = None,
        e0: int = 1,
        level: int = 0,
        num_vars: int = 0,
        var_den: int = 1,
        var_cap: Fraction = Fraction(0),
    ):
        if not is_prime(p):
            raise NonPrime(f"{p} is not prime")
        if mode not in (MIXED, CHAR_P):
            raise ValueError(f"unknown mode {mode!r}")
        if e < 1 or e0 < 1 or level < 0 or num_vars < 0 or var_den < 1:
            raise ValueError("invalid ring shape")
        self.mode = mode
        self.p = p
        self.e = e
        self.e0 = e0
        self.level = level
        self.num_vars = num_vars
        self.var_den = var_den
        self.var_cap = Fraction(var_cap)
        self.ideal_num = ideal_num
        if mode == MIXED:
            if n_digits is None or n_digits < 1:
                raise ValueError("mixed rings need n_digits >= 1")
            self.n_digits = n_digits
            self.window = None
            self.coeff_mod = p**n_digits
            self.val_cap = Fraction(n_digits)
            self.symbol = "t"
        else:
            if window is None or window < 1:
                raise ValueError("char-p rings need window >= 1")
            self.n_digits = 1
            self.window = window
            self.coeff_mod = p
            self.val_cap = Fraction(window, e)
            self.symbol = "T"
        if ideal_num < 0 or Fraction(ideal_num, e) > 1:
            raise BadIdealExponent(
                f"ideal exponent {Fraction(ideal_num, e)} must lie in [0, 1]"
            )
        self._zero_vt = (0,) * num_vars
        self._var_monomials = None
        self._basis = None
        self._quotient = None

    # -- identity ---------------------------------------------------------

    def _key(self):
        return (
            self.mode,
            self.p,
            self.e,
            self.e0,
            self.level,
            self.num_vars,
            self.var_den,
            self.var_cap,
            self.ideal_num,
            self.n_digits,
            self.window,
        )

    def __eq__(self, other):
        return isinstance(other, LayerRing) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.mode == MIXED:
            body = f"(Z/{self.p}^{self.n_digits})[t]/(t^{self.e} - {self.p})"
        else:
            body = f"F_{self.p}[T]/(T^{self.window}) @ lattice 1/{self.e}"
        extra = f", vars={self.num_vars}" if self.num_vars else ""
        return f"LayerRing({body}, level={self.level}{extra})"

    @property
    def ideal_exp(self) -> Fraction:
        return Fraction(self.ideal_num, self.e)

    @property
    def var_lattice(self) -> ExpLattice:
        return ExpLattice(self.var_den)

    @property
    def t_lattice(self) -> ExpLattice:
        return ExpLattice(self.e)

    # -- construction of elements -----------------------------------------

    def _cap_index(self, vt) -> bool:
        """True when the variable part overflows the total-degree cap."""
        if not self.num_vars:
            return False
        return Fraction(sum(vt), self.var_den) > self.var_cap

    def _from_items(self, items, lossy=False) -> "LayerElem":
        acc: dict = {}
        p = self.p
        for k, vt, c in items:
            if c == 0:
                continue
            if self._cap_index(vt):
                lossy = True
                continue
            if self.mode == MIXED:
                if k >= self.e:
                    q, k = divmod(k, self.e)
                    c *= p**q
            else:
                if k >= self.window:
                    continue
            key = (k, vt)
            acc[key] = acc.get(key, 0) + c
        mod = self.coeff_mod
        terms = {}
        for key, c in acc.items():
            c %= mod
            if c:
                terms[key] = c
        return LayerElem(self, terms, lossy)

    def zero(self) -> "LayerElem":
        return LayerElem(self, {}, False)

    def one(self) -> "LayerElem":
        return self.from_int(1)

    def from_int(self, n: int) -> "LayerElem":
        return self._from_items([(0, self._zero_vt, n)])

    def monomial(self, k: int, vt=None, coeff: int = 1) -> "LayerElem":
        vt = self._zero_vt if vt is None else tuple(vt)
        if len(vt) != self.num_vars:
            raise ValueError("variable index tuple has wrong length")
        return self._from_items([(k, vt, coeff)])

    def t_gen(self) -> "LayerElem":
        return self.monomial(1)

    def var_gen(self, i: int) -> "LayerElem":
        if not 0 <= i < self.num_vars:
            raise ValueError(f"no variable x{i + 1}")
        vt = list(self._zero_vt)
        vt[i] = self.var_den
        return self.monomial(0, vt)

    def coerce(self, x) -> "LayerElem":
        if isinstance(x, LayerElem):
            if x.ring != self:
                raise RingMismatch(f"{x.ring!r} != {self!r}")
            return x
        if isinstance(x, int):
            return self.from_int(x)
        raise RingMismatch(f"cannot coerce {type(x).__name__}")

    def f0(self) -> "LayerElem":
        return self.monomial(self.ideal_num)

    # -- multiplication ----------------------------------------------------

    def _mul(self, a: "LayerElem", b: "LayerElem") -> "LayerElem":
        ta, tb = a.terms, b.terms
        if not ta or not tb:
            return self.zero()
        lossy = a.lossy or b.lossy
        if self.num_vars == 0 and len(ta) * len(tb) > max(64, self.e):
            return self._mul_dense(ta, tb, lossy)
        items = []
        for (ka, va), ca in ta.items():
            for (kb, vb), cb in tb.items():
                vt = tuple(x + y for x, y in zip(va, vb))
                items.append((ka + kb, vt, ca * cb))
        return self._from_items(items, lossy)

    def _mul_dense(self, ta, tb, lossy):
        if self.mode == MIXED:
            fa = [0] * self.e
            fb = [0] * self.e
            for (k, _), c in ta.items():
                fa[k] = c
            for (k, _), c in tb.items():
                fb[k] = c
            conv = _backend.eisenstein_mul(fa, fb, self.e, self.p, self.coeff_mod)
        else:
            la = max(k for k, _ in ta) + 1
            lb = max(k for k, _ in tb) + 1
            fa = [0] * la
            fb = [0] * lb
            for (k, _), c in ta.items():
                fa[k] = c
            for (k, _), c in tb.items():
                fb[k] = c
            conv = _backend.window_mul(fa, fb, self.window, self.p)
        vt = self._zero_vt
        terms = {(k, vt): c for k, c in enumerate(conv) if c}
        return LayerElem(self, terms, lossy)

    # -- valuation and ideals ----------------------------------------------

    def term_valuation(self, k: int, coeff: int) -> Fraction:
        if self.mode == MIXED:
            return Fraction(k, self.e) + _vp(coeff, self.p, self.n_digits)
        return Fraction(k, self.e)

    def quotient_ring(self) -> "LayerRing":
        """The residue ring modulo (f0): F_p[t]/(t^ideal_num) x variables."""
        if self._quotient is None:
            if self.ideal_num == 0:
                raise BadIdealExponent("quotient by the unit ideal is empty")
            self._quotient = LayerRing(
                mode=CHAR_P,
                p=self.p,
                e=self.e,
                window=self.ideal_num,
                ideal_num=self.ideal_num,
                e0=self.e0,
                level=self.level,
                num_vars=self.num_vars,
                var_den=self.var_den,
                var_cap=self.var_cap,
            )
        return self._quotient

    def reduce_mod_ideal(self, x: "LayerElem") -> "LayerElem":
        x = self.coerce(x)
        quot = self.quotient_ring()
        items = []
        for (k, vt), c in x.terms.items():
            c %= self.p
            if c and k < self.ideal_num:
                items.append((k, vt, c))
        return quot._from_items(items, x.lossy)

    def lift(self, q: "LayerElem") -> "LayerElem":
        """Canonical coefficient lift from the quotient back to this ring."""
        if q.ring != self.quotient_ring():
            raise RingMismatch("element does not live in this ring's quotient")
        return self._from_items(
            [(k, vt, c) for (k, vt), c in q.terms.items()], q.lossy
        )

    # -- bases and enumeration ----------------------------------------------

    def var_monomials(self):
        if self._var_monomials is None:
            if self.num_vars == 0:
                self._var_monomials = [()]
            else:
                cap = self.var_cap * self.var_den
                bound = int(cap)  # cap * var_den is integral for realized rings
                mons = []
                for vt in itertools.product(
                    range(bound + 1), repeat=self.num_vars
                ):
                    if sum(vt) <= bound:
                        mons.append(vt)
                mons.sort()
                self._var_monomials = mons
        return self._var_monomials

    def t_range(self) -> int:
        return self.e if self.mode == MIXED else self.window

    def basis_keys(self):
        if self._basis is None:
            self._basis = [
                (k, vt)
                for k in range(self.t_range())
                for vt in self.var_monomials()
            ]
        return self._basis

    @property
    def rank(self) -> int:
        return len(self.basis_keys())

    def to_vec(self, x: "LayerElem"):
        x = self.coerce(x)
        idx = {key: i for i, key in enumerate(self.basis_keys())}
        vec = [0] * self.rank
        for key, c in x.terms.items():
            vec[idx[key]] = c
        return vec

    def from_vec(self, vec) -> "LayerElem":
        basis = self.basis_keys()
        return self._from_items(
            [(k, vt, c) for (k, vt), c in zip(basis, vec) if c]
        )

    def element_count(self) -> int:
        return self.coeff_mod**self.rank

    def enumerate_elements(self):
        if self.element_count() > _ENUM_LIMIT:
            raise EnumerationTooLarge(
                f"{self.element_count()} elements exceed the enumeration cap"
            )
        basis = self.basis_keys()
        for coeffs in itertools.product(range(self.coeff_mod), repeat=len(basis)):
            yield self._from_items(
                [(k, vt, c) for (k, vt), c in zip(basis, coeffs) if c]
            )

    def random_element(self, rng, max_terms: int = 3) -> "LayerElem":
        basis = self.basis_keys()
        n_terms = rng.randint(1, max_terms)
        items = []
        for _ in range(n_terms):
            k, vt = basis[rng.randrange(len(basis))]
            items.append((k, vt, rng.randrange(1, self.coeff_mod)))
        return self._from_items(items)

    # -- units, idempotents, torsion ----------------------------------------

    def invert(self, x: "LayerElem") -> "LayerElem":
        """Inverse of a unit c0*(1 + z) with val(z) > 0, by geometric series."""
        x = self.coerce(x)
        c0 = x.terms.get((0, self._zero_vt), 0)
        if c0 % self.p == 0:
            raise NotInvertible(f"{x.to_text()} has non-unit constant term")
        c0_inv = pow(c0, -1, self.coeff_mod)
        z = self.one() - x * c0_inv
        if not z.is_zero() and z.valuation() == 0:
            raise NotInvertible(
                f"{x.to_text()} is not 1 + (positive valuation) up to a unit"
            )
        acc = self.one()
        power = self.one()
        while True:
            power = power * z
            if power.is_zero():
                break
            acc = acc + power
        return acc * c0_inv

    def idempotents(self):
        """All solutions of x^2 = x.

        The ring is local (the maximal ideal is (t, p), resp. (t)), and an
        idempotent is determined by its residue in F_p, so only 0 and 1
        occur; each lifts uniquely because 2x - 1 is a unit at both.
        """
        return [self.zero(), self.one()]

    def torsion_submodule(self, f: "LayerElem", c_max: int | None = None):
        """Basis of {x : f^c x = 0, c <= c_max}, split genuine vs artifact.

        Multiplication by t is injective below the precision cap, so on a
        single layer every kernel element of a nonzero f is an artifact of
        truncation; genuinely killed elements only arise from f = 0 (and,
        through product rings, from factors where f vanishes).
        """
        f = self.coerce(f)
        if c_max is None:
            c_max = self.n_digits * self.e if self.mode == MIXED else self.window
        if f.is_zero():
            genuine = [self.monomial(k, vt) for k, vt in self.basis_keys()]
            return TorsionReport(genuine=genuine, artifact_dim=0, flags=())
        fval = f.valuation()
        if fval == 0:
            return TorsionReport(genuine=[], artifact_dim=0, flags=())
        if any(any(vt) for (_, vt) in f.terms):
            raise ValueError("torsion is only tracked for t-monomial ideals")
        threshold = self.val_cap - c_max * fval
        artifact = sum(
            1
            for k, vt in self.basis_keys()
            if Fraction(k, self.e) >= threshold
        )
        flags = ("PRECISION_ARTIFACT",) if artifact else ()
        return TorsionReport(genuine=[], artifact_dim=artifact, flags=flags)

    # -- parsing and rendering ----------------------------------------------

    def parse(self, text: str) -> "LayerElem":
        return _parse_element(self, text)

    def describe(self) -> dict:
        out = {
            "mode": self.mode,
            "prime": self.p,
            "eisenstein_exponent": self.e,
            "level": self.level,
            "ideal_exponent": str(self.ideal_exp),
            "num_vars": self.num_vars,
        }
        if self.mode == MIXED:
            out["n_digits"] = self.n_digits
        else:
            out["window"] = self.window
        return out


@dataclass
class TorsionReport:
    genuine: list
    artifact_dim: int
    flags: tuple

    @property
    def is_torsion_free(self) -> bool:
        return not self.genuine


class LayerElem:
    """Canonical sparse element of a LayerRing.  Treat as immutable."""

    __slots__ = ("ring", "terms", "lossy")

    def __init__(self, ring: LayerRing, terms: dict, lossy: bool = False):
        self.ring = ring
        self.terms = terms
        self.lossy = lossy

    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return self.terms == {(0, self.ring._zero_vt): 1}

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other)
        if not isinstance(other, LayerElem):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring, tuple(sorted(self.terms.items()))))

    def __add__(self, other):
        other = self.ring.coerce(other)
        items = [(k, vt, c) for (k, vt), c in self.terms.items()]
        items += [(k, vt, c) for (k, vt), c in other.terms.items()]
        return self.ring._from_items(items, self.lossy or other.lossy)

    __radd__ = __add__

    def __neg__(self):
        return self.ring._from_items(
            [(k, vt, -c) for (k, vt), c in self.terms.items()], self.lossy
        )

    def __sub__(self, other):
        other = self.ring.coerce(other)
        return self + (-other)

    def __rsub__(self, other):
        return self.ring.coerce(other) - self

    def __mul__(self, other):
        other = self.ring.coerce(other)
        return self.ring._mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not defined here")
        if n == 0:
            return self.ring.one()
        if len(self.terms) == 1:
            ((k, vt), c) = next(iter(self.terms.items()))
            return self.ring._from_items(
                [(k * n, tuple(j * n for j in vt), pow(c, n, self.ring.coeff_mod))],
                self.lossy,
            )
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def valuation(self):
        if not self.terms:
            return ABOVE_PRECISION
        return min(
            self.ring.term_valuation(k, c) for (k, _), c in self.terms.items()
        )

    def min_t_index(self) -> int | None:
        """Least t-index carrying a p-unit coefficient (char-p: any)."""
        best = None
        for (k, vt), c in self.terms.items():
            if self.ring.mode == MIXED and c % self.ring.p == 0:
                continue
            if best is None or k < best:
                best = k
        return best

    def divide_by_monomial(self, k: int) -> "LayerElem":
        """Exact division by t^k; raises if any term is not divisible.

        In mixed mode a coefficient p^a * u contributes a*e to the
        divisible t-index (t^e = p); dividing such a term reduces the
        p-adic precision of that coefficient, which is fine for the
        certificate-style uses here because results are re-verified by
        multiplication.
        """
        ring = self.ring
        items = []
        for (kt, vt), c in self.terms.items():
            if kt >= k:
                items.append((kt - k, vt, c))
                continue
            if ring.mode == CHAR_P:
                raise ValueError(f"{self.to_text()} is not divisible by t^{k}")
            a = _vp(c, ring.p, ring.n_digits)
            if kt + a * ring.e < k:
                raise ValueError(f"{self.to_text()} is not divisible by t^{k}")
            need = -(-(k - kt) // ring.e)  # ceil
            items.append((kt + need * ring.e - k, vt, c // ring.p**need))
        return ring._from_items(items, self.lossy)

    def to_text(self) -> str:
        return _render_element(self)

    def __repr__(self):
        return f"<{self.to_text()}>"


# -- product rings -----------------------------------------------------------


class ProductRing:
    """Finite product of layer rings, componentwise everything."""

    def __init__(self, factors: tuple):
        if len(factors) < 2:
            raise ValueError("a product needs at least two factors")
        mods = {f.coeff_mod for f in factors}
        if len(mods) != 1:
            raise ValueError("product factors must share the coefficient ring")
        self.factors = tuple(factors)
        self.coeff_mod = factors[0].coeff_mod
        self.p = factors[0].p
        self.n_digits = factors[0].n_digits

    def _key(self):
        return tuple(f._key() for f in self.factors)

    def __eq__(self, other):
        return isinstance(other, ProductRing) and self._key() == other._key()

    def __hash__(self):
        return hash(("product", self._key()))

    def __repr__(self):
        return f"ProductRing({', '.join(repr(f) for f in self.factors)})"

    def wrap(self, parts) -> "ProductElem":
        return ProductElem(self, tuple(parts))

    def zero(self):
        return self.wrap(f.zero() for f in self.factors)

    def one(self):
        return self.wrap(f.one() for f in self.factors)

    def from_int(self, n):
        return self.wrap(f.from_int(n) for f in self.factors)

    def coerce(self, x):
        if isinstance(x, ProductElem):
            if x.ring != self:
                raise RingMismatch("product ring mismatch")
            return x
        if isinstance(x, int):
            return self.from_int(x)
        raise RingMismatch(f"cannot coerce {type(x).__name__}")

    def f0(self):
        return self.wrap(f.f0() for f in self.factors)

    def quotient_ring(self):
        return ProductRing(tuple(f.quotient_ring() for f in self.factors))

    def reduce_mod_ideal(self, x):
        x = self.coerce(x)
        return self.quotient_ring().wrap(
            f.reduce_mod_ideal(part) for f, part in zip(self.factors, x.parts)
        )

    def lift(self, q):
        return self.wrap(
            f.lift(part) for f, part in zip(self.factors, q.parts)
        )

    @property
    def rank(self):
        return sum(f.rank for f in self.factors)

    @property
    def val_cap(self):
        return min(f.val_cap for f in self.factors)

    def element_count(self):
        n = 1
        for f in self.factors:
            n *= f.element_count()
        return n

    def enumerate_elements(self):
        if self.element_count() > _ENUM_LIMIT:
            raise EnumerationTooLarge("product too large to enumerate")
        for parts in itertools.product(
            *(list(f.enumerate_elements()) for f in self.factors)
        ):
            yield self.wrap(parts)

    def random_element(self, rng, max_terms: int = 3):
        return self.wrap(
            f.random_element(rng, max_terms) for f in self.factors
        )

    def invert(self, x):
        x = self.coerce(x)
        return self.wrap(
            f.invert(part) for f, part in zip(self.factors, x.parts)
        )

    def idempotents(self):
        per_factor = [f.idempotents() for f in self.factors]
        return [self.wrap(parts) for parts in itertools.product(*per_factor)]

    def torsion_submodule(self, f, c_max=None):
        f = self.coerce(f)
        genuine = []
        artifact = 0
        flags: set = set()
        for i, (factor, f_part) in enumerate(zip(self.factors, f.parts)):
            rep = factor.torsion_submodule(f_part, c_max)
            artifact += rep.artifact_dim
            flags.update(rep.flags)
            for g in rep.genuine:
                parts = [fac.zero() for fac in self.factors]
                parts[i] = g
                genuine.append(self.wrap(parts))
        return TorsionReport(
            genuine=genuine, artifact_dim=artifact, flags=tuple(sorted(flags))
        )


class ProductElem:
    __slots__ = ("ring", "parts", "lossy")

    def __init__(self, ring: ProductRing, parts: tuple):
        self.ring = ring
        self.parts = parts
        self.lossy = any(getattr(p, "lossy", False) for p in parts)

    def is_zero(self):
        return all(p.is_zero() for p in self.parts)

    def is_one(self):
        return all(p.is_one() for p in self.parts)

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other)
        if not isinstance(other, ProductElem):
            return NotImplemented
        return self.ring == other.ring and self.parts == other.parts

    def __hash__(self):
        return hash((self.ring, self.parts))

    def _zip(self, other, op):
        other = self.ring.coerce(other)
        return self.ring.wrap(
            op(a, b) for a, b in zip(self.parts, other.parts)
        )

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self.ring.coerce(other) - self

    def __mul__(self, other):
        return self._zip(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __neg__(self):
        return self.ring.wrap(-p for p in self.parts)

    def __pow__(self, n):
        return self.ring.wrap(p**n for p in self.parts)

    def valuation(self):
        vals = [p.valuation() for p in self.parts]
        finite = [v for v in vals if v is not ABOVE_PRECISION]
        return min(finite) if finite else ABOVE_PRECISION

    def to_text(self):
        return "(" + " | ".join(p.to_text() for p in self.parts) + ")"

    def __repr__(self):
        return f"<{self.to_text()}>"


# -- element syntax -----------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<sym>pflat|fflat|[tT]|x\d+|p)|(?P<op>[+\-*^{}/()])|$)"
)


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match or match.end() == pos:
            raise ParseError(f"bad character at {text[pos:pos + 8]!r}")
        if match.group("int"):
            out.append(("int", int(match.group("int"))))
        elif match.group("sym"):
            out.append(("sym", match.group("sym")))
        elif match.group("op"):
            out.append(("op", match.group("op")))
        pos = match.end()
    return out


class _Parser:
    """Sums of terms c * t^{k/d} * x1^{a/d}; braces optional for integers."""

    def __init__(self, ring, tokens, symbols=None):
        self.ring = ring
        self.tokens = tokens
        self.pos = 0
        self.symbols = symbols or {}

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}")

    def parse(self):
        acc = self.ring.zero()
        sign = 1
        kind, val = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        while True:
            acc = acc + self.term() * sign
            kind, val = self.peek()
            if kind is None:
                return acc
            if kind == "op" and val in "+-":
                self.take()
                sign = -1 if val == "-" else 1
                continue
            raise ParseError(f"unexpected token {val!r}")

    def term(self):
        result = self.factor()
        while True:
            kind, val = self.peek()
            if kind == "op" and val == "*":
                self.take()
                result = result * self.factor()
            else:
                return result

    def factor(self):
        kind, val = self.take()
        if kind == "int":
            return self.ring.from_int(val)
        if kind != "sym":
            raise ParseError(f"expected a symbol or integer, got {val!r}")
        base = self.symbol_value(val)
        kind, nxt = self.peek()
        if kind == "op" and nxt == "^":
            self.take()
            exponent, had_slash = self.exponent()
            return self.apply_power(val, base, exponent, had_slash)
        return base

    def symbol_value(self, name):
        if name in self.symbols:
            return self.symbols[name]
        if name in ("t", "T"):
            return self.ring.t_gen()
        if name == "p":
            if self.ring.mode == CHAR_P:
                return self.ring.zero()
            return self.ring.from_int(self.ring.p)
        if name.startswith("x"):
            i = int(name[1:]) - 1
            if not 0 <= i < self.ring.num_vars:
                raise ParseError(f"no variable {name} in this ring")
            return self.ring.var_gen(i)
        raise ParseError(f"symbol {name!r} not available here")

    def exponent(self):
        """Return (value, had_slash); a slash marks a valuation exponent."""
        kind, val = self.take()
        if kind == "int":
            return Fraction(val), False
        if kind == "op" and val == "{":
            kind, num = self.take()
            if kind != "int":
                raise ParseError("expected integer exponent")
            kind, nxt = self.peek()
            den, had_slash = 1, False
            if kind == "op" and nxt == "/":
                self.take()
                had_slash = True
                kind, den = self.take()
                if kind != "int" or den == 0:
                    raise ParseError("expected nonzero denominator")
            self.expect("}")
            return Fraction(num, den), had_slash
        raise ParseError("expected exponent")

    def apply_power(self, name, base, exponent: Fraction, had_slash: bool):
        ring = self.ring
        if name in ("t", "T"):
            # t^{a/b} names the monomial of valuation a/b; t^n is the n-th
            # power of the generator (index n in the lattice).
            idx = exponent * ring.e if had_slash else exponent
            if idx.denominator != 1 or idx < 0:
                raise ParseError(
                    f"exponent {exponent} is not in the 1/{ring.e} lattice"
                )
            return ring.monomial(int(idx))
        if name.startswith("x"):
            idx = exponent * ring.var_den  # variable exponents are degrees
            if idx.denominator != 1 or idx < 0:
                raise ParseError(
                    f"exponent {exponent} is not in the 1/{ring.var_den} lattice"
                )
            i = int(name[1:]) - 1
            vt = list(ring._zero_vt)
            vt[i] = int(idx)
            return ring.monomial(0, vt)
        if exponent.denominator != 1 or exponent < 0:
            raise ParseError(f"cannot raise {name} to {exponent}")
        return base ** int(exponent)


def _parse_element(ring, text: str, symbols=None):
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty element text")
    return _Parser(ring, tokens, symbols).parse()


def parse_element(ring, text: str, symbols=None):
    return _parse_element(ring, text, symbols)


def _render_t(symbol: str, k: int, e: int) -> str:
    f = Fraction(k, e)
    if f.denominator == 1:
        # Integral valuation: index form (parses back as a generator power).
        return symbol if k == 1 else f"{symbol}^{k}"
    return f"{symbol}^{{{f.numerator}/{f.denominator}}}"


def _render_var(i: int, j: int, den: int) -> str:
    f = Fraction(j, den)
    name = f"x{i + 1}"
    if f == 1:
        return name
    if f.denominator == 1:
        return f"{name}^{f.numerator}"
    return f"{name}^{{{f.numerator}/{f.denominator}}}"


def _render_element(x: LayerElem) -> str:
    if not x.terms:
        return "0"
    ring = x.ring
    pieces = []
    for (k, vt), c in sorted(x.terms.items()):
        parts = []
        if k:
            parts.append(_render_t(ring.symbol, k, ring.e))
        for i, j in enumerate(vt):
            if j:
                parts.append(_render_var(i, j, ring.var_den))
        if not parts or c != 1:
            parts.insert(0, str(c))
        pieces.append("*".join(parts))
    return " + ".join(pieces)


# -- public constructor --------------------------------------------------------


def layer_make(
    prime,
    precision: PrecisionBudget,
    e: int,
    num_vars: int = 0,
    ideal_exp=1,
    *,
    e0: int = 1,
    level: int = 0,
) -> LayerRing:
    """Build one mixed-characteristic layer ring.

    The ideal generator is f0 = t^(ideal_exp * e); the exponent must land in
    the ring's own lattice, and must not exceed 1 (p has to lie in the
    ideal).
    """
    p = prime.p if isinstance(prime, Prime) else Prime(prime).p
    eps = Fraction(ideal_exp)
    if eps > 1 or eps <= 0:
        raise BadIdealExponent(f"ideal exponent {eps} must lie in (0, 1]")
    ideal_idx = eps * e
    if ideal_idx.denominator != 1:
        raise BadIdealExponent(
            f"f0 exponent {eps} * {e} = {ideal_idx} is not an integer"
        )
    var_den = e // e0 if num_vars else 1
    return LayerRing(
        mode=MIXED,
        p=p,
        e=e,
        n_digits=precision.n_digits,
        ideal_num=int(ideal_idx),
        e0=e0,
        level=level,
        num_vars=num_vars,
        var_den=var_den,
        var_cap=precision.var_degree_cap,
    )


# Quotient elements are just elements of the char-p quotient ring, and a
# valuation is a Fraction or the ABOVE_PRECISION marker; the aliases name
# those roles at call sites.
QuotElem = LayerElem
RatValuation = Fraction | _AbovePrecision
