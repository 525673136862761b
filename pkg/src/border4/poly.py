"""Sparse multivariate polynomials over the exact scalar modes.

Monomials are tuples of (variable position, exponent) pairs sorted by
position. The term order is graded lexicographic: higher total degree wins,
ties compare exponents along the registry's variable order (x < u < p < q,
indices lexicographic with the last index fastest), larger exponent at the
earliest differing variable first. The zero polynomial has degree -1.
"""

import re
from fractions import Fraction

from .modes import ModeError

_CLASS_ORDER = {"x": 0, "u": 1, "p": 2, "q": 3}


class PolyParseError(ValueError):
    """Parse failure; message carries line and column information."""


class NonDivisibleError(ArithmeticError):
    """poly_div_exact got a non-divisible pair."""


class VarRegistry:
    """Ordered variable table. Keys look like ('x', i, j, k) with 1-based
    display indices; positions are dense 0-based ints."""

    __slots__ = ("keys", "names", "pos", "_xdims")

    def __init__(self, keys, xdims=None):
        order = sorted(set(keys), key=lambda k: (_CLASS_ORDER[k[0]], k[1:]))
        if list(keys) != order:
            raise ValueError("variable keys out of canonical order")
        self.keys = list(keys)
        self.names = ["_".join([k[0]] + [str(i) for i in k[1:]]) for k in keys]
        self.pos = {k: n for n, k in enumerate(keys)}
        self._xdims = xdims

    @classmethod
    def for_tensor(cls, m, n, l, with_u=False, with_pq=False):
        keys = [
            ("x", i, j, k)
            for i in range(1, m + 1)
            for j in range(1, n + 1)
            for k in range(1, l + 1)
        ]
        if with_u:
            keys += [("u", j, i) for j in range(1, 5) for i in range(1, 4)]
        if with_pq:
            keys += [("p", a, b) for a in range(1, 5) for b in range(1, 5)]
            keys += [("q", a, b) for a in range(1, 5) for b in range(1, 5)]
        return cls(keys, xdims=(m, n, l))

    @property
    def xdims(self):
        return self._xdims

    def __len__(self):
        return len(self.keys)

    def __eq__(self, other):
        return isinstance(other, VarRegistry) and self.keys == other.keys

    def __hash__(self):
        return hash(tuple(self.keys))

    def x_pos(self, i, j, k):
        """Position of x_(i+1)_(j+1)_(k+1) from 0-based tensor indices."""
        m, n, l = self._xdims
        return (i * n + j) * l + k

    def u_pos(self, j, i):
        return self.pos[("u", j + 1, i + 1)]

    def p_pos(self, a, b):
        return self.pos[("p", a + 1, b + 1)]

    def q_pos(self, a, b):
        return self.pos[("q", a + 1, b + 1)]


# -- monomial helpers ------------------------------------------------------


def mon_mul(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    out = []
    i = j = 0
    n1, n2 = len(m1), len(m2)
    while i < n1 and j < n2:
        v1, e1 = m1[i]
        v2, e2 = m2[j]
        if v1 == v2:
            out.append((v1, e1 + e2))
            i += 1
            j += 1
        elif v1 < v2:
            out.append(m1[i])
            i += 1
        else:
            out.append(m2[j])
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    return tuple(out)


def mon_deg(m):
    return sum(e for _, e in m)


def mon_divides(md, mn):
    """Does monomial md divide mn?"""
    it = iter(mn)
    for v, e in md:
        for w, f in it:
            if w == v:
                if f < e:
                    return False
                break
            if w > v:
                return False
        else:
            return False
    return True


def mon_div(mn, md):
    rest = dict(mn)
    for v, e in md:
        f = rest[v] - e
        if f:
            rest[v] = f
        else:
            del rest[v]
    return tuple(sorted(rest.items()))


def grlex_key(m):
    """Sort key: ascending order equals ascending grlex."""
    # ties: earliest variable with larger exponent wins, so compare the
    # negated sparse support reversed... easier to expand lazily:
    return (mon_deg(m), _lex_vector(m))


def _lex_vector(m):
    # For two monomials of equal degree, grlex says: larger exponent at the
    # earliest differing variable => larger monomial. Encoding each pair as
    # (-position, exponent) and comparing the resulting tuples ascending
    # realizes exactly that (positions ascend in m, so -position descends).
    return tuple((-v, e) for v, e in m)


def mon_max(mons):
    return max(mons, key=grlex_key)


def mon_sorted_desc(mons):
    return sorted(mons, key=grlex_key, reverse=True)


class MultiPoly:
    """Immutable-by-convention sparse polynomial."""

    __slots__ = ("registry", "mode", "terms")

    def __init__(self, registry, mode, terms, copy=True):
        self.registry = registry
        self.mode = mode
        self.terms = dict(terms) if copy else terms

    @classmethod
    def zero(cls, registry, mode):
        return cls(registry, mode, {}, copy=False)

    @classmethod
    def const(cls, registry, mode, c):
        c = mode.coerce(c)
        return cls(registry, mode, {} if mode.is_zero(c) else {(): c}, copy=False)

    @classmethod
    def var(cls, registry, mode, key, exp=1):
        vpos = registry.pos[key]
        return cls(registry, mode, {((vpos, exp),): mode.one}, copy=False)

    @classmethod
    def from_var_pos(cls, registry, mode, vpos, coeff=None, exp=1):
        c = mode.one if coeff is None else mode.coerce(coeff)
        return cls(registry, mode, {((vpos, exp),): c}, copy=False)

    def _peer(self, other):
        if self.registry != other.registry:
            raise ModeError("polynomials over different registries")
        if self.mode != other.mode:
            raise ModeError("polynomials over different coefficient modes")

    def is_zero(self):
        return not self.terms

    def degree(self):
        if not self.terms:
            return -1
        return max(mon_deg(m) for m in self.terms)

    def is_homogeneous(self):
        degs = {mon_deg(m) for m in self.terms}
        return len(degs) <= 1

    def num_terms(self):
        return len(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, MultiPoly)
            and self.registry == other.registry
            and self.mode == other.mode
            and self.terms == other.terms
        )

    def __repr__(self):
        return f"MultiPoly({format_poly(self)!r})"

    def add(self, other):
        self._peer(other)
        md = self.mode
        out = dict(self.terms)
        for m, c in other.terms.items():
            acc = out.get(m)
            if acc is None:
                out[m] = c
            else:
                s = md.add(acc, c)
                if md.is_zero(s):
                    del out[m]
                else:
                    out[m] = s
        return MultiPoly(self.registry, md, out, copy=False)

    def neg(self):
        md = self.mode
        return MultiPoly(
            self.registry, md, {m: md.neg(c) for m, c in self.terms.items()}, copy=False
        )

    def sub(self, other):
        return self.add(other.neg())

    def scale(self, c):
        md = self.mode
        c = md.coerce(c)
        if md.is_zero(c):
            return MultiPoly.zero(self.registry, md)
        return MultiPoly(
            self.registry, md, {m: md.mul(c, v) for m, v in self.terms.items()}, copy=False
        )

    def mul(self, other):
        self._peer(other)
        md = self.mode
        out = {}
        small, big = (self.terms, other.terms)
        if len(small) > len(big):
            small, big = big, small
        for m1, c1 in small.items():
            for m2, c2 in big.items():
                m = mon_mul(m1, m2)
                c = md.mul(c1, c2)
                acc = out.get(m)
                if acc is None:
                    out[m] = c
                else:
                    s = md.add(acc, c)
                    if md.is_zero(s):
                        del out[m]
                    else:
                        out[m] = s
        return MultiPoly(self.registry, md, out, copy=False)

    def mul_term(self, mon, coeff):
        md = self.mode
        out = {}
        for m, c in self.terms.items():
            out[mon_mul(m, mon)] = md.mul(c, coeff)
        return MultiPoly(self.registry, md, out, copy=False)

    def eval(self, values):
        """Evaluate at a full assignment (list indexed by variable position)."""
        md = self.mode
        acc = md.zero
        for m, c in self.terms.items():
            t = c
            for v, e in m:
                x = values[v]
                for _ in range(e):
                    t = md.mul(t, x)
            acc = md.add(acc, t)
        return acc

    def set_zero(self, positions):
        """Substitute 0 for every variable position in `positions`."""
        pos = set(positions)
        out = {m: c for m, c in self.terms.items() if not any(v in pos for v, _ in m)}
        return MultiPoly(self.registry, self.mode, out, copy=False)

    def leading(self):
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        m = mon_max(self.terms)
        return m, self.terms[m]

    def extract_coeffs(self, positions):
        """Group terms by their monomial in `positions`; returns a dict
        mapping that sub-monomial to the cofactor polynomial."""
        pos = set(positions)
        md = self.mode
        groups = {}
        for m, c in self.terms.items():
            inner = tuple((v, e) for v, e in m if v in pos)
            outer = tuple((v, e) for v, e in m if v not in pos)
            groups.setdefault(inner, {})[outer] = c
        return {
            inner: MultiPoly(self.registry, md, terms, copy=False)
            for inner, terms in groups.items()
        }

    def div_exact(self, divisor):
        """Exact polynomial division; raises NonDivisibleError otherwise."""
        self._peer(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        md = self.mode
        dm, dc = divisor.leading()
        rem = dict(self.terms)
        quot = {}
        while rem:
            m = mon_max(rem)
            c = rem[m]
            if not mon_divides(dm, m):
                raise NonDivisibleError("leading term not divisible")
            qm = mon_div(m, dm)
            qc = md.exact_div(c, dc)
            quot[qm] = qc
            # rem -= (qm, qc) * divisor
            for m2, c2 in divisor.terms.items():
                mm = mon_mul(qm, m2)
                cc = md.mul(qc, c2)
                acc = rem.get(mm)
                if acc is None:
                    rem[mm] = md.neg(cc)
                else:
                    s = md.sub(acc, cc)
                    if md.is_zero(s):
                        del rem[mm]
                    else:
                        rem[mm] = s
        return MultiPoly(self.registry, md, quot, copy=False)

    def map_coeffs(self, mode, fn):
        out = {}
        for m, c in self.terms.items():
            v = fn(c)
            if not mode.is_zero(v):
                out[m] = v
        return MultiPoly(self.registry, mode, out, copy=False)

    def compiled(self):
        """(coeffs, factor index tuples) for fast repeated evaluation."""
        coeffs = []
        factors = []
        for m, c in sorted(self.terms.items(), key=lambda t: grlex_key(t[0]), reverse=True):
            coeffs.append(c)
            idx = []
            for v, e in m:
                idx.extend([v] * e)
            factors.append(tuple(idx))
        return coeffs, factors

    def content_vectors(self):
        """Per index-class content counts {('x', axis): tuple} summed over
        terms; only meaningful for multihomogeneous polynomials (validated
        by the caller)."""
        out = None
        for m in self.terms:
            cv = {}
            for v, e in m:
                key = self.registry.keys[v]
                cls = key[0]
                for axis, idx in enumerate(key[1:]):
                    slot = cv.setdefault((cls, axis), {})
                    slot[idx] = slot.get(idx, 0) + e
            if out is None:
                out = cv
            elif out != cv:
                return None
        return out


class PolyRing:
    """Ring-protocol wrapper so ExactMatrix can hold polynomial entries."""

    is_field = False
    is_exact = True

    def __init__(self, registry, mode):
        self.registry = registry
        self.mode = mode

    @property
    def zero(self):
        return MultiPoly.zero(self.registry, self.mode)

    @property
    def one(self):
        return MultiPoly.const(self.registry, self.mode, 1)

    def coerce(self, x):
        if isinstance(x, MultiPoly):
            if x.registry != self.registry or x.mode != self.mode:
                raise ModeError("polynomial from a different ring")
            return x
        if isinstance(x, (int, Fraction)):
            return MultiPoly.const(self.registry, self.mode, x)
        raise ModeError(f"cannot coerce {x!r} into {self!r}")

    def add(self, a, b):
        return a.add(b)

    def sub(self, a, b):
        return a.sub(b)

    def mul(self, a, b):
        return a.mul(b)

    def neg(self, a):
        return a.neg()

    def is_zero(self, a):
        return a.is_zero()

    def exact_div(self, a, b):
        return a.div_exact(b)

    def __eq__(self, other):
        return (
            isinstance(other, PolyRing)
            and self.registry == other.registry
            and self.mode == other.mode
        )

    def __repr__(self):
        return f"PolyRing({len(self.registry)} vars, {self.mode!r})"


# -- text format -----------------------------------------------------------

_FACTOR_RE = re.compile(r"\*?([xupq])((?:_\d+)+)(?:\^(\d+))?")
_TERM_RE = re.compile(r"([+-])?(\d+)?((?:\*?[xupq](?:_\d+)+(?:\^\d+)?)*)")


def parse_poly_line(line, registry, mode, lineno=1):
    """Parse one polynomial. Grammar: terms joined by +/-, each an optional
    sign, optional integer coefficient and '*'-joined variable factors."""
    src = line.split("#", 1)[0]
    compact = "".join(src.split())
    if not compact:
        return None
    terms = {}
    md = mode
    pos = 0
    first = True
    while pos < len(compact):
        m = _TERM_RE.match(compact, pos)
        if not m or m.end() == pos:
            raise PolyParseError(
                f"line {lineno}, column {pos + 1}: unexpected token {compact[pos:pos+12]!r}"
            )
        sign, coeff_s, factors_s = m.group(1), m.group(2), m.group(3)
        if sign is None and not first:
            raise PolyParseError(f"line {lineno}, column {pos + 1}: missing +/- between terms")
        if coeff_s is None and not factors_s:
            raise PolyParseError(f"line {lineno}, column {pos + 1}: empty term")
        c = int(coeff_s) if coeff_s is not None else 1
        if sign == "-":
            c = -c
        mon = ()
        consumed = 0
        for fm in _FACTOR_RE.finditer(factors_s):
            cls = fm.group(1)
            idx = tuple(int(t) for t in fm.group(2)[1:].split("_"))
            exp = int(fm.group(3)) if fm.group(3) else 1
            key = (cls,) + idx
            if key not in registry.pos:
                raise PolyParseError(
                    f"line {lineno}, column {pos + 1}: unknown variable "
                    + "_".join([cls] + [str(t) for t in idx])
                )
            if exp <= 0:
                raise PolyParseError(f"line {lineno}, column {pos + 1}: bad exponent {exp}")
            mon = mon_mul(mon, ((registry.pos[key], exp),))
            consumed = fm.end()
        if consumed != len(factors_s):
            raise PolyParseError(
                f"line {lineno}, column {pos + 1}: trailing junk {factors_s[consumed:]!r}"
            )
        cv = md.coerce(c)
        acc = terms.get(mon)
        if acc is None:
            if not md.is_zero(cv):
                terms[mon] = cv
        else:
            s = md.add(acc, cv)
            if md.is_zero(s):
                del terms[mon]
            else:
                terms[mon] = s
        pos = m.end()
        first = False
    return MultiPoly(registry, mode, terms, copy=False)


def parse_poly_file(path, registry, mode):
    polys = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            p = parse_poly_line(line, registry, mode, lineno=lineno)
            if p is not None:
                polys.append(p)
    return polys


def format_poly(poly):
    if poly.is_zero():
        return "0"
    reg = poly.registry
    md = poly.mode
    parts = []
    for m in mon_sorted_desc(poly.terms):
        c = poly.terms[m]
        cs = md.format_entry(c)
        if not isinstance(cs, int):
            raise ValueError("text format stores integer coefficients only")
        neg = cs < 0
        body = str(abs(cs)) + "".join(
            f"*{reg.names[v]}" + (f"^{e}" if e > 1 else "") for v, e in m
        )
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("- " if neg else "+ ") + body)
    return " ".join(parts)


def write_poly_file(path, polys, header_lines=()):
    with open(path, "w", encoding="utf-8") as fh:
        for h in header_lines:
            fh.write(f"# {h}\n")
        for p in polys:
            fh.write(format_poly(p) + "\n")
