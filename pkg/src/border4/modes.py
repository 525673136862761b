"""Scalar modes shared by matrices, tensors and polynomials.

A mode bundles the ring operations for one kind of scalar. Containers store
plain Python values (int or Fraction for RATIONAL, reduced ints for a prime
field, floats for FLOAT64) and carry the mode object that interprets them.
Mixing values from two different modes is always an error.
"""

from fractions import Fraction


class ModeError(TypeError):
    """Raised when values from different scalar modes are combined."""


class ExactnessError(TypeError):
    """Raised when an exact-only operation is asked of FLOAT64 data."""


def _is_probable_prime(n: int) -> bool:
    # deterministic Miller-Rabin for n < 3.3e24
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
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


class Mode:
    name = "?"
    is_field = True
    is_exact = True

    def coerce(self, x):
        raise NotImplementedError

    def from_int(self, n: int):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def sub(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def is_zero(self, a) -> bool:
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def exact_div(self, a, b):
        raise NotImplementedError

    @property
    def zero(self):
        return self.from_int(0)

    @property
    def one(self):
        return self.from_int(1)

    def check_same(self, other: "Mode") -> None:
        if self != other:
            raise ModeError(f"mode mismatch: {self} vs {other}")

    def format_entry(self, a) -> object:
        raise NotImplementedError

    def parse_entry(self, s):
        raise NotImplementedError

    def rand(self, rng, bound: int):
        raise NotImplementedError

    def __repr__(self):
        return self.name


class RationalMode(Mode):
    """Exact rationals; values are int when integral, Fraction otherwise."""

    name = "rational"

    def coerce(self, x):
        if type(x) is int:
            return x
        if isinstance(x, Fraction):
            return int(x) if x.denominator == 1 else x
        if isinstance(x, int):  # bool and int subclasses
            return int(x)
        if isinstance(x, str):
            return self.parse_entry(x)
        raise ModeError(f"cannot coerce {x!r} to a rational")

    def from_int(self, n):
        return n

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def is_zero(self, a):
        return a == 0

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        r = Fraction(1, 1) / a if isinstance(a, Fraction) else Fraction(1, a)
        return int(r) if r.denominator == 1 else r

    def exact_div(self, a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero")
        if type(a) is int and type(b) is int:
            q, rem = divmod(a, b)
            if rem == 0:
                return q
            return Fraction(a, b)
        r = Fraction(a) / Fraction(b)
        return int(r) if r.denominator == 1 else r

    def format_entry(self, a):
        if isinstance(a, Fraction) and a.denominator != 1:
            return f"{a.numerator}/{a.denominator}"
        return int(a)

    def parse_entry(self, s):
        if isinstance(s, int):
            return s
        if isinstance(s, str):
            f = Fraction(s)
            return int(f) if f.denominator == 1 else f
        raise ModeError(f"bad rational entry {s!r}")

    def rand(self, rng, bound):
        return rng.randint(-bound, bound)

    def __eq__(self, other):
        return isinstance(other, RationalMode)

    def __hash__(self):
        return hash("rational")


class PrimeFieldMode(Mode):
    """GF(p) for an odd prime p; values are ints reduced into [0, p)."""

    name = "prime_field"

    def __init__(self, p: int):
        if p == 2 or not _is_probable_prime(p):
            raise ValueError(f"modulus must be an odd prime, got {p}")
        self.p = p

    def coerce(self, x):
        if isinstance(x, int):
            return x % self.p
        if isinstance(x, Fraction):
            den = x.denominator % self.p
            if den == 0:
                raise ZeroDivisionError(f"denominator divisible by {self.p}")
            return x.numerator * pow(den, self.p - 2, self.p) % self.p
        raise ModeError(f"cannot coerce {x!r} into GF({self.p})")

    def from_int(self, n):
        return n % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return a * b % self.p

    def neg(self, a):
        return -a % self.p

    def is_zero(self, a):
        return a == 0

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, self.p - 2, self.p)

    def exact_div(self, a, b):
        return a * self.inv(b) % self.p

    def format_entry(self, a):
        return int(a)

    def parse_entry(self, s):
        if isinstance(s, int):
            return s % self.p
        if isinstance(s, str):
            return int(s, 10) % self.p
        raise ModeError(f"bad GF({self.p}) entry {s!r}")

    def rand(self, rng, bound=None):
        return rng.randrange(self.p)

    def __eq__(self, other):
        return isinstance(other, PrimeFieldMode) and other.p == self.p

    def __hash__(self):
        return hash(("gfp", self.p))

    def __repr__(self):
        return f"prime_field({self.p})"


class Float64Mode(Mode):
    """IEEE doubles. Not exact: rejected by the exact linear algebra."""

    name = "float64"
    is_exact = False

    def coerce(self, x):
        return float(x)

    def from_int(self, n):
        return float(n)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def is_zero(self, a):
        return a == 0.0

    def inv(self, a):
        return 1.0 / a

    def exact_div(self, a, b):
        return a / b

    def format_entry(self, a):
        return float(a)

    def parse_entry(self, s):
        return float(s)

    def rand(self, rng, bound):
        return rng.uniform(-bound, bound)

    def __eq__(self, other):
        return isinstance(other, Float64Mode)

    def __hash__(self):
        return hash("float64")


RATIONAL = RationalMode()
FLOAT64 = Float64Mode()

P31 = 2**31 - 1
P61 = 2**61 - 1


def prime_field(p: int) -> PrimeFieldMode:
    return PrimeFieldMode(p)


def mode_from_json(name: str, modulus=None) -> Mode:
    if name == "rational":
        return RATIONAL
    if name == "gfp":
        if modulus is None:
            raise ValueError("gfp mode requires a modulus")
        return PrimeFieldMode(int(modulus))
    if name == "float":
        return FLOAT64
    raise ValueError(f"unknown mode {name!r}")


def mode_to_json(mode: Mode) -> tuple[str, int | None]:
    if isinstance(mode, RationalMode):
        return "rational", None
    if isinstance(mode, PrimeFieldMode):
        return "gfp", mode.p
    if isinstance(mode, Float64Mode):
        return "float", None
    raise ModeError(f"unserializable mode {mode}")
