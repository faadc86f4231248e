"""Exact calculus for bivariate polynomials on the unit disc.

Every cross-section field (axial velocity terms, transversal velocity
components, pressure corrections) is a polynomial in the local cartesian
coordinates (z2, z3) of the cross section.  This module supplies the
polynomial ring, exact differentiation, exact disc integration, and the
polar/Fourier conversions that the residual checks are built on.

Coefficients may be ``fractions.Fraction`` (exact verification domain) or
``float`` (runtime fields scaled by pressure data); all operations preserve
whichever domain they are given.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, pi


class DiscPoly:
    """Sparse bivariate polynomial sum_{m,n} c[m,n] z2^m z3^n.

    Canonical form: zero coefficients are never stored.  Instances are
    immutable in use (no mutating API) and safe to share.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        clean = {}
        for (m, n), c in (coeffs or {}).items():
            if m < 0 or n < 0:
                raise ValueError(f"negative exponent in monomial ({m},{n})")
            if c != 0:
                clean[(int(m), int(n))] = c
        self.coeffs = clean

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def constant(cls, c):
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, m, n, c=1):
        return cls({(m, n): c})

    @classmethod
    def z2(cls):
        return cls({(1, 0): 1})

    @classmethod
    def z3(cls):
        return cls({(0, 1): 1})

    @classmethod
    def radius_sq(cls):
        """z2^2 + z3^2."""
        return cls({(2, 0): 1, (0, 2): 1})

    # -- ring operations ----------------------------------------------
    def __add__(self, other):
        other = _as_poly(other)
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            out[key] = out.get(key, 0) + c
        return DiscPoly(out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) + (-self)

    def __neg__(self):
        return DiscPoly({k: -c for k, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, DiscPoly):
            out = {}
            for (m1, n1), c1 in self.coeffs.items():
                for (m2, n2), c2 in other.coeffs.items():
                    key = (m1 + m2, n1 + n2)
                    out[key] = out.get(key, 0) + c1 * c2
            return DiscPoly(out)
        return DiscPoly({k: c * other for k, c in self.coeffs.items()})

    def __rmul__(self, other):
        return DiscPoly({k: other * c for k, c in self.coeffs.items()})

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power")
        out = DiscPoly.constant(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, DiscPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, float, Fraction)):
            return self.coeffs == DiscPoly.constant(other).coeffs
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    # -- queries --------------------------------------------------------
    @property
    def degree(self):
        return max((m + n for m, n in self.coeffs), default=0)

    def is_zero(self):
        return not self.coeffs

    def coeff(self, m, n):
        return self.coeffs.get((m, n), 0)

    def max_abs(self):
        return max((abs(c) for c in self.coeffs.values()), default=0)

    def evaluate(self, z2, z3):
        total = 0
        for (m, n), c in self.coeffs.items():
            total = total + c * z2**m * z3**n
        return total

    def to_float(self):
        return DiscPoly({k: float(c) for k, c in self.coeffs.items()})

    def map_coeffs(self, fn):
        return DiscPoly({k: fn(c) for k, c in self.coeffs.items()})

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for (m, n) in sorted(self.coeffs, key=lambda k: (k[0] + k[1], k)):
            c = self.coeffs[(m, n)]
            mono = "".join(
                f"{v}^{e}" if e > 1 else v
                for v, e in (("z2", m), ("z3", n))
                if e
            )
            parts.append(f"{c}" if not mono else f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _as_poly(x):
    if isinstance(x, DiscPoly):
        return x
    return DiscPoly.constant(x)


# -- differential operators ---------------------------------------------

def differentiate(p: DiscPoly, var: str) -> DiscPoly:
    """Exact partial derivative with respect to ``"z2"`` or ``"z3"``."""
    if var == "z2":
        return DiscPoly({(m - 1, n): m * c for (m, n), c in p.coeffs.items() if m})
    if var == "z3":
        return DiscPoly({(m, n - 1): n * c for (m, n), c in p.coeffs.items() if n})
    raise ValueError(f"unknown variable {var!r}")


def diff_z2(p: DiscPoly) -> DiscPoly:
    return differentiate(p, "z2")


def diff_z3(p: DiscPoly) -> DiscPoly:
    return differentiate(p, "z3")


def laplacian(p: DiscPoly) -> DiscPoly:
    return diff_z2(diff_z2(p)) + diff_z3(diff_z3(p))


def gradient(p: DiscPoly):
    return diff_z2(p), diff_z3(p)


def divergence(v2: DiscPoly, v3: DiscPoly) -> DiscPoly:
    return diff_z2(v2) + diff_z3(v3)


def angular_derivative(p: DiscPoly) -> DiscPoly:
    """d/ds2 along circles: z2 * dp/dz3 - z3 * dp/dz2."""
    return DiscPoly.z2() * diff_z3(p) - DiscPoly.z3() * diff_z2(p)


def scaled_radial_derivative(p: DiscPoly) -> DiscPoly:
    """s3 * dp/ds3 in polar form: z2 * dp/dz2 + z3 * dp/dz3."""
    return DiscPoly.z2() * diff_z2(p) + DiscPoly.z3() * diff_z3(p)


# -- disc integration -----------------------------------------------------

def _double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


@lru_cache(maxsize=None)
def disc_moment_over_pi(m: int, n: int) -> Fraction:
    """Exact (1/pi) * integral of z2^m z3^n over the unit disc.

    Zero whenever m or n is odd.
    """
    if m % 2 or n % 2:
        return Fraction(0)
    num = _double_factorial(m - 1) * _double_factorial(n - 1)
    return Fraction(2, m + n + 2) * Fraction(num, _double_factorial(m + n))


def disc_integral_over_pi(p: DiscPoly):
    """Integral of p over the unit disc, divided by pi.

    Exact (a Fraction) when the coefficients are exact; a float otherwise.
    """
    total = 0
    for (m, n), c in p.coeffs.items():
        mom = disc_moment_over_pi(m, n)
        if mom:
            total = total + c * mom
    return total


def disc_integral(p: DiscPoly) -> float:
    """Integral of p over the unit disc, as a float."""
    return float(disc_integral_over_pi(p)) * pi


# -- trigonometric series on the boundary circle --------------------------

class TrigSeries:
    """Finite Fourier series a_0 + sum_k (a_k cos k s2 + b_k sin k s2).

    Stored as {k: [a_k, b_k]} with zero entries dropped; b_0 is unused.
    """

    __slots__ = ("modes",)

    def __init__(self, modes=None):
        clean = {}
        for k, (a, b) in (modes or {}).items():
            if k == 0:
                b = 0
            if a != 0 or b != 0:
                clean[int(k)] = [a, b]
        self.modes = clean

    def cos_coeff(self, k):
        return self.modes.get(k, [0, 0])[0]

    def sin_coeff(self, k):
        return self.modes.get(k, [0, 0])[1]

    def is_zero(self):
        return not self.modes

    def max_abs(self):
        return max(
            (max(abs(a), abs(b)) for a, b in self.modes.values()), default=0
        )

    def evaluate(self, s2):
        from math import cos, sin

        total = 0
        for k, (a, b) in self.modes.items():
            total = total + a * cos(k * s2) + b * sin(k * s2)
        return total

    def __add__(self, other):
        out = {k: list(v) for k, v in self.modes.items()}
        for k, (a, b) in other.modes.items():
            cur = out.setdefault(k, [0, 0])
            cur[0] = cur[0] + a
            cur[1] = cur[1] + b
        return TrigSeries(out)

    def __neg__(self):
        return TrigSeries({k: [-a, -b] for k, (a, b) in self.modes.items()})

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, TrigSeries):
            return NotImplemented
        return (self - other).is_zero()

    def __repr__(self):
        if not self.modes:
            return "0"
        parts = []
        for k in sorted(self.modes):
            a, b = self.modes[k]
            if a != 0:
                parts.append(f"{a}" if k == 0 else f"{a}*cos({k}s2)")
            if b != 0:
                parts.append(f"{b}*sin({k}s2)")
        return " + ".join(parts).replace("+ -", "- ")


def _bump(out, k, da, db):
    # reflect negative modes: cos(-k) = cos(k), sin(-k) = -sin(k), sin(0) = 0
    if k < 0:
        k, db = -k, -db
    cur = out.setdefault(k, [Fraction(0), Fraction(0)])
    cur[0] += da
    if k > 0:
        cur[1] += db


@lru_cache(maxsize=None)
def _trig_expand(m: int, n: int):
    """Fourier modes of cos^m(s2) sin^n(s2) with exact coefficients.

    Returns a tuple of (k, a_k, b_k) entries.
    """
    modes = {0: [Fraction(1), Fraction(0)]}

    def times_cos(src):
        out = {}
        for k, (a, b) in src.items():
            _bump(out, k + 1, a / 2, b / 2)
            _bump(out, k - 1, a / 2, b / 2)
        return out

    def times_sin(src):
        out = {}
        for k, (a, b) in src.items():
            _bump(out, k + 1, -b / 2, a / 2)
            _bump(out, k - 1, b / 2, -a / 2)
        return out

    for _ in range(m):
        modes = times_cos(modes)
    for _ in range(n):
        modes = times_sin(modes)
    return tuple(
        (k, a, b) for k, (a, b) in sorted(modes.items()) if a or b
    )


def polar_fourier(p: DiscPoly):
    """Fourier/radial decomposition of p(z2, z3) in polar coordinates.

    Substituting z2 = s3 cos s2, z3 = s3 sin s2 gives
    sum_k [A_k(s3) cos(k s2) + B_k(s3) sin(k s2)]; the return value maps
    ("cos", k) and ("sin", k) to {radial power j: coefficient}.
    """
    out = {}
    for (m, n), c in p.coeffs.items():
        j = m + n
        for k, a, b in _trig_expand(m, n):
            if a:
                rad = out.setdefault(("cos", k), {})
                rad[j] = rad.get(j, 0) + c * a
            if b:
                rad = out.setdefault(("sin", k), {})
                rad[j] = rad.get(j, 0) + c * b
    for key in list(out):
        out[key] = {j: c for j, c in out[key].items() if c != 0}
        if not out[key]:
            del out[key]
    return out


def from_polar_fourier(modes) -> DiscPoly:
    """Inverse of :func:`polar_fourier`.

    Each entry s3^j cos(k s2) (resp. sin) requires j >= k and j - k even;
    anything else is not a polynomial on the disc.
    """
    total = DiscPoly.zero()
    for (kind, k), radial in modes.items():
        harmonic = _circular_harmonic(k, kind)
        for j, c in radial.items():
            if j < k or (j - k) % 2:
                raise ValueError(
                    f"s3^{j} {kind}({k} s2) is not polynomial on the disc"
                )
            total = total + c * (DiscPoly.radius_sq() ** ((j - k) // 2) * harmonic)
    return total


@lru_cache(maxsize=None)
def _circular_harmonic(k: int, kind: str) -> DiscPoly:
    """s3^k cos(k s2) or s3^k sin(k s2) as a polynomial: Re/Im (z2 + i z3)^k."""
    coeffs = {}
    for j in range(k + 1):
        c = comb(k, j)
        if kind == "cos" and j % 2 == 0:
            coeffs[(k - j, j)] = c * (-1) ** (j // 2)
        elif kind == "sin" and j % 2 == 1:
            coeffs[(k - j, j)] = c * (-1) ** ((j - 1) // 2)
    return DiscPoly(coeffs)


def restrict_to_boundary(p: DiscPoly) -> TrigSeries:
    """Trace of p on the unit circle as a finite Fourier series.

    The substitution z2 = cos s2, z3 = sin s2 is reduced through
    cos^2 + sin^2 = 1, so e.g. (z2^2 + z3^2 - 1) * q restricts to zero.
    """
    modes = {}
    for key, radial in polar_fourier(p).items():
        kind, k = key
        total = 0
        for _, c in radial.items():
            total = total + c
        if total != 0:
            cur = modes.setdefault(k, [0, 0])
            cur[0 if kind == "cos" else 1] = (
                cur[0 if kind == "cos" else 1] + total
            )
    return TrigSeries(modes)


def max_abs_difference(p: DiscPoly, q: DiscPoly) -> float:
    """Largest absolute coefficient difference between two polynomials."""
    keys = set(p.coeffs) | set(q.coeffs)
    return max(
        (abs(float(p.coeff(m, n)) - float(q.coeff(m, n))) for m, n in keys),
        default=0.0,
    )
