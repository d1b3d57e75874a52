"""Exact sparse multivariate (Laurent) polynomial and rational function
arithmetic, plus the finite exterior algebra used for differential form
bookkeeping.

Coefficients are exact rationals (fractions.Fraction) end to end; floating
point enters only when a caller evaluates at numeric points.  Exponents may
be negative for variables that only ever appear in monomial denominators
(Schwinger parameters inside propagator coefficients), which keeps the whole
reduction in one Laurent ring.

Generator order convention for the exterior algebra: all dt_e in edge order,
then dw-bar_i^j in lexicographic (i, j) order.  Every sign in the package is
produced by the merge/permutation parity helpers here; no signs are inserted
by hand elsewhere.
"""

from fractions import Fraction

from .errors import VariableMismatch, GeneratorMismatch


def _coerce(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, float):
        # floats are exact binary rationals, so this is lossless
        return Fraction(c)
    raise TypeError("coefficient must be int, Fraction or float, got %r" % (c,))


### permutation parity helpers

def merge_sign(a, b):
    """Koszul sign of merging two strictly increasing index tuples.

    Returns (sign, merged_tuple), or (0, None) if the tuples share an index
    (the wedge vanishes).

    >>> merge_sign((0,), (1,))
    (1, (0, 1))
    >>> merge_sign((1,), (0,))
    (-1, (0, 1))
    >>> merge_sign((0, 2), (1, 3))
    (-1, (0, 1, 2, 3))
    >>> merge_sign((0,), (0,))
    (0, None)
    """
    if not a:
        return 1, tuple(b)
    if not b:
        return 1, tuple(a)
    out = []
    i = j = 0
    sign = 1
    while i < len(a) and j < len(b):
        if a[i] == b[j]:
            return 0, None
        if a[i] < b[j]:
            out.append(a[i])
            i += 1
        else:
            # b[j] jumps over the remaining len(a)-i elements of a
            if (len(a) - i) % 2:
                sign = -sign
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return sign, tuple(out)


def permutation_parity(perm):
    """Sign of a permutation given as a sequence of distinct integers.

    The sign is that of the permutation sorting `perm` into increasing order.

    >>> permutation_parity([0, 1, 2])
    1
    >>> permutation_parity([1, 0, 2])
    -1
    >>> permutation_parity([2, 0, 1])
    1
    """
    seen = [False] * len(perm)
    order = sorted(range(len(perm)), key=lambda i: perm[i])
    sign = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        # walk the cycle
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = order[i]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


### Laurent polynomials

class Polynomial(object):
    """Sparse multivariate Laurent polynomial with Fraction coefficients.

    `variables` is a tuple of names fixing the exponent-vector layout.
    Terms with zero coefficient are never stored.

    >>> t1t2 = Polynomial.variables_of(("t1", "t2"))
    >>> p = t1t2["t1"] + t1t2["t2"]
    >>> q = t1t2["t1"] - t1t2["t2"]
    >>> print(p * q)
    t1^2 - t2^2
    >>> print(p ** 2)
    t1^2 + 2*t1*t2 + t2^2
    """

    __slots__ = ("vars", "terms")

    def __init__(self, variables, terms=None):
        self.vars = tuple(variables)
        clean = {}
        if terms:
            for exp, c in terms.items():
                c = _coerce(c)
                if c != 0:
                    exp = tuple(exp)
                    assert len(exp) == len(self.vars)
                    clean[exp] = clean.get(exp, Fraction(0)) + c
                    if clean[exp] == 0:
                        del clean[exp]
        self.terms = clean

    @classmethod
    def zero(cls, variables):
        return cls(variables)

    @classmethod
    def constant(cls, variables, c):
        c = _coerce(c)
        if c == 0:
            return cls(variables)
        return cls(variables, {tuple([0] * len(variables)): c})

    @classmethod
    def monomial(cls, variables, exponents, c=1):
        return cls(variables, {tuple(exponents): _coerce(c)})

    @classmethod
    def variable(cls, variables, name, power=1, c=1):
        variables = tuple(variables)
        i = variables.index(name)
        exp = [0] * len(variables)
        exp[i] = power
        return cls(variables, {tuple(exp): _coerce(c)})

    @classmethod
    def variables_of(cls, variables):
        """A tiny indexable factory: vars_obj["t1"] is the variable t1."""
        variables = tuple(variables)

        class _Factory(object):
            def __getitem__(self, name):
                return cls.variable(variables, name)
        return _Factory()

    def _check(self, other):
        if self.vars != other.vars:
            raise VariableMismatch(
                "polynomial variables %r vs %r" % (self.vars, other.vars))

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        zero = tuple([0] * len(self.vars))
        return not self.terms or (len(self.terms) == 1 and zero in self.terms)

    def constant_value(self):
        zero = tuple([0] * len(self.vars))
        return self.terms.get(zero, Fraction(0))

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.vars, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.vars, other)
        self._check(other)
        terms = dict(self.terms)
        for exp, c in other.terms.items():
            s = terms.get(exp, Fraction(0)) + c
            if s == 0:
                terms.pop(exp, None)
            else:
                terms[exp] = s
        out = Polynomial.__new__(Polynomial)
        out.vars = self.vars
        out.terms = terms
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Polynomial.__new__(Polynomial)
        out.vars = self.vars
        out.terms = {e: -c for e, c in self.terms.items()}
        return out

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.vars, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, Fraction)):
            c = _coerce(other)
            if c == 0:
                return Polynomial.zero(self.vars)
            out = Polynomial.__new__(Polynomial)
            out.vars = self.vars
            out.terms = {e: k * c for e, k in self.terms.items()}
            return out
        self._check(other)
        terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = terms.get(e, Fraction(0)) + c1 * c2
                if s == 0:
                    terms.pop(e, None)
                else:
                    terms[e] = s
        out = Polynomial.__new__(Polynomial)
        out.vars = self.vars
        out.terms = terms
        return out

    __rmul__ = __mul__

    def __pow__(self, k):
        assert isinstance(k, int) and k >= 0
        result = Polynomial.constant(self.vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def substitute(self, mapping):
        """Replace variables by Polynomials (same variable universe).

        Exponents of substituted variables must be non-negative.  For
        monomial substitutions with negative exponents use remap_exponents.
        """
        for name in mapping:
            if name not in self.vars:
                raise VariableMismatch("unknown variable %r" % name)
        idx = {name: self.vars.index(name) for name in mapping}
        result = Polynomial.zero(self.vars)
        for exp, c in self.terms.items():
            term = None
            rest = list(exp)
            for name, i in idx.items():
                if exp[i] < 0:
                    raise VariableMismatch(
                        "negative power of substituted variable %r" % name)
                rest[i] = 0
            term = Polynomial.monomial(self.vars, rest, c)
            for name, i in idx.items():
                if exp[i]:
                    term = term * (mapping[name] ** exp[i])
            result = result + term
        return result

    def remap_exponents(self, new_vars, var_map):
        """Monomial substitution allowing negative exponents.

        var_map sends an old variable name to a list of (new_name, power)
        pairs; the old exponent e contributes e*power to each new variable.
        Old variables absent from var_map must appear in new_vars under the
        same name.
        """
        new_vars = tuple(new_vars)
        pos = {v: i for i, v in enumerate(new_vars)}
        plan = []
        for i, v in enumerate(self.vars):
            if v in var_map:
                plan.append([(pos[nv], p) for (nv, p) in var_map[v]])
            else:
                plan.append([(pos[v], 1)])
        terms = {}
        for exp, c in self.terms.items():
            ne = [0] * len(new_vars)
            for i, e in enumerate(exp):
                if e:
                    for j, p in plan[i]:
                        ne[j] += e * p
            ne = tuple(ne)
            s = terms.get(ne, Fraction(0)) + c
            if s == 0:
                terms.pop(ne, None)
            else:
                terms[ne] = s
        return Polynomial(new_vars, terms)

    def partial_derivative(self, name):
        i = self.vars.index(name)
        terms = {}
        for exp, c in self.terms.items():
            if exp[i] == 0:
                continue
            ne = list(exp)
            ne[i] -= 1
            terms[tuple(ne)] = c * exp[i]
        return Polynomial(self.vars, terms)

    def collect(self, name):
        """dict: power of `name` -> Polynomial with that variable cleared."""
        i = self.vars.index(name)
        out = {}
        for exp, c in self.terms.items():
            ne = list(exp)
            p = ne[i]
            ne[i] = 0
            piece = out.setdefault(p, {})
            ne = tuple(ne)
            piece[ne] = piece.get(ne, Fraction(0)) + c
        return {p: Polynomial(self.vars, t) for p, t in out.items()}

    def min_degree(self, name):
        """Smallest exponent of `name` over all terms (None if zero poly)."""
        if not self.terms:
            return None
        i = self.vars.index(name)
        return min(exp[i] for exp in self.terms)

    def max_degree(self, name):
        if not self.terms:
            return None
        i = self.vars.index(name)
        return max(exp[i] for exp in self.terms)

    def total_degree(self):
        if not self.terms:
            return None
        return max(sum(exp) for exp in self.terms)

    def evaluate(self, values):
        """Numeric evaluation; values maps every occurring variable to a
        number (or numpy array, broadcasting elementwise).  Terms are
        accumulated in sorted exponent order so results are reproducible.
        """
        vals = [values.get(v) for v in self.vars]
        acc = 0
        for exp in sorted(self.terms):
            c = self.terms[exp]
            term = float(c)
            for i, e in enumerate(exp):
                if e:
                    if vals[i] is None:
                        raise VariableMismatch("no value for %r" % self.vars[i])
                    term = term * vals[i] ** e
            acc = acc + term
        return acc

    def monomial_content(self):
        """Componentwise minimum exponent vector (makes a Laurent polynomial
        an honest polynomial when divided out)."""
        if not self.terms:
            return tuple([0] * len(self.vars))
        mins = None
        for exp in self.terms:
            if mins is None:
                mins = list(exp)
            else:
                mins = [min(a, b) for a, b in zip(mins, exp)]
        return tuple(mins)

    def shift_exponents(self, shift):
        terms = {tuple(a - b for a, b in zip(exp, shift)): c
                 for exp, c in self.terms.items()}
        return Polynomial(self.vars, terms)

    def content(self):
        """Positive rational content (gcd of coefficients), 0 for the zero
        polynomial."""
        if not self.terms:
            return Fraction(0)
        from math import gcd
        num = 0
        den = 1
        for c in self.terms.values():
            num = gcd(num, abs(c.numerator))
            den = den * c.denominator // gcd(den, c.denominator)
        return Fraction(num, den)

    def exact_divide(self, divisor):
        """Exact polynomial division (raises if not divisible).

        Used by the fraction-free determinant; divisor must be nonzero.
        """
        self._check(divisor)
        assert divisor.terms, "division by zero polynomial"
        if not self.terms:
            return Polynomial.zero(self.vars)
        rem = dict(self.terms)
        # leading term of divisor in lex order
        dlead = max(divisor.terms)
        dc = divisor.terms[dlead]
        out = {}
        while rem:
            rlead = max(rem)
            rc = rem[rlead]
            qexp = tuple(a - b for a, b in zip(rlead, dlead))
            assert all(e >= 0 for e in qexp), "inexact polynomial division"
            qc = rc / dc
            out[qexp] = out.get(qexp, Fraction(0)) + qc
            # subtract qc * x^qexp * divisor
            for exp, c in divisor.terms.items():
                e = tuple(a + b for a, b in zip(qexp, exp))
                s = rem.get(e, Fraction(0)) - qc * c
                if s == 0:
                    rem.pop(e, None)
                else:
                    rem[e] = s
        return Polynomial(self.vars, out)

    def __str__(self):
        if not self.terms:
            return "0"
        bits = []
        for exp in sorted(self.terms, reverse=True):
            c = self.terms[exp]
            factors = []
            for v, e in zip(self.vars, exp):
                if e == 1:
                    factors.append(v)
                elif e != 0:
                    factors.append("%s^%d" % (v, e))
            if not factors:
                body = str(abs(c))
            elif abs(c) == 1:
                body = "*".join(factors)
            else:
                body = str(abs(c)) + "*" + "*".join(factors)
            if not bits:
                bits.append(body if c > 0 else "-" + body)
            else:
                bits.append(("+ " if c > 0 else "- ") + body)
        return " ".join(bits)

    def __repr__(self):
        return "Polynomial(%s)" % str(self)

    def dump(self):
        """Canonical sorted text form for golden tests."""
        return str(self)


def poly_add(a, b):
    return a + b


def poly_mul(a, b):
    return a * b


def poly_pow(a, k):
    return a ** k


def poly_substitute(a, mapping):
    return a.substitute(mapping)


def poly_partial_derivative(a, name):
    return a.partial_derivative(name)


### rational functions

class RationalFunction(object):
    """Quotient of two Polynomials over the same variables.

    Normalization is best effort: integer content and monomial content are
    cancelled and the denominator's lex-leading coefficient is made positive.
    Equality is always decided by cross-multiplication, never by comparing
    normal forms.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if den is None:
            den = Polynomial.constant(num.vars, 1)
        if num.vars != den.vars:
            raise VariableMismatch("rational function over mixed variables")
        assert den.terms, "zero denominator"
        # cancel monomial content (also clears negative Laurent exponents)
        mn = num.monomial_content()
        md = den.monomial_content()
        common = tuple(min(a, b) for a, b in zip(mn, md)) if num.terms else md
        if any(common):
            num = num.shift_exponents(common)
            den = den.shift_exponents(common)
        # cancel rational content
        cn = num.content()
        cd = den.content()
        if cn != 0:
            c = Fraction(cn.numerator * cd.denominator,
                         cn.denominator * cd.numerator)
            num = num * (1 / cn) * c.numerator
            den = den * (1 / cd) * c.denominator
        else:
            den = Polynomial.constant(den.vars, 1)
        if den.terms[max(den.terms)] < 0:
            num = -num
            den = -den
        self.num = num
        self.den = den

    @classmethod
    def from_const(cls, variables, c):
        return cls(Polynomial.constant(variables, c))

    @property
    def vars(self):
        return self.num.vars

    def is_zero(self):
        return self.num.is_zero()

    def __bool__(self):
        return bool(self.num)

    def _lift(self, other):
        if isinstance(other, (int, float, Fraction)):
            return RationalFunction.from_const(self.vars, _coerce(other))
        if isinstance(other, Polynomial):
            return RationalFunction(other)
        return other

    def __add__(self, other):
        other = self._lift(other)
        if self.den.terms == other.den.terms and self.den.vars == other.den.vars:
            if self.den == other.den:
                return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den,
                                self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        out = RationalFunction.__new__(RationalFunction)
        out.num = -self.num
        out.den = self.den
        return out

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._lift(other)
        assert other.num.terms, "division by zero rational function"
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._lift(other)
        return other / self

    def __pow__(self, k):
        assert isinstance(k, int)
        if k < 0:
            return RationalFunction(self.den ** (-k), self.num ** (-k))
        return RationalFunction(self.num ** k, self.den ** k)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Polynomial, float)):
            other = self._lift(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        raise TypeError("RationalFunction is unhashable (no normal form)")

    def evaluate(self, values):
        return self.num.evaluate(values) / self.den.evaluate(values)

    def __str__(self):
        if self.den.is_constant() and self.den.constant_value() == 1:
            return str(self.num)
        return "(%s) / (%s)" % (self.num, self.den)

    def __repr__(self):
        return "RationalFunction(%s)" % str(self)

    def dump(self):
        return str(self)


### exterior algebra

class ExteriorElement(object):
    """Element of the exterior algebra on a fixed ordered generator list.

    Terms map strictly increasing tuples of generator indices to scalar
    coefficients (anything supporting + and *: Fraction, Polynomial,
    RationalFunction).  Multiplication inserts Koszul signs via merge_sign.
    """

    __slots__ = ("generators", "terms")

    def __init__(self, generators, terms=None):
        self.generators = tuple(generators)
        self.terms = {}
        if terms:
            for idx, c in terms.items():
                idx = tuple(idx)
                assert all(0 <= i < len(self.generators) for i in idx)
                assert list(idx) == sorted(set(idx)), \
                    "generator index tuple must be strictly increasing"
                if _scalar_nonzero(c):
                    self._accumulate(idx, c)

    def _accumulate(self, idx, c):
        if idx in self.terms:
            s = self.terms[idx] + c
            if _scalar_nonzero(s):
                self.terms[idx] = s
            else:
                del self.terms[idx]
        else:
            self.terms[idx] = c

    @classmethod
    def zero(cls, generators):
        return cls(generators)

    @classmethod
    def scalar(cls, generators, c):
        return cls(generators, {(): c})

    @classmethod
    def generator(cls, generators, name, c=1):
        generators = tuple(generators)
        return cls(generators, {(generators.index(name),): c})

    def _check(self, other):
        if self.generators != other.generators:
            raise GeneratorMismatch(
                "exterior elements over different generator lists")

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        self._check(other)
        out = ExteriorElement(self.generators)
        out.terms = dict(self.terms)
        for idx, c in other.terms.items():
            out._accumulate(idx, c)
        return out

    def __neg__(self):
        out = ExteriorElement(self.generators)
        out.terms = {i: -c for i, c in self.terms.items()}
        return out

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, ExteriorElement):
            out = ExteriorElement(self.generators)
            for idx, c in self.terms.items():
                nc = c * other
                if _scalar_nonzero(nc):
                    out.terms[idx] = nc
            return out
        self._check(other)
        out = ExteriorElement(self.generators)
        for i1, c1 in self.terms.items():
            for i2, c2 in other.terms.items():
                sign, merged = merge_sign(i1, i2)
                if sign == 0:
                    continue
                c = c1 * c2
                if sign < 0:
                    c = -c
                if _scalar_nonzero(c):
                    out._accumulate(merged, c)
        return out

    __rmul__ = __mul__

    def extract_component(self, names):
        """Coefficient of the generator monomial given by `names` (in any
        order; the coefficient returned is for the strictly increasing
        arrangement, with the reordering parity applied)."""
        idx = tuple(self.generators.index(n) for n in names)
        sign = permutation_parity(idx)
        key = tuple(sorted(idx))
        assert len(set(key)) == len(key), "repeated generator"
        c = self.terms.get(key)
        if c is None:
            return None
        return c if sign > 0 else -c

    def degrees(self):
        return sorted(set(len(i) for i in self.terms))

    def __str__(self):
        if not self.terms:
            return "0"
        bits = []
        for idx in sorted(self.terms):
            names = "^".join(self.generators[i] for i in idx) or "1"
            bits.append("(%s) %s" % (self.terms[idx], names))
        return " + ".join(bits)

    def __repr__(self):
        return "ExteriorElement(%s)" % str(self)


def _scalar_nonzero(c):
    if isinstance(c, (int, Fraction)):
        return c != 0
    if isinstance(c, (Polynomial, RationalFunction)):
        return not c.is_zero()
    return bool(c)


def exterior_mul(a, b):
    return a * b


def extract_component(a, names):
    return a.extract_component(names)
