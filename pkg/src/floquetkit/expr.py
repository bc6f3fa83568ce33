"""Multivariate polynomials with exact rational coefficients.

Polynomials carry an ordered tuple of variable names and a map from exponent
tuples to :class:`fractions.Fraction` coefficients.  Arithmetic is exact;
floats only show up in :meth:`Polynomial.evaluate` and in the vectorised
evaluators built by :func:`compile_polynomials`.

Text grammar accepted by :func:`parse_polynomial`::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' INTEGER)?
    atom   := NUMBER | NAME | '(' expr ')'

``NUMBER`` is an integer or decimal literal (``12``, ``0.25``, ``.5``,
``1e-3``); decimals convert exactly.  Division is only allowed by a constant
sub-expression, so ``3/4*x`` and ``z*x/2`` parse while ``x/y`` does not.
``**`` is accepted as a synonym for ``^``.  Implicit multiplication is a
syntax error.
"""

from fractions import Fraction
from numbers import Rational
import re

import numpy as np

from .errors import DimensionMismatch, PolySyntaxError, UnknownVariable

__all__ = [
    "Polynomial",
    "parse_polynomial",
    "differentiate",
    "evaluate",
    "poly_combine",
    "compile_polynomials",
    "to_fraction",
]


def to_fraction(value):
    """Convert ``value`` to an exact Fraction.

    Strings go through the parser's literal rules (``"0.1"`` -> 1/10,
    ``"1/3"`` -> 1/3); floats use their shortest round-trip repr so that
    ``float(to_fraction(x)) == x``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not np.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(repr(float(value)))
    if isinstance(value, np.floating):
        return to_fraction(float(value))
    if isinstance(value, np.integer):
        return Fraction(int(value))
    if isinstance(value, str):
        p = parse_polynomial(value, ())
        if p.degree() > 0:  # pragma: no cover - no variables declared
            raise ValueError(f"not a constant: {value!r}")
        return p.constant_term()
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def _grlex_key(exps):
    return (sum(exps), exps)


class Polynomial:
    """Immutable polynomial over an ordered variable list.

    Zero coefficients are dropped on construction, so two polynomials over the
    same variables compare equal exactly when their term maps agree.
    """

    __slots__ = ("_vars", "_terms", "_hash")

    def __init__(self, variables, terms=None):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError(f"duplicate variable names in {variables}")
        n = len(variables)
        clean = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != n:
                raise DimensionMismatch(
                    f"exponent tuple {exps} does not match {n} variables")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            c = to_fraction(coeff)
            if c:
                clean[exps] = clean.get(exps, Fraction(0)) + c
                if not clean[exps]:
                    del clean[exps]
        self._vars = variables
        self._terms = clean
        self._hash = None

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, value, variables):
        variables = tuple(variables)
        return cls(variables, {(0,) * len(variables): value})

    @classmethod
    def variable(cls, name, variables):
        variables = tuple(variables)
        if name not in variables:
            raise UnknownVariable(name)
        exps = tuple(1 if v == name else 0 for v in variables)
        return cls(variables, {exps: 1})

    @classmethod
    def zero(cls, variables):
        return cls(variables, {})

    # -- accessors ----------------------------------------------------

    @property
    def variables(self):
        return self._vars

    @property
    def terms(self):
        """Read-only copy of the exponent -> coefficient map."""
        return dict(self._terms)

    def items(self):
        """Terms in graded lexicographic order, highest first."""
        return sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0]),
                      reverse=True)

    def is_zero(self):
        return not self._terms

    def degree(self):
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def constant_term(self):
        return self._terms.get((0,) * len(self._vars), Fraction(0))

    def __len__(self):
        return len(self._terms)

    # -- arithmetic ---------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other._vars != self._vars:
                raise DimensionMismatch(
                    f"variable lists differ: {self._vars} vs {other._vars}")
            return other
        if isinstance(other, (int, float, Fraction, Rational, np.number)):
            return Polynomial.constant(to_fraction(other), self._vars)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return Polynomial(self._vars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self._vars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial(self._vars, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = Polynomial.constant(1, self._vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, c):
        c = to_fraction(c)
        return Polynomial(self._vars, {e: c * v for e, v in self._terms.items()})

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self._vars == other._vars and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self.degree() <= 0 and self.constant_term() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._vars, frozenset(self._terms.items())))
        return self._hash

    # -- calculus and evaluation --------------------------------------

    def differentiate(self, var):
        if var not in self._vars:
            raise UnknownVariable(var)
        i = self._vars.index(var)
        out = {}
        for e, c in self._terms.items():
            if e[i]:
                d = list(e)
                d[i] -= 1
                out[tuple(d)] = c * e[i]
        return Polynomial(self._vars, out)

    def gradient(self):
        return [self.differentiate(v) for v in self._vars]

    def substitute(self, values):
        """Replace variables by rational constants; returns a Polynomial over
        the remaining variables (in their original order)."""
        values = {k: to_fraction(v) for k, v in values.items()}
        for k in values:
            if k not in self._vars:
                raise UnknownVariable(k)
        keep = [i for i, v in enumerate(self._vars) if v not in values]
        out = {}
        for e, c in self._terms.items():
            for i, v in enumerate(self._vars):
                if v in values and e[i]:
                    c = c * values[v] ** e[i]
            key = tuple(e[i] for i in keep)
            out[key] = out.get(key, 0) + c
        return Polynomial([self._vars[i] for i in keep], out)

    def evaluate(self, point):
        """Float value at ``point``, nested Horner in each variable."""
        point = [float(x) for x in point]
        if len(point) != len(self._vars):
            raise DimensionMismatch(
                f"point has {len(point)} entries, expected {len(self._vars)}")
        if not self._terms:
            return 0.0
        terms = [(e, float(c)) for e, c in self._terms.items()]
        return _horner(terms, point, 0)

    def __call__(self, *point):
        if len(point) == 1 and np.ndim(point[0]) == 1:
            point = point[0]
        return self.evaluate(point)

    # -- rendering ----------------------------------------------------

    def render(self):
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.items():
            mono = "*".join(
                v if k == 1 else f"{v}^{k}"
                for v, k in zip(self._vars, e) if k)
            mag = abs(c)
            if mono:
                body = mono if mag == 1 else f"{_fmt_frac(mag)}*{mono}"
            else:
                body = _fmt_frac(mag)
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts)

    __str__ = render

    def __repr__(self):
        return f"Polynomial({self.render()!r}, variables={self._vars})"


def _fmt_frac(c):
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _horner(terms, point, idx):
    if idx == len(point):
        return sum(c for _, c in terms)
    groups = {}
    for e, c in terms:
        groups.setdefault(e[idx], []).append((e, c))
    x = point[idx]
    acc = 0.0
    for power in range(max(groups), -1, -1):
        acc *= x
        if power in groups:
            acc += _horner(groups[power], point, idx + 1)
    return acc


# -- parser -------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^()])
""", re.VERBOSE)


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise PolySyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "op" and value == "**":
                value = "^"
            out.append((kind, value, pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, variables, params):
        self.text = text
        self.vars = tuple(variables)
        self.params = params
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def advance(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg, pos=None):
        if pos is None:
            pos = self.peek()[2]
        return PolySyntaxError(msg, self.text, pos)

    def parse(self):
        if self.peek()[0] == "end":
            raise self.error("empty expression")
        p = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            if kind in ("num", "name") or value == "(":
                raise self.error("implicit multiplication is not allowed")
            raise self.error(f"unexpected {value!r}")
        return p

    def expr(self):
        p = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self):
        p = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op, pos = self.advance()[1:]
            q = self.unary()
            if op == "*":
                p = p * q
            else:
                if q.degree() > 0:
                    raise self.error("division by a non-constant expression", pos)
                c = q.constant_term()
                if c == 0:
                    raise self.error("division by zero", pos)
                p = p.scale(1 / c)
        kind, value, pos = self.peek()
        if kind in ("num", "name") or value == "(":
            raise self.error("implicit multiplication is not allowed")
        return p

    def unary(self):
        kind, value, _ = self.peek()
        if kind == "op" and value in ("+", "-"):
            self.advance()
            p = self.unary()
            return -p if value == "-" else p
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.advance()
            kind, value, pos = self.advance()
            if kind != "num" or not value.isdigit():
                raise self.error("exponent must be a non-negative integer literal", pos)
            if self.peek()[1] == "^":
                raise self.error("chained exponents are ambiguous; use parentheses")
            base = base ** int(value)
        return base

    def atom(self):
        kind, value, pos = self.advance()
        if kind == "num":
            return Polynomial.constant(Fraction(value), self.vars)
        if kind == "name":
            if value in self.vars:
                return Polynomial.variable(value, self.vars)
            if value in self.params:
                return Polynomial.constant(self.params[value], self.vars)
            raise UnknownVariable(value, pos)
        if value == "(":
            p = self.expr()
            if self.peek()[1] != ")":
                raise self.error("expected ')'")
            self.advance()
            return p
        if kind == "end":
            raise self.error("unexpected end of input", pos)
        raise self.error(f"unexpected {value!r}", pos)


def parse_polynomial(text, variables, params=None):
    """Parse ``text`` into a normalized :class:`Polynomial`.

    ``params`` optionally binds extra names to rational constants; they are
    substituted during parsing and do not become variables.
    """
    params = {k: to_fraction(v) for k, v in (params or {}).items()}
    clash = set(params) & set(variables)
    if clash:
        raise ValueError(f"names declared both as variables and params: {sorted(clash)}")
    return _Parser(text, variables, params).parse()


# -- functional surface -------------------------------------------------

def differentiate(p, var):
    return p.differentiate(var)


def evaluate(p, point):
    return p.evaluate(point)


def poly_combine(a, b, op):
    if a.variables != b.variables:
        raise DimensionMismatch(f"variable lists differ: {a.variables} vs {b.variables}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}; expected add, sub or mul")


def compile_polynomials(polys, shape=None):
    """Vectorised float evaluator for a batch of polynomials.

    Returns ``fn(x) -> ndarray`` with the given ``shape`` (defaults to
    ``(len(polys),)``).  All polynomials must share one variable list.
    """
    polys = list(polys)
    if shape is None:
        shape = (len(polys),)
    if not polys:
        return lambda x: np.zeros(shape)
    variables = polys[0].variables
    for p in polys:
        if p.variables != variables:
            raise DimensionMismatch("polynomials over different variable lists")
    monos = sorted({e for p in polys for e in p._terms})
    n = len(variables)
    if not monos:
        return lambda x: np.zeros(shape)
    index = {e: j for j, e in enumerate(monos)}
    coeffs = np.zeros((len(polys), len(monos)))
    for i, p in enumerate(polys):
        for e, c in p._terms.items():
            coeffs[i, index[e]] = float(c)
    exps = np.array(monos, dtype=int).reshape(len(monos), n)
    maxdeg = int(exps.max()) if exps.size else 0
    cols = np.arange(n)

    def fn(x):
        x = np.asarray(x, dtype=float)
        if x.shape != (n,):
            raise DimensionMismatch(f"expected a point of length {n}, got shape {x.shape}")
        # powers[d, i] = x_i ** d
        powers = np.ones((maxdeg + 1, n))
        for d in range(1, maxdeg + 1):
            powers[d] = powers[d - 1] * x
        mon = powers[exps, cols].prod(axis=1)
        return (coeffs @ mon).reshape(shape)

    return fn
