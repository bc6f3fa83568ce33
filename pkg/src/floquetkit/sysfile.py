"""Reader for line-oriented system-definition files.

See ``docs/system-file-format.md`` for the grammar.  A minimal file::

    # circle oscillator
    dimension 2
    variables x y
    field
    -y - x*(x^2 + y^2 - 1)
    x - y*(x^2 + y^2 - 1)
    manifolds
    x^2 + y^2 - 1
    cofactor
    -2*x^2 - 2*y^2
    orbit
    period 2*pi
    x 0 1 0
    y 0 0 1
"""

from dataclasses import dataclass
from fractions import Fraction
import hashlib
import math
import re

from .errors import FloquetError, PolySyntaxError, UnknownVariable
from .expr import parse_polynomial, to_fraction
from .floquet import DynamicalSystem, InvariantManifoldSet, PeriodicOrbit

__all__ = ["SystemFileError", "SystemDefinition", "parse_system_text", "load_system_file"]

_SECTIONS = ("field", "manifolds", "cofactor", "orbit")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z_0-9]*$")


class SystemFileError(FloquetError, ValueError):
    def __init__(self, message, line=None, source="<text>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


@dataclass
class SystemDefinition:
    name: str
    variables: tuple
    params: dict
    field: tuple
    manifolds: tuple = None
    cofactor: tuple = None
    period: float = None
    fourier: tuple = None

    def system(self):
        return DynamicalSystem.from_polynomials(self.field, name=self.name)

    def orbit(self):
        return PeriodicOrbit.fourier(self.period, self.fourier)

    def manifold_set(self, cofactor=None):
        cofactor = cofactor if cofactor is not None else self.cofactor
        if self.manifolds is None or cofactor is None:
            return None
        return InvariantManifoldSet.from_polynomials(self.manifolds, cofactor)

    def digest(self):
        parts = [self.name, " ".join(self.variables)]
        parts += [p.render() for p in self.field]
        parts += [p.render() for p in self.manifolds or ()]
        parts += [k.render() for row in self.cofactor or () for k in row]
        parts.append(repr(self.period))
        parts += [" ".join(repr(c) for c in row) for row in self.fourier or ()]
        return hashlib.sha256("\n".join(parts).encode()).hexdigest()


def _parse_period(text, line, source):
    t = text.replace(" ", "")
    m = re.fullmatch(r"(?:(.+?)\*)?pi", t)
    try:
        if m:
            scale = float(to_fraction(m.group(1))) if m.group(1) else 1.0
            value = scale * math.pi
        else:
            value = float(to_fraction(t))
    except (ValueError, PolySyntaxError, UnknownVariable):
        raise SystemFileError(f"bad period {text!r}", line, source) from None
    if not value > 0:
        raise SystemFileError("period must be positive", line, source)
    return value


def parse_system_text(text, source="<text>", overrides=None, name=None):
    """Parse a system definition; ``overrides`` replaces ``params`` values."""
    lines = []
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((no, body))

    header = {}
    sections = {}
    current = None
    for no, body in lines:
        word, *tail = body.split(None, 1)
        rest = tail[0] if tail else ""
        if word in _SECTIONS and not rest.strip():
            if word in sections:
                raise SystemFileError(f"duplicate section {word!r}", no, source)
            current = word
            sections[word] = []
        elif current is None:
            if word not in ("dimension", "variables", "params", "name"):
                raise SystemFileError(f"unknown header keyword {word!r}", no, source)
            if word == "params":
                header.setdefault("params", []).append((no, rest))
            elif word in header:
                raise SystemFileError(f"duplicate {word!r} line", no, source)
            else:
                header[word] = (no, rest.strip())
        else:
            sections[current].append((no, body))

    if "dimension" not in header:
        raise SystemFileError("missing 'dimension' line", None, source)
    no, dim_text = header["dimension"]
    if not dim_text.isdigit() or int(dim_text) < 2:
        raise SystemFileError("dimension must be an integer >= 2", no, source)
    n = int(dim_text)

    if "variables" not in header:
        raise SystemFileError("missing 'variables' line", None, source)
    no, var_text = header["variables"]
    variables = tuple(var_text.split())
    if len(variables) != n:
        raise SystemFileError(f"expected {n} variables, got {len(variables)}", no, source)
    for v in variables:
        if not _NAME.match(v):
            raise SystemFileError(f"bad variable name {v!r}", no, source)
    if len(set(variables)) != n:
        raise SystemFileError("duplicate variable names", no, source)

    params = {}
    for no, rest in header.get("params", []):
        for item in rest.split():
            key, eq, value = item.partition("=")
            if not eq or not _NAME.match(key):
                raise SystemFileError(f"bad parameter binding {item!r}", no, source)
            if key in variables:
                raise SystemFileError(f"parameter {key!r} shadows a variable", no, source)
            try:
                params[key] = to_fraction(value)
            except (ValueError, PolySyntaxError, UnknownVariable):
                raise SystemFileError(f"parameter {key!r} is not a rational literal", no, source) from None
    for key, value in (overrides or {}).items():
        if key not in params:
            raise SystemFileError(f"--param {key}: no such parameter in file", None, source)
        params[key] = to_fraction(value)

    def polys(section, count):
        body = sections.get(section)
        if body is None:
            return None
        if len(body) > count:
            no, extra = body[count]
            raise SystemFileError(
                f"section {section!r} takes {count} lines; unexpected extra line {extra!r}",
                no, source)
        if len(body) < count:
            first = body[0][0] if body else None
            raise SystemFileError(
                f"section {section!r} needs {count} lines, found {len(body)}", first, source)
        out = []
        for no, line in body:
            try:
                out.append(parse_polynomial(line, variables, params))
            except (PolySyntaxError, UnknownVariable) as exc:
                raise SystemFileError(f"in {section!r}: {exc}", no, source) from None
        return tuple(out)

    if "field" not in sections:
        raise SystemFileError("missing 'field' section", None, source)
    field = polys("field", n)
    manifolds = polys("manifolds", n - 1)
    flat = polys("cofactor", (n - 1) ** 2)
    cofactor = None
    if flat is not None:
        if manifolds is None:
            raise SystemFileError("'cofactor' given without 'manifolds'", None, source)
        cofactor = tuple(tuple(flat[i * (n - 1):(i + 1) * (n - 1)]) for i in range(n - 1))

    period = fourier = None
    if "orbit" in sections:
        body = sections["orbit"]
        if not body or body[0][1].split()[0] != "period":
            line = body[0][0] if body else None
            raise SystemFileError("orbit section must start with 'period <real>'", line, source)
        period = _parse_period(body[0][1][len("period"):].strip(), body[0][0], source)
        rows = {}
        for no, line in body[1:]:
            parts = line.split()
            var = parts[0]
            if var not in variables:
                raise SystemFileError(f"orbit line for unknown variable {var!r}", no, source)
            if var in rows:
                raise SystemFileError(f"duplicate orbit line for {var!r}", no, source)
            coeffs = parts[1:]
            if not coeffs or len(coeffs) % 2 == 0:
                raise SystemFileError(
                    "orbit line needs a0 followed by (a_j b_j) pairs", no, source)
            try:
                rows[var] = tuple(float(to_fraction(c)) for c in coeffs)
            except (ValueError, PolySyntaxError, UnknownVariable):
                raise SystemFileError("orbit coefficients must be real literals", no, source) from None
        missing = [v for v in variables if v not in rows]
        if missing:
            raise SystemFileError(f"orbit lines missing for {missing}", body[0][0], source)
        fourier = tuple(rows[v] for v in variables)

    if name is None:
        name = header["name"][1] if "name" in header else source
    return SystemDefinition(name=name, variables=variables, params=params, field=field,
                            manifolds=manifolds, cofactor=cofactor, period=period,
                            fourier=fourier)


def load_system_file(path, overrides=None):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_system_text(text, source=str(path), overrides=overrides)


def format_params(params):
    return {k: (str(v) if isinstance(v, Fraction) else repr(v)) for k, v in params.items()}
