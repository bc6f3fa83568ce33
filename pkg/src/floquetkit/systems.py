"""Builtin systems with closed-form periodic orbits.

* ``circle``   planar oscillator with the unit-circle limit cycle
* ``example1`` 4-D system with parameters ``s``, ``k`` and orbit
  ``(cos t, sin t, cos t, sin t)``
* ``mathieu``  3-D system whose cofactor system is Mathieu's equation
  (alias ``example2``)
* ``steklov``  Euler-Poisson rigid body with the Steklov elliptic orbit

Polynomial data (fields, hypersurfaces, cofactors) is bound to exact
rationals; closed-form orbits are evaluated in floats.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from .errors import InvalidParameters, StructureViolation
from .expr import parse_polynomial, to_fraction
from .floquet import (DynamicalSystem, InvariantManifoldSet, PeriodicOrbit,
                      multipliers_cofactor)
from .numlin import eigenvalues
from .ode import DEFAULT_CONFIG, integrate_matrix, integrate_piecewise
from .specfun import elliptic_K, jacobi_derivatives, jacobi_sn_cn_dn

__all__ = [
    "BUILTINS",
    "DEFAULT_PARAMS",
    "builtin",
    "Example1Params",
    "MathieuParams",
    "SteklovParams",
    "SteklovDerived",
    "SteklovMonodromyAnalysis",
    "example1_expected_multipliers",
    "example1_closed_form_v",
    "mathieu_direct_monodromy",
    "mathieu_stability_chart",
    "ChartCell",
    "steklov_orbit_state",
    "steklov_orbit_velocity",
    "steklov_first_integrals",
    "steklov_h_functionals",
    "steklov_constant_solution",
    "steklov_conservation_suite",
    "steklov_monodromy_analysis",
]

TWO_PI = 2.0 * math.pi


def _build(name, variables, params, field, manifolds, cofactor):
    parse = lambda s: parse_polynomial(s, variables, params)  # noqa: E731
    sys = DynamicalSystem.from_polynomials([parse(s) for s in field], name=name)
    man = InvariantManifoldSet.from_polynomials(
        [parse(s) for s in manifolds],
        [[parse(s) for s in row] for row in cofactor])
    return sys, man


def _circle_orbit(extra_zeros=0, doubled=False):
    def gamma(t):
        c, s = math.cos(t), math.sin(t)
        base = [c, s, c, s] if doubled else [c, s]
        return np.array(base + [0.0] * extra_zeros)

    def gamma_dot(t):
        c, s = math.cos(t), math.sin(t)
        base = [-s, c, -s, c] if doubled else [-s, c]
        return np.array(base + [0.0] * extra_zeros)

    return PeriodicOrbit(TWO_PI, gamma, gamma_dot)


# -- circle --------------------------------------------------------------

def _circle(params):
    sys, man = _build(
        "circle", ("x", "y"), {},
        field=["-y - x*(x^2 + y^2 - 1)", "x - y*(x^2 + y^2 - 1)"],
        manifolds=["x^2 + y^2 - 1"],
        cofactor=[["-2*(x^2 + y^2)"]])
    return sys, _circle_orbit(), man


# -- Example 1 -----------------------------------------------------------

@dataclass(frozen=True)
class Example1Params:
    s: float = 1.0
    k_param: float = 3.0


def _example1(params):
    p = Example1Params(**params)
    bound = {"s": to_fraction(p.s), "k": to_fraction(p.k_param)}
    sys, man = _build(
        "example1", ("x", "y", "z", "w"), bound,
        field=[
            "-y - x*(x^2 + y^2 - 1)",
            "x - y*(x^2 + y^2 - 1)",
            "-w - s*z*(z^2 + w^2 - 1) - s*k*(x - z)",
            "z - s*w*(z^2 + w^2 - 1) - s*k*(y - w)",
        ],
        manifolds=["x^2 + y^2 - 1", "x - z", "y - w"],
        cofactor=[
            ["-2*(x^2 + y^2)", "0", "0"],
            ["s*z - x", "s*k - s*z*(x + z)", "-1 - s*z*(y + w)"],
            ["s*w - y", "1 - s*w*(x + z)", "s*k - s*w*(y + w)"],
        ])
    return sys, _circle_orbit(doubled=True), man


def _example1_branch(s, k):
    return "generic" if abs(2 - 2 * s + s * k) >= 1e-12 else "degenerate"


def example1_expected_multipliers(s, k_param):
    """Closed-form multipliers and the branch tag (``generic``/``degenerate``)."""
    s, k = float(s), float(k_param)
    if _example1_branch(s, k) == "generic":
        vals = (math.exp(-4 * math.pi), math.exp(2 * s * (k - 2) * math.pi),
                math.exp(2 * k * s * math.pi))
        return vals, "generic"
    vals = (math.exp(-4 * math.pi), math.exp(-4 * math.pi),
            math.exp(4 * math.pi * (s - 1)))
    return vals, "degenerate"


def example1_closed_form_v(t, s, k_param):
    """Closed-form fundamental matrix of the Example 1 cofactor system."""
    s, k, t = float(s), float(k_param), float(t)
    c, sn = math.cos(t), math.sin(t)
    e2 = math.exp(-2 * t)
    v = np.zeros((3, 3))
    v[0, 0] = e2
    if _example1_branch(s, k) == "generic":
        g = 2 - 2 * s + k * s
        lead = (s - 1) * e2 * math.expm1(g * t) / g
        a, b = math.exp((k - 2) * s * t), math.exp(k * s * t)
    else:
        lead = (s - 1) * e2 * t
        a, b = e2, math.exp(2 * (s - 1) * t)
    v[1] = [lead * c, a * c, -b * sn]
    v[2] = [lead * sn, a * sn, b * c]
    return v


# -- Example 2 (Mathieu) -------------------------------------------------

@dataclass(frozen=True)
class MathieuParams:
    a: float = 1.0
    q: float = 0.1


def _mathieu(params):
    p = MathieuParams(**params)
    bound = {"a": to_fraction(p.a), "q": to_fraction(p.q)}
    sys, man = _build(
        "mathieu", ("x", "y", "z"), bound,
        field=[
            "-y + z*x/2",
            "x + z*y/2",
            "(-2*q*(x^2 - y^2) - a)*(x^2 + y^2 - 1) + z^2",
        ],
        manifolds=["x^2 + y^2 - 1", "z"],
        cofactor=[
            ["0", "x^2 + y^2"],
            ["-2*q*(x^2 - y^2) - a", "z"],
        ])
    return sys, _circle_orbit(extra_zeros=1), man


def mathieu_direct_monodromy(a, q, cfg=None):
    """Monodromy of ``v'' + (a + 2 q cos 2t) v = 0`` over ``[0, 2 pi]``.

    Columns start from ``(v, v') = (1, 0)`` and ``(0, 1)``.
    """
    a, q = float(a), float(q)

    def A(t):
        return np.array([[0.0, 1.0], [-(a + 2 * q * math.cos(2 * t)), 0.0]])

    return integrate_matrix(A, np.eye(2), 0.0, TWO_PI, cfg or DEFAULT_CONFIG)


@dataclass(frozen=True)
class ChartCell:
    a: float
    q: float
    trace: float
    verdict: str


def _trace_verdict(trace, tol=1e-9):
    if abs(trace) > 2 + tol:
        return "unstable"
    if abs(abs(trace) - 2) <= tol:
        return "boundary"
    return "stable"


def _chart_cell(args):
    a, q, cfg = args
    sys, orbit, man = builtin("mathieu", {"a": a, "q": q})
    rep = multipliers_cofactor(sys, man, orbit, cfg)
    tr = float(np.trace(rep.matrix))
    return ChartCell(a, q, tr, _trace_verdict(tr))


def _axis(lo, hi, n):
    return [float(x) for x in np.linspace(lo, hi, n)]


def mathieu_stability_chart(a_min, a_max, q_min, q_max, grid_n, cfg=None,
                            workers=1, crosscheck=5):
    """Stability of the Mathieu orbit over an ``grid_n x grid_n`` grid.

    Rows are ordered with ``a`` as the outer index.  Traces come from the
    cofactor route on the 3-D system; ``crosscheck`` evenly spread cells are
    re-done with :func:`mathieu_direct_monodromy` and the largest trace
    discrepancy is returned alongside the cells.
    """
    if int(grid_n) != grid_n or grid_n < 2:
        raise ValueError("grid_n must be an integer >= 2")
    if not (a_min < a_max and q_min < q_max):
        raise ValueError("ranges must satisfy min < max")
    cfg = cfg or DEFAULT_CONFIG
    jobs = [(a, q, cfg) for a in _axis(a_min, a_max, grid_n)
            for q in _axis(q_min, q_max, grid_n)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_chart_cell, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        cells = [_chart_cell(j) for j in jobs]
    worst = 0.0
    if crosscheck:
        picks = np.unique(np.linspace(0, len(cells) - 1, int(crosscheck)).round().astype(int))
        for i in picks:
            c = cells[i]
            direct = float(np.trace(mathieu_direct_monodromy(c.a, c.q, cfg)))
            worst = max(worst, abs(direct - c.trace))
    return cells, worst


# -- Steklov orbit -------------------------------------------------------

@dataclass(frozen=True)
class SteklovParams:
    a: float = 2.5
    b: float = 3.0
    c: float = 1.0
    W: float = 1.0
    l: float = 1.0

    def check(self):
        """Raise InvalidParameters naming every violated constraint."""
        a, b, c, W, l = self.a, self.b, self.c, self.W, self.l
        rules = [
            (b > c, "b > c"),
            (a + b > c, "a + b > c"),
            (b + c > a, "b + c > a"),
            (c + a > b, "c + a > b"),
            (b > a, "b > a"),
            (a > 2 * c, "a > 2c"),
            (W > 0, "W > 0"),
            (l > 0, "l > 0"),
        ]
        failed = [text for ok, text in rules if not ok]
        if failed:
            raise InvalidParameters(f"the Steklov solution requires {' and '.join(failed)} "
                                    f"(got a={a}, b={b}, c={c}, W={W}, l={l})")
        return self

    def derived(self):
        return SteklovDerived.from_params(self.check())

    def fractions(self):
        return {k: to_fraction(getattr(self, k)) for k in ("a", "b", "c", "W", "l")}


@dataclass(frozen=True)
class SteklovDerived:
    mu: float
    beta0: float
    beta1: float
    modulus: float
    z_scale: float
    period: float
    rho1: float
    rho2: float
    delta: float
    amplitudes: tuple  # (p, q, r, gamma1, gamma2, gamma3) coefficients

    @classmethod
    def from_params(cls, p):
        a, b, c, Wl = p.a, p.b, p.c, p.W * p.l
        mu = math.sqrt(Wl / a)
        beta0 = a * (a - 2 * c) / ((b - a) * (a - c))
        beta1 = a * (2 * b - a) / ((b - a) * (a - c))
        k = math.sqrt((b - a) / (b - c))
        z_scale = math.sqrt(a / (a - c)) * mu / k
        period = 4 * k * elliptic_K(k) * math.sqrt((a - c) / Wl)
        rho1 = 2 * (2 * b - a) * (b - c) * Wl / (math.sqrt(a) * (b - a) * (a - 2 * c) ** 1.5)
        # the factor c is required by conservation of h1 and h2; without it
        # the relations hold only when c = 1
        rho2 = (2 * math.sqrt(a) * (b - c) * c * Wl
                / ((b - a) * math.sqrt(a - 2 * c) * (a * a - 2 * a * b + 2 * b * c)))
        amps = (
            -mu * math.sqrt(beta0 * (2 * b - a) / (a - c)),
            mu * math.sqrt(beta0 * a / (b - c)),
            mu * math.sqrt(beta1 * a / (a - c)),
            a / (a - c),
            # k * sqrt(beta1): the form sqrt(beta1 * k) does not solve the system
            k * math.sqrt(beta1),
            -math.sqrt(beta0 * (b - a) / (a - c)),
        )
        return cls(mu, beta0, beta1, k, z_scale, period, rho1, rho2,
                   (a - b) * (a - c) / Wl, amps)


# Euler-Poisson field; variables p, q, r (angular velocity) and g1, g2, g3
# (vertical unit vector in the body frame).
_STEKLOV_FIELD = [
    "(b - c)/a*q*r",
    "(c - a)/b*p*r + W*l/b*g3",
    "(a - b)/c*p*q - W*l/c*g2",
    "r*g2 - q*g3",
    "p*g3 - r*g1",
    "q*g1 - p*g2",
]

_STEKLOV_MANIFOLDS = [
    # energy first integral, shifted so that it vanishes on the orbit
    "(a*p^2 + b*q^2 + c*r^2)/2 + W*l*g1 + (a^2 - 2*a*b - 2*a*c + 2*b*c)*W*l/(2*(b - a)*(a - c))",
    # Steklov's relations g2 = beta2 p q and g3 = beta3 p r
    "g2 - (a - b)*(a - c)/(W*l*(a - 2*c))*p*q",
    "g3 - (a - b)*(a - c)/(W*l*(a - 2*b))*p*r",
    # two extra quadrics through the orbit
    "(a - b)/(a - 2*c)*p^2 + (b - c)/a*r^2 - W*l*(a - 2*b)/((a - b)*(a - c))",
    "-(a - c)/(a - 2*b)*p^2 + (b - c)/a*q^2 + W*l*(a - 2*c)/((a - b)*(a - c))",
]

_STEKLOV_COFACTOR = [
    ["0", "0", "0", "0", "0"],
    [
        "-r/(W*l)",
        "0",
        "-(a^2 - 2*a*b - a*c + 3*b*c)*p/(b*(a - 2*c))",
        "a*c*r/(2*(b - c)*W*l)",
        "-(a^2*b - 2*a*b^2 - 2*a^2*c + 2*a*b*c + 2*b^2*c + 2*a*c^2 - 2*b*c^2)*r"
        "/(2*(a - 2*c)*(b - c)*W*l)",
    ],
    [
        "q/(W*l)",
        "(a^2 - a*b - 2*a*c + 3*b*c)*p/((a - 2*b)*c)",
        "0",
        "-(2*a^2*b - 2*a*b^2 - a^2*c - 2*a*b*c + 2*b^2*c + 2*a*c^2 - 2*b*c^2)*q"
        "/(2*(a - 2*b)*(b - c)*W*l)",
        "-a*b*q/(2*(b - c)*W*l)",
    ],
    ["0", "-2*(b - c)*W*l*r/(a*c)", "0", "0", "0"],
    ["0", "0", "2*(b - c)*W*l*q/(a*b)", "0", "0"],
]

STEKLOV_VARIABLES = ("p", "q", "r", "g1", "g2", "g3")


def steklov_orbit_state(t, p):
    """State ``(p, q, r, gamma1, gamma2, gamma3)`` on the Steklov orbit."""
    d = p if isinstance(p, SteklovDerived) else p.derived()
    sn, cn, dn = jacobi_sn_cn_dn(d.z_scale * float(t), d.modulus)
    A = d.amplitudes
    return np.array([A[0] * cn, A[1] * sn, A[2] * dn,
                     1.0 - A[3] * cn * cn, A[4] * sn * cn, A[5] * cn * dn])


def steklov_orbit_velocity(t, p):
    d = p if isinstance(p, SteklovDerived) else p.derived()
    z = d.z_scale * float(t)
    sn, cn, dn = jacobi_sn_cn_dn(z, d.modulus)
    dsn, dcn, ddn = (d.z_scale * x for x in jacobi_derivatives(z, d.modulus))
    A = d.amplitudes
    return np.array([A[0] * dcn, A[1] * dsn, A[2] * ddn,
                     -2.0 * A[3] * cn * dcn,
                     A[4] * (dsn * cn + sn * dcn),
                     A[5] * (dcn * dn + cn * ddn)])


def _steklov(params):
    p = SteklovParams(**params).check()
    d = p.derived()
    sys = DynamicalSystem.from_polynomials(
        [parse_polynomial(s, STEKLOV_VARIABLES, p.fractions()) for s in _STEKLOV_FIELD],
        name="steklov")
    parse = lambda s: parse_polynomial(s, STEKLOV_VARIABLES, p.fractions())  # noqa: E731
    man = InvariantManifoldSet.from_polynomials(
        [parse(s) for s in _STEKLOV_MANIFOLDS],
        [[parse(s) for s in row] for row in _STEKLOV_COFACTOR])
    orbit = PeriodicOrbit(d.period, lambda t: steklov_orbit_state(t, d),
                          lambda t: steklov_orbit_velocity(t, d))
    return sys, orbit, man


def steklov_first_integrals(state, p):
    """``(H1, H2, H3)``: vertical angular momentum, ``|gamma|^2 - 1`` and the
    energy including the constant that makes it vanish on the orbit."""
    P, Q, R, g1, g2, g3 = (float(x) for x in state)
    a, b, c, Wl = p.a, p.b, p.c, p.W * p.l
    H1 = a * P * g1 + b * Q * g2 + c * R * g3
    H2 = g1 * g1 + g2 * g2 + g3 * g3 - 1.0
    H3 = (0.5 * (a * P * P + b * Q * Q + c * R * R) + Wl * g1
          + (a * a - 2 * a * b - 2 * a * c + 2 * b * c) * Wl / (2 * (b - a) * (a - c)))
    return H1, H2, H3


def steklov_h_functionals(t, v, p, derived=None):
    """Conserved linear functionals ``(h1, h2)`` of the 5-D cofactor system,
    inherited from H1 and H2."""
    d = derived or p.derived()
    P, Q, R, g1, _, _ = steklov_orbit_state(t, d)
    a, b, c, Wl = p.a, p.b, p.c, p.W * p.l
    delta = d.delta
    v = np.asarray(v, dtype=float)
    h1 = (a * P / Wl * v[0] + b * Q * v[1] + c * R * v[2]
          + a * c * (a * (a - 2 * c) + 2 * b * c) * P / (2 * (a - 2 * b) * (b - c) * Wl) * v[3]
          + a * b * (a * (a - 2 * b) + 2 * b * c) * P / (2 * (a - 2 * c) * (b - c) * Wl) * v[4])
    c4 = (-a * c / ((b - c) * Wl)
          + a * delta * (a**3 - a**2 * b - 2 * a**2 * c + a * b * c + 2 * a * c**2 - 2 * b * c**2)
          * P * P / ((a - 2 * b) ** 2 * (a - 2 * c) * (b - c) * Wl))
    c5 = (-a * b / ((b - c) * Wl)
          + a * delta * (a**3 - 2 * a**2 * b + 2 * a * b**2 - a**2 * c + a * b * c - 2 * b**2 * c)
          * P * P / ((a - 2 * b) * (a - 2 * c) ** 2 * (b - c) * Wl))
    h2 = (2 * g1 / Wl * v[0] + 2 * delta * P * Q / (a - 2 * c) * v[1]
          + 2 * delta * P * R / (a - 2 * b) * v[2] + c4 * v[3] + c5 * v[4])
    return float(h1), float(h2)


def steklov_constant_solution(p):
    a, b, c = p.a, p.b, p.c
    D = a * a - 2 * a * b - 2 * a * c + 2 * b * c
    return np.array([1.0, 0.0, 0.0, 2 * (a - 2 * b) / D, -2 * (a - 2 * c) / D])


def _steklov_k_on_orbit(man, d):
    return lambda t: man.cofactor_values(steklov_orbit_state(t, d))


def steklov_conservation_suite(p, v0, cfg=None, samples=64):
    """Drifts of ``v1``, ``h1`` and ``h2`` along a solution of the 5-D
    cofactor system over one period, sampled at ``samples`` points."""
    p = p.check()
    d = p.derived()
    _, _, man = builtin("steklov", p)
    k_of_t = _steklov_k_on_orbit(man, d)
    times = np.linspace(0.0, d.period, samples + 1)
    states = integrate_piecewise(lambda t, y: k_of_t(t) @ y, v0, times, cfg or DEFAULT_CONFIG)
    h = np.array([steklov_h_functionals(t, y, p, d) for t, y in zip(times, states)])
    return (float(np.max(np.abs(states[:, 0] - states[0, 0]))),
            float(np.max(np.abs(h[:, 0] - h[0, 0]))),
            float(np.max(np.abs(h[:, 1] - h[0, 1]))))


@dataclass
class SteklovMonodromyAnalysis:
    vT: np.ndarray
    B: float
    C: float
    structure_residual: float
    unit_eigenvalue_count: int
    eigenvalues: list
    verdict: str
    derived: SteklovDerived

    @property
    def nontrivial_pair(self):
        """The two eigenvalues farthest from 1."""
        return sorted(self.eigenvalues, key=lambda z: abs(z - 1))[-2:]


def _structure_residual(V, rho1, rho2):
    r = [abs(V[0, 0] - 1.0)] + [abs(V[0, j]) for j in range(1, 5)]
    rel = [
        (V[3, 0], rho1 * V[2, 0]), (V[4, 0], rho2 * V[2, 0]),
        (V[3, 1], rho1 * V[2, 1]), (V[4, 1], rho2 * V[2, 1]),
        (V[3, 2], rho1 * (V[2, 2] - 1)), (V[4, 2], rho2 * (V[2, 2] - 1)),
        (V[2, 3], (V[3, 3] - 1) / rho1), (V[2, 4], (V[4, 4] - 1) / rho2),
        (V[3, 4], rho1 * (V[4, 4] - 1) / rho2), (V[4, 3], rho2 * (V[3, 3] - 1) / rho1),
    ]
    r += [abs(x - y) for x, y in rel]
    return float(max(r))


def steklov_monodromy_analysis(p, cfg=None, unit_tol=1e-4, check_tol=1e-4):
    """Fundamental matrix of the 5-D cofactor system at ``T`` and the
    quantities of its characteristic polynomial ``-(x-1)^3 (x^2 + B x + C)``.

    Raises StructureViolation if ``|C - 1|`` or the structure residual exceeds
    ``check_tol``.
    """
    p = p.check()
    d = p.derived()
    _, _, man = builtin("steklov", p)
    V = integrate_matrix(_steklov_k_on_orbit(man, d), np.eye(5), 0.0, d.period,
                         cfg or DEFAULT_CONFIG)
    B = 2.0 - V[1, 1] - V[2, 2] - V[3, 3] - V[4, 4]
    C = (V[1, 1] * (V[2, 2] + V[3, 3] + V[4, 4] - 2.0)
         - V[2, 1] * (V[1, 2] + d.rho1 * V[1, 3] + d.rho2 * V[1, 4]))
    resid = _structure_residual(V, d.rho1, d.rho2)
    ev = eigenvalues(V)
    units = sum(1 for z in ev if abs(z - 1) <= unit_tol)
    verdict = "unstable" if B * B > 4 + 1e-6 else "inconclusive"
    out = SteklovMonodromyAnalysis(V, float(B), float(C), resid, units, ev, verdict, d)
    if abs(C - 1) > check_tol:
        raise StructureViolation(f"C = {C:.12g} differs from 1 by more than {check_tol}")
    if resid > check_tol:
        raise StructureViolation(f"structure residual {resid:.3e} exceeds {check_tol}")
    return out


# -- registry ------------------------------------------------------------

BUILTINS = {
    "circle": _circle,
    "example1": _example1,
    "mathieu": _mathieu,
    "example2": _mathieu,
    "steklov": _steklov,
}

DEFAULT_PARAMS = {
    "circle": {},
    "example1": {"s": 1.0, "k_param": 3.0},
    "mathieu": {"a": 1.0, "q": 0.1},
    "example2": {"a": 1.0, "q": 0.1},
    "steklov": {"a": 2.5, "b": 3.0, "c": 1.0, "W": 1.0, "l": 1.0},
}

_ALIASES = {"example1": {"k": "k_param"}}


def builtin(name, params=None):
    """``(system, orbit, manifolds)`` for a builtin example.

    ``params`` may be a dict (missing keys fall back to the defaults) or one
    of the parameter dataclasses.
    """
    if name not in BUILTINS:
        raise KeyError(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}")
    if params is None:
        params = {}
    elif not isinstance(params, dict):
        params = dict(params.__dict__)
    merged = dict(DEFAULT_PARAMS[name])
    alias = _ALIASES.get(name, {})
    for key, value in params.items():
        key = alias.get(key, key)
        if key not in merged:
            raise InvalidParameters(
                f"{name} has no parameter {key!r}; expected {sorted(merged)}")
        merged[key] = to_fraction(value) if isinstance(value, str) else value
    return BUILTINS[name](merged)
