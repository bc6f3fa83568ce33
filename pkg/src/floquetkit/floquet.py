"""Characteristic multipliers of a known periodic orbit.

Two independent routes are provided:

* the variational monodromy ``u(T)`` of ``u' = DX(gamma(t)) u``, whose
  spectrum is ``{1}`` plus the ``n - 1`` multipliers;
* the cofactor route: given ``n - 1`` hypersurfaces ``f`` whose transversal
  intersection contains the orbit and a matrix ``k`` with ``Df X = k f``,
  the multipliers are the eigenvalues of ``v(T)`` where ``v' = k(gamma(t)) v``,
  ``v(0) = I``.

The cofactor route only runs after its preconditions have been checked
numerically (and symbolically when everything is polynomial).
"""

from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations_with_replacement
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import integrate as _quad

from .errors import (DimensionMismatch, GradientVanishes, HypothesisViolated,
                     NoSolution)
from .expr import Polynomial, compile_polynomials
from .numlin import determinant, eigenvalues, solve_exact
from .ode import DEFAULT_CONFIG, integrate_matrix

__all__ = [
    "StabilityVerdict",
    "DynamicalSystem",
    "PeriodicOrbit",
    "InvariantManifoldSet",
    "MultiplierReport",
    "InvarianceCheck",
    "MethodComparison",
    "verify_orbit",
    "verify_invariance",
    "invariance_defect",
    "transversality_profile",
    "monodromy_variational",
    "variational_report",
    "multipliers_cofactor",
    "cofactor_monodromy",
    "planar_multiplier",
    "discover_cofactor",
    "compare_methods",
    "classify_stability",
    "liouville_defect",
    "HYPOTHESIS_TOL",
]

HYPOTHESIS_TOL = 1e-8
UNIT_CLUSTER_TOL = 1e-4


class StabilityVerdict(str, Enum):
    ASYMPTOTICALLY_STABLE = "asymptotically-stable"
    UNSTABLE = "unstable"
    NON_HYPERBOLIC = "non-hyperbolic"

    def __str__(self):
        return self.value


# -- domain types ---------------------------------------------------------

@dataclass(frozen=True)
class DynamicalSystem:
    """Autonomous field ``x' = X(x)`` with its Jacobian."""
    name: str
    variables: tuple
    field: Callable
    jacobian: Callable
    polynomials: Optional[tuple] = None

    @property
    def n(self):
        return len(self.variables)

    @classmethod
    def from_polynomials(cls, polys, name=""):
        polys = tuple(polys)
        if not polys:
            raise DimensionMismatch("empty vector field")
        variables = polys[0].variables
        if len(polys) != len(variables):
            raise DimensionMismatch(
                f"{len(polys)} field components for {len(variables)} variables")
        jac = [p.differentiate(v) for p in polys for v in variables]
        n = len(variables)
        return cls(name=name, variables=variables,
                   field=compile_polynomials(polys),
                   jacobian=compile_polynomials(jac, shape=(n, n)),
                   polynomials=polys)

    def jacobian_error(self, points, h=1e-6):
        """Max deviation of the Jacobian from central differences."""
        worst = 0.0
        for x in np.atleast_2d(points):
            J = self.jacobian(x)
            fd = np.empty_like(J)
            for j in range(self.n):
                e = np.zeros(self.n)
                e[j] = h
                fd[:, j] = (self.field(x + e) - self.field(x - e)) / (2 * h)
            worst = max(worst, float(np.max(np.abs(J - fd))))
        return worst


@dataclass(frozen=True)
class PeriodicOrbit:
    period: float
    gamma: Callable
    gamma_dot: Callable
    representation: str = "builtin-closed-form"

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError("period must be positive")

    @classmethod
    def fourier(cls, period, coefficients):
        """Orbit from per-variable Fourier rows ``[a0, a1, b1, a2, b2, ...]``
        meaning ``a0 + sum a_j cos(j w t) + b_j sin(j w t)``, ``w = 2 pi / T``."""
        period = float(period)
        rows = []
        for row in coefficients:
            row = [float(c) for c in row]
            if len(row) % 2 == 0:
                raise ValueError("Fourier row needs a0 followed by (a_j, b_j) pairs")
            rows.append(row)
        n = len(rows)
        harmonics = max((len(r) - 1) // 2 for r in rows)
        A = np.zeros((n, harmonics))
        B = np.zeros((n, harmonics))
        a0 = np.array([r[0] for r in rows])
        for i, r in enumerate(rows):
            A[i, :(len(r) - 1) // 2] = r[1::2]
            B[i, :(len(r) - 1) // 2] = r[2::2]
        w = 2 * np.pi / period
        jw = w * np.arange(1, harmonics + 1)

        def gamma(t):
            return a0 + A @ np.cos(jw * t) + B @ np.sin(jw * t)

        def gamma_dot(t):
            return (B * jw) @ np.cos(jw * t) - (A * jw) @ np.sin(jw * t)

        return cls(period, gamma, gamma_dot, "fourier")

    def sample_times(self, samples):
        return np.arange(samples) * (self.period / samples)


@dataclass(frozen=True)
class InvariantManifoldSet:
    """Hypersurfaces ``f`` (``n - 1`` of them) and cofactor matrix ``k``."""
    values: Callable
    gradients: Callable
    cofactor_values: Callable
    m: int
    f: Optional[tuple] = None
    cofactor: Optional[tuple] = None

    @classmethod
    def from_polynomials(cls, f, cofactor):
        f = tuple(f)
        cofactor = tuple(tuple(row) for row in cofactor)
        m = len(f)
        if len(cofactor) != m or any(len(row) != m for row in cofactor):
            raise DimensionMismatch(f"cofactor must be {m}x{m}")
        variables = f[0].variables
        n = len(variables)
        grads = [p.differentiate(v) for p in f for v in variables]
        return cls(values=compile_polynomials(f),
                   gradients=compile_polynomials(grads, shape=(m, n)),
                   cofactor_values=compile_polynomials(
                       [k for row in cofactor for k in row], shape=(m, m)),
                   m=m, f=f, cofactor=cofactor)

    @property
    def is_polynomial(self):
        return self.f is not None and self.cofactor is not None


class InvarianceCheck(NamedTuple):
    symbolic_ok: Optional[bool]
    numeric_residual: float


@dataclass
class MultiplierReport:
    multipliers: list
    method: str
    verdict: StabilityVerdict
    diagnostics: dict = field(default_factory=dict)
    matrix: Optional[np.ndarray] = None
    note: str = ""

    @property
    def moduli(self):
        return [abs(z) for z in self.multipliers]


@dataclass
class MethodComparison:
    cofactor: MultiplierReport
    variational: MultiplierReport
    trivial: complex
    pairs: list
    max_distance: float
    max_relative_distance: float


# -- hypothesis checks ----------------------------------------------------

def _check_samples(samples):
    if samples < 16:
        raise ValueError("samples must be >= 16")


def _check_dims(sys, man):
    if man.m != sys.n - 1:
        raise DimensionMismatch(f"need {sys.n - 1} hypersurfaces, got {man.m}")


def verify_orbit(sys, orbit, samples=64):
    """Max of ``||gamma'(t) - X(gamma(t))||_inf`` over equispaced samples."""
    _check_samples(samples)
    worst = 0.0
    for t in orbit.sample_times(samples):
        r = np.asarray(orbit.gamma_dot(t)) - sys.field(np.asarray(orbit.gamma(t)))
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def invariance_defect(sys, man):
    """Polynomials ``(Df X - k f)_i``; all zero iff the identity holds exactly."""
    if sys.polynomials is None or not man.is_polynomial:
        raise TypeError("symbolic invariance needs a polynomial system and manifold set")
    _check_dims(sys, man)
    X = sys.polynomials
    out = []
    for i, fi in enumerate(man.f):
        lhs = Polynomial.zero(fi.variables)
        for v, Xj in zip(fi.variables, X):
            lhs = lhs + fi.differentiate(v) * Xj
        rhs = Polynomial.zero(fi.variables)
        for kij, fj in zip(man.cofactor[i], man.f):
            rhs = rhs + kij * fj
        out.append(lhs - rhs)
    return out


def _tube_points(orbit, n, samples, radius, seed):
    rng = np.random.default_rng(seed)
    ts = rng.uniform(0.0, orbit.period, samples)
    dirs = rng.standard_normal((samples, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = rng.uniform(0.0, radius, samples)
    return [np.asarray(orbit.gamma(t)) + r * d for t, r, d in zip(ts, radii, dirs)]


def verify_invariance(sys, man, orbit, samples=64, radius=0.1, seed=0):
    """Exact check of ``Df X = k f`` (polynomial data) plus the numeric
    residual on random points within ``radius`` of the orbit."""
    _check_dims(sys, man)
    symbolic = None
    if sys.polynomials is not None and man.is_polynomial:
        symbolic = all(p.is_zero() for p in invariance_defect(sys, man))
    worst = 0.0
    for x in _tube_points(orbit, sys.n, samples, radius, seed):
        r = man.gradients(x) @ sys.field(x) - man.cofactor_values(x) @ man.values(x)
        worst = max(worst, float(np.max(np.abs(r))))
    return InvarianceCheck(symbolic, worst)


def transversality_profile(sys, man, orbit, samples=64):
    """Determinants of ``[grad f_1; ...; grad f_{n-1}; X]`` along the orbit.

    Returns ``(min |det|, dets)``.
    """
    _check_samples(samples)
    _check_dims(sys, man)
    dets = []
    for t in orbit.sample_times(samples):
        x = np.asarray(orbit.gamma(t))
        M = np.vstack([man.gradients(x), sys.field(x)])
        dets.append(determinant(M))
    dets = np.array(dets)
    return float(np.min(np.abs(dets))), dets


# -- classification ------------------------------------------------------

def classify_stability(multipliers, tol=1e-8):
    mods = [abs(complex(z)) for z in multipliers]
    if not mods:
        raise ValueError("empty multiplier list")
    if any(m > 1 + tol for m in mods):
        return StabilityVerdict.UNSTABLE
    if all(m < 1 - tol for m in mods):
        return StabilityVerdict.ASYMPTOTICALLY_STABLE
    return StabilityVerdict.NON_HYPERBOLIC


def _verdict_note(verdict):
    if verdict is StabilityVerdict.NON_HYPERBOLIC:
        return ("all multipliers have modulus <= 1 with at least one on the unit "
                "circle; Liapunov stability is sometimes claimed for this case "
                "but is not asserted here")
    return ""


# -- monodromies ---------------------------------------------------------

def liouville_defect(a, V, t0, t1, det0=1.0):
    """Relative mismatch between ``det V`` and ``det0 * exp(int tr a)``.

    The trace integral is computed by adaptive quadrature, independently of
    the integrator that produced ``V``.
    """
    integral, _ = _quad.quad(lambda t: float(np.trace(a(t))), t0, t1,
                             epsabs=1e-13, epsrel=1e-13, limit=500)
    expected = det0 * np.exp(integral)
    return abs(determinant(V) - expected) / abs(expected)


def monodromy_variational(sys, orbit, cfg=None, samples=64):
    residual = verify_orbit(sys, orbit, samples)
    if residual > HYPOTHESIS_TOL:
        raise HypothesisViolated("orbit", residual, HYPOTHESIS_TOL,
                                 "gamma is not a solution of the system")
    return integrate_matrix(lambda t: sys.jacobian(np.asarray(orbit.gamma(t))),
                            np.eye(sys.n), 0.0, orbit.period, cfg or DEFAULT_CONFIG)


def _closest_to_one(values):
    idx = min(range(len(values)), key=lambda i: abs(values[i] - 1))
    return idx, values[idx]


def variational_report(sys, orbit, cfg=None, samples=64, tol=1e-8):
    """Full variational spectrum; the verdict ignores the trivial eigenvalue."""
    cfg = cfg or DEFAULT_CONFIG
    U = monodromy_variational(sys, orbit, cfg, samples)
    ev = eigenvalues(U)
    idx, trivial = _closest_to_one(ev)
    rest = ev[:idx] + ev[idx + 1:]
    verdict = classify_stability(rest, tol) if rest else StabilityVerdict.NON_HYPERBOLIC
    a = lambda t: sys.jacobian(np.asarray(orbit.gamma(t)))  # noqa: E731
    diag = {
        "orbit_residual": verify_orbit(sys, orbit, samples),
        "trivial_multiplier_distance": abs(trivial - 1),
        "liouville_defect": liouville_defect(a, U, 0.0, orbit.period),
        "rtol": cfg.rtol,
        "atol": cfg.atol,
        "samples": samples,
    }
    return MultiplierReport(ev, "variational", verdict, diag, U, _verdict_note(verdict))


def check_hypotheses(sys, man, orbit, samples=64):
    """Run the three gates; raise HypothesisViolated on the first failure."""
    orbit_res = verify_orbit(sys, orbit, samples)
    if orbit_res > HYPOTHESIS_TOL:
        raise HypothesisViolated("orbit", orbit_res, HYPOTHESIS_TOL)
    inv = verify_invariance(sys, man, orbit, samples)
    if inv.symbolic_ok is False:
        raise HypothesisViolated("invariance", inv.numeric_residual, HYPOTHESIS_TOL,
                                 "Df X - k f is not the zero polynomial")
    if inv.numeric_residual > HYPOTHESIS_TOL:
        raise HypothesisViolated("invariance", inv.numeric_residual, HYPOTHESIS_TOL)
    min_det, _ = transversality_profile(sys, man, orbit, samples)
    if min_det < HYPOTHESIS_TOL:
        raise HypothesisViolated("transversality", min_det, HYPOTHESIS_TOL,
                                 "hypersurfaces do not cross transversally on the orbit")
    return {
        "orbit_residual": orbit_res,
        "invariance_symbolic": inv.symbolic_ok,
        "invariance_residual": inv.numeric_residual,
        "min_transversality": min_det,
    }


def cofactor_monodromy(man, orbit, cfg=None):
    """``v(T)`` for ``v' = k(gamma(t)) v``, ``v(0) = I`` (no checks)."""
    return integrate_matrix(lambda t: man.cofactor_values(np.asarray(orbit.gamma(t))),
                            np.eye(man.m), 0.0, orbit.period, cfg or DEFAULT_CONFIG)


def multipliers_cofactor(sys, man, orbit, cfg=None, samples=64, tol=1e-8):
    """Multipliers as the eigenvalues of the cofactor fundamental matrix."""
    cfg = cfg or DEFAULT_CONFIG
    _check_dims(sys, man)
    diag = check_hypotheses(sys, man, orbit, samples)
    V = cofactor_monodromy(man, orbit, cfg)
    ev = eigenvalues(V)
    verdict = classify_stability(ev, tol)
    a = lambda t: man.cofactor_values(np.asarray(orbit.gamma(t)))  # noqa: E731
    diag.update(liouville_defect=liouville_defect(a, V, 0.0, orbit.period),
                rtol=cfg.rtol, atol=cfg.atol, samples=samples)
    return MultiplierReport(ev, "cofactor", verdict, diag, V, _verdict_note(verdict))


def planar_multiplier(sys, orbit, mode="divergence", man=None, cfg=None, samples=64):
    """The single multiplier of a planar orbit.

    ``divergence`` integrates ``div X`` along the orbit; ``cofactor``
    integrates the cofactor of an invariant curve through it.
    """
    if sys.n != 2:
        raise DimensionMismatch("planar_multiplier requires a 2-dimensional system")
    tol = min(1e-10, (cfg or DEFAULT_CONFIG).rtol)
    if mode == "divergence":
        integrand = lambda t: float(np.trace(sys.jacobian(np.asarray(orbit.gamma(t)))))  # noqa: E731
    elif mode == "cofactor":
        if man is None or man.m != 1:
            raise DimensionMismatch("cofactor mode needs one curve f and a scalar cofactor")
        grad_min = min(float(np.linalg.norm(man.gradients(np.asarray(orbit.gamma(t)))))
                       for t in orbit.sample_times(max(samples, 16)))
        if grad_min < HYPOTHESIS_TOL:
            raise GradientVanishes(grad_min)
        inv = verify_invariance(sys, man, orbit, samples)
        if inv.symbolic_ok is False or inv.numeric_residual > HYPOTHESIS_TOL:
            raise HypothesisViolated("invariance", inv.numeric_residual, HYPOTHESIS_TOL)
        integrand = lambda t: float(man.cofactor_values(np.asarray(orbit.gamma(t)))[0, 0])  # noqa: E731
    else:
        raise ValueError(f"unknown mode {mode!r}")
    val, _ = _quad.quad(integrand, 0.0, orbit.period, epsabs=tol * 1e-2,
                        epsrel=tol * 1e-2, limit=500)
    return float(np.exp(val))


# -- cofactor discovery --------------------------------------------------

def _monomials(n, degree):
    out = []
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(n), d):
            e = [0] * n
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def discover_cofactor(sys, f, degree_bound):
    """Find polynomial ``k`` (entries of degree <= ``degree_bound``) with
    ``Df X = k f`` by matching coefficients exactly.

    Each row is an independent linear system solved by
    :func:`~floquetkit.numlin.solve_exact`; free coefficients are zero.
    """
    if sys.polynomials is None:
        raise TypeError("discover_cofactor needs a polynomial system")
    f = tuple(f)
    variables = sys.variables
    if any(p.variables != variables for p in f):
        raise DimensionMismatch("hypersurfaces and system use different variables")
    if degree_bound < 0:
        raise ValueError("degree_bound must be >= 0")
    monos = _monomials(len(variables), degree_bound)
    m = len(f)
    rows = []
    for i, fi in enumerate(f):
        lhs = Polynomial.zero(variables)
        for v, Xj in zip(variables, sys.polynomials):
            lhs = lhs + fi.differentiate(v) * Xj
        # column (l, mono) contributes mono * f_l
        columns = []
        for fl in f:
            for mono in monos:
                shifted = {tuple(a + b for a, b in zip(e, mono)): c
                           for e, c in fl.terms.items()}
                columns.append(shifted)
        keys = sorted(set(lhs.terms).union(*[c.keys() for c in columns]))
        A = [[col.get(key, 0) for col in columns] for key in keys]
        b = [lhs.terms.get(key, 0) for key in keys]
        try:
            sol = solve_exact(A, b)
        except NoSolution:
            raise NoSolution(
                f"no cofactor row {i + 1} with entries of degree <= {degree_bound}: "
                f"f_{i + 1} may not be invariant on the given hypersurfaces, or the "
                f"degree bound is too small (retry with a larger degree_bound)") from None
        row = []
        for l in range(m):
            chunk = sol[l * len(monos):(l + 1) * len(monos)]
            row.append(Polynomial(variables, dict(zip(monos, chunk))))
        rows.append(tuple(row))
    return tuple(rows)


# -- cross-method comparison ---------------------------------------------

def compare_methods(sys, man, orbit, cfg=None, samples=64):
    """Pair cofactor multipliers with the nontrivial variational spectrum.

    The variational eigenvalue closest to 1 is dropped, then the remaining
    ones are greedily matched to the cofactor multipliers by distance.
    """
    cof = multipliers_cofactor(sys, man, orbit, cfg, samples)
    var = variational_report(sys, orbit, cfg, samples)
    idx, trivial = _closest_to_one(var.multipliers)
    remaining = list(var.multipliers[:idx] + var.multipliers[idx + 1:])
    candidates = [(abs(lam - mu), i, j)
                  for i, lam in enumerate(cof.multipliers)
                  for j, mu in enumerate(remaining)]
    candidates.sort()
    used_i, used_j, pairs = set(), set(), []
    for dist, i, j in candidates:
        if i in used_i or j in used_j:
            continue
        used_i.add(i)
        used_j.add(j)
        lam, mu = cof.multipliers[i], remaining[j]
        scale = max(abs(lam), abs(mu))
        rel = dist / scale if scale > 0 else 0.0
        pairs.append((lam, mu, dist, rel))
    pairs.sort(key=lambda p: (p[0].real, p[0].imag), reverse=True)
    return MethodComparison(
        cofactor=cof, variational=var, trivial=trivial, pairs=pairs,
        max_distance=max((p[2] for p in pairs), default=0.0),
        max_relative_distance=max((p[3] for p in pairs), default=0.0))
