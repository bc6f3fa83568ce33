"""Adaptive Dormand-Prince 5(4) integration for vector and matrix IVPs."""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, StepLimitExceeded, StepUnderflow

__all__ = [
    "IntegratorConfig",
    "FieldFunction",
    "integrate",
    "integrate_piecewise",
    "integrate_matrix",
]


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    initial_step: float = None  # None -> automatic
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")
        if self.initial_step is not None and not self.initial_step > 0:
            raise ValueError("initial_step must be positive")

    def with_rtol(self, rtol):
        """Same config with ``rtol`` replaced and ``atol = rtol / 100``."""
        return IntegratorConfig(rtol=rtol, atol=rtol * 1e-2,
                                initial_step=self.initial_step,
                                max_steps=self.max_steps)


DEFAULT_CONFIG = IntegratorConfig()


@dataclass(frozen=True)
class FieldFunction:
    """Right-hand side ``(t, y) -> dy/dt`` of fixed dimension."""
    dimension: int
    evaluator: object

    def __call__(self, t, y):
        return self.evaluator(t, y)


# Dormand & Prince (1980) tableau, FSAL
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_A = [np.array(row) for row in _A]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B - _B4

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 5.0


def _err_norm(err, y, y_new, cfg):
    scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.max(np.abs(err) / scale)) if err.size else 0.0


def _initial_step(f, t0, y0, f0, span, cfg):
    # Hairer, Norsett & Wanner, Solving ODEs I, sec. II.4
    scale = cfg.atol + cfg.rtol * np.abs(y0)
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = np.asarray(f(t0 + h0, y0 + h0 * f0), dtype=float)
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, span)


def integrate(f, y0, t0, t1, cfg=None, stats=None):
    """Integrate ``y' = f(t, y)`` from ``t0`` to ``t1`` and return ``y(t1)``.

    The last step is shortened to land exactly on ``t1``.  ``stats``, if a
    dict, receives step counters.
    """
    cfg = cfg or DEFAULT_CONFIG
    y = np.array(y0, dtype=float)
    if y.ndim != 1:
        raise DimensionMismatch("y0 must be a vector")
    dim = getattr(f, "dimension", None)
    if dim is not None and dim != y.size:
        raise DimensionMismatch(f"y0 has length {y.size}, field dimension is {dim}")
    t0, t1 = float(t0), float(t1)
    if t1 < t0:
        raise ValueError("integrate requires t1 >= t0")
    span = t1 - t0
    if span == 0.0:
        return y

    k = np.empty((7, y.size))
    k[0] = f(t0, y)
    h_min = 1e-14 * span
    # the heuristic can undershoot badly when atol is tiny; the controller
    # grows the step again, so start no lower than 100 * h_min
    h = cfg.initial_step or max(_initial_step(f, t0, y, k[0], span, cfg), 100 * h_min)
    t = t0
    accepted = rejected = 0
    while t < t1:
        if accepted + rejected >= cfg.max_steps:
            raise StepLimitExceeded(f"max_steps={cfg.max_steps} reached at t={t}")
        last = t + h >= t1
        if last:
            h = t1 - t
        elif h < h_min:
            raise StepUnderflow(f"step {h:.3e} below {h_min:.3e} at t={t}")
        for s in range(1, 7):
            k[s] = f(t + _C[s] * h, y + h * (_A[s] @ k[:s]))
        y_new = y + h * (_B @ k)
        err = h * (_E @ k)
        en = _err_norm(err, y, y_new, cfg)
        if en <= 1.0:
            accepted += 1
            t = t1 if last else t + h
            y = y_new
            k[0] = k[6]
            fac = _FAC_MAX if en == 0 else min(_FAC_MAX, _SAFETY * en ** -0.2)
            h *= fac
        else:
            rejected += 1
            h *= max(_FAC_MIN, _SAFETY * en ** -0.2)
            if h < h_min:
                raise StepUnderflow(f"step {h:.3e} below {h_min:.3e} at t={t}")
    if isinstance(stats, dict):
        stats["accepted"] = stats.get("accepted", 0) + accepted
        stats["rejected"] = stats.get("rejected", 0) + rejected
    return y


def integrate_piecewise(f, y0, times, cfg=None):
    """States at each of the increasing ``times`` (first is the start)."""
    times = [float(t) for t in times]
    out = [np.array(y0, dtype=float)]
    for ta, tb in zip(times[:-1], times[1:]):
        out.append(integrate(f, out[-1], ta, tb, cfg))
    return np.array(out)


def integrate_matrix(a, v0, t0, t1, cfg=None):
    """Solve ``V' = a(t) V`` and return ``V(t1)``.

    ``a`` is a callable returning a square matrix compatible with ``v0``.
    """
    v0 = np.array(v0, dtype=float)
    if v0.ndim != 2:
        raise DimensionMismatch("v0 must be a matrix")
    rows, cols = v0.shape
    probe = np.asarray(a(float(t0)))
    if probe.shape != (rows, rows):
        raise DimensionMismatch(f"a(t) has shape {probe.shape}, expected ({rows}, {rows})")

    def rhs(t, y):
        v = y.reshape((rows, cols), order="F")
        return (a(t) @ v).ravel(order="F")

    y = integrate(FieldFunction(rows * cols, rhs), v0.ravel(order="F"), t0, t1, cfg)
    return y.reshape((rows, cols), order="F")
