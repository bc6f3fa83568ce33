"""Shared oracles and fixtures for the test modules."""

import numpy as np

from floquetkit.errors import InvalidParameters
from floquetkit.systems import SteklovParams


def rk4(f, y0, t0, t1, steps):
    """Fixed-step classical Runge-Kutta, used only as an independent oracle."""
    y = np.array(y0, dtype=float)
    h = (t1 - t0) / steps
    t = t0
    for _ in range(steps):
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y


def steklov_draws(n=10, seed=7):
    """``n`` admissible Steklov parameter sets by rejection sampling."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        a, b, c = rng.uniform(0.2, 5, 3)
        p = SteklovParams(a=float(a), b=float(b), c=float(c),
                          W=float(rng.uniform(0.2, 3)), l=float(rng.uniform(0.2, 3)))
        try:
            out.append(p.check())
        except InvalidParameters:
            pass
    return out
