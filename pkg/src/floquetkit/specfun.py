"""Complete/incomplete elliptic integrals of the first kind and Jacobi
elliptic functions for a real argument and real modulus ``0 <= k <= 1``.

The modulus convention is ``k`` (not ``m = k**2``): ``F(w; k)`` integrates
``1/sqrt(1 - k^2 sin^2)``.
"""

import math

from .errors import DomainError

__all__ = [
    "elliptic_K",
    "elliptic_F",
    "jacobi_am",
    "jacobi_sn_cn_dn",
    "jacobi_derivatives",
    "carlson_rf",
]

_MAX_AGM = 40


def _check_modulus(k, allow_one):
    k = float(k)
    if not math.isfinite(k) or k < 0.0 or k > 1.0 or (k == 1.0 and not allow_one):
        bound = "[0, 1]" if allow_one else "[0, 1)"
        raise DomainError(f"elliptic modulus k={k!r} outside {bound}")
    return k


def _complement(k):
    # sqrt(1 - k^2) without cancellation near k = 1
    return math.sqrt((1.0 - k) * (1.0 + k))


def _agm_sequence(k):
    """Descending AGM table (a_n, c_n) for a0 = 1, b0 = k'."""
    a, b, c = 1.0, _complement(k), k
    seq = [(a, c)]
    for _ in range(_MAX_AGM):
        if abs(c) <= 2.3e-16 * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        seq.append((a, c))
    return seq


def elliptic_K(k):
    """Complete elliptic integral of the first kind, ``F(pi/2; k)``."""
    k = _check_modulus(k, allow_one=False)
    a = _agm_sequence(k)[-1][0]
    return math.pi / (2.0 * a)


def carlson_rf(x, y, z):
    """Carlson's symmetric integral R_F(x, y, z) by duplication."""
    if min(x, y, z) < 0 or (x == 0) + (y == 0) + (z == 0) > 1:
        raise DomainError("R_F requires non-negative arguments, at most one zero")
    for _ in range(100):
        mu = (x + y + z) / 3.0
        dx, dy, dz = 1 - x / mu, 1 - y / mu, 1 - z / mu
        if max(abs(dx), abs(dy), abs(dz)) < 1e-4:
            break
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * (sy + sz) + sy * sz
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    # 5th-order truncation (Carlson 1995); error ~ r^6 with r < 1e-4
    return (1 - e2 / 10 + e3 / 14 + e2 * e2 / 24 - 3 * e2 * e3 / 44) / math.sqrt(mu)


def elliptic_F(w, k):
    """Incomplete integral of the first kind for any real amplitude ``w``.

    Uses ``F(w + n*pi) = F(w) + 2 n K`` to reduce to ``|w| <= pi/2``.
    """
    k = _check_modulus(k, allow_one=False)
    w = float(w)
    n = round(w / math.pi)
    w0 = w - n * math.pi
    s, c = math.sin(w0), math.cos(w0)
    base = s * carlson_rf(c * c, 1.0 - (k * s) * (k * s), 1.0) if s else 0.0
    if n == 0:
        return base
    return base + 2 * n * elliptic_K(k)


def jacobi_am(z, k):
    """Jacobi amplitude, the inverse of ``w -> F(w; k)``."""
    k = _check_modulus(k, allow_one=True)
    z = float(z)
    if k == 0.0:
        return z
    if k == 1.0:
        return 2.0 * math.atan(math.exp(z)) - 0.5 * math.pi  # gudermannian
    K = elliptic_K(k)
    # am(z + 2K) = am(z) + pi; reduce to [-K, K]
    m = round(z / (2.0 * K))
    z0 = z - 2.0 * K * m
    seq = _agm_sequence(k)
    N = len(seq) - 1
    phi = (2 ** N) * seq[N][0] * z0
    for n in range(N, 0, -1):
        a_n, c_n = seq[n]
        phi = 0.5 * (phi + math.asin(c_n / a_n * math.sin(phi)))
    return phi + m * math.pi


def jacobi_sn_cn_dn(z, k):
    """Return ``(sn, cn, dn)`` at real ``z`` for modulus ``0 <= k <= 1``."""
    k = _check_modulus(k, allow_one=True)
    z = float(z)
    if k == 1.0:
        sech = 1.0 / math.cosh(z)
        return math.tanh(z), sech, sech
    if k == 0.0:
        return math.sin(z), math.cos(z), 1.0
    phi = jacobi_am(z, k)
    sn, cn = math.sin(phi), math.cos(phi)
    ks = k * sn
    return sn, cn, math.sqrt((1.0 - ks) * (1.0 + ks))


def jacobi_derivatives(z, k):
    """``(d sn/dz, d cn/dz, d dn/dz)`` from the standard identities."""
    sn, cn, dn = jacobi_sn_cn_dn(z, k)
    return cn * dn, -sn * dn, -k * k * sn * cn
