"""
Dicke-ladder helpers for a probe pulse of n photon spins.

Basis index q = 0..n labels the collective S_z eigenvalue m = q - n/2.
Collective operators are kept as bands: {offset: coeff}, where coeff[q] is
the matrix element <q+offset|O|q>.
"""
import math

import numpy as np
from scipy.special import gammaln


def sz_eigenvalues(n):
    return np.arange(n + 1, dtype=float) - n / 2.0


def log_binomial(n, k):
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


def css_amplitudes(n):
    """
    Amplitudes of the coherent spin state along +x, sqrt(C(n, q)) / 2^(n/2),
    evaluated in log space so n > 10^3 does not overflow.
    """
    q = np.arange(n + 1)
    return np.exp(0.5 * log_binomial(n, q) - 0.5 * n * math.log(2.0))


def raising_coefficients(n):
    """<q+1|S_+|q> = sqrt((n - q)(q + 1)); zero at the top of the ladder."""
    q = np.arange(n + 1, dtype=float)
    return np.sqrt(np.clip((n - q) * (q + 1.0), 0.0, None))


def lowering_coefficients(n):
    """<q-1|S_-|q> = sqrt(q(n - q + 1)); zero at the bottom of the ladder."""
    q = np.arange(n + 1, dtype=float)
    return np.sqrt(np.clip(q * (n - q + 1.0), 0.0, None))


def collective_bands(n, axis):
    """Bands of S_x, S_y or S_z for a pulse of n spins."""
    if axis == 'z':
        return {0: sz_eigenvalues(n).astype(complex)}
    up = raising_coefficients(n).astype(complex)
    down = lowering_coefficients(n).astype(complex)
    if axis == 'x':
        return {1: up / 2.0, -1: down / 2.0}
    if axis == 'y':
        return {1: up / 2j, -1: -down / 2j}
    raise ValueError(f"Unknown spin axis {axis!r}")


def compose_bands(left, right):
    """Bands of the product left @ right (right acts first)."""
    size = len(next(iter(right.values())))
    product = {}
    for off_r, coeff_r in right.items():
        for off_l, coeff_l in left.items():
            offset = off_r + off_l
            coeff = np.zeros(size, dtype=complex)
            q = np.arange(size)
            mid = q + off_r
            valid = (mid >= 0) & (mid < size) & (mid + off_l >= 0) & (mid + off_l < size)
            coeff[valid] = coeff_l[mid[valid]] * coeff_r[q[valid]]
            product[offset] = product.get(offset, 0) + coeff
    return {offset: coeff for offset, coeff in product.items() if np.any(coeff)}


def apply_bands(bands, amplitudes, axis):
    """Apply a banded collective operator along ``axis`` of an amplitude array."""
    amplitudes = np.moveaxis(np.asarray(amplitudes), axis, -1)
    size = amplitudes.shape[-1]
    result = np.zeros(amplitudes.shape, dtype=complex)
    for offset, coeff in bands.items():
        if offset >= 0:
            result[..., offset:] += coeff[:size - offset] * amplitudes[..., :size - offset]
        else:
            result[..., :size + offset] += coeff[-offset:] * amplitudes[..., -offset:]
    return np.moveaxis(result, -1, axis)
