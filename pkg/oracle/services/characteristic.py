"""
Characteristic functions of coherent spin states and sign-tracked products.

Products of many cosines underflow long before they are meaningfully zero
for the sizes used in scaling studies, so they are accumulated as
(sign, log|.|) pairs.
"""
import numpy as np

LOG_SPACE_MIN_SPINS = 1000


def css_char(theta, m):
    """
    <exp(i theta sum s_z)> for m spin-1/2 particles polarised along x: cos^m(theta/2).

    Works elementwise on arrays of angles.
    """
    m = int(m)
    if m < 0:
        raise ValueError(f"Spin count must be non-negative, got {m}")
    half = np.cos(0.5 * np.asarray(theta, dtype=float))
    if m <= LOG_SPACE_MIN_SPINS:
        return half ** m
    sign = np.where(half < 0, (-1.0) ** (m % 2), 1.0)
    with np.errstate(divide='ignore'):
        magnitude = np.exp(m * np.log(np.abs(half)))
    return sign * magnitude


def signed_log_product(values):
    """(sign, log|prod|) of a real vector; log|prod| is -inf when a factor vanishes."""
    values = np.asarray(values, dtype=float)
    if np.any(values == 0):
        return 0.0, -np.inf
    negatives = int(np.count_nonzero(values < 0))
    return (-1.0) ** (negatives % 2), float(np.sum(np.log(np.abs(values))))


def product(values):
    sign, log_magnitude = signed_log_product(values)
    return sign * float(np.exp(log_magnitude)) if sign else 0.0


def leave_one_out_products(values):
    """
    Vector whose k-th entry is prod_{j != k} values[j].

    Exact zeros are handled by counting them instead of dividing.
    """
    values = np.asarray(values, dtype=float)
    result = np.zeros_like(values)
    zeros = np.flatnonzero(values == 0)
    if zeros.size > 1:
        return result
    if zeros.size == 1:
        k = int(zeros[0])
        result[k] = product(np.delete(values, k))
        return result

    sign, log_magnitude = signed_log_product(values)
    own_sign = np.sign(values)
    result[:] = sign * own_sign * np.exp(log_magnitude - np.log(np.abs(values)))
    return result
