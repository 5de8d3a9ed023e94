"""
Binary state snapshots: a little-endian int64 header (n_atoms, n_photons,
pulses) followed by the amplitudes as little-endian complex doubles.
"""
from pathlib import Path

import numpy as np

from ensembles.exceptions import ParameterError

from ..domain import QuantumState, StateDims

HEADER_DTYPE = np.dtype('<i8')
AMPLITUDE_DTYPE = np.dtype('<c16')


def dump_state(state, path):
    path = Path(path)
    dims = state.dims
    with path.open('wb') as handle:
        np.array([dims.n_atoms, dims.n_photons, dims.pulses], dtype=HEADER_DTYPE).tofile(handle)
        np.ascontiguousarray(state.amplitudes, dtype=AMPLITUDE_DTYPE).tofile(handle)
    return path


def load_state(path):
    path = Path(path)
    header = np.fromfile(path, dtype=HEADER_DTYPE, count=3)
    if header.size != 3:
        raise ParameterError(f"{path} is too short for a state snapshot header")
    dims = StateDims(*(int(v) for v in header))
    amplitudes = np.fromfile(path, dtype=AMPLITUDE_DTYPE, offset=3 * HEADER_DTYPE.itemsize)
    if amplitudes.size != dims.size:
        raise ParameterError(
            f"{path} holds {amplitudes.size} amplitudes, header {dims.describe()} needs {dims.size}"
        )
    return QuantumState(amplitudes.astype(complex).reshape(dims.shape), dims)
