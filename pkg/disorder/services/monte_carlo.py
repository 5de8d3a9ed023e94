"""
Monte Carlo averaging over coupling-weight disorder.

Sample i draws its weights from the child stream
SeedSequence(seed, spawn_key=(i,)), so every result depends on the seed and
the sample index only, never on execution order or worker count.
"""
import dataclasses
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np
from django.conf import settings

from ensembles.domain import EnsembleConfig, ProtocolParams
from ensembles.exceptions import CapacityError, DegenerateProtocolError, ParameterError, QNDError
from ensembles.services.weights import make_weights

from ..domain import DisorderStats, SweepRow
from .quantities import get_quantity

logger = logging.getLogger(__name__)

# Applied in this order, so xi sees the point's photon number
GRID_KEYS = ('n_atoms', 'n_photons', 'dg2', 'chi', 'xi', 'phi')


def _evaluate_sample(quantity, dist, base, params, cap, index):
    try:
        cfg = base.with_weights(make_weights(dist, base.n_atoms, stream=(index,)))
        return quantity.evaluate(cfg, params, cap=cap)
    except QNDError as e:
        logger.debug("disorder sample %d (seed %d, spawn key (%d,)) failed: %s", index, dist.seed, index, e)
        e.sample_offset = index
        e.sample_seed = dist.seed
        raise


def _std_error(values):
    if np.all(values == values[0]):
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(values.size))


def _phase_error_stats(quantity, values, seed):
    variances = np.array([v for v, _ in values], dtype=float)
    slopes = np.array([s for _, s in values], dtype=float)
    mean_variance = float(np.mean(variances))
    mean_slope = float(np.mean(slopes))
    if mean_slope == 0.0:
        raise DegenerateProtocolError(f"{quantity.name}: disorder-averaged slope vanishes")
    with np.errstate(divide='ignore'):
        per_sample = np.sqrt(np.clip(variances, 0.0, None)) / np.abs(slopes)
    return DisorderStats(
        quantity=quantity.name,
        mean=math.sqrt(max(mean_variance, 0.0)) / abs(mean_slope),
        std_error=_std_error(per_sample),
        n_samples=len(values),
        seed=seed,
        per_sample=per_sample,
        mean_variance=mean_variance,
        mean_slope=mean_slope,
    )


def disorder_average(quantity, dist, n_samples, base, params, workers=None, cap=None):
    """
    Average ``quantity`` over ``n_samples`` weight vectors drawn from ``dist``.

    Phase-error quantities average the signal variance and slope separately and
    then form sqrt(variance)/|slope|. An evaluation error aborts the run; the
    exception carries ``sample_offset`` and ``sample_seed`` of the failing sample.
    """
    quantity = get_quantity(quantity)
    n_samples = int(n_samples)
    if n_samples < 2:
        raise ParameterError(f"n_samples must be >= 2, got {n_samples}")
    workers = settings.QND_METROLOGY['WORKERS'] if workers is None else int(workers)

    logger.info(
        "disorder_average %s: %d samples of %s (dg2=%g, seed=%d), %d worker(s)",
        quantity.name, n_samples, dist.kind.value, dist.variance, dist.seed, workers,
    )
    evaluate = partial(_evaluate_sample, quantity, dist, base, params, cap)
    if workers > 1:
        chunksize = max(1, n_samples // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as executor:
            values = list(executor.map(evaluate, range(n_samples), chunksize=chunksize))
    else:
        values = [evaluate(index) for index in range(n_samples)]

    if quantity.is_phase_error:
        return _phase_error_stats(quantity, values, dist.seed)
    per_sample = np.asarray(values, dtype=float)
    return DisorderStats(
        quantity=quantity.name,
        mean=float(np.mean(per_sample)),
        std_error=_std_error(per_sample),
        n_samples=n_samples,
        seed=dist.seed,
        per_sample=per_sample,
    )


def apply_point(point, dist, base, params):
    """(dist, base, params) with the grid point's values substituted."""
    unknown = sorted(set(point) - set(GRID_KEYS))
    if unknown:
        raise ParameterError(f"Unknown grid parameter(s) {', '.join(unknown)}; expected {', '.join(GRID_KEYS)}")

    n_atoms = int(point.get('n_atoms', base.n_atoms))
    n_photons = int(point.get('n_photons', base.n_photons))
    if (n_atoms, n_photons) != (base.n_atoms, base.n_photons):
        base = EnsembleConfig.uniform(n_atoms, n_photons)
    if 'dg2' in point:
        dist = dataclasses.replace(dist, variance=float(point['dg2']))
    if 'chi' in point:
        params = ProtocolParams(chi=float(point['chi']), phi=params.phi, protocol=params.protocol)
    if 'xi' in point:
        params = ProtocolParams.from_xi(float(point['xi']), n_photons, protocol=params.protocol, phi=params.phi)
    if 'phi' in point:
        params = params.at_phi(float(point['phi']))
    return dist, base, params


def sweep(points, dist, n_samples, base, params, quantity, workers=None, cap=None):
    """
    disorder_average at every grid point, in grid order.

    Point i uses seed dist.seed XOR i. Capacity errors are recorded on the row
    and the sweep continues.
    """
    points = [dict(point) for point in points]
    if not points:
        raise ParameterError("Sweep grid is empty")
    quantity = get_quantity(quantity)

    rows = []
    for index, point in enumerate(points):
        seed = dist.seed ^ index
        point_dist, point_base, point_params = apply_point(point, dist.with_seed(seed), base, params)
        try:
            stats = disorder_average(quantity, point_dist, n_samples, point_base, point_params, workers, cap)
        except CapacityError as e:
            logger.warning("Grid point %d %s skipped: %s", index, point, e)
            rows.append(SweepRow(index, point, seed, error=str(e)))
            continue
        rows.append(SweepRow(index, point, seed, stats))
    return rows
