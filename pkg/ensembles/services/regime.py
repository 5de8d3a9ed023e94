"""
Regime-validity checks for the small-parameter expansions behind the closed forms.

The report is advisory: callers keep computing outside the regime and use the
margins to mask extrapolated points.
"""
import math

from django.conf import settings

from ..domain import RegimeReport
from .weights import empirical_disorder


def default_threshold():
    return settings.QND_METROLOGY['REGIME_THRESHOLD']


def check_regime(cfg, params, threshold=None):
    """
    Margins for a concrete ensemble and interaction.

    small_kick         chi*sqrt(N/4)   (linearisation of S_y(tau) in F_z)
    small_bend         N*chi^2
    photon_dominance   N/sqrt(n)       (sqrt(n) >> N)
    small_disorder_xi  xi*(dg)^2
    inhomogeneity_criterion  N*(dg)^2  ((dg)^2 << 1/N)
    """
    threshold = default_threshold() if threshold is None else threshold
    n_atoms, n_photons, chi = cfg.n_atoms, cfg.n_photons, abs(params.chi)
    _, dg2 = empirical_disorder(cfg.weights)
    xi = params.xi(n_photons)

    notes = ()
    if chi == 0:
        notes = ('zero interaction: no QND information is acquired',)

    return RegimeReport(
        small_kick=chi * math.sqrt(n_atoms / 4.0),
        small_bend=n_atoms * chi * chi,
        photon_dominance=n_atoms / math.sqrt(n_photons),
        small_disorder_xi=xi * dg2,
        inhomogeneity_criterion=n_atoms * dg2,
        threshold=threshold,
        notes=notes,
    )


def formula_regime(xi, dg2, n_atoms, n_photons=None, threshold=None):
    """
    Margins available to the closed forms, which are written in xi, (dg)^2 and N.

    Without a photon number only the disorder margins can be evaluated.
    """
    threshold = default_threshold() if threshold is None else threshold
    report = {
        'small_disorder_xi': xi * dg2,
        'inhomogeneity_criterion': n_atoms * dg2,
    }
    if n_photons:
        chi = 2.0 * math.sqrt(xi / n_photons)
        report.update(
            small_kick=chi * math.sqrt(n_atoms / 4.0),
            small_bend=n_atoms * chi * chi,
            photon_dominance=n_atoms / math.sqrt(n_photons),
        )
    notes = ('zero interaction: no QND information is acquired',) if xi == 0 else ()
    return RegimeReport(threshold=threshold, notes=notes, **report)
