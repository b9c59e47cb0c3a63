"""Photocount statistics of chaotic radiation transmitted through random scatterers."""

from ._photocount import (
    Error,
    GeneratingFunction,
    auto_n_max,
    closed_form_double_barrier,
    empirical_summary,
    fano_haar,
    fit_last_decade,
    k_distribution_log,
    pmf,
    run_scenario,
    saddle_point_pmf,
    sample_counts,
    sample_transmission,
    spectrum,
    tail_rate,
)

__all__ = [
    "Error",
    "GeneratingFunction",
    "auto_n_max",
    "closed_form_double_barrier",
    "empirical_summary",
    "fano_haar",
    "fit_last_decade",
    "k_distribution_log",
    "pmf",
    "run_scenario",
    "saddle_point_pmf",
    "sample_counts",
    "sample_transmission",
    "spectrum",
    "tail_rate",
]
