"""Monte Carlo laboratory for planar Wiener-sausage segment coverage."""

from sausagelab._core import (
    __version__,
    annulus_hit_prob,
    bridge_hit_experiment,
    corridor_centers,
    cover_intervals,
    covers_segment,
    exit_below_prob,
    gaussian_disk_prob,
    is_lower_bound,
    local_time_tail,
    naive_mc,
    sample_bridge,
    sample_path,
    sample_srw,
    srw_cover,
    strip_conditioning_check,
    theorem1_bounds,
    wos_estimate,
    xi_measure,
)

__all__ = [
    "__version__",
    "annulus_hit_prob",
    "bridge_hit_experiment",
    "corridor_centers",
    "cover_intervals",
    "covers_segment",
    "exit_below_prob",
    "gaussian_disk_prob",
    "is_lower_bound",
    "local_time_tail",
    "naive_mc",
    "sample_bridge",
    "sample_path",
    "sample_srw",
    "srw_cover",
    "strip_conditioning_check",
    "theorem1_bounds",
    "wos_estimate",
    "xi_measure",
]
