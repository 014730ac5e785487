"""Linear stability of twisted states in circulant Kuramoto networks."""
from .graph import (
    AggregateGen,
    CirculantNetwork,
    DelayRing,
    LagRing,
    assemble_k,
    delay_to_lag,
    make_alpha_decay,
    make_distance_delay,
    make_distance_lag,
    make_k_ring,
    ring_distance,
)
from .spectrum import CouplingSpectrum, cdt_eigenvalues, continuum_H, signed_q, twisted_state, winding_number
from .stability import (
    NoStableStateError,
    StabilityReport,
    critical_k,
    lambda_continuum,
    lambda_grid,
    lambda_via_dft,
    predicted_wave_q,
)

__version__ = "0.1.0"


def analyze(net: CirculantNetwork, lags: LagRing | None = None) -> StabilityReport:
    """Stability report for every q-state of ``net`` (optionally with phase lags)."""
    return lambda_grid(cdt_eigenvalues(assemble_k(net, lags)))
