"""Single source of truth for the numerical tolerances used across the package."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12          # max entrywise |M - M^dag|
    unit_norm: float = 1e-9           # |norm^2 - 1| for a normalized state
    trace_one: float = 1e-12          # |tr(rho) - 1|
    psd_floor: float = -1e-10         # minimum eigenvalue allowed for rho / Choi
    unitary: float = 1e-12            # max entrywise |u^dag u - 1|
    independence: float = 1e-10       # relative Gram-eigenvalue cutoff
    generator_match: float = 1e-10    # unraveling generator vs Lindblad RHS
    norm_drift: float = 1e-10         # 2 Re<psi,A> + sum ||B_k||^2
    spectral_gap: float = 1e-9        # eigenvalue grouping for sectors
    classify: float = 1e-3            # default Born sector threshold
    blowup_norm: float = 1e-6         # ||psi'|| below this aborts a trajectory


TOL = Tolerances()
