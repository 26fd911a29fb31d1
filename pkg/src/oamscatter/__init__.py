"""Matrix elements for twisted (Laguerre-Gaussian) photons scattering on hydrogen."""
from .beams import BeamMode, beam_width, gouy_phase, lg_mode_cylindrical, lg_mode_spherical, vector_potential_amplitude
from .errors import ConfigError, PhysicsDomainError
from .melement import (
    AmplitudeResult,
    Method,
    ScatteringChannel,
    azimuthal_selection,
    closed_form_flip_M,
    compton_M,
    dipole_series_term,
    gos,
    leading_order_M,
    plane_wave_M,
    twisted_M_forward_flip,
    twisted_M_general,
)
from .quad import QuadratureSpec, integrate_2d_after_phi, integrate_3d
from .specfun import (
    HydrogenState,
    angular_moment,
    assoc_laguerre,
    hydrogen_radial,
    hydrogen_wavefunction,
    radial_moment,
    spherical_harmonic,
)

__version__ = "0.1.0"
