"""Directional polynomial wavelet frames on the sphere, with tooling to
locate and characterize jump discontinuities along smooth boundary curves
through the decay and orientation behavior of frame coefficients."""

from .errors import DomainError, PreconditionError, ValidationError
from .geometry import (Cap, TangentFrame, euler_decompose, euler_to_rotation,
                       frame_euler, frame_to_rotation, geodesic_distance,
                       latitude_circle_distance, point_angles,
                       rotation_to_frame, rotate_about, sphere_point,
                       tangent_angle)
from .harmonics import (HarmonicCoeffs, QuadratureGrid, assoc_legendre,
                        legendre, make_grid, sht_forward, sph_harm,
                        synthesize, synthesize_at_points)
from .wigner import (CoefficientMap, SO3Synthesizer, WignerDStack,
                     rotate_coeffs, so3_synthesis, wigner_D, wigner_d,
                     wigner_d_columns)
from .wavelets import (WaveletSpec, WindowKappa, chi, default_window,
                       localization_profile, wavelet_coeffs,
                       wavelet_synthesize, zeta)
from .regions import (BoundaryCurve, GraphRegion, NearestPoint, SegmentReport,
                      boundary_curve, cap_area_difference,
                      cap_harmonic_coeffs, cap_region, cap_tangency_residuals,
                      demo_region, nearest_boundary_point, osculating_cap,
                      region_harmonic_coeffs, region_indicator,
                      segment_validate)
from .analysis import (DecayProfile, EdgePeak, ResidualStudy,
                       cap_residual_study, coefficient_map, decay_profile,
                       frame_coefficient, interval_estimate, leading_term,
                       map_synthesizer, normal_frame, oscillatory_integral,
                       peak_extract, region_residual_study, save_peaks_csv,
                       sorted_magnitudes, sparsity_ratio, write_pgm)

__version__ = "0.1.0"
