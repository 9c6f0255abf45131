"""qflab: numerical laboratory for lattice points and values of quadratic forms."""

__version__ = "0.1.0"

from .errors import BudgetExceededError, QflabError
from .scalars import ExactScalar, parse_exact_scalar
from .forms import (QuadraticForm, RationalityVerdict, ShiftVector,
                    build_form, classify_rationality, diagonal_form,
                    parse_form_file)
from .lattice import (CountResult, ValueSpectrum, count_ellipsoid,
                      count_shell, enumerate_values)
from .volume import (McEstimate, MinkowskiFunctional, check_lemma82,
                     delta_curve, delta_error, ellipsoid_volume,
                     euclidean_functional, indefinite_limit_formula,
                     indefinite_volume_mc, mc_ellipsoid_volume,
                     sup_norm_functional, weighted_sup_functional)
from .trig import (GammaResult, TrigProfile, WeightTable,
                   check_basic_inequality, check_lemma64, convolve_weights,
                   f_sum, gamma_estimate, mm, phi, phi_profile,
                   phi_symmetrized, rho_of_s, sup_phi_profile)
from .smoothing import (CorrectionDensity, SmoothingScheme, build_scheme,
                        expansion_residual, f_j, f_mu, f_mu_curve,
                        f_mu_window, f_nu, fourier_inversion_check,
                        moments_pi)
from .bounds import (ClusterReport, cluster_structure, error_envelopes,
                     integrate_J, rho0_from_grid, theta, thm51_bound)
from .rationality import (MinimaResult, ProbeResult, count_H,
                          dirichlet_approx, rationality_probe,
                          successive_minima, sup_phi_symmetrized)
from .gaps import (GapReport, max_gap_indefinite, max_gap_positive,
                   oppenheim_scan)
