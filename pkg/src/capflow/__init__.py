"""capflow: a desk-scale laboratory for capacity-weighted function norms.

Computes set capacities under spectral Bessel-type kernels with certified
duality gaps, exact Lorentz quasi-norms on finite measure spaces, localized
maximal operators and A1-type weight constants, multiplier/block/weighted
norm estimates with explicit witnesses, and runs reproducible verification
campaigns over every finitely checkable inequality the estimates satisfy.
"""
from .measure import (DiscreteMeasureSpace, Field, LorentzExponents,
                      StepFunction, decreasing_rearrangement,
                      distribution_function, gamma_norm, lorentz_norm,
                      pairing, power_identity_check, weak_lorentz_norm)
from .grid import Grid, KernelSpec, bessel_kernel, convolve, make_grid
from .capacity import (CapacityOracle, CapacityParams, CapacityProblem,
                       CapacityResult, NormEstimate, SetMask, capacity,
                       capacitary_lorentz_norm, equilibrium_checks,
                       finite_problem, grid_problem, identity_problem,
                       l1c_norm, lebesgue_lower_bound_check,
                       nonlinear_potential, strichartz_check, unit_cover)
from .multiplier import (TestSetFamily, char_m_via_weights, default_grid_family,
                         m_norm, m_norm_local, script_m_norm,
                         weak_script_m_norm)
from .weights import (Weight, WeightConfig, a1loc_constant, average_weights,
                      level_sum_check, local_maximal,
                      maximal_boundedness_probe, n_norm_upper,
                      potential_weight)
from .blocks import (AtomicMeasure, Block, BlockDecomposition,
                     block_norm_upper_constructive, block_norm_upper_greedy,
                     kothe_dual_norm_bruteforce, pairing_inequality_suite,
                     trace_norm, trace_norm_inf_form, transport_decomposition,
                     validate_block)
from .suites import (CapflowConfig, SuiteSpec, Verdict, emit_report,
                     run_suite)

__version__ = "0.1.0"
