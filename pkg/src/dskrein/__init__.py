"""Numerical verification of the massless scalar field on 2D de Sitter space.

Geometry of the hyperboloid and its conformal chart, the massive and
renormalized massless two-point kernels, smooth compactly supported test
functions with an epsilon-regularized pairing engine, the Krein-space
completion with its fundamental symmetry, a truncated Fock representation
with the gauge charge, and the corrected topological current.
"""

from .errors import (ConvergenceError, CutError, DsKreinError, IllConditionedError,
                     NormalizationError, PoleError, SupportError)
from .geometry import (DsParams, DsPoint, ComplexDsPoint, GroupElement, causal_class,
                       embed, generators, group_action, invariant_lambda, minkowski_dot)
from .kernels import (KernelConvention, MassParam, boundary_value_w, commutator_w,
                      flat_remark_f, general_w, massive_w, massless_w,
                      subtraction_constant)
from .testfn import (ChartGrid, MeasureGrid, TestFunction, bump, construct_h,
                     decompose, indef_gram, integral, laplace_beltrami, pair_indef,
                     smear_field, transport)
from .krein import (GramPair, KreinContext, PairingTable, eta_involution_defect,
                    eta_swap_defect, functional_check, krein_metric, krein_product,
                    nihil_norm, v0_invariance)
from .fock import (FockRep, OneParticleSpace, charge, eta_fock, field_shift_parts,
                   gauge_unitary, one_particle_space, physical_projector)
from .current import (CurrentForm, SmearedField, closure_defect, corrected_current,
                      dual_field, expected_winding, kappa_value, slice_charge)

__version__ = "0.1.0"
