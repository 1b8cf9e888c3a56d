"""Kernels, quadrature, near-singular evaluation and the composite apply."""
from .composite import ApplyStats, composite_apply, evaluate
from .geometry import (GeometryError, Sphere, Suspension, TargetBatch, cubic_lattice, surface_distance,
                       well_separated)
from .kernels import (kernel_laplace, kernel_laplace_dn, kernel_laplace_flux, kernel_stokeslet,
                      kernel_stresslet, rotlet, stokeslet_pressure, stresslet_pressure)
from .near import (auto_p_eval, near_eval_direct, near_eval_fft, near_eval_fft_batch,
                   pole_aligned_normals, scale_factor, self_eval)
from .quadrature import density_samples, far_backend_direct, point_sources, smooth_quadrature_eval
from .traction import TractionCouplingTables, precompute_traction_coupling, traction_coefficients
