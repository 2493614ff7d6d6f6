"""Recover sparse sources from spherical-mean data with Prony systems.

Three source families are supported: weighted points, weighted hyperplanes and
translated copies of a known radial kernel. Each is recovered from a finite set
of sensors by solving one Prony system per sensor, matching roots to sources,
and locating every source from its distances.
"""

from ._kernels import BACKEND
from .correspondence import Assignment, kernel_equal_pair_holds, match_roots, square_perm_diff_matrix
from .errors import *  # noqa: F401,F403
from .forward import (MomentVector, Probe, SphericalMeanTrace, hyperplane_moments, point_moments,
                      radial_trace)
from .geometry import (bisector_hyperplane, equidistance_hyperplanes,
                       hyperplane_from_unsigned_distances, trilaterate, unsigned_distance)
from .hankel import (GaussianKernel, HankelProfile, RadialKernel, TabulatedKernel,
                     extract_even_moments, hankel_transform, normalized_bessel)
from .model import (HyperplaneSources, PointSources, RadialSources, SensorSet, Theorem,
                    min_sensor_count, required_good_sensors, validate_general_position)
from .pipeline import (RecoveryReport, compare_models, recover, recover_hyperplanes,
                       recover_points, recover_radial, simulate)
from .prony import build_hankel, is_degenerate, solve_prony

__version__ = "0.1.0"
