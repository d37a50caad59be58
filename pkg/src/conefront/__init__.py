"""conefront: causal reachability analysis for continuous 2-D cone fields.

Computes causal futures, their boundary graphs, bubble sets between the
causal and uniformly-timelike boundaries, and explicit verified timelike
certificates for a catalogue of low-regularity example spacetimes.
"""

from ._compat import using_numba
from ._grid import GridSpec, Rect, aligned_window
from .analysis import AnalysisBundle, analyze, clear_cache
from .bubbles import (BubbleReport, Verdict, achronality_probe, bubble_set,
                      classify_bubble_point, grid_for, openness_check,
                      plainness_report, pushup_check)
from .certify import (NotFound, TimelikeCertificate, approach_axis_curve,
                      certify_membership, escape_axis_curve, smooth_interior_path)
from .cone import (AffineChart, AngleField, CausalKind, ConeSector, EtaC,
                   ExplicitMetricField, GridAngleField, Orientation, Point,
                   SymBilinear, TangentVector, VectorClass, check_continuity,
                   classify_vector, cone_sector, dh_distance, eval_metric,
                   mollify, narrow_sector, normalize_chart, null_basis,
                   strictly_wider, widen_sector)
from .curves import (ClassificationReport, CurveSpec, classify_curve, concat,
                     lipschitz_check, reparametrize_tgraph, timelike_measure)
from .reach import (FrontGrid, GraphingFn, GridTooCoarseError, Membership,
                    MemberValue, NumericalInstabilityError, compute_fminus,
                    compute_fplus, front_propagate, in_Icheck, in_J,
                    integrate_generator)
from .zoo import (ExpectedManifest, SpacetimeSpec, ZOO, axis_reach_time,
                  catalog, cg_metric, const_angle, example1, example2,
                  example3, lipschitz_control, load_custom)

__version__ = "0.1.0"
