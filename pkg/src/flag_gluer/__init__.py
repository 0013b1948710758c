"""Real-projective gluing equations for ideally triangulated 3-manifolds."""

from .edgeface import ALL_EDGE_FACES, EdgeFace, conj, conj_opp, from_perm, from_text, opp, pred, succ
from .triangulation import (EdgeCycle, FaceClass, Triangulation, TriangulationError,
                            VertexClass, parse_triangulation)
from .params import (DerivedTet, ParamError, ParamSet, TetParams, complete_gluings,
                     face_residual, internal_residual, params_to_json, parse_params)
from .flags import (Flag, TetOfFlags, cross_ratio, edge_ratio, gluing_parameter,
                    is_tet_of_flags, normal_form, proj_distance, random_tet_of_flags,
                    standard_representative, triple_ratio)
from .monodromy import (Cochain, CocycleError, MonodromyComplex, PathSpec, Placement,
                        develop, edge_matrices, evaluate_path, flip_matrix, glue_matrix,
                        holonomy, parse_path, peripheral_loops, rot_matrix, verify_cocycle)
from .geometry import (BNumber, LightLikeError, check_S_star, classify, classify_tet,
                       hyperbolic_quadric_form, phi_star, psi_star,
                       thurston_gluing_check, thurston_internal_check)
from .solver import (ResidualSystem, SolveOptions, SolveResult, assemble, solve, trace)
from . import fixtures

__version__ = "0.1.0"
