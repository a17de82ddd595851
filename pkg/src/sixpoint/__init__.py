"""Six-point relative pose for multi-camera rigs."""
from .errors import (ConfigurationMismatch, DegenerateRotation, DegenerateTriangulation,
                     InvalidProblem, NoModelFound, NoRealRoots, NotDivisible, NotNormalized,
                     NotSquare, SixPointError, SolveFailure, TranslationAtInfinity, ZeroVector)
from .geometry import (CameraExtrinsic, RayCorrespondence, RigPose, cayley_to_quat,
                       cayley_to_rotation, compose_camera_pair, epipolar_residual,
                       essential_matrix, quat_to_rotation, rotation_error, rotation_to_cayley,
                       translation_dir_error, translation_error)
from .poly3 import Poly, PolyMatrix, TriPoly, det_poly, exact_divide
from .equations import (EquationSystem, Parametrization, RayBundleGroup, SixPointProblem,
                        build_M, build_equations, detect_ray_bundle_groups)
from .roots import (SolutionSet, SolverConfig, assemble_poses, recover_translation,
                    solve_system)
from .solvers import MatchType, SolverKind, classify_configuration, solve
from .ransac import (RansacConfig, RansacResult, angular_inlier_test, ransac_iterations,
                     ransac_iterations_stable, run_ransac)
from .synthetic import (Motion, PCType, Scenario, SceneConfig, SyntheticInstance,
                        make_generalized_camera, make_two_camera_rig, run_stability_experiment)
from .configs import (DirectedMultigraph, classify_match_type, count_by_cameras,
                      enumerate_configs, graphs_equivalent)

__version__ = "0.1.0"
