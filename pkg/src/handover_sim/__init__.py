"""Desk-scale simulator for gaze and language driven robot-to-human handover.

The pipeline runs six stages over a synthetic tabletop: analytic scene
rendering, gaze-ray geometry with heatmap fusion, rule-based command parsing,
multimodal object selection, preference-aware parallel-jaw grasp planning,
and damped-attractor motion generation for a 6-DOF arm.
"""

from .arm import ArmModel, fk, home_configuration, jacobian, cobot_arm
from .cloud import PointCloud, complete_cloud, extract_point_cloud, remove_outliers
from .gaze import (GazeFrame, HeadPose, Heatmap, MonitorPlane, build_heatmap,
                   ema_stream, ensemble_direction, heatmap_from_frames,
                   intersect_monitor, simulate_gaze)
from .geometry import RigidTransform, Shape
from .grasp import (GraspCandidate, GripperModel, HandPose, angle_measure,
                    hand_fit_score, distance_measure, plan_grasp,
                    plan_grasp_detailed, predict_hands, sample_grasps)
from .motion import (HandoverMotion, JointTrajectory, RMPParams, TaskState,
                     attractor, handover_plan, integrate, pull)
from .parsing import Lexicon, ParsedCommand, default_lexicon, parse
from .pipeline import (PipelineConfig, Session, replay, run_pipeline,
                       save_session)
from .render import CameraModel, RenderOutput, default_camera, deproject, render
from .scene import (ObjectPart, Scene, SceneObject, TableSlab, build_catalog,
                    generate_scene, load_scene, place_identical_pair,
                    save_scene)
from .selection import (Candidate, DetectorNoise, SelectionResult,
                        detect_candidates, evaluate_gaze, resolve_part,
                        score_candidates, select, select_object)

__version__ = "0.1.0"
