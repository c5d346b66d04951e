"""Reaching with whole-arm reactive avoidance driven by a peripersonal-space
skin representation, simulated on a 7-DoF kinematic arm."""

from .chain import (
    DHRow,
    FKResult,
    JointState,
    KinematicChain,
    Pose,
    ee_jacobian,
    forward_kinematics,
    load_chain_config,
    orientation_error,
    point_jacobian,
)
from .controller import (
    ControlTarget,
    ControllerConfig,
    MinJerkFilter,
    SolveResult,
    VelocityBounds,
    avoidance_constraints,
    integrate,
    make_circle,
    solve_tick,
)
from .perception import (
    HumanFrame,
    KEYPOINT_LABELS,
    TrajectorySpec,
    assign_valence,
    default_skeleton_offsets,
    load_valence_map,
    median_filter,
    parse_keypoint_stream,
    serialize_frames,
    synth_trajectory,
)
from .pps import (
    PPSAggregate,
    ReceptiveField,
    Stimulus,
    aggregate,
    calibrate_sigma,
    crossing_distance,
    modulate,
    nominal_rf,
    rf_activation,
    taxel_response,
)
from .sim import (
    Scenario,
    SimEngine,
    TickRecord,
    compute_metrics,
    load_scenario,
    read_csv,
    run_scenario,
    write_csv,
)
from .skin import SkinLayout, Taxel, load_skin_layout, taxel_world_pose

__version__ = "0.1.0"
