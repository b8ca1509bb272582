"""Typed error hierarchy shared across the workbench.

Every error carries a stable ``code`` string that the server forwards in
error acks and the CLI prints in its JSON error line.
"""


class WorkbenchError(Exception):
    code = "workbench_error"

    def __init__(self, message=""):
        super().__init__(message)
        self.message = message


# --- URDF / robot model ---

class UrdfError(WorkbenchError):
    code = "urdf_error"


class MalformedXml(UrdfError):
    code = "malformed_xml"


class DuplicateName(UrdfError):
    code = "duplicate_name"


class DanglingLinkReference(UrdfError):
    code = "dangling_link_reference"


class CycleDetected(UrdfError):
    code = "cycle_detected"


class MultipleRoots(UrdfError):
    code = "multiple_roots"


class UnsupportedJointType(UrdfError):
    code = "unsupported_joint_type"


class MissingLimits(UrdfError):
    code = "missing_limits"


class NonUnitAxis(UrdfError):
    code = "non_unit_axis"


class InvalidGeometry(UrdfError):
    code = "invalid_geometry"


class UnknownLink(UrdfError):
    code = "unknown_link"


class NoPath(UrdfError):
    code = "no_path"


# --- kinematics ---

class DimensionMismatch(WorkbenchError):
    code = "dimension_mismatch"


class ZeroVelocityLimit(WorkbenchError):
    code = "zero_velocity_limit"


class Unreachable(WorkbenchError):
    """IK failed to converge. ``result`` still carries the best attempt."""

    code = "unreachable"

    def __init__(self, message="", result=None):
        super().__init__(message)
        self.result = result


# --- joint dynamics / simulation ---

class NonFiniteState(WorkbenchError):
    code = "non_finite_state"


# --- trajectories ---

class NonMonotonicTime(WorkbenchError):
    code = "non_monotonic_time"


class DofMismatch(WorkbenchError):
    code = "dof_mismatch"


class TooFewSamples(WorkbenchError):
    code = "too_few_samples"


class EvenWindow(WorkbenchError):
    code = "even_window"


class MalformedRecord(WorkbenchError):
    code = "malformed_record"

    def __init__(self, message="", line=None):
        super().__init__(message)
        self.line = line


class SchemaVersionMismatch(WorkbenchError):
    code = "schema_version_mismatch"


# --- DMP ---

class EmptyDemo(WorkbenchError):
    code = "empty_demo"


# --- workspace ---

class DuplicateId(WorkbenchError):
    code = "duplicate_id"


class MalformedScene(WorkbenchError):
    code = "malformed_scene"


class UnknownRobot(WorkbenchError):
    code = "unknown_robot"


class IndexOutOfRange(WorkbenchError):
    code = "index_out_of_range"


class WrongMode(WorkbenchError):
    code = "wrong_mode"


class BusyRobot(WorkbenchError):
    code = "busy_robot"


class AlreadyRecording(WorkbenchError):
    code = "already_recording"


class NotRecording(WorkbenchError):
    code = "not_recording"


# --- server / protocol ---

class UnknownCommand(WorkbenchError):
    code = "unknown_command"


class ValidationError(WorkbenchError):
    code = "validation_error"


class BindFailure(WorkbenchError):
    code = "bind_failure"
