"""URDF parsing into a validated robot tree, plus serial-chain extraction.

Supported joint kinds are fixed, revolute, continuous and prismatic; one
scalar DOF per actuated joint. Mesh geometry is kept as an opaque file
reference and never loaded. Inputs must be plain URDF (no xacro).
"""
from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from xml.sax.saxutils import quoteattr

import numpy as np

from .errors import (
    CycleDetected,
    DanglingLinkReference,
    DuplicateName,
    InvalidGeometry,
    MalformedXml,
    MissingLimits,
    MultipleRoots,
    NonUnitAxis,
    NoPath,
    UnknownLink,
    UnsupportedJointType,
)

SUPPORTED_JOINT_KINDS = ("fixed", "revolute", "continuous", "prismatic")
ACTUATED_JOINT_KINDS = ("revolute", "continuous", "prismatic")


@dataclass(frozen=True)
class GeometryPrimitive:
    """box/cylinder/sphere/mesh with a local pose in the link frame.

    size meaning: box -> (x, y, z); cylinder -> (radius, length);
    sphere -> (radius,); mesh -> () with ``mesh_file`` set.
    """

    shape: str
    size: tuple = ()
    xyz: tuple = (0.0, 0.0, 0.0)
    rpy: tuple = (0.0, 0.0, 0.0)
    mesh_file: str | None = None

    def to_dict(self) -> dict:
        d = {"shape": self.shape, "size": list(self.size),
             "xyz": list(self.xyz), "rpy": list(self.rpy)}
        if self.mesh_file is not None:
            d["mesh_file"] = self.mesh_file
        return d


UNIT_BOX = GeometryPrimitive(shape="box", size=(1.0, 1.0, 1.0))


@dataclass(frozen=True)
class Link:
    name: str
    visuals: tuple = (UNIT_BOX,)
    collision: GeometryPrimitive | None = None


@dataclass(frozen=True)
class JointLimits:
    lower: float = 0.0
    upper: float = 0.0
    velocity: float = 0.0
    effort: float = 0.0
    has_position: bool = True


@dataclass(frozen=True)
class Joint:
    name: str
    kind: str
    parent: str
    child: str
    xyz: tuple = (0.0, 0.0, 0.0)
    rpy: tuple = (0.0, 0.0, 0.0)
    axis: tuple = (1.0, 0.0, 0.0)
    limits: JointLimits | None = None

    @property
    def actuated(self) -> bool:
        return self.kind != "fixed"


@dataclass(frozen=True)
class RobotModel:
    name: str
    links: tuple
    joints: tuple
    root_link: str

    @property
    def link_map(self) -> dict:
        return {l.name: l for l in self.links}

    @property
    def joint_map(self) -> dict:
        return {j.name: j for j in self.joints}

    @property
    def dof(self) -> int:
        return sum(1 for j in self.joints if j.actuated)

    def children_of(self, link_name: str) -> list:
        return [j for j in self.joints if j.parent == link_name]


@dataclass(frozen=True)
class JointChain:
    """Ordered joints on the base->tip path; fixed joints ride along as
    constant transforms."""

    base_link: str
    tip_link: str
    joints: tuple
    link_names: tuple  # base first, tip last, len == len(joints) + 1

    @property
    def dof(self) -> int:
        return sum(1 for j in self.joints if j.actuated)

    @property
    def actuated_joints(self) -> tuple:
        return tuple(j for j in self.joints if j.actuated)

    @property
    def joint_names(self) -> tuple:
        return tuple(j.name for j in self.actuated_joints)

    def limit_arrays(self):
        """(lower, upper, velocity) arrays for actuated joints; continuous
        joints get infinite position limits."""
        lower, upper, velocity = [], [], []
        for j in self.actuated_joints:
            if j.limits is not None and j.limits.has_position:
                lower.append(j.limits.lower)
                upper.append(j.limits.upper)
            else:
                lower.append(-math.inf)
                upper.append(math.inf)
            velocity.append(j.limits.velocity if j.limits is not None else math.inf)
        return np.array(lower), np.array(upper), np.array(velocity)


def _parse_float(text: str, ctx: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise MalformedXml(f"{ctx}: {text!r} is not a number") from None
    if math.isnan(value):
        raise MalformedXml(f"{ctx}: NaN is not a valid value")
    return value


def _parse_floats(text: str, count: int, ctx: str) -> tuple:
    parts = text.split()
    if len(parts) != count:
        raise MalformedXml(f"{ctx}: expected {count} numbers, got {text!r}")
    return tuple(_parse_float(p, ctx) for p in parts)


def _parse_origin(elem) -> tuple:
    origin = elem.find("origin")
    xyz = (0.0, 0.0, 0.0)
    rpy = (0.0, 0.0, 0.0)
    if origin is not None:
        if origin.get("xyz") is not None:
            xyz = _parse_floats(origin.get("xyz"), 3, "origin xyz")
        if origin.get("rpy") is not None:
            rpy = _parse_floats(origin.get("rpy"), 3, "origin rpy")
    return xyz, rpy


def _parse_geometry(parent_elem, ctx: str) -> GeometryPrimitive | None:
    geom = parent_elem.find("geometry")
    if geom is None:
        return None
    xyz, rpy = _parse_origin(parent_elem)
    box = geom.find("box")
    if box is not None:
        size = _parse_floats(box.get("size", "1 1 1"), 3, f"{ctx} box size")
        if min(size) <= 0:
            raise InvalidGeometry(f"{ctx}: box dimensions must be positive")
        return GeometryPrimitive("box", size, xyz, rpy)
    cyl = geom.find("cylinder")
    if cyl is not None:
        radius = _parse_float(cyl.get("radius", "0"), f"{ctx} cylinder radius")
        length = _parse_float(cyl.get("length", "0"), f"{ctx} cylinder length")
        if radius <= 0 or length <= 0:
            raise InvalidGeometry(f"{ctx}: cylinder needs positive radius/length")
        return GeometryPrimitive("cylinder", (radius, length), xyz, rpy)
    sph = geom.find("sphere")
    if sph is not None:
        radius = _parse_float(sph.get("radius", "0"), f"{ctx} sphere radius")
        if radius <= 0:
            raise InvalidGeometry(f"{ctx}: sphere needs positive radius")
        return GeometryPrimitive("sphere", (radius,), xyz, rpy)
    mesh = geom.find("mesh")
    if mesh is not None:
        filename = mesh.get("filename", "")
        return GeometryPrimitive("mesh", (), xyz, rpy, mesh_file=filename)
    return None


def _parse_link(elem) -> Link:
    name = elem.get("name")
    if not name:
        raise MalformedXml("link without a name attribute")
    visuals = []
    for visual in elem.findall("visual"):
        prim = _parse_geometry(visual, f"link {name} visual")
        if prim is not None:
            visuals.append(prim)
    if not visuals:
        visuals = [UNIT_BOX]
    collision = None
    coll_elem = elem.find("collision")
    if coll_elem is not None:
        collision = _parse_geometry(coll_elem, f"link {name} collision")
    return Link(name=name, visuals=tuple(visuals), collision=collision)


def _parse_joint(elem) -> Joint:
    name = elem.get("name")
    if not name:
        raise MalformedXml("joint without a name attribute")
    kind = elem.get("type")
    if kind not in SUPPORTED_JOINT_KINDS:
        raise UnsupportedJointType(f"joint {name}: type {kind!r} is not supported")
    parent_elem = elem.find("parent")
    child_elem = elem.find("child")
    if parent_elem is None or child_elem is None:
        raise MalformedXml(f"joint {name}: missing parent or child element")
    parent = parent_elem.get("link")
    child = child_elem.get("link")
    if not parent or not child:
        raise MalformedXml(f"joint {name}: parent/child without link attribute")

    xyz, rpy = _parse_origin(elem)

    axis = (1.0, 0.0, 0.0)
    axis_elem = elem.find("axis")
    if axis_elem is not None and axis_elem.get("xyz") is not None:
        axis = _parse_floats(axis_elem.get("xyz"), 3, f"joint {name} axis")
    if kind != "fixed":
        norm = math.sqrt(sum(a * a for a in axis))
        if not (0.9 <= norm <= 1.1):
            raise NonUnitAxis(f"joint {name}: axis norm {norm:.4f} outside [0.9, 1.1]")
        axis = tuple(a / norm for a in axis)

    limits = None
    limit_elem = elem.find("limit")
    if kind in ("revolute", "prismatic"):
        if limit_elem is None or limit_elem.get("lower") is None or limit_elem.get("upper") is None:
            raise MissingLimits(f"joint {name}: {kind} joints require lower/upper limits")
        lower = _parse_float(limit_elem.get("lower"), f"joint {name} lower limit")
        upper = _parse_float(limit_elem.get("upper"), f"joint {name} upper limit")
        if lower > upper:
            raise MissingLimits(f"joint {name}: lower limit exceeds upper limit")
        limits = JointLimits(lower=lower, upper=upper,
                             velocity=_parse_float(limit_elem.get("velocity", "inf"),
                                                   f"joint {name} velocity limit"),
                             effort=_parse_float(limit_elem.get("effort", "inf"),
                                                 f"joint {name} effort limit"),
                             has_position=True)
    elif kind == "continuous":
        if limit_elem is None or limit_elem.get("velocity") is None:
            raise MissingLimits(f"joint {name}: continuous joints require a velocity limit")
        limits = JointLimits(lower=0.0, upper=0.0,
                             velocity=_parse_float(limit_elem.get("velocity"),
                                                   f"joint {name} velocity limit"),
                             effort=_parse_float(limit_elem.get("effort", "inf"),
                                                 f"joint {name} effort limit"),
                             has_position=False)
    return Joint(name=name, kind=kind, parent=parent, child=child,
                 xyz=xyz, rpy=rpy, axis=axis, limits=limits)


def _validate_tree(name, links, joints) -> str:
    """Check the link/joint graph is a single tree; return the root link."""
    link_names = set()
    for link in links:
        if link.name in link_names:
            raise DuplicateName(f"duplicate link name {link.name!r}")
        link_names.add(link.name)
    joint_names = set()
    for joint in joints:
        if joint.name in joint_names:
            raise DuplicateName(f"duplicate joint name {joint.name!r}")
        joint_names.add(joint.name)
        for ref in (joint.parent, joint.child):
            if ref not in link_names:
                raise DanglingLinkReference(
                    f"joint {joint.name!r} references unknown link {ref!r}")

    parent_of = {}
    for joint in joints:
        if joint.child in parent_of:
            raise CycleDetected(
                f"link {joint.child!r} has multiple parent joints")
        parent_of[joint.child] = joint.parent

    roots = [l.name for l in links if l.name not in parent_of]
    if not roots:
        raise CycleDetected(f"robot {name!r} has no root link")
    if len(roots) > 1:
        raise MultipleRoots(f"robot {name!r} has multiple roots: {sorted(roots)}")
    root = roots[0]

    children = {}
    for joint in joints:
        children.setdefault(joint.parent, []).append(joint.child)
    reached = {root}
    stack = [root]
    while stack:
        for child in children.get(stack.pop(), []):
            if child not in reached:
                reached.add(child)
                stack.append(child)
    if reached != link_names:
        raise CycleDetected(
            f"links unreachable from root {root!r}: {sorted(link_names - reached)}")
    return root


def parse_urdf(xml_text: str) -> RobotModel:
    """Parse URDF XML into a validated RobotModel.

    Raises the typed error family (MalformedXml, DuplicateName, ...) on any
    contract violation; never anything unhandled on garbage input.
    """
    if not isinstance(xml_text, str):
        raise MalformedXml("input must be a string of XML")
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from None
    if root.tag != "robot":
        raise MalformedXml(f"top-level element is {root.tag!r}, expected 'robot'")
    name = root.get("name", "robot")

    links = [_parse_link(e) for e in root.findall("link")]
    joints = [_parse_joint(e) for e in root.findall("joint")]
    if not links:
        raise MalformedXml("robot has no links")

    root_link = _validate_tree(name, links, joints)
    return RobotModel(name=name, links=tuple(links), joints=tuple(joints),
                      root_link=root_link)


def parse_urdf_file(path) -> RobotModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_urdf(fh.read())
    except OSError as exc:
        raise MalformedXml(f"cannot read {path}: {exc}") from None


def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def _geometry_xml(prim: GeometryPrimitive, tag: str, out: list):
    out.append(f"    <{tag}>")
    if any(prim.xyz) or any(prim.rpy):
        out.append(f'      <origin xyz="{_fmt(prim.xyz)}" rpy="{_fmt(prim.rpy)}"/>')
    out.append("      <geometry>")
    if prim.shape == "box":
        out.append(f'        <box size="{_fmt(prim.size)}"/>')
    elif prim.shape == "cylinder":
        out.append(f'        <cylinder radius="{prim.size[0]!r}" length="{prim.size[1]!r}"/>')
    elif prim.shape == "sphere":
        out.append(f'        <sphere radius="{prim.size[0]!r}"/>')
    elif prim.shape == "mesh":
        out.append(f"        <mesh filename={quoteattr(prim.mesh_file or '')}/>")
    out.append("      </geometry>")
    out.append(f"    </{tag}>")


def serialize_urdf(model: RobotModel) -> str:
    """Write a RobotModel back to URDF XML. parse(serialize(m)) is
    structurally equal to m."""
    out = [f"<robot name={quoteattr(model.name)}>"]
    for link in model.links:
        out.append(f"  <link name={quoteattr(link.name)}>")
        for prim in link.visuals:
            _geometry_xml(prim, "visual", out)
        if link.collision is not None:
            _geometry_xml(link.collision, "collision", out)
        out.append("  </link>")
    for joint in model.joints:
        out.append(f"  <joint name={quoteattr(joint.name)} type=\"{joint.kind}\">")
        out.append(f'    <origin xyz="{_fmt(joint.xyz)}" rpy="{_fmt(joint.rpy)}"/>')
        out.append(f"    <parent link={quoteattr(joint.parent)}/>")
        out.append(f"    <child link={quoteattr(joint.child)}/>")
        if joint.actuated:
            out.append(f'    <axis xyz="{_fmt(joint.axis)}"/>')
        lim = joint.limits
        if lim is not None:
            if lim.has_position:
                out.append(f'    <limit lower="{lim.lower!r}" upper="{lim.upper!r}" '
                           f'velocity="{lim.velocity!r}" effort="{lim.effort!r}"/>')
            else:
                out.append(f'    <limit velocity="{lim.velocity!r}" effort="{lim.effort!r}"/>')
        out.append("  </joint>")
    out.append("</robot>")
    return "\n".join(out) + "\n"


def build_chain(model: RobotModel, base_link: str, tip_link: str) -> JointChain:
    """Extract the ordered base->tip joint path for FK/IK.

    base_link == tip_link yields an empty chain (identity FK).
    """
    link_names = {l.name for l in model.links}
    for name in (base_link, tip_link):
        if name not in link_names:
            raise UnknownLink(f"link {name!r} not in model {model.name!r}")

    parent_joint = {j.child: j for j in model.joints}
    path = []
    cursor = tip_link
    while cursor != base_link:
        joint = parent_joint.get(cursor)
        if joint is None:
            raise NoPath(f"{tip_link!r} is not a descendant of {base_link!r}")
        path.append(joint)
        cursor = joint.parent
    path.reverse()
    names = [base_link] + [j.child for j in path]
    return JointChain(base_link=base_link, tip_link=tip_link,
                      joints=tuple(path), link_names=tuple(names))
