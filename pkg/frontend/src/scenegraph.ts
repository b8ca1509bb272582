// Pure mapping from (scene frame, snapshot frame) to a flat list of render
// nodes. The engine is authoritative: every pose here comes from the latest
// snapshot (link_poses / ghost_link_poses / object poses); the client never
// runs kinematics of its own.
import { Pose, SceneFrame, SnapshotFrame, Visual } from "./protocol";

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number]; // x, y, z, w

export interface RenderNode {
  key: string;
  shape: "box" | "cylinder" | "sphere" | "mesh";
  size: number[];
  position: Vec3;
  quaternion: Quat;
  opacity: number;
  color: string;
}

export const GHOST_OPACITY = 0.35;
export const BODY_COLOR = "#7a8ca6";
export const GHOST_COLOR = "#4fc3f7";
export const OBJECT_COLOR = "#caa472";
export const ATTACHED_COLOR = "#e6b84f";

export function quatMultiply(a: Quat, b: Quat): Quat {
  const [ax, ay, az, aw] = a;
  const [bx, by, bz, bw] = b;
  return [
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
    aw * bw - ax * bx - ay * by - az * bz,
  ];
}

export function quatRotate(q: Quat, v: Vec3): Vec3 {
  const [qx, qy, qz, qw] = q;
  const [vx, vy, vz] = v;
  // t = 2 q_vec x v; v' = v + qw t + q_vec x t
  const tx = 2 * (qy * vz - qz * vy);
  const ty = 2 * (qz * vx - qx * vz);
  const tz = 2 * (qx * vy - qy * vx);
  return [
    vx + qw * tx + qy * tz - qz * ty,
    vy + qw * ty + qz * tx - qx * tz,
    vz + qw * tz + qx * ty - qy * tx,
  ];
}

export function rpyToQuat(roll: number, pitch: number, yaw: number): Quat {
  const cr = Math.cos(roll / 2), sr = Math.sin(roll / 2);
  const cp = Math.cos(pitch / 2), sp = Math.sin(pitch / 2);
  const cy = Math.cos(yaw / 2), sy = Math.sin(yaw / 2);
  // URDF fixed-axis convention Rz(yaw) Ry(pitch) Rx(roll)
  return [
    sr * cp * cy - cr * sp * sy,
    cr * sp * cy + sr * cp * sy,
    cr * cp * sy - sr * sp * cy,
    cr * cp * cy + sr * sp * sy,
  ];
}

export function composePose(parent: Pose, localXyz: Vec3, localRpy: Vec3): { position: Vec3; quaternion: Quat } {
  const q = parent.orientation as Quat;
  const offset = quatRotate(q, localXyz);
  return {
    position: [
      parent.position[0] + offset[0],
      parent.position[1] + offset[1],
      parent.position[2] + offset[2],
    ],
    quaternion: quatMultiply(q, rpyToQuat(localRpy[0], localRpy[1], localRpy[2])),
  };
}

function visualNodes(
  keyBase: string,
  linkPose: Pose,
  visuals: Visual[],
  opacity: number,
  color: string,
): RenderNode[] {
  const nodes: RenderNode[] = [];
  visuals.forEach((visual, i) => {
    if (visual.shape === "mesh") {
      return; // mesh references are opaque; the engine renders primitives only
    }
    const placed = composePose(linkPose, visual.xyz as Vec3, visual.rpy as Vec3);
    nodes.push({
      key: `${keyBase}/v${i}`,
      shape: visual.shape,
      size: visual.size,
      position: placed.position,
      quaternion: placed.quaternion,
      opacity,
      color,
    });
  });
  return nodes;
}

export function buildRenderNodes(scene: SceneFrame, snap: SnapshotFrame): RenderNode[] {
  const nodes: RenderNode[] = [];
  const robotInfo = new Map(scene.robots.map((r) => [r.id, r]));

  for (const robot of snap.robots) {
    const info = robotInfo.get(robot.id);
    if (!info) continue;
    info.chain_links.forEach((link, i) => {
      const pose = robot.link_poses[i];
      if (!pose) return;
      nodes.push(...visualNodes(`${robot.id}/${link.name}`, pose, link.visuals, 1.0, BODY_COLOR));
    });
    if (robot.mode === "ghost_drive" && robot.ghost_link_poses) {
      info.chain_links.forEach((link, i) => {
        const pose = robot.ghost_link_poses![i];
        if (!pose) return;
        nodes.push(...visualNodes(
          `${robot.id}/ghost/${link.name}`, pose, link.visuals, GHOST_OPACITY, GHOST_COLOR));
      });
    }
  }

  for (const obj of snap.objects) {
    nodes.push({
      key: `object/${obj.id}`,
      shape: obj.shape,
      size: obj.size,
      position: obj.pose.position as Vec3,
      quaternion: obj.pose.orientation as Quat,
      opacity: 1.0,
      color: obj.attached_to ? ATTACHED_COLOR : OBJECT_COLOR,
    });
  }
  return nodes;
}
