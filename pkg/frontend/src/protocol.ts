// Wire types for the workbench protocol (see ../docs/protocol.md).
// Incoming frames are validated with zod; commands are plain typed objects.
import { z } from "zod";

export const PoseSchema = z.object({
  position: z.tuple([z.number(), z.number(), z.number()]),
  orientation: z.tuple([z.number(), z.number(), z.number(), z.number()]),
});
export type Pose = z.infer<typeof PoseSchema>;

const VisualSchema = z.object({
  shape: z.enum(["box", "cylinder", "sphere", "mesh"]),
  size: z.array(z.number()),
  xyz: z.tuple([z.number(), z.number(), z.number()]),
  rpy: z.tuple([z.number(), z.number(), z.number()]),
  mesh_file: z.string().optional(),
});
export type Visual = z.infer<typeof VisualSchema>;

const SceneRobotSchema = z.object({
  id: z.string(),
  name: z.string(),
  base_pose: PoseSchema,
  joint_names: z.array(z.string()),
  limits: z.object({
    lower: z.array(z.number()),
    upper: z.array(z.number()),
    velocity: z.array(z.number()),
  }),
  chain_links: z.array(z.object({
    name: z.string(),
    visuals: z.array(VisualSchema),
  })),
  grasp_radius: z.number(),
});
export type SceneRobot = z.infer<typeof SceneRobotSchema>;

const SceneObjectSchema = z.object({
  id: z.string(),
  shape: z.enum(["box", "sphere", "cylinder"]),
  size: z.array(z.number()),
  pose: PoseSchema,
  attached_to: z.string().nullable(),
});
export type SceneObject = z.infer<typeof SceneObjectSchema>;

export const SceneFrameSchema = z.object({
  type: z.literal("scene"),
  sim_dt: z.number(),
  robots: z.array(SceneRobotSchema),
  objects: z.array(SceneObjectSchema),
});
export type SceneFrame = z.infer<typeof SceneFrameSchema>;

const SnapshotRobotSchema = z.object({
  id: z.string(),
  q: z.array(z.number()),
  qd: z.array(z.number()),
  mode: z.enum(["hold", "free_drive", "ghost_drive"]),
  ghost_q: z.array(z.number()).nullable(),
  ee_pose: PoseSchema,
  link_poses: z.array(PoseSchema),
  ghost_link_poses: z.array(PoseSchema).nullable(),
  gripper: z.object({
    state: z.enum(["open", "closed"]),
    attached: z.string().nullable(),
  }),
  recording: z.boolean(),
  active: z.object({
    kind: z.string(),
    handle: z.string(),
    step: z.number().optional(),
  }).nullable(),
});
export type SnapshotRobot = z.infer<typeof SnapshotRobotSchema>;

export const SnapshotFrameSchema = z.object({
  type: z.literal("snapshot"),
  tick: z.number(),
  time: z.number(),
  robots: z.array(SnapshotRobotSchema),
  objects: z.array(SceneObjectSchema),
});
export type SnapshotFrame = z.infer<typeof SnapshotFrameSchema>;

export const AckFrameSchema = z.object({
  type: z.literal("ack"),
  id: z.string(),
  ok: z.boolean(),
  result: z.record(z.string(), z.unknown()).optional(),
  error: z.object({ code: z.string(), message: z.string() }).optional(),
});
export type AckFrame = z.infer<typeof AckFrameSchema>;

export const ErrorFrameSchema = z.object({
  type: z.literal("error"),
  error: z.object({ code: z.string(), message: z.string() }),
});
export type ErrorFrame = z.infer<typeof ErrorFrameSchema>;

export const ServerFrameSchema = z.discriminatedUnion("type", [
  SceneFrameSchema,
  SnapshotFrameSchema,
  AckFrameSchema,
  ErrorFrameSchema,
]);
export type ServerFrame = z.infer<typeof ServerFrameSchema>;

export type CommandType =
  | "subscribe"
  | "set_mode"
  | "drag_joint"
  | "drag_ee"
  | "commit_ghost"
  | "set_gripper"
  | "run_program"
  | "record_start"
  | "record_stop"
  | "train_dmp"
  | "rollout_dmp"
  | "save_trajectory"
  | "load_trajectory"
  | "save_model"
  | "load_model";

export interface CommandEnvelope {
  id: string;
  type: CommandType;
  payload: Record<string, unknown>;
}

export function parseServerFrame(raw: string): ServerFrame {
  return ServerFrameSchema.parse(JSON.parse(raw));
}
