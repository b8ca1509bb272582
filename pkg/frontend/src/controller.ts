// Teaching workflow state machine, independent of any rendering so it can be
// driven headlessly. All simulation truth comes back through snapshots; the
// controller only tracks workflow artifacts (trajectory/model ids, the goal
// configuration picked through ghost dragging) and relays commands.
import { WorkbenchClient, Throttle } from "./client";
import { SceneRobot, SnapshotFrame } from "./protocol";

export type Mode = "hold" | "free_drive" | "ghost_drive";

export interface TeachingState {
  robotId: string | null;
  mode: Mode;
  recording: boolean;
  busy: boolean;
  lastTrajectoryId: string | null;
  lastModelId: string | null;
  goal: number[] | null;
  lastError: string | null;
}

const DRAG_INTERVAL_MS = 1000 / 60; // at most 60 drag commands per second

export class TeachingController {
  readonly state: TeachingState = {
    robotId: null,
    mode: "hold",
    recording: false,
    busy: false,
    lastTrajectoryId: null,
    lastModelId: null,
    goal: null,
    lastError: null,
  };

  onStateChange: ((state: TeachingState) => void) | null = null;

  private robotInfo: SceneRobot | null = null;
  private jointThrottles = new Map<number, Throttle<number>>();
  private eeThrottle: Throttle<{ position: number[]; orientation?: number[] }>;

  constructor(private readonly client: WorkbenchClient) {
    client.onSnapshot = (snap) => this.ingestSnapshot(snap);
    this.eeThrottle = new Throttle(DRAG_INTERVAL_MS, (target) => {
      void this.sendDragEe(target);
    });
  }

  async init(robotId?: string): Promise<void> {
    await this.client.expectOk("subscribe");
    const scene = await this.waitForScene();
    const robot = robotId
      ? scene.robots.find((r) => r.id === robotId)
      : scene.robots[0];
    if (!robot) throw new Error(`robot ${robotId ?? "(first)"} not in scene`);
    this.robotInfo = robot;
    this.state.robotId = robot.id;
    this.notify();
  }

  get robot(): SceneRobot {
    if (!this.robotInfo) throw new Error("controller not initialized");
    return this.robotInfo;
  }

  get dof(): number {
    return this.robot.joint_names.length;
  }

  private waitForScene(): Promise<NonNullable<WorkbenchClient["scene"]>> {
    if (this.client.scene) return Promise.resolve(this.client.scene);
    return new Promise((resolve) => {
      this.client.onScene = (scene) => resolve(scene);
    });
  }

  private ingestSnapshot(snap: SnapshotFrame): void {
    const robot = snap.robots.find((r) => r.id === this.state.robotId);
    if (!robot) return;
    const changed =
      this.state.mode !== robot.mode ||
      this.state.recording !== robot.recording ||
      this.state.busy !== (robot.active !== null);
    this.state.mode = robot.mode;
    this.state.recording = robot.recording;
    this.state.busy = robot.active !== null;
    if (changed) this.notify();
  }

  private notify(): void {
    this.onStateChange?.({ ...this.state });
  }

  private fail(err: unknown): void {
    this.state.lastError = err instanceof Error ? err.message : String(err);
    this.notify();
  }

  async setMode(mode: Mode): Promise<void> {
    try {
      await this.client.expectOk("set_mode", { robot: this.state.robotId, mode });
      this.state.lastError = null;
    } catch (err) {
      this.fail(err);
      throw err;
    }
  }

  // Joint handle drag: throttled per joint, latest value wins.
  dragJoint(joint: number, target: number): void {
    let throttle = this.jointThrottles.get(joint);
    if (!throttle) {
      throttle = new Throttle(DRAG_INTERVAL_MS, (value) => {
        void this.sendDragJoint(joint, value);
      });
      this.jointThrottles.set(joint, throttle);
    }
    throttle.push(target);
  }

  private async sendDragJoint(joint: number, target: number): Promise<void> {
    try {
      await this.client.expectOk("drag_joint", {
        robot: this.state.robotId, joint, target,
      });
    } catch (err) {
      this.fail(err);
    }
  }

  // End-effector gizmo drag: throttled; the engine answers with the IK
  // solution, which doubles as the goal configuration in ghost mode.
  dragEe(position: number[], orientation?: number[]): void {
    this.eeThrottle.push({ position, orientation });
  }

  private async sendDragEe(target: { position: number[]; orientation?: number[] }): Promise<void> {
    try {
      const result = await this.client.expectOk("drag_ee", {
        robot: this.state.robotId,
        position: target.position,
        orientation: target.orientation ?? null,
      });
      if (this.state.mode === "ghost_drive") {
        this.state.goal = result.q as number[];
        this.notify();
      }
    } catch (err) {
      this.fail(err);
    }
  }

  /** Ghost-drag a single joint and remember the resulting configuration as
      the goal marker (reads it back from the next snapshot's ghost). */
  async pickGoalFromGhost(): Promise<number[]> {
    const snap = await this.nextSnapshot();
    const robot = snap.robots.find((r) => r.id === this.state.robotId);
    if (!robot?.ghost_q) throw new Error("no ghost configuration to pick");
    this.state.goal = [...robot.ghost_q];
    this.notify();
    return this.state.goal;
  }

  nextSnapshot(): Promise<SnapshotFrame> {
    return new Promise((resolve) => {
      const prev = this.client.onSnapshot;
      this.client.onSnapshot = (snap) => {
        this.client.onSnapshot = prev;
        prev?.(snap);
        resolve(snap);
      };
    });
  }

  async commitGhost(): Promise<string> {
    const result = await this.client.expectOk("commit_ghost", { robot: this.state.robotId });
    return result.handle as string;
  }

  async setGripper(state: "open" | "closed"): Promise<void> {
    await this.client.expectOk("set_gripper", { robot: this.state.robotId, state });
  }

  async startRecording(): Promise<void> {
    await this.client.expectOk("record_start", { robot: this.state.robotId });
    this.state.recording = true;
    this.notify();
  }

  async stopRecording(): Promise<string> {
    const result = await this.client.expectOk("record_stop", { robot: this.state.robotId });
    this.state.recording = false;
    this.state.lastTrajectoryId = result.trajectory_id as string;
    this.notify();
    return this.state.lastTrajectoryId!;
  }

  canTrain(): boolean {
    return this.state.lastTrajectoryId !== null;
  }

  async train(): Promise<string> {
    if (!this.canTrain()) throw new Error("record a demonstration first");
    const result = await this.client.expectOk("train_dmp", {
      trajectory_id: this.state.lastTrajectoryId,
    });
    this.state.lastModelId = result.model_id as string;
    this.notify();
    return this.state.lastModelId!;
  }

  canExecute(): boolean {
    return this.state.lastModelId !== null && this.state.goal !== null && !this.state.busy;
  }

  async executeToGoal(): Promise<string> {
    if (this.state.lastModelId === null) throw new Error("train a model first");
    if (this.state.goal === null) throw new Error("place a goal first");
    const result = await this.client.expectOk("rollout_dmp", {
      model_id: this.state.lastModelId,
      robot: this.state.robotId,
      goal: this.state.goal,
    });
    return result.handle as string;
  }

  /** Resolve when the robot goes idle (active handle null in a snapshot). */
  async waitForIdle(timeoutMs = 60_000): Promise<SnapshotFrame> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const snap = await this.nextSnapshot();
      const robot = snap.robots.find((r) => r.id === this.state.robotId);
      if (robot && robot.active === null) return snap;
      if (Date.now() > deadline) throw new Error("robot never went idle");
    }
  }
}
