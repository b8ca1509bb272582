// DOM panel wiring: mode toggles, per-joint drag sliders, teaching buttons,
// and error toasts. Buttons disable themselves when their preconditions are
// unmet; slider positions resync from snapshots so the panel always shows
// simulation truth.
import { TeachingController, TeachingState } from "./controller";
import { SnapshotFrame } from "./protocol";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export function toast(message: string): void {
  const box = el<HTMLDivElement>("toasts");
  const item = document.createElement("div");
  item.className = "toast";
  item.textContent = message;
  box.appendChild(item);
  setTimeout(() => item.remove(), 4000);
}

export class Panel {
  private sliders: HTMLInputElement[] = [];
  private dragging = new Set<number>();

  constructor(private readonly controller: TeachingController) {}

  build(): void {
    const robot = this.controller.robot;
    const joints = el<HTMLDivElement>("joints");
    robot.joint_names.forEach((name, j) => {
      const row = document.createElement("div");
      row.className = "joint-row";
      const label = document.createElement("label");
      label.textContent = name;
      const slider = document.createElement("input");
      slider.type = "range";
      slider.min = String(Math.max(robot.limits.lower[j], -Math.PI));
      slider.max = String(Math.min(robot.limits.upper[j], Math.PI));
      slider.step = "0.001";
      slider.value = "0";
      slider.addEventListener("pointerdown", () => this.dragging.add(j));
      slider.addEventListener("pointerup", () => this.dragging.delete(j));
      slider.addEventListener("input", () => {
        this.controller.dragJoint(j, parseFloat(slider.value));
      });
      const value = document.createElement("span");
      value.className = "joint-value";
      row.append(label, slider, value);
      joints.appendChild(row);
      this.sliders.push(slider);
    });

    el<HTMLButtonElement>("mode-hold").onclick = () => this.guard(() =>
      this.controller.setMode("hold"));
    el<HTMLButtonElement>("mode-free").onclick = () => this.guard(() =>
      this.controller.setMode("free_drive"));
    el<HTMLButtonElement>("mode-ghost").onclick = () => this.guard(() =>
      this.controller.setMode("ghost_drive"));
    el<HTMLButtonElement>("commit-ghost").onclick = () => this.guard(() =>
      this.controller.commitGhost());
    el<HTMLButtonElement>("grip-open").onclick = () => this.guard(() =>
      this.controller.setGripper("open"));
    el<HTMLButtonElement>("grip-close").onclick = () => this.guard(() =>
      this.controller.setGripper("closed"));
    el<HTMLButtonElement>("record").onclick = () => this.guard(async () => {
      if (this.controller.state.recording) {
        const id = await this.controller.stopRecording();
        toast(`recorded ${id}`);
      } else {
        await this.controller.startRecording();
      }
    });
    el<HTMLButtonElement>("train").onclick = () => this.guard(async () => {
      const id = await this.controller.train();
      toast(`trained ${id}`);
    });
    el<HTMLButtonElement>("pick-goal").onclick = () => this.guard(async () => {
      await this.controller.pickGoalFromGhost();
      toast("goal set from ghost");
    });
    el<HTMLButtonElement>("execute").onclick = () => this.guard(() =>
      this.controller.executeToGoal());

    this.controller.onStateChange = (state) => this.refresh(state);
    this.refresh(this.controller.state);
  }

  private guard(action: () => Promise<unknown>): void {
    action().catch((err) => toast(String(err?.message ?? err)));
  }

  syncFromSnapshot(snap: SnapshotFrame): void {
    const robot = snap.robots.find((r) => r.id === this.controller.state.robotId);
    if (!robot) return;
    const shown = robot.mode === "ghost_drive" && robot.ghost_q ? robot.ghost_q : robot.q;
    this.sliders.forEach((slider, j) => {
      if (!this.dragging.has(j)) slider.value = String(shown[j]);
      const value = slider.parentElement?.querySelector(".joint-value");
      if (value) value.textContent = robot.q[j].toFixed(3);
    });
    el<HTMLSpanElement>("status").textContent =
      `t=${snap.time.toFixed(2)}s mode=${robot.mode}` +
      `${robot.recording ? " REC" : ""}${robot.active ? ` [${robot.active.kind}]` : ""}`;
  }

  private refresh(state: TeachingState): void {
    el<HTMLButtonElement>("record").textContent =
      state.recording ? "stop recording" : "start recording";
    el<HTMLButtonElement>("train").disabled = !this.controller.canTrain();
    el<HTMLButtonElement>("execute").disabled = !this.controller.canExecute();
    el<HTMLButtonElement>("commit-ghost").disabled = state.mode !== "ghost_drive";
    el<HTMLButtonElement>("pick-goal").disabled = state.mode !== "ghost_drive";
    for (const [id, mode] of [["mode-hold", "hold"], ["mode-free", "free_drive"],
                              ["mode-ghost", "ghost_drive"]] as const) {
      el<HTMLButtonElement>(id).classList.toggle("active", state.mode === mode);
    }
    const slidersEnabled = state.mode !== "hold";
    this.sliders.forEach((slider) => { slider.disabled = !slidersEnabled; });
  }
}
