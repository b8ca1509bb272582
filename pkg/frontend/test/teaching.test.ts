// The full teaching loop through the UI controller against a live server:
// mode toggles, tracked joint drags, translucent ghost with a stationary
// body, then record -> train -> goal-drag -> execute ending at the goal.
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { TeachingController } from "../src/controller";
import { GHOST_OPACITY, buildRenderNodes } from "../src/scenegraph";
import { SnapshotFrame } from "../src/protocol";
import { RunningServer, connectClient, sleep, startServer } from "./server_fixture";

let fastServer: RunningServer;

beforeAll(async () => {
  fastServer = await startServer(15.0);
});

afterAll(async () => {
  await fastServer.stop();
});

async function waitFor(
  controller: TeachingController,
  predicate: (snap: SnapshotFrame) => boolean,
  timeoutMs = 30_000,
): Promise<SnapshotFrame> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const snap = await controller.nextSnapshot();
    if (predicate(snap)) return snap;
    if (Date.now() > deadline) throw new Error("condition never reached");
  }
}

function robotOf(snap: SnapshotFrame) {
  return snap.robots[0];
}

describe("teaching loop (criterion: live UI workflow)", () => {
  it("drives the full record/train/goal/execute loop", async () => {
    const client = await connectClient(fastServer.url, "loop");
    const controller = new TeachingController(client);
    await controller.init();

    // -- mode toggle reflected in snapshots
    await controller.setMode("free_drive");
    await waitFor(controller, (s) => robotOf(s).mode === "free_drive");
    expect(controller.state.mode).toBe("free_drive");

    // -- drag stream is throttled to <= 60 commands/s on the wire
    const before = client.commandsSent;
    const streamStart = Date.now();
    while (Date.now() - streamStart < 500) {
      controller.dragJoint(0, 0.5 * Math.random());
      await sleep(2);
    }
    const elapsedS = (Date.now() - streamStart) / 1000;
    const sent = client.commandsSent - before;
    expect(sent).toBeLessThanOrEqual(Math.ceil(elapsedS * 60) + 2);
    expect(sent).toBeGreaterThan(3);

    // -- joint drag visibly tracked: robot follows to the final target
    controller.dragJoint(0, 0.5);
    await waitFor(controller, (s) => Math.abs(robotOf(s).q[0] - 0.5) < 5e-3);

    // -- record a demonstration: move joint 1 while recording
    await controller.startRecording();
    await waitFor(controller, (s) => robotOf(s).recording);
    controller.dragJoint(1, -0.4);
    await waitFor(controller, (s) => Math.abs(robotOf(s).q[1] + 0.4) < 1e-4);
    await waitFor(controller, (s) =>
      Math.max(...robotOf(s).qd.map(Math.abs)) < 1e-6);
    const trajectoryId = await controller.stopRecording();
    expect(trajectoryId).toMatch(/^t-/);
    expect(controller.canTrain()).toBe(true);

    // -- train on the recording
    const modelId = await controller.train();
    expect(modelId).toMatch(/^m-/);

    // -- ghost drag: translucent double moves, body provably stationary
    await controller.setMode("ghost_drive");
    const entry = await waitFor(controller, (s) => robotOf(s).mode === "ghost_drive");
    const bodyAtEntry = [...robotOf(entry).q];
    controller.dragJoint(0, bodyAtEntry[0] + 0.3);
    const ghostSnap = await waitFor(controller, (s) => {
      const g = robotOf(s).ghost_q;
      return g !== null && Math.abs(g[0] - (bodyAtEntry[0] + 0.3)) < 1e-9;
    });
    // several consecutive snapshots: ghost displaced, body still
    let drift = 0;
    for (let i = 0; i < 5; i += 1) {
      const snap = await controller.nextSnapshot();
      const robot = robotOf(snap);
      expect(robot.ghost_q![0]).toBeCloseTo(bodyAtEntry[0] + 0.3, 9);
      drift = Math.max(drift, ...robot.q.map((v, j) => Math.abs(v - bodyAtEntry[j])));
    }
    expect(drift).toBeLessThan(1e-6);

    // the ghost renders as a translucent double alongside the opaque body
    const nodes = buildRenderNodes(client.scene!, ghostSnap);
    const ghostNodes = nodes.filter((n) => n.key.includes("/ghost/"));
    expect(ghostNodes.length).toBeGreaterThan(0);
    expect(ghostNodes.every((n) => n.opacity === GHOST_OPACITY)).toBe(true);
    expect(nodes.some((n) => !n.key.includes("/ghost/") && n.opacity === 1)).toBe(true);

    // -- the ghost configuration becomes the goal marker
    const goal = await controller.pickGoalFromGhost();
    expect(goal[0]).toBeCloseTo(bodyAtEntry[0] + 0.3, 6);

    // -- execute: the rolled-out motion ends at the goal marker
    await controller.setMode("hold");
    expect(controller.canExecute()).toBe(true);
    const handle = await controller.executeToGoal();
    expect(handle).toMatch(/^pb-/);
    await waitFor(controller, (s) => robotOf(s).active !== null, 10_000);
    const done = await controller.waitForIdle();
    const endErr = Math.max(
      ...robotOf(done).q.map((v, j) => Math.abs(v - goal[j])));
    expect(endErr).toBeLessThan(1e-2);

    // every command acked exactly once across the whole session
    await sleep(100);
    expect(client.acksReceived).toBe(client.commandsSent);
    expect(client.duplicateAcks).toBe(0);
    client.close();
  });

  it("surfaces error acks without mutating workflow state", async () => {
    const client = await connectClient(fastServer.url, "errs");
    const controller = new TeachingController(client);
    await controller.init();
    // execute with no model: local guard
    await expect(controller.executeToGoal()).rejects.toThrow(/train a model/);
    // busy-style engine error surfaces as lastError through the drag path
    await controller.setMode("hold");
    controller.dragJoint(0, 0.4); // hold mode: engine answers wrong_mode
    await sleep(300);
    expect(controller.state.lastError).toMatch(/wrong_mode/);
    expect(controller.state.lastTrajectoryId).toBeNull();
    client.close();
  });
});

describe("snapshot round trip at realtime speed", () => {
  it("command ack plus next snapshot arrive within 100 ms on loopback", async () => {
    const server = await startServer(1.0);
    try {
      const client = await connectClient(server.url, "rt");
      const controller = new TeachingController(client);
      await controller.init();
      await controller.setMode("free_drive");
      await controller.nextSnapshot();

      const samples: number[] = [];
      for (let k = 0; k < 5; k += 1) {
        const t0 = Date.now();
        await client.expectOk("drag_joint", { robot: "arm", joint: 0, target: 0.1 * k });
        await controller.nextSnapshot();
        samples.push(Date.now() - t0);
      }
      samples.sort((a, b) => a - b);
      const median = samples[Math.floor(samples.length / 2)];
      expect(median).toBeLessThan(100);
      client.close();
    } finally {
      await server.stop();
    }
  });
});
