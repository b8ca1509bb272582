// Protocol conformance against a live server: every documented message type
// is exercised, per-connection FIFO ordering holds, and every command gets
// exactly one ack.
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { AckFrame, parseServerFrame } from "../src/protocol";
import { RunningServer, connectClient, startServer } from "./server_fixture";

let server: RunningServer;

beforeAll(async () => {
  server = await startServer(40.0);
});

afterAll(async () => {
  await server.stop();
});

describe("protocol conformance", () => {
  it("exercises every documented command type with exactly one ack each", async () => {
    const client = await connectClient(server.url, "conf");

    const scenePromise = new Promise((resolve) => {
      client.onScene = resolve;
      if (client.scene) resolve(client.scene);
    });
    expect((await client.command("subscribe")).ok).toBe(true);
    expect(await scenePromise).toBeTruthy();

    expect((await client.command("set_mode",
      { robot: "arm", mode: "free_drive" })).ok).toBe(true);
    expect((await client.command("drag_joint",
      { robot: "arm", joint: 0, target: 0.4 })).ok).toBe(true);

    const dragEe = await client.command("drag_ee", {
      robot: "arm", position: [0.3, 0.25, 0.6],
    });
    expect(dragEe.ok).toBe(true);
    expect((dragEe.result!.q as number[]).length).toBe(6);
    expect(dragEe.result!.converged).toBe(true);

    expect((await client.command("set_mode",
      { robot: "arm", mode: "ghost_drive" })).ok).toBe(true);
    expect((await client.command("drag_joint",
      { robot: "arm", joint: 1, target: -0.5 })).ok).toBe(true);
    const commit = await client.command("commit_ghost", { robot: "arm" });
    expect(commit.ok).toBe(true);
    expect(commit.result!.handle).toMatch(/^pb-/);

    expect((await client.command("set_gripper",
      { robot: "arm", state: "closed" })).ok).toBe(true);
    expect((await client.command("set_gripper",
      { robot: "arm", state: "open" })).ok).toBe(true);

    expect((await client.command("record_start",
      { robot: "arm", sample_every: 10 })).ok).toBe(true);
    // let some simulated motion accumulate
    await new Promise((r) => setTimeout(r, 300));
    const stop = await client.command("record_stop", { robot: "arm" });
    expect(stop.ok).toBe(true);
    const trajectoryId = stop.result!.trajectory_id as string;

    const train = await client.command("train_dmp", {
      trajectory_id: trajectoryId, config: { n_basis: 15 },
    });
    expect(train.ok).toBe(true);
    const modelId = train.result!.model_id as string;

    const rolled = await client.command("rollout_dmp", {
      model_id: modelId, goal: [0.2, -0.3, 0.1, 0, 0, 0],
    });
    expect(rolled.ok).toBe(true);
    expect(rolled.result!.trajectory_id).toBeTruthy();

    expect((await client.command("save_trajectory",
      { trajectory_id: trajectoryId })).ok).toBe(true);
    expect((await client.command("load_trajectory",
      { trajectory_id: trajectoryId })).ok).toBe(true);
    expect((await client.command("save_model", { model_id: modelId })).ok).toBe(true);
    expect((await client.command("load_model", { model_id: modelId })).ok).toBe(true);

    // a busy-period program: completes quickly at 40x
    const program = await client.command("run_program", {
      robot: "arm",
      program: [{ type: "gripper_close" }, { type: "gripper_open" }],
    });
    expect(program.ok).toBe(true);

    // exactly one ack per command over the whole session
    expect(client.acksReceived).toBe(client.commandsSent);
    expect(client.duplicateAcks).toBe(0);
    client.close();
  });

  it("answers unknown commands and bad payloads with error acks", async () => {
    const client = await connectClient(server.url, "err");
    const unknown = await client.command("warp" as never, {});
    expect(unknown.ok).toBe(false);
    expect(unknown.error!.code).toBe("unknown_command");

    const badRobot = await client.command("drag_joint",
      { robot: "nobody", joint: 0, target: 0 });
    expect(badRobot.ok).toBe(false);
    expect(badRobot.error!.code).toBe("unknown_robot");

    const badPayload = await client.command("drag_joint", { robot: "arm" });
    expect(badPayload.ok).toBe(false);
    expect(badPayload.error!.code).toBe("validation_error");
    client.close();
  });

  it("keeps the connection open after a malformed frame", async () => {
    const sock = new WebSocket(server.url);
    await new Promise((resolve) => { sock.onopen = resolve; });
    const frames: string[] = [];
    sock.onmessage = (ev) => frames.push(String(ev.data));
    sock.send("{definitely not json");
    await new Promise((r) => setTimeout(r, 200));
    const parsed = frames.map((f) => parseServerFrame(f));
    expect(parsed.some((f) => f.type === "error"
      && f.error.code === "malformed_frame")).toBe(true);
    // still alive: a valid command gets an ack
    sock.send(JSON.stringify({ id: "x1", type: "subscribe", payload: {} }));
    await new Promise((r) => setTimeout(r, 300));
    const acks = frames.map((f) => parseServerFrame(f))
      .filter((f): f is AckFrame => f.type === "ack");
    expect(acks.some((a) => a.id === "x1" && a.ok)).toBe(true);
    sock.close();
  });

  it("applies commands in per-connection FIFO order", async () => {
    const sock = new WebSocket(server.url);
    await new Promise((resolve) => { sock.onopen = resolve; });
    const ackOrder: string[] = [];
    const done = new Promise<void>((resolve) => {
      sock.onmessage = (ev) => {
        const frame = parseServerFrame(String(ev.data));
        if (frame.type === "ack") {
          ackOrder.push(frame.id);
          if (ackOrder.length === 31) resolve();
        }
      };
    });
    const sent: string[] = [];
    sock.send(JSON.stringify({ id: "m", type: "set_mode",
      payload: { robot: "arm", mode: "free_drive" } }));
    sent.push("m");
    for (let k = 0; k < 30; k += 1) {
      const id = `f${k}`;
      sent.push(id);
      sock.send(JSON.stringify({ id, type: "drag_joint",
        payload: { robot: "arm", joint: 0, target: 0.01 * k } }));
    }
    await done;
    expect(ackOrder).toEqual(sent);
    sock.close();
  });

  it("rejects a reused command id", async () => {
    const sock = new WebSocket(server.url);
    await new Promise((resolve) => { sock.onopen = resolve; });
    const acks: AckFrame[] = [];
    const got2 = new Promise<void>((resolve) => {
      sock.onmessage = (ev) => {
        const frame = parseServerFrame(String(ev.data));
        if (frame.type === "ack") {
          acks.push(frame);
          if (acks.length === 2) resolve();
        }
      };
    });
    const envelope = { id: "dup", type: "set_mode",
      payload: { robot: "arm", mode: "hold" } };
    sock.send(JSON.stringify(envelope));
    sock.send(JSON.stringify(envelope));
    await got2;
    expect(acks[0].ok).toBe(true);
    expect(acks[1].ok).toBe(false);
    expect(acks[1].error!.code).toBe("validation_error");
    sock.close();
  });

  it("streams consistent snapshots with strictly increasing ticks", async () => {
    const client = await connectClient(server.url, "snap");
    await client.expectOk("subscribe");
    const ticks: number[] = [];
    await new Promise<void>((resolve) => {
      client.onSnapshot = (snap) => {
        ticks.push(snap.tick);
        // snapshot consistency: one pose per chain link, q matches dof
        expect(snap.robots[0].link_poses.length).toBeGreaterThan(0);
        expect(snap.robots[0].q).toHaveLength(6);
        if (ticks.length >= 8) resolve();
      };
    });
    for (let i = 1; i < ticks.length; i += 1) {
      expect(ticks[i]).toBeGreaterThan(ticks[i - 1]);
    }
    client.close();
  });
});
