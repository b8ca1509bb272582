// Browser entry: connect, subscribe, and wire the render loop + panel.
// Configuration: ?server=ws://host:port (defaults to ws://127.0.0.1:8765).
import { WorkbenchClient } from "./client";
import { TeachingController } from "./controller";
import { WorkbenchRenderer } from "./render3d";
import { buildRenderNodes } from "./scenegraph";
import { Panel, toast } from "./ui";

async function start(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const url = params.get("server") ?? "ws://127.0.0.1:8765";

  const client = await WorkbenchClient.connect(url);
  client.onConnectionError = (code, message) => toast(`${code}: ${message}`);

  const controller = new TeachingController(client);
  await controller.init(params.get("robot") ?? undefined);

  const viewport = document.getElementById("viewport")!;
  const renderer = new WorkbenchRenderer(viewport);
  const panel = new Panel(controller);
  panel.build();

  const prevOnSnapshot = client.onSnapshot;
  client.onSnapshot = (snap) => {
    prevOnSnapshot?.(snap);
    panel.syncFromSnapshot(snap);
  };

  const animate = () => {
    // render exactly the latest snapshot; stale frames are simply skipped
    if (client.scene && client.latestSnapshot) {
      renderer.apply(buildRenderNodes(client.scene, client.latestSnapshot));
    }
    renderer.frame();
    requestAnimationFrame(animate);
  };
  animate();
  toast(`connected to ${url}`);
}

start().catch((err) => {
  document.body.innerHTML = `<pre class="fatal">${String(err)}</pre>`;
});
