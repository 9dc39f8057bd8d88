/**
 * Browser bootstrap: wires the controller to a two-canvas layout and the
 * real fetch.  All rendering data comes from the pure view-model builders;
 * this file only draws it.
 */

import { SessionClient } from "./api.js";
import { SessionController, View } from "./controller.js";
import { ComparisonView, Panel } from "./render.js";

const WIDTH = 360;
const HEIGHT = 360;

function drawPanel(canvas: HTMLCanvasElement, panel: Panel): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const colors: Record<string, string> = { reference: "#888", candidate: "#0a6", item: "#0a6" };
  for (const line of panel.polylines) {
    ctx.strokeStyle = colors[line.label] ?? "#000";
    ctx.beginPath();
    line.points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
    ctx.stroke();
  }
}

function makeView(root: HTMLElement): View {
  const canvasA = root.querySelector<HTMLCanvasElement>("#panel-a")!;
  const canvasB = root.querySelector<HTMLCanvasElement>("#panel-b")!;
  const captionA = root.querySelector<HTMLElement>("#caption-a")!;
  const captionB = root.querySelector<HTMLElement>("#caption-b")!;
  const estimateEl = root.querySelector<HTMLElement>("#estimate")!;
  const statusEl = root.querySelector<HTMLElement>("#status")!;
  const buttonA = root.querySelector<HTMLButtonElement>("#choose-a")!;
  const buttonB = root.querySelector<HTMLButtonElement>("#choose-b")!;

  return {
    showComparison(view: ComparisonView) {
      drawPanel(canvasA, view.panels[0]);
      drawPanel(canvasB, view.panels[1]);
      captionA.textContent = view.panels[0].caption;
      captionB.textContent = view.panels[1].caption;
      statusEl.textContent = `query ${view.queryId}  ${view.scenarios.join("; ")}`;
    },
    showEstimate(lines: string[]) {
      estimateEl.textContent = lines.join("\n");
    },
    setButtonsEnabled(enabled: boolean) {
      buttonA.disabled = !enabled;
      buttonB.disabled = !enabled;
    },
    showError(message: string, retryable: boolean) {
      statusEl.textContent = retryable ? `${message} (retry)` : message;
    },
    showDone() {
      statusEl.textContent = "session complete";
      buttonA.disabled = true;
      buttonB.disabled = true;
    },
  };
}

export async function boot(root: HTMLElement, baseUrl: string): Promise<void> {
  const client = new SessionClient(baseUrl);
  const params = new URLSearchParams(window.location.search);
  let sessionId = params.get("session");
  if (!sessionId) {
    const created = await client.createSession("gain_tuning", {});
    sessionId = created.id;
  }
  const controller = new SessionController(client, sessionId, makeView(root));
  root.querySelector("#choose-a")!.addEventListener("click", () => controller.choose("A"));
  root.querySelector("#choose-b")!.addEventListener("click", () => controller.choose("B"));
  window.addEventListener("keydown", (e) => controller.onKey(e.key));
  await controller.start();
}

declare global {
  interface Window {
    prefsynthBoot: typeof boot;
  }
}

if (typeof window !== "undefined") {
  window.prefsynthBoot = boot;
}

export { WIDTH, HEIGHT };
