/** DOM wiring: image upload, model panel, seed painting, overlay display. */

import { ModelConfig, SessionClient } from "./api.js";
import { labelColor } from "./palette.js";
import { Stroke } from "./strokes.js";
import { UiState, validateModelConfig } from "./state.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

let state: UiState | null = null;
let imageBitmap: ImageBitmap | null = null;
let overlayBitmap: ImageBitmap | null = null;
let currentStroke: Stroke | null = null;

const fileInput = $<HTMLInputElement>("file");
const modelSelect = $<HTMLSelectElement>("model");
const betaField = $<HTMLInputElement>("beta");
const betaRow = $<HTMLElement>("beta-row");
const kField = $<HTMLInputElement>("k");
const labelField = $<HTMLInputElement>("label");
const radiusField = $<HTMLInputElement>("radius");
const zoomField = $<HTMLInputElement>("zoom");
const opacityField = $<HTMLInputElement>("opacity");
const segmentButton = $<HTMLButtonElement>("segment");
const staleBadge = $<HTMLElement>("stale");
const statusLine = $<HTMLElement>("status");
const canvas = $<HTMLCanvasElement>("view");
const ctx = canvas.getContext("2d")!;

function status(text: string): void {
  statusLine.textContent = text;
}

function currentModel(): ModelConfig {
  const config: ModelConfig = {
    model: modelSelect.value as ModelConfig["model"],
    k: parseInt(kField.value || "1", 10),
  };
  if (config.model === "grady") config.beta = parseFloat(betaField.value);
  return config;
}

function refreshModelPanel(): void {
  // beta only exists for the baseline weight
  betaRow.style.display = modelSelect.value === "grady" ? "" : "none";
}

function refreshControls(): void {
  const ready = state !== null;
  segmentButton.disabled = !ready || !state!.canSegment();
  segmentButton.title = segmentButton.disabled
    ? "paint seeds for at least 2 labels first"
    : "";
  staleBadge.style.display = ready && state!.isStale() ? "" : "none";
}

function draw(): void {
  if (!state || !imageBitmap) return;
  const zoom = Math.max(1, Math.round(parseFloat(zoomField.value || "1")));
  state.zoom = zoom;
  canvas.width = state.width * zoom;
  canvas.height = state.height * zoom;
  ctx.imageSmoothingEnabled = false; // nearest-neighbor at integer zoom
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(imageBitmap, 0, 0, canvas.width, canvas.height);
  if (overlayBitmap) {
    ctx.globalAlpha = parseFloat(opacityField.value || "0.5");
    ctx.drawImage(overlayBitmap, 0, 0, canvas.width, canvas.height);
    ctx.globalAlpha = 1;
  }
  for (const seed of state.seeds()) {
    ctx.fillStyle = labelColor(seed.label);
    ctx.fillRect(seed.x * zoom, seed.y * zoom, zoom, zoom);
  }
}

function canvasToImage(ev: PointerEvent): [number, number] {
  const rect = canvas.getBoundingClientRect();
  const zoom = state?.zoom ?? 1;
  return [(ev.clientX - rect.left) / zoom, (ev.clientY - rect.top) / zoom];
}

fileInput.addEventListener("change", async () => {
  const file = fileInput.files?.[0];
  if (!file) return;
  const config = currentModel();
  const problem = validateModelConfig(config);
  if (problem) {
    status(problem);
    return;
  }
  try {
    const client = await SessionClient.create("", file, config);
    const summary = await client.summary();
    state = new UiState(client, summary.width, summary.height, {
      onSeedsRejected: (detail) => status(`seeds rejected: ${detail} (stroke undone)`),
      onSynced: () => refreshControls(),
    });
    imageBitmap = await createImageBitmap(file);
    overlayBitmap = null;
    status(`session ${client.id.slice(0, 8)}: ${summary.width}x${summary.height}`);
    draw();
    refreshControls();
  } catch (err) {
    status(String(err));
  }
});

modelSelect.addEventListener("change", () => {
  refreshModelPanel();
  void pushModel();
});
betaField.addEventListener("change", () => void pushModel());
kField.addEventListener("change", () => void pushModel());

async function pushModel(): Promise<void> {
  if (!state) return;
  const config = currentModel();
  const problem = validateModelConfig(config);
  if (problem) {
    status(problem);
    return;
  }
  await state.syncModel(config);
  refreshControls();
}

canvas.addEventListener("pointerdown", (ev) => {
  if (!state) return;
  canvas.setPointerCapture(ev.pointerId);
  currentStroke = {
    label: parseInt(labelField.value || "0", 10),
    radius: Math.max(1, parseInt(radiusField.value || "1", 10)),
    points: [canvasToImage(ev)],
  };
});

canvas.addEventListener("pointermove", (ev) => {
  if (!currentStroke) return;
  currentStroke.points.push(canvasToImage(ev));
  draw();
});

canvas.addEventListener("pointerup", () => {
  if (!state || !currentStroke) return;
  state.addStroke(currentStroke);
  currentStroke = null;
  draw();
  refreshControls();
});

segmentButton.addEventListener("click", async () => {
  if (!state) return;
  segmentButton.disabled = true;
  status("solving...");
  try {
    const result = await state.segment();
    const { bytes, stale } = await state.client.fetchResult("overlay.png");
    state.noteServerStale(stale);
    overlayBitmap = await createImageBitmap(new Blob([bytes], { type: "image/png" }));
    status(`solved revision ${result.revision} in ${result.seconds.toFixed(2)}s`);
  } catch (err) {
    const message = String(err);
    status(message.includes("409") || message.includes("already running")
      ? "solve in progress"
      : message);
  }
  draw();
  refreshControls();
});

opacityField.addEventListener("input", draw);
zoomField.addEventListener("input", draw);
refreshModelPanel();
refreshControls();
