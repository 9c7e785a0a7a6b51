import "./style.css";
import { AnnotationStore, polygonProblem, type Point, type Tool } from "./annotations";
import { ApiClient } from "./api";
import { runAndDisplay, type RunView } from "./controller";
import { identityView, imageToScreen, panBy, screenToImage, zoomAround, type ViewTransform } from "./view";

const CLASS_COLORS = [
  "#ff0000", "#00ff00", "#0000ff", "#ffff00",
  "#ff00ff", "#00ffff", "#ff8000", "#ffffff",
];
const CLASS_NAMES = ["background", "object", "class 2", "class 3", "class 4", "class 5", "class 6", "class 7"];

const app = document.querySelector<HTMLDivElement>("#app")!;
app.innerHTML = `
  <header>
    <h1>pccseg</h1>
    <input type="file" id="file" accept="image/png,image/jpeg" />
    <select id="class"></select>
    <label>brush <input type="range" id="brush" min="1" max="24" value="4" /></label>
    <button id="tool-brush" class="tool selected">Brush</button>
    <button id="tool-polygon" class="tool">Polygon</button>
    <button id="tool-pan" class="tool">Pan</button>
    <button id="undo" disabled>Undo</button>
    <button id="redo" disabled>Redo</button>
    <button id="clear">Clear</button>
    <select id="mode"><option value="proposed">proposed</option><option value="reference">reference</option></select>
    <button id="run" disabled>Run</button>
  </header>
  <div id="status-row">
    <progress id="progress" max="1" value="0"></progress>
    <label>overlay opacity <input type="range" id="opacity" min="0" max="100" value="50" /></label>
    <label><input type="checkbox" id="show-mask" /> show mask</label>
    <span id="error"></span>
  </div>
  <div id="stage">
    <img id="base" alt="" />
    <img id="result" alt="" />
    <canvas id="paint"></canvas>
  </div>
`;

const fileInput = document.querySelector<HTMLInputElement>("#file")!;
const classSelect = document.querySelector<HTMLSelectElement>("#class")!;
const brushInput = document.querySelector<HTMLInputElement>("#brush")!;
const undoBtn = document.querySelector<HTMLButtonElement>("#undo")!;
const redoBtn = document.querySelector<HTMLButtonElement>("#redo")!;
const clearBtn = document.querySelector<HTMLButtonElement>("#clear")!;
const runBtn = document.querySelector<HTMLButtonElement>("#run")!;
const modeSelect = document.querySelector<HTMLSelectElement>("#mode")!;
const progressBar = document.querySelector<HTMLProgressElement>("#progress")!;
const opacityInput = document.querySelector<HTMLInputElement>("#opacity")!;
const showMaskInput = document.querySelector<HTMLInputElement>("#show-mask")!;
const errorSpan = document.querySelector<HTMLSpanElement>("#error")!;
const stage = document.querySelector<HTMLDivElement>("#stage")!;
const baseImg = document.querySelector<HTMLImageElement>("#base")!;
const resultImg = document.querySelector<HTMLImageElement>("#result")!;
const canvas = document.querySelector<HTMLCanvasElement>("#paint")!;
const ctx = canvas.getContext("2d")!;

CLASS_NAMES.forEach((name, i) => {
  const option = document.createElement("option");
  option.value = String(i);
  option.textContent = `${i}: ${name}`;
  classSelect.append(option);
});
classSelect.value = "1";

const api = new ApiClient("");
const store = new AnnotationStore();
let view: ViewTransform = identityView();
let tool: Tool = { kind: "brush", classIndex: 1 };
let sessionId: string | null = null;
let imageSize: [number, number] | null = null;
let drawing = false;
let panning: Point | null = null;
let running = false;
let overlayUrl: string | null = null;
let maskUrl: string | null = null;

function setError(message: string) {
  errorSpan.textContent = message;
}

function refreshButtons() {
  undoBtn.disabled = !store.canUndo();
  redoBtn.disabled = !store.canRedo();
  runBtn.disabled = running || sessionId === null || store.classesPresent().size < 2;
  for (const [id, kind] of [["#tool-brush", "brush"], ["#tool-polygon", "polygon"], ["#tool-pan", "pan"]] as const) {
    document.querySelector(id)!.classList.toggle("selected", tool.kind === kind);
  }
}

function redraw() {
  if (!imageSize) return;
  canvas.width = stage.clientWidth;
  canvas.height = stage.clientHeight;
  const placeLayer = (img: HTMLImageElement) => {
    img.style.transform = `translate(${view.offsetX}px, ${view.offsetY}px) scale(${view.scale})`;
    img.style.transformOrigin = "0 0";
  };
  placeLayer(baseImg);
  placeLayer(resultImg);
  ctx.clearRect(0, 0, canvas.width, canvas.height);

  for (const stroke of store.getStrokes()) {
    ctx.strokeStyle = CLASS_COLORS[stroke.classIndex % CLASS_COLORS.length];
    ctx.lineCap = "round";
    ctx.lineJoin = "round";
    ctx.lineWidth = stroke.brushRadius * 2 * view.scale;
    ctx.beginPath();
    stroke.points.forEach(([ix, iy], i) => {
      const [sx, sy] = imageToScreen(view, ix, iy);
      if (i === 0) ctx.moveTo(sx, sy);
      else ctx.lineTo(sx, sy);
    });
    if (stroke.points.length === 1) {
      const [sx, sy] = imageToScreen(view, ...stroke.points[0]);
      ctx.lineTo(sx + 0.01, sy);
    }
    ctx.stroke();
  }

  const drawPoly = (points: readonly Point[], close: boolean, color: string) => {
    if (points.length === 0) return;
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    points.forEach(([ix, iy], i) => {
      const [sx, sy] = imageToScreen(view, ix, iy);
      if (i === 0) ctx.moveTo(sx, sy);
      else ctx.lineTo(sx, sy);
    });
    if (close) ctx.closePath();
    ctx.stroke();
  };
  const polygon = store.getPolygon();
  if (polygon) drawPoly(polygon, true, "#ffd700");
  drawPoly(store.getDraftPolygon(), false, "#ffa500");
  refreshButtons();
}

function pointerImagePoint(ev: PointerEvent | MouseEvent): Point {
  const rect = canvas.getBoundingClientRect();
  return screenToImage(view, ev.clientX - rect.left, ev.clientY - rect.top);
}

fileInput.addEventListener("change", async () => {
  const file = fileInput.files?.[0];
  if (!file) return;
  setError("");
  try {
    sessionId = await api.createSession(file, file.name);
  } catch (err) {
    setError(String(err));
    return;
  }
  const url = URL.createObjectURL(file);
  baseImg.onload = () => {
    imageSize = [baseImg.naturalWidth, baseImg.naturalHeight];
    view = identityView();
    resultImg.src = "";
    resultImg.style.display = "none";
    store.clear();
    redraw();
  };
  baseImg.src = url;
});

document.querySelector("#tool-brush")!.addEventListener("click", () => {
  tool = { kind: "brush", classIndex: Number(classSelect.value) };
  refreshButtons();
});
document.querySelector("#tool-polygon")!.addEventListener("click", () => {
  tool = { kind: "polygon" };
  refreshButtons();
});
document.querySelector("#tool-pan")!.addEventListener("click", () => {
  tool = { kind: "pan" };
  refreshButtons();
});
classSelect.addEventListener("change", () => {
  if (tool.kind === "brush") tool = { kind: "brush", classIndex: Number(classSelect.value) };
});

canvas.addEventListener("pointerdown", (ev) => {
  if (!imageSize) return;
  canvas.setPointerCapture(ev.pointerId);
  if (tool.kind === "pan") {
    panning = [ev.clientX, ev.clientY];
    return;
  }
  if (tool.kind === "brush") {
    drawing = true;
    store.beginStroke(tool.classIndex, Number(brushInput.value), pointerImagePoint(ev));
    redraw();
  }
});

canvas.addEventListener("pointermove", (ev) => {
  if (panning) {
    view = panBy(view, ev.clientX - panning[0], ev.clientY - panning[1]);
    panning = [ev.clientX, ev.clientY];
    redraw();
    return;
  }
  if (drawing && tool.kind === "brush") {
    store.extendStroke(pointerImagePoint(ev));
    redraw();
  }
});

canvas.addEventListener("pointerup", () => {
  drawing = false;
  panning = null;
  redraw();
});

canvas.addEventListener("click", (ev) => {
  if (tool.kind !== "polygon" || !imageSize) return;
  store.addPolygonVertex(pointerImagePoint(ev));
  setError("");
  redraw();
});

canvas.addEventListener("dblclick", (ev) => {
  if (tool.kind !== "polygon") return;
  ev.preventDefault();
  const problem = store.closePolygon();
  if (problem) setError(problem);
  redraw();
});

canvas.addEventListener("wheel", (ev) => {
  if (!imageSize) return;
  ev.preventDefault();
  const rect = canvas.getBoundingClientRect();
  view = zoomAround(view, ev.deltaY < 0 ? 1.2 : 1 / 1.2, ev.clientX - rect.left, ev.clientY - rect.top);
  redraw();
});

undoBtn.addEventListener("click", () => {
  store.undo();
  redraw();
});
redoBtn.addEventListener("click", () => {
  store.redo();
  redraw();
});
clearBtn.addEventListener("click", () => {
  store.clear();
  redraw();
});

opacityInput.addEventListener("input", () => {
  resultImg.style.opacity = String(Number(opacityInput.value) / 100);
});
showMaskInput.addEventListener("change", () => {
  resultImg.src = (showMaskInput.checked ? maskUrl : overlayUrl) ?? "";
});

const domView: RunView = {
  setRunning(value) {
    running = value;
    refreshButtons();
  },
  setProgress(iteration, maxIterations) {
    progressBar.value = Math.min(1, iteration / Math.max(1, maxIterations));
  },
  showOverlay(overlay, mask) {
    if (overlayUrl) URL.revokeObjectURL(overlayUrl);
    if (maskUrl) URL.revokeObjectURL(maskUrl);
    overlayUrl = URL.createObjectURL(overlay);
    maskUrl = URL.createObjectURL(mask);
    resultImg.src = showMaskInput.checked ? maskUrl : overlayUrl;
    resultImg.style.display = "block";
    resultImg.style.opacity = String(Number(opacityInput.value) / 100);
  },
  showError(message) {
    setError(message);
  },
};

runBtn.addEventListener("click", async () => {
  if (!sessionId || running) return;
  const polygon = store.getPolygon();
  if (polygon) {
    const problem = polygonProblem(polygon);
    if (problem) {
      setError(problem);
      return;
    }
  }
  setError("");
  progressBar.value = 0;
  await runAndDisplay(api, sessionId, store.serialize(), domView, {
    overrides: { mode: modeSelect.value },
  });
  redraw();
});

refreshButtons();
