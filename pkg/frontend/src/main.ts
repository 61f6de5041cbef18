// Annotator UI: pick a pending image, click the eight landmarks in order
// (zoom with the wheel, drag to pan), undo mistakes, choose the ear side,
// and save through the validation API.

import { ApiError, fetchLandmarks, imageUrl, listImages, saveLandmarks } from "./api.js";
import {
  LANDMARK_HINTS,
  LANDMARK_SEQUENCE,
  NothingToUndoError,
  Session,
  ViewTransform,
  createSession,
  displayToImage,
  fitView,
  imageToDisplay,
  isComplete,
  nextLandmark,
  panBy,
  recordClick,
  setSide,
  undo,
  zoomAt,
} from "./session.js";

const imageList = document.getElementById("image-list") as HTMLUListElement;
const canvas = document.getElementById("canvas") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const checklist = document.getElementById("checklist") as HTMLOListElement;
const hintEl = document.getElementById("hint") as HTMLParagraphElement;
const statusEl = document.getElementById("status") as HTMLParagraphElement;
const undoBtn = document.getElementById("undo") as HTMLButtonElement;
const saveBtn = document.getElementById("save") as HTMLButtonElement;
const resetViewBtn = document.getElementById("reset-view") as HTMLButtonElement;
const sideInputs = Array.from(
  document.querySelectorAll<HTMLInputElement>('input[name="side"]'),
);

let session: Session | null = null;
let view: ViewTransform = { scale: 1, offsetX: 0, offsetY: 0 };
let image: HTMLImageElement | null = null;

function setStatus(text: string, kind: "info" | "error" | "ok" = "info"): void {
  statusEl.textContent = text;
  statusEl.className = kind;
}

async function refreshImageList(): Promise<void> {
  const images = await listImages(true);
  imageList.replaceChildren();
  for (const entry of images) {
    const item = document.createElement("li");
    const button = document.createElement("button");
    button.textContent = `${entry.annotated ? "✓ " : ""}${entry.id}`;
    button.disabled = session?.imageId === entry.id;
    button.addEventListener("click", () => void openImage(entry.id, entry.file));
    item.appendChild(button);
    imageList.appendChild(item);
  }
  if (images.length === 0) {
    const item = document.createElement("li");
    item.textContent = "no images found";
    imageList.appendChild(item);
  }
}

async function openImage(id: string, file: string): Promise<void> {
  const img = new Image();
  img.src = imageUrl(id);
  await img.decode();
  image = img;
  session = createSession(id, file, img.naturalWidth, img.naturalHeight);
  const existing = await fetchLandmarks(id).catch(() => null);
  if (existing) {
    session = setSide(session, existing.side);
    for (const name of LANDMARK_SEQUENCE) {
      const point = existing.landmarks[name];
      if (point) session = recordClick(session, point[0], point[1]);
    }
    setStatus("existing annotation loaded; undo to adjust", "info");
  } else {
    setStatus(`annotating ${id}: click the landmarks in order`, "info");
  }
  for (const input of sideInputs) input.checked = input.value === session.side;
  resetView();
  void refreshImageList();
  render();
}

function resetView(): void {
  if (image) view = fitView(canvas.width, canvas.height, image.naturalWidth, image.naturalHeight);
  render();
}

function render(): void {
  ctx.setTransform(1, 0, 0, 1, 0, 0);
  ctx.fillStyle = "#181818";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (!image || !session) {
    updatePanel();
    return;
  }
  ctx.imageSmoothingEnabled = view.scale < 3;
  ctx.setTransform(view.scale, 0, 0, view.scale, view.offsetX, view.offsetY);
  ctx.drawImage(image, 0, 0);

  ctx.setTransform(1, 0, 0, 1, 0, 0);
  for (const placement of session.placed) {
    const p = imageToDisplay(view, placement.x, placement.y);
    ctx.strokeStyle = "#ffd23f";
    ctx.fillStyle = "#ffd23f";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.arc(p.x, p.y, 5, 0, Math.PI * 2);
    ctx.stroke();
    ctx.beginPath();
    ctx.moveTo(p.x - 8, p.y);
    ctx.lineTo(p.x + 8, p.y);
    ctx.moveTo(p.x, p.y - 8);
    ctx.lineTo(p.x, p.y + 8);
    ctx.stroke();
    ctx.font = "12px sans-serif";
    ctx.fillText(placement.name, p.x + 9, p.y - 9);
  }
  updatePanel();
}

function updatePanel(): void {
  checklist.replaceChildren();
  for (let i = 0; i < LANDMARK_SEQUENCE.length; i += 1) {
    const item = document.createElement("li");
    const name = LANDMARK_SEQUENCE[i];
    const placement = session?.placed[i];
    item.textContent = placement
      ? `${name} — (${placement.x.toFixed(1)}, ${placement.y.toFixed(1)})`
      : name;
    if (placement) item.classList.add("done");
    if (session && i === session.placed.length) item.classList.add("current");
    checklist.appendChild(item);
  }
  const pending = session ? nextLandmark(session) : null;
  hintEl.textContent = pending
    ? `Next: ${pending} — ${LANDMARK_HINTS[pending]}`
    : session
      ? "All 8 landmarks placed; review and save."
      : "Pick an image from the list.";
  undoBtn.disabled = !session || session.placed.length === 0;
  saveBtn.disabled = !session || !isComplete(session);
}

// pointer handling: a short press places a landmark, a drag pans the view
let pointerDown: { x: number; y: number; moved: boolean } | null = null;

canvas.addEventListener("pointerdown", (event) => {
  pointerDown = { x: event.offsetX, y: event.offsetY, moved: false };
  canvas.setPointerCapture(event.pointerId);
});

canvas.addEventListener("pointermove", (event) => {
  if (!pointerDown) return;
  const dx = event.offsetX - pointerDown.x;
  const dy = event.offsetY - pointerDown.y;
  if (pointerDown.moved || Math.hypot(dx, dy) > 3) {
    pointerDown.moved = true;
    view = panBy(view, dx, dy);
    pointerDown.x = event.offsetX;
    pointerDown.y = event.offsetY;
    render();
  }
});

canvas.addEventListener("pointerup", (event) => {
  const press = pointerDown;
  pointerDown = null;
  canvas.releasePointerCapture(event.pointerId);
  if (!press || press.moved || !session) return;
  const point = displayToImage(view, event.offsetX, event.offsetY);
  try {
    session = recordClick(session, point.x, point.y);
    setStatus(
      isComplete(session) ? "complete — save when ready" : `placed ${session.placed[session.placed.length - 1].name}`,
      "ok",
    );
  } catch (err) {
    setStatus((err as Error).message, "error");
  }
  render();
});

canvas.addEventListener("wheel", (event) => {
  event.preventDefault();
  view = zoomAt(view, event.offsetX, event.offsetY, event.deltaY < 0 ? 1.2 : 1 / 1.2);
  render();
});

undoBtn.addEventListener("click", () => {
  if (!session) return;
  try {
    session = undo(session);
    setStatus("removed the last placement", "info");
  } catch (err) {
    if (!(err instanceof NothingToUndoError)) throw err;
    setStatus(err.message, "error");
  }
  render();
});

resetViewBtn.addEventListener("click", resetView);

for (const input of sideInputs) {
  input.addEventListener("change", () => {
    if (session && input.checked) session = setSide(session, input.value as "left" | "right");
  });
}

saveBtn.addEventListener("click", () => {
  if (!session) return;
  void (async () => {
    try {
      const { exportPayload } = await import("./session.js");
      await saveLandmarks(session!.imageId, exportPayload(session!));
      setStatus(`saved landmarks for ${session!.imageId}`, "ok");
      await refreshImageList();
    } catch (err) {
      if (err instanceof ApiError) {
        setStatus(`server rejected the annotation: ${err.message}`, "error");
      } else {
        setStatus((err as Error).message, "error");
      }
    }
  })();
});

document.addEventListener("keydown", (event) => {
  if (event.key === "z" && (event.ctrlKey || event.metaKey)) {
    event.preventDefault();
    undoBtn.click();
  }
});

void refreshImageList().then(updatePanel);
