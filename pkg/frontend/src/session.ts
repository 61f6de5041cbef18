// Annotation session state: pure functions, no DOM. The eight landmarks are
// placed in a fixed order so points can never be mislabeled; coordinates are
// stored in original-image pixel space regardless of the on-screen zoom.

export const LANDMARK_SEQUENCE = [
  "obs",
  "obi",
  "t",
  "sa",
  "sba",
  "pa",
  "pra",
  "intno",
] as const;

export type LandmarkName = (typeof LANDMARK_SEQUENCE)[number];

export const LANDMARK_HINTS: Record<LandmarkName, string> = {
  obs: "Otobasion superius: upper limit of the ear-face junction, where the helix meets the temple.",
  obi: "Otobasion inferius: lower limit of the ear-face junction, where the earlobe meets the cheek.",
  t: "Tragus: the small flap protruding in front of the ear canal.",
  sa: "Superaurale: the highest point of the auricle.",
  sba: "Subaurale: the lowest point of the auricle (earlobe bottom).",
  pa: "Postaurale: the outermost rear point of the ear curve.",
  pra: "Preaurale: the front side of the ear, level with the helix attachment.",
  intno: "Intertragic notch: the deep dip between the tragus and the antitragus.",
};

export type Side = "left" | "right";

export interface Placement {
  name: LandmarkName;
  x: number;
  y: number;
}

export interface Session {
  imageId: string;
  imageFile: string;
  width: number;
  height: number;
  side: Side;
  placed: Placement[];
}

export interface LandmarkFilePayload {
  image: string;
  side: Side;
  landmarks: Record<string, [number, number]>;
}

export class OutOfBoundsError extends Error {}
export class SessionCompleteError extends Error {}
export class NothingToUndoError extends Error {}
export class IncompleteSessionError extends Error {}

export function createSession(
  imageId: string,
  imageFile: string,
  width: number,
  height: number,
  side: Side = "left",
): Session {
  return { imageId, imageFile, width, height, side, placed: [] };
}

export function nextLandmark(session: Session): LandmarkName | null {
  return session.placed.length < LANDMARK_SEQUENCE.length
    ? LANDMARK_SEQUENCE[session.placed.length]
    : null;
}

export function isComplete(session: Session): boolean {
  return session.placed.length === LANDMARK_SEQUENCE.length;
}

export function recordClick(session: Session, x: number, y: number): Session {
  const name = nextLandmark(session);
  if (name === null) {
    throw new SessionCompleteError("all 8 landmarks are already placed");
  }
  if (!Number.isFinite(x) || !Number.isFinite(y) || x < 0 || y < 0 || x >= session.width || y >= session.height) {
    throw new OutOfBoundsError(`(${x}, ${y}) is outside the ${session.width}x${session.height} image`);
  }
  return { ...session, placed: [...session.placed, { name, x, y }] };
}

export function undo(session: Session): Session {
  if (session.placed.length === 0) {
    throw new NothingToUndoError("no placements to undo");
  }
  return { ...session, placed: session.placed.slice(0, -1) };
}

export function setSide(session: Session, side: Side): Session {
  return { ...session, side };
}

export function exportPayload(session: Session): LandmarkFilePayload {
  if (!isComplete(session)) {
    throw new IncompleteSessionError(
      `only ${session.placed.length} of ${LANDMARK_SEQUENCE.length} landmarks placed`,
    );
  }
  const landmarks: Record<string, [number, number]> = {};
  for (const placement of session.placed) {
    landmarks[placement.name] = [placement.x, placement.y];
  }
  return { image: session.imageFile, side: session.side, landmarks };
}

// --- view transform -------------------------------------------------------
// display = image * scale + offset; zooming anchors the point under the
// cursor so inverse-mapped clicks are zoom independent.

export interface ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export function identityView(): ViewTransform {
  return { scale: 1, offsetX: 0, offsetY: 0 };
}

export function imageToDisplay(view: ViewTransform, x: number, y: number): { x: number; y: number } {
  return { x: x * view.scale + view.offsetX, y: y * view.scale + view.offsetY };
}

export function displayToImage(view: ViewTransform, dx: number, dy: number): { x: number; y: number } {
  return { x: (dx - view.offsetX) / view.scale, y: (dy - view.offsetY) / view.scale };
}

export function zoomAt(view: ViewTransform, displayX: number, displayY: number, factor: number): ViewTransform {
  const scale = Math.min(32, Math.max(0.125, view.scale * factor));
  const applied = scale / view.scale;
  return {
    scale,
    offsetX: displayX - (displayX - view.offsetX) * applied,
    offsetY: displayY - (displayY - view.offsetY) * applied,
  };
}

export function panBy(view: ViewTransform, dx: number, dy: number): ViewTransform {
  return { ...view, offsetX: view.offsetX + dx, offsetY: view.offsetY + dy };
}

export function fitView(viewportW: number, viewportH: number, imageW: number, imageH: number): ViewTransform {
  const scale = Math.min(viewportW / imageW, viewportH / imageH);
  return {
    scale,
    offsetX: (viewportW - imageW * scale) / 2,
    offsetY: (viewportH - imageH * scale) / 2,
  };
}
