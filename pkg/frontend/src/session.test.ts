import { describe, expect, it } from "vitest";

import {
  IncompleteSessionError,
  LANDMARK_SEQUENCE,
  NothingToUndoError,
  OutOfBoundsError,
  SessionCompleteError,
  createSession,
  displayToImage,
  exportPayload,
  fitView,
  identityView,
  imageToDisplay,
  isComplete,
  nextLandmark,
  panBy,
  recordClick,
  setSide,
  undo,
  zoomAt,
} from "./session.js";

function fullSession() {
  let session = createSession("ear_001", "ear_001.png", 100, 120);
  for (let i = 0; i < 8; i += 1) {
    session = recordClick(session, 10 + i * 5, 20 + i * 10);
  }
  return session;
}

describe("placement order", () => {
  it("names the first click obs and follows the fixed sequence", () => {
    let session = createSession("img", "img.png", 50, 50);
    expect(nextLandmark(session)).toBe("obs");
    session = recordClick(session, 5, 5);
    expect(session.placed[0].name).toBe("obs");
    expect(nextLandmark(session)).toBe("obi");
    session = recordClick(session, 6, 7);
    expect(session.placed.map((p) => p.name)).toEqual(["obs", "obi"]);
  });

  it("completes on the 8th click and refuses a 9th", () => {
    const session = fullSession();
    expect(isComplete(session)).toBe(true);
    expect(nextLandmark(session)).toBeNull();
    expect(() => recordClick(session, 1, 1)).toThrow(SessionCompleteError);
  });

  it("rejects clicks outside the image without changing the session", () => {
    const session = createSession("img", "img.png", 50, 40);
    for (const [x, y] of [[-1, 5], [5, -1], [50, 5], [5, 40], [Number.NaN, 5]] as const) {
      expect(() => recordClick(session, x, y)).toThrow(OutOfBoundsError);
    }
    expect(session.placed).toHaveLength(0);
  });
});

describe("undo", () => {
  it("removes only the most recent placement", () => {
    let session = createSession("img", "img.png", 50, 50);
    session = recordClick(session, 1, 2);
    session = recordClick(session, 3, 4);
    session = undo(session);
    expect(session.placed.map((p) => p.name)).toEqual(["obs"]);
    expect(nextLandmark(session)).toBe("obi");
  });

  it("throws on an empty session", () => {
    expect(() => undo(createSession("img", "img.png", 10, 10))).toThrow(NothingToUndoError);
  });

  it("eight undos empty a full session", () => {
    let session = fullSession();
    for (let i = 0; i < 8; i += 1) session = undo(session);
    expect(session.placed).toHaveLength(0);
    expect(nextLandmark(session)).toBe("obs");
  });
});

describe("export", () => {
  it("produces the landmark-file schema with all 8 names", () => {
    const payload = exportPayload(setSide(fullSession(), "right"));
    expect(payload.image).toBe("ear_001.png");
    expect(payload.side).toBe("right");
    expect(Object.keys(payload.landmarks).sort()).toEqual([...LANDMARK_SEQUENCE].sort());
    expect(payload.landmarks.obs).toEqual([10, 20]);
    expect(payload.landmarks.intno).toEqual([45, 90]);
  });

  it("refuses incomplete sessions", () => {
    let session = createSession("img", "img.png", 50, 50);
    session = recordClick(session, 1, 1);
    expect(() => exportPayload(session)).toThrow(IncompleteSessionError);
  });
});

describe("view transform", () => {
  it("round-trips display and image coordinates at any zoom", () => {
    let view = identityView();
    view = zoomAt(view, 120, 80, 1.7);
    view = panBy(view, -33, 12);
    view = zoomAt(view, 40, 200, 2.3);
    for (const [x, y] of [[0, 0], [13.25, 77.5], [255, 99]] as const) {
      const display = imageToDisplay(view, x, y);
      const back = displayToImage(view, display.x, display.y);
      expect(Math.abs(back.x - x)).toBeLessThan(0.5); // sub-click-resolution
      expect(Math.abs(back.y - y)).toBeLessThan(0.5);
    }
  });

  it("keeps the anchor point fixed while zooming", () => {
    const view = identityView();
    const zoomed = zoomAt(view, 64, 48, 2.0);
    const before = displayToImage(view, 64, 48);
    const after = displayToImage(zoomed, 64, 48);
    expect(after.x).toBeCloseTo(before.x, 9);
    expect(after.y).toBeCloseTo(before.y, 9);
  });

  it("clamps the zoom range", () => {
    let view = identityView();
    for (let i = 0; i < 40; i += 1) view = zoomAt(view, 0, 0, 2);
    expect(view.scale).toBe(32);
    for (let i = 0; i < 80; i += 1) view = zoomAt(view, 0, 0, 0.5);
    expect(view.scale).toBe(0.125);
  });

  it("fits the whole image inside the viewport", () => {
    const view = fitView(800, 600, 256, 256);
    const corner = imageToDisplay(view, 256, 256);
    expect(view.scale).toBeCloseTo(600 / 256, 9);
    expect(corner.x).toBeLessThanOrEqual(800);
    expect(corner.y).toBeLessThanOrEqual(600);
  });
});
