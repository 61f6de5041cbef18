// Thin client for the annotation HTTP API served by `earmetrics annotate-serve`.

import type { LandmarkFilePayload } from "./session.js";

export interface ImageEntry {
  id: string;
  file: string;
  annotated: boolean;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

async function errorMessage(resp: Response): Promise<string> {
  try {
    const body = (await resp.json()) as { error?: string };
    return body.error ?? resp.statusText;
  } catch {
    return resp.statusText;
  }
}

export async function listImages(all = false): Promise<ImageEntry[]> {
  const resp = await fetch(all ? "/api/images?all=1" : "/api/images");
  if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
  const body = (await resp.json()) as { images: ImageEntry[] };
  return body.images;
}

export function imageUrl(id: string): string {
  return `/api/image/${encodeURIComponent(id)}`;
}

export async function fetchLandmarks(id: string): Promise<LandmarkFilePayload | null> {
  const resp = await fetch(`/api/landmarks/${encodeURIComponent(id)}`);
  if (resp.status === 404) return null;
  if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
  return (await resp.json()) as LandmarkFilePayload;
}

export async function saveLandmarks(id: string, payload: LandmarkFilePayload): Promise<void> {
  const resp = await fetch(`/api/landmarks/${encodeURIComponent(id)}`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
  if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
}
