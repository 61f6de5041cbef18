// Thin client for the annotation HTTP API served by `earmetrics annotate-serve`.
export class ApiError extends Error {
    constructor(status, message) {
        super(message);
        this.status = status;
    }
}
async function errorMessage(resp) {
    try {
        const body = (await resp.json());
        return body.error ?? resp.statusText;
    }
    catch {
        return resp.statusText;
    }
}
export async function listImages(all = false) {
    const resp = await fetch(all ? "/api/images?all=1" : "/api/images");
    if (!resp.ok)
        throw new ApiError(resp.status, await errorMessage(resp));
    const body = (await resp.json());
    return body.images;
}
export function imageUrl(id) {
    return `/api/image/${encodeURIComponent(id)}`;
}
export async function fetchLandmarks(id) {
    const resp = await fetch(`/api/landmarks/${encodeURIComponent(id)}`);
    if (resp.status === 404)
        return null;
    if (!resp.ok)
        throw new ApiError(resp.status, await errorMessage(resp));
    return (await resp.json());
}
export async function saveLandmarks(id, payload) {
    const resp = await fetch(`/api/landmarks/${encodeURIComponent(id)}`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(payload),
    });
    if (!resp.ok)
        throw new ApiError(resp.status, await errorMessage(resp));
}
