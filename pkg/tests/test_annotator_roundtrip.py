"""Annotator round-trip: a scripted session through the real compiled
frontend logic, exported over the live HTTP API, consumed by the extract
command.

Runs the session module that ships inside the package (built from
``frontend/``) under node; skipped without node, so the primary suite
stands alone.
"""

import json
import shutil
import subprocess
import threading
import urllib.error
import urllib.request

import numpy as np
import pytest

from earmetrics.augment import ImageBuffer
from earmetrics.cli import main
from earmetrics.geometry import (
    DISTANCE_PAIRS,
    FEATURE_NAMES,
    landmarks_from_json,
    read_features_csv,
    save_landmarks,
)
from earmetrics.server import make_server

from earmetrics.server import default_ui_dir

SESSION_JS = default_ui_dir() / "session.js"

pytestmark = pytest.mark.skipif(
    shutil.which("node") is None or not SESSION_JS.exists(),
    reason="needs node and the packaged annotator UI (cd frontend && npm run build)",
)

# a plausible left-ear annotation inside a 120x140 image
CLICKS = {
    "obs": (25.0, 35.0),
    "obi": (20.0, 100.0),
    "t": (35.0, 70.0),
    "sa": (50.0, 15.0),
    "sba": (30.0, 115.0),
    "pa": (85.0, 65.0),
    "pra": (23.0, 60.0),
    "intno": (37.0, 85.0),
}

NODE_SCRIPT = """
import {{ createSession, recordClick, exportPayload, displayToImage, imageToDisplay,
         zoomAt, panBy, identityView }} from '{session_js}';

const clicks = {clicks};
let view = identityView();
view = zoomAt(view, 140, 90, 1.7);   // zoomed-in annotation session
view = panBy(view, -18, 7);
let session = createSession('{image_id}', '{image_file}', {width}, {height});
for (const [x, y] of clicks) {{
  const display = imageToDisplay(view, x, y);
  // a real pointer lands on integer display pixels
  const snapped = displayToImage(view, Math.round(display.x), Math.round(display.y));
  session = recordClick(session, snapped.x, snapped.y);
}}
console.log(JSON.stringify(exportPayload(session)));
"""


def scripted_session_payload(image_id, image_file, width, height, clicks):
    script = NODE_SCRIPT.format(
        session_js=SESSION_JS.as_uri(),
        clicks=json.dumps(clicks),
        image_id=image_id,
        image_file=image_file,
        width=width,
        height=height,
    )
    proc = subprocess.run(
        ["node", "--input-type=module", "-e", script],
        capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


@pytest.fixture
def live_server(tmp_path):
    images = tmp_path / "images"
    images.mkdir()
    rng = np.random.default_rng(0)
    ImageBuffer(rng.integers(0, 256, size=(140, 120), dtype=np.uint8)).save(images / "ear_001.png")
    out = tmp_path / "landmarks"
    srv = make_server(images, out, port=0)
    threading.Thread(target=srv.serve_forever, daemon=True).start()
    yield f"http://127.0.0.1:{srv.server_address[1]}", out
    srv.shutdown()
    srv.server_close()


def post_json(url, payload):
    req = urllib.request.Request(
        url, data=json.dumps(payload).encode(), headers={"Content-Type": "application/json"}
    )
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, json.loads(resp.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


def test_scripted_session_roundtrip_through_extract(live_server, tmp_path, capsys):
    base, out_dir = live_server
    clicks = [CLICKS[name] for name in ("obs", "obi", "t", "sa", "sba", "pa", "pra", "intno")]
    payload = scripted_session_payload("ear_001", "ear_001.png", 120, 140, clicks)

    # every stored coordinate sits within half a display pixel of the click
    for name, (x, y) in CLICKS.items():
        gx, gy = payload["landmarks"][name]
        assert abs(gx - x) <= 0.5 and abs(gy - y) <= 0.5

    status, resp = post_json(f"{base}/api/landmarks/ear_001", payload)
    assert status == 200 and resp == {"saved": "ear_001"}
    with urllib.request.urlopen(f"{base}/api/landmarks/ear_001") as r:
        fetched = json.loads(r.read())
    assert fetched == payload  # GET returns the posted payload unchanged

    # hand-written landmark file with the intended coordinates
    lm_dir = tmp_path / "lm"
    lm_dir.mkdir()
    (lm_dir / "session.json").write_text(json.dumps(fetched))
    hand_lm, _ = landmarks_from_json(
        {"image": "ear_001.png", "side": "left",
         "landmarks": {k: list(v) for k, v in CLICKS.items()}}
    )
    save_landmarks(lm_dir / "hand.json", hand_lm, "ear_001.png")

    features_csv = tmp_path / "features.csv"
    assert main(["extract", "--landmarks", str(lm_dir), "--out", str(features_csv)]) == 0
    capsys.readouterr()
    ids, matrix = read_features_csv(features_csv)
    hand = matrix[ids.index("hand")]
    via_session = matrix[ids.index("session")]

    # propagated +/-0.5 px bounds: distances move by at most 2*0.5; the areas
    # by at most their coordinate sensitivities (w+h for the rectangle,
    # perimeter/2 for the hexagon), plus a delta^2 crumb
    for i, _pair in enumerate(DISTANCE_PAIRS):
        assert abs(via_session[i] - hand[i]) <= 1.0 + 1e-9
    rect_idx = FEATURE_NAMES.index("rect_area")
    pts = {k: np.array(v) for k, v in CLICKS.items()}
    width = pts["pa"][0] - min(pts["obs"][0], pts["obi"][0])
    height = pts["sba"][1] - pts["sa"][1]
    assert abs(via_session[rect_idx] - hand[rect_idx]) <= (width + height) + 1.0
    hexagon = [pts[n] for n in ("obs", "sa", "pa", "sba", "obi", "t")]
    perimeter = sum(
        float(np.linalg.norm(hexagon[i] - hexagon[(i + 1) % 6])) for i in range(6)
    )
    poly_idx = FEATURE_NAMES.index("poly_area")
    assert abs(via_session[poly_idx] - hand[poly_idx]) <= 0.5 * perimeter + 1.0


def test_invariant_violation_rejected_server_side(live_server):
    base, out_dir = live_server
    swapped = dict(CLICKS)
    swapped["sa"], swapped["sba"] = swapped["sba"], swapped["sa"]  # sa below sba
    clicks = [swapped[name] for name in ("obs", "obi", "t", "sa", "sba", "pa", "pra", "intno")]
    payload = scripted_session_payload("ear_001", "ear_001.png", 120, 140, clicks)
    status, resp = post_json(f"{base}/api/landmarks/ear_001", payload)
    assert status == 422
    assert "sa" in resp["error"]
    assert not (out_dir / "ear_001.json").exists()
