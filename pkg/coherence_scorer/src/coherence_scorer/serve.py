"""HTTP scoring service.

Speaks the scorer wire protocol: ``POST /score`` with
``{"pairs": [["context", "candidate"], ...]}`` returns
``{"scores": [...]}`` aligned with the request order, at most
:data:`MAX_BATCH_PAIRS` pairs per request (larger requests get 413,
malformed ones 400). ``GET /health`` reports readiness. Scores are clamped
to [0, 1] on the way out; model weights are read-only while serving, so
identical requests produce identical scores.
"""

from __future__ import annotations

import threading

import torch
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

MAX_BATCH_PAIRS = 64


def create_app(scorer, device: str = "cpu") -> FastAPI:
    app = FastAPI(title="coherence-scorer")
    device_t = torch.device(device)
    scorer.model.to(device_t)
    scorer.model.eval()
    inference_lock = threading.Lock()

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/score")
    async def score(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return JSONResponse({"error": "body is not valid JSON"}, status_code=400)
        pairs = payload.get("pairs") if isinstance(payload, dict) else None
        if (
            not isinstance(pairs, list)
            or not pairs
            or not all(
                isinstance(p, (list, tuple))
                and len(p) == 2
                and all(isinstance(x, str) and x.strip() for x in p)
                for p in pairs
            )
        ):
            return JSONResponse(
                {"error": 'expected {"pairs": [["context", "candidate"], ...]} with non-empty strings'},
                status_code=400,
            )
        if len(pairs) > MAX_BATCH_PAIRS:
            return JSONResponse(
                {"error": f"batch limit is {MAX_BATCH_PAIRS} pairs, got {len(pairs)}"},
                status_code=413,
            )
        with inference_lock, torch.no_grad():
            scores = scorer.score_texts([(p[0], p[1]) for p in pairs], device_t)
        return {"scores": [min(1.0, max(0.0, float(s))) for s in scores]}

    return app


def serve(checkpoint: str, host: str = "127.0.0.1", port: int = 8000, device: str = "cpu") -> None:
    import uvicorn

    from .train import load_checkpoint

    app = create_app(load_checkpoint(checkpoint), device=device)
    uvicorn.run(app, host=host, port=port, log_level="warning")
