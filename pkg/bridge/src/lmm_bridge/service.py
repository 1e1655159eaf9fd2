"""HTTP front-end: POST /v1/compare and GET /healthz.

One model instance serves everything; requests serialize through an
asyncio lock behind a bounded admission counter, and the service answers
503 the moment more than ``queue_depth`` requests are pending.
"""

import asyncio
import base64
import io
import os
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from PIL import Image, UnidentifiedImageError
from pydantic import BaseModel

from .errors import BadRequestError
from .models import default_prompt
from .protocol import COMPARE_PATH, HEALTH_PATH

DEFAULT_QUEUE_DEPTH = 8


class CompareRequest(BaseModel):
    first_image: str
    second_image: str
    prompt_override: str | None = None


class BoundedRequestQueue:
    """Admission counter plus the lock that serializes model access.

    ``pending`` counts the request being processed and everyone waiting;
    admission beyond ``depth`` is refused so callers get backpressure
    instead of unbounded queueing. Counter mutations all happen on the
    event loop thread.
    """

    def __init__(self, depth=DEFAULT_QUEUE_DEPTH):
        self.depth = depth
        self.pending = 0
        self.lock = asyncio.Lock()

    def try_enter(self) -> bool:
        if self.pending >= self.depth:
            return False
        self.pending += 1
        return True

    def leave(self) -> None:
        self.pending -= 1


def _resolve_image(value: str, field: str) -> bytes:
    """Accept a readable file path or a base64 payload; verify it decodes."""
    if os.path.isfile(value):
        with open(value, "rb") as fh:
            data = fh.read()
    else:
        try:
            data = base64.b64decode(value, validate=True)
        except (ValueError, TypeError) as exc:
            raise BadRequestError(
                f"{field}: neither an existing file nor valid base64"
            ) from exc
    try:
        with Image.open(io.BytesIO(data)) as img:
            img.verify()
    except (UnidentifiedImageError, OSError) as exc:
        raise BadRequestError(f"{field}: not a decodable image") from exc
    return data


def _warmup_image() -> bytes:
    buf = io.BytesIO()
    Image.new("L", (1, 1)).save(buf, format="PNG")
    return buf.getvalue()


def create_app(model, queue_depth=DEFAULT_QUEUE_DEPTH) -> FastAPI:
    """Bridge application over an already-loaded comparator model."""

    @asynccontextmanager
    async def lifespan(app):
        pixel = _warmup_image()
        loop = asyncio.get_running_loop()
        await loop.run_in_executor(
            None, model.compare, pixel, pixel, default_prompt()
        )
        app.state.ready = True
        yield
        app.state.ready = False

    app = FastAPI(lifespan=lifespan)
    app.state.ready = False
    app.state.queue = BoundedRequestQueue(queue_depth)

    @app.exception_handler(RequestValidationError)
    async def malformed_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc.errors())})

    @app.exception_handler(BadRequestError)
    async def bad_request(request: Request, exc: BadRequestError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(Exception)
    async def internal_error(request: Request, exc: Exception):
        return JSONResponse(status_code=500, content={"error": str(exc)})

    @app.get(HEALTH_PATH)
    async def healthz():
        if not app.state.ready:
            return JSONResponse(
                status_code=503, content={"error": "model warming up"}
            )
        return {"model_id": model.model_id}

    @app.post(COMPARE_PATH)
    async def compare(request: CompareRequest):
        queue: BoundedRequestQueue = app.state.queue
        if not queue.try_enter():
            return JSONResponse(
                status_code=503,
                content={"error": f"queue full ({queue.depth} pending)"},
            )
        try:
            first = _resolve_image(request.first_image, "first_image")
            second = _resolve_image(request.second_image, "second_image")
            prompt = request.prompt_override or default_prompt()
            loop = asyncio.get_running_loop()
            async with queue.lock:
                logits = await loop.run_in_executor(
                    None, model.compare, first, second, prompt
                )
            return {"logits": logits, "model_id": model.model_id}
        finally:
            queue.leave()

    return app
