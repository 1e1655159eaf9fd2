"""Comparator model backends behind the bridge.

``MockComparatorModel`` is the deterministic stand-in used for tests and
for exercising the HTTP contract without any weights. The transformers
backend adapts a real multimodal checkpoint behind the same interface;
it is loaded lazily and reports load problems as StartupError.
"""

import hashlib
from typing import Protocol

from .errors import StartupError
from .extraction import extract_level_logits, level_first_token_ids
from .protocol import INSTRUCTION_TEMPLATE, LEVEL_NAMES, RESPONSE_PREFIX


class ComparatorModel(Protocol):
    model_id: str

    def compare(self, first_image: bytes, second_image: bytes, prompt: str) -> dict[str, float]:
        """Five finite logits keyed by level name for one ordered pair."""
        ...


class MockComparatorModel:
    """Deterministic pseudo-model: logits are a pure hash of the inputs.

    Identical requests always produce identical logits, which is exactly
    the property the service contract needs to be testable offline.
    """

    model_id = "mock"

    def compare(self, first_image, second_image, prompt):
        logits = {}
        for name in LEVEL_NAMES:
            digest = hashlib.sha256()
            digest.update(name.encode())
            digest.update(prompt.encode())
            digest.update(first_image)
            digest.update(b"|")
            digest.update(second_image)
            raw = int.from_bytes(digest.digest()[:8], "big")
            logits[name] = (raw / 2**64) * 8.0 - 4.0
        return logits


class TransformersComparatorModel:
    """Adapter for a Hugging Face multimodal checkpoint.

    The prompt interleaves the two images via the processor's image
    placeholders, the response prefix pins the level word as the next
    token, and the five logits are read from the final next-token
    distribution using the first-sub-token convention.
    """

    def __init__(self, model_id, device="cpu"):
        try:
            import torch  # noqa: F401
            from transformers import AutoModelForVision2Seq, AutoProcessor
        except ImportError as exc:
            raise StartupError(f"transformers backend unavailable: {exc}") from exc
        self.model_id = model_id
        try:
            self._processor = AutoProcessor.from_pretrained(model_id)
            self._model = AutoModelForVision2Seq.from_pretrained(model_id)
        except Exception as exc:
            raise StartupError(f"could not load model {model_id!r}: {exc}") from exc
        self._model.eval()
        self._device = device
        self._model.to(device)
        tokenizer = getattr(self._processor, "tokenizer", self._processor)
        self._level_ids = level_first_token_ids(
            lambda text: tokenizer.encode(text, add_special_tokens=False)
        )

    def compare(self, first_image, second_image, prompt):
        import io

        import torch
        from PIL import Image

        images = [
            Image.open(io.BytesIO(first_image)).convert("RGB"),
            Image.open(io.BytesIO(second_image)).convert("RGB"),
        ]
        text = (
            f"USER: {prompt.replace('<img1>', '<image>').replace('<img2>', '<image>')} "
            f"ASSISTANT: {RESPONSE_PREFIX}"
        )
        inputs = self._processor(text=text, images=images, return_tensors="pt").to(
            self._device
        )
        with torch.no_grad():
            logits = self._model(**inputs).logits[0, -1]
        return extract_level_logits(logits.tolist(), self._level_ids)


def load_model(model_id, device="cpu") -> ComparatorModel:
    if model_id == "mock":
        return MockComparatorModel()
    return TransformersComparatorModel(model_id, device=device)


def default_prompt() -> str:
    return INSTRUCTION_TEMPLATE
