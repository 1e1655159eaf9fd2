"""Serve command."""

import sys

import click

from .errors import StartupError
from .models import load_model
from .service import DEFAULT_QUEUE_DEPTH, create_app


@click.command(name="lmm-bridge")
@click.option("--model", "model_id", default="mock", show_default=True,
              help="'mock' or a Hugging Face model id / path.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8008, show_default=True)
@click.option("--device", default="cpu", show_default=True)
@click.option("--queue-depth", type=int, default=DEFAULT_QUEUE_DEPTH, show_default=True)
def serve(model_id, host, port, device, queue_depth):
    """Load the comparator model and serve the compare protocol."""
    import uvicorn

    try:
        model = load_model(model_id, device=device)
    except StartupError as exc:
        click.echo(f"startup failed: {exc}", err=True)
        sys.exit(1)
    app = create_app(model, queue_depth=queue_depth)
    uvicorn.run(app, host=host, port=port, log_level="warning")


def entrypoint():
    serve()


if __name__ == "__main__":
    entrypoint()
