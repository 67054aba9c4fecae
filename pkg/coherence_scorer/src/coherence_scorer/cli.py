"""Command line: train a coherence model, then serve it."""

from __future__ import annotations

import click

from .train import TrainerConfig, train


@click.group()
def main():
    """Utterance-pair coherence cross-encoder."""


@main.command("train")
@click.option("--train-file", required=True, type=click.Path(exists=True))
@click.option("--val-file", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--seed", required=True, type=int)
@click.option("--margin", default=1.0, show_default=True, type=float)
@click.option("--learning-rate", default=2e-5, show_default=True, type=float)
@click.option("--epochs", default=10, show_default=True, type=int)
@click.option("--batch-size", default=16, show_default=True, type=int)
@click.option("--max-len", default=64, show_default=True, type=int)
@click.option("--base-model", default=None, help="Pretrained backbone id; omit for the builtin encoder.")
@click.option("--d-model", default=64, show_default=True, type=int)
@click.option("--n-layers", default=2, show_default=True, type=int)
@click.option("--n-heads", default=2, show_default=True, type=int)
def cmd_train(train_file, val_file, out_dir, seed, margin, learning_rate, epochs, batch_size,
              max_len, base_model, d_model, n_layers, n_heads):
    """Fit the ranking objective on a triplet JSONL file."""
    config = TrainerConfig(
        seed=seed,
        margin=margin,
        learning_rate=learning_rate,
        epochs=epochs,
        batch_size=batch_size,
        max_len=max_len,
        base_model=base_model,
        d_model=d_model,
        n_layers=n_layers,
        n_heads=n_heads,
    )
    checkpoint = train(train_file, val_file, config, out_dir)
    click.echo(f"checkpoint written to {checkpoint}")


@main.command("serve")
@click.option("--checkpoint", required=True, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def cmd_serve(checkpoint, host, port):
    """Serve a checkpoint over the scorer wire protocol."""
    from .serve import serve

    serve(checkpoint, host=host, port=port)


if __name__ == "__main__":
    main()
