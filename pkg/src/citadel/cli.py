"""Operator entry point.

Subcommands: serve, bootstrap, seed, dump. Configuration precedence is
flags > environment (CITADEL_*) > config file > defaults. Exit codes:
0 success, 1 user error, 2 internal error.
"""

from __future__ import annotations

import socket
import sys

import click

from . import fixtures, registry
from .auth import check_password_policy
from .config import load_config
from .core import AppContext
from .domain import Role
from .errors import CitadelError

EXIT_USER_ERROR = 1
EXIT_INTERNAL_ERROR = 2


def _build_context(config_path, **flag_overrides) -> AppContext:
    config = load_config(file_path=config_path, overrides=flag_overrides)
    return AppContext(config)


def common_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                      help="Path to a flat key=value config file.")(fn)
    fn = click.option("--data-dir", default=None, help="Data directory override.")(fn)
    return fn


@click.group()
def main():
    """Citadel e-learning service operator CLI."""


@main.command()
@common_options
@click.option("--listen-address", default=None, help="host:port override.")
def serve(config_path, data_dir, listen_address):
    """Run the API server until signaled."""
    import uvicorn
    from .api import create_app

    try:
        config = load_config(file_path=config_path, overrides={
            "data_dir": data_dir, "listen_address": listen_address,
        })
    except (ValueError, OSError) as exc:
        click.echo(f"error: bad configuration: {exc}", err=True)
        sys.exit(EXIT_USER_ERROR)

    # probe the port up front so a clear message beats a uvicorn traceback
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        probe.bind((config.host, config.port))
    except OSError as exc:
        click.echo(f"error: cannot listen on port {config.port}: {exc}", err=True)
        sys.exit(EXIT_USER_ERROR)
    finally:
        probe.close()

    ctx = AppContext(config)
    app = create_app(ctx)
    # uvicorn re-raises a captured SIGTERM once its own handler is restored;
    # swallow it so a signaled shutdown still exits 0 after draining.
    import signal as _signal
    _signal.signal(_signal.SIGTERM, lambda _sig, _frame: None)
    try:
        uvicorn.run(app, host=config.host, port=config.port,
                    timeout_graceful_shutdown=10, log_level="warning")
    finally:
        ctx.close()


@main.command()
@common_options
@click.option("--registrar-username", required=True)
@click.option("--registrar-password", required=True)
def bootstrap(config_path, data_dir, registrar_username, registrar_password):
    """Create the first registrar account in a fresh store."""
    try:
        ctx = _build_context(config_path, data_dir=data_dir)
    except (ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USER_ERROR)
    try:
        existing = ctx.store.query("user", filter={"role": Role.REGISTRAR.value})
        if existing:
            click.echo("error: already_bootstrapped: a registrar account exists", err=True)
            sys.exit(EXIT_USER_ERROR)
        check_password_policy(registrar_password)
        registry.create_user(
            ctx, username=registrar_username, password=registrar_password,
            full_name="Registrar", email="", phone="", role=Role.REGISTRAR,
            id="usr-registrar",
        )
        click.echo(f"registrar {registrar_username} created")
    except CitadelError as exc:
        click.echo(f"error: {exc.code}: {exc.message}", err=True)
        sys.exit(EXIT_USER_ERROR)
    finally:
        ctx.close()


@main.command()
@common_options
@click.option("--fixture", default="demo", help="Named fixture to load.")
def seed(config_path, data_dir, fixture):
    """Load a deterministic demo fixture (idempotent)."""
    try:
        ctx = _build_context(config_path, data_dir=data_dir)
    except (ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USER_ERROR)
    try:
        if not ctx.store.query("user", filter={"role": Role.REGISTRAR.value}):
            click.echo("error: store is not bootstrapped; run 'citadel bootstrap' first", err=True)
            sys.exit(EXIT_USER_ERROR)
        summary = fixtures.seed(ctx, fixture)
        click.echo(f"fixture {fixture!r} loaded: {summary}")
    except CitadelError as exc:
        click.echo(f"error: {exc.code}: {exc.message}", err=True)
        sys.exit(EXIT_USER_ERROR)
    finally:
        ctx.close()


@main.command()
@common_options
@click.option("--out", "out_path", default="-", help="Output path, '-' for stdout.")
def dump(config_path, data_dir, out_path):
    """Export every committed entity as line-delimited canonical JSON."""
    try:
        ctx = _build_context(config_path, data_dir=data_dir)
    except (ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USER_ERROR)
    try:
        lines = ctx.store.dump_lines()
        if out_path == "-":
            for line in lines:
                click.echo(line)
        else:
            try:
                with open(out_path, "w", encoding="utf-8") as fh:
                    for line in lines:
                        fh.write(line + "\n")
            except OSError as exc:
                click.echo(f"error: cannot write {out_path}: {exc}", err=True)
                sys.exit(EXIT_USER_ERROR)
    finally:
        ctx.close()


if __name__ == "__main__":
    main()
