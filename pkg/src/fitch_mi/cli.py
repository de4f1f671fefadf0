"""Command-line interface: batch checking, interactive proving, serving."""

from __future__ import annotations

import json
import sys

import click

from .checker import check_module
from .parser import ParseError, parse_module
from .search import autonomous_hook
from .session import AWAITING_USER, COMMANDS, DONE, DONE_WITH_GAPS, Session, SessionError

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 2
EXIT_USAGE = 64


@click.group()
def cli() -> None:
    """A proof assistant for Fitch-style proofs over declared judgments."""


def _load_module(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        click.echo(f"cannot read {path}: {e.strerror}", err=True)
        sys.exit(EXIT_PARSE)
    try:
        return parse_module(text)
    except ParseError as e:
        click.echo(f"{path}:{e}", err=True)
        sys.exit(EXIT_PARSE)


@cli.command()
@click.argument("path")
@click.option("--no-auto", is_flag=True, help="Disable prove justifications.")
@click.option("--max-depth", default=32, show_default=True, help="Search depth limit.")
@click.option(
    "--diagnostics",
    type=click.Choice(["json"]),
    default=None,
    help="Emit a machine-readable report.",
)
@click.option(
    "--assume-failed",
    is_flag=True,
    help="Let later theorems use theorems whose proofs failed.",
)
def check(path: str, no_auto: bool, max_depth: int, diagnostics: str | None,
          assume_failed: bool) -> None:
    """Check every theorem of a module."""
    module = _load_module(path)
    hook = None if no_auto else autonomous_hook(max_depth)
    report = check_module(
        module,
        search_hook=hook,
        prove_enabled=not no_auto,
        assume_failed=assume_failed,
    )
    if diagnostics == "json":
        click.echo(json.dumps(report.to_json(), ensure_ascii=False))
    else:
        for r in report.results:
            if r.proved:
                click.echo(f"{r.name}: Proved")
            else:
                where = f" (line {r.error.pos})" if r.error.pos else ""
                click.echo(f"{r.name}: Failed{where}: {r.error.message}")
    sys.exit(EXIT_OK if report.ok else EXIT_FAIL)


def _read_response(lines) -> tuple | None:
    """One user response from a line iterator.

    A line holding just a command word is a command; anything else starts a
    fragment that runs until a line holding only ``.``.
    """
    for first in lines:
        stripped = first.strip()
        if not stripped:
            continue
        if stripped in COMMANDS:
            return ("command", stripped)
        fragment = [first.rstrip("\n")]
        for line in lines:
            if line.strip() == ".":
                break
            fragment.append(line.rstrip("\n"))
        return ("fragment", "\n".join(fragment))
    return None


@cli.command()
@click.argument("path")
@click.argument("theorem")
@click.option("--script", "script_path", default=None,
              help="Replay responses from a file instead of standard input.")
@click.option("--elaborate", "mode", type=click.Choice(["full", "gapped"]),
              default="gapped", show_default=True)
@click.option("--out", "out_path", default=None, help="Write the elaborated module here.")
@click.option("--max-depth", default=32, show_default=True)
def prove(path: str, theorem: str, script_path: str | None, mode: str,
          out_path: str | None, max_depth: int) -> None:
    """Prove one theorem interactively, suspending when search gets stuck."""
    module = _load_module(path)
    try:
        session = Session(module, theorem, max_depth)
    except SessionError as e:
        click.echo(str(e), err=True)
        sys.exit(EXIT_PARSE)
    scripted = script_path is not None
    if scripted:
        try:
            source = open(script_path, encoding="utf-8")
        except OSError as e:
            click.echo(f"cannot read {script_path}: {e.strerror}", err=True)
            sys.exit(EXIT_PARSE)
        lines = iter(source.read().splitlines(keepends=True))
    else:
        lines = sys.stdin

    while session.phase == AWAITING_USER:
        click.echo(session.prompt_text())
        response = _read_response(lines)
        if response is None:
            click.echo("no more responses", err=True)
            sys.exit(EXIT_FAIL)
        if response[0] == "command":
            name = response[1]
            if name == "context":
                for h in session.prompt_json()["hypotheses"]:
                    click.echo(f"{h['label']} : {h['formula']}")
                continue
            if name == "trace":
                continue  # the prompt is re-printed at the top of the loop
            result = session.submit_command(name)
        else:
            result = session.submit_fragment(response[1])
        if result["type"] == "error":
            where = f" (line {result['line']})" if "line" in result else ""
            click.echo(f"error{where}: {result['message']}")
            if scripted:
                sys.exit(EXIT_FAIL)

    if session.phase in (DONE, DONE_WITH_GAPS):
        text = session.elaborate(mode)
        if out_path:
            with open(out_path, "w", encoding="utf-8") as fh:
                fh.write(text)
            click.echo(f"wrote {out_path}")
        else:
            click.echo(text)
        sys.exit(EXIT_OK)
    click.echo(f"failed: {session.reason}", err=True)
    sys.exit(EXIT_FAIL)


@cli.command()
@click.option("--port", default=7414, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(port: int, host: str) -> None:
    """Serve the session wire protocol (and the web UI, if built)."""
    import uvicorn

    from .server import app

    try:
        uvicorn.run(app, host=host, port=port, log_level="info")
    except OSError as e:
        click.echo(f"cannot bind {host}:{port}: {e.strerror}", err=True)
        sys.exit(EXIT_FAIL)


def main() -> None:
    try:
        cli.main(standalone_mode=False)
    except click.ClickException as e:
        e.show()
        sys.exit(EXIT_USAGE)
    except click.exceptions.Abort:
        sys.exit(EXIT_FAIL)


if __name__ == "__main__":
    main()
