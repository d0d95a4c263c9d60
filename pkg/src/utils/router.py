"""
Command registration for the CLI, in the spirit of an API router: every
feature module declares its subcommands on a `CommandRouter` and `src.cli`
mounts them on the top-level parser.
"""
from dataclasses import dataclass, field
from typing import Any, Callable
import argparse


def arg(*flags: str, **kwargs) -> tuple[tuple[str, ...], dict[str, Any]]:
    return flags, kwargs


def _dest(flags: tuple[str, ...], kwargs: dict[str, Any]) -> str:
    return kwargs.get("dest") or flags[0].lstrip("-").replace("-", "_")


@dataclass
class Command:
    name: str
    help: str
    handler: Callable
    arguments: list[tuple[tuple[str, ...], dict[str, Any]]] = field(default_factory=list)

    @property
    def required_options(self) -> dict[str, str]:
        """dest → flag for options marked required; they may also come from --config."""
        return {
            _dest(flags, kwargs): flags[0]
            for flags, kwargs in self.arguments
            if kwargs.get("required") and flags[0].startswith("-")
        }


class CommandRouter:
    def __init__(self, tags: list[str] | None = None):
        self.tags = tags or []
        self.commands: list[Command] = []

    def command(self, name: str, help: str, arguments: list | None = None):
        def decorator(handler: Callable) -> Callable:
            self.commands.append(Command(name, help, handler, list(arguments or [])))
            return handler

        return decorator

    def mount(self, subparsers: argparse._SubParsersAction) -> dict[str, argparse.ArgumentParser]:
        """
        Required options are registered as optional and checked after the
        --config merge by `missing_options`.
        """
        parsers = {}
        for command in self.commands:
            parser = subparsers.add_parser(command.name, help=command.help, description=command.help)
            for flags, kwargs in command.arguments:
                kwargs = {key: value for key, value in kwargs.items() if key != "required"}
                parser.add_argument(*flags, **kwargs)
            parser.set_defaults(handler=command.handler, command=command.name)
            parsers[command.name] = parser
        return parsers

    def find(self, name: str) -> Command | None:
        return next((command for command in self.commands if command.name == name), None)


def missing_options(command: Command, args: argparse.Namespace) -> list[str]:
    return [flag for dest, flag in command.required_options.items() if getattr(args, dest, None) is None]
