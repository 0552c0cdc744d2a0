"""
twistorkit command routing
Each router groups the handlers of one area under the commands it serves,
the way the CLI mounts them as subcommands.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Iterable

from models.config import Command, RunConfig
from models.report import CommandResult

Handler = Callable[[RunConfig], CommandResult]


@dataclass(frozen=True)
class Route:
    command: Command
    handler: Handler
    summary: str


class CommandRouter:
    """Registry of command handlers for one area of the toolkit"""

    def __init__(self, tag: str):
        self.tag = tag
        self.routes: Dict[Command, Route] = {}

    def command(self, command: Command, summary: str = "") -> Callable[[Handler], Handler]:
        def register(handler: Handler) -> Handler:
            if command in self.routes:
                raise ValueError(f"command {command.value} registered twice")
            doc = (handler.__doc__ or "").strip().splitlines()
            self.routes[command] = Route(command, handler, summary or (doc[0] if doc else ""))
            return handler

        return register


def collect_routes(routers: Iterable[CommandRouter]) -> Dict[Command, Route]:
    table: Dict[Command, Route] = {}
    for router in routers:
        for command, route in router.routes.items():
            if command in table:
                raise ValueError(f"command {command.value} served by two routers")
            table[command] = route
    return table
