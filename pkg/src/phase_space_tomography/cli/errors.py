"""Machine-readable CLI errors."""

import functools
import json
from typing import Any, Callable, TypeVar, cast

import click
from pydantic import ValidationError

from phase_space_tomography.exceptions import SchemaError, TomographyError

F = TypeVar("F", bound=Callable[..., Any])


class CommandError(click.ClickException):
    """Prints {"error": {"code", "type", "message"}} on stderr and exits with status 1."""

    exit_code = 1

    def __init__(self, message: str, code: str, error_type: str):
        super().__init__(message)
        self.code = code
        self.error_type = error_type

    def payload(self) -> str:
        return json.dumps(
            {"error": {"code": self.code, "type": self.error_type, "message": self.message}},
            sort_keys=True,
        )

    def show(self, file: Any = None) -> None:
        click.echo(self.payload(), err=True)

    @classmethod
    def from_exception(cls, e: Exception) -> "CommandError":
        if isinstance(e, TomographyError):
            return cls(str(e), e.code, type(e).__name__)
        if isinstance(e, ValidationError):
            return cls(str(e), SchemaError.code, type(e).__name__)
        if isinstance(e, FileNotFoundError):
            return cls(str(e), "file_not_found", type(e).__name__)
        if isinstance(e, OSError):
            return cls(str(e), "io", type(e).__name__)
        if isinstance(e, ValueError):
            return cls(str(e), "invalid_argument", type(e).__name__)
        return cls(str(e), "internal", type(e).__name__)


def json_errors(fn: F) -> F:
    """Turn module errors raised by a command body into CommandError."""

    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return fn(*args, **kwargs)
        except (click.ClickException, click.exceptions.Exit):
            raise
        except Exception as e:
            raise CommandError.from_exception(e)

    return cast(F, wrapper)
