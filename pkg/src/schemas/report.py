from typing import Any, Generic, List, TypeVar

from pydantic import BaseModel, ConfigDict

from src import __version__

T = TypeVar("T")


class Report(BaseModel, Generic[T]):
    model_config = ConfigDict(populate_by_name=True)

    command: str
    status: str = "ok"
    version: str = __version__
    config: dict[str, Any]
    rows: List[T]
    summary: dict[str, Any] = {}

    @classmethod
    def create(cls, command: str, config: dict, rows: List[T], **summary):
        return cls(command=command, config=config, rows=rows, summary=summary)
