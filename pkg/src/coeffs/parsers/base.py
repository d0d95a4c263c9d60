from abc import ABC, abstractmethod
from typing import Iterable, TextIO

from src.coeffs.model import CoefficientFile


class BaseParser(ABC):
    @abstractmethod
    def parse(self, lines: Iterable[str]) -> CoefficientFile:
        """
        Parses the lines of a coefficient file (header included) into a
        validated CoefficientFile.
        """
        pass

    @abstractmethod
    def write(self, document: CoefficientFile, stream: TextIO) -> None:
        pass

    def _split_header(self, line: str) -> dict[str, str]:
        fields = {}
        for token in line.split()[2:]:
            key, _, value = token.partition("=")
            fields[key] = value
        return fields
