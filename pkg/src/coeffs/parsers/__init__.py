from .base import BaseParser
from .coef_v1 import CoefV1Parser
from src.exceptions.coeffs import CoefficientFileError


def get_parser(version: str) -> BaseParser:
    if version == "v1":
        return CoefV1Parser()
    raise CoefficientFileError(1, f"No parser found for coefficient format: {version}")
