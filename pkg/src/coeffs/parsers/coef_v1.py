from typing import Iterable, TextIO

import numpy as np

from .base import BaseParser
from src.coeffs.model import CoefficientFile, CoefficientHeader, SourceKind
from src.exceptions.coeffs import CoefficientFileError

HEADER_KEYS = ("kind", "N", "k", "mu", "neb", "sign", "root")
UNIT_TOLERANCE = 1e-12


def _format(value: float) -> str:
    return format(value, ".17g")


class CoefV1Parser(BaseParser):
    """
    `#coef v1 kind=<holomorphic|maass|divisor> N=<int> k=<int|-> mu=<decimal|->
    neb=<q:index|trivial> sign=<+|-|-> root=<re,im|->`, then `<m> <re> <im>`
    rows with 17 significant digits, m = 1, 2, ... without gaps.
    """

    def parse(self, lines: Iterable[str]) -> CoefficientFile:
        iterator = iter(lines)
        try:
            header_line = next(iterator).rstrip("\n")
        except StopIteration:
            raise CoefficientFileError(1, "empty file")
        header = self._parse_header(header_line)

        m_values: list[int] = []
        re_values: list[float] = []
        im_values: list[float] = []
        for line_number, raw in enumerate(iterator, start=2):
            line = raw.rstrip("\n")
            if not line.strip():
                raise CoefficientFileError(line_number, "blank line")
            parts = line.split()
            if len(parts) != 3:
                raise CoefficientFileError(line_number, f"expected '<m> <re> <im>', got {line!r}")
            try:
                m = int(parts[0])
                re, im = float(parts[1]), float(parts[2])
            except ValueError:
                raise CoefficientFileError(line_number, f"unreadable row {line!r}")

            expected = len(m_values) + 1
            if m < expected:
                raise CoefficientFileError(line_number, f"duplicate or decreasing m={m}")
            if m > expected:
                raise CoefficientFileError(line_number, f"gap at m={expected}")
            m_values.append(m)
            re_values.append(re)
            im_values.append(im)

        if not m_values:
            raise CoefficientFileError(2, "no coefficient rows")
        if abs(complex(re_values[0], im_values[0]) - 1) > UNIT_TOLERANCE:
            raise CoefficientFileError(2, "λ(1) must equal 1 for a primitive source")

        return CoefficientFile(
            header=header,
            m=np.array(m_values, dtype=np.int64),
            re=np.array(re_values),
            im=np.array(im_values),
        )

    def write(self, document: CoefficientFile, stream: TextIO) -> None:
        header = document.header
        fields = {
            "kind": header.kind.value,
            "N": str(header.level),
            "k": str(header.weight) if header.weight is not None else "-",
            "mu": _format(header.mu) if header.mu is not None else "-",
            "neb": header.nebentypus,
            "sign": {1: "+", -1: "-"}.get(header.sign, "-") if header.kind == SourceKind.maass else "-",
            "root": f"{_format(header.root.real)},{_format(header.root.imag)}" if header.root is not None else "-",
        }
        stream.write("#coef v1 " + " ".join(f"{key}={fields[key]}" for key in HEADER_KEYS) + "\n")
        for m, re, im in zip(document.m, document.re, document.im):
            stream.write(f"{int(m)} {_format(float(re))} {_format(float(im))}\n")

    def _parse_header(self, line: str) -> CoefficientHeader:
        if not line.startswith("#coef v1"):
            raise CoefficientFileError(1, "header must start with '#coef v1'")
        fields = self._split_header(line)
        missing = [key for key in HEADER_KEYS if key not in fields]
        if missing:
            raise CoefficientFileError(1, f"missing header keys: {', '.join(missing)}")

        try:
            kind = SourceKind(fields["kind"])
        except ValueError:
            raise CoefficientFileError(1, f"unknown kind {fields['kind']!r}")
        try:
            level = int(fields["N"])
            weight = None if fields["k"] == "-" else int(fields["k"])
            mu = None if fields["mu"] == "-" else float(fields["mu"])
            root = None
            if fields["root"] != "-":
                re_text, im_text = fields["root"].split(",")
                root = complex(float(re_text), float(im_text))
        except ValueError:
            raise CoefficientFileError(1, "malformed numeric header field")

        sign = None
        if kind == SourceKind.maass:
            if fields["sign"] not in ("+", "-"):
                raise CoefficientFileError(1, "maass sources need sign=+ or sign=-")
            sign = 1 if fields["sign"] == "+" else -1
        if kind == SourceKind.holomorphic and weight is None:
            raise CoefficientFileError(1, "holomorphic sources need k")
        if kind == SourceKind.maass and mu is None:
            raise CoefficientFileError(1, "maass sources need mu")

        return CoefficientHeader(
            kind=kind, level=level, weight=weight, mu=mu, nebentypus=fields["neb"], sign=sign, root=root
        )
