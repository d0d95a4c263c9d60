from pathlib import Path
from typing import List, Literal, Optional
import json

from pydantic import BaseModel, ConfigDict

from src.exceptions.cli import ConfigError

SHARED_BLOCKS = ("source", "weights", "scheme", "spec", "amplifier", "voronoi", "lvalue", "tolerances")
# commands whose flags clash with the shared blocks read only their own
COMMAND_BLOCKS = {"characters": ("characters",)}


class ConfigBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SourceBlock(ConfigBlock):
    form: Optional[Literal["delta", "divisor"]] = None
    coef: Optional[str] = None
    m_max: Optional[int] = None


class WeightsBlock(ConfigBlock):
    A: Optional[List[float]] = None
    B: Optional[float] = None
    P: Optional[float] = None
    X: Optional[float] = None
    Y: Optional[float] = None
    lo: Optional[float] = None
    hi: Optional[float] = None
    steepness: Optional[float] = None


class SchemeBlock(ConfigBlock):
    Q: Optional[List[float]] = None
    delta: Optional[float] = None
    delta_exponents: Optional[List[float]] = None
    N: Optional[int] = None


class SpecBlock(ConfigBlock):
    a: Optional[int] = None
    b: Optional[int] = None
    h: Optional[int] = None
    sign: Optional[Literal[1, -1]] = None
    main_term: Optional[bool] = None


class AmplifierBlock(ConfigBlock):
    chi: Optional[List[str]] = None
    L_amp: Optional[int] = None
    M: Optional[float] = None
    shifted_route: Optional[bool] = None


class VoronoiBlock(ConfigBlock):
    q: Optional[List[int]] = None
    d: Optional[List[int]] = None
    m_cut: Optional[int] = None


class LValueBlock(ConfigBlock):
    s_re: Optional[float] = None
    s_im: Optional[float] = None
    epsilon: Optional[float] = None
    cutoff: Optional[float] = None
    q_min: Optional[int] = None
    q_max: Optional[int] = None


class TolerancesBlock(ConfigBlock):
    tolerance: Optional[float] = None


class CharactersBlock(ConfigBlock):
    q: Optional[int] = None
    primitive_only: Optional[bool] = None


class ExperimentConfig(ConfigBlock):
    """
    Contents of a --config file. Blocks hold the same keys as the command
    flags; flags given on the command line take precedence.
    """

    source: SourceBlock = SourceBlock()
    weights: WeightsBlock = WeightsBlock()
    scheme: SchemeBlock = SchemeBlock()
    spec: SpecBlock = SpecBlock()
    amplifier: AmplifierBlock = AmplifierBlock()
    voronoi: VoronoiBlock = VoronoiBlock()
    lvalue: LValueBlock = LValueBlock()
    tolerances: TolerancesBlock = TolerancesBlock()
    characters: CharactersBlock = CharactersBlock()
    output_format: Optional[Literal["json", "csv"]] = None
    output_path: Optional[str] = None
    threads: Optional[int] = None
    seed: Optional[int] = None
    log_level: Optional[str] = None

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}", path=str(path))
        try:
            document = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc.msg} at line {exc.lineno}", path=str(path), line=exc.lineno)
        if not isinstance(document, dict):
            raise ConfigError(f"{path}: top level must be an object", path=str(path))
        return cls.model_validate(document)

    def global_defaults(self) -> dict:
        keys = ("output_format", "output_path", "threads", "seed", "log_level")
        return {key: getattr(self, key) for key in keys if getattr(self, key) is not None}

    def command_defaults(self, command: str | None = None) -> dict:
        """Every key set in the blocks that `command` reads, flattened to argument names."""
        defaults = {}
        for name in COMMAND_BLOCKS.get(command, SHARED_BLOCKS):
            defaults.update(getattr(self, name).model_dump(exclude_none=True))
        return defaults
