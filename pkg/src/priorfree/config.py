"""Experiment configuration: a strict JSON schema for one protocol sweep."""
from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .channels import Channel, InteractiveSpec
from .protocols.common import OConstants, ProtocolParams

PROTOCOLS = ("estimate", "sw1", "sw2", "sw3", "rst1", "rst2", "int2", "int3")
_BSC = re.compile(r"^bsc\(\s*([0-9.eE+-]+)\s*\)$")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ChannelConfig(_Strict):
    """A named preset or an explicit table p(m | own input, earlier messages...)."""

    kind: Literal["identity", "bsc", "constant", "table"]
    flip: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    output_size: Optional[int] = Field(default=None, ge=1)
    symbol: int = 0
    table: Optional[list] = None

    @model_validator(mode="after")
    def _complete(self):
        if self.kind == "bsc" and self.flip is None:
            raise ValueError("bsc needs 'flip'")
        if self.kind == "table" and self.table is None:
            raise ValueError("table channel needs 'table'")
        return self

    @classmethod
    def parse(cls, value) -> "ChannelConfig":
        if isinstance(value, ChannelConfig):
            return value
        if isinstance(value, str):
            v = value.strip().lower()
            if v in ("identity", "constant"):
                return cls(kind=v)
            m = _BSC.match(v)
            if m:
                return cls(kind="bsc", flip=float(m.group(1)))
            raise ValueError(f"unknown channel preset {value!r}")
        return cls.model_validate(value)

    def build(self, own_size: int, earlier: tuple[int, ...] = ()) -> Channel:
        """The channel for one round: own input first, earlier messages after."""
        if self.kind == "table":
            ch = Channel(np.asarray(self.table, dtype=float))
            if ch.input_arities != (own_size, *earlier):
                raise ValueError(f"table inputs {ch.input_arities} != {(own_size, *earlier)}")
            return ch
        if self.kind == "identity":
            base = Channel.identity(own_size)
        elif self.kind == "bsc":
            if own_size != 2:
                raise ValueError("bsc needs a binary input")
            base = Channel.bsc(self.flip)
        else:
            base = Channel.constant((own_size,), self.output_size or 1, self.symbol)
        return base.extend_inputs(*earlier) if earlier else base


class OConfig(_Strict):
    inv_n: float = 4.0
    one: float = 4.0
    inv_jn: float = 4.0


class ParamsConfig(_Strict):
    n: int = Field(ge=1)
    delta: float = Field(default=0.1, ge=0.0)
    delta_prime: float = Field(default=0.1, ge=0.0)
    delta_double_prime: float = Field(default=0.1, ge=0.0)
    delta_s: float = Field(default=0.2, ge=0.0)
    o_constants: OConfig = OConfig()
    c_override: Optional[float] = None
    r_override: Optional[float] = None

    def build(self) -> ProtocolParams:
        o = OConstants(self.o_constants.inv_n, self.o_constants.one, self.o_constants.inv_jn)
        return ProtocolParams(n=self.n, delta=self.delta, delta_prime=self.delta_prime,
                              delta_double_prime=self.delta_double_prime, delta_s=self.delta_s,
                              o=o, c_override=self.c_override, r_override=self.r_override)


class FixedInputs(_Strict):
    kind: Literal["fixed"]
    x: list[int]
    y: list[int]


class IidInputs(_Strict):
    """Each trial draws (x_i, y_i) i.i.d. from ``joint`` (shape |X| x |Y|)."""

    kind: Literal["iid"]
    joint: list[list[float]]

    @field_validator("joint")
    @classmethod
    def _is_distribution(cls, v):
        a = np.asarray(v, dtype=float)
        if np.any(a < 0) or abs(a.sum() - 1.0) > 1e-9:
            raise ValueError("joint must be a probability table")
        return v


class ListInputs(_Strict):
    """An adversarial list of pairs, used in order and cycled."""

    kind: Literal["list"]
    pairs: list[tuple[list[int], list[int]]] = Field(min_length=1)


InputLaw = Union[FixedInputs, IidInputs, ListInputs]


class NewmanConfig(_Strict):
    strings: int = Field(default=1024, ge=1)
    seed: int = 0


class ExperimentConfig(_Strict):
    protocol: Literal["estimate", "sw1", "sw2", "sw3", "rst1", "rst2", "int2", "int3"]
    x_size: int = Field(default=2, ge=1)
    y_size: int = Field(default=2, ge=1)
    channels: list = Field(default_factory=list)
    t_tilde: Union[Literal["exact"], list[list[float]]] = "exact"
    inputs: InputLaw = Field(discriminator="kind")
    params: ParamsConfig
    mode: Literal["unbounded", "newman"] = "unbounded"
    newman: NewmanConfig = NewmanConfig()
    trials: int = Field(default=100, ge=0)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    output: Optional[str] = None

    @field_validator("channels")
    @classmethod
    def _channels(cls, v):
        return [ChannelConfig.parse(c) for c in v]

    @model_validator(mode="after")
    def _consistent(self):
        needs = {"sw3": 1, "rst1": 1, "rst2": 1}
        if self.protocol in needs and len(self.channels) != 1:
            raise ValueError(f"{self.protocol} needs exactly one channel")
        if self.protocol in ("int2", "int3") and not self.channels:
            raise ValueError(f"{self.protocol} needs at least one channel")
        n = self.params.n
        if isinstance(self.inputs, FixedInputs):
            self._check_pair(self.inputs.x, self.inputs.y, n)
        elif isinstance(self.inputs, ListInputs):
            for x, y in self.inputs.pairs:
                self._check_pair(x, y, n)
        else:
            if np.asarray(self.inputs.joint).shape != (self.x_size, self.y_size):
                raise ValueError("inputs.joint shape must be (x_size, y_size)")
        return self

    def _check_pair(self, x, y, n):
        if len(x) != n or len(y) != n:
            raise ValueError(f"input sequences must have length params.n = {n}")
        if min(x + y, default=0) < 0 or max(x, default=0) >= self.x_size or \
                max(y, default=0) >= self.y_size:
            raise ValueError("input symbol outside its alphabet")

    def spec(self) -> InteractiveSpec:
        """Rounds alternate Alice, Bob, ...; each channel sees its owner's input and earlier messages."""
        chans: list[Channel] = []
        sizes: list[int] = []
        for i, cc in enumerate(self.channels, start=1):
            own = self.x_size if i % 2 else self.y_size
            ch = cc.build(own, tuple(sizes))
            chans.append(ch)
            sizes.append(ch.output_arity)
        return InteractiveSpec(self.x_size, self.y_size, tuple(chans))


def load_config(path: str | Path) -> ExperimentConfig:
    return ExperimentConfig.model_validate(json.loads(Path(path).read_text()))
