"""Scenario configuration: the replayable description of a run.

A scenario is either a declarative script over the fixed action
vocabulary (deposit, sign, relay, push_root, withdraw, revert_mark,
revert_init, halt, execute, advance, go_offline) or a named builtin
driver; both replay deterministically from (config, seed).
"""

import json
from dataclasses import dataclass, field, asdict

from ..dact import validate_chain_id
from ..errors import ChainIdOutOfTier, ConfigInvalid

ACTION_VOCABULARY = {
    "deposit", "sign", "relay", "push_root", "withdraw",
    "revert_mark", "revert_init", "halt", "execute", "advance", "go_offline",
}


@dataclass
class ScenarioConfig:
    seed: int = 0
    name: str = "scenario"
    chains: list = field(default_factory=lambda: [1001, 1002, 1003])
    multiplexer: int = 1002
    merkle_depth: int = 16
    window: int = 100
    cooldown: int = 10
    revert_fee: int = 1
    wallets: list = field(default_factory=lambda: ["alice"])
    oracle: dict = field(default_factory=dict)   # OraclePolicy fields
    dapp: dict = field(default_factory=dict)     # scheme/n/k/resilience fields
    script: list = None                          # declarative action list
    builtin: str = None                          # or a builtin driver name

    def validate(self) -> "ScenarioConfig":
        try:
            for cid in self.chains:
                validate_chain_id(cid)
        except ChainIdOutOfTier as exc:
            raise ConfigInvalid(str(exc)) from exc
        if self.multiplexer not in self.chains:
            raise ConfigInvalid("multiplexer must be one of the configured chains")
        if len(set(self.chains)) != len(self.chains):
            raise ConfigInvalid("duplicate chain ids")
        if not 1 <= self.merkle_depth <= 32:
            raise ConfigInvalid("merkle_depth must be in 1..32")
        if (self.script is None) == (self.builtin is None):
            raise ConfigInvalid("exactly one of script/builtin must be set")
        if self.script is not None:
            for action in self.script:
                if action.get("op") not in ACTION_VOCABULARY:
                    raise ConfigInvalid(f"unknown action {action.get('op')!r}")
        return self

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigInvalid(f"unknown config fields: {sorted(unknown)}")
        return cls(**data).validate()

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)
