"""
Scenario models for the simulator.

A scenario fixes everything a run depends on: the seed, the initial
service, client workloads, a fault schedule and a governance script. The
consensus/ledger/simulation sections override the application config for
this run only.
"""

from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, validator

from consortium_ledger.common.exceptions import ConfigurationError
from consortium_ledger.config.config_manager import read_structured_file
from consortium_ledger.config.config_models import (
    AppConfig,
    ConsensusConfig,
    LedgerConfig,
    SimulationConfig,
)

FaultKind = Literal[
    "crash",
    "restart_as_new",
    "resume_from_disk",
    "join",
    "partition",
    "heal",
    "network",
    "crash_all",
    "recover",
]


class ClientSpec(BaseModel):
    """One client workload."""

    name: str
    node: Optional[str] = Field(None, description="Node to attach to; default spreads clients")
    read_ratio: float = Field(0.0, description="Fraction of requests that are reads")
    mode: Literal["closed", "open"] = Field("closed", description="Closed or open loop")
    think_ms: float = Field(5.0, description="Pause between requests in closed loop")
    rate_per_s: float = Field(100.0, description="Request rate in open loop")
    payload_size: int = Field(16, description="Bytes per written message")
    public: bool = Field(False, description="Write to the public message map")
    await_commit: bool = Field(True, description="Poll each write until it is final")
    start_ms: float = 0.0
    stop_ms: Optional[float] = None
    timeout_ms: float = Field(500.0, description="Give up on a request after this long")

    @validator("read_ratio")
    def validate_ratio(cls, v):
        if not 0.0 <= v <= 1.0:
            raise ValueError("read_ratio must lie in [0, 1]")
        return v


class FaultSpec(BaseModel):
    """
    One scheduled fault.

    crash / resume_from_disk: `node`, or "primary" for whichever node leads
    when the fault fires; restart_as_new: `node` crashes and
    `new_node` joins; join: `new_node` joins; partition: `groups`; heal;
    network: new delay / drop settings; crash_all; recover: `new_node`
    recovers from the ledger of `node`, members in `members` submit shares.
    """

    at_ms: float
    kind: FaultKind
    node: Optional[str] = None
    new_node: Optional[str] = None
    groups: List[List[str]] = Field(default_factory=list)
    min_delay_ms: Optional[float] = None
    max_delay_ms: Optional[float] = None
    drop_rate: Optional[float] = None
    members: List[str] = Field(default_factory=list)
    committed_only: bool = False
    label: Optional[str] = Field(
        None, description="Name under which the affected node can be referenced as @label"
    )


class GovernanceStep(BaseModel):
    """
    A proposal submitted by `member`, followed by ballots from `voters`.

    `after_pending` delays submission until the primary has admitted those
    nodes as PENDING. Instead of member/actions/voters a step may list
    `request_files`: member-signed requests (see the propose and vote
    commands) submitted as they are.
    """

    at_ms: float
    label: str
    member: Optional[str] = None
    actions: List[Dict[str, Any]] = Field(default_factory=list)
    voters: List[str] = Field(default_factory=list)
    vote: bool = True
    after_pending: List[str] = Field(default_factory=list)
    request_files: List[Path] = Field(default_factory=list)

    @validator("request_files", always=True)
    def validate_source(cls, v, values):
        if not v and not (values.get("member") and values.get("actions")):
            raise ValueError("a governance step needs member and actions, or request_files")
        return v


class TamperSpec(BaseModel):
    """Mutation applied to one node's ledger files when they are written out."""

    node: str
    kind: Literal["flip", "truncate"] = "flip"
    file_index: int = Field(-1, description="Which chunk file, by position")
    offset: int = Field(-1, description="Byte offset; negative counts from the end")


class Scenario(BaseModel):
    name: str = "scenario"
    seed: int = 0
    nodes: int = Field(3, description="Initial node count")
    members: int = Field(3, description="Consortium size")
    recovery_threshold: Optional[int] = None
    constitution: Optional[Dict[str, Any]] = None
    auto_open: bool = Field(
        True, description="Members trust the initial nodes and open the service at start"
    )
    duration_ms: float = 2000.0
    consensus: Dict[str, Any] = Field(default_factory=dict)
    ledger: Dict[str, Any] = Field(default_factory=dict)
    simulation: Dict[str, Any] = Field(default_factory=dict)
    clients: List[ClientSpec] = Field(default_factory=list)
    faults: List[FaultSpec] = Field(default_factory=list)
    governance: List[GovernanceStep] = Field(default_factory=list)
    tamper: List[TamperSpec] = Field(default_factory=list)
    chunk_threshold: int = Field(1, description="Minimum entries per closed ledger chunk")

    class Config:
        extra = "forbid"

    @validator("nodes", "members")
    def validate_counts(cls, v):
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @property
    def node_ids(self) -> List[str]:
        return [f"n{i}" for i in range(self.nodes)]

    @property
    def member_ids(self) -> List[str]:
        return [f"m{i}" for i in range(self.members)]

    def app_config(self, base: Optional[AppConfig] = None) -> AppConfig:
        """Base config with this scenario's overrides applied."""
        base = base or AppConfig()
        return base.copy(
            update={
                "consensus": ConsensusConfig(**{**base.consensus.dict(), **self.consensus}),
                "ledger": LedgerConfig(**{**base.ledger.dict(), **self.ledger}),
                "simulation": SimulationConfig(**{**base.simulation.dict(), **self.simulation}),
            }
        )

    def with_param(self, name: str, value: Any) -> "Scenario":
        """
        Copy with one override set, e.g. ("signature_interval", 10) or
        ("consensus.heartbeat_ms", 20).
        """
        if "." in name:
            section, key = name.split(".", 1)
        else:
            section = next(
                (
                    s
                    for s, model in (
                        ("ledger", LedgerConfig),
                        ("consensus", ConsensusConfig),
                        ("simulation", SimulationConfig),
                    )
                    if name in model.__fields__
                ),
                None,
            )
            key = name
        if section in ("ledger", "consensus", "simulation"):
            overrides = {**getattr(self, section), key: value}
            return self.copy(update={section: overrides})
        if name in self.__fields__:
            return self.copy(update={name: value})
        raise ConfigurationError(f"unknown scenario parameter {name}", param=name)


def load_scenario(path: Union[str, Path]) -> Scenario:
    """
    Raises:
        ConfigurationError: If the file is unreadable or invalid
    """
    path = Path(path)
    doc = read_structured_file(path)
    # request files are named relative to the scenario file
    for step in doc.get("governance") or []:
        if isinstance(step, dict) and step.get("request_files"):
            step["request_files"] = [
                str((path.parent / name).resolve()) for name in step["request_files"]
            ]
    try:
        return Scenario(**doc)
    except ConfigurationError:
        raise
    except ValueError as e:
        raise ConfigurationError(f"invalid scenario {path}: {e}")
