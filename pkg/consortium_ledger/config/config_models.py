"""
Configuration models for consortium ledger.

This module contains Pydantic models that define the configuration
structure and provide validation for the protocol, the simulator and the CLI.
Scenario files reuse the consensus/ledger/simulation sections as per-run
overrides.
"""

from pathlib import Path
from typing import Optional, Tuple

from pydantic import BaseModel, Field, validator


class LoggingConfig(BaseModel):
    """Logging configuration."""

    verbose: bool = Field(False, description="Enable verbose output")
    log_file: Optional[Path] = Field(None, description="Path to log file")
    log_level: str = Field("WARNING", description="Log level")

    @validator("log_level")
    def validate_log_level(cls, v):
        """Validate log level."""
        valid_levels = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
        if v.upper() not in valid_levels:
            raise ValueError(f"Log level must be one of {valid_levels}")
        return v.upper()

    @validator("log_file", pre=True)
    def validate_log_file(cls, v):
        """Convert string to Path and expand user directory."""
        if v is None:
            return None
        if isinstance(v, str):
            return Path(v).expanduser()
        return v


class UIConfig(BaseModel):
    """User interface configuration."""

    progress_bars: bool = Field(
        True, description="Show progress bars during sweeps"
    )
    color_output: bool = Field(True, description="Use colored terminal output")


class ConsensusConfig(BaseModel):
    """Timing parameters of the consensus protocol, in simulated milliseconds."""

    election_timeout_ms: Tuple[int, int] = Field(
        (150, 300), description="Range the randomized election timeout is drawn from"
    )
    heartbeat_ms: int = Field(50, description="Primary heartbeat interval")
    liveness_window_ms: Optional[int] = Field(
        None,
        description="Window within which a primary must hear from a quorum; "
        "defaults to twice the maximum election timeout",
    )
    max_batch: int = Field(64, description="Maximum entries per append_entries")
    join_retry_ms: int = Field(100, description="Interval between join attempts")

    @validator("election_timeout_ms")
    def validate_timeout_range(cls, v):
        low, high = v
        if low <= 0 or high < low:
            raise ValueError("election timeout range must satisfy 0 < low <= high")
        return (int(low), int(high))

    @validator("heartbeat_ms", "max_batch", "join_retry_ms")
    def validate_positive(cls, v):
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @property
    def effective_liveness_window_ms(self) -> int:
        if self.liveness_window_ms is not None:
            return self.liveness_window_ms
        return 2 * self.election_timeout_ms[1]


class LedgerConfig(BaseModel):
    """Signature and snapshot cadence."""

    signature_interval: int = Field(
        100, description="Emit a signature after this many entries"
    )
    signature_interval_ms: Optional[int] = Field(
        100,
        description="Emit a signature after this much simulated time with "
        "unsigned entries; null disables the time trigger",
    )
    snapshot_interval: Optional[int] = Field(
        None, description="Record snapshot evidence every N entries"
    )

    @validator("signature_interval")
    def validate_signature_interval(cls, v):
        if v < 1:
            raise ValueError("signature interval must be at least 1")
        return v


class SimulationConfig(BaseModel):
    """Simulator defaults: node cost model and network behaviour."""

    tick_ms: float = Field(10.0, description="Node timer granularity")
    write_cost_ms: float = Field(0.2, description="Processing cost of one write")
    read_cost_ms: float = Field(0.05, description="Processing cost of one read")
    signature_cost_ms: float = Field(
        2.0, description="Processing cost of producing one signature"
    )
    min_delay_ms: float = Field(1.0, description="Minimum network delay")
    max_delay_ms: float = Field(5.0, description="Maximum network delay")
    drop_rate: float = Field(0.0, description="Probability a message is dropped")
    status_poll_ms: float = Field(
        20.0, description="Interval at which clients poll transaction status"
    )

    @validator("drop_rate")
    def validate_drop_rate(cls, v):
        if not 0.0 <= v < 1.0:
            raise ValueError("drop rate must lie in [0, 1)")
        return v

    @validator("max_delay_ms")
    def validate_delays(cls, v, values):
        if "min_delay_ms" in values and v < values["min_delay_ms"]:
            raise ValueError("max_delay_ms must not be below min_delay_ms")
        return v


class SweepConfig(BaseModel):
    """Parameter sweep defaults."""

    workers: int = Field(0, description="Worker processes; 0 means one per CPU")
    seeds: int = Field(5, description="Seeds per parameter value")


class AppConfig(BaseModel):
    """Main application configuration."""

    logging: LoggingConfig = Field(
        default_factory=LoggingConfig, description="Logging configuration"
    )
    ui: UIConfig = Field(
        default_factory=UIConfig, description="User interface configuration"
    )
    consensus: ConsensusConfig = Field(
        default_factory=ConsensusConfig, description="Consensus timing"
    )
    ledger: LedgerConfig = Field(
        default_factory=LedgerConfig, description="Signature and snapshot cadence"
    )
    simulation: SimulationConfig = Field(
        default_factory=SimulationConfig, description="Simulator defaults"
    )
    sweep: SweepConfig = Field(
        default_factory=SweepConfig, description="Parameter sweep defaults"
    )

    class Config:
        """Pydantic model configuration."""

        validate_assignment = True
        extra = "ignore"

    def model_dump(self, **kwargs):
        """
        Compatibility for older versions of pydantic.
        """
        if hasattr(super(), "model_dump"):
            return super().model_dump(**kwargs)
        return self.dict(**kwargs)
