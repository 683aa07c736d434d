from .config_manager import ConfigManager, config_manager, read_structured_file
from .config_models import (
    AppConfig,
    ConsensusConfig,
    LedgerConfig,
    LoggingConfig,
    SimulationConfig,
    SweepConfig,
    UIConfig,
)
