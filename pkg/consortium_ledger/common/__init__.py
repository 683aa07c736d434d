from .encoding import Reader, canonical_json, parse_json
from .exceptions import (
    ConsortiumLedgerError,
    ConfigurationError,
    EncodingError,
    ValidationError,
)
from .txid import TransactionId
