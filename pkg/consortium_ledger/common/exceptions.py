class ConsortiumLedgerError(Exception):
    """Base exception for consortium ledger errors."""

    def __init__(self, message: str, exit_code: int = 1):
        """
        Initialize exception with message and exit code.

        Args:
            message: Error message
            exit_code: Exit code to use when error terminates program
        """
        self.message = message
        self.exit_code = exit_code
        super().__init__(self.message)


class ConfigurationError(ConsortiumLedgerError):
    """Raised when configuration is invalid."""

    def __init__(self, message: str, param: str = None, exit_code: int = 3):
        """
        Initialize configuration error.

        Args:
            message: Error message
            param: Parameter that caused the error
            exit_code: Exit code to use when error terminates program
        """
        self.param = param
        param_info = f" parameter '{param}'" if param else ""
        super().__init__(f"Configuration error{param_info}: {message}", exit_code)


class ValidationError(ConsortiumLedgerError):
    """Raised when input validation fails."""

    def __init__(self, message: str, field: str = None, exit_code: int = 6):
        """
        Initialize validation error.

        Args:
            message: Error message
            field: Field that failed validation
            exit_code: Exit code to use when error terminates program
        """
        self.field = field
        field_info = f" in '{field}'" if field else ""
        super().__init__(f"Validation error{field_info}: {message}", exit_code)


class EncodingError(ConsortiumLedgerError):
    """Raised when a binary frame cannot be decoded."""

    def __init__(self, message: str, offset: int = None, exit_code: int = 7):
        self.offset = offset
        offset_info = f" at offset {offset}" if offset is not None else ""
        super().__init__(f"Encoding error{offset_info}: {message}", exit_code)


class CryptoError(ConsortiumLedgerError):
    """Raised when a cryptographic operation is misused."""

    def __init__(self, message: str, exit_code: int = 10):
        super().__init__(f"Crypto error: {message}", exit_code)


class ShareParameterError(CryptoError):
    """Raised for invalid secret sharing parameters or duplicate share indices."""


class ThresholdError(CryptoError):
    """Raised when fewer shares than the threshold are supplied."""


class MerkleError(ConsortiumLedgerError):
    """Raised on Merkle tree misuse."""

    def __init__(self, message: str, exit_code: int = 11):
        super().__init__(f"Merkle error: {message}", exit_code)


class EmptyTreeError(MerkleError):
    """Raised when a root is requested from an empty tree."""


class ProofRangeError(MerkleError):
    """Raised when a proof is requested for a leaf outside the tree."""


class StoreError(ConsortiumLedgerError):
    """Raised when the key-value store rejects an operation."""

    def __init__(self, message: str, map_name: str = None, exit_code: int = 12):
        """
        Initialize store error.

        Args:
            message: Error message
            map_name: Map involved in the failure, if any
            exit_code: Exit code to use when error terminates program
        """
        self.map_name = map_name
        map_info = f" [{map_name}]" if map_name else ""
        super().__init__(f"Store error{map_info}: {message}", exit_code)


class SequencingError(StoreError):
    """Raised when a write-set is applied out of sequence."""


class CommittedRollbackError(StoreError):
    """Raised when a rollback would discard committed state."""


class AccessDeniedError(StoreError):
    """Raised when application logic touches a map it may not write."""


class SnapshotError(StoreError):
    """Raised when a snapshot cannot be decoded or fails verification."""


class LedgerIntegrityError(ConsortiumLedgerError):
    """Raised when an append or truncation would break ledger invariants."""

    def __init__(self, message: str, seqno: int = None, exit_code: int = 13):
        self.seqno = seqno
        seqno_info = f" at seqno {seqno}" if seqno is not None else ""
        super().__init__(f"Ledger integrity error{seqno_info}: {message}", exit_code)


class ConsensusError(ConsortiumLedgerError):
    """Raised when consensus state is misused."""

    def __init__(self, message: str, node_id: str = None, exit_code: int = 14):
        self.node_id = node_id
        node_info = f" on {node_id}" if node_id else ""
        super().__init__(f"Consensus error{node_info}: {message}", exit_code)


class ConsensusInvariantError(ConsensusError):
    """Raised when a node is asked to do something that would violate safety."""


class GovernanceError(ConsortiumLedgerError):
    """Raised when a governance action cannot be validated or applied."""

    def __init__(self, message: str, action: str = None, exit_code: int = 15):
        self.action = action
        action_info = f" in action '{action}'" if action else ""
        super().__init__(f"Governance error{action_info}: {message}", exit_code)


class RecoveryError(ConsortiumLedgerError):
    """Raised when disaster recovery cannot proceed."""

    def __init__(self, message: str, exit_code: int = 16):
        super().__init__(f"Recovery error: {message}", exit_code)


class SimulationError(ConsortiumLedgerError):
    """Raised when a scenario cannot be executed."""

    def __init__(self, message: str, exit_code: int = 17):
        super().__init__(f"Simulation error: {message}", exit_code)


class InvariantViolationError(SimulationError):
    """Raised when a run breaks a safety invariant."""

    def __init__(self, message: str, event_index: int = None, exit_code: int = 18):
        self.event_index = event_index
        index_info = f" (event {event_index})" if event_index is not None else ""
        ConsortiumLedgerError.__init__(
            self, f"Invariant violation{index_info}: {message}", exit_code
        )


class UserInterruptError(ConsortiumLedgerError):
    """Raised when user interrupts operation."""

    def __init__(
        self, message: str = "Operation interrupted by user", exit_code: int = 130
    ):
        """
        Initialize user interrupt error.

        Args:
            message: Error message
            exit_code: Exit code to use when error terminates program
        """
        super().__init__(message, exit_code)
