"""
Map names and the built-in map catalogue.

A map is public iff its name starts with "public:". Public updates are
written to the ledger in plaintext; everything else is encrypted with the
ledger secret. Maps under "public:ccf.gov." and "public:ccf.internal." are
owned by governance and the node itself; application endpoints may read but
never write them.
"""

from enum import Enum

PUBLIC_PREFIX = "public:"
GOVERNANCE_PREFIX = "public:ccf.gov."
INTERNAL_PREFIX = "public:ccf.internal."


class Visibility(str, Enum):
    PUBLIC = "public"
    PRIVATE = "private"


class MapName(str):
    """A map name whose visibility is derived from its prefix."""

    @property
    def visibility(self) -> Visibility:
        return Visibility.PUBLIC if self.startswith(PUBLIC_PREFIX) else Visibility.PRIVATE

    @property
    def is_public(self) -> bool:
        return self.visibility is Visibility.PUBLIC

    @property
    def is_governance(self) -> bool:
        return self.startswith(GOVERNANCE_PREFIX)

    @property
    def is_internal(self) -> bool:
        return self.startswith(INTERNAL_PREFIX)

    @property
    def is_reserved(self) -> bool:
        """True for maps application logic may not write."""
        return self.is_governance or self.is_internal


# Governance maps
USERS_CERTS = MapName("public:ccf.gov.users.certs")
MEMBERS_CERTS = MapName("public:ccf.gov.members.certs")
MEMBERS_KEYS = MapName("public:ccf.gov.members.encryption_public_keys")
NODES_INFO = MapName("public:ccf.gov.nodes.info")
NODES_CODE_IDS = MapName("public:ccf.gov.nodes.code_ids")
SERVICE_INFO = MapName("public:ccf.gov.service.info")
SERVICE_CONFIG = MapName("public:ccf.gov.service.config")
CONSTITUTION = MapName("public:ccf.gov.constitution")
MODULES = MapName("public:ccf.gov.modules")
PROPOSALS = MapName("public:ccf.gov.proposals")
PROPOSALS_INFO = MapName("public:ccf.gov.proposals_info")
HISTORY = MapName("public:ccf.gov.history")

# Node-owned maps
SIGNATURES = MapName("public:ccf.internal.signatures")
LEDGER_SECRET = MapName("public:ccf.internal.ledger_secret")
RECOVERY_SHARES = MapName("public:ccf.internal.recovery_shares")
SNAPSHOT_EVIDENCE = MapName("public:ccf.internal.snapshot_evidence")

# Logging application
APP_MESSAGES = MapName("app.msgs")
APP_PUBLIC_MESSAGES = MapName("public:app.msgs")

BUILTIN_MAPS = (
    USERS_CERTS,
    MEMBERS_CERTS,
    MEMBERS_KEYS,
    NODES_INFO,
    NODES_CODE_IDS,
    SERVICE_INFO,
    SERVICE_CONFIG,
    CONSTITUTION,
    MODULES,
    PROPOSALS,
    PROPOSALS_INFO,
    HISTORY,
    SIGNATURES,
    LEDGER_SECRET,
    RECOVERY_SHARES,
    SNAPSHOT_EVIDENCE,
)

# Singleton keys
SIGNATURE_KEY = b"sig"
SERVICE_KEY = b"service"
CONSTITUTION_KEY = b"constitution"
CONFIG_KEY = b"config"
WRAPPED_SECRET_KEY = b"wrapped"
EVIDENCE_KEY = b"evidence"
