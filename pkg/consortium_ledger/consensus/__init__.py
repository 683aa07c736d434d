from .configurations import ActiveConfigurations, Configuration
from .core import ConsensusCore, Role, StateMachine
from .messages import (
    AppendEntries,
    AppendEntriesResponse,
    ForwardedRequest,
    ForwardedResponse,
    InstallSnapshot,
    JoinRequest,
    JoinResponse,
    Message,
    RequestVote,
    RequestVoteResponse,
)
