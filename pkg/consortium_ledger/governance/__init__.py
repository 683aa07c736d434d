from .actions import ACTIONS, ActionContext, apply_action
from .ballots import Ballot, vote_against, vote_for
from .constitution import (
    Constitution,
    ConstitutionFactory,
    MajorityConstitution,
    OperatorConstitution,
    PerActionConstitution,
    WeightedConstitution,
    load_constitution,
)
from .engine import GovernanceEngine, read_proposal, read_proposal_info
from .model import (
    Action,
    MemberIdentity,
    Proposal,
    ProposalInfo,
    ProposalState,
    RequestKind,
    SignedRequest,
)
