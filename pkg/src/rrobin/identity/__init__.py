from .messages import (
    AttestationQuote,
    AttestedEnrollMsg,
    EnrollMsg,
    MinedEnrollMsg,
    decode_enroll,
    encode_enroll,
    enrollment_userdata,
)
from .mock_ias import MockIAS, UnknownPlatform, mock_ias_issue_quote, verify_quote
from .pow import InitCandidate, check_initial_identity, mine_initial_identity
from .records import IdentityKind, IdentityRecord, age
from .validate import validate_attested_enrollment, validate_mined_enrollment
