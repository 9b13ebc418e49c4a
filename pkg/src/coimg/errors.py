"""Exception hierarchy for the composite generation pipeline."""


class CoimgError(Exception):
    """Base class for all pipeline errors."""


class EmptyDataset(CoimgError):
    """No class directory contained a decodable image."""


class DuplicateClass(CoimgError):
    """Two classes share a name (impossible under directory semantics; reserved)."""


class Overflow(CoimgError):
    """A combination count exceeds the 128-bit unsigned range."""


class RankOutOfRange(CoimgError):
    """Requested rank is outside [0, space.size)."""


class MalformedTuple(CoimgError):
    """Tuple is not a valid member of the combination space."""


class CountExceedsSpace(CoimgError):
    """Asked for more distinct ranks than the space holds."""


class DecodeFailure(CoimgError):
    """An image file could not be decoded."""


class PolicyMissingSimilarity(CoimgError):
    """Selection policy needs a similarity matrix but none was given."""


class SimilarityMatrixTooLarge(CoimgError):
    """Class exceeds the pairwise-similarity size limit."""


class MemberCountMismatch(CoimgError):
    """Number of member images does not match the layout."""


class WriteFailure(CoimgError):
    """An output file could not be written."""


class DegenerateClass(CoimgError):
    """A class admits zero composites for the requested size."""


class OverrideTooLarge(CoimgError):
    """Target override exceeds 128-bit count arithmetic."""


class PlanTooLarge(CoimgError):
    """Plan would materialize more records than the generation limit."""


class VerificationFailed(CoimgError):
    """One or more verification assertions did not hold."""
