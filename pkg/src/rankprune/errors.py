"""Exception hierarchy for rankprune."""


class RankPruneError(Exception):
    """Base class for every error raised by this package."""


class InvalidRates(RankPruneError, ValueError):
    pass


class SingleClassInput(RankPruneError, ValueError):
    pass


class DimensionMismatch(RankPruneError, ValueError):
    pass


class LengthMismatch(RankPruneError, ValueError):
    pass


class TooFewExamples(RankPruneError, ValueError):
    pass


class EmptyClass(RankPruneError, ValueError):
    pass


class DegenerateCounts(RankPruneError, ValueError):
    """A confident-count denominator is zero: g carries no confident mass on one side."""


class RankOutOfRange(RankPruneError, IndexError):
    pass


class OverPrune(RankPruneError, ValueError):
    """A removal count would empty an observed class."""


class MissingHiddenLabels(RankPruneError, ValueError):
    pass


class DatasetParseError(RankPruneError, ValueError):
    pass


class BadMagic(RankPruneError, ValueError):
    pass


class TruncatedFile(RankPruneError, ValueError):
    pass


class ConfigError(RankPruneError, ValueError):
    """Malformed or unknown configuration keys."""


class InfeasibleConfig(RankPruneError, ValueError):
    """Configuration parses but describes an impossible experiment."""
