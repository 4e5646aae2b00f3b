"""Exception hierarchy shared by all temcodec modules."""


class TemcodecError(Exception):
    """Base class for all temcodec-specific failures."""


# --- generator / spectral profile -----------------------------------------

class UnsupportedOrderError(TemcodecError):
    """Requested derivative/antiderivative does not exist for this generator."""


class OutOfTableError(TemcodecError):
    """A tabulated generator was queried outside its sample coverage."""


class NonConvergentTailError(TemcodecError):
    """Alias-sum tail estimate of a tabulated generator exceeds tolerance."""


class DegenerateFrameError(TemcodecError):
    """Lower frame bound fell below the configured floor."""


class UnboundedDerivativeProfileError(TemcodecError):
    """Derivative spectral profile contains a non-finite entry."""


# --- periodic space ---------------------------------------------------------

class PeriodTooSmallError(TemcodecError):
    """Generator support does not fit inside one period."""


class SingularGramError(TemcodecError):
    """Gram matrix is numerically singular; no dual generator exists."""


class BadPartitionError(TemcodecError):
    """Cell breakpoints are not increasing or span more than one period."""


class SpaceMismatchError(TemcodecError):
    """Two signals do not live in the same periodic space."""


# --- encoders ----------------------------------------------------------------

class NoSpikesError(TemcodecError):
    """Encoder produced no crossings (e.g. test amplitude below signal sup)."""


class SpikeBudgetExceededError(TemcodecError):
    """Encoder hit the max_spikes guard."""


class UnsupportedGeneratorError(TemcodecError):
    """Operation requires a compactly supported generator."""


class EmptyTrainError(TemcodecError):
    """Spike train has too few spikes for the requested operation."""


class NotDenseEnoughError(TemcodecError):
    """Spike train violates the density assumption of the operation."""


# --- decoders ----------------------------------------------------------------

class RankDeficientError(TemcodecError):
    """Normal-equation matrix has a pivot below the rank tolerance."""


class NotContractiveError(TemcodecError):
    """Relaxation iteration is not contracting (density ratio misestimated)."""


class NonConvergentError(TemcodecError):
    """Iteration hit max_iter while still diverging."""


# --- noise lab ----------------------------------------------------------------

class DecodeFailedError(TemcodecError):
    """A noise-lab trial could not be decoded (recorded per trial, not fatal)."""
