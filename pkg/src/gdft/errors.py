"""Exception hierarchy.

Every error carries the CLI exit code of its family: 1 for configuration
problems, 2 for numerical failures, 3 for infeasible requests.
"""


class GdftError(Exception):
    exit_code = 2


class ConfigError(GdftError):
    exit_code = 1


class NumericError(GdftError):
    exit_code = 2


class InfeasibleError(GdftError):
    exit_code = 3


class ConfigParseError(ConfigError):
    pass


class NonHermitianInput(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class LinearlyDependentBasis(ConfigError):
    pass


class UnsupportedAlgebra(ConfigError):
    pass


class Unsupported(ConfigError):
    pass


class NotAbelian(NumericError):
    pass


class NotSimultaneouslyDiagonalizable(NumericError):
    pass


class EigensolverFailure(NumericError):
    pass


class NonRealExpectation(NumericError):
    pass


class DidNotConverge(NumericError):
    pass


class ZeroDenominator(NumericError):
    pass


class DegenerateGroundState(NumericError):
    """Raised when the ground state is not unique.

    ``branches`` holds one ``(density, value)`` pair per vector of an
    orthonormal basis of the ground space.
    """

    def __init__(self, message, branches=()):
        super().__init__(message)
        self.branches = list(branches)


class DegeneratePolytope(InfeasibleError):
    pass


class EmptyFacet(InfeasibleError):
    pass


class NotRepresentable(InfeasibleError):
    pass


class NotSimplexSetting(InfeasibleError):
    pass


class NotInRelativeInterior(InfeasibleError):
    pass


class CriticalFacetPoint(InfeasibleError):
    pass


class NotNiceFacet(InfeasibleError):
    pass


class NotFullDimensional(InfeasibleError):
    pass


class NoCandidates(InfeasibleError):
    pass


class NotOnFacet(InfeasibleError):
    pass
