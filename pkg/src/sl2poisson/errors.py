"""Exception hierarchy shared across the library."""


class Sl2PoissonError(Exception):
    """Base class for all library-specific errors."""


class CrossCheckError(Sl2PoissonError):
    """Two independent computations of the same quantity disagree."""


class VarianceMismatch(Sl2PoissonError):
    """Attempted to combine a multivector with a form."""


class DegreeOverflow(Sl2PoissonError):
    """Graded operation would exceed the top degree of the algebra."""


class NumericCoefficient(Sl2PoissonError):
    """Exact operation requested on a field with point-callable coefficients."""


class NotPoisson(Sl2PoissonError):
    """Bivector fails [pi, pi] = 0, so it does not define a differential."""


class OriginSingularity(Sl2PoissonError):
    """Evaluation requested at the origin where the object is singular."""


class OnCone(Sl2PoissonError):
    """Evaluation requested on the cone f = 0 where the object is undefined."""


class NotUnit(Sl2PoissonError):
    """Input vector is not normalized to the required tolerance."""


class NotSpecialUnitary(Sl2PoissonError):
    """Input matrix is not in SU(2) to the required tolerance."""


class NoConventionPasses(Sl2PoissonError):
    """None of the candidate sign/scale conventions satisfies the identity."""


class SingularStencil(Sl2PoissonError):
    """A finite-difference stencil would touch the declared singular locus."""


class DerivativeBudgetExceeded(Sl2PoissonError):
    """A numeric form was asked for more derivatives than it supports."""


class QuadratureNonConverged(Sl2PoissonError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class TailBoundUnavailable(Sl2PoissonError):
    """No certified tail bound exists for the given integrand."""


class DegreeCap(Sl2PoissonError):
    """Requested polynomial degree exceeds the configured cap."""


class ModularDisagreement(Sl2PoissonError):
    """Ranks computed modulo different primes disagree."""


class StructureMismatch(Sl2PoissonError):
    """Structure constants derived by two independent routes disagree."""


class WitnessNotClosed(Sl2PoissonError):
    """A claimed cocycle representative is not in the kernel of the differential."""


class WitnessNotIndependent(Sl2PoissonError):
    """Claimed cohomology representatives are dependent modulo coboundaries."""


class DivisionFails(Sl2PoissonError):
    """An exact polynomial division that must succeed did not."""


class ConfigInvalid(Sl2PoissonError):
    """Configuration file failed to parse or validate."""
