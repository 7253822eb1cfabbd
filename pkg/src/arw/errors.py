"""Exception types raised across the package.

Everything derives from ``ArwError`` (itself a ``ValueError``) so the CLI can
map validation problems to exit code 1 with a single ``except``.
"""


class ArwError(ValueError):
    pass


class UnsupportedDimension(ArwError):
    pass


class CurvatureVanishes(ArwError):
    pass


class CurveDoesNotClose(ArwError):
    pass


class WeightsNotNormalized(ArwError):
    pass


class NotStatic(ArwError):
    pass


class NotDoublyStatic(ArwError):
    pass


class NonAdmissible(ArwError):
    pass


class GridAliasesFrequencies(ArwError):
    pass


class ResolutionTooCoarse(ArwError):
    pass


class SamplingTooCoarse(ArwError):
    pass


class DegenerateVariance(ArwError):
    pass


class ConfigInvalid(ArwError):
    pass


class MismatchedManifest(ArwError):
    pass
