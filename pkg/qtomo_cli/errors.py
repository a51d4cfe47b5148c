from __future__ import annotations


class QtomoError(ValueError):
    """Base class for every failure raised by the qtomo library."""


class TruncationError(QtomoError):
    """A Fock cutoff, tooth window or grid is too small for the requested accuracy."""


class DimensionError(QtomoError):
    """Subsystem layout or memory guard violation."""


class QuorumError(QtomoError):
    """A tomogram lacks the angles required by a moment inversion."""


class UndefinedQuantifierError(QtomoError):
    """A squeezing quantifier has a vanishing normalisation."""


class ValidationError(QtomoError):
    """Input data breaks a state, tomogram or series invariant."""


class ConfigError(QtomoError):
    """Scenario file or CLI configuration is malformed."""
