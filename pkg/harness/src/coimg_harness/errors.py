"""Harness exceptions."""


class HarnessError(Exception):
    """Base class for harness errors."""


class TooFewSamples(HarnessError):
    """A class has too few records (or source groups) for 5-fold splitting."""


class TrainingDiverged(HarnessError):
    """Training produced a non-finite loss."""
