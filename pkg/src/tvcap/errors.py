"""Exception types shared across the toolkit."""


class TvcapError(Exception):
    """Base class for all toolkit errors."""


class GridError(TvcapError, ValueError):
    """Bad sampling grid: nonpositive step, too few samples, incommensurate
    or mismatched grids, cutoff above Nyquist, too-coarse spatial resolution,
    Courant violation."""


class UnitMismatchError(TvcapError, ValueError):
    """Waveforms carrying different physical units were combined."""


class WindowError(TvcapError, ValueError):
    """An analysis window is too short for the requested operation."""


class HistoryError(TvcapError, ValueError):
    """The input signal does not cover the kernel's retardation support."""


class VoltageError(TvcapError, ValueError):
    """The modulation voltage crosses, touches, or straddles zero on the grid."""


class PositivityError(TvcapError, ValueError):
    """A capacitance profile (or a bound derived from one) violates the
    positivity required for realizability."""


class ParameterError(TvcapError, ValueError):
    """A physical or structural parameter is outside its legal range."""


class ScenarioError(TvcapError, ValueError):
    """A scenario file failed to parse or validate."""
