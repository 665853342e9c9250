"""Exception hierarchy for speechbeam."""


class SpeechbeamError(Exception):
    """Base class for all speechbeam errors."""


class InvalidConfigError(SpeechbeamError):
    """A configuration value violates its invariants."""


class InvalidInputError(SpeechbeamError):
    """An input array or file has the wrong shape, range or content."""


class InvalidWeightsError(SpeechbeamError):
    """A postfilter weights file is malformed or inconsistent."""


class CalibrationError(SpeechbeamError):
    """Base class for calibration-fit failures."""


class InsufficientCalibrationDataError(CalibrationError):
    """Fewer calibration pairs than polynomial coefficients."""


class DegenerateCalibrationError(CalibrationError):
    """Calibration design matrix is rank deficient."""


class InsufficientSignalError(SpeechbeamError):
    """Not enough signal for the requested analysis (e.g. STOI on silence)."""
