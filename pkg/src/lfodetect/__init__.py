"""Low-frequency power-system oscillation detection from PMU windows.

Pipeline: EMD band-pass -> damped-sinusoid (Prony) estimation + DFT peak
picking on the same filtered window -> frequency matching across the two
methods -> classified operator alarms.
"""

__version__ = "0.1.0"

from .core import (
    CONTROL_HUNT_BAND,
    MODE_BANDS,
    AlarmEvent,
    AnalysisConfig,
    Channel,
    EmptyBand,
    ModeClass,
    NonFiniteSample,
    NonPositiveDt,
    PronyFit,
    PronyMode,
    SampleWindow,
    Severity,
    SpectrumPeak,
    ValidationError,
    WindowTooShort,
    validate_window,
    wrap_angle,
)
from .detector import DetectionReport, classify, detect, match_modes
from .emd import Imf, ImfSet, bandpass, decompose, mean_frequency
from .ingest import (
    ArchiveRecord,
    DtMismatch,
    FileUnreadable,
    ParseReport,
    SchemaMismatch,
    WindowingPolicy,
    make_windows,
    read_archive,
    write_archive,
)
from .prony import (
    InsufficientExcitation,
    OrderTooHigh,
    RootSolverDiverged,
    characteristic_roots,
    fit_lpm,
    prony_analyze,
    reconstruct,
    roots_to_modes,
    solve_amplitudes,
)
from .signalgen import InvalidSpec, SynthSpec, ToneSpec, generate
from .spectrum import Spectrum, WindowFunction, dft, find_peaks

__all__ = [
    "__version__",
    "CONTROL_HUNT_BAND",
    "MODE_BANDS",
    "AlarmEvent",
    "AnalysisConfig",
    "ArchiveRecord",
    "Channel",
    "DetectionReport",
    "DtMismatch",
    "EmptyBand",
    "FileUnreadable",
    "Imf",
    "ImfSet",
    "InsufficientExcitation",
    "InvalidSpec",
    "ModeClass",
    "NonFiniteSample",
    "NonPositiveDt",
    "OrderTooHigh",
    "ParseReport",
    "PronyFit",
    "PronyMode",
    "RootSolverDiverged",
    "SampleWindow",
    "SchemaMismatch",
    "Severity",
    "Spectrum",
    "SpectrumPeak",
    "SynthSpec",
    "ToneSpec",
    "ValidationError",
    "WindowFunction",
    "WindowTooShort",
    "WindowingPolicy",
    "bandpass",
    "characteristic_roots",
    "classify",
    "decompose",
    "detect",
    "dft",
    "find_peaks",
    "fit_lpm",
    "generate",
    "make_windows",
    "match_modes",
    "mean_frequency",
    "prony_analyze",
    "read_archive",
    "reconstruct",
    "roots_to_modes",
    "solve_amplitudes",
    "validate_window",
    "wrap_angle",
    "write_archive",
]
