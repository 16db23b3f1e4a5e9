"""Four-photon event-ready Bell test: probabilities, thresholds and checks."""

from .apparatus import AnalyzerSettings, BeamSplitter, DetectorModel, InterferenceModel
from .bell import CHReport, ch_statistic, corrected_ch, hardy_scan, minimal_efficiency, unpolarized_threshold_scan
from .optimize import EfficiencySurface, OptimizerConfig, build_surface, hardy_optimum, optimize_angles

__all__ = [
    "AnalyzerSettings",
    "BeamSplitter",
    "CHReport",
    "DetectorModel",
    "EfficiencySurface",
    "InterferenceModel",
    "OptimizerConfig",
    "build_surface",
    "ch_statistic",
    "corrected_ch",
    "hardy_optimum",
    "hardy_scan",
    "minimal_efficiency",
    "optimize_angles",
    "unpolarized_threshold_scan",
]
