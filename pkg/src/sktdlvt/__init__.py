"""Segmental keystone transform and Doppler Lv's transform for GMTI.

Estimates the radial velocity and acceleration of ground moving targets from
range-compressed SAR echoes: segmental keystone for the range walk, outer
fold search by image entropy, segmental Lv's transform for the Doppler
parameters, fine ambiguity search by focusing, and CLEAN for unequal
targets.
"""

from .ambiguity import (AmbiguityScan, SplitRule, compensate_outer, detect_and_shift_marginal,
                        image_entropy, joint_lowsnr_search, scan_outer_ambiguity)
from .dlvt import (AzimuthSignal, DlvtConfig, EstimateRecord, LvtPlane, SegmentSpectrum,
                   doppler_kt, estimate_cell, extract_parameters, lvt, resolve_inner_ambiguity,
                   segment_fft)
from .errors import (AlreadyCorrected, AmbiguousMaximum, AxisMismatch, ConfigError, CostGuard,
                     DivergentSubtraction, NoValidPlan, PlanMismatch, SktDlvtError,
                     SwathOverflow)
from .estimators import DlvtEstimator, KeystoneTransformer, SceneEstimator
from .multitarget import PipelineConfig, SceneResult, clean_iterate, estimate_scene
from .resample import ScalePlan, chirpz_rescale, sinc_rescale
from .sigmodel import (ColAxis, EchoMatrix, RadarParams, RowAxis, TargetTruth,
                       from_range_frequency, simulate_compressed_echo, to_range_frequency)
from .skt import Alignment, SegmentPlan, SktMethod, apply_skt, plan_segments

__version__ = "0.1.0"

__all__ = [
    "AlreadyCorrected", "Alignment", "AmbiguityScan", "AmbiguousMaximum", "AxisMismatch",
    "AzimuthSignal", "ColAxis", "ConfigError", "CostGuard", "DivergentSubtraction",
    "DlvtConfig", "DlvtEstimator", "EchoMatrix", "EstimateRecord", "KeystoneTransformer",
    "LvtPlane", "NoValidPlan", "PipelineConfig", "PlanMismatch", "RadarParams", "RowAxis",
    "ScalePlan", "SceneEstimator", "SceneResult", "SegmentPlan", "SegmentSpectrum",
    "SktDlvtError", "SktMethod", "SplitRule", "SwathOverflow", "TargetTruth", "apply_skt",
    "chirpz_rescale", "clean_iterate", "compensate_outer", "detect_and_shift_marginal",
    "doppler_kt", "estimate_cell", "estimate_scene", "extract_parameters",
    "from_range_frequency", "image_entropy", "joint_lowsnr_search", "lvt", "plan_segments",
    "resolve_inner_ambiguity", "scan_outer_ambiguity", "segment_fft",
    "simulate_compressed_echo", "sinc_rescale", "to_range_frequency",
]
