"""Simulate serial-line LED emanations and recover the data from light.

The pipeline runs end to end in software: serial bytes become a logical
line waveform, the line drives an indicator LED model, the light
crosses a distance of air into a photodetector and amplifier, and the
receiver half turns noisy voltage back into bytes.  On top of that sit
an emission classifier with a synthetic device survey, a demixer for
several LEDs seen by one detector, a pulse-stretcher countermeasure,
and keyboard-LED covert channel codecs.

The usual entry points:

- ``simulate_link`` runs one transmission and scores the recovery.
- ``classify`` and ``survey`` grade devices by how much they leak.
- ``extract_events``/``estimate_ui``/``demix`` separate a summed scene.
- ``encode_message``/``decode_message`` exercise the covert schemes.
- the ``ledleak`` command drives all of it in batch.
"""

from .channel import (
    AmbientModel,
    ChannelModel,
    ambient_preset,
    ambient_preset_names,
    ambient_waveform,
    amp_bandwidth,
    channel_from_config,
    propagate,
)
from .classifier import (
    ClassLabel,
    DeviceFixture,
    EmissionClass,
    FixtureOutcome,
    SurveyReport,
    TapCapture,
    bundled_fixtures,
    classify,
    fixture_capture,
    modulation_depth,
    read_fixture,
    survey,
)
from .cli import SweepSpec, emit_figure, run_sweep
from .configio import Config, defaults, load_config
from .covert import (
    CovertScheme,
    LedScheduleEvent,
    ScanCodeEvent,
    ScanDecodeReport,
    decode_message,
    decode_scan,
    encode_message,
    load_schedule,
    save_schedule,
    scan_stream,
    scan_table,
    schedule_to_lines,
    type_events,
)
from .demixer import (
    DemixResult,
    StreamHypothesis,
    StreamReport,
    TransitionEvent,
    demix,
    estimate_ui,
    extract_events,
    load_events,
    plausibility,
    save_events,
    synthesize_scene,
    validate_streams,
)
from .emitter import (
    LedModel,
    StretcherConfig,
    TimingCapacity,
    conservative_stretcher,
    drive,
    residual_timing_capacity,
    stretch,
    stretcher_for_format,
)
from .errors import (
    AmbiguousAlignment,
    AmplitudeMismatch,
    ClockSlipDetected,
    ConfigError,
    FlatSignal,
    FramingError,
    InsufficientTransitions,
    LedleakError,
    LengthMismatch,
    NoDominantPeak,
    NoStartEdge,
    SampleRateTooLow,
    UnknownScanCode,
)
from .lineproto import (
    CANDIDATE_RATES,
    FrameFormat,
    Level,
    LineWaveform,
    decision_points,
    encode,
    frame_bits,
    parity_bit,
)
from .pipeline import LinkResult, led_from_config, pick_sample_rate, simulate_link
from .receiver import (
    CorrelationResult,
    RecoveryResult,
    binarize,
    bit_error_rate,
    correlation,
    decode,
    estimate_rate,
    suppress_ambient,
)
from .signals import (
    DetectorWaveform,
    OpticalWaveform,
    line_to_samples,
    load_waveform,
    save_waveform,
    sum_waveforms,
)

__version__ = "0.1.0"

__all__ = [
    "AmbientModel",
    "AmbiguousAlignment",
    "AmplitudeMismatch",
    "CANDIDATE_RATES",
    "ChannelModel",
    "ClassLabel",
    "ClockSlipDetected",
    "Config",
    "ConfigError",
    "CorrelationResult",
    "CovertScheme",
    "DemixResult",
    "DetectorWaveform",
    "DeviceFixture",
    "EmissionClass",
    "FixtureOutcome",
    "FlatSignal",
    "FrameFormat",
    "FramingError",
    "InsufficientTransitions",
    "LedModel",
    "LedScheduleEvent",
    "LedleakError",
    "LengthMismatch",
    "Level",
    "LineWaveform",
    "LinkResult",
    "NoDominantPeak",
    "NoStartEdge",
    "OpticalWaveform",
    "RecoveryResult",
    "SampleRateTooLow",
    "ScanCodeEvent",
    "ScanDecodeReport",
    "StreamHypothesis",
    "StreamReport",
    "StretcherConfig",
    "SurveyReport",
    "SweepSpec",
    "TapCapture",
    "TimingCapacity",
    "TransitionEvent",
    "UnknownScanCode",
    "ambient_preset",
    "ambient_preset_names",
    "ambient_waveform",
    "amp_bandwidth",
    "binarize",
    "bit_error_rate",
    "bundled_fixtures",
    "channel_from_config",
    "classify",
    "conservative_stretcher",
    "correlation",
    "decision_points",
    "decode",
    "decode_message",
    "decode_scan",
    "defaults",
    "demix",
    "drive",
    "emit_figure",
    "encode",
    "encode_message",
    "estimate_rate",
    "estimate_ui",
    "extract_events",
    "fixture_capture",
    "frame_bits",
    "led_from_config",
    "line_to_samples",
    "load_config",
    "load_events",
    "load_schedule",
    "load_waveform",
    "modulation_depth",
    "parity_bit",
    "pick_sample_rate",
    "plausibility",
    "propagate",
    "read_fixture",
    "residual_timing_capacity",
    "run_sweep",
    "save_events",
    "save_schedule",
    "save_waveform",
    "scan_stream",
    "scan_table",
    "schedule_to_lines",
    "simulate_link",
    "stretch",
    "stretcher_for_format",
    "sum_waveforms",
    "suppress_ambient",
    "survey",
    "synthesize_scene",
    "type_events",
    "validate_streams",
]
