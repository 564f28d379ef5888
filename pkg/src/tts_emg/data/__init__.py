from .normalize import SignalNormalizer, apply_signal_normalizer, class_weights, fit_signal_normalizer
from .preprocess import enforce_gaps, relabel_rest, repetition_boundaries
from .recording import DATABASE_CLASSES, Recording, concatenate, load_recording, write_recording
from .splits import SplitSpec, split_windows, standard_splits
from .windows import (
    Window,
    WindowingConfig,
    WindowSet,
    load_window_cache,
    save_window_cache,
    segment,
    window_cache_bytes,
)


def prepare_windows(recording, config=WindowingConfig(), max_rest_seconds=10.0):
    """Relabel rest, enforce repetition gaps and segment one subject's stream."""
    w, _ = config.samples(recording.sample_rate_hz)
    rec = enforce_gaps(relabel_rest(recording, max_rest_seconds), w)
    return segment(rec, config)
