from .metrics import (
    ZeroSupportWarning,
    confusion,
    forman_macro,
    forman_micro,
    macro_accuracy,
    majority_vote,
    micro_accuracy,
    per_repetition_accuracy,
    per_repetition_confusions,
    trial_confusion,
    trials,
)
from .report import (
    BenchmarkReport,
    ClassifierSummary,
    FoldResult,
    SubjectResult,
    compare,
    is_finite_report,
    merge_reports,
    report,
)
from .stats import FriedmanResult, HolmDecision, friedman_test, holm_procedure, holm_step_down, rank_rows
