"""Per-subject results, the cross-subject benchmark report and classifier comparison."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .metrics import forman_macro, forman_micro
from .stats import friedman_test, holm_procedure

SCHEMA_VERSION = 1


@dataclass
class FoldResult:
    split_index: int
    rep_confusions: dict  # repetition -> M x M counts
    trial_confusion: np.ndarray | None = None

    def confusion(self, exclude_reps=()):
        mats = [np.asarray(cm) for r, cm in sorted(self.rep_confusions.items()) if r not in exclude_reps]
        if not mats:
            n = len(next(iter(self.rep_confusions.values())))
            return np.zeros((n, n), dtype=np.int64)
        return np.sum(mats, axis=0)

    def to_dict(self):
        d = {"split": self.split_index,
             "repetitions": {str(r): np.asarray(cm).tolist() for r, cm in sorted(self.rep_confusions.items())}}
        if self.trial_confusion is not None:
            d["trial_confusion"] = np.asarray(self.trial_confusion).tolist()
        return d

    @classmethod
    def from_dict(cls, d):
        tc = d.get("trial_confusion")
        return cls(d["split"], {int(r): np.asarray(cm, dtype=np.int64) for r, cm in d["repetitions"].items()},
                   None if tc is None else np.asarray(tc, dtype=np.int64))


@dataclass
class SubjectResult:
    subject_id: str
    classifier_id: str
    folds: list = field(default_factory=list)

    def fold_confusions(self, exclude_reps=()):
        return [f.confusion(exclude_reps) for f in self.folds]

    def macro(self, exclude_reps=()):
        return forman_macro(self.fold_confusions(exclude_reps), warn=False)

    def micro(self, exclude_reps=()):
        return forman_micro(self.fold_confusions(exclude_reps))

    def per_repetition_macro(self):
        """Macro accuracy per repetition, pooled over folds."""
        pooled = {}
        for f in self.folds:
            for r, cm in f.rep_confusions.items():
                pooled[r] = pooled.get(r, 0) + np.asarray(cm)
        return {r: forman_macro([cm], warn=False) for r, cm in sorted(pooled.items())}

    def trial_macro(self):
        mats = [f.trial_confusion for f in self.folds if f.trial_confusion is not None]
        return forman_macro(mats, warn=False) if mats else None

    def to_dict(self):
        return {"schema_version": SCHEMA_VERSION, "subject": self.subject_id,
                "classifier": self.classifier_id, "folds": [f.to_dict() for f in self.folds]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["subject"], d["classifier"], [FoldResult.from_dict(f) for f in d["folds"]])

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _mean_std(values):
    v = np.asarray(values, dtype=np.float64)
    std = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
    return float(np.mean(v)), std


@dataclass
class ClassifierSummary:
    classifier: str
    macro_mean: float
    macro_std: float
    micro_mean: float
    micro_std: float
    per_subject: dict
    small_sample: bool = False
    holm_decisions: list = field(default_factory=list)

    def to_dict(self):
        return {"macro_mean": self.macro_mean, "macro_std": self.macro_std,
                "micro_mean": self.micro_mean, "micro_std": self.micro_std,
                "per_subject": self.per_subject, "small_sample": self.small_sample,
                "holm_decisions": self.holm_decisions}


@dataclass
class BenchmarkReport:
    rows: list  # ClassifierSummary, ascending mean macro accuracy
    alpha: float | None = None
    control: str | None = None
    friedman: dict | None = None
    per_repetition: dict = field(default_factory=dict)
    trial_macro: dict = field(default_factory=dict)

    def row(self, classifier):
        for r in self.rows:
            if r.classifier == classifier:
                return r
        raise KeyError(classifier)

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "order": [r.classifier for r in self.rows],
            "classifiers": {r.classifier: r.to_dict() for r in self.rows},
            "alpha": self.alpha,
            "control": self.control,
            "friedman": self.friedman,
            "per_repetition": self.per_repetition,
            "trial_macro": self.trial_macro,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, d):
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {d.get('schema_version')!r}")
        rows = []
        for name in d["order"]:
            c = d["classifiers"][name]
            rows.append(ClassifierSummary(name, c["macro_mean"], c["macro_std"], c["micro_mean"],
                                          c["micro_std"], c["per_subject"], c.get("small_sample", False),
                                          c.get("holm_decisions", [])))
        return cls(rows, d.get("alpha"), d.get("control"), d.get("friedman"),
                   d.get("per_repetition", {}), d.get("trial_macro", {}))

    def to_text(self):
        lines = [f"{'Classifier':<24} {'Per class acc. (%)':>20} {'Per sample acc. (%)':>20}",
                 f"{'':<24} {'Mean':>10}{'Std.':>10} {'Mean':>10}{'Std.':>10}"]
        for r in self.rows:
            flag = "  (n=1)" if r.small_sample else ""
            lines.append(f"{r.classifier:<24} {100 * r.macro_mean:>10.1f}{100 * r.macro_std:>10.1f} "
                         f"{100 * r.micro_mean:>10.1f}{100 * r.micro_std:>10.1f}{flag}")
        if any(r.classifier.endswith("*") for r in self.rows):
            lines.append("* repetition 1 removed from the test set without retraining")
        if self.friedman is not None:
            f = self.friedman
            fid = "degenerate" if f["iman_davenport"] is None else f"{f['iman_davenport']:.4g}"
            lines.append("")
            lines.append(f"Friedman chi2 = {f['chi2']:.4g} (p = {f['chi2_pvalue']:.3g}), "
                         f"Iman-Davenport F = {fid}")
            lines.append("Average ranks: " + ", ".join(f"{k}={v:.3f}" for k, v in f["avg_ranks"].items()))
        if self.control is not None:
            lines.append(f"Holm procedure, control = {self.control}, alpha = {self.alpha}")
            for d in self.row(self.control).holm_decisions:
                verdict = "reject" if d["reject"] else "keep"
                lines.append(f"  vs {d['classifier']:<20} z = {d['z']:+.3f}  p = {d['pvalue']:.3g}  "
                             f"threshold = {d['threshold']:.3g}  {verdict}")
        return "\n".join(lines) + "\n"


def _summarise(name, results, exclude_reps=()):
    per_subject = {}
    for r in results:
        per_subject[r.subject_id] = {"macro": r.macro(exclude_reps), "micro": r.micro(exclude_reps)}
    macro_mean, macro_std = _mean_std([v["macro"] for v in per_subject.values()])
    micro_mean, micro_std = _mean_std([v["micro"] for v in per_subject.values()])
    return ClassifierSummary(name, macro_mean, macro_std, micro_mean, micro_std, per_subject,
                             small_sample=len(per_subject) < 2)


def report(results, exclude_rep1=False):
    """Inter-subject mean and sample std of Forman-pooled accuracies per classifier.

    ``results`` maps classifier id to its list of :class:`SubjectResult`. With
    ``exclude_rep1`` every classifier gets an extra ``"<id>*"`` row computed
    without repetition 1 in the test sets.
    """
    subject_sets = {name: sorted(r.subject_id for r in rs) for name, rs in results.items()}
    reference = next(iter(subject_sets.values()), [])
    for name, subjects in subject_sets.items():
        if subjects != reference:
            raise ValueError(f"classifier {name!r} was evaluated on a different subject set")
    rows = []
    per_rep, trial = {}, {}
    for name, rs in results.items():
        rows.append(_summarise(name, rs))
        if exclude_rep1:
            rows.append(_summarise(f"{name}*", rs, exclude_reps=(1,)))
        per_rep[name] = {r.subject_id: {str(k): v for k, v in r.per_repetition_macro().items()} for r in rs}
        tm = {r.subject_id: r.trial_macro() for r in rs}
        if any(v is not None for v in tm.values()):
            trial[name] = tm
    rows.sort(key=lambda r: (r.macro_mean, r.classifier))
    return BenchmarkReport(rows, per_repetition=per_rep, trial_macro=trial)


def compare(bench: BenchmarkReport, control, alpha=0.02, metric="macro"):
    """Friedman / Iman-Davenport and Holm tests across subjects; annotates ``bench`` in place."""
    names = [r.classifier for r in bench.rows]
    if len(names) < 2:
        raise ValueError("need at least two classifiers to compare")
    if control not in names:
        raise KeyError(f"control classifier {control!r} not among {names}")
    subjects = sorted(bench.rows[0].per_subject)
    for r in bench.rows:
        if sorted(r.per_subject) != subjects:
            raise ValueError(f"classifier {r.classifier!r} has a different subject set")
    perf = np.array([[r.per_subject[s][metric] for r in bench.rows] for s in subjects])
    fr = friedman_test(perf)
    ci = names.index(control)
    decisions = holm_procedure(fr.avg_ranks, fr.n_datasets, fr.n_classifiers, ci, alpha)
    bench.alpha = alpha
    bench.control = control
    bench.friedman = {
        "chi2": fr.chi2, "chi2_pvalue": fr.chi2_pvalue,
        "iman_davenport": fr.iman_davenport, "f_pvalue": fr.f_pvalue,
        "avg_ranks": {n: float(v) for n, v in zip(names, fr.avg_ranks)},
        "n_subjects": fr.n_datasets, "metric": metric,
    }
    bench.row(control).holm_decisions = [
        {"classifier": names[d.classifier], "z": d.z, "pvalue": d.pvalue,
         "threshold": d.threshold, "reject": d.reject} for d in decisions]
    return bench


def merge_reports(reports):
    """Combine rows from several reports (one per trained classifier)."""
    rows = []
    seen = set()
    for rep in reports:
        for r in rep.rows:
            if r.classifier in seen:
                raise ValueError(f"classifier {r.classifier!r} appears in more than one report")
            seen.add(r.classifier)
            rows.append(ClassifierSummary(r.classifier, r.macro_mean, r.macro_std, r.micro_mean,
                                          r.micro_std, r.per_subject, r.small_sample))
    rows.sort(key=lambda r: (r.macro_mean, r.classifier))
    return BenchmarkReport(rows)


def is_finite_report(bench):
    return all(math.isfinite(v) for r in bench.rows for v in (r.macro_mean, r.micro_mean))
