"""Run a configured analysis and serialize its report.

JSON reports store complex numbers as ``[re, im]`` and history labels as
arrays; floats go through ``repr`` so a written report reads back to the
identical in-memory report and re-serializes to identical bytes.
"""

import csv
import io
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .decoherence import check_axioms, coarse_grain_D, decide
from .decoherence import build_decoherence_functional
from .pathsum import build_D_pathsum

REPORT_VERSION = 1


@dataclass
class AnalysisReport:
    config: dict
    formulation: str
    labels: list
    entries: np.ndarray
    n_fine_histories: int
    axioms: dict
    verdict: dict
    probabilities: Optional[list]
    timing: dict

    def to_dict(self):
        return {
            "version": REPORT_VERSION,
            "config": self.config,
            "formulation": self.formulation,
            "n_fine_histories": self.n_fine_histories,
            "labels": [_label_to_json(lab) for lab in self.labels],
            "decoherence_matrix": [
                [[float(z.real), float(z.imag)] for z in row] for row in self.entries
            ],
            "axioms": self.axioms,
            "verdict": self.verdict,
            "probabilities": None
            if self.probabilities is None
            else [[_label_to_json(lab), float(p)] for lab, p in self.probabilities],
            "timing": self.timing,
        }

    @classmethod
    def from_dict(cls, doc):
        entries = np.array(
            [[complex(re, im) for re, im in row] for row in doc["decoherence_matrix"]],
            dtype=np.complex128,
        ).reshape(len(doc["labels"]), len(doc["labels"]))
        probs = doc["probabilities"]
        return cls(
            config=doc["config"],
            formulation=doc["formulation"],
            labels=[_label_from_json(lab) for lab in doc["labels"]],
            entries=entries,
            n_fine_histories=doc["n_fine_histories"],
            axioms=doc["axioms"],
            verdict=doc["verdict"],
            probabilities=None
            if probs is None
            else [(_label_from_json(lab), p) for lab, p in probs],
            timing=doc["timing"],
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "col", "re", "im"])
        names = [label_text(lab) for lab in self.labels]
        for i, row in enumerate(self.entries):
            for j, z in enumerate(row):
                w.writerow([names[i], names[j], _csv_float(z.real), _csv_float(z.imag)])
        w.writerow([])
        for key in ("criterion", "epsilon", "max_violation", "decoherent"):
            value = self.verdict[key]
            w.writerow([key, _csv_scalar(value)])
        for lab, p in self.probabilities or ():
            w.writerow(["p", label_text(lab), _csv_float(p)])
        return buf.getvalue()

    @property
    def decoherent(self):
        return bool(self.verdict["decoherent"])


def _csv_float(x):
    # 15 significant digits hides last-bit rounding; JSON keeps full precision.
    return format(float(x), ".15g")


def _csv_scalar(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _csv_float(v)
    return str(v)


def label_text(label):
    """``(0, 1)`` -> ``"0-1"``; scalars via ``str``."""
    if isinstance(label, tuple):
        return "-".join(str(x) for x in label) if label else "()"
    if isinstance(label, bool):
        return "true" if label else "false"
    return str(label)


def _label_to_json(label):
    if isinstance(label, tuple):
        return list(label)
    return label


def _label_from_json(label):
    if isinstance(label, list):
        return tuple(label)
    return label


def run_analysis(cfg, criterion=None, epsilon=None):
    """Build, compute, check and decide as a config prescribes.

    ``criterion`` and ``epsilon`` override the config's analysis section.
    The report carries the decoherence matrix actually decided on, which is
    the coarse-grained one when the config asks for coarse graining; the
    axiom checks always run on the fine-grained matrix.
    """
    criterion = criterion or cfg.criterion
    epsilon = float(epsilon) if epsilon is not None else cfg.epsilon
    start = time.perf_counter()
    kind, target, cg = cfg.build()
    if kind == "grid":
        fine = build_decoherence_functional(target)
    else:
        fine = build_D_pathsum(*target)
    axioms = check_axioms(fine, target, [cg] if cg is not None else [])
    d = fine if cg is None else coarse_grain_D(fine, cg)
    verdict = decide(d, criterion, epsilon)
    elapsed = time.perf_counter() - start
    return AnalysisReport(
        config=cfg.raw,
        formulation=cfg.formulation,
        labels=list(d.index_labels),
        entries=np.array(d.entries),
        n_fine_histories=len(fine),
        axioms=axioms.as_dict(),
        verdict=verdict.as_dict(),
        probabilities=None
        if verdict.probabilities is None
        else [(lab, float(p)) for lab, p in verdict.probabilities.items()],
        timing={"elapsed_seconds": elapsed},
    )


def emit_report(report, fmt="json", destination=None):
    """Serialize ``report``; write it to ``destination`` if given.

    Returns the serialized text.
    """
    if fmt == "json":
        text = report.to_json()
    elif fmt == "csv":
        text = report.to_csv()
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if destination is not None:
        path = Path(destination)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc}") from exc
    return text


def read_report(path):
    return AnalysisReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
