"""Synthetic cohorts with a planted outcome, for tests and demos."""

import csv
from pathlib import Path
from typing import List, Literal, Tuple

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .ingest import ConnectivityDataset, save_connectivity_set


class GeneratorSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_subjects: int = Field(ge=4)
    n_nodes: int = Field(ge=2)
    task: Literal["regression", "classification"] = "regression"
    # (i, j, beta) with 0-based node indices
    planted_edges: List[Tuple[int, int, float]] = []
    noise: float = Field(1.0, ge=0)
    nuisance_effect: float = 0.0
    edge_scale: float = Field(0.4, gt=0)
    seed: int = 0

    @model_validator(mode="after")
    def _edges_in_range(self):
        for i, j, _ in self.planted_edges:
            if not (0 <= i < self.n_nodes and 0 <= j < self.n_nodes and i != j):
                raise ValueError(f"planted edge ({i}, {j}) is not an off-diagonal pair")
        return self


def generate(spec):
    """Return (dataset, rows of the variable sheet, ground truth dict)."""
    rng = np.random.default_rng(spec.seed)
    n, k = spec.n_subjects, spec.n_nodes
    iu, ju = np.triu_indices(k, 1)
    mats = []
    for _ in range(n):
        m = np.eye(k)
        vals = np.tanh(spec.edge_scale * rng.standard_normal(len(iu)))
        m[iu, ju] = vals
        m[ju, iu] = vals
        mats.append(m)
    age = rng.normal(40.0, 10.0, n).round(1)
    age_z = (age - age.mean()) / age.std(ddof=1)
    signal = np.zeros(n)
    for i, j, beta in spec.planted_edges:
        signal += beta * np.array([m[i, j] for m in mats])
    signal += spec.nuisance_effect * age_z
    outcome = signal + spec.noise * rng.standard_normal(n)
    subjects = [f"sub{s + 1:03d}" for s in range(n)]
    if spec.task == "classification":
        label = np.where(outcome > np.median(outcome), "patient", "control")
        rows = [(s, str(lab), repr(float(a))) for s, lab, a in zip(subjects, label, age)]
    else:
        rows = [(s, repr(float(y)), repr(float(a))) for s, y, a in zip(subjects, outcome, age)]
    data = ConnectivityDataset(tuple(subjects), tuple(str(i + 1) for i in range(k)), tuple(mats))
    truth = {
        "planted_edges": [[int(i), int(j), float(b)] for i, j, b in spec.planted_edges],
        "noise": spec.noise,
        "nuisance_effect": spec.nuisance_effect,
        "signal_variance": float(signal.var(ddof=1)),
        "seed": spec.seed,
        "outcome_column": "outcome",
        "nuisance_column": "age",
    }
    return data, rows, truth


def write_synthetic(spec, out_dir):
    """Write manifest, matrices, variable sheet, ground truth and a starter config."""
    try:
        spec = spec if isinstance(spec, GeneratorSpec) else GeneratorSpec.model_validate(spec)
    except ValidationError as exc:
        raise ValueError(f"invalid generator spec: {exc}") from exc
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data, rows, truth = generate(spec)
    manifest = save_connectivity_set(data, out)
    sheet = out / "variables.csv"
    with open(sheet, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["subject_id", "outcome", "age"])
        w.writerows(rows)
    (out / "ground_truth.yaml").write_text(yaml.safe_dump(truth, sort_keys=False))
    learner = "enet_regression" if spec.task == "regression" else "svc"
    config = {
        "data": {"manifest": manifest.name, "variables": sheet.name},
        "features": {"edges": True, "nuisance": ["age"]},
        "outcomes": ["outcome"],
        "model": {"learner": learner},
        "cv": {"k_folds": 5, "nested": True, "grid_steps": 3},
        "significance": {"n_permutations": 99, "alpha": 0.05, "correction": "fdr"},
        "output": "results",
        "seed": spec.seed,
    }
    (out / "config.yaml").write_text(yaml.safe_dump(config, sort_keys=False))
    return manifest, sheet
