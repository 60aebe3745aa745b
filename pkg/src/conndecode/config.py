"""Run configuration: a YAML file with nested sections; unknown keys are errors."""

from pathlib import Path
from typing import List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .features import FeatureSelection, ThresholdSpec
from .learners import LEARNERS, HyperParams, SolverOptions
from .network import MEASURES, DynamicConfig
from .rng import derive_seed
from .significance import SignificanceConfig
from .validation import CVConfig, ModelSpec


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class DataSection(_Strict):
    manifest: str
    variables: str
    node_labels: Optional[str] = None


class ModeSection(_Strict):
    kind: Literal["static", "dynamic"] = "static"
    width: Optional[int] = None
    step: int = 1
    summary: Literal["mean", "std"] = "mean"

    @model_validator(mode="after")
    def _dynamic_needs_width(self):
        if self.kind == "dynamic" and self.width is None:
            raise ValueError("dynamic mode needs a window width")
        return self


class FeatureSection(_Strict):
    edges: bool = False
    graph_measures: List[Literal[MEASURES]] = []
    additional: List[str] = []
    nuisance: List[str] = []

    @model_validator(mode="after")
    def _some_source(self):
        if not (self.edges or self.graph_measures or self.additional):
            raise ValueError("select at least one feature source")
        return self


class ThresholdSection(_Strict):
    rule: Literal["absolute", "proportional"]
    value: float
    binarize: bool = True


class ParamSection(_Strict):
    C: float = Field(1.0, gt=0)
    nu: float = Field(0.5, gt=0, le=1)
    alpha: float = Field(0.5, ge=0, le=1)
    lam: float = Field(0.1, gt=0, alias="lambda")

    def build(self):
        return HyperParams(self.C, self.nu, self.alpha, self.lam)


class SolverSection(_Strict):
    svm_tol: float = 1e-6
    svm_max_epochs: int = 10_000
    enet_tol: float = 1e-7
    enet_max_sweeps: int = 10_000
    irls_max_iter: int = 100
    svr_C: float = Field(1.0, gt=0)


class ModelSection(_Strict):
    learner: Literal[LEARNERS]
    defaults: ParamSection = ParamSection()
    manual: Optional[ParamSection] = None
    solver: SolverSection = SolverSection()


class CVSection(_Strict):
    k_folds: int = Field(5, ge=2)
    nested: bool = False
    grid_steps: int = Field(3, ge=2)
    feature_fraction: Optional[float] = Field(None, gt=0, le=1)
    seed: Optional[int] = None


class SignificanceSection(_Strict):
    n_permutations: int = Field(0, ge=0)
    alpha: float = Field(0.05, gt=0, lt=1)
    alphas: List[float] = []
    correction: Literal["none", "fdr", "bonferroni"] = "fdr"
    seed: Optional[int] = None
    null_metric: Optional[Literal["auc", "accuracy", "error", "r_squared"]] = None
    fast: bool = False


class RunConfig(_Strict):
    data: DataSection
    mode: ModeSection = ModeSection()
    features: FeatureSection
    outcomes: List[str] = Field(min_length=1)
    thresholds: List[ThresholdSection] = []
    model: ModelSection
    cv: CVSection = CVSection()
    significance: SignificanceSection = SignificanceSection()
    output: str = "results"
    workers: int = Field(1, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _thresholds_for_graphs(self):
        if self.features.graph_measures and not self.thresholds:
            raise ValueError("graph measures need at least one threshold entry")
        return self

    # --- builders -----------------------------------------------------
    def cv_seed(self):
        return self.cv.seed if self.cv.seed is not None else derive_seed(self.seed, 1)

    def permute_seed(self):
        s = self.significance.seed
        return s if s is not None else derive_seed(self.seed, 2)

    def model_spec(self):
        m = self.model
        cv = CVConfig(self.cv.k_folds, self.cv.nested, self.cv.grid_steps,
                      self.cv.feature_fraction, self.cv_seed(),
                      m.manual.build() if m.manual else None)
        return ModelSpec(m.learner, cv, m.defaults.build(), SolverOptions(**m.solver.model_dump()))

    def significance_config(self):
        s = self.significance
        return SignificanceConfig(s.n_permutations, s.alpha, s.correction, self.permute_seed(),
                                  s.null_metric, s.fast, tuple(s.alphas))

    def selection(self):
        f = self.features
        return FeatureSelection(f.edges, tuple(f.graph_measures), tuple(f.additional))

    def threshold_specs(self):
        if not self.thresholds:
            return [None]
        return [ThresholdSpec(t.rule, t.value, t.binarize) for t in self.thresholds]

    def dynamic(self):
        if self.mode.kind != "dynamic":
            return None
        return DynamicConfig(self.mode.width, self.mode.step, self.mode.summary)

    def snapshot(self):
        return self.model_dump(mode="json", by_alias=True)


def parse_config(obj, base_dir=None):
    """Validate a mapping; relative data/output paths resolve against ``base_dir``."""
    try:
        cfg = RunConfig.model_validate(obj)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    if base_dir is not None:
        base = Path(base_dir)

        def fix(p):
            return p if p is None or Path(p).is_absolute() else str((base / p).resolve())

        cfg.data.manifest = fix(cfg.data.manifest)
        cfg.data.variables = fix(cfg.data.variables)
        cfg.data.node_labels = fix(cfg.data.node_labels)
        cfg.output = fix(cfg.output)
    return cfg


def load_config(path):
    path = Path(path)
    try:
        obj = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return parse_config(obj, path.parent)


def dump_config(cfg):
    return yaml.safe_dump(cfg.snapshot(), sort_keys=False)
