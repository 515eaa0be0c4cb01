from enum import Enum
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class VictimKind(str, Enum):
    LOGREG = "logreg"
    SOFT_KMEANS = "soft_kmeans"


class NefariousKind(str, Enum):
    TARGETED = "targeted"
    AVERSION = "aversion"
    BACKDOOR = "backdoor"


class NefariousMetric(str, Enum):
    COSINE_SIM = "cosine_sim"
    SQUARED_DIST = "squared_dist"


class EnvironmentKind(str, Enum):
    GAUSSIAN_MIXTURE_1D = "gaussian_mixture_1d"
    DATASET = "dataset"


class PolicyKind(str, Enum):
    NULL = "null"
    GREEDY = "greedy"
    NLP = "nlp"
    CLAIRVOYANT = "clairvoyant"


# "random" draws from a standard Gaussian of the victim's shape.
ParamSpec = Union[Literal["random"], List[float], List[List[float]]]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class VictimSpec(StrictModel):
    kind: VictimKind
    eta: float = Field(gt=0)
    k: int = Field(default=1, ge=1)
    d: int = Field(ge=1)

    @model_validator(mode="after")
    def _logreg_has_single_vector(self):
        if self.kind == VictimKind.LOGREG and self.k != 1:
            raise ValueError("k applies to soft_kmeans only; logreg requires k=1")
        return self

    @property
    def supervised(self) -> bool:
        return self.kind == VictimKind.LOGREG

    @property
    def param_shape(self) -> tuple:
        if self.kind == VictimKind.LOGREG:
            return (self.d,)
        return (self.k, self.d)


class CostConfig(StrictModel):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    lambda_: float = Field(default=1.0, ge=0, alias="lambda")
    nefarious: NefariousKind = NefariousKind.TARGETED
    metric: NefariousMetric = NefariousMetric.SQUARED_DIST
    target: ParamSpec = "random"
    anchor: Optional[ParamSpec] = None
    trigger_features: Optional[List[float]] = None
    trigger_label: Optional[int] = None
    perturb_labels: bool = False

    @field_validator("perturb_labels")
    @classmethod
    def _labels_fixed(cls, value: bool) -> bool:
        if value:
            raise ValueError("label perturbation disabled")
        return value

    @model_validator(mode="after")
    def _goal_fields_present(self):
        if self.nefarious == NefariousKind.AVERSION and self.anchor is None:
            raise ValueError("aversion attack requires an anchor model")
        if self.nefarious == NefariousKind.BACKDOOR:
            if self.trigger_features is None or self.trigger_label not in (-1, 1):
                raise ValueError("backdoor attack requires trigger_features and trigger_label in {-1, +1}")
        return self


class EnvironmentConfig(StrictModel):
    kind: EnvironmentKind
    means: Optional[List[float]] = None
    weights: Optional[List[float]] = None
    stddev: Optional[float] = Field(default=None, gt=0)
    component_labels: Optional[List[int]] = None
    path: Optional[str] = None
    label_column: Optional[Union[int, str]] = None
    header: bool = True
    label_map: Optional[Dict[str, int]] = None
    d_target: int = Field(default=30, ge=1)
    normalize: bool = True

    @model_validator(mode="after")
    def _kind_fields(self):
        if self.kind == EnvironmentKind.GAUSSIAN_MIXTURE_1D:
            if not self.means or self.weights is None or self.stddev is None:
                raise ValueError("gaussian_mixture_1d requires means, weights and stddev")
            if len(self.means) != len(self.weights):
                raise ValueError("means and weights must have equal length")
            if any(w < 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-9:
                raise ValueError("weights must be nonnegative and sum to 1")
            if self.component_labels is not None:
                if len(self.component_labels) != len(self.means):
                    raise ValueError("component_labels must match means")
                if any(label not in (-1, 1) for label in self.component_labels):
                    raise ValueError("component_labels must be -1 or +1")
        else:
            if not self.path:
                raise ValueError("dataset environment requires a path")
        return self


class TrajOptConfig(StrictModel):
    horizon: int = Field(default=100, ge=1)
    max_iters: int = Field(default=2000, ge=0)
    step_size: float = Field(default=0.05, gt=0)
    gamma: float = Field(default=0.99, gt=0, lt=1)
    convergence_tol: float = Field(default=1e-6, gt=0)
    num_trajectories: int = Field(default=1, ge=1)
    warm_start: bool = True
    reuse_futures: bool = True
    plateau_patience: int = Field(default=50, ge=1)
    min_step_size: float = Field(default=1e-6, gt=0)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    epsilon: float = Field(default=1e-8, gt=0)


class EpisodeConfig(StrictModel):
    victim: VictimSpec
    cost: CostConfig
    env: EnvironmentConfig
    policy: PolicyKind
    trajopt: TrajOptConfig = TrajOptConfig()
    T: int = Field(ge=1)
    gamma: float = Field(default=0.99, gt=0, lt=1)
    theta0: ParamSpec = "random"
    seed: int = Field(default=0, ge=0)
    pre_attack_n: int = Field(default=1000, ge=0)
    clairvoyant_iter_scale: Optional[float] = Field(default=None, gt=0)

    def planner_config(self) -> TrajOptConfig:
        # The episode discount is authoritative for every planner.
        return self.trajopt.model_copy(update={"gamma": self.gamma})


class EpisodeSection(StrictModel):
    T: int = Field(ge=1)
    gamma: float = Field(default=0.99, gt=0, lt=1)
    theta0: ParamSpec = "random"
    pre_attack_n: int = Field(default=1000, ge=0)
    clairvoyant_iter_scale: Optional[float] = Field(default=None, gt=0)


class RunConfigFile(StrictModel):
    output_dir: Optional[str] = None
    policies: List[PolicyKind] = Field(
        default_factory=lambda: [PolicyKind.NULL, PolicyKind.GREEDY, PolicyKind.NLP, PolicyKind.CLAIRVOYANT],
        min_length=1,
    )
    seeds: List[int] = Field(default_factory=lambda: [0], min_length=1)
    parallelism: Optional[int] = Field(default=None, ge=1)
    write_traces: bool = True
    episode: EpisodeSection
    victim: VictimSpec
    cost: CostConfig
    env: EnvironmentConfig
    trajopt: TrajOptConfig = TrajOptConfig()

    @field_validator("seeds")
    @classmethod
    def _seeds_nonnegative(cls, seeds: List[int]) -> List[int]:
        if any(s < 0 for s in seeds):
            raise ValueError("seeds must be nonnegative")
        return seeds

    def episode_configs(self) -> List[EpisodeConfig]:
        return [
            EpisodeConfig(
                victim=self.victim,
                cost=self.cost,
                env=self.env,
                policy=policy,
                trajopt=self.trajopt,
                T=self.episode.T,
                gamma=self.episode.gamma,
                theta0=self.episode.theta0,
                seed=seed,
                pre_attack_n=self.episode.pre_attack_n,
                clairvoyant_iter_scale=self.episode.clairvoyant_iter_scale,
            )
            for seed in self.seeds
            for policy in self.policies
        ]


class EpisodeSummary(BaseModel):
    policy: PolicyKind
    seed: int
    T: int
    jtilde_T: Optional[float] = None
    wall_seconds: float = 0.0
    error: Optional[str] = None
    failed_step: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class Prop1TrialRecord(BaseModel):
    trial: int
    epsilon: float
    gap: float
    bound: float
    ratio: float


class Prop1Report(BaseModel):
    records: List[Prop1TrialRecord]
    violations: int
    max_ratio: float
    min_gap: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.min_gap >= -2 * self.tol


class Thm2TrialRecord(BaseModel):
    trial: int
    l1: float
    bound: float
    covered: bool


class Thm2Report(BaseModel):
    N: int
    n: int
    delta: float
    bound: float
    records: List[Thm2TrialRecord]
    coverage: float

    @property
    def passed(self) -> bool:
        return self.coverage >= 1.0 - self.delta


class SimulationLemmaRecord(BaseModel):
    trial: int
    epsilon: float
    eval_gap: float
    bound: float
    ratio: float


class SimulationLemmaReport(BaseModel):
    records: List[SimulationLemmaRecord]
    violations: int
    max_ratio: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


class Thm2GapRecord(BaseModel):
    trial: int
    l1: float
    gap: float
    bound: float
    covered: bool


class Thm2GapReport(BaseModel):
    N: int
    n: int
    delta: float
    bound: float
    records: List[Thm2GapRecord]
    coverage: float

    @property
    def passed(self) -> bool:
        return self.coverage >= 1.0 - self.delta
