"""Scenario generators and Monte Carlo drivers for size and power studies."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from joblib import Parallel, delayed

from .data import Dataset
from .errors import ConfigError
from .glp import DEFAULT_SEED, derive_seed, glp_chart, glp_test, permutation_distribution

SCENARIOS = (
    "location",
    "scale",
    "location_scale",
    "heavy_tail",
    "poisson",
    "contaminated_location",
    "contaminated_tail",
    "mixed",
)

DEFAULT_PARAMS = {
    "location": {"shift": 0.5},
    "scale": {"variance": 1.5},
    "location_scale": {"shift": 0.3, "variance": 1.3},
    "heavy_tail": {"df": 3.0},
    "poisson": {"rate1": 5.0, "rate2": 5.5},
    "contaminated_location": {"shift": 0.5, "eta": 0.1},
    "contaminated_tail": {"df": 3.0, "eta": 0.1},
    "mixed": {"shift": 0.3, "variance": 1.3, "r": 0.5},
}

OUTLIER_CENTER = 20.0
OUTLIER_VARIANCE = 3.0
MAX_DIM = 1024


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass
class ScenarioSpec:
    """One simulation setting.

    ``params`` keys by scenario (defaults in ``DEFAULT_PARAMS``):
    ``shift`` (mean offset of group 2, or ``shifts`` for one offset per
    group), ``variance`` (group-2 variance), ``df`` (t degrees of freedom),
    ``rate1``/``rate2`` (Poisson means), ``eta`` (outlier rate), ``r``
    (fraction of columns scale-inflated in the mixed scenario). Any scenario
    accepts ``eta`` to add outliers.
    """

    name: str
    d: int
    n_per_group: List[int] = field(default_factory=lambda: [100, 100])
    params: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise ConfigError(f"scenario: unknown name {self.name!r}; choose from {SCENARIOS}")
        merged = dict(DEFAULT_PARAMS[self.name])
        merged.update(self.params or {})
        self.params = merged
        self.n_per_group = [int(v) for v in self.n_per_group]
        self.validate()

    def validate(self) -> None:
        p = self.params
        if not 1 <= int(self.d) <= MAX_DIM:
            raise ConfigError(f"d: must be in [1, {MAX_DIM}], got {self.d}")
        if len(self.n_per_group) < 2 or min(self.n_per_group) < 2:
            raise ConfigError("n_per_group: need >= 2 groups of >= 2 observations")
        if not 0.0 <= p.get("eta", 0.0) <= 0.5:
            raise ConfigError(f"eta: must be in [0, 0.5], got {p['eta']}")
        if p.get("variance", 1.0) <= 0:
            raise ConfigError(f"variance: must be > 0, got {p['variance']}")
        if p.get("df", 1.0) < 1:
            raise ConfigError(f"df: must be >= 1, got {p['df']}")
        if not 0.0 <= p.get("r", 0.0) <= 1.0:
            raise ConfigError(f"r: must be in [0, 1], got {p['r']}")
        if "shifts" in p and len(p["shifts"]) != len(self.n_per_group):
            raise ConfigError("shifts: need one shift per group")
        for key in ("rate1", "rate2"):
            if key in p and p[key] <= 0:
                raise ConfigError(f"{key}: must be > 0")

    def with_(self, **changes) -> "ScenarioSpec":
        data = asdict(self)
        params = dict(data.pop("params"))
        params.update(changes.pop("params", {}))
        data.update(changes)
        return ScenarioSpec(params=params, **data)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioSpec":
        known = {"name", "d", "n_per_group", "params", "seed"}
        extra = set(data) - known - {"dims"}
        if extra:
            raise ConfigError(f"scenario: unknown field(s) {sorted(extra)}")
        if "name" not in data or "d" not in data and "dims" not in data:
            raise ConfigError("scenario: 'name' and 'd' (or 'dims') are required")
        d = data.get("d", (data.get("dims") or [None])[0])
        return cls(
            name=data["name"],
            d=int(d),
            n_per_group=list(data.get("n_per_group", [100, 100])),
            params=dict(data.get("params", {})),
            seed=int(data.get("seed", DEFAULT_SEED)),
        )


def load_scenario(path: Union[str, Path]) -> tuple:
    """Read a scenario JSON file; returns ``(spec, dims)``."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"scenario: cannot read {path}: {exc}") from exc
    spec = ScenarioSpec.from_dict(data)
    dims = [int(v) for v in data.get("dims", [spec.d])]
    return spec, dims


def _outliers(rng, shape, eta):
    mask = rng.random(shape) < eta
    sign = np.where(rng.random(shape) < 0.5, -1.0, 1.0)
    draw = sign * OUTLIER_CENTER + math.sqrt(OUTLIER_VARIANCE) * rng.standard_normal(shape)
    return mask, draw


def _noise(rng, shape, eta):
    """(1 - eta) N(0, 1) + eta N(+-20, 3), entrywise."""
    eps = rng.standard_normal(shape)
    if eta > 0:
        mask, draw = _outliers(rng, shape, eta)
        eps = np.where(mask, draw, eps)
    return eps


def _multivariate_t(rng, size, d, df):
    z = rng.standard_normal((size, d))
    w = rng.chisquare(df, size=size) / df
    return z / np.sqrt(w)[:, None]


def generate(spec: ScenarioSpec) -> Dataset:
    spec.validate()
    rng = rng_for(spec.seed)
    p = spec.params
    d = int(spec.d)
    eta = float(p.get("eta", 0.0))
    groups = []
    for g, size in enumerate(spec.n_per_group):
        alt = g > 0
        shape = (size, d)
        if spec.name in ("location", "contaminated_location"):
            shifts = p.get("shifts") or [0.0] + [p["shift"]] * (len(spec.n_per_group) - 1)
            block = shifts[g] + _noise(rng, shape, eta)
        elif spec.name == "scale":
            sd = math.sqrt(p["variance"]) if alt else 1.0
            block = sd * _noise(rng, shape, eta)
        elif spec.name == "location_scale":
            if alt:
                block = p["shift"] + math.sqrt(p["variance"]) * _noise(rng, shape, eta)
            else:
                block = _noise(rng, shape, eta)
        elif spec.name in ("heavy_tail", "contaminated_tail"):
            if alt:
                block = _multivariate_t(rng, size, d, p["df"])
                if eta > 0:
                    mask, draw = _outliers(rng, shape, eta)
                    block = np.where(mask, draw, block)
            else:
                block = _noise(rng, shape, eta)
        elif spec.name == "poisson":
            rate = p["rate2"] if alt else p["rate1"]
            block = rng.poisson(rate, size=shape).astype(float)
            if eta > 0:
                mask, draw = _outliers(rng, shape, eta)
                block = np.where(mask, draw, block)
        elif spec.name == "mixed":
            block = _noise(rng, shape, eta)
            if alt:
                d2 = int(round(p["r"] * d))
                d1 = d - d2
                block[:, :d1] += p["shift"]
                block[:, d1:] *= math.sqrt(p["variance"])
        else:  # pragma: no cover - guarded by validate
            raise ConfigError(f"scenario: unknown name {spec.name!r}")
        groups.append(block)
    x = np.vstack(groups)
    y = np.repeat(np.arange(1, len(spec.n_per_group) + 1), spec.n_per_group)
    return Dataset(x=x, y=y)


@dataclass
class TestConfig:
    """Which GLP variant a Monte Carlo study runs."""

    __test__ = False  # not a pytest class

    order: Union[int, List[int]] = 1
    chart: bool = False
    max_component: int = 4
    c: float = 0.5
    alpha: float = 0.05
    permutations: Optional[int] = None
    seed: int = DEFAULT_SEED
    scale: str = "mean"

    def label(self) -> str:
        if self.chart:
            return f"chart{self.max_component}"
        if isinstance(self.order, (list, tuple)):
            return "fused" + "+".join(str(o) for o in self.order)
        return f"order{self.order}"


@dataclass
class PowerReport:
    scenario: ScenarioSpec
    order_or_chart: str
    replications: int
    alpha: float
    power: float
    mc_stderr: float
    rejections: int = 0
    p_values: np.ndarray = field(default=None, repr=False)


def resolve_threads(threads: Optional[int] = None) -> int:
    if threads is None:
        threads = int(os.environ.get("GLP_THREADS", "1") or 1)
    return max(1, int(threads))


def _replicate_p(spec: ScenarioSpec, config: TestConfig, rep: int) -> float:
    data = generate(spec.with_(seed=derive_seed(spec.seed, rep)))
    seed = derive_seed(config.seed, rep)
    if config.chart:
        chart = glp_chart(
            data, config.max_component, config.c, seed, config.alpha,
            permutations=config.permutations, scale=config.scale,
        )
        res = chart.overall
    else:
        res = glp_test(
            data, config.order, config.c, seed, config.permutations, scale=config.scale
        )
    if config.permutations:
        return res.p_permutation
    return res.p_asymptotic


def replicate_p_values(
    spec: ScenarioSpec, config: TestConfig, replications: int, threads: Optional[int] = None
) -> np.ndarray:
    """p-values of ``replications`` independent draws; replication r uses seeds derived from r."""
    if replications < 1:
        raise ConfigError("replications: must be >= 1")
    jobs = resolve_threads(threads)
    if jobs == 1:
        out = [_replicate_p(spec, config, r) for r in range(replications)]
    else:
        out = Parallel(n_jobs=jobs)(
            delayed(_replicate_p)(spec, config, r) for r in range(replications)
        )
    return np.asarray(out, dtype=float)


def estimate_power(
    spec: ScenarioSpec,
    test_config: Optional[TestConfig] = None,
    replications: int = 100,
    alpha: Optional[float] = None,
    threads: Optional[int] = None,
) -> PowerReport:
    config = test_config or TestConfig()
    alpha = config.alpha if alpha is None else alpha
    pvals = replicate_p_values(spec, config, replications, threads)
    hits = int(np.sum(pvals <= alpha))
    power = hits / replications
    return PowerReport(
        scenario=spec,
        order_or_chart=config.label(),
        replications=replications,
        alpha=alpha,
        power=power,
        mc_stderr=math.sqrt(power * (1 - power) / replications),
        rejections=hits,
        p_values=pvals,
    )


def power_curve(spec, dims, config, replications, alpha=None, threads=None) -> List[PowerReport]:
    return [estimate_power(spec.with_(d=int(d)), config, replications, alpha, threads) for d in dims]


def write_power_csv(reports: Sequence[PowerReport], path_or_file) -> None:
    rows = [
        {
            "scenario": r.scenario.name,
            "d": r.scenario.d,
            "n_per_group": "+".join(str(v) for v in r.scenario.n_per_group),
            "test": r.order_or_chart,
            "replications": r.replications,
            "alpha": r.alpha,
            "power": f"{r.power:.6g}",
            "stderr": f"{r.mc_stderr:.6g}",
        }
        for r in reports
    ]
    _write_csv(rows, path_or_file)


def _write_csv(rows, path_or_file):
    fields = list(rows[0]) if rows else []
    if hasattr(path_or_file, "write"):
        writer = csv.DictWriter(path_or_file, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return
    with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
        _write_csv(rows, fh)


@dataclass
class NullCalibration:
    d: int
    n1: int
    n2: int
    permutations: int
    p_asymptotic: np.ndarray
    p_permutation: np.ndarray

    @property
    def differences(self) -> np.ndarray:
        return self.p_asymptotic - self.p_permutation

    def summary(self) -> dict:
        diff = self.differences
        q = np.quantile(diff, [0.0, 0.25, 0.5, 0.75, 1.0])
        return {
            "d": self.d,
            "n1": self.n1,
            "n2": self.n2,
            "replications": diff.size,
            "permutations": self.permutations,
            "min": q[0],
            "q25": q[1],
            "median": q[2],
            "q75": q[3],
            "max": q[4],
            "iqr": q[3] - q[1],
            "median_abs": float(np.median(np.abs(diff))),
        }


def _calibration_rep(d, n1, n2, b, seed, order, c, rep, scale):
    spec = ScenarioSpec("location", d, [n1, n2], {"shift": 0.0}, seed=derive_seed(seed, rep))
    data = generate(spec)
    res = glp_test(data, order, c, derive_seed(seed, rep, 1), scale=scale)
    if res.df == 0:
        return 1.0, 1.0
    null = permutation_distribution(data.y, res.z.z, b, derive_seed(seed, rep, 2))
    hits = int(np.sum(null >= res.statistic - 1e-9 * max(res.statistic, 1e-300)))
    return res.p_asymptotic, (1 + hits) / (1 + b)


def calibrate_null(
    d: int,
    n1: int,
    n2: int,
    replications: int = 100,
    b: int = 1000,
    seed: int = DEFAULT_SEED,
    order: int = 1,
    c: float = 0.5,
    threads: Optional[int] = None,
    scale: str = "mean",
) -> NullCalibration:
    """Asymptotic vs permutation p-values under G1 = G2 = N(0, I_d)."""
    for name, v in (("d", d), ("n1", n1), ("n2", n2), ("replications", replications), ("b", b)):
        if v < 1:
            raise ConfigError(f"{name}: must be positive")
    jobs = resolve_threads(threads)
    args = [(d, n1, n2, b, seed, order, c, r, scale) for r in range(replications)]
    if jobs == 1:
        pairs = [_calibration_rep(*a) for a in args]
    else:
        pairs = Parallel(n_jobs=jobs)(delayed(_calibration_rep)(*a) for a in args)
    pa, pp = (np.array(v) for v in zip(*pairs))
    return NullCalibration(d, n1, n2, b, pa, pp)


def write_calibration_csv(results: Sequence[NullCalibration], path_or_file) -> None:
    rows = []
    for res in results:
        s = res.summary()
        rows.append({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in s.items()})
    _write_csv(rows, path_or_file)
