"""Declarative experiment configs.

A config is one YAML document with nested sections (family / train / eval /
scaling). Parsing is strict: unknown keys are rejected with the offending
field named, and every range is validated before anything runs. The parsed
form round-trips: load -> to_dict -> load gives an identical structure.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field as dc_field
from typing import Dict, List, Optional, Tuple

import yaml

from .errors import ConfigError
from .evaluation import EvalGrid, log_grid
from .fields import KIND_NAMES, FieldKind, TaskFamily, family_for
from .reference import TruthSpec
from .training import TrainConfig

_DEFAULT_HORIZON = {
    FieldKind.LINEAR1D: 1.0,
    FieldKind.SQUARE1D: 1.0,
    FieldKind.VAN_DER_POL: 2.0,
    FieldKind.BRUSSELATOR: 2.0,
    FieldKind.LINEAR_ND: 1.0,
    FieldKind.NONLINEAR_ND: 1.0,
}

_PARAM_KEYS = {
    FieldKind.LINEAR1D: {"a"},
    FieldKind.SQUARE1D: {"a"},
    FieldKind.VAN_DER_POL: {"a"},
    FieldKind.BRUSSELATOR: {"a", "b"},
    FieldKind.LINEAR_ND: set(),
    FieldKind.NONLINEAR_ND: set(),
}


def _require_keys(section: dict, allowed: set, where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(
            f"unknown key(s) {sorted(unknown)}", field=where
        )


def _pair(value, where: str) -> Tuple[float, float]:
    try:
        lo, hi = float(value[0]), float(value[1])
    except (TypeError, ValueError, IndexError):
        raise ConfigError(f"expected a [lo, hi] pair, got {value!r}", field=where)
    return (lo, hi)


@dataclass
class FamilySpec:
    kind: str
    dim: int = 1
    params: Dict[str, Tuple[float, float]] = dc_field(default_factory=dict)
    y0: Optional[List[Tuple[float, float]]] = None

    @staticmethod
    def from_dict(raw: dict) -> "FamilySpec":
        _require_keys(raw, {"kind", "dim", "params", "y0"}, "family")
        kind = raw.get("kind")
        if kind not in KIND_NAMES:
            raise ConfigError(
                f"kind must be one of {sorted(KIND_NAMES)}, got {kind!r}",
                field="family.kind",
            )
        dim = int(raw.get("dim", 1))
        params = {
            k: _pair(v, f"family.params.{k}")
            for k, v in (raw.get("params") or {}).items()
        }
        allowed = _PARAM_KEYS[KIND_NAMES[kind]]
        unknown = set(params) - allowed
        if unknown:
            raise ConfigError(
                f"parameters {sorted(unknown)} not valid for kind {kind}",
                field="family.params",
            )
        y0 = raw.get("y0")
        if y0 is not None:
            y0 = [_pair(r, f"family.y0[{i}]") for i, r in enumerate(y0)]
        return FamilySpec(kind=kind, dim=dim, params=params, y0=y0)


@dataclass
class OptimizerSpec:
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    lr_decay: float = 1.0

    @staticmethod
    def from_dict(raw: dict) -> "OptimizerSpec":
        _require_keys(raw, {"lr", "beta1", "beta2", "eps", "lr_decay"},
                      "train.optimizer")
        return OptimizerSpec(**{k: float(v) for k, v in raw.items()})


@dataclass
class TrainSpec:
    stages: int
    target_order: int
    h_range: Tuple[float, float] = (0.01, 0.1)
    batch_size: int = 32
    max_iterations: int = 2000
    tolerance: float = 0.0
    regularizer_weight: float = 1.0
    reference: str = "auto"
    surrogate_order: Optional[int] = None
    resample_each_epoch: bool = True
    optimizer: OptimizerSpec = dc_field(default_factory=OptimizerSpec)

    @staticmethod
    def from_dict(raw: dict) -> "TrainSpec":
        allowed = {
            "stages", "target_order", "h_range", "batch_size", "max_iterations",
            "tolerance", "regularizer_weight", "reference", "surrogate_order",
            "resample_each_epoch", "optimizer",
        }
        _require_keys(raw, allowed, "train")
        for key in ("stages", "target_order"):
            if key not in raw:
                raise ConfigError("required", field=f"train.{key}")
        opt = OptimizerSpec.from_dict(raw.get("optimizer") or {})
        sur = raw.get("surrogate_order")
        return TrainSpec(
            stages=int(raw["stages"]),
            target_order=int(raw["target_order"]),
            h_range=_pair(raw.get("h_range", (0.01, 0.1)), "train.h_range"),
            batch_size=int(raw.get("batch_size", 32)),
            max_iterations=int(raw.get("max_iterations", 2000)),
            tolerance=float(raw.get("tolerance", 0.0)),
            regularizer_weight=float(raw.get("regularizer_weight", 1.0)),
            reference=str(raw.get("reference", "auto")),
            surrogate_order=None if sur is None else int(sur),
            resample_each_epoch=bool(raw.get("resample_each_epoch", True)),
            optimizer=opt,
        )


@dataclass
class GridSpec:
    h_min: float = 0.01
    h_max: float = 0.1
    points: int = 8

    @staticmethod
    def from_dict(raw: dict, where: str) -> "GridSpec":
        _require_keys(raw, {"min", "max", "points"}, where)
        return GridSpec(
            h_min=float(raw.get("min", 0.01)),
            h_max=float(raw.get("max", 0.1)),
            points=int(raw.get("points", 8)),
        )


@dataclass
class VariantSpec:
    name: str
    params: Dict[str, Tuple[float, float]] = dc_field(default_factory=dict)
    y0: Optional[List[Tuple[float, float]]] = None
    h_grid: Optional[GridSpec] = None

    @staticmethod
    def from_dict(raw: dict, index: int) -> "VariantSpec":
        where = f"eval.variants[{index}]"
        _require_keys(raw, {"name", "params", "y0", "h_grid"}, where)
        if "name" not in raw:
            raise ConfigError("required", field=f"{where}.name")
        params = {
            k: _pair(v, f"{where}.params.{k}")
            for k, v in (raw.get("params") or {}).items()
        }
        y0 = raw.get("y0")
        if y0 is not None:
            y0 = [_pair(r, f"{where}.y0[{i}]") for i, r in enumerate(y0)]
        grid = raw.get("h_grid")
        if grid is not None:
            grid = GridSpec.from_dict(grid, f"{where}.h_grid")
        return VariantSpec(name=str(raw["name"]), params=params, y0=y0, h_grid=grid)


@dataclass
class EvalSpec:
    h_grid: GridSpec = dc_field(default_factory=GridSpec)
    horizon: Optional[float] = None
    tasks_per_h: int = 50
    truth: str = "auto"
    fine_ratio: int = 100
    surrogate_order: Optional[int] = None
    reference: str = "auto"
    variants: List[VariantSpec] = dc_field(default_factory=list)

    @staticmethod
    def from_dict(raw: dict) -> "EvalSpec":
        allowed = {
            "h_grid", "horizon", "tasks_per_h", "truth", "fine_ratio",
            "surrogate_order", "reference", "variants",
        }
        _require_keys(raw, allowed, "eval")
        hor = raw.get("horizon")
        sur = raw.get("surrogate_order")
        return EvalSpec(
            h_grid=GridSpec.from_dict(raw.get("h_grid") or {}, "eval.h_grid"),
            horizon=None if hor is None else float(hor),
            tasks_per_h=int(raw.get("tasks_per_h", 50)),
            truth=str(raw.get("truth", "auto")),
            fine_ratio=int(raw.get("fine_ratio", 100)),
            surrogate_order=None if sur is None else int(sur),
            reference=str(raw.get("reference", "auto")),
            variants=[
                VariantSpec.from_dict(v, i)
                for i, v in enumerate(raw.get("variants") or [])
            ],
        )


@dataclass
class ScalingSpec:
    dims: List[int] = dc_field(default_factory=lambda: [1, 2, 4, 8, 16, 32])
    kind: str = "linear_nd"
    epochs: int = 10

    @staticmethod
    def from_dict(raw: dict) -> "ScalingSpec":
        _require_keys(raw, {"dims", "kind", "epochs"}, "scaling")
        kind = str(raw.get("kind", "linear_nd"))
        if kind not in ("linear_nd", "nonlinear_nd"):
            raise ConfigError(
                f"kind must be linear_nd or nonlinear_nd, got {kind!r}",
                field="scaling.kind",
            )
        return ScalingSpec(
            dims=[int(d) for d in raw.get("dims", [1, 2, 4, 8, 16, 32])],
            kind=kind,
            epochs=int(raw.get("epochs", 10)),
        )


@dataclass
class ExperimentConfig:
    name: str
    family: FamilySpec
    train: Optional[TrainSpec] = None
    eval: EvalSpec = dc_field(default_factory=EvalSpec)
    scaling: Optional[ScalingSpec] = None
    seed: int = 0
    out_dir: Optional[str] = None

    @staticmethod
    def from_dict(raw: dict) -> "ExperimentConfig":
        allowed = {"name", "seed", "out_dir", "family", "train", "eval", "scaling"}
        _require_keys(raw, allowed, "<root>")
        if "name" not in raw:
            raise ConfigError("required", field="name")
        if "family" not in raw:
            raise ConfigError("required", field="family")
        train = raw.get("train")
        scaling = raw.get("scaling")
        return ExperimentConfig(
            name=str(raw["name"]),
            seed=int(raw.get("seed", 0)),
            out_dir=raw.get("out_dir"),
            family=FamilySpec.from_dict(raw["family"]),
            train=None if train is None else TrainSpec.from_dict(train),
            eval=EvalSpec.from_dict(raw.get("eval") or {}),
            scaling=None if scaling is None else ScalingSpec.from_dict(scaling),
        )

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a mapping", field="<root>")
    return load_config_dict(raw)


def load_config_dict(raw: dict) -> ExperimentConfig:
    return ExperimentConfig.from_dict(raw)


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(_plain(cfg.to_dict()), sort_keys=True)


def _plain(obj):
    """Tuples -> lists so the YAML dump round-trips through from_dict."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


# --- builders: config -> runtime objects --------------------------------------

def build_family(spec: FamilySpec) -> TaskFamily:
    """Default family for the kind, with declared range overrides applied."""
    kind = KIND_NAMES[spec.kind]
    base = family_for(kind, spec.dim)
    params = dict(base.param_ranges)
    params.update(spec.params)
    y0 = spec.y0
    if y0 is None:
        y0_ranges = base.y0_ranges
    elif len(y0) == 1 and base.dim > 1:
        y0_ranges = tuple(tuple(y0[0]) for _ in range(base.dim))
    elif len(y0) == len(base.y0_ranges):
        y0_ranges = tuple(tuple(r) for r in y0)
    else:
        raise ConfigError(
            f"need 1 or {len(base.y0_ranges)} y0 ranges, got {len(y0)}",
            field="family.y0",
        )
    try:
        return TaskFamily(kind, base.dim, params, y0_ranges)
    except ValueError as exc:
        raise ConfigError(str(exc), field="family")


def build_train_config(cfg: ExperimentConfig) -> TrainConfig:
    if cfg.train is None:
        raise ConfigError("required for this command", field="train")
    t = cfg.train
    tc = TrainConfig(
        stages=t.stages,
        target_order=t.target_order,
        h_range=t.h_range,
        batch_size=t.batch_size,
        max_iterations=t.max_iterations,
        tolerance=t.tolerance,
        regularizer_weight=t.regularizer_weight,
        reference=t.reference,
        surrogate_order=t.surrogate_order,
        resample_each_epoch=t.resample_each_epoch,
        lr=t.optimizer.lr,
        beta1=t.optimizer.beta1,
        beta2=t.optimizer.beta2,
        eps=t.optimizer.eps,
        lr_decay=t.optimizer.lr_decay,
        seed=cfg.seed,
    )
    try:
        tc.validate()
    except ValueError as exc:
        raise ConfigError(str(exc), field="train")
    return tc


def _grid_from(spec: GridSpec, ev: EvalSpec, horizon: float) -> EvalGrid:
    truth = TruthSpec(
        mode=ev.truth, surrogate_order=ev.surrogate_order, fine_ratio=ev.fine_ratio
    )
    try:
        return EvalGrid(
            h_values=log_grid(spec.h_min, spec.h_max, spec.points),
            horizon=horizon,
            tasks_per_h=ev.tasks_per_h,
            truth=truth,
        )
    except ValueError as exc:
        raise ConfigError(str(exc), field="eval")


def build_grid(cfg: ExperimentConfig) -> EvalGrid:
    kind = KIND_NAMES[cfg.family.kind]
    horizon = cfg.eval.horizon or _DEFAULT_HORIZON[kind]
    return _grid_from(cfg.eval.h_grid, cfg.eval, horizon)


def build_variants(cfg: ExperimentConfig):
    """(name, family, grid) triples: the base sweep plus declared variants."""
    base_family = build_family(cfg.family)
    base_grid = build_grid(cfg)
    out = [("compare", base_family, base_grid)]
    for v in cfg.eval.variants:
        fam_spec = FamilySpec(
            kind=cfg.family.kind,
            dim=cfg.family.dim,
            params={**cfg.family.params, **v.params},
            y0=v.y0 if v.y0 is not None else cfg.family.y0,
        )
        fam = build_family(fam_spec)
        grid = base_grid
        if v.h_grid is not None:
            kind = KIND_NAMES[cfg.family.kind]
            horizon = cfg.eval.horizon or _DEFAULT_HORIZON[kind]
            grid = _grid_from(v.h_grid, cfg.eval, horizon)
        out.append((v.name, fam, grid))
    return out
