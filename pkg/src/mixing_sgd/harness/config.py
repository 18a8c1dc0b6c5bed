"""Plain-text experiment configuration.

The format is key=value lines grouped under [section] headers.  Keys before
the first header are global (base_seed, threads, record_stride).  The [run]
section may repeat, one block per SGD run.  Vectors and matrices are
comma-separated row-major lists; diagonal matrices accept the shorthand
``A=diag:a1,a2,...``.  Lines starting with # are comments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..mixing.models import Algebraic, Geometric, Iid, MixingModel, Tabulated
from ..mixing.streams import (
    StreamSpec,
    spec_from_config_block,
    tuned_hold_spec,
    HoldTimeUniformSpec,
)
from ..objective import QuadraticProblem, uniform_problem_for_spec, default_experiment_problem
from ..seeding import derive_seed

__all__ = [
    "RunBlock",
    "ExperimentConfig",
    "parse_config_text",
    "parse_config_file",
    "parse_model",
    "model_label",
]

_SCHEME_KINDS = ("plain", "subsampled", "minibatch")
_LR_KINDS = ("constant", "inv_sqrt", "theory_minibatch", "reference_minibatch")


@dataclass(frozen=True)
class RunBlock:
    """One SGD run: scheme, schedule and length."""

    scheme_kind: str
    period: int = 1
    batch_size: int = 1
    lr_kind: str = "constant"
    lr_value: float = 0.01
    n_iters: int | None = None

    def __post_init__(self):
        if self.scheme_kind not in _SCHEME_KINDS:
            raise ConfigError(f"unknown scheme {self.scheme_kind!r}")
        if self.lr_kind not in _LR_KINDS:
            raise ConfigError(f"unknown lr kind {self.lr_kind!r}")
        if self.period < 1 or self.batch_size < 1:
            raise ConfigError("r and B must be >= 1")
        if self.lr_value <= 0:
            raise ConfigError("learning rate must be positive")
        if self.n_iters is not None and self.n_iters < 1:
            raise ConfigError("n_iters must be >= 1")

    @property
    def samples_per_step(self) -> int:
        if self.scheme_kind == "subsampled":
            return self.period
        if self.scheme_kind == "minibatch":
            return self.batch_size
        return 1

    def canonical_text(self) -> str:
        """Stable serialization used to key trial seeds by block content."""
        return (f"scheme={self.scheme_kind};r={self.period};B={self.batch_size};"
                f"lr={self.lr_kind}:{self.lr_value!r};n_iters={self.n_iters}")


@dataclass
class ExperimentConfig:
    base_seed: int
    threads: int
    record_stride: int
    problem: QuadraticProblem
    init_point: np.ndarray
    stream_spec: StreamSpec
    mix_rate: float | None
    runs: list[RunBlock]
    compare_n_trials: int
    compare_budget: int
    bias_taus: tuple
    bias_batch_sizes: tuple
    bias_mix_rates: tuple
    bias_n_mc: int
    bias_point: np.ndarray
    check_lags: tuple
    check_n_replicates: int
    check_n_continuations: int
    check_burn_in: int
    check_subsample_period: int
    check_model: MixingModel | None
    bounds_section: dict = field(default_factory=dict)


def _parse_sections(text: str):
    """Split config text into (globals, [(section_name, dict), ...])."""
    globals_: dict[str, str] = {}
    sections: list[tuple[str, dict]] = []
    current: dict[str, str] | None = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            current = {}
            sections.append((name, current))
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        target = globals_ if current is None else current
        key = key.strip()
        if key in target:
            raise ConfigError(f"line {ln}: duplicate key {key!r}")
        target[key] = value.strip()
    return globals_, sections


def _floats(text: str) -> np.ndarray:
    try:
        return np.asarray([float(x) for x in text.split(",") if x.strip() != ""])
    except ValueError as exc:
        raise ConfigError(f"bad float list {text!r}: {exc}") from exc


def _ints(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip() != "")
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}: {exc}") from exc


def parse_model(text: str) -> MixingModel:
    """Parse ``iid``, ``geometric:theta``, ``algebraic:theta`` or
    ``tabulated:<hold|zero>:v1,v2,...``."""
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "iid":
            return Iid()
        if kind == "geometric":
            return Geometric(theta=float(rest))
        if kind == "algebraic":
            return Algebraic(theta=float(rest))
        if kind == "tabulated":
            rule, _, vals = rest.partition(":")
            return Tabulated(values=tuple(_floats(vals)), tail_rule=rule.strip())
        raise ConfigError(f"unknown mixing model {text!r}")
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad mixing model {text!r}: {exc}") from exc


def model_label(model: MixingModel) -> str:
    if isinstance(model, Iid):
        return "iid"
    if isinstance(model, Geometric):
        return f"geometric:{model.theta!r}"
    if isinstance(model, Algebraic):
        return f"algebraic:{model.theta!r}"
    if isinstance(model, Tabulated):
        vals = ",".join(repr(v) for v in model.values)
        return f"tabulated:{model.tail_rule}:{vals}"
    raise TypeError(f"unknown model {type(model).__name__}")


def _parse_matrix(text: str, d: int) -> np.ndarray:
    if text.startswith("diag:"):
        diag = _floats(text[len("diag:"):])
        if diag.size != d:
            raise ConfigError(f"diagonal has {diag.size} entries, expected {d}")
        return np.diag(diag)
    flat = _floats(text)
    if flat.size != d * d:
        raise ConfigError(f"matrix has {flat.size} entries, expected {d * d}")
    return flat.reshape(d, d)


def _parse_run_block(sec: dict) -> RunBlock:
    scheme = sec.get("scheme", "plain").lower()
    lr_text = sec.get("lr", "constant:0.01")
    lr_kind, _, lr_val = lr_text.partition(":")
    lr_kind = lr_kind.strip().lower()
    try:
        lr_value = float(lr_val) if lr_val else 0.01
    except ValueError as exc:
        raise ConfigError(f"bad lr value in {lr_text!r}") from exc
    n_iters = int(sec["n_iters"]) if "n_iters" in sec else None
    try:
        return RunBlock(
            scheme_kind=scheme,
            period=int(sec.get("r", "1")),
            batch_size=int(sec.get("B", "1")),
            lr_kind=lr_kind,
            lr_value=lr_value,
            n_iters=n_iters,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config_text(text: str) -> ExperimentConfig:
    globals_, sections = _parse_sections(text)
    by_name: dict[str, dict] = {}
    runs: list[RunBlock] = []
    for name, sec in sections:
        if name == "run":
            runs.append(_parse_run_block(sec))
        elif name in by_name:
            raise ConfigError(f"section [{name}] may not repeat")
        else:
            by_name[name] = sec

    try:
        base_seed = int(globals_.get("base_seed", "0"))
        threads = int(globals_.get("threads", "1"))
        record_stride = int(globals_.get("record_stride", "1"))
    except ValueError as exc:
        raise ConfigError(f"bad global value: {exc}") from exc
    if threads < 1 or record_stride < 1:
        raise ConfigError("threads and record_stride must be >= 1")

    # Stream first: the default problem depends on its stationary law.
    stream_sec = by_name.get("stream", {})
    mix_rate = float(stream_sec["mix_rate"]) if "mix_rate" in stream_sec else None
    if stream_sec:
        if stream_sec.get("kind") == "hold_time_uniform" and "alpha" not in stream_sec:
            if mix_rate is None:
                raise ConfigError("hold_time_uniform needs alpha or mix_rate")
            spec = tuned_hold_spec(
                mix_rate,
                d=int(stream_sec.get("d", "10")),
                seed=int(stream_sec.get("seed", str(derive_seed(base_seed, 0x57)))),
                max_hold=int(stream_sec.get("max_hold", "10000")),
            )
        else:
            block = dict(stream_sec)
            block.pop("mix_rate", None)
            block.setdefault("seed", str(derive_seed(base_seed, 0x57)))
            try:
                spec = spec_from_config_block(block)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"bad [stream] section: {exc}") from exc
    else:
        mix_rate = 2.0
        spec = tuned_hold_spec(2.0, d=10, seed=derive_seed(base_seed, 0x57))

    prob_sec = by_name.get("problem", {})
    try:
        if prob_sec:
            d = int(prob_sec.get("d", str(spec.dim)))
            if d != spec.dim:
                raise ConfigError(f"problem dimension {d} != stream dimension {spec.dim}")
            matrix = (_parse_matrix(prob_sec["A"], d) if "A" in prob_sec
                      else np.diag(np.arange(1, d + 1, dtype=float) / d))
            center = (_floats(prob_sec["domain_center"]) if "domain_center" in prob_sec
                      else np.full(d, 0.5))
            radius = float(prob_sec.get("domain_radius", "5.0"))
            problem = uniform_problem_for_spec(spec, matrix, center, radius)
            init = (_floats(prob_sec["init_point"]) if "init_point" in prob_sec
                    else np.zeros(d))
        else:
            if spec.dim == 10:
                problem = default_experiment_problem(10)
            else:
                d = spec.dim
                problem = uniform_problem_for_spec(
                    spec, np.diag(np.arange(1, d + 1, dtype=float) / d),
                    np.full(d, 0.5), 5.0)
            init = np.zeros(spec.dim)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad [problem] section: {exc}") from exc
    if init.size != problem.dim:
        raise ConfigError("init_point dimension mismatch")

    comp_sec = by_name.get("compare", {})
    sweep_sec = by_name.get("bias_sweep", {})
    check_sec = by_name.get("mixing_check", {})

    try:
        cfg = ExperimentConfig(
            base_seed=base_seed,
            threads=threads,
            record_stride=record_stride,
            problem=problem,
            init_point=init,
            stream_spec=spec,
            mix_rate=mix_rate,
            runs=runs,
            compare_n_trials=int(comp_sec.get("n_trials", "100")),
            compare_budget=int(comp_sec.get("budget", "100000")),
            bias_taus=_ints(sweep_sec.get("taus", "1,2,4,8,16,32,64,128")),
            bias_batch_sizes=_ints(sweep_sec.get("batch_sizes", "1,100")),
            bias_mix_rates=tuple(float(x) for x in
                                 sweep_sec.get("mix_rates", "2.0").split(",")),
            bias_n_mc=int(sweep_sec.get("n_mc", "10000")),
            bias_point=(_floats(sweep_sec["w"]) if "w" in sweep_sec else init.copy()),
            check_lags=_ints(check_sec.get("lags", "2,4,8,16,32,64,128,256,512")),
            check_n_replicates=int(check_sec.get("n_replicates", "6000")),
            check_n_continuations=int(check_sec.get("n_continuations", "24")),
            check_burn_in=int(check_sec.get("burn_in", "0")),
            check_subsample_period=int(check_sec.get("subsample_period", "10")),
            check_model=(parse_model(check_sec["model"]) if "model" in check_sec else None),
            bounds_section=by_name.get("bounds", {}),
        )
    except ValueError as exc:
        raise ConfigError(f"bad section value: {exc}") from exc

    if not cfg.bias_taus or not cfg.bias_batch_sizes or not cfg.bias_mix_rates:
        raise ConfigError("bias sweep grids must be non-empty")
    if cfg.compare_n_trials < 1:
        raise ConfigError("n_trials must be >= 1")
    if cfg.bias_n_mc < 1000:
        raise ConfigError("bias sweep needs n_mc >= 1000")
    if cfg.bias_point.size != problem.dim:
        raise ConfigError("bias sweep point dimension mismatch")
    if any(t < 1 for t in cfg.bias_taus) or any(b < 1 for b in cfg.bias_batch_sizes):
        raise ConfigError("taus and batch sizes must be >= 1")
    if any(r <= 0 for r in cfg.bias_mix_rates):
        raise ConfigError("mix rates must be positive")
    if any(k < 1 for k in cfg.check_lags):
        raise ConfigError("lags must be >= 1")
    return cfg


def parse_config_file(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def nominal_stream_model(cfg: ExperimentConfig) -> MixingModel:
    """Declared mixing model of the configured stream.

    Hold-time streams with a tuned mix_rate declare Algebraic(1/mix_rate);
    iid streams declare Iid.  Other kinds need an explicit model key.
    """
    if cfg.check_model is not None:
        return cfg.check_model
    spec = cfg.stream_spec
    base = spec.inner if hasattr(spec, "inner") else spec
    if isinstance(base, HoldTimeUniformSpec):
        if cfg.mix_rate is None:
            raise ConfigError("declare [mixing_check] model=... or stream mix_rate")
        return Algebraic(theta=1.0 / cfg.mix_rate)
    from ..mixing.streams import IidUniformSpec
    if isinstance(base, IidUniformSpec):
        return Iid()
    raise ConfigError("declare [mixing_check] model=... for this stream kind")
