"""JSON run configuration and the single-run driver used by ``truncsparse run``.

Schema (all keys optional except ``kind``)::

    {
      "kind": "logistic" | "hinge" | "squared",
      "engine": "quantum" | "classical",
      "rounds": 256, "c_bound": 1.0, "delta": 0.1,
      "gravity": 0.1, "theta": 1.0, "zeta": 0.1, "step_factor": 2.0, "period_k": 1,
      "eta": null, "eps_ip": null, "eps_norm": null,
      "hinge_eta": "proof", "logistic_eps_ip": "statement",
      "seed": 0, "audit": true, "out_dir": null,
      "data": {"source": "synthetic", "dimension": 50, "informative_fraction": 0.1,
               "noise": 0.1, "weight_scale": 3.0, "file_format": "svmlight"}
    }

Leaving ``eta``, ``eps_ip`` and ``eps_norm`` null selects the theorem
presets; setting all three selects manual parameters. ``data.rounds`` and
``data.c_bound`` always follow the top-level values.
"""

from __future__ import annotations

import json
import os
import platform
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .data import Dataset, DatasetSpec, load_dataset, normalize_to_ball, synth_dataset
from .emulation import EstimatorSpec
from .engine import EngineParams, run_quantum_emulated, theorem_presets
from .losses import ProblemKind
from .trace import RunTrace
from .truncation import GravitySchedule, TruncationParams, classical_online_run

OUT_ENV = "TRUNCSPARSE_OUT"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    kind: ProblemKind
    engine: str = "quantum"
    rounds: int = 256
    c_bound: float = 1.0
    delta: float = 0.1
    gravity: float = 0.1
    theta: float = 1.0
    zeta: float = 0.1
    step_factor: float = 2.0
    period_k: int = 1
    eta: Optional[float] = None
    eps_ip: Optional[float] = None
    eps_norm: Optional[float] = None
    hinge_eta: str = "proof"
    logistic_eps_ip: str = "statement"
    seed: int = 0
    audit: bool = True
    out_dir: Optional[str] = None
    data: DatasetSpec = field(default_factory=DatasetSpec)

    def __post_init__(self):
        self.kind = ProblemKind.parse(self.kind)
        if self.engine not in ("quantum", "classical"):
            raise ConfigError("engine must be 'quantum' or 'classical'")
        manual = [self.eta, self.eps_ip, self.eps_norm]
        if any(v is not None for v in manual) and not all(v is not None for v in manual):
            raise ConfigError("eta, eps_ip and eps_norm must be given together or not at all")
        self.data = replace(self.data, rounds=self.rounds, c_bound=self.c_bound)

    @property
    def uses_presets(self) -> bool:
        return self.eta is None

    # --- serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "kind" not in raw:
            raise ConfigError("config needs 'kind'")
        raw = dict(raw)
        data = raw.pop("data", {}) or {}
        dknown = {f.name for f in fields(DatasetSpec)}
        if not isinstance(data, dict) or set(data) - dknown:
            raise ConfigError(f"bad 'data' section; allowed keys: {sorted(dknown)}")
        try:
            return cls(data=DatasetSpec(**data), **raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        return cls.from_json(Path(path).read_text())

    # --- construction ---------------------------------------------------------
    def dataset(self) -> Dataset:
        spec = self.data
        if spec.source == "synthetic":
            return synth_dataset(spec, self.kind, np.random.default_rng(self.seed))
        data = load_dataset(spec.source, spec.file_format, dim=spec.dimension)
        if len(data) < self.rounds:
            raise ConfigError(f"{spec.source} has {len(data)} examples, config asks for {self.rounds}")
        return normalize_to_ball(data.head(self.rounds), self.c_bound)

    def engine_params(self, dim: int) -> EngineParams:
        if self.uses_presets:
            return theorem_presets(self.kind, self.rounds, self.c_bound, self.delta,
                                   gravity=self.gravity, theta=self.theta, zeta=self.zeta,
                                   seed=self.seed, step_factor=self.step_factor,
                                   hinge_eta=self.hinge_eta, logistic_eps_ip=self.logistic_eps_ip,
                                   dimension=dim)
        trunc = TruncationParams(theta=self.theta, eta=self.eta,
                                 gravity=GravitySchedule.constant(self.gravity, self.rounds),
                                 period_k=self.period_k, step_factor=self.step_factor)
        est = EstimatorSpec(eps_ip=self.eps_ip, eps_norm=self.eps_norm, zeta=self.zeta,
                            delta=self.delta, rng_seed=self.seed)
        return EngineParams(self.kind, trunc, est, self.rounds, dim, self.c_bound, "manual")


def output_dir(config: RunConfig, override: Optional[str] = None) -> Path:
    return Path(override or config.out_dir or os.environ.get(OUT_ENV) or "truncsparse_out")


def execute(config: RunConfig) -> tuple[RunTrace, Dataset, EngineParams]:
    data = config.dataset()
    params = config.engine_params(data.dim)
    if config.engine == "classical":
        trace = classical_online_run(config.kind, data, params.trunc)
    else:
        trace = run_quantum_emulated(params, data, np.random.default_rng(config.seed),
                                     audit=config.audit)
    return trace, data, params


def write_run(config: RunConfig, out: Path) -> dict[str, Path]:
    """Run one config and write trace, ledger, report and metadata files.

    Everything except ``metadata.json`` depends only on the config and code,
    so reruns are byte-identical.
    """
    from .regret import best_fixed_comparator, theorem_report

    started = time.time()
    trace, data, params = execute(config)
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: out / name for name in
             ("config.json", "trace.jsonl", "ledger.json", "report.json", "metadata.json")}
    paths["config.json"].write_text(config.to_json() + "\n")
    trace.write_jsonl(paths["trace.jsonl"])

    report = {"kind": config.kind.value, "engine": config.engine, "rounds": config.rounds,
              "dimension": data.dim, "eta": params.trunc.eta, "eps_ip": params.est.eps_ip,
              "eps_norm": params.est.eps_norm, "preset_source": params.preset_source,
              "final_nnz": None if trace.final_weights is None
              else int(np.count_nonzero(trace.final_weights)),
              "mean_loss": float(np.mean(trace.column("loss")))}
    if trace.ledger is not None:
        closed = params.closed_form_queries(data.dim, trace.ledger) if params.preset_source == "theorem" else None
        paths["ledger.json"].write_text(trace.ledger.to_json(closed) + "\n")
        report["ledger_total"] = trace.ledger.total
        report["ledger_closed_form"] = closed
    else:
        del paths["ledger.json"]
    if trace.audited:
        comp = best_fixed_comparator(config.kind, data)
        rep = theorem_report(trace, data, comp, config.c_bound)
        report["regret"] = rep.as_dict()
        report["comparator"] = {"method": comp.method, "converged": comp.converged,
                                "total_loss": comp.total_loss}
    paths["report.json"].write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    meta = {"started": started, "finished": time.time(), "python": platform.python_version(),
            "numpy": np.__version__, "platform": platform.platform()}
    paths["metadata.json"].write_text(json.dumps(meta, indent=2) + "\n")
    return paths
