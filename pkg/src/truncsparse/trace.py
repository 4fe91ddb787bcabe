"""Per-round records of an online run and their JSON-lines form."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np


@dataclass
class TraceRow:
    t: int
    y: float
    y_tilde: float                  # prediction the learner acted on
    loss: float                     # loss at y_tilde
    q_tilde: float                  # (estimate of) ||w^(t+1) * I(|w^(t+1)| <= theta)||_1
    y_hat: Optional[float] = None   # exact w^(t).x^(t), audit only
    q: Optional[float] = None       # exact masked norm of w^(t+1), audit only
    nnz: Optional[int] = None       # nnz(w^(t+1)), audit only
    sampled_index: Optional[int] = None
    ip_failed: Optional[bool] = None
    norm_failed: Optional[bool] = None


@dataclass
class RunTrace:
    kind: str
    rows: list[TraceRow] = field(default_factory=list)
    gravity: Optional[np.ndarray] = None
    # audit side channel: masks[t-1] = I(|w^(t+1)| <= theta), final weights w^(T+1)
    masks: Optional[np.ndarray] = None
    final_weights: Optional[np.ndarray] = None
    weight_history: Optional[np.ndarray] = None
    ledger: Any = None
    rng_seed: Optional[int] = None

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def audited(self) -> bool:
        return self.masks is not None and all(r.y_hat is not None for r in self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def to_jsonl(self) -> str:
        lines = [json.dumps(asdict(r), sort_keys=True) for r in self.rows]
        return "\n".join(lines) + "\n"

    def write_jsonl(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())


def read_jsonl(path: str | Path) -> list[TraceRow]:
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            rows.append(TraceRow(**json.loads(line)))
    return rows
