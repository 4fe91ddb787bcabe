"""Examples, dataset files (svmlight / csv), synthetic streams and norm clipping."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .losses import ProblemKind

log = logging.getLogger(__name__)


@dataclass
class Example:
    x: np.ndarray
    y: float


@dataclass
class Dataset:
    """A finite stream of examples kept as a dense ``(T, d)`` matrix."""

    X: np.ndarray
    y: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2 or self.y.shape != (self.X.shape[0],):
            raise ValueError(f"bad dataset shapes X{self.X.shape} y{self.y.shape}")

    def __len__(self) -> int:
        return self.X.shape[0]

    def __iter__(self) -> Iterator[Example]:
        for x, y in zip(self.X, self.y):
            yield Example(x, float(y))

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def head(self, n: int) -> "Dataset":
        return Dataset(self.X[:n], self.y[:n], dict(self.meta))


def as_arrays(stream: "Dataset | Iterable[Example]") -> tuple[np.ndarray, np.ndarray]:
    if isinstance(stream, Dataset):
        return stream.X, stream.y
    xs, ys = [], []
    d = None
    for t, ex in enumerate(stream, start=1):
        x = np.asarray(ex.x, dtype=float).ravel()
        if d is None:
            d = x.size
        elif x.size != d:
            raise ValueError(f"example {t} has dimension {x.size}, expected {d}")
        xs.append(x)
        ys.append(float(ex.y))
    if not xs:
        raise ValueError("empty stream")
    return np.vstack(xs), np.asarray(ys)


# --- files -----------------------------------------------------------------

def load_dataset(path: str | Path, fmt: str = "svmlight", dim: Optional[int] = None) -> Dataset:
    """Read an svmlight (``label idx:val ...``, 1-based) or csv (label first) file."""
    path = Path(path)
    if fmt == "svmlight":
        return _load_svmlight(path, dim)
    if fmt == "csv":
        return _load_csv(path, dim)
    raise ValueError(f"unknown dataset format {fmt!r}")


def _load_svmlight(path: Path, dim: Optional[int]) -> Dataset:
    labels: list[float] = []
    rows: list[dict[int, float]] = []
    max_idx = 0
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                labels.append(float(parts[0]))
                feats: dict[int, float] = {}
                for tok in parts[1:]:
                    idx_s, val_s = tok.split(":", 1)
                    idx = int(idx_s)
                    if idx < 1:
                        raise ValueError(f"index {idx} is not 1-based")
                    feats[idx] = float(val_s)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: parse error: {exc}") from None
            if feats:
                hi = max(feats)
                if dim is not None and hi > dim:
                    raise ValueError(f"{path}:{lineno}: index {hi} exceeds dimension {dim}")
                max_idx = max(max_idx, hi)
            rows.append(feats)
    if not rows:
        raise ValueError(f"{path}: no examples")
    d = dim if dim is not None else max_idx
    X = np.zeros((len(rows), d))
    for i, feats in enumerate(rows):
        for idx, val in feats.items():
            X[i, idx - 1] = val
    return Dataset(X, np.asarray(labels), {"source": str(path)})


def _load_csv(path: Path, dim: Optional[int]) -> Dataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: no examples")
        labels, rows = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                vals = [float(v) for v in rec]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: parse error: {exc}") from None
            if dim is not None and len(vals) - 1 != dim:
                raise ValueError(f"{path}:{lineno}: expected {dim} features, got {len(vals) - 1}")
            labels.append(vals[0])
            rows.append(vals[1:])
    if not rows:
        raise ValueError(f"{path}: no examples")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: ragged rows")
    return Dataset(np.asarray(rows), np.asarray(labels), {"source": str(path)})


def write_svmlight(path: str | Path, data: Dataset) -> None:
    with open(path, "w") as fh:
        for x, y in zip(data.X, data.y):
            feats = " ".join(f"{j + 1}:{v!r}" for j, v in enumerate(x.tolist()) if v != 0.0)
            fh.write(f"{float(y)!r} {feats}".rstrip() + "\n")


def write_csv(path: str | Path, data: Dataset) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label"] + [f"x{j + 1}" for j in range(data.dim)])
        for x, y in zip(data.X, data.y):
            w.writerow([repr(float(y))] + [repr(v) for v in x.tolist()])


# --- synthetic data ----------------------------------------------------------

@dataclass
class DatasetSpec:
    source: str = "synthetic"            # "synthetic" or a file path
    dimension: int = 50
    rounds: int = 256
    informative_fraction: float = 0.1
    noise: float = 0.1
    weight_scale: float = 3.0
    c_bound: float = 1.0
    file_format: str = "svmlight"

    def __post_init__(self):
        if not 0 < self.informative_fraction <= 1:
            raise ValueError("informative_fraction must lie in (0, 1]")
        if self.dimension < 1 or self.rounds < 1:
            raise ValueError("dimension and rounds must be positive")
        if not self.c_bound > 0:
            raise ValueError("c_bound must be positive")


def normalize_to_ball(data: Dataset, c_bound: float) -> Dataset:
    """Scale every example with ``||x||_2 > c_bound`` onto the sphere of radius ``c_bound``."""
    if not c_bound > 0:
        raise ValueError("c_bound must be positive")
    norms = np.linalg.norm(data.X, axis=1)
    over = norms > c_bound
    scale = np.ones_like(norms)
    scale[over] = c_bound / norms[over]
    if over.any():
        log.debug("rescaled %d of %d examples to norm %g", int(over.sum()), len(norms), c_bound)
    X = data.X * scale[:, None]
    # rounding can leave a scaled row a hair above the bound
    renorm = np.linalg.norm(X, axis=1)
    bad = renorm > c_bound
    if bad.any():
        X[bad] = np.nextafter(X[bad] * (c_bound / renorm[bad])[:, None], 0.0)
    meta = dict(data.meta)
    meta["scale_factors"] = scale
    return Dataset(X, data.y.copy(), meta)


def synth_dataset(spec: DatasetSpec, kind: ProblemKind | str,
                  rng: np.random.Generator) -> Dataset:
    """Gaussian features with a sparse ground-truth weight vector.

    ``meta["u_true"]`` holds the generating weights. Labels are
    ``sign(u_true.x + noise)`` for classification kinds and
    ``u_true.x + noise`` for squared loss.
    """
    kind = ProblemKind.parse(kind)
    d, T = spec.dimension, spec.rounds
    k = math.ceil(spec.informative_fraction * d)
    u_true = np.zeros(d)
    support = rng.choice(d, size=k, replace=False)
    u_true[support] = rng.normal(0.0, spec.weight_scale, size=k)
    X = rng.normal(size=(T, d))
    data = normalize_to_ball(Dataset(X, np.zeros(T)), spec.c_bound)
    signal = data.X @ u_true
    noise = spec.noise * rng.normal(size=T) if spec.noise > 0 else np.zeros(T)
    if kind is ProblemKind.SQUARED:
        y = signal + noise
    else:
        y = np.where(signal + noise >= 0, 1.0, -1.0)
    return Dataset(data.X, y, {"u_true": u_true, "support": np.sort(support)})


def max_norm(data: Dataset | Sequence[Example]) -> float:
    X, _ = as_arrays(data)
    return float(np.linalg.norm(X, axis=1).max())
