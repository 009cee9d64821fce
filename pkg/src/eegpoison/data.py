"""EEG band-power datasets: CSV schema, synthetic stand-in, splitting, scaling."""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BadLabel, BadNumber, DegenerateClass, EmptyFile, MissingColumn
from .rng import substream

ELECTRODES = ("AF3", "T7", "Pz", "T8", "AF4")
BANDS = ("THETA", "ALPHA", "LOW_BETA", "HIGH_BETA", "GAMMA")
FEATURE_NAMES = tuple(f"{e}_{b}" for e in ELECTRODES for b in BANDS)
N_FEATURES = len(FEATURE_NAMES)
LABEL_COLUMN = "RISK_LABEL"

# Some exports of this schema spell the AF3 alpha column without the electrode digit.
COLUMN_ALIASES = {"AF_ALPHA": "AF3_ALPHA"}


class RiskLabel(enum.IntEnum):
    LOW = 0
    NORMAL = 1
    MEDIUM = 2
    HIGH = 3

    @property
    def text(self) -> str:
        return _LABEL_TEXT[self]

    @classmethod
    def parse(cls, value: str) -> "RiskLabel":
        """Map a CSV label string to a label; case and outer whitespace are ignored."""
        try:
            return _TEXT_LABEL[value.strip().lower()]
        except (KeyError, AttributeError):
            raise ValueError(f"unknown risk label {value!r}") from None

    @classmethod
    def coerce(cls, value) -> "RiskLabel":
        if isinstance(value, RiskLabel):
            return value
        if isinstance(value, str):
            try:
                return cls[value.strip().upper()]
            except KeyError:
                return cls.parse(value)
        return cls(int(value))


_LABEL_TEXT = {
    RiskLabel.LOW: "Low-Risk",
    RiskLabel.NORMAL: "Normal",
    RiskLabel.MEDIUM: "Medium-Risk",
    RiskLabel.HIGH: "High-Risk",
}
_TEXT_LABEL = {text.lower(): label for label, text in _LABEL_TEXT.items()}
N_CLASSES = len(RiskLabel)


@dataclass(frozen=True)
class Sample:
    features: np.ndarray
    label: RiskLabel


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable feature matrix ``X`` (n, 25) plus integer labels ``y`` in 0..3."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple = field(default=FEATURE_NAMES)

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64, order="C")
        y = np.array(self.y, dtype=np.int64)
        if X.ndim != 2 or X.shape[1] != N_FEATURES:
            raise ValueError(f"expected an (n, {N_FEATURES}) feature matrix, got {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError("label vector length does not match feature rows")
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        if y.size and (y.min() < 0 or y.max() >= N_CLASSES):
            raise ValueError("labels must lie in 0..3")
        if len(self.feature_names) != N_FEATURES:
            raise ValueError("need exactly 25 feature names")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    def __len__(self):
        return self.X.shape[0]

    def __getitem__(self, i) -> Sample:
        return Sample(self.X[i], RiskLabel(int(self.y[i])))

    @property
    def samples(self) -> list[Sample]:
        return [self[i] for i in range(len(self))]

    @property
    def labels(self) -> list[RiskLabel]:
        return [RiskLabel(int(v)) for v in self.y]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=N_CLASSES)

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx], self.feature_names)

    def with_labels(self, y) -> "Dataset":
        return Dataset(self.X, y, self.feature_names)

    def equals(self, other: "Dataset", atol: float = 0.0) -> bool:
        if self.X.shape != other.X.shape or not np.array_equal(self.y, other.y):
            return False
        if atol == 0.0:
            return bool(np.array_equal(self.X, other.X))
        return bool(np.allclose(self.X, other.X, rtol=0.0, atol=atol))


def _resolve_header(header):
    columns = {}
    for pos, raw in enumerate(header):
        name = raw.strip()
        name = COLUMN_ALIASES.get(name, name) if name not in FEATURE_NAMES else name
        columns.setdefault(name, pos)
    missing = [c for c in FEATURE_NAMES + (LABEL_COLUMN,) if c not in columns]
    if missing:
        raise MissingColumn(missing[0])
    return [columns[c] for c in FEATURE_NAMES], columns[LABEL_COLUMN]


def load_csv(path) -> Dataset:
    """Read a band-power CSV.

    Columns are bound by header name, so file order does not matter; features
    end up in canonical electrode-major order. Row numbers in errors count data
    rows from 1 (the header is row 0).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or not any(h.strip() for h in header):
            raise EmptyFile(f"{path}: no header row")
        feat_pos, label_pos = _resolve_header(header)
        rows, labels = [], []
        row_no = 0
        for record in reader:
            if not record or all(not cell.strip() for cell in record):
                continue
            row_no += 1
            values = []
            for name, pos in zip(FEATURE_NAMES, feat_pos):
                cell = record[pos] if pos < len(record) else ""
                try:
                    v = float(cell)
                except ValueError:
                    raise BadNumber(row_no, name, cell) from None
                if not math.isfinite(v):
                    raise BadNumber(row_no, name, cell)
                values.append(v)
            cell = record[label_pos] if label_pos < len(record) else ""
            try:
                labels.append(RiskLabel.parse(cell))
            except ValueError:
                raise BadLabel(row_no, cell) from None
            rows.append(values)
    if not rows:
        raise EmptyFile(f"{path}: no data rows")
    return Dataset(np.array(rows, dtype=np.float64), np.array(labels, dtype=np.int64))


def write_csv(ds: Dataset, path) -> None:
    """Write the canonical serialization (canonical column order, round-trip floats)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FEATURE_NAMES + (LABEL_COLUMN,))
        for row, label in zip(ds.X.tolist(), ds.y.tolist()):
            writer.writerow([repr(v) for v in row] + [_LABEL_TEXT[RiskLabel(label)]])


@dataclass(frozen=True)
class SynthSpec:
    per_class_count: int
    separation: float
    seed: int = 0

    def __post_init__(self):
        if int(self.per_class_count) < 1:
            raise ValueError("per_class_count must be >= 1")
        if not (self.separation >= 0 and math.isfinite(self.separation)):
            raise ValueError("separation must be a finite nonnegative number")


# Feature scale of the synthetic stand-in; the class geometry is expressed in units of it.
SYNTH_NOISE_SD = 1.5


def synthesize(spec: SynthSpec) -> Dataset:
    """Draw spherical Gaussian classes whose means are at least ``separation`` apart.

    Each class mean is displaced by ``separation`` noise standard deviations
    along its own direction. The four directions are a random orthonormal set
    (so every feature mixes all classes) and any two class means end up
    ``separation * sqrt(2)`` apart. Samples are grouped by class in label order.
    """
    rng = substream(spec.seed, "synth")
    n = int(spec.per_class_count)
    baseline = rng.uniform(2.0, 20.0, size=N_FEATURES)
    directions, _ = np.linalg.qr(rng.standard_normal((N_FEATURES, N_CLASSES)))
    X = np.empty((N_CLASSES * n, N_FEATURES))
    for c in range(N_CLASSES):
        noise = rng.standard_normal((n, N_FEATURES))
        X[c * n:(c + 1) * n] = baseline + SYNTH_NOISE_SD * (noise + spec.separation * directions[:, c])
    y = np.repeat(np.arange(N_CLASSES), n)
    return Dataset(X, y)


def _train_quotas(counts, fraction):
    n = int(counts.sum())
    target = math.floor(fraction * n + 0.5)
    exact = fraction * counts
    quota = np.floor(exact).astype(np.int64)
    remainder = exact - quota
    # largest remainder first, label order breaks ties
    for c in sorted(np.flatnonzero(counts), key=lambda c: (-remainder[c], c)):
        if quota.sum() >= target:
            break
        quota[c] += 1
    present = counts > 0
    # keep every present class on both sides
    quota[present] = np.clip(quota[present], 1, counts[present] - 1)
    return quota


def stratified_split_indices(y, train_fraction: float, seed: int):
    """Return sorted ``(train_idx, test_idx)`` preserving class proportions."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    y = np.asarray(y, dtype=np.int64)
    counts = np.bincount(y, minlength=N_CLASSES)
    small = [RiskLabel(c).text for c in range(N_CLASSES) if 0 < counts[c] < 2]
    if small:
        raise DegenerateClass(f"classes with fewer than 2 samples: {', '.join(small)}")
    quota = _train_quotas(counts, train_fraction)
    rng = substream(seed, "split")
    train = []
    for c in range(N_CLASSES):
        members = np.flatnonzero(y == c)
        if members.size:
            train.append(rng.permutation(members)[: quota[c]])
    train_idx = np.sort(np.concatenate(train))
    mask = np.ones(y.size, dtype=bool)
    mask[train_idx] = False
    return train_idx, np.flatnonzero(mask)


def stratified_split(ds: Dataset, train_fraction: float = 0.8, seed: int = 0):
    train_idx, test_idx = stratified_split_indices(ds.y, train_fraction, seed)
    return ds.subset(train_idx), ds.subset(test_idx)


@dataclass(frozen=True, eq=False)
class Scaler:
    mean: np.ndarray
    std: np.ndarray

    @property
    def constant(self) -> np.ndarray:
        return self.std <= 1e-12 * np.maximum(1.0, np.abs(self.mean))

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        const = self.constant
        scale = np.where(const, 1.0, self.std)
        Z = (X - self.mean) / scale
        Z[..., const] = 0.0
        return Z

    def to_dict(self):
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["mean"], dtype=np.float64), np.array(d["std"], dtype=np.float64))


def fit_scaler_array(X) -> Scaler:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] == 0:
        raise ValueError("cannot fit a scaler on an empty matrix")
    return Scaler(X.mean(axis=0), X.std(axis=0))


def fit_scaler(train: Dataset) -> Scaler:
    return fit_scaler_array(train.X)


def apply_scaler(s: Scaler, ds: Dataset) -> Dataset:
    return Dataset(s.transform(ds.X), ds.y, ds.feature_names)
