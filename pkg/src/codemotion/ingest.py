"""Dataset ingestion: manifest-driven CSV loading, low-pass filtering, synthetic data.

A dataset is a JSON manifest next to one CSV file per action. Each CSV
holds T rows by J comma-separated joint angles; the manifest carries the
class, subject, frame rate and angle unit of every action.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal

from .descriptor import ActionMatrix

__all__ = [
    "DatasetError",
    "ManifestEntry",
    "DatasetManifest",
    "FilterSpec",
    "SyntheticConfig",
    "load_manifest",
    "load_dataset",
    "butterworth_filter",
    "generate_synthetic",
    "save_dataset",
]

ANGLE_UNITS = ("deg", "rad")


class DatasetError(ValueError):
    """Raised for malformed manifests or action files; messages name file and line."""


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    class_label: str
    subject_id: str
    action_id: str
    frame_rate: float
    angle_unit: str = "deg"


@dataclass(frozen=True, eq=False)
class DatasetManifest:
    """Declarative listing of the actions that make up one dataset."""

    dataset_name: str
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        seen = set()
        for n, entry in enumerate(self.entries):
            if entry.action_id in seen:
                raise DatasetError(f"manifest entry {n}: duplicate action_id {entry.action_id!r}")
            seen.add(entry.action_id)
            if not entry.frame_rate > 0:
                raise DatasetError(
                    f"manifest entry {n} ({entry.action_id!r}): frame_rate must be positive, "
                    f"got {entry.frame_rate!r}"
                )
            if entry.angle_unit not in ANGLE_UNITS:
                raise DatasetError(
                    f"manifest entry {n} ({entry.action_id!r}): angle_unit must be one of "
                    f"{ANGLE_UNITS}, got {entry.angle_unit!r}"
                )

    def to_json(self, path) -> None:
        payload = {
            "dataset_name": self.dataset_name,
            "entries": [
                {
                    "path": e.path,
                    "class_label": e.class_label,
                    "subject_id": e.subject_id,
                    "action_id": e.action_id,
                    "frame_rate": e.frame_rate,
                    "angle_unit": e.angle_unit,
                }
                for e in self.entries
            ],
        }
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_manifest(path) -> DatasetManifest:
    """Parse and validate a manifest JSON file."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"{path}: manifest file not found")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(payload, dict) or "entries" not in payload:
        raise DatasetError(f"{path}: manifest must be an object with an 'entries' list")
    entries = []
    for n, raw in enumerate(payload["entries"]):
        try:
            entries.append(
                ManifestEntry(
                    path=str(raw["path"]),
                    class_label=str(raw["class_label"]),
                    subject_id=str(raw["subject_id"]),
                    action_id=str(raw["action_id"]),
                    frame_rate=float(raw["frame_rate"]),
                    angle_unit=str(raw.get("angle_unit", "deg")),
                )
            )
        except KeyError as exc:
            raise DatasetError(f"{path}: entry {n} is missing required key {exc}") from None
        except (TypeError, ValueError) as exc:
            raise DatasetError(f"{path}: entry {n} is malformed ({exc})") from None
    return DatasetManifest(str(payload.get("dataset_name", path.stem)), tuple(entries))


def _read_csv_matrix(path: Path) -> np.ndarray:
    """Parse one action CSV: comma-separated decimals, optional auto-detected header."""
    lines = path.read_text(encoding="utf-8").splitlines()
    rows: list[list[float]] = []
    width = None
    header_allowed = True
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        cells = [c.strip() for c in line.split(",")]
        try:
            values = [float(c) for c in cells]
        except ValueError:
            if header_allowed:
                header_allowed = False  # first row may be a header; anything later is an error
                continue
            bad = next(c for c in cells if not _is_number(c))
            raise DatasetError(f"{path}, line {line_no}: non-numeric value {bad!r}") from None
        header_allowed = False
        if any(not math.isfinite(v) for v in values):
            raise DatasetError(f"{path}, line {line_no}: non-finite value")
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise DatasetError(
                f"{path}, line {line_no}: expected {width} columns, got {len(values)}"
            )
        rows.append(values)
    if not rows:
        raise DatasetError(f"{path}: no numeric rows")
    return np.array(rows, dtype=np.float64)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def load_dataset(manifest_path) -> list[ActionMatrix]:
    """Load every action listed in a manifest, in manifest order.

    Radian files are converted to degrees. All actions of one dataset must
    share the same joint count.
    """
    manifest_path = Path(manifest_path)
    manifest = load_manifest(manifest_path)
    base = manifest_path.parent
    actions: list[ActionMatrix] = []
    joints = None
    for entry in manifest.entries:
        file_path = base / entry.path
        if not file_path.exists():
            raise DatasetError(f"{file_path}: file not found (action {entry.action_id!r})")
        samples = _read_csv_matrix(file_path)
        if entry.angle_unit == "rad":
            samples = np.degrees(samples)
        if joints is None:
            joints = samples.shape[1]
        elif samples.shape[1] != joints:
            raise DatasetError(
                f"{file_path}: {samples.shape[1]} joint columns, but the rest of "
                f"{manifest.dataset_name!r} has {joints}"
            )
        try:
            actions.append(
                ActionMatrix(
                    samples,
                    frame_rate=entry.frame_rate,
                    class_label=entry.class_label,
                    subject_id=entry.subject_id,
                    action_id=entry.action_id,
                )
            )
        except ValueError as exc:
            raise DatasetError(f"{file_path}: {exc}") from None
    return actions


@dataclass(frozen=True)
class FilterSpec:
    """Low-pass Butterworth configuration; forward-backward by default for zero phase lag."""

    cutoff_hz: float = 10.0
    order: int = 2
    zero_phase: bool = True

    def __post_init__(self) -> None:
        if not self.cutoff_hz > 0:
            raise ValueError(f"cutoff_hz must be positive, got {self.cutoff_hz!r}")
        if int(self.order) < 1:
            raise ValueError(f"order must be at least 1, got {self.order!r}")
        object.__setattr__(self, "order", int(self.order))


def butterworth_filter(action: ActionMatrix, spec: FilterSpec = FilterSpec()) -> ActionMatrix:
    """Low-pass every joint column; zero-phase mode filters forward and backward.

    Forward-backward filtering doubles the effective order and removes
    phase lag, which keeps velocity extrema aligned in time. Edges are
    padded by reflection for one settling length and trimmed afterwards.
    """
    nyquist = action.frame_rate / 2.0
    if not spec.cutoff_hz < nyquist:
        raise ValueError(
            f"cutoff {spec.cutoff_hz} Hz must stay below the Nyquist frequency "
            f"{nyquist} Hz of a {action.frame_rate} Hz recording"
        )
    b, a = signal.butter(spec.order, spec.cutoff_hz, btype="low", fs=action.frame_rate)
    if spec.zero_phase:
        pad = min(3 * (spec.order + 1), action.num_frames - 1)
        filtered = signal.filtfilt(b, a, action.samples, axis=0, padlen=pad)
    else:
        filtered = signal.lfilter(b, a, action.samples, axis=0)
    return action.with_samples(filtered)


@dataclass(frozen=True)
class SyntheticConfig:
    """Shape of a generated coordinated-motion dataset.

    Every class activates a subset of joints with coordinated sinusoids:
    same-sign joints move in phase, opposite-sign joints in counter-phase.
    Inactive joints carry low-amplitude noise. Subjects perturb amplitude
    and phase smoothly; repetitions add small jitter plus sample noise.
    """

    classes: int
    per_class: int
    subjects: int
    joints: int = 20
    frames: int = 240
    frame_rate: float = 30.0
    seed: int = 0
    active_per_class: int | None = None
    amplitude_deg: float = 30.0
    noise_deg: float = 0.5
    disjoint_classes: bool = False

    def __post_init__(self) -> None:
        for name in ("classes", "per_class", "subjects", "frames"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.joints < 4:
            raise ValueError(f"need at least 4 joints, got {self.joints}")
        if self.frames < 2:
            raise ValueError("need at least 2 frames")
        if not self.frame_rate > 0:
            raise ValueError("frame_rate must be positive")
        if self.active_per_class is not None and self.active_per_class < 2:
            raise ValueError("active_per_class must be at least 2")
        n_active = self.num_active
        if n_active > self.joints:
            raise ValueError("active_per_class cannot exceed the joint count")
        if self.disjoint_classes and self.classes * n_active > self.joints:
            raise ValueError(
                f"disjoint classes need {self.classes * n_active} joints, "
                f"only {self.joints} available"
            )

    @property
    def num_active(self) -> int:
        return self.active_per_class if self.active_per_class is not None else max(2, self.joints // 5)


def generate_synthetic(config: SyntheticConfig) -> tuple[list[ActionMatrix], DatasetManifest]:
    """Deterministic coordinated-sinusoid dataset plus a manifest describing it.

    Pure function of the config: the same config always yields the same
    samples bit for bit.
    """
    rng = np.random.default_rng(config.seed)
    n_active = config.num_active
    t = np.arange(config.frames) / config.frame_rate

    class_templates = []
    for c in range(config.classes):
        if config.disjoint_classes:
            active = np.arange(c * n_active, (c + 1) * n_active)
        else:
            active = np.sort(rng.choice(config.joints, size=n_active, replace=False))
        signs = rng.choice(np.array([-1.0, 1.0]), size=n_active)
        signs[:2] = 1.0  # guarantee at least one in-phase active pair
        class_templates.append(
            {
                "active": active,
                "signs": signs,
                "freq": rng.uniform(0.4, 1.6),
                "amps": config.amplitude_deg * rng.uniform(0.7, 1.3, size=n_active),
                "offsets": rng.uniform(-45.0, 45.0, size=config.joints),
            }
        )

    subject_mods = {}
    for c in range(config.classes):
        for s in range(config.subjects):
            subject_mods[(c, s)] = {
                "amp": rng.uniform(0.85, 1.15, size=n_active),
                "phase": rng.normal(0.0, 0.3),
            }

    actions = []
    entries = []
    for c in range(config.classes):
        template = class_templates[c]
        for s in range(config.subjects):
            mod = subject_mods[(c, s)]
            for r in range(config.per_class):
                rep_phase = rng.uniform(0.0, 2.0 * np.pi)
                rep_amp = rng.normal(1.0, 0.03)
                samples = template["offsets"][None, :] + config.noise_deg * rng.standard_normal(
                    (config.frames, config.joints)
                )
                phase = rep_phase + mod["phase"]
                wave = np.sin(2.0 * np.pi * template["freq"] * t + phase)
                for k, joint in enumerate(template["active"]):
                    samples[:, joint] += (
                        template["signs"][k] * template["amps"][k] * mod["amp"][k] * rep_amp * wave
                    )
                action_id = f"c{c:02d}_s{s:02d}_r{r:02d}"
                actions.append(
                    ActionMatrix(
                        samples,
                        frame_rate=config.frame_rate,
                        class_label=f"class{c:02d}",
                        subject_id=f"subject{s:02d}",
                        action_id=action_id,
                    )
                )
                entries.append(
                    ManifestEntry(
                        path=f"{action_id}.csv",
                        class_label=f"class{c:02d}",
                        subject_id=f"subject{s:02d}",
                        action_id=action_id,
                        frame_rate=config.frame_rate,
                        angle_unit="deg",
                    )
                )
    name = (
        f"synthetic-{config.classes}x{config.per_class}x{config.subjects}-seed{config.seed}"
    )
    return actions, DatasetManifest(name, tuple(entries))


def save_dataset(actions, manifest: DatasetManifest, out_dir) -> Path:
    """Write one CSV per action plus the manifest; returns the manifest path.

    Values are written with full repr precision, so a reload yields
    value-identical matrices.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_id = {a.action_id: a for a in actions}
    for entry in manifest.entries:
        action = by_id.get(entry.action_id)
        if action is None:
            raise DatasetError(f"manifest entry {entry.action_id!r} has no matching action")
        lines = [",".join(repr(float(v)) for v in row) for row in action.samples]
        (out_dir / entry.path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    manifest_path = out_dir / "manifest.json"
    manifest.to_json(manifest_path)
    return manifest_path
