"""CSV manifests describing identification datasets and verification
pair lists.

Dataset manifests have the header ``path,subject_id,group,role`` with
role gallery/probe; pair manifests have ``path_a,path_b,same,fold``
with same 0/1 and contiguous fold indices from 0. Relative paths
resolve against the manifest file's directory.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path


class ManifestError(ValueError):
    """Malformed manifest CSV; messages carry the offending line number."""


DATASET_HEADER = ["path", "subject_id", "group", "role"]
PAIR_HEADER = ["path_a", "path_b", "same", "fold"]


@dataclass(frozen=True)
class ManifestRow:
    path: str
    subject_id: str
    group: str
    role: str


@dataclass(frozen=True)
class DatasetManifest:
    rows: tuple[ManifestRow, ...]
    base_dir: Path

    def resolve(self, row: ManifestRow) -> Path:
        p = Path(row.path)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def gallery_rows(self) -> tuple[ManifestRow, ...]:
        return tuple(r for r in self.rows if r.role == "gallery")

    @property
    def probe_rows(self) -> tuple[ManifestRow, ...]:
        return tuple(r for r in self.rows if r.role == "probe")


@dataclass(frozen=True)
class PairRow:
    path_a: str
    path_b: str
    same: bool
    fold: int


@dataclass(frozen=True)
class PairManifest:
    rows: tuple[PairRow, ...]
    base_dir: Path

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def n_folds(self) -> int:
        return len({r.fold for r in self.rows})


def _read_rows(path: Path, expected_header: list[str]) -> list[tuple[int, list[str]]]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        rows = [(lineno, row) for lineno, row in enumerate(reader, start=1) if row]
    if not rows:
        raise ManifestError(f"{path}: empty manifest")
    first_line, header = rows[0]
    if [h.strip() for h in header] != expected_header:
        raise ManifestError(
            f"{path}: line {first_line}: expected header {','.join(expected_header)!r}"
        )
    if len(rows) == 1:
        raise ManifestError(f"{path}: manifest has a header but no rows")
    return rows[1:]


def load_dataset_manifest(path: str | Path) -> DatasetManifest:
    """Parse a dataset manifest CSV, validating roles and field counts."""
    path = Path(path)
    out = []
    for lineno, row in _read_rows(path, DATASET_HEADER):
        if len(row) != 4:
            raise ManifestError(f"{path}: line {lineno}: expected 4 fields, got {len(row)}")
        p, subject, group, role = (field.strip() for field in row)
        if not p or not subject:
            raise ManifestError(f"{path}: line {lineno}: empty path or subject_id")
        if role not in ("gallery", "probe"):
            raise ManifestError(f"{path}: line {lineno}: role must be gallery or probe, got {role!r}")
        out.append(ManifestRow(p, subject, group, role))
    return DatasetManifest(tuple(out), base_dir=path.resolve().parent)


def load_pair_manifest(path: str | Path) -> PairManifest:
    """Parse a verification pair CSV, validating flags and fold contiguity."""
    path = Path(path)
    out = []
    for lineno, row in _read_rows(path, PAIR_HEADER):
        if len(row) != 4:
            raise ManifestError(f"{path}: line {lineno}: expected 4 fields, got {len(row)}")
        a, b, same, fold = (field.strip() for field in row)
        if not a or not b:
            raise ManifestError(f"{path}: line {lineno}: empty path")
        if same not in ("0", "1"):
            raise ManifestError(f"{path}: line {lineno}: same must be 0 or 1, got {same!r}")
        try:
            fold_idx = int(fold)
        except ValueError:
            raise ManifestError(f"{path}: line {lineno}: fold must be an integer, got {fold!r}") from None
        if fold_idx < 0:
            raise ManifestError(f"{path}: line {lineno}: fold must be >= 0, got {fold_idx}")
        out.append(PairRow(a, b, same == "1", fold_idx))
    folds = sorted({r.fold for r in out})
    if folds != list(range(len(folds))):
        raise ManifestError(f"{path}: fold indices must be contiguous from 0, got {folds}")
    return PairManifest(tuple(out), base_dir=path.resolve().parent)


def write_dataset_manifest(path: str | Path, rows: list[ManifestRow]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(DATASET_HEADER)
        for r in rows:
            writer.writerow([r.path, r.subject_id, r.group, r.role])


def write_pair_manifest(path: str | Path, rows: list[PairRow]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(PAIR_HEADER)
        for r in rows:
            writer.writerow([r.path_a, r.path_b, int(r.same), r.fold])
