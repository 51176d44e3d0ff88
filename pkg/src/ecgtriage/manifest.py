"""Dataset manifests: the ordered record list with labels and plan slots.

File form is CSV with ``# key: value`` comment lines ahead of the header
row:

    # source: synthetic
    # prevalence: 39/200
    record_id,chagas_label,origin_id,augmentation_plan
    rec00000,true,,
    rec00003_aug1,false,rec00003,noise gaussian amplitude=0.02rms; seed 7

``origin_id`` is set on oversampling duplicates and names the source
record; ``augmentation_plan`` uses the one-line plan grammar. The
prevalence comment is redundant (it is recomputed from the rows) and a
mismatch is treated as corruption. Comment keys other than ``source``
and ``prevalence`` are free-form provenance metadata and round-trip
through ``DatasetManifest.metadata``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .errors import ManifestError
from .plans import AugmentationPlan, format_plan, parse_plan

_COLUMNS = ("record_id", "chagas_label", "origin_id", "augmentation_plan")


@dataclass
class ManifestEntry:
    record_id: str
    chagas_label: bool
    origin_id: Optional[str] = None
    plan: Optional[AugmentationPlan] = None


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry] = field(default_factory=list)
    source: str = "synthetic"
    # Free-form provenance (generation or preparation parameters),
    # round-tripped through extra comment keys.
    metadata: dict[str, str] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return len(self.entries)

    @property
    def positives(self) -> int:
        return sum(1 for e in self.entries if e.chagas_label)

    @property
    def prevalence(self) -> Fraction:
        """Exact positive fraction; 0 for an empty manifest."""
        if not self.entries:
            return Fraction(0)
        return Fraction(self.positives, self.total)


def validate_manifest(manifest: DatasetManifest) -> list[str]:
    """Check manifest invariants; returns one message per violation."""
    violations = []
    by_id: dict[str, ManifestEntry] = {}
    for e in manifest.entries:
        if not e.record_id:
            violations.append("entry with empty record_id")
        elif e.record_id in by_id:
            violations.append(f"duplicate record_id {e.record_id!r}")
        else:
            by_id[e.record_id] = e
    for e in manifest.entries:
        if e.origin_id is None:
            continue
        origin = by_id.get(e.origin_id)
        if origin is None:
            violations.append(
                f"{e.record_id}: origin_id {e.origin_id!r} not in manifest")
        elif origin.origin_id is not None:
            violations.append(
                f"{e.record_id}: origin_id {e.origin_id!r} is itself a duplicate")
    return violations


def write_manifest(manifest: DatasetManifest, path) -> Path:
    violations = validate_manifest(manifest)
    if violations:
        raise ManifestError("; ".join(violations))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="ascii", newline="") as fh:
        fh.write(f"# source: {manifest.source}\n")
        fh.write(f"# prevalence: {manifest.prevalence}\n")
        for key in sorted(manifest.metadata):
            if key in ("source", "prevalence"):
                raise ManifestError(f"metadata key {key!r} collides with a "
                                    "reserved comment key")
            fh.write(f"# {key}: {manifest.metadata[key]}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_COLUMNS)
        for e in manifest.entries:
            writer.writerow([
                e.record_id,
                "true" if e.chagas_label else "false",
                e.origin_id or "",
                format_plan(e.plan) if e.plan is not None else "",
            ])
    return path


def read_manifest(path) -> DatasetManifest:
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest file not found: {path}")
    source = "unknown"
    stated_prevalence: Optional[Fraction] = None
    metadata: dict[str, str] = {}
    data_lines = []
    for raw in path.read_text(encoding="ascii").splitlines():
        if raw.startswith("#"):
            body = raw[1:].strip()
            if ":" not in body:
                raise ManifestError(f"{path}: malformed comment line {raw!r}")
            key, value = (part.strip() for part in body.split(":", 1))
            if key == "source":
                source = value
            elif key == "prevalence":
                try:
                    stated_prevalence = Fraction(value)
                except (ValueError, ZeroDivisionError):
                    raise ManifestError(
                        f"{path}: prevalence {value!r} is not a fraction") from None
            else:
                metadata[key] = value
        else:
            data_lines.append(raw)

    rows = list(csv.reader(data_lines))
    if not rows or tuple(rows[0]) != _COLUMNS:
        raise ManifestError(
            f"{path}: first data row must be the header {','.join(_COLUMNS)}")

    entries = []
    for i, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(_COLUMNS):
            raise ManifestError(f"{path}: row {i} has {len(row)} fields, "
                                f"expected {len(_COLUMNS)}")
        record_id, label_text, origin, plan_text = row
        if label_text not in ("true", "false"):
            raise ManifestError(
                f"{path}: row {i}: chagas_label must be true/false, got {label_text!r}")
        try:
            plan = parse_plan(plan_text) if plan_text else None
        except Exception as exc:
            raise ManifestError(f"{path}: row {i}: bad plan: {exc}") from exc
        entries.append(ManifestEntry(record_id=record_id,
                                     chagas_label=label_text == "true",
                                     origin_id=origin or None,
                                     plan=plan))

    manifest = DatasetManifest(entries=entries, source=source, metadata=metadata)
    violations = validate_manifest(manifest)
    if violations:
        raise ManifestError(f"{path}: " + "; ".join(violations))
    if stated_prevalence is not None and stated_prevalence != manifest.prevalence:
        raise ManifestError(
            f"{path}: stated prevalence {stated_prevalence} does not match "
            f"the rows ({manifest.prevalence})")
    return manifest
