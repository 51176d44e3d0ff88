"""Read, validate, and write ECG records in the header+binary layout.

On-disk layout, fixed by this toolkit:

* ``<name>.hea`` -- ASCII text, LF line endings.
    - line 1: ``name num_signals fs num_samples``
    - one descriptor line per signal:
      ``file format gain(baseline)/units adc_res adc_zero init_value checksum block_size lead_name``
    - comment lines: ``# Key: value``. Recognized keys are ``Age``, ``Sex``,
      ``Chagas label`` (``true``/``false``, case-insensitive on read,
      lowercase on write) and ``Source``; anything else is preserved
      verbatim.
* ``<name>.dat`` -- samples as two's-complement little-endian 16-bit
  integers, interleaved one frame at a time (sample 0 of every signal,
  then sample 1, ...). File size is exactly
  ``2 * num_signals * num_samples`` bytes.

Only storage format 16 is supported; other codes fail loudly. The
checksum field is the signed 16-bit wrapping sum of each lead's samples,
verified on read and recomputed on write.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import HeaderFormatError, RecordValidationError, SignalFormatError

LEAD_NAMES_12 = ("I", "II", "III", "aVR", "aVL", "aVF",
                 "V1", "V2", "V3", "V4", "V5", "V6")
SUPPORTED_FORMAT = 16
SEX_VALUES = ("Male", "Female", "Unknown")

_NAME_RE = re.compile(r"^[A-Za-z0-9._-]+$")
_GAIN_RE = re.compile(r"^(?P<gain>[-+0-9.eE]+)\((?P<baseline>[-+]?\d+)\)/(?P<units>\S+)$")

# Comment keys lifted into EcgRecord fields on read.
KEY_AGE = "Age"
KEY_SEX = "Sex"
KEY_CHAGAS = "Chagas label"
KEY_SOURCE = "Source"
RECOGNIZED_KEYS = (KEY_AGE, KEY_SEX, KEY_CHAGAS, KEY_SOURCE)


@dataclass
class SignalSpec:
    """One per-signal descriptor line of the header."""

    file_name: str
    fmt: int
    gain: float          # ADC units per physical unit (mV)
    baseline: int        # ADC value that reads as 0 physical units
    units: str
    adc_res: int
    adc_zero: int
    init_value: int      # first sample, 0 for empty records
    checksum: int        # signed 16-bit wrapping sum of the samples
    block_size: int
    lead_name: str


@dataclass
class RecordHeader:
    record_name: str
    num_signals: int
    fs: float
    num_samples: int
    signals: list[SignalSpec] = field(default_factory=list)
    comments: dict[str, str] = field(default_factory=dict)

    @property
    def lead_names(self) -> tuple[str, ...]:
        return tuple(s.lead_name for s in self.signals)


@dataclass(eq=False)
class EcgRecord:
    """A single multi-lead recording plus its demographic metadata.

    ``samples`` has shape ``(num_signals, num_samples)`` and dtype int16.
    Physical value of sample ``s`` of lead ``i`` is
    ``(s - baseline_i) / gain_i`` in the lead's units (mV).
    """

    header: RecordHeader
    samples: np.ndarray
    age: Optional[int] = None
    sex: Optional[str] = None
    chagas_label: Optional[bool] = None
    source: Optional[str] = None

    def __eq__(self, other) -> bool:
        if not isinstance(other, EcgRecord):
            return NotImplemented
        return (self.header == other.header
                and self.samples.shape == other.samples.shape
                and self.samples.dtype == other.samples.dtype
                and bool(np.array_equal(self.samples, other.samples))
                and self.age == other.age
                and self.sex == other.sex
                and self.chagas_label == other.chagas_label
                and self.source == other.source)

    @property
    def num_leads(self) -> int:
        return self.header.num_signals

    @property
    def fs(self) -> float:
        return self.header.fs


def signed16_sum(samples: np.ndarray) -> int:
    """Signed 16-bit wrapping sum used as the per-lead checksum."""
    total = int(np.sum(samples, dtype=np.int64)) & 0xFFFF
    return total - 0x10000 if total >= 0x8000 else total


def physical_signal(record: EcgRecord) -> np.ndarray:
    """Samples converted to physical units (mV), shape (leads, samples)."""
    gains = np.array([s.gain for s in record.header.signals], dtype=np.float64)
    baselines = np.array([s.baseline for s in record.header.signals], dtype=np.float64)
    return (record.samples.astype(np.float64) - baselines[:, None]) / gains[:, None]


def _format_number(x: float) -> str:
    """Shortest decimal text that parses back to the same float."""
    f = float(x)
    if f.is_integer() and abs(f) < 1e15:
        return str(int(f))
    return repr(f)


def _parse_float(token: str, what: str, line_no: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise HeaderFormatError(
            f"line {line_no}: {what} {token!r} is not numeric") from None
    if not np.isfinite(value):
        raise HeaderFormatError(f"line {line_no}: {what} {token!r} is not finite")
    return value


def _parse_int(token: str, what: str, line_no: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise HeaderFormatError(
            f"line {line_no}: {what} {token!r} is not an integer") from None


def parse_header(text: str) -> RecordHeader:
    """Parse header file contents into a :class:`RecordHeader`.

    All comment keys, recognized or not, are kept in ``comments``;
    :func:`read_record` lifts the recognized ones into record fields.
    """
    if not text or not text.strip():
        raise HeaderFormatError("header text is empty")
    lines = text.splitlines()

    first = lines[0].strip()
    tokens = first.split()
    if len(tokens) != 4:
        raise HeaderFormatError(
            f"line 1: expected 'name num_signals fs num_samples', got {first!r}")
    name = tokens[0]
    if not _NAME_RE.match(name):
        raise HeaderFormatError(f"line 1: record name {name!r} is not a valid identifier")
    num_signals = _parse_int(tokens[1], "signal count", 1)
    fs = _parse_float(tokens[2], "sampling frequency", 1)
    num_samples = _parse_int(tokens[3], "sample count", 1)
    if num_signals < 0:
        raise HeaderFormatError("line 1: signal count must be non-negative")
    if fs <= 0:
        raise HeaderFormatError(f"line 1: sampling frequency must be positive, got {fs}")
    if num_samples < 0:
        raise HeaderFormatError("line 1: sample count must be non-negative")

    signals: list[SignalSpec] = []
    comments: dict[str, str] = {}
    for idx, raw in enumerate(lines[1:], start=2):
        line = raw.rstrip("\r").strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                key, value = body.split(":", 1)
                key, value = key.strip(), value.strip()
            else:
                key, value = body, ""
            if key in comments:
                raise HeaderFormatError(f"line {idx}: duplicate comment key {key!r}")
            comments[key] = value
            continue
        if len(signals) >= num_signals:
            raise HeaderFormatError(
                f"line {idx}: {num_signals} signals declared but extra "
                f"descriptor line found: {line!r}")
        signals.append(_parse_descriptor(line, idx))

    if len(signals) != num_signals:
        raise HeaderFormatError(
            f"{num_signals} signals declared but {len(signals)} descriptor lines found")

    return RecordHeader(record_name=name, num_signals=num_signals, fs=fs,
                        num_samples=num_samples, signals=signals, comments=comments)


def _parse_descriptor(line: str, line_no: int) -> SignalSpec:
    tokens = line.split()
    if len(tokens) != 9:
        raise HeaderFormatError(
            f"line {line_no}: expected 9 descriptor fields, got {len(tokens)}: {line!r}")
    m = _GAIN_RE.match(tokens[2])
    if not m:
        raise HeaderFormatError(
            f"line {line_no}: gain field {tokens[2]!r} does not match 'gain(baseline)/units'")
    gain = _parse_float(m.group("gain"), "gain", line_no)
    return SignalSpec(
        file_name=tokens[0],
        fmt=_parse_int(tokens[1], "storage format", line_no),
        gain=gain,
        baseline=int(m.group("baseline")),
        units=m.group("units"),
        adc_res=_parse_int(tokens[3], "ADC resolution", line_no),
        adc_zero=_parse_int(tokens[4], "ADC zero", line_no),
        init_value=_parse_int(tokens[5], "initial value", line_no),
        checksum=_parse_int(tokens[6], "checksum", line_no),
        block_size=_parse_int(tokens[7], "block size", line_no),
        lead_name=tokens[8],
    )


def format_header(header: RecordHeader) -> str:
    """Render a header back to its text form (LF line endings)."""
    lines = [f"{header.record_name} {header.num_signals} "
             f"{_format_number(header.fs)} {header.num_samples}"]
    for s in header.signals:
        lines.append(
            f"{s.file_name} {s.fmt} {_format_number(s.gain)}({s.baseline})/{s.units} "
            f"{s.adc_res} {s.adc_zero} {s.init_value} {s.checksum} {s.block_size} "
            f"{s.lead_name}")
    for key, value in header.comments.items():
        lines.append(f"# {key}: {value}" if value else f"# {key}")
    return "\n".join(lines) + "\n"


def read_record(header_path) -> EcgRecord:
    """Read a record from ``<name>.hea`` + ``<name>.dat``.

    Verifies the byte count, each lead's checksum, and each lead's
    initial value before returning.
    """
    path = Path(header_path)
    if path.suffix != ".hea" and not path.exists():
        path = path.with_suffix(".hea")
    if not path.exists():
        raise SignalFormatError(f"header file not found: {path}")
    header = parse_header(path.read_text(encoding="ascii"))

    file_names = {s.file_name for s in header.signals}
    if header.num_signals and len(file_names) != 1:
        raise SignalFormatError(
            f"{path}: all signals must share one signal file, found {sorted(file_names)}")
    for s in header.signals:
        if s.fmt != SUPPORTED_FORMAT:
            raise SignalFormatError(
                f"{path}: unsupported storage format code {s.fmt} "
                f"(only {SUPPORTED_FORMAT} is supported)")

    if header.num_signals == 0:
        samples = np.zeros((0, header.num_samples), dtype=np.int16)
    else:
        dat_path = path.parent / header.signals[0].file_name
        if not dat_path.exists():
            raise SignalFormatError(f"signal file not found: {dat_path}")
        expected = 2 * header.num_signals * header.num_samples
        actual = dat_path.stat().st_size
        if actual != expected:
            kind = "short" if actual < expected else "has trailing bytes"
            raise SignalFormatError(
                f"{dat_path}: expected {expected} bytes "
                f"(2 x {header.num_signals} signals x {header.num_samples} samples), "
                f"got {actual} ({kind})")
        flat = np.fromfile(dat_path, dtype="<i2")
        samples = np.ascontiguousarray(
            flat.reshape(header.num_samples, header.num_signals).T)

        for i, s in enumerate(header.signals):
            actual_sum = signed16_sum(samples[i])
            if actual_sum != s.checksum:
                raise SignalFormatError(
                    f"{dat_path}: checksum mismatch on lead {s.lead_name!r} "
                    f"(header {s.checksum}, data {actual_sum})")
            first = int(samples[i, 0]) if header.num_samples > 0 else 0
            if first != s.init_value:
                raise SignalFormatError(
                    f"{dat_path}: initial value mismatch on lead {s.lead_name!r} "
                    f"(header {s.init_value}, data {first})")

    age, sex, chagas, source = None, None, None, None
    comments = dict(header.comments)
    if KEY_AGE in comments:
        raw = comments.pop(KEY_AGE)
        try:
            age = int(raw)
        except ValueError:
            raise HeaderFormatError(f"age comment {raw!r} is not an integer") from None
    if KEY_SEX in comments:
        raw = comments.pop(KEY_SEX)
        matched = [v for v in SEX_VALUES if v.lower() == raw.lower()]
        if not matched:
            raise HeaderFormatError(
                f"sex comment {raw!r} is not one of {SEX_VALUES}")
        sex = matched[0]
    if KEY_CHAGAS in comments:
        raw = comments.pop(KEY_CHAGAS).lower()
        if raw not in ("true", "false"):
            raise HeaderFormatError(f"Chagas label {raw!r} is not true/false")
        chagas = raw == "true"
    if KEY_SOURCE in comments:
        source = comments.pop(KEY_SOURCE)

    header = replace(header, comments=comments)
    return EcgRecord(header=header, samples=samples, age=age, sex=sex,
                     chagas_label=chagas, source=source)


def write_record(record: EcgRecord, directory) -> tuple[Path, Path]:
    """Write ``<name>.hea`` and ``<name>.dat`` into ``directory``.

    Refuses to write a record that fails :func:`validate_record`.
    Checksums and initial values are recomputed from the samples, and the
    recognized metadata comments are emitted in canonical order ahead of
    any preserved unknown comments.
    """
    violations = validate_record(record)
    if violations:
        raise RecordValidationError(violations)

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    name = record.header.record_name
    dat_name = f"{name}.dat"

    signals = []
    for i, s in enumerate(record.header.signals):
        lead = record.samples[i]
        signals.append(replace(
            s, file_name=dat_name,
            init_value=int(lead[0]) if lead.size else 0,
            checksum=signed16_sum(lead)))

    comments: dict[str, str] = {}
    if record.age is not None:
        comments[KEY_AGE] = str(record.age)
    if record.sex is not None:
        comments[KEY_SEX] = record.sex
    if record.chagas_label is not None:
        comments[KEY_CHAGAS] = "true" if record.chagas_label else "false"
    if record.source is not None:
        comments[KEY_SOURCE] = record.source
    comments.update(record.header.comments)

    header = replace(record.header, signals=signals, comments=comments)

    hea_path = directory / f"{name}.hea"
    dat_path = directory / dat_name
    try:
        hea_path.write_text(format_header(header), encoding="ascii", newline="\n")
        # Interleave frames: sample 0 of every lead, then sample 1, ...
        record.samples.T.astype("<i2").tofile(dat_path)
    except OSError as exc:
        raise SignalFormatError(f"failed to write {directory / name}: {exc}") from exc
    return hea_path, dat_path


def validate_record(record: EcgRecord) -> list[str]:
    """Check every record invariant; returns one message per violation.

    Total: never raises, an empty list means the record is valid.
    """
    violations = []
    header = record.header

    if not _NAME_RE.match(header.record_name or ""):
        violations.append(f"record name {header.record_name!r} is not a valid identifier")
    if not (np.isfinite(header.fs) and header.fs > 0):
        violations.append(f"fs must be positive, got {header.fs}")
    if header.num_samples < 0:
        violations.append(f"num_samples must be non-negative, got {header.num_samples}")
    if header.num_signals != len(header.signals):
        violations.append(
            f"num_signals is {header.num_signals} but there are "
            f"{len(header.signals)} signal descriptors")

    if record.samples.ndim != 2:
        violations.append(f"samples must be 2-D (leads x samples), got {record.samples.ndim}-D")
    else:
        if record.samples.dtype != np.int16:
            violations.append(f"samples must be int16, got {record.samples.dtype}")
        if record.samples.shape[0] != header.num_signals:
            violations.append(
                f"samples have {record.samples.shape[0]} leads but header "
                f"declares {header.num_signals}")
        if record.samples.shape[1] != header.num_samples:
            violations.append(
                f"lead arrays have length {record.samples.shape[1]} but header "
                f"declares {header.num_samples}")

    for s in header.signals:
        if not (np.isfinite(s.gain) and s.gain != 0):
            violations.append(f"lead {s.lead_name!r}: gain must be finite and nonzero, got {s.gain}")
        if s.fmt != SUPPORTED_FORMAT:
            violations.append(f"lead {s.lead_name!r}: unsupported storage format {s.fmt}")

    if len(header.signals) == 12 and header.lead_names != LEAD_NAMES_12:
        violations.append(
            f"12-lead records must name leads {LEAD_NAMES_12} in order, "
            f"got {header.lead_names}")

    if record.age is not None:
        if record.age < 0:
            violations.append(f"age must be non-negative, got {record.age}")
        elif record.age > 90:
            violations.append(
                f"age {record.age} exceeds the deidentification cap of 90; "
                "apply cap_age before writing")
    if record.sex is not None and record.sex not in SEX_VALUES:
        violations.append(f"sex must be one of {SEX_VALUES}, got {record.sex!r}")

    return violations


def make_record(name: str, fs: float, samples, *,
                lead_names: Optional[Sequence[str]] = None,
                gain: float | Sequence[float] = 1000.0,
                baseline: int | Sequence[int] = 0,
                units: str = "mV",
                age: Optional[int] = None,
                sex: Optional[str] = None,
                chagas_label: Optional[bool] = None,
                source: Optional[str] = None,
                comments: Optional[dict[str, str]] = None) -> EcgRecord:
    """Assemble a record from raw int16 samples, filling in descriptors."""
    samples = np.asarray(samples, dtype=np.int16)
    if samples.ndim != 2:
        raise ValueError("samples must be 2-D (leads x samples)")
    num_signals, num_samples = samples.shape
    if lead_names is None:
        if num_signals == 12:
            lead_names = LEAD_NAMES_12
        else:
            lead_names = tuple(f"ch{i}" for i in range(num_signals))
    if len(lead_names) != num_signals:
        raise ValueError(f"{num_signals} leads but {len(lead_names)} lead names")
    gains = np.broadcast_to(np.asarray(gain, dtype=np.float64), (num_signals,))
    baselines = np.broadcast_to(np.asarray(baseline, dtype=np.int64), (num_signals,))

    specs = []
    for i, lead in enumerate(lead_names):
        row = samples[i]
        specs.append(SignalSpec(
            file_name=f"{name}.dat", fmt=SUPPORTED_FORMAT,
            gain=float(gains[i]), baseline=int(baselines[i]), units=units,
            adc_res=16, adc_zero=0,
            init_value=int(row[0]) if row.size else 0,
            checksum=signed16_sum(row), block_size=0, lead_name=lead))

    header = RecordHeader(record_name=name, num_signals=num_signals,
                          fs=float(fs), num_samples=num_samples,
                          signals=specs, comments=dict(comments or {}))
    return EcgRecord(header=header, samples=samples, age=age, sex=sex,
                     chagas_label=chagas_label, source=source)


def renamed(record: EcgRecord, name: str) -> EcgRecord:
    """New record under a different name; signal file references follow."""
    if not _NAME_RE.match(name):
        raise RecordValidationError([f"record name {name!r} is not a valid identifier"])
    specs = [replace(s, file_name=f"{name}.dat") for s in record.header.signals]
    header = replace(record.header, record_name=name, signals=specs)
    return replace(record, header=header)


def with_samples(record: EcgRecord, samples: np.ndarray,
                 fs: Optional[float] = None) -> EcgRecord:
    """New record with replaced samples; descriptors are kept consistent."""
    samples = np.asarray(samples, dtype=np.int16)
    if samples.ndim != 2 or samples.shape[0] != record.header.num_signals:
        raise ValueError("replacement samples must keep the lead count")
    specs = [replace(s,
                     init_value=int(samples[i, 0]) if samples.shape[1] else 0,
                     checksum=signed16_sum(samples[i]))
             for i, s in enumerate(record.header.signals)]
    header = replace(record.header,
                     num_samples=samples.shape[1],
                     fs=float(fs) if fs is not None else record.header.fs,
                     signals=specs)
    return replace(record, header=header, samples=samples)
