"""Reader and writer for the LabVIEW Measurement (.lvm) text format.

The format is line oriented: a magic line, a file header closed by an
``***End_of_Header***`` line, then one or more segments, each with its own
header, a column-name row and tab- or comma-separated data rows.  Numbers
use the decimal separator declared in the file header, so ``23,400000``
and ``23.400000`` denote the same value depending on the header.

Supported feature set: ``X_Columns=One``, ``Multi_Headings=No``; anything
else is rejected with :class:`~lvmforge.errors.UnsupportedFeature` rather
than silently misread.  Unrecognized header keys are preserved verbatim
(in order) so that parse -> serialize -> parse is the identity on the
document level.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from datetime import date as Date
from datetime import datetime
from enum import Enum
from typing import Optional

from .errors import (
    ChannelCountMismatch,
    IndexOutOfRange,
    InvariantViolation,
    MalformedNumber,
    MissingHeaderTerminator,
    MissingMagicLine,
    UnsupportedFeature,
)

MAGIC_LINE = "LabVIEW Measurement"
HEADER_TERMINATOR = "***End_of_Header***"
COMMENT_COLUMN = "Comment"

# file-header keys handled explicitly; everything else goes to extra_keys
_FILE_KEYS = (
    "Writer_Version", "Reader_Version", "Separator", "Decimal_Separator",
    "Multi_Headings", "X_Columns", "Time_Pref", "Operator", "Date", "Time",
)
# segment-header keys handled explicitly
_SEGMENT_KEYS = (
    "Notes", "Channels", "Samples", "Date", "Time",
    "X_Dimension", "X0", "Delta_X",
)


class Separator(Enum):
    TAB = "Tab"
    COMMA = "Comma"

    @property
    def char(self) -> str:
        return "\t" if self is Separator.TAB else ","


class XColumns(Enum):
    NO = "No"
    ONE = "One"
    MULTI = "Multi"


class TimePref(Enum):
    ABSOLUTE = "Absolute"
    RELATIVE = "Relative"


@dataclass(frozen=True)
class HighPrecisionTime:
    """Time of day with the fractional-second digits kept as text.

    The Annex-style files carry fractions like ``,8399038314819335937``
    (19 digits), beyond what a binary float can hold, so the digit string
    is the authoritative value and round-trips byte for byte.
    """

    hours: int
    minutes: int
    seconds: int
    fraction_digits: str = ""

    def __post_init__(self):
        if not (0 <= self.hours <= 23 and 0 <= self.minutes <= 59
                and 0 <= self.seconds <= 60):
            raise InvariantViolation(f"time out of range: {self}")
        if self.fraction_digits and not self.fraction_digits.isdigit():
            raise InvariantViolation("fraction_digits must be decimal digits")

    @property
    def approx_fraction(self) -> float:
        """Rounded real value of the fraction, for display and queries only."""
        return float("0." + self.fraction_digits) if self.fraction_digits else 0.0

    def render(self, decimal_separator: str = ".") -> str:
        base = f"{self.hours:02d}:{self.minutes:02d}:{self.seconds:02d}"
        if self.fraction_digits:
            return base + decimal_separator + self.fraction_digits
        return base


@dataclass(frozen=True)
class LvmFileHeader:
    writer_version: int = 2
    reader_version: int = 2
    separator: Separator = Separator.TAB
    decimal_separator: str = "."
    multi_headings: bool = False
    x_columns: XColumns = XColumns.ONE
    time_pref: TimePref = TimePref.ABSOLUTE
    operator: str = ""
    date: Optional[Date] = None
    time: Optional[HighPrecisionTime] = None
    extra_keys: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class DataRow:
    x: float
    values: tuple[Optional[float], ...]
    comment: Optional[str] = None


@dataclass
class LvmSegment:
    channels: int
    notes: Optional[str] = None
    samples_per_channel: list[int] = field(default_factory=list)
    channel_dates: list[Date] = field(default_factory=list)
    channel_times: list[HighPrecisionTime] = field(default_factory=list)
    x_dimension: list[str] = field(default_factory=list)
    x0: list[float] = field(default_factory=list)
    delta_x: list[float] = field(default_factory=list)
    column_names: list[str] = field(default_factory=list)
    rows: list[DataRow] = field(default_factory=list)
    extra_keys: dict[str, str] = field(default_factory=dict)

    @property
    def has_comment_column(self) -> bool:
        return bool(self.column_names) and self.column_names[-1] == COMMENT_COLUMN


@dataclass
class LvmDocument:
    header: LvmFileHeader
    segments: list[LvmSegment]


# --- numeric / scalar grammars --------------------------------------------

def _real_pattern(ds: str) -> re.Pattern:
    d = re.escape(ds)
    return re.compile(rf"^[+-]?(?:\d+(?:{d}\d*)?|{d}\d+)(?:[eE][+-]?\d+)?$")


_REAL_PATTERNS = {".": _real_pattern("."), ",": _real_pattern(",")}
_INT_PATTERN = re.compile(r"^[+-]?\d+$")
_TIME_PATTERNS = {
    ds: re.compile(rf"^(\d{{1,2}}):(\d{{1,2}}):(\d{{1,2}})(?:{re.escape(ds)}(\d+))?$")
    for ds in (".", ",")
}


def _is_real(text: str, ds: str) -> bool:
    return bool(_REAL_PATTERNS[ds].match(text))


def _parse_real(text: str, ds: str, line_no: int, col: int) -> float:
    if not _is_real(text, ds):
        raise MalformedNumber(line_no, col, f"not a number under {ds!r}: {text!r}")
    return float(text.replace(ds, "."))


def _parse_int(text: str, line_no: int, col: int) -> int:
    if not _INT_PATTERN.match(text):
        raise MalformedNumber(line_no, col, f"not an integer: {text!r}")
    return int(text)


def _parse_date(text: str, line_no: int, col: int) -> Date:
    try:
        return datetime.strptime(text, "%Y/%m/%d").date()
    except ValueError:
        raise MalformedNumber(line_no, col, f"not a YYYY/MM/DD date: {text!r}") from None


def _parse_time(text: str, ds: str, line_no: int, col: int) -> HighPrecisionTime:
    m = _TIME_PATTERNS[ds].match(text)
    if not m:
        raise MalformedNumber(line_no, col, f"not a HH:MM:SS time: {text!r}")
    h, mi, s = int(m.group(1)), int(m.group(2)), int(m.group(3))
    frac = m.group(4) or ""
    if not (h <= 23 and mi <= 59 and s <= 60):
        raise MalformedNumber(line_no, col, f"time out of range: {text!r}")
    return HighPrecisionTime(h, mi, s, frac)


def format_fixed6(value: float, ds: str = ".") -> str:
    """Render a real with 6 fixed decimals, matching the data-block style."""
    text = f"{value:.6f}"
    return text if ds == "." else text.replace(".", ds)


def format_sci16(value: float, ds: str = ".") -> str:
    """Render a real in the X0 style: 16 fractional digits, bare exponent."""
    mantissa, exponent = f"{value:.16E}".split("E")
    exp = int(exponent)
    sign = "+" if exp >= 0 else "-"
    text = f"{mantissa}E{sign}{abs(exp)}"
    return text if ds == "." else text.replace(".", ds)


# --- parsing ---------------------------------------------------------------

def _decode(data) -> str:
    if isinstance(data, str):
        return data
    try:
        return bytes(data).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise UnsupportedFeature(f"input is not UTF-8 text: {exc}") from None


def _is_terminator(line: str) -> bool:
    return line.rstrip("\t, ") == HEADER_TERMINATOR


def _split_known(line: str, sep: str) -> list[str]:
    return line.split(sep)


def _split_once(line: str, sep: str) -> tuple[str, str]:
    head, _, rest = line.partition(sep)
    return head, rest


class _Lines:
    """Cursor over the input lines with 1-based line numbers."""

    def __init__(self, text: str):
        self.lines = text.replace("\r\n", "\n").split("\n")
        self.pos = 0

    def next_nonblank(self) -> Optional[tuple[str, int]]:
        while self.pos < len(self.lines):
            line = self.lines[self.pos]
            self.pos += 1
            if line.strip():
                return line, self.pos
        return None

    def push_back(self):
        self.pos -= 1


def parse_lvm(data) -> LvmDocument:
    """Parse .lvm text (bytes or str) into an :class:`LvmDocument`.

    Raises MissingMagicLine, MissingHeaderTerminator, MalformedNumber,
    ChannelCountMismatch or UnsupportedFeature on malformed or
    out-of-feature-set input.
    """
    cursor = _Lines(_decode(data))
    first = cursor.next_nonblank()
    if first is None or first[0].rstrip("\t, ") != MAGIC_LINE:
        raise MissingMagicLine(f"first line is not {MAGIC_LINE!r}")

    header = _parse_file_header(cursor)
    sep = header.separator.char
    ds = header.decimal_separator

    segments = []
    while True:
        segment = _parse_segment(cursor, sep, ds)
        if segment is None:
            break
        segments.append(segment)
    if not segments:
        raise MissingHeaderTerminator("no segment found after file header")
    return LvmDocument(header=header, segments=segments)


def _parse_file_header(cursor: _Lines) -> LvmFileHeader:
    raw: list[tuple[str, int]] = []
    while True:
        item = cursor.next_nonblank()
        if item is None:
            raise MissingHeaderTerminator("file header never terminated")
        line, line_no = item
        if _is_terminator(line):
            break
        raw.append((line, line_no))

    # The separator declaration is needed before the other lines can be
    # split, so locate it first (guessing tab-then-comma for that one line).
    sep = "\t"
    for line, _ in raw:
        key = re.split(r"[\t,]", line, maxsplit=1)[0]
        if key == "Separator":
            value = line[len(key) + 1:]
            sep = {"Tab": "\t", "Comma": ","}.get(value)
            if sep is None:
                raise UnsupportedFeature(f"Separator={value!r}")
            break

    fields: dict[str, object] = {}
    extra: dict[str, str] = {}
    pending_time: Optional[tuple[str, int]] = None
    ds = "."
    for line, line_no in raw:
        key, value = _split_once(line, sep)
        if key == "Writer_Version":
            fields["writer_version"] = _parse_int(value, line_no, 2)
        elif key == "Reader_Version":
            fields["reader_version"] = _parse_int(value, line_no, 2)
        elif key == "Separator":
            fields["separator"] = Separator.TAB if sep == "\t" else Separator.COMMA
        elif key == "Decimal_Separator":
            if value not in (".", ","):
                raise UnsupportedFeature(f"Decimal_Separator={value!r}")
            ds = value
            fields["decimal_separator"] = value
        elif key == "Multi_Headings":
            if value != "No":
                raise UnsupportedFeature(f"Multi_Headings={value!r}")
            fields["multi_headings"] = False
        elif key == "X_Columns":
            if value != "One":
                raise UnsupportedFeature(f"X_Columns={value!r}")
            fields["x_columns"] = XColumns.ONE
        elif key == "Time_Pref":
            try:
                fields["time_pref"] = TimePref(value)
            except ValueError:
                raise UnsupportedFeature(f"Time_Pref={value!r}") from None
        elif key == "Operator":
            fields["operator"] = value
        elif key == "Date":
            fields["date"] = _parse_date(value, line_no, 2)
        elif key == "Time":
            # decimal separator may be declared after Time; defer
            pending_time = (value, line_no)
        else:
            extra[key] = value
    if pending_time is not None:
        fields["time"] = _parse_time(pending_time[0], ds, pending_time[1], 2)
    return LvmFileHeader(extra_keys=extra, **fields)


def _parse_segment(cursor: _Lines, sep: str, ds: str) -> Optional[LvmSegment]:
    item = cursor.next_nonblank()
    if item is None:
        return None
    cursor.push_back()

    notes: Optional[str] = None
    channels: Optional[int] = None
    lists: dict[str, list] = {}
    extra: dict[str, str] = {}
    while True:
        item = cursor.next_nonblank()
        if item is None:
            raise MissingHeaderTerminator("segment header never terminated")
        line, line_no = item
        if _is_terminator(line):
            break
        key = _split_once(line, sep)[0]
        if key == "Notes":
            notes = _split_once(line, sep)[1]
        elif key == "Channels":
            channels = _parse_int(_split_once(line, sep)[1], line_no, 2)
        elif key == "Samples":
            vals = _split_known(line, sep)[1:]
            lists["samples"] = [_parse_int(v, line_no, i + 2) for i, v in enumerate(vals)]
        elif key == "Date":
            vals = _split_known(line, sep)[1:]
            lists["dates"] = [_parse_date(v, line_no, i + 2) for i, v in enumerate(vals)]
        elif key == "Time":
            vals = _split_known(line, sep)[1:]
            lists["times"] = [_parse_time(v, ds, line_no, i + 2) for i, v in enumerate(vals)]
        elif key == "X_Dimension":
            lists["x_dimension"] = _split_known(line, sep)[1:]
        elif key == "X0":
            vals = _split_known(line, sep)[1:]
            lists["x0"] = [_parse_real(v, ds, line_no, i + 2) for i, v in enumerate(vals)]
        elif key == "Delta_X":
            vals = _split_known(line, sep)[1:]
            lists["delta_x"] = [_parse_real(v, ds, line_no, i + 2) for i, v in enumerate(vals)]
        else:
            k, v = _split_once(line, sep)
            extra[k] = v

    item = cursor.next_nonblank()
    if item is None:
        raise ChannelCountMismatch(1 + (channels or 0), 0, "column-name row missing")
    column_line, _ = item
    column_names = _split_known(column_line, sep)
    has_comment = column_names[-1] == COMMENT_COLUMN

    if channels is None:
        channels = len(column_names) - 1 - (1 if has_comment else 0)
    expected_cols = 1 + channels + (1 if has_comment else 0)
    if len(column_names) != expected_cols:
        raise ChannelCountMismatch(expected_cols, len(column_names), "column-name row")

    segment = LvmSegment(
        channels=channels,
        notes=notes,
        samples_per_channel=lists.get("samples", [1] * channels),
        channel_dates=lists.get("dates", []),
        channel_times=lists.get("times", []),
        x_dimension=lists.get("x_dimension", ["Time"] * channels),
        x0=lists.get("x0", [0.0] * channels),
        delta_x=lists.get("delta_x", [1.0] * channels),
        column_names=column_names,
        extra_keys=extra,
    )
    for name in ("samples_per_channel", "x_dimension", "x0", "delta_x"):
        if len(getattr(segment, name)) != channels:
            raise ChannelCountMismatch(channels, len(getattr(segment, name)), name)
    for name in ("channel_dates", "channel_times"):
        if getattr(segment, name) and len(getattr(segment, name)) != channels:
            raise ChannelCountMismatch(channels, len(getattr(segment, name)), name)

    # data rows run until EOF or until a non-numeric first field, which
    # marks the start of the next segment's header
    while True:
        item = cursor.next_nonblank()
        if item is None:
            break
        line, line_no = item
        fields = _split_known(line, sep)
        if not _is_real(fields[0], ds):
            cursor.push_back()
            break
        if has_comment:
            if len(fields) == 1 + channels:
                comment = None
            elif len(fields) == 2 + channels:
                comment = fields.pop()
            else:
                raise ChannelCountMismatch(2 + channels, len(fields), f"data row {line_no}")
        else:
            if len(fields) != 1 + channels:
                raise ChannelCountMismatch(1 + channels, len(fields), f"data row {line_no}")
            comment = None
        x = _parse_real(fields[0], ds, line_no, 1)
        values = tuple(
            None if f == "" else _parse_real(f, ds, line_no, i + 2)
            for i, f in enumerate(fields[1:])
        )
        segment.rows.append(DataRow(x=x, values=values, comment=comment))
    return segment


# --- serialization ----------------------------------------------------------

def serialize_lvm(doc: LvmDocument) -> bytes:
    """Render a document in the canonical .lvm layout (LF line endings).

    Data reals use 6 fixed decimals, X0 the 16-digit scientific form; both
    honor the declared decimal separator.  Raises InvariantViolation when
    the document cannot be represented losslessly.
    """
    header = doc.header
    sep = header.separator.char
    ds = header.decimal_separator
    if ds not in (".", ","):
        raise InvariantViolation(f"decimal_separator must be '.' or ',': {ds!r}")
    if sep == "," and ds == ",":
        raise InvariantViolation("comma cannot be both field and decimal separator")
    if not doc.segments:
        raise InvariantViolation("document has no segments")

    def check_text(text: str, what: str, allow_sep: bool = False):
        if "\n" in text or "\r" in text:
            raise InvariantViolation(f"{what} contains a line break")
        if not allow_sep and sep in text:
            raise InvariantViolation(f"{what} contains the field separator")

    out = [MAGIC_LINE]

    def emit(key: str, *values: str):
        out.append(sep.join((key,) + values))

    emit("Writer_Version", str(header.writer_version))
    emit("Reader_Version", str(header.reader_version))
    emit("Separator", header.separator.value)
    emit("Decimal_Separator", ds)
    emit("Multi_Headings", "Yes" if header.multi_headings else "No")
    emit("X_Columns", header.x_columns.value)
    emit("Time_Pref", header.time_pref.value)
    if header.operator:
        check_text(header.operator, "operator", allow_sep=True)
        emit("Operator", header.operator)
    if header.date is not None:
        emit("Date", header.date.strftime("%Y/%m/%d"))
    if header.time is not None:
        emit("Time", header.time.render(ds))
    for key, value in header.extra_keys.items():
        check_text(key, f"header key {key!r}")
        check_text(value, f"value of {key!r}", allow_sep=True)
        emit(key, value)
    out.append(HEADER_TERMINATOR)

    for segment in doc.segments:
        out.extend(_serialize_segment(segment, sep, ds, check_text))
    return ("\n".join(out) + "\n").encode("utf-8")


def _serialize_segment(segment: LvmSegment, sep: str, ds: str, check_text) -> list[str]:
    n = segment.channels
    if n < 1:
        raise InvariantViolation("segment must have at least one channel")
    for name in ("samples_per_channel", "x_dimension", "x0", "delta_x"):
        if len(getattr(segment, name)) != n:
            raise InvariantViolation(f"{name} length != channels")
    for name in ("channel_dates", "channel_times"):
        if getattr(segment, name) and len(getattr(segment, name)) != n:
            raise InvariantViolation(f"{name} length != channels")
    for v in segment.x0 + segment.delta_x:
        if not math.isfinite(v):
            raise InvariantViolation("X0/Delta_X values must be finite")
    expected_cols = 1 + n + (1 if segment.has_comment_column else 0)
    if len(segment.column_names) != expected_cols:
        raise InvariantViolation("column_names length != 1 + channels (+ Comment)")

    out = []

    def emit(key: str, *values: str):
        out.append(sep.join((key,) + values))

    if segment.notes is not None:
        check_text(segment.notes, "notes", allow_sep=True)
        emit("Notes", segment.notes)
    emit("Channels", str(n))
    emit("Samples", *(str(s) for s in segment.samples_per_channel))
    if segment.channel_dates:
        emit("Date", *(d.strftime("%Y/%m/%d") for d in segment.channel_dates))
    if segment.channel_times:
        emit("Time", *(t.render(ds) for t in segment.channel_times))
    for dim in segment.x_dimension:
        check_text(dim, "x_dimension entry")
    emit("X_Dimension", *segment.x_dimension)
    emit("X0", *(format_sci16(v, ds) for v in segment.x0))
    emit("Delta_X", *(format_fixed6(v, ds) for v in segment.delta_x))
    for key, value in segment.extra_keys.items():
        check_text(key, f"segment key {key!r}")
        check_text(value, f"value of {key!r}", allow_sep=True)
        emit(key, value)
    out.append(HEADER_TERMINATOR)

    for name in segment.column_names:
        check_text(name, f"column name {name!r}")
    out.append(sep.join(segment.column_names))

    for i, row in enumerate(segment.rows):
        if len(row.values) != n:
            raise InvariantViolation(f"row {i} has {len(row.values)} values, expected {n}")
        if not math.isfinite(row.x) or any(v is not None and not math.isfinite(v)
                                           for v in row.values):
            raise InvariantViolation(f"row {i} contains a non-finite value")
        fields = [format_fixed6(row.x, ds)]
        fields += ["" if v is None else format_fixed6(v, ds) for v in row.values]
        if row.comment is not None:
            if not segment.has_comment_column:
                raise InvariantViolation(f"row {i} carries a comment but no Comment column is declared")
            check_text(row.comment, f"comment of row {i}")
            fields.append(row.comment)
        out.append(sep.join(fields))
    return out


def channel_series(doc: LvmDocument, segment_index: int, channel_index: int) -> list[tuple[float, float]]:
    """(x, y) pairs for one channel, skipping rows where the value is absent."""
    try:
        segment = doc.segments[segment_index]
    except IndexError:
        raise IndexOutOfRange(f"segment {segment_index} of {len(doc.segments)}") from None
    if not 0 <= channel_index < segment.channels:
        raise IndexOutOfRange(f"channel {channel_index} of {segment.channels}")
    return [
        (row.x, row.values[channel_index])
        for row in segment.rows
        if row.values[channel_index] is not None
    ]
