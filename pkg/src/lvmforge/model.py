"""Concept-based equipment models.

An equipment is described once, as a set of typed parameters grouped into
six concept categories (instrument setup, data, measurement information,
experiment characterization, warnings, measured object).  Models are
immutable; mutation helpers return updated copies.  The module also ships
the built-in SYTHERM thermocouple-ensemble model and the line-oriented
definition-file format used to add equipment without programming.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from datetime import date as Date
from datetime import datetime
from enum import Enum
from typing import Optional, Union

from .errors import (
    DuplicateParameterName,
    EmptyName,
    InvalidChannelCount,
    MalformedDefinition,
    MissingEnumDomain,
    TypeMismatch,
    UnknownUnit,
)
from .lvm import HighPrecisionTime


class ConceptCategory(Enum):
    """The six concept categories, in canonical (export) order."""

    INSTRUMENT_SETUP = "InstrumentSetup"
    DATA = "Data"
    MEASUREMENT_INFORMATION = "MeasurementInformation"
    EXPERIMENT_CHARACTERIZATION = "ExperimentCharacterization"
    WARNINGS = "Warnings"
    MEASURED_OBJECT = "MeasuredObject"


class ValueType(Enum):
    INTEGER = "Integer"
    REAL = "Real"
    BOOLEAN = "Boolean"
    TIME = "Time"
    DATE = "Date"
    ENUMERATION = "Enumeration"
    STRING = "String"


class ParameterSource(Enum):
    FILE = "File"
    KEYBOARD = "Keyboard"


# SI unit names accepted for parameter definitions; extensible at startup
# via register_unit().
DEFAULT_UNITS = (
    "Second", "Radian", "Tesla", "Ampere", "CelsiusDegree",
    "Kelvin", "Volt", "Ohm", "Metre", "Kilogram",
)
_UNITS: set[str] = set(DEFAULT_UNITS)


def register_unit(name: str) -> None:
    """Add a measurement-unit name to the accepted SI-name table."""
    if not name or not name.strip():
        raise EmptyName("unit name must be non-empty")
    _UNITS.add(name)


def known_units() -> frozenset[str]:
    return frozenset(_UNITS)


@dataclass(frozen=True)
class ParameterDefinition:
    name: str
    category: ConceptCategory
    value_type: ValueType
    unit: Optional[str] = None
    source: ParameterSource = ParameterSource.FILE
    enum_domain: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.name:
            raise EmptyName("parameter name must be non-empty")
        if self.value_type is ValueType.ENUMERATION and not self.enum_domain:
            raise MissingEnumDomain(self.name)
        if self.value_type is not ValueType.ENUMERATION and self.enum_domain:
            raise MissingEnumDomain(f"{self.name}: enum_domain only valid for Enumeration")
        if self.unit is not None and self.unit not in _UNITS:
            raise UnknownUnit(f"{self.name}: {self.unit!r} is not a registered unit")


@dataclass(frozen=True)
class EquipmentModel:
    name: str
    producer: str = ""
    description: str = ""
    webpage: Optional[str] = None
    picture: Optional[str] = None
    visual_model: Optional[str] = None
    extensions: frozenset[str] = frozenset()
    parameters: tuple[ParameterDefinition, ...] = ()
    ignored_file_keys: frozenset[str] = frozenset()

    def parameter(self, name: str) -> Optional[ParameterDefinition]:
        for p in self.parameters:
            if p.name == name:
                return p
        return None

    def by_category(self, category: ConceptCategory) -> tuple[ParameterDefinition, ...]:
        return tuple(p for p in self.parameters if p.category is category)

    @property
    def channel_parameters(self) -> tuple[ParameterDefinition, ...]:
        """Data-category channel parameters, in declaration order."""
        return tuple(
            p for p in self.by_category(ConceptCategory.DATA) if p.name != "X_Value"
        )

    def with_extension(self, extension: str) -> "EquipmentModel":
        return replace(self, extensions=self.extensions | {extension.lower()})


def define_equipment(name: str, producer: str = "", description: str = "",
                     webpage: Optional[str] = None, picture: Optional[str] = None,
                     visual_model: Optional[str] = None) -> EquipmentModel:
    """Start a new, empty equipment model (no parameters, no extensions)."""
    if not name or not name.strip():
        raise EmptyName("equipment name must be non-empty")
    return EquipmentModel(name=name, producer=producer, description=description,
                          webpage=webpage, picture=picture, visual_model=visual_model)


def add_parameter(model: EquipmentModel, definition: ParameterDefinition) -> EquipmentModel:
    """Return a copy of the model with one more parameter appended."""
    if model.parameter(definition.name) is not None:
        raise DuplicateParameterName(f"{model.name}: {definition.name}")
    return replace(model, parameters=model.parameters + (definition,))


def builtin_sytherm(channel_count: int = 3) -> EquipmentModel:
    """The built-in SYTHERM thermocouple-acquisition model.

    Data: X_Value plus one Channel_k parameter per acquisition channel.
    Measurement: Operator, Date, Time.  Experiment: the .lvm header keys.
    Writer_Version and Reader_Version are ignored on import.
    """
    if not isinstance(channel_count, int) or channel_count < 1:
        raise InvalidChannelCount(f"channel_count must be >= 1, got {channel_count!r}")
    cat = ConceptCategory
    vt = ValueType
    params = [ParameterDefinition("X_Value", cat.DATA, vt.REAL, unit="Second")]
    params += [
        ParameterDefinition(f"Channel_{k}", cat.DATA, vt.REAL, unit="CelsiusDegree")
        for k in range(channel_count)
    ]
    params += [
        ParameterDefinition("Operator", cat.MEASUREMENT_INFORMATION, vt.STRING),
        ParameterDefinition("Date", cat.MEASUREMENT_INFORMATION, vt.DATE),
        ParameterDefinition("Time", cat.MEASUREMENT_INFORMATION, vt.TIME),
        ParameterDefinition("Channels", cat.EXPERIMENT_CHARACTERIZATION, vt.INTEGER),
        ParameterDefinition("Separator", cat.EXPERIMENT_CHARACTERIZATION, vt.ENUMERATION,
                            enum_domain=("Tab", "Comma")),
        ParameterDefinition("Decimal_Separator", cat.EXPERIMENT_CHARACTERIZATION, vt.STRING),
        ParameterDefinition("Multi_Headings", cat.EXPERIMENT_CHARACTERIZATION, vt.BOOLEAN),
        ParameterDefinition("X_Columns", cat.EXPERIMENT_CHARACTERIZATION, vt.ENUMERATION,
                            enum_domain=("No", "One", "Multi")),
        ParameterDefinition("Time_Pref", cat.EXPERIMENT_CHARACTERIZATION, vt.ENUMERATION,
                            enum_domain=("Absolute", "Relative")),
        ParameterDefinition("X_Dimension", cat.EXPERIMENT_CHARACTERIZATION, vt.STRING),
        ParameterDefinition("X0", cat.EXPERIMENT_CHARACTERIZATION, vt.REAL),
        ParameterDefinition("Delta_X", cat.EXPERIMENT_CHARACTERIZATION, vt.REAL),
    ]
    return EquipmentModel(
        name="SYTHERM",
        producer="UPB Measurement Laboratory",
        description="thermocouple acquisition ensemble",
        extensions=frozenset({"lvm"}),
        parameters=tuple(params),
        ignored_file_keys=frozenset({"Writer_Version", "Reader_Version"}),
    )


# --- value grammar -----------------------------------------------------------

TypedScalar = Union[int, float, bool, Date, HighPrecisionTime, str]

_INT_RE = re.compile(r"^[+-]?\d+$")
_REAL_RE = re.compile(r"^[+-]?(?:\d+(?:[.,]\d*)?|[.,]\d+)(?:[eE][+-]?\d+)?$")
_TIME_RE = re.compile(r"^(\d{1,2}):(\d{1,2}):(\d{1,2})(?:[.,](\d+))?$")
_BOOL_WORDS = {"yes": True, "true": True, "no": False, "false": False}


def validate_value(definition: ParameterDefinition, raw: str) -> TypedScalar:
    """Apply the parameter's declared type to a raw text value.

    Reals accept either "." or "," as decimal separator, booleans accept
    the .lvm Yes/No convention alongside true/false, dates are YYYY/MM/DD
    and times HH:MM:SS with an optional fractional part.
    """
    vt = definition.value_type
    if vt is ValueType.INTEGER:
        if not _INT_RE.match(raw):
            raise TypeMismatch(definition.name, raw, "expected an integer")
        return int(raw)
    if vt is ValueType.REAL:
        if not _REAL_RE.match(raw):
            raise TypeMismatch(definition.name, raw, "expected a real")
        return float(raw.replace(",", "."))
    if vt is ValueType.BOOLEAN:
        try:
            return _BOOL_WORDS[raw.casefold()]
        except KeyError:
            raise TypeMismatch(definition.name, raw, "expected Yes/No/true/false") from None
    if vt is ValueType.DATE:
        try:
            return datetime.strptime(raw, "%Y/%m/%d").date()
        except ValueError:
            raise TypeMismatch(definition.name, raw, "expected YYYY/MM/DD") from None
    if vt is ValueType.TIME:
        m = _TIME_RE.match(raw)
        if not m:
            raise TypeMismatch(definition.name, raw, "expected HH:MM:SS[.fff]")
        h, mi, s = int(m.group(1)), int(m.group(2)), int(m.group(3))
        if not (h <= 23 and mi <= 59 and s <= 60):
            raise TypeMismatch(definition.name, raw, "time out of range")
        return HighPrecisionTime(h, mi, s, m.group(4) or "")
    if vt is ValueType.ENUMERATION:
        if raw not in definition.enum_domain:
            raise TypeMismatch(definition.name, raw,
                               f"expected one of {', '.join(definition.enum_domain)}")
        return raw
    return raw  # String


@dataclass(frozen=True)
class TypedValue:
    """A validated value together with its declared type and unit."""

    value: TypedScalar
    value_type: ValueType
    unit: Optional[str] = None


def make_typed(definition: ParameterDefinition, raw: str) -> TypedValue:
    return TypedValue(validate_value(definition, raw), definition.value_type, definition.unit)


def render_canonical(typed: TypedValue) -> str:
    """Fixed text form of a typed value: the storage/export rendering.

    Integers base-10, reals 6 decimals with ".", booleans Yes/No, dates
    YYYY/MM/DD, times with the full fraction digit string.  Injective over
    validate_value's accepted grammars, so storage equality is value
    equality.
    """
    vt, v = typed.value_type, typed.value
    if vt is ValueType.INTEGER:
        return str(v)
    if vt is ValueType.REAL:
        return f"{v:.6f}"
    if vt is ValueType.BOOLEAN:
        return "Yes" if v else "No"
    if vt is ValueType.DATE:
        return v.strftime("%Y/%m/%d")
    if vt is ValueType.TIME:
        return v.render(".")
    return str(v)


# --- definition-file format ---------------------------------------------------
#
#   name: SYTHERM
#   producer: UPB Measurement Laboratory
#   extensions: lvm
#   ignored_keys: Reader_Version Writer_Version
#   param: X_Value|Data|Real|Second|File
#   param: Separator|ExperimentCharacterization|Enumeration||File|Tab,Comma
#
# One "param:" line per parameter (name|category|type|unit|source, with a
# sixth comma-separated field for enumeration domains).  Unit empty means
# dimensionless.

_CATEGORY_BY_NAME = {c.value: c for c in ConceptCategory}
_TYPE_BY_NAME = {t.value: t for t in ValueType}
_SOURCE_BY_NAME = {s.value: s for s in ParameterSource}


def render_model_definition(model: EquipmentModel) -> str:
    """Render a model as definition-file text (inverse of parse_model_definition)."""
    def clean(text: str, what: str) -> str:
        if "\n" in text or "\r" in text:
            raise MalformedDefinition(f"{what} contains a line break")
        return text

    lines = [f"name: {clean(model.name, 'name')}"]
    lines.append(f"producer: {clean(model.producer, 'producer')}")
    lines.append(f"description: {clean(model.description, 'description')}")
    for key, value in (("webpage", model.webpage), ("picture", model.picture),
                       ("visual_model", model.visual_model)):
        if value is not None:
            lines.append(f"{key}: {clean(value, key)}")
    lines.append("extensions: " + " ".join(sorted(model.extensions)))
    if model.ignored_file_keys:
        lines.append("ignored_keys: " + " ".join(sorted(model.ignored_file_keys)))
    for p in model.parameters:
        if "|" in p.name or (p.unit and "|" in p.unit):
            raise MalformedDefinition(f"parameter {p.name!r} contains '|'")
        parts = [p.name, p.category.value, p.value_type.value, p.unit or "", p.source.value]
        if p.enum_domain:
            if any("," in d or "|" in d for d in p.enum_domain):
                raise MalformedDefinition(f"enum domain of {p.name!r} contains ',' or '|'")
            parts.append(",".join(p.enum_domain))
        lines.append("param: " + "|".join(parts))
    return "\n".join(lines) + "\n"


def parse_model_definition(text: str) -> EquipmentModel:
    """Parse definition-file text into an EquipmentModel.

    Raises MalformedDefinition on format errors; parameter-level problems
    (duplicate names, missing enum domains, unknown units) surface as their
    own error types.
    """
    model: Optional[EquipmentModel] = None
    fields: dict[str, str] = {}
    params: list[ParameterDefinition] = []
    extensions: set[str] = set()
    ignored: set[str] = set()
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, colon, value = stripped.partition(":")
        if not colon:
            raise MalformedDefinition(f"line {line_no}: expected 'key: value'")
        key = key.strip()
        value = value.strip()
        if key == "param":
            parts = value.split("|")
            if len(parts) not in (5, 6):
                raise MalformedDefinition(
                    f"line {line_no}: expected name|category|type|unit|source[|domain]")
            name, category, vtype, unit, source = (p.strip() for p in parts[:5])
            if category not in _CATEGORY_BY_NAME:
                raise MalformedDefinition(f"line {line_no}: unknown category {category!r}")
            if vtype not in _TYPE_BY_NAME:
                raise MalformedDefinition(f"line {line_no}: unknown type {vtype!r}")
            if source not in _SOURCE_BY_NAME:
                raise MalformedDefinition(f"line {line_no}: unknown source {source!r}")
            domain = tuple(d.strip() for d in parts[5].split(",")) if len(parts) == 6 else ()
            params.append(ParameterDefinition(
                name=name,
                category=_CATEGORY_BY_NAME[category],
                value_type=_TYPE_BY_NAME[vtype],
                unit=unit or None,
                source=_SOURCE_BY_NAME[source],
                enum_domain=domain,
            ))
        elif key == "extensions":
            extensions.update(e.lower() for e in value.split())
        elif key == "ignored_keys":
            ignored.update(value.split())
        elif key in ("name", "producer", "description", "webpage", "picture", "visual_model"):
            fields[key] = value
        else:
            raise MalformedDefinition(f"line {line_no}: unknown field {key!r}")
    if "name" not in fields:
        raise MalformedDefinition("definition is missing the 'name' field")
    model = define_equipment(
        fields["name"], fields.get("producer", ""), fields.get("description", ""),
        fields.get("webpage"), fields.get("picture"), fields.get("visual_model"),
    )
    for p in params:
        model = add_parameter(model, p)
    return replace(model, extensions=frozenset(extensions),
                   ignored_file_keys=frozenset(ignored))
