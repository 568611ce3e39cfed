"""Parsing-procedure registry and the file-to-record import workflow.

A parsing procedure is a named parser implementation; a binding attaches
one to an (equipment, file extension) pair, realizing the many-to-many
relation between equipments and procedures.  Binding names follow the
PROCEDURE_EXT convention, e.g. LVM_PARSING bound to "lvm" yields
LVM_PARSING_LVM.

Only the .lvm handler ships; the registry accommodates procedures for the
other laboratory formats (.msr, .mes, .coi, ...) without an implementation.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from datetime import datetime
from typing import Callable, Optional

from .errors import (
    ChannelCountMismatch,
    DuplicateBinding,
    DuplicateEquipmentName,
    DuplicateProcedure,
    ExtensionNotDeclared,
    NoBinding,
    UnknownEquipment,
    UnknownHandler,
    UnknownProcedure,
)
from .lvm import LvmDocument, channel_series, format_fixed6, format_sci16, parse_lvm
from .model import (
    ConceptCategory,
    EquipmentModel,
    TypedValue,
    make_typed,
)


@dataclass(frozen=True)
class ParsingProcedure:
    name: str
    handler_id: str


@dataclass(frozen=True)
class ParsingBinding:
    binding_name: str
    equipment_name: str
    procedure_name: str
    extension: str


def binding_name(procedure_name: str, extension: str) -> str:
    return f"{procedure_name.upper()}_{extension.upper()}"


@dataclass(frozen=True)
class ChannelSeries:
    name: str
    unit: Optional[str]
    points: tuple[tuple[float, float], ...]


@dataclass
class MeasurementRecord:
    """One imported measurement: typed parameter values plus numeric series."""

    equipment_name: str
    imported_at: datetime
    source_file: str
    values: dict[ConceptCategory, dict[str, TypedValue]] = field(default_factory=dict)
    series: list[ChannelSeries] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    aux: dict[str, str] = field(default_factory=dict)
    record_id: Optional[int] = None

    def get_value(self, category: ConceptCategory, name: str):
        """Raw python value of one parameter, or None if unset."""
        typed = self.values.get(category, {}).get(name)
        return None if typed is None else typed.value

    def set_value(self, category: ConceptCategory, name: str, typed: TypedValue):
        self.values.setdefault(category, {})[name] = typed


# handler_id -> callable(file bytes, equipment model, source filename) -> record
ParserHandler = Callable[[bytes, EquipmentModel, str], MeasurementRecord]
LVM_HANDLER_ID = "builtin.lvm"
_HANDLERS: dict[str, ParserHandler] = {}


def register_handler(handler_id: str, handler: ParserHandler) -> None:
    _HANDLERS[handler_id] = handler


def _lvm_handler(data: bytes, model: EquipmentModel, source_file: str) -> MeasurementRecord:
    return map_lvm_to_record(parse_lvm(data), model, source_file=source_file)


class Registry:
    """Equipments, parsing procedures and their (equipment, extension) bindings.

    Read-mostly: registrations happen at startup or through CLI commands
    under a single-writer contract; resolve() is a pure lookup.
    """

    def __init__(self):
        self._equipments: dict[str, EquipmentModel] = {}
        self._procedures: dict[str, ParsingProcedure] = {}
        self._bindings: dict[tuple[str, str], ParsingBinding] = {}

    def add_equipment(self, model: EquipmentModel) -> None:
        if model.name in self._equipments:
            raise DuplicateEquipmentName(model.name)
        self._equipments[model.name] = model

    def get_equipment(self, name: str) -> EquipmentModel:
        try:
            return self._equipments[name]
        except KeyError:
            raise UnknownEquipment(name) from None

    def equipment_names(self) -> list[str]:
        return sorted(self._equipments)

    def register_procedure(self, procedure: ParsingProcedure) -> None:
        if procedure.name in self._procedures:
            raise DuplicateProcedure(procedure.name)
        if procedure.handler_id not in _HANDLERS:
            raise UnknownHandler(procedure.handler_id)
        self._procedures[procedure.name] = procedure

    def get_procedure(self, name: str) -> ParsingProcedure:
        try:
            return self._procedures[name]
        except KeyError:
            raise UnknownProcedure(name) from None

    def bind(self, equipment: str, procedure: str, extension: str) -> ParsingBinding:
        model = self.get_equipment(equipment)
        proc = self.get_procedure(procedure)
        ext = extension.lower()
        if ext not in model.extensions:
            raise ExtensionNotDeclared(f"{equipment} does not declare .{ext}")
        if (equipment, ext) in self._bindings:
            raise DuplicateBinding(f"({equipment}, {ext})")
        binding = ParsingBinding(
            binding_name=binding_name(proc.name, ext),
            equipment_name=equipment,
            procedure_name=proc.name,
            extension=ext,
        )
        self._bindings[(equipment, ext)] = binding
        return binding

    def bindings(self) -> list[ParsingBinding]:
        return list(self._bindings.values())

    def resolve(self, equipment: str, filename: str) -> ParsingProcedure:
        """Procedure bound to (equipment, extension-of-filename)."""
        ext = os.path.splitext(filename)[1].lstrip(".").lower()
        binding = self._bindings.get((equipment, ext))
        if binding is None:
            raise NoBinding(equipment, ext)
        return self._procedures[binding.procedure_name]

    @classmethod
    def from_store(cls, store) -> "Registry":
        """Rebuild a registry from persisted equipments, procedures, bindings.

        Stored procedures all resolve to the built-in .lvm handler: it is
        the only parser implementation that ships.
        """
        registry = cls()
        for name in store.list_equipment():
            registry.add_equipment(store.get_equipment(name))
        for name in store.list_procedures():
            registry.register_procedure(ParsingProcedure(name, LVM_HANDLER_ID))
        for binding in store.list_bindings():
            registry._bindings[(binding.equipment_name, binding.extension)] = binding
        return registry


# keys whose segment-header value is one entry per channel
_PER_CHANNEL_KEYS = ("Samples", "Date", "Time", "X_Dimension", "X0", "Delta_X")


def map_lvm_to_record(doc: LvmDocument, model: EquipmentModel,
                      source_file: str = "", imported_at: Optional[datetime] = None,
                      ) -> MeasurementRecord:
    """Map a parsed .lvm document onto an equipment model.

    Header keys are matched to model parameters by name and typed through
    the declared value grammar; keys in the model's ignored set are skipped
    silently, unknown keys each produce one warning.  Per-channel segment
    keys contribute their channel-0 value, with the full list kept in the
    record's aux notes.  Channel columns become series named after the
    model's channel parameters.
    """
    if "lvm" not in model.extensions:
        raise ExtensionNotDeclared(f"{model.name} does not declare .lvm")
    segment = doc.segments[0]
    model_channels = len(model.channel_parameters)
    if model_channels != segment.channels:
        raise ChannelCountMismatch(model_channels, segment.channels,
                                   f"model {model.name}")

    record = MeasurementRecord(
        equipment_name=model.name,
        imported_at=imported_at or datetime.now(),
        source_file=source_file,
    )

    def apply(key: str, raw: str) -> bool:
        """Set a parameter from raw text; False when the model rejects the key."""
        if key in model.ignored_file_keys:
            return True
        definition = model.parameter(key)
        if definition is None:
            return False
        record.set_value(definition.category, key, make_typed(definition, raw))
        return True

    header = doc.header
    file_pairs = [
        ("Writer_Version", str(header.writer_version)),
        ("Reader_Version", str(header.reader_version)),
        ("Separator", header.separator.value),
        ("Decimal_Separator", header.decimal_separator),
        ("Multi_Headings", "Yes" if header.multi_headings else "No"),
        ("X_Columns", header.x_columns.value),
        ("Time_Pref", header.time_pref.value),
    ]
    if header.operator:
        file_pairs.append(("Operator", header.operator))
    if header.date is not None:
        file_pairs.append(("Date", header.date.strftime("%Y/%m/%d")))
    if header.time is not None:
        file_pairs.append(("Time", header.time.render(".")))
    file_pairs.extend(header.extra_keys.items())
    for key, raw in file_pairs:
        if not apply(key, raw):
            record.warnings.append(f"unknown header key {key!r}")

    if segment.notes is not None:
        record.aux["Notes"] = segment.notes
    if not apply("Channels", str(segment.channels)):
        record.warnings.append("unknown header key 'Channels'")

    per_channel = {
        "Samples": [str(s) for s in segment.samples_per_channel],
        "Date": [d.strftime("%Y/%m/%d") for d in segment.channel_dates],
        "Time": [t.render(".") for t in segment.channel_times],
        "X_Dimension": list(segment.x_dimension),
        "X0": [format_sci16(v, ".") for v in segment.x0],
        "Delta_X": [format_fixed6(v, ".") for v in segment.delta_x],
    }
    for key in _PER_CHANNEL_KEYS:
        rendered = per_channel[key]
        if not rendered:
            continue
        record.aux[key] = " ".join(rendered)
        if key in model.ignored_file_keys:
            continue
        definition = model.parameter(key)
        if definition is None:
            record.warnings.append(f"unknown header key {key!r}")
        elif record.values.get(definition.category, {}).get(key) is None:
            # file-header value (e.g. Date/Time) takes precedence
            record.set_value(definition.category, key, make_typed(definition, rendered[0]))

    for key, raw in segment.extra_keys.items():
        if not apply(key, raw):
            record.warnings.append(f"unknown header key {key!r}")

    # downstream exports rely on model declaration order within a category
    declaration = {p.name: i for i, p in enumerate(model.parameters)}
    record.values = {
        category: dict(sorted(values.items(), key=lambda item: declaration[item[0]]))
        for category, values in record.values.items()
    }

    for k, parameter in enumerate(model.channel_parameters):
        record.series.append(ChannelSeries(
            name=parameter.name,
            unit=parameter.unit,
            points=tuple(channel_series(doc, 0, k)),
        ))

    for index in range(1, len(doc.segments)):
        record.warnings.append(f"segment {index} ignored: only the first segment is imported")
    return record


def import_file(path, equipment: str, registry: Registry, store) -> int:
    """Parse one measurement file, map it and persist it; returns the record id."""
    filename = os.path.basename(str(path))
    procedure = registry.resolve(equipment, filename)
    model = registry.get_equipment(equipment)
    with open(path, "rb") as handle:
        data = handle.read()
    record = _HANDLERS[procedure.handler_id](data, model, filename)
    return store.put_measurement(record)


register_handler(LVM_HANDLER_ID, _lvm_handler)
