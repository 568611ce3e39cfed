"""Unified relational persistence for equipments, procedures and measurements.

The schema follows the t_<code>_<name> / <code>_number naming convention:

    t_eqp_equipments            equipment models (+ parameter rows in t_prm)
    t_psf_parsingfunction       parsing procedures by name
    t_efe_equipmentfileextension  (equipment, procedure, extension) link table;
                                  efe_number holds the PROCEDURE_EXT binding name
    t_prm_parameters            typed parameter definitions per equipment
    t_msr_measurements          one row per imported measurement
    t_val_values                canonical text rendering of each parameter value
    t_ser_series                (index, x, y) points per channel series

Values are stored in their canonical text form (see
:func:`lvmforge.model.render_canonical`), which is injective over the value
grammars, so get followed by put reconstructs an equal record.  All writes
are transactional; the engine is SQLite (single writer, many readers).
"""

from __future__ import annotations

import json
import re
import sqlite3
from dataclasses import dataclass
from datetime import date as Date
from datetime import datetime
from typing import Optional, Union

from .errors import (
    DuplicateKey,
    ForeignKeyViolation,
    NotFound,
    SchemaVersionMismatch,
    StorageUnavailable,
    UnknownEquipment,
    UnknownParameter,
)
from .ingest import ChannelSeries, MeasurementRecord, ParsingBinding, ParsingProcedure
from .model import (
    ConceptCategory,
    EquipmentModel,
    ParameterDefinition,
    ParameterSource,
    ValueType,
    make_typed,
    render_canonical,
)

SCHEMA_VERSION = 1

_SCHEMA = """
CREATE TABLE t_eqp_equipments (
    eqp_number      INTEGER PRIMARY KEY,
    eqp_name        TEXT NOT NULL UNIQUE,
    eqp_producer    TEXT NOT NULL DEFAULT '',
    eqp_description TEXT NOT NULL DEFAULT '',
    eqp_webpage     TEXT,
    eqp_picture     TEXT,
    eqp_visualmodel TEXT,
    eqp_extensions  TEXT NOT NULL DEFAULT '',
    eqp_ignoredkeys TEXT NOT NULL DEFAULT ''
);
CREATE TABLE t_psf_parsingfunction (
    psf_number INTEGER PRIMARY KEY,
    psf_name   TEXT NOT NULL UNIQUE
);
CREATE TABLE t_efe_equipmentfileextension (
    efe_number    TEXT NOT NULL,
    eqp_number    INTEGER NOT NULL REFERENCES t_eqp_equipments(eqp_number),
    psf_number    INTEGER NOT NULL REFERENCES t_psf_parsingfunction(psf_number),
    efe_extension TEXT NOT NULL,
    UNIQUE (eqp_number, psf_number, efe_extension),
    UNIQUE (eqp_number, efe_extension)
);
CREATE TABLE t_prm_parameters (
    prm_number   INTEGER PRIMARY KEY,
    eqp_number   INTEGER NOT NULL REFERENCES t_eqp_equipments(eqp_number),
    prm_name     TEXT NOT NULL,
    prm_category TEXT NOT NULL,
    prm_type     TEXT NOT NULL,
    prm_unit     TEXT,
    prm_source   TEXT NOT NULL,
    UNIQUE (eqp_number, prm_name)
);
CREATE TABLE t_msr_measurements (
    msr_number      INTEGER PRIMARY KEY,
    eqp_number      INTEGER NOT NULL REFERENCES t_eqp_equipments(eqp_number),
    msr_imported_at TEXT NOT NULL,
    msr_sourcefile  TEXT NOT NULL DEFAULT '',
    msr_warnings    TEXT NOT NULL DEFAULT '[]',
    msr_aux         TEXT NOT NULL DEFAULT '{}'
);
CREATE TABLE t_val_values (
    val_number INTEGER PRIMARY KEY,
    msr_number INTEGER NOT NULL REFERENCES t_msr_measurements(msr_number),
    prm_number INTEGER NOT NULL REFERENCES t_prm_parameters(prm_number),
    val_text   TEXT NOT NULL,
    UNIQUE (msr_number, prm_number)
);
CREATE TABLE t_ser_series (
    ser_number INTEGER PRIMARY KEY,
    msr_number INTEGER NOT NULL REFERENCES t_msr_measurements(msr_number),
    prm_number INTEGER NOT NULL REFERENCES t_prm_parameters(prm_number),
    ser_index  INTEGER NOT NULL,
    ser_x      REAL NOT NULL,
    ser_y      REAL NOT NULL,
    UNIQUE (msr_number, prm_number, ser_index)
);
"""

_ENUM_TYPE_RE = re.compile(r"^Enumeration\((.*)\)$")


def _encode_type(definition: ParameterDefinition) -> str:
    if definition.value_type is ValueType.ENUMERATION:
        return "Enumeration(" + ",".join(definition.enum_domain) + ")"
    return definition.value_type.value


def _decode_type(text: str) -> tuple[ValueType, tuple[str, ...]]:
    m = _ENUM_TYPE_RE.match(text)
    if m:
        return ValueType.ENUMERATION, tuple(m.group(1).split(","))
    return ValueType(text), ()


@dataclass(frozen=True)
class RecordSummary:
    record_id: int
    equipment_name: str
    imported_at: datetime
    source_file: str
    operator: Optional[str] = None


def init_schema(storage_path) -> "Store":
    """Open (creating if necessary) the store at the given path.

    Idempotent: re-initializing an existing valid store is a no-op.  A store
    written with a different schema version raises SchemaVersionMismatch.
    """
    try:
        conn = sqlite3.connect(str(storage_path))
        conn.execute("PRAGMA foreign_keys = ON")
        version = conn.execute("PRAGMA user_version").fetchone()[0]
    except sqlite3.Error as exc:
        raise StorageUnavailable(f"{storage_path}: {exc}") from None
    if version == 0:
        tables = conn.execute(
            "SELECT count(*) FROM sqlite_master WHERE type = 'table'").fetchone()[0]
        if tables:
            conn.close()
            raise SchemaVersionMismatch(
                f"{storage_path}: existing database carries no lvmforge version marker")
        try:
            with conn:
                conn.executescript(_SCHEMA)
                conn.execute(f"PRAGMA user_version = {SCHEMA_VERSION}")
        except sqlite3.Error as exc:
            conn.close()
            raise StorageUnavailable(f"{storage_path}: {exc}") from None
    elif version != SCHEMA_VERSION:
        conn.close()
        raise SchemaVersionMismatch(
            f"{storage_path}: schema version {version}, expected {SCHEMA_VERSION}")
    return Store(conn)


class Store:
    """Handle over one on-disk store; use init_schema() to obtain one."""

    def __init__(self, conn: sqlite3.Connection):
        self._conn = conn

    def close(self):
        self._conn.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    # -- equipments ---------------------------------------------------------

    def put_equipment(self, model: EquipmentModel) -> int:
        """Insert the model and all its parameter rows; returns eqp_number."""
        try:
            with self._conn as conn:
                cur = conn.execute(
                    "INSERT INTO t_eqp_equipments (eqp_name, eqp_producer,"
                    " eqp_description, eqp_webpage, eqp_picture, eqp_visualmodel,"
                    " eqp_extensions, eqp_ignoredkeys) VALUES (?,?,?,?,?,?,?,?)",
                    (model.name, model.producer, model.description, model.webpage,
                     model.picture, model.visual_model,
                     " ".join(sorted(model.extensions)),
                     " ".join(sorted(model.ignored_file_keys))))
                eqp = cur.lastrowid
                for p in model.parameters:
                    conn.execute(
                        "INSERT INTO t_prm_parameters (eqp_number, prm_name,"
                        " prm_category, prm_type, prm_unit, prm_source)"
                        " VALUES (?,?,?,?,?,?)",
                        (eqp, p.name, p.category.value, _encode_type(p),
                         p.unit, p.source.value))
                return eqp
        except sqlite3.IntegrityError as exc:
            raise _integrity(exc) from None

    def _eqp_number(self, name: str) -> int:
        row = self._conn.execute(
            "SELECT eqp_number FROM t_eqp_equipments WHERE eqp_name = ?",
            (name,)).fetchone()
        if row is None:
            raise UnknownEquipment(name)
        return row[0]

    def get_equipment(self, name: str) -> EquipmentModel:
        row = self._conn.execute(
            "SELECT eqp_number, eqp_name, eqp_producer, eqp_description,"
            " eqp_webpage, eqp_picture, eqp_visualmodel, eqp_extensions,"
            " eqp_ignoredkeys FROM t_eqp_equipments WHERE eqp_name = ?",
            (name,)).fetchone()
        if row is None:
            raise UnknownEquipment(name)
        params = []
        for prm in self._conn.execute(
                "SELECT prm_name, prm_category, prm_type, prm_unit, prm_source"
                " FROM t_prm_parameters WHERE eqp_number = ? ORDER BY prm_number",
                (row[0],)):
            value_type, domain = _decode_type(prm[2])
            params.append(ParameterDefinition(
                name=prm[0], category=ConceptCategory(prm[1]), value_type=value_type,
                unit=prm[3], source=ParameterSource(prm[4]), enum_domain=domain))
        return EquipmentModel(
            name=row[1], producer=row[2], description=row[3], webpage=row[4],
            picture=row[5], visual_model=row[6],
            extensions=frozenset(row[7].split()) if row[7] else frozenset(),
            parameters=tuple(params),
            ignored_file_keys=frozenset(row[8].split()) if row[8] else frozenset())

    def list_equipment(self) -> list[str]:
        return [r[0] for r in self._conn.execute(
            "SELECT eqp_name FROM t_eqp_equipments ORDER BY eqp_name")]

    def _parameter_ids(self, eqp_number: int) -> dict[str, tuple[int, ParameterDefinition]]:
        out = {}
        for row in self._conn.execute(
                "SELECT prm_number, prm_name, prm_category, prm_type, prm_unit,"
                " prm_source FROM t_prm_parameters WHERE eqp_number = ?"
                " ORDER BY prm_number", (eqp_number,)):
            value_type, domain = _decode_type(row[3])
            out[row[1]] = (row[0], ParameterDefinition(
                name=row[1], category=ConceptCategory(row[2]), value_type=value_type,
                unit=row[4], source=ParameterSource(row[5]), enum_domain=domain))
        return out

    # -- procedures and bindings ---------------------------------------------

    def put_procedure(self, procedure: Union[ParsingProcedure, str]) -> int:
        name = procedure.name if isinstance(procedure, ParsingProcedure) else procedure
        try:
            with self._conn as conn:
                return conn.execute(
                    "INSERT INTO t_psf_parsingfunction (psf_name) VALUES (?)",
                    (name,)).lastrowid
        except sqlite3.IntegrityError as exc:
            raise _integrity(exc) from None

    def list_procedures(self) -> list[str]:
        return [r[0] for r in self._conn.execute(
            "SELECT psf_name FROM t_psf_parsingfunction ORDER BY psf_number")]

    def put_binding(self, binding: ParsingBinding) -> str:
        """Insert the link row; returns efe_number (the binding name)."""
        eqp = self._conn.execute(
            "SELECT eqp_number FROM t_eqp_equipments WHERE eqp_name = ?",
            (binding.equipment_name,)).fetchone()
        psf = self._conn.execute(
            "SELECT psf_number FROM t_psf_parsingfunction WHERE psf_name = ?",
            (binding.procedure_name,)).fetchone()
        if eqp is None or psf is None:
            missing = binding.equipment_name if eqp is None else binding.procedure_name
            raise ForeignKeyViolation(f"binding references missing {missing!r}")
        try:
            with self._conn as conn:
                conn.execute(
                    "INSERT INTO t_efe_equipmentfileextension"
                    " (efe_number, eqp_number, psf_number, efe_extension)"
                    " VALUES (?,?,?,?)",
                    (binding.binding_name, eqp[0], psf[0], binding.extension))
        except sqlite3.IntegrityError as exc:
            raise _integrity(exc) from None
        return binding.binding_name

    def list_bindings(self) -> list[ParsingBinding]:
        return [
            ParsingBinding(binding_name=r[0], equipment_name=r[1],
                           procedure_name=r[2], extension=r[3])
            for r in self._conn.execute(
                "SELECT e.efe_number, q.eqp_name, p.psf_name, e.efe_extension"
                " FROM t_efe_equipmentfileextension e"
                " JOIN t_eqp_equipments q ON q.eqp_number = e.eqp_number"
                " JOIN t_psf_parsingfunction p ON p.psf_number = e.psf_number"
                " ORDER BY e.rowid")
        ]

    # -- measurements ----------------------------------------------------------

    def put_measurement(self, record: MeasurementRecord) -> int:
        eqp = self._eqp_number(record.equipment_name)
        params = self._parameter_ids(eqp)
        try:
            with self._conn as conn:
                cur = conn.execute(
                    "INSERT INTO t_msr_measurements (eqp_number, msr_imported_at,"
                    " msr_sourcefile, msr_warnings, msr_aux) VALUES (?,?,?,?,?)",
                    (eqp, record.imported_at.isoformat(), record.source_file,
                     json.dumps(record.warnings), json.dumps(record.aux)))
                msr = cur.lastrowid
                for per_category in record.values.values():
                    for name, typed in per_category.items():
                        if name not in params:
                            raise UnknownParameter(f"{record.equipment_name}: {name}")
                        conn.execute(
                            "INSERT INTO t_val_values (msr_number, prm_number, val_text)"
                            " VALUES (?,?,?)",
                            (msr, params[name][0], render_canonical(typed)))
                for series in record.series:
                    if series.name not in params:
                        raise UnknownParameter(f"{record.equipment_name}: {series.name}")
                    prm = params[series.name][0]
                    for index, (x, y) in enumerate(series.points):
                        conn.execute(
                            "INSERT INTO t_ser_series (msr_number, prm_number,"
                            " ser_index, ser_x, ser_y) VALUES (?,?,?,?,?)",
                            (msr, prm, index, x, y))
                return msr
        except sqlite3.IntegrityError as exc:
            raise _integrity(exc) from None

    def get_measurement(self, msr_number: int) -> MeasurementRecord:
        row = self._conn.execute(
            "SELECT m.eqp_number, q.eqp_name, m.msr_imported_at, m.msr_sourcefile,"
            " m.msr_warnings, m.msr_aux FROM t_msr_measurements m"
            " JOIN t_eqp_equipments q ON q.eqp_number = m.eqp_number"
            " WHERE m.msr_number = ?", (msr_number,)).fetchone()
        if row is None:
            raise NotFound(f"measurement {msr_number}")
        params = self._parameter_ids(row[0])
        by_id = {number: definition for number, definition in params.values()}
        record = MeasurementRecord(
            equipment_name=row[1],
            imported_at=datetime.fromisoformat(row[2]),
            source_file=row[3],
            warnings=json.loads(row[4]),
            aux=json.loads(row[5]),
            record_id=msr_number,
        )
        for prm_number, text in self._conn.execute(
                "SELECT prm_number, val_text FROM t_val_values"
                " WHERE msr_number = ? ORDER BY val_number", (msr_number,)):
            definition = by_id[prm_number]
            record.set_value(definition.category, definition.name,
                             make_typed(definition, text))
        current: Optional[int] = None
        points: list[tuple[float, float]] = []
        for prm_number, x, y in self._conn.execute(
                "SELECT prm_number, ser_x, ser_y FROM t_ser_series"
                " WHERE msr_number = ? ORDER BY ser_number", (msr_number,)):
            if prm_number != current:
                if current is not None:
                    d = by_id[current]
                    record.series.append(ChannelSeries(d.name, d.unit, tuple(points)))
                current, points = prm_number, []
            points.append((x, y))
        if current is not None:
            d = by_id[current]
            record.series.append(ChannelSeries(d.name, d.unit, tuple(points)))
        return record

    def query(self, equipment: Optional[str] = None, operator: Optional[str] = None,
              parameter: Optional[tuple[ConceptCategory, str, str]] = None,
              date_from: Optional[Union[Date, str]] = None,
              date_to: Optional[Union[Date, str]] = None) -> list[RecordSummary]:
        """Record summaries matching all given filters, ordered by import time.

        ``parameter`` is (category, name, canonical value text); the date
        range applies to the measurement's Date parameter value.
        """
        sql = ["SELECT m.msr_number, q.eqp_name, m.msr_imported_at, m.msr_sourcefile,"
               " (SELECT v.val_text FROM t_val_values v"
               "   JOIN t_prm_parameters p ON p.prm_number = v.prm_number"
               "   WHERE v.msr_number = m.msr_number AND p.prm_name = 'Operator')"
               " FROM t_msr_measurements m"
               " JOIN t_eqp_equipments q ON q.eqp_number = m.eqp_number WHERE 1=1"]
        args: list = []
        if equipment is not None:
            sql.append("AND q.eqp_name = ?")
            args.append(equipment)
        if operator is not None:
            sql.append("AND EXISTS (SELECT 1 FROM t_val_values v"
                       " JOIN t_prm_parameters p ON p.prm_number = v.prm_number"
                       " WHERE v.msr_number = m.msr_number"
                       " AND p.prm_name = 'Operator' AND v.val_text = ?)")
            args.append(operator)
        if parameter is not None:
            category, name, text = parameter
            sql.append("AND EXISTS (SELECT 1 FROM t_val_values v"
                       " JOIN t_prm_parameters p ON p.prm_number = v.prm_number"
                       " WHERE v.msr_number = m.msr_number AND p.prm_name = ?"
                       " AND p.prm_category = ? AND v.val_text = ?)")
            args.extend([name, category.value, text])
        for bound, op in ((date_from, ">="), (date_to, "<=")):
            if bound is not None:
                text = bound.strftime("%Y/%m/%d") if isinstance(bound, Date) else bound
                sql.append("AND EXISTS (SELECT 1 FROM t_val_values v"
                           " JOIN t_prm_parameters p ON p.prm_number = v.prm_number"
                           " WHERE v.msr_number = m.msr_number"
                           f" AND p.prm_name = 'Date' AND v.val_text {op} ?)")
                args.append(text)
        sql.append("ORDER BY m.msr_imported_at, m.msr_number")
        return [
            RecordSummary(record_id=r[0], equipment_name=r[1],
                          imported_at=datetime.fromisoformat(r[2]),
                          source_file=r[3], operator=r[4])
            for r in self._conn.execute(" ".join(sql), args)
        ]

    def delete_measurement(self, msr_number: int) -> None:
        """Remove the measurement with its value and series rows."""
        with self._conn as conn:
            found = conn.execute(
                "SELECT 1 FROM t_msr_measurements WHERE msr_number = ?",
                (msr_number,)).fetchone()
            if found is None:
                raise NotFound(f"measurement {msr_number}")
            conn.execute("DELETE FROM t_ser_series WHERE msr_number = ?", (msr_number,))
            conn.execute("DELETE FROM t_val_values WHERE msr_number = ?", (msr_number,))
            conn.execute("DELETE FROM t_msr_measurements WHERE msr_number = ?", (msr_number,))

    def update_value(self, msr_number: int, parameter: str, raw: str) -> None:
        """Replace one parameter value with the canonical rendering of ``raw``.

        The new text must pass the parameter's declared value grammar;
        on TypeMismatch the stored value is unchanged.
        """
        row = self._conn.execute(
            "SELECT eqp_number FROM t_msr_measurements WHERE msr_number = ?",
            (msr_number,)).fetchone()
        if row is None:
            raise NotFound(f"measurement {msr_number}")
        params = self._parameter_ids(row[0])
        if parameter not in params:
            raise UnknownParameter(parameter)
        prm_number, definition = params[parameter]
        text = render_canonical(make_typed(definition, raw))
        with self._conn as conn:
            updated = conn.execute(
                "UPDATE t_val_values SET val_text = ?"
                " WHERE msr_number = ? AND prm_number = ?",
                (text, msr_number, prm_number)).rowcount
            if not updated:
                conn.execute(
                    "INSERT INTO t_val_values (msr_number, prm_number, val_text)"
                    " VALUES (?,?,?)", (msr_number, prm_number, text))


def _integrity(exc: sqlite3.IntegrityError) -> Exception:
    if "FOREIGN KEY" in str(exc).upper():
        return ForeignKeyViolation(str(exc))
    return DuplicateKey(str(exc))
