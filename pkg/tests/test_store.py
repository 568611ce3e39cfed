import dataclasses
import random
import sqlite3
from datetime import datetime

import pytest

from lvmforge import (
    ConceptCategory,
    MeasurementRecord,
    ParsingBinding,
    init_schema,
    map_lvm_to_record,
    render_canonical,
)
from lvmforge.errors import (
    DuplicateKey,
    ForeignKeyViolation,
    NotFound,
    SchemaVersionMismatch,
    StorageUnavailable,
    TypeMismatch,
    UnknownEquipment,
    UnknownParameter,
)

EXPECTED_TABLES = {
    "t_eqp_equipments", "t_psf_parsingfunction", "t_efe_equipmentfileextension",
    "t_prm_parameters", "t_msr_measurements", "t_val_values", "t_ser_series",
}


def table_names(store):
    return {r[0] for r in store._conn.execute(
        "SELECT name FROM sqlite_master WHERE type='table' AND name NOT LIKE 'sqlite_%'")}


def count(store, table):
    return store._conn.execute(f"SELECT count(*) FROM {table}").fetchone()[0]


def orphan_counts(store):
    orphans = {}
    for child, parent in (("t_val_values", "t_msr_measurements"),
                          ("t_ser_series", "t_msr_measurements")):
        orphans[child] = store._conn.execute(
            f"SELECT count(*) FROM {child} c LEFT JOIN {parent} p"
            " ON p.msr_number = c.msr_number WHERE p.msr_number IS NULL").fetchone()[0]
    orphans["t_efe"] = store._conn.execute(
        "SELECT count(*) FROM t_efe_equipmentfileextension e"
        " LEFT JOIN t_eqp_equipments q ON q.eqp_number = e.eqp_number"
        " LEFT JOIN t_psf_parsingfunction p ON p.psf_number = e.psf_number"
        " WHERE q.eqp_number IS NULL OR p.psf_number IS NULL").fetchone()[0]
    return orphans


@pytest.fixture()
def annex_record(annex1_doc, sytherm3):
    return map_lvm_to_record(annex1_doc, sytherm3, source_file="annex1.lvm",
                             imported_at=datetime(2024, 3, 1, 10, 0, 0))


def test_init_fresh(tmp_path):
    with init_schema(tmp_path / "fresh.db") as store:
        assert table_names(store) == EXPECTED_TABLES
        assert all(count(store, t) == 0 for t in EXPECTED_TABLES)


def test_init_idempotent(tmp_path, sytherm3):
    path = tmp_path / "store.db"
    with init_schema(path) as store:
        store.put_equipment(sytherm3)
    with init_schema(path) as store:
        assert store.list_equipment() == ["SYTHERM"]


def test_init_version_mismatch(tmp_path):
    path = tmp_path / "store.db"
    init_schema(path).close()
    conn = sqlite3.connect(path)
    conn.execute("PRAGMA user_version = 99")
    conn.commit()
    conn.close()
    with pytest.raises(SchemaVersionMismatch):
        init_schema(path)


def test_init_foreign_database(tmp_path):
    path = tmp_path / "foreign.db"
    conn = sqlite3.connect(path)
    conn.execute("CREATE TABLE unrelated (x)")
    conn.commit()
    conn.close()
    with pytest.raises(SchemaVersionMismatch):
        init_schema(path)


def test_init_unavailable_path(tmp_path):
    with pytest.raises(StorageUnavailable):
        init_schema(tmp_path / "missing-dir" / "store.db")


def test_put_equipment_parameter_rows(store, sytherm3):
    store.put_equipment(sytherm3)
    # §III.B recount: X_Value + 3 channels + 3 Measurement + 9 Experiment
    assert count(store, "t_prm_parameters") == 16


def test_put_equipment_duplicate(store, sytherm3):
    store.put_equipment(sytherm3)
    with pytest.raises(DuplicateKey):
        store.put_equipment(sytherm3)


def test_equipment_roundtrip(store, sytherm3):
    store.put_equipment(sytherm3)
    assert store.get_equipment("SYTHERM") == sytherm3


def test_binding_before_procedure(store, sytherm3):
    store.put_equipment(sytherm3)
    binding = ParsingBinding("LVM_PARSING_LVM", "SYTHERM", "LVM_PARSING", "lvm")
    with pytest.raises(ForeignKeyViolation):
        store.put_binding(binding)


def test_binding_roundtrip(store, sytherm3):
    store.put_equipment(sytherm3)
    store.put_procedure("LVM_PARSING")
    binding = ParsingBinding("LVM_PARSING_LVM", "SYTHERM", "LVM_PARSING", "lvm")
    assert store.put_binding(binding) == "LVM_PARSING_LVM"
    assert store.list_bindings() == [binding]
    with pytest.raises(DuplicateKey):
        store.put_binding(binding)


def test_put_measurement_rows(store, sytherm3, annex_record):
    store.put_equipment(sytherm3)
    store.put_measurement(annex_record)
    operator = store._conn.execute(
        "SELECT val_text FROM t_val_values v JOIN t_prm_parameters p"
        " ON p.prm_number = v.prm_number WHERE p.prm_name = 'Operator'").fetchone()
    assert operator == ("Profesor",)
    assert count(store, "t_ser_series") == 48


def test_put_measurement_no_series(store, sytherm3):
    store.put_equipment(sytherm3)
    record = MeasurementRecord(equipment_name="SYTHERM",
                               imported_at=datetime(2024, 1, 1), source_file="x.lvm")
    store.put_measurement(record)
    assert count(store, "t_ser_series") == 0


def test_put_measurement_unknown_equipment(store, annex_record):
    with pytest.raises(UnknownEquipment):
        store.put_measurement(annex_record)


def test_put_measurement_undeclared_parameter(store, sytherm3, annex_record):
    store.put_equipment(sytherm3)
    from lvmforge import TypedValue, ValueType
    annex_record.set_value(ConceptCategory.WARNINGS, "Ghost",
                           TypedValue("boo", ValueType.STRING))
    with pytest.raises(UnknownParameter):
        store.put_measurement(annex_record)
    assert count(store, "t_msr_measurements") == 0  # atomic rollback
    assert count(store, "t_val_values") == 0


def test_measurement_roundtrip(store, sytherm3, annex_record):
    store.put_equipment(sytherm3)
    msr = store.put_measurement(annex_record)
    loaded = store.get_measurement(msr)
    assert dataclasses.replace(loaded, record_id=None) == annex_record
    assert loaded.record_id == msr


def test_get_missing(store):
    with pytest.raises(NotFound):
        store.get_measurement(123)


def test_query_filters(store, sytherm3, annex_record):
    store.put_equipment(sytherm3)
    msr = store.put_measurement(annex_record)
    assert [s.record_id for s in store.query(operator="Profesor")] == [msr]
    assert store.query(operator="Nobody") == []
    assert [s.record_id for s in store.query(equipment="SYTHERM",
                                             date_from="2013/02/06",
                                             date_to="2013/02/06")] == [msr]
    assert store.query(date_to="2013/02/05") == []
    assert store.query(equipment="OTHER") == []
    param = (ConceptCategory.EXPERIMENT_CHARACTERIZATION, "Channels", "3")
    assert [s.record_id for s in store.query(parameter=param)] == [msr]
    summary = store.query()[0]
    assert summary.operator == "Profesor"
    assert summary.source_file == "annex1.lvm"


def test_delete_then_get(store, sytherm3, annex_record):
    store.put_equipment(sytherm3)
    msr = store.put_measurement(annex_record)
    store.delete_measurement(msr)
    with pytest.raises(NotFound):
        store.get_measurement(msr)
    with pytest.raises(NotFound):
        store.delete_measurement(msr)
    assert orphan_counts(store) == {"t_val_values": 0, "t_ser_series": 0, "t_efe": 0}


def test_update_value_readback(store, sytherm3, annex_record):
    store.put_equipment(sytherm3)
    msr = store.put_measurement(annex_record)
    store.update_value(msr, "Operator", "Student1")
    loaded = store.get_measurement(msr)
    assert loaded.get_value(ConceptCategory.MEASUREMENT_INFORMATION, "Operator") == "Student1"


def test_update_value_type_mismatch(store, sytherm3, annex_record):
    store.put_equipment(sytherm3)
    msr = store.put_measurement(annex_record)
    with pytest.raises(TypeMismatch):
        store.update_value(msr, "Channels", "abc")
    loaded = store.get_measurement(msr)
    assert loaded.get_value(ConceptCategory.EXPERIMENT_CHARACTERIZATION, "Channels") == 3


def test_update_value_missing_record(store, sytherm3):
    store.put_equipment(sytherm3)
    with pytest.raises(NotFound):
        store.update_value(999, "Operator", "X")


def test_update_value_undeclared_parameter(store, sytherm3, annex_record):
    store.put_equipment(sytherm3)
    msr = store.put_measurement(annex_record)
    with pytest.raises(UnknownParameter):
        store.update_value(msr, "Ghost", "X")


def test_query_matches_brute_force(store, sytherm3, annex1_doc):
    store.put_equipment(sytherm3)
    rng = random.Random(11)
    ids = []
    for i in range(8):
        record = map_lvm_to_record(
            annex1_doc, sytherm3, source_file=f"run{i}.lvm",
            imported_at=datetime(2024, 3, 1 + i, 9, 0, 0))
        store.put_measurement(record)
        msr = store.query()[-1].record_id
        store.update_value(msr, "Operator", rng.choice(["Profesor", "Student1"]))
        store.update_value(msr, "Date", f"2013/02/{rng.randint(1, 9):02d}")
        ids.append(msr)

    records = {i: store.get_measurement(i) for i in ids}
    mi = ConceptCategory.MEASUREMENT_INFORMATION

    def brute(operator=None, date_from=None, date_to=None):
        keep = []
        for i, r in sorted(records.items()):
            op = r.get_value(mi, "Operator")
            dt = render_canonical(r.values[mi]["Date"])
            if operator is not None and op != operator:
                continue
            if date_from is not None and dt < date_from:
                continue
            if date_to is not None and dt > date_to:
                continue
            keep.append((r.imported_at, i))
        return [i for _, i in sorted(keep)]

    for kwargs in ({"operator": "Profesor"},
                   {"date_from": "2013/02/03"},
                   {"date_to": "2013/02/05"},
                   {"operator": "Student1", "date_from": "2013/02/02", "date_to": "2013/02/08"}):
        assert [s.record_id for s in store.query(**kwargs)] == brute(**kwargs), kwargs
