"""The full ingestion path: registry dispatch, import, query, edit.

A parsing procedure is bound to an (equipment, extension) pair; importing
a file resolves the procedure from the filename, maps the parsed document
onto the equipment model and persists one measurement record.
"""

import tempfile
from datetime import date
from pathlib import Path

from lvmforge import (
    ConceptCategory,
    HighPrecisionTime,
    ParsingProcedure,
    Registry,
    StepResponse,
    builtin_sytherm,
    gen_lvm,
    import_file,
    init_schema,
    serialize_lvm,
)
from lvmforge.errors import NoBinding
from lvmforge.ingest import LVM_HANDLER_ID

workdir = Path(tempfile.mkdtemp(prefix="lvmforge-demo-"))

# Write a three-channel measurement file to import.
responses = [
    StepResponse(tuple((float(k), 23.4 + 0.2 * c) for k in range(8)),
                 23.4 + 0.2 * c, 23.4 + 0.2 * c)
    for c in range(3)
]
doc = gen_lvm(responses, operator="Profesor", date=date(2013, 2, 6),
              time=HighPrecisionTime(17, 49, 40, "8399038314819335937"))
lvm_path = workdir / "run1.lvm"
lvm_path.write_bytes(serialize_lvm(doc))

# Registry setup: the SYTHERM model, the LVM_PARSING procedure, one binding.
# The binding name follows the PROCEDURE_EXT convention.
registry = Registry()
registry.add_equipment(builtin_sytherm(3))
registry.register_procedure(ParsingProcedure("LVM_PARSING", LVM_HANDLER_ID))
binding = registry.bind("SYTHERM", "LVM_PARSING", "lvm")
print("binding:", binding.binding_name)
print("resolve run1.lvm ->", registry.resolve("SYTHERM", "run1.lvm").name)
try:
    registry.resolve("SYTHERM", "run1.csv")
except NoBinding as exc:
    print("resolve run1.csv ->", type(exc).__name__, "-", exc)

# Persist everything in one store and run the import.
store = init_schema(workdir / "lab.db")
store.put_equipment(registry.get_equipment("SYTHERM"))
store.put_procedure("LVM_PARSING")
store.put_binding(binding)

record_id = import_file(lvm_path, "SYTHERM", registry, store)
print("imported record:", record_id)

record = store.get_measurement(record_id)
mi = ConceptCategory.MEASUREMENT_INFORMATION
print("operator:", record.get_value(mi, "Operator"))
print("series:  ", [(s.name, len(s.points)) for s in record.series])
print("warnings:", record.warnings)

# Queries work on the stored parameter values.
print("by operator:", [s.record_id for s in store.query(operator="Profesor")])
print("by date:    ", [s.record_id for s in store.query(date_from="2013/01/01",
                                                        date_to="2013/12/31")])

# Edit and remove round out the measurement lifecycle.
store.update_value(record_id, "Operator", "Student1")
print("after edit:", store.get_measurement(record_id).get_value(mi, "Operator"))
store.delete_measurement(record_id)
print("after remove:", [s.record_id for s in store.query()])
store.close()
