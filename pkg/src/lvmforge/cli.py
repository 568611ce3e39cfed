"""Command-line surface for the measurement-integration pipeline.

One binary with subcommands covering the whole workflow: create a store,
install equipment models and parsing procedures, import .lvm files, list,
view, edit and remove measurements, export to XML/CSV, run the
thermocouple analyses and generate synthetic .lvm files.

Success output is line oriented and stable; record ids are printed alone
on the final line.  Domain errors map to one ``ERROR <Name>: <detail>``
line on stderr and exit code 1; usage errors exit with 2.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from datetime import datetime

from . import analysis, export as export_mod, store as store_mod
from .errors import IndexOutOfRange, LvmforgeError
from .ingest import ParsingProcedure, Registry, LVM_HANDLER_ID, import_file
from .lvm import HighPrecisionTime, serialize_lvm
from .model import (
    ConceptCategory,
    builtin_sytherm,
    parse_model_definition,
    render_canonical,
    render_model_definition,
)

log = logging.getLogger("lvmforge")

STORE_ENV_VAR = "LVMFORGE_STORE"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lvmforge",
        description="Import, store, analyze and export LabVIEW .lvm measurements.")
    parser.add_argument("--store", help=f"store path (or set {STORE_ENV_VAR})")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("init", help="create an empty store").set_defaults(func=_cmd_init)

    model = sub.add_parser("model", help="manage equipment models")
    model_sub = model.add_subparsers(dest="model_command", required=True)
    p = model_sub.add_parser("add", help="install a model from a definition file")
    p.add_argument("definition_file")
    p.set_defaults(func=_cmd_model_add)
    model_sub.add_parser("list", help="list installed models").set_defaults(
        func=_cmd_model_list)
    p = model_sub.add_parser("show", help="print a model definition")
    p.add_argument("name")
    p.set_defaults(func=_cmd_model_show)
    p = model_sub.add_parser("sytherm", help="install the built-in SYTHERM model")
    p.add_argument("--channels", type=int, default=3)
    p.set_defaults(func=_cmd_model_sytherm)

    proc = sub.add_parser("proc", help="manage parsing procedures")
    proc_sub = proc.add_subparsers(dest="proc_command", required=True)
    p = proc_sub.add_parser("add", help="register a parsing procedure")
    p.add_argument("name")
    p.set_defaults(func=_cmd_proc_add)

    p = sub.add_parser("bind", help="bind a procedure to (equipment, extension)")
    p.add_argument("equipment")
    p.add_argument("procedure")
    p.add_argument("extension")
    p.set_defaults(func=_cmd_bind)

    p = sub.add_parser("import", help="import a measurement file")
    p.add_argument("file")
    p.add_argument("--equipment", required=True)
    p.set_defaults(func=_cmd_import)

    p = sub.add_parser("list", help="list stored measurements")
    p.add_argument("--equipment")
    p.add_argument("--operator")
    p.add_argument("--from", dest="date_from", metavar="YYYY/MM/DD")
    p.add_argument("--to", dest="date_to", metavar="YYYY/MM/DD")
    p.set_defaults(func=_cmd_list)

    p = sub.add_parser("show", help="print one measurement")
    p.add_argument("id", type=int)
    p.set_defaults(func=_cmd_show)

    p = sub.add_parser("edit", help="replace one parameter value")
    p.add_argument("id", type=int)
    p.add_argument("parameter")
    p.add_argument("value")
    p.set_defaults(func=_cmd_edit)

    p = sub.add_parser("remove", help="delete one measurement")
    p.add_argument("id", type=int)
    p.set_defaults(func=_cmd_remove)

    p = sub.add_parser("export", help="export a measurement")
    p.add_argument("id", type=int)
    p.add_argument("--format", required=True, choices=["xml", "csv"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export)

    analyze = sub.add_parser("analyze", help="thermocouple analyses")
    analyze_sub = analyze.add_subparsers(dest="analyze_command", required=True)
    p = analyze_sub.add_parser("nonlin", help="per-point non-linearity error")
    p.add_argument("id", type=int)
    p.add_argument("--refs", required=True, metavar="T1,T2,...",
                   help="reference temperatures, one per sample")
    p.add_argument("--tref30", type=float, required=True,
                   help="reference temperature at ambient")
    p.add_argument("--channel", type=int, default=0)
    p.set_defaults(func=_cmd_analyze_nonlin)
    p = analyze_sub.add_parser("tau", help="first-order time constant")
    p.add_argument("id", type=int)
    p.add_argument("--channel", type=int, default=0)
    p.set_defaults(func=_cmd_analyze_tau)

    p = sub.add_parser("gen", help="generate a synthetic first-order .lvm file")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--y0", type=float, required=True)
    p.add_argument("--yinf", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--channels", type=int, default=1)
    p.add_argument("--operator", default="Generator")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(message)s")
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except FileNotFoundError as exc:
        print(f"ERROR FileNotFound: {exc}", file=sys.stderr)
        return 1
    except LvmforgeError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


def _store_path(args) -> str:
    path = args.store or os.environ.get(STORE_ENV_VAR)
    if not path:
        print(f"ERROR MissingStorePath: pass --store or set {STORE_ENV_VAR}",
              file=sys.stderr)
        raise SystemExit(2)
    return path


def _open_store(args) -> store_mod.Store:
    path = _store_path(args)
    log.debug("opening store %s", path)
    return store_mod.init_schema(path)


# -- command handlers -----------------------------------------------------

def _cmd_init(args) -> int:
    path = _store_path(args)
    store_mod.init_schema(path).close()
    print(path)
    return 0


def _cmd_model_add(args) -> int:
    with open(args.definition_file, encoding="utf-8") as handle:
        model = parse_model_definition(handle.read())
    with _open_store(args) as store:
        store.put_equipment(model)
    print(model.name)
    return 0


def _cmd_model_list(args) -> int:
    with _open_store(args) as store:
        for name in store.list_equipment():
            print(name)
    return 0


def _cmd_model_show(args) -> int:
    with _open_store(args) as store:
        print(render_model_definition(store.get_equipment(args.name)), end="")
    return 0


def _cmd_model_sytherm(args) -> int:
    model = builtin_sytherm(args.channels)
    with _open_store(args) as store:
        store.put_equipment(model)
    print(model.name)
    return 0


def _cmd_proc_add(args) -> int:
    procedure = ParsingProcedure(args.name, LVM_HANDLER_ID)
    with _open_store(args) as store:
        registry = Registry.from_store(store)
        registry.register_procedure(procedure)
        store.put_procedure(procedure)
    print(procedure.name)
    return 0


def _cmd_bind(args) -> int:
    with _open_store(args) as store:
        registry = Registry.from_store(store)
        binding = registry.bind(args.equipment, args.procedure, args.extension)
        store.put_binding(binding)
    print(binding.binding_name)
    return 0


def _cmd_import(args) -> int:
    with _open_store(args) as store:
        registry = Registry.from_store(store)
        record_id = import_file(args.file, args.equipment, registry, store)
    print(record_id)
    return 0


def _cmd_list(args) -> int:
    with _open_store(args) as store:
        summaries = store.query(equipment=args.equipment, operator=args.operator,
                                date_from=args.date_from, date_to=args.date_to)
    for s in summaries:
        print(f"{s.record_id}\t{s.equipment_name}\t{s.imported_at.isoformat()}"
              f"\t{s.source_file}\t{s.operator or ''}")
    return 0


def _cmd_show(args) -> int:
    with _open_store(args) as store:
        record = store.get_measurement(args.id)
    print(f"id: {record.record_id}")
    print(f"equipment: {record.equipment_name}")
    print(f"imported-at: {record.imported_at.isoformat()}")
    print(f"source-file: {record.source_file}")
    for category in ConceptCategory:
        values = record.values.get(category)
        if not values:
            continue
        print(f"[{category.value}]")
        for name, typed in values.items():
            print(f"  {name} = {render_canonical(typed)}")
    for series in record.series:
        unit = f" ({series.unit})" if series.unit else ""
        print(f"series {series.name}{unit}: {len(series.points)} points")
    for warning in record.warnings:
        print(f"warning: {warning}")
    return 0


def _cmd_edit(args) -> int:
    with _open_store(args) as store:
        store.update_value(args.id, args.parameter, args.value)
    return 0


def _cmd_remove(args) -> int:
    with _open_store(args) as store:
        store.delete_measurement(args.id)
    return 0


def _cmd_export(args) -> int:
    with _open_store(args) as store:
        record = store.get_measurement(args.id)
    exporter = export_mod.export_xml if args.format == "xml" else export_mod.export_csv
    with open(args.out, "wb") as handle:
        handle.write(exporter(record))
    print(args.out)
    return 0


def _series_points(store, record_id, channel):
    record = store.get_measurement(record_id)
    if not 0 <= channel < len(record.series):
        raise IndexOutOfRange(f"channel {channel} of {len(record.series)}")
    return record.series[channel].points


def _cmd_analyze_nonlin(args) -> int:
    with _open_store(args) as store:
        points = _series_points(store, args.id, args.channel)
    refs = tuple(float(r) for r in args.refs.split(","))
    data = analysis.NonLinearityInput(
        t_real=tuple(y for _, y in points), t_ref=refs, t_ref30=args.tref30)
    for eps in analysis.nonlinearity_error(data):
        print(f"{eps:.6f}")
    return 0


def _cmd_analyze_tau(args) -> int:
    with _open_store(args) as store:
        points = _series_points(store, args.id, args.channel)
    response = analysis.step_response_from_series(points)
    tau = analysis.estimate_time_constant(response)
    print(f"{tau:.6f}")
    return 0


def _cmd_gen(args) -> int:
    now = datetime.now()
    responses = [
        analysis.synth_first_order(args.y0, args.yinf, args.tau, args.dt, args.n,
                                   noise_sigma=args.noise, seed=args.seed + k)
        for k in range(args.channels)
    ]
    time = HighPrecisionTime(now.hour, now.minute, now.second, f"{now.microsecond:06d}")
    doc = analysis.gen_lvm(responses, operator=args.operator,
                           date=now.date(), time=time)
    with open(args.out, "wb") as handle:
        handle.write(serialize_lvm(doc))
    print(args.out)
    return 0


if __name__ == "__main__":
    main()
