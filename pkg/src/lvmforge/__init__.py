"""lvmforge: LabVIEW .lvm measurement integration toolkit.

Parse .lvm files, map them onto concept-based equipment models, persist
everything in one relational store, analyze thermocouple series and export
to XML or Excel-compatible CSV.
"""

from .analysis import (
    NonLinearityInput,
    StepResponse,
    detect_steady_state,
    estimate_time_constant,
    gen_lvm,
    nonlinearity_error,
    step_response_from_series,
    synth_first_order,
)
from .export import ExportFormat, export_csv, export_xml
from .ingest import (
    ChannelSeries,
    MeasurementRecord,
    ParsingBinding,
    ParsingProcedure,
    Registry,
    import_file,
    map_lvm_to_record,
    register_handler,
)
from .lvm import (
    DataRow,
    HighPrecisionTime,
    LvmDocument,
    LvmFileHeader,
    LvmSegment,
    Separator,
    TimePref,
    XColumns,
    channel_series,
    parse_lvm,
    serialize_lvm,
)
from .model import (
    ConceptCategory,
    EquipmentModel,
    ParameterDefinition,
    ParameterSource,
    TypedValue,
    ValueType,
    add_parameter,
    builtin_sytherm,
    define_equipment,
    parse_model_definition,
    register_unit,
    render_canonical,
    render_model_definition,
    validate_value,
)
from .store import RecordSummary, Store, init_schema

__version__ = "0.1.0"

__all__ = [
    "ChannelSeries",
    "ConceptCategory",
    "DataRow",
    "EquipmentModel",
    "ExportFormat",
    "HighPrecisionTime",
    "LvmDocument",
    "LvmFileHeader",
    "LvmSegment",
    "MeasurementRecord",
    "NonLinearityInput",
    "ParameterDefinition",
    "ParameterSource",
    "ParsingBinding",
    "ParsingProcedure",
    "RecordSummary",
    "Registry",
    "Separator",
    "StepResponse",
    "Store",
    "TimePref",
    "TypedValue",
    "ValueType",
    "XColumns",
    "add_parameter",
    "builtin_sytherm",
    "channel_series",
    "define_equipment",
    "detect_steady_state",
    "estimate_time_constant",
    "export_csv",
    "export_xml",
    "gen_lvm",
    "import_file",
    "init_schema",
    "map_lvm_to_record",
    "nonlinearity_error",
    "parse_lvm",
    "parse_model_definition",
    "register_handler",
    "register_unit",
    "render_canonical",
    "render_model_definition",
    "serialize_lvm",
    "step_response_from_series",
    "synth_first_order",
    "validate_value",
]
