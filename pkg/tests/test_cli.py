import xml.etree.ElementTree as ET

import pytest

from lvmforge import render_model_definition, builtin_sytherm
from lvmforge.cli import run

from conftest import ANNEX1_PATH


@pytest.fixture()
def cli(tmp_path, capsys):
    store = str(tmp_path / "store.db")

    def invoke(*argv, expect=0):
        code = run(["--store", store, *argv])
        captured = capsys.readouterr()
        assert code == expect, captured.err or captured.out
        return captured

    return invoke


@pytest.fixture()
def cli_with_sytherm(cli):
    cli("init")
    cli("model", "sytherm", "--channels", "3")
    cli("proc", "add", "LVM_PARSING")
    cli("bind", "SYTHERM", "LVM_PARSING", "lvm")
    return cli


def import_annex(cli) -> str:
    out = cli("import", str(ANNEX1_PATH), "--equipment", "SYTHERM").out
    return out.strip().splitlines()[-1]


def test_init_prints_path_and_is_idempotent(cli):
    first = cli("init").out
    assert first.strip().endswith("store.db")
    cli("init")


def test_import_prints_record_id(cli_with_sytherm):
    record_id = import_annex(cli_with_sytherm)
    assert record_id.isdigit()


def test_import_wrong_extension(cli_with_sytherm, tmp_path):
    bogus = tmp_path / "annex1.csv"
    bogus.write_text("whatever\n")
    err = cli_with_sytherm("import", str(bogus), "--equipment", "SYTHERM",
                           expect=1).err
    assert err.startswith("ERROR NoBinding")


def test_import_missing_file(cli_with_sytherm, tmp_path):
    err = cli_with_sytherm("import", str(tmp_path / "nope.lvm"),
                           "--equipment", "SYTHERM", expect=1).err
    assert err.startswith("ERROR FileNotFound")


def test_bind_prints_binding_name(cli):
    cli("init")
    cli("model", "sytherm", "--channels", "3")
    cli("proc", "add", "LVM_PARSING")
    out = cli("bind", "SYTHERM", "LVM_PARSING", "lvm").out
    assert out.strip() == "LVM_PARSING_LVM"


def test_list_and_show(cli_with_sytherm):
    record_id = import_annex(cli_with_sytherm)
    listing = cli_with_sytherm("list", "--operator", "Profesor").out
    line = listing.strip().splitlines()[0].split("\t")
    assert line[0] == record_id
    assert line[1] == "SYTHERM"
    assert line[3] == "annex1.lvm"
    assert line[4] == "Profesor"
    shown = cli_with_sytherm("show", record_id).out
    assert "Operator = Profesor" in shown
    assert "series Channel_2 (CelsiusDegree): 16 points" in shown
    assert cli_with_sytherm("list", "--operator", "Nobody").out == ""


def test_edit_and_remove(cli_with_sytherm):
    record_id = import_annex(cli_with_sytherm)
    cli_with_sytherm("edit", record_id, "Operator", "Student1")
    assert "Operator = Student1" in cli_with_sytherm("show", record_id).out
    err = cli_with_sytherm("edit", record_id, "Channels", "abc", expect=1).err
    assert err.startswith("ERROR TypeMismatch")
    cli_with_sytherm("remove", record_id)
    err = cli_with_sytherm("show", record_id, expect=1).err
    assert err.startswith("ERROR NotFound")


def test_export_csv_matches_annex(cli_with_sytherm, tmp_path):
    record_id = import_annex(cli_with_sytherm)
    out_path = tmp_path / "annex.csv"
    cli_with_sytherm("export", record_id, "--format", "csv", "--out", str(out_path))
    lines = out_path.read_text().split("\n")
    series_start = lines.index("X_Value,Channel_0,Channel_1,Channel_2")
    assert lines[series_start + 1] == "0.000000,23.400000,23.400000,23.600000"


def test_export_xml(cli_with_sytherm, tmp_path):
    record_id = import_annex(cli_with_sytherm)
    out_path = tmp_path / "annex.xml"
    cli_with_sytherm("export", record_id, "--format", "xml", "--out", str(out_path))
    root = ET.parse(out_path).getroot()
    assert root.get("equipment") == "SYTHERM"


def test_model_add_list_show(cli, tmp_path):
    cli("init")
    definition = tmp_path / "sytherm.model"
    definition.write_text(render_model_definition(builtin_sytherm(2)))
    assert cli("model", "add", str(definition)).out.strip() == "SYTHERM"
    assert cli("model", "list").out.strip() == "SYTHERM"
    shown = cli("model", "show", "SYTHERM").out
    assert "param: Channel_1|Data|Real|CelsiusDegree|File" in shown
    err = cli("model", "show", "GHOST", expect=1).err
    assert err.startswith("ERROR UnknownEquipment")


def test_gen_import_analyze_tau(cli_with_sytherm, tmp_path):
    gen_path = tmp_path / "synth.lvm"
    cli_with_sytherm("gen", "--tau", "15", "--y0", "100", "--yinf", "20",
                     "--dt", "1", "--n", "120", "--channels", "3",
                     "--out", str(gen_path))
    out = cli_with_sytherm("import", str(gen_path), "--equipment", "SYTHERM").out
    record_id = out.strip().splitlines()[-1]
    tau_out = cli_with_sytherm("analyze", "tau", record_id, "--channel", "1").out
    assert 14.5 <= float(tau_out.strip()) <= 15.5


def test_analyze_nonlin(cli_with_sytherm, tmp_path):
    gen_path = tmp_path / "flat.lvm"
    cli_with_sytherm("gen", "--tau", "1", "--y0", "52", "--yinf", "52",
                     "--dt", "1", "--n", "3", "--out", str(gen_path))
    out = cli_with_sytherm("import", str(gen_path), "--equipment", "SYTHERM",
                           expect=1)
    # 1-channel file against the 3-channel model
    assert out.err.startswith("ERROR ChannelCountMismatch")

    cli_with_sytherm("model", "sytherm", "--channels", "1", expect=1)  # duplicate name
    err = cli_with_sytherm("analyze", "nonlin", "999", "--refs", "50",
                           "--tref30", "300", expect=1).err
    assert err.startswith("ERROR NotFound")


def test_analyze_nonlin_values(cli, tmp_path):
    cli("init")
    cli("model", "sytherm", "--channels", "1")
    cli("proc", "add", "LVM_PARSING")
    cli("bind", "SYTHERM", "LVM_PARSING", "lvm")
    gen_path = tmp_path / "flat.lvm"
    cli("gen", "--tau", "1", "--y0", "52", "--yinf", "52", "--dt", "1", "--n", "3",
        "--out", str(gen_path))
    record_id = cli("import", str(gen_path), "--equipment", "SYTHERM").out.strip().splitlines()[-1]
    out = cli("analyze", "nonlin", record_id, "--refs", "50,50,50", "--tref30", "300").out
    assert out.splitlines() == ["0.800000", "0.800000", "0.800000"]


def test_usage_error_exit_code(cli):
    assert run(["no-such-command"]) == 2
    assert run([]) == 2


def test_missing_store_path(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("LVMFORGE_STORE", raising=False)
    assert run(["list"]) == 2
    assert "MissingStorePath" in capsys.readouterr().err


def test_store_env_var(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("LVMFORGE_STORE", str(tmp_path / "env.db"))
    assert run(["init"]) == 0
    capsys.readouterr()
    assert run(["list"]) == 0
