import io
import random

import pytest

from lcurve.errors import DataError, ParseError
from lcurve.fit import FitConfig
from lcurve.io import (
    Report,
    dumps_reports,
    format_dataset,
    loads_reports,
    parse_dataset,
    parse_dataset_text,
    render_summary_table,
    round_half_even,
)
from lcurve.model import CurveSummary, ModelVariant, PowerLawParams
from lcurve.synth import DEFAULT_SCHEDULE, SyntheticSpec, generate
from lcurve.variance import VarianceModel

OBS = generate(SyntheticSpec(PowerLawParams(8, 150, -0.5), VarianceModel(0.02, 4.0), DEFAULT_SCHEDULE, 7))


def test_round_trip_dataset():
    text = format_dataset({"synthetic": OBS})
    parsed = parse_dataset_text(text)
    assert list(parsed) == ["synthetic"]
    assert parsed["synthetic"] == OBS
    assert parsed["synthetic"].n_sizes == 5 and parsed["synthetic"].n_obs == 31
    assert format_dataset(parsed) == text


def test_parse_from_path_and_stream(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text(format_dataset({"a": OBS}), encoding="utf-8")
    assert parse_dataset(path)["a"] == OBS
    assert parse_dataset(io.StringIO(path.read_text()))["a"] == OBS


def test_order_insensitive():
    lines = format_dataset({"a": OBS, "b": OBS}).splitlines()
    header, rows = lines[0], lines[1:]
    random.Random(3).shuffle(rows)
    assert parse_dataset_text("\n".join([header] + rows)) == parse_dataset_text("\n".join(lines))
    # without a fold column too
    no_fold = ["curve_id,n,error"] + [",".join(r.split(",")[:3]) for r in rows]
    shuffled = no_fold[:1] + sorted(no_fold[1:], reverse=True)
    assert parse_dataset_text("\n".join(no_fold)) == parse_dataset_text("\n".join(shuffled))


def test_empty_and_comments():
    assert parse_dataset_text("# nothing here\ncurve_id,n,error\n") == {}
    assert parse_dataset_text("") == {}
    d = parse_dataset_text("# size_unit=per_class\ncurve_id,n,error\nm,100,20.5\nm,400,15\n")
    assert d["m"].size_unit == "per_class" and d["m"].n_sizes == 2


@pytest.mark.parametrize(
    "body, line",
    [
        ("m,0,20.0", 3),
        ("m,abc,20.0", 3),
        ("m,100,x", 3),
        ("m,100,101", 3),
        ("m,100,-1", 3),
        ("m,100", 3),
    ],
)
def test_parse_errors_name_line(body, line):
    text = "# comment\ncurve_id,n,error\n" + body + "\n"
    with pytest.raises(ParseError) as exc:
        parse_dataset_text(text)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_duplicate_triple_rejected():
    text = "curve_id,n,error,fold\nm,100,20,0\nm,100,21,0\n"
    with pytest.raises(ParseError) as exc:
        parse_dataset_text(text)
    assert exc.value.line == 3


def test_bad_header():
    with pytest.raises(ParseError):
        parse_dataset_text("id,size,err\nm,100,20\n")


def test_fraction_flag():
    d = parse_dataset_text("curve_id,n,error\nm,100,0.205\nm,400,0.15\n", fraction=True)
    assert d["m"].groups[0].errors == (pytest.approx(20.5),)
    with pytest.raises(DataError):
        parse_dataset_text("curve_id,n,error\nm,100,20.5\n", fraction=True)


def _report(curve_id="synthetic", variant=ModelVariant.STD):
    config = FitConfig(variant)
    return Report.from_fit(curve_id, config.fit(OBS), config, 400, OBS.size_unit)


@pytest.mark.parametrize("variant", list(ModelVariant))
def test_report_round_trip_byte_identical(variant):
    text = dumps_reports([_report(variant=variant), _report("other", variant)])
    parsed = loads_reports(text)
    assert dumps_reports(parsed) == text
    assert parsed[0] == loads_reports(text)[0]
    assert parsed[0].params == _report(variant=variant).params


def test_report_schema_version_checked():
    text = dumps_reports([_report()]).replace('"schema_version": 1', '"schema_version": 99')
    with pytest.raises(DataError):
        loads_reports(text)
    with pytest.raises(ParseError):
        loads_reports("{not json")


def _fake(curve_id, e, b, g):
    r = _report(curve_id)
    from dataclasses import replace

    return replace(r, summary=CurveSummary(e, b, g, 400))


def test_summary_table_reference_example():
    table = render_summary_table([_fake("model_1", 25.3, 4.6, -0.36), _fake("model_2", 25.2, 8.4, -0.47)])
    lines = table.splitlines()
    assert len(lines) == 3
    assert lines[1].split() == ["model_1", "25.3", "4.6", "-0.36"]
    assert lines[2].split() == ["model_2", "25.2", "8.4", "-0.47"]
    csv_text = render_summary_table([_fake("model_1", 25.3, 4.6, -0.36)], fmt="csv")
    assert csv_text == "curve_id,e_N,beta_N,gamma\nmodel_1,25.3,4.6,-0.36\n"


def test_summary_table_flat_and_rounding():
    row = render_summary_table([_fake("flat", 10.0, 0.0, -0.5)], fmt="csv").splitlines()[1]
    assert row == "flat,10.0,0.0,-0.50"
    assert round_half_even(9.944, 1) == "9.9"
    assert round_half_even(0.25, 1) == "0.2"
    assert round_half_even(0.35, 1) == "0.4"
    assert round_half_even(2.675, 2) == "2.68"
    assert round_half_even(-0.04, 1) == "0.0"
