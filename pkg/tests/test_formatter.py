import json
import math

import numpy as np
import pytest

from errors import ToleranceError
from formatter import error_object, format_report, render, structured_report
from reports import FunctionalReport


@pytest.fixture
def report():
    report = FunctionalReport("virial_suite", context={"omega": 0.9, "box": {"order": 8}})
    report.values.update({"Q": 12.5, "E0": np.float64(7.25)})
    report.add("virial_a", "omega Q = (2/3) sum I + V", 1.0, 1.0 + 1e-9, 1e-5)
    report.add("virial_c", "sum I = omega Q + int (g - m) s", 2.0, 2.5, 1e-5)
    report.add("md_virial", "reported only", 1.0, 3.0, 1e-5, asserted=False)
    report.rows.append({"t": 0.0, "E_v": math.inf})
    return report


def test_text_report_lists_values_and_checks(report):
    text = format_report(report, {"model": {"omega": 0.9}})
    lines = text.splitlines()
    assert lines[0] == "[virial_suite]"
    assert "pass=False" in lines
    assert "Q=12.5" in lines
    assert "context.box.order=8" in lines
    assert "config.model.omega=0.9" in lines
    assert "failed=virial_c" in lines
    assert "report" in text and "FAIL" in text


def test_structured_report_entries(report):
    payload = structured_report(report)
    assert payload["pass"] is False
    by_name = {entry["name"]: entry for entry in payload["entries"]}
    assert by_name["E0"]["value"] == 7.25
    assert by_name["virial_a"]["pass"] is True
    assert by_name["virial_c"]["pass"] is False
    assert by_name["md_virial"]["pass"] is None
    assert payload["rows"][0]["E_v"] == "inf"


def test_render_structured_is_json(report):
    parsed = json.loads(render([report, report], "structured", {"threads": 1}))
    assert len(parsed) == 2
    assert parsed[0]["config"] == {"threads": 1}


def test_render_rejects_unknown_format(report):
    with pytest.raises(ValueError):
        render([report], "xml")


def test_error_object():
    payload = error_object(ToleranceError("virial residual", 1e-3, 1e-5))
    assert payload["error"] == "ToleranceError"
    assert payload["details"] == {"achieved": 1e-3, "tolerance": 1e-5}
    assert "virial residual" in payload["message"]
    assert error_object(FileNotFoundError("gone"))["details"] == {}
