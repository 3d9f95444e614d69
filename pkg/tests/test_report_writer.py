import csv
import json
import math

import numpy as np

from numerics.cycles import BasePath
from services.report_writer import GroupResult, ReportWriter, VerifyDocument, finite
from services.verify_manager import GroupOutcome


def test_finite_makes_plain_json_values():
    doc = finite({"z": 1 + 2j, "x": np.float64(0.5), "bad": math.inf, "arr": np.array([1, 2]), 3: (math.nan,)})
    assert doc == {"z": [1.0, 2.0], "x": 0.5, "bad": None, "arr": [1, 2], "3": [None]}


def test_document_is_written_with_its_schema(tmp_path):
    writer = ReportWriter(tmp_path / "out")
    document = VerifyDocument(
        input_digest="abc",
        groups=[GroupResult(name="bounds", passed=True, detail="ok")],
        failed=0,
    )
    path = writer.write_document("verify", document)
    assert path == tmp_path / "out" / "verify.json"
    payload = json.loads(path.read_text())
    assert payload["groups"] == [{"detail": "ok", "name": "bounds", "passed": True}]
    assert list(payload) == sorted(payload)
    schema = json.loads((tmp_path / "out" / "verify.schema.json").read_text())
    assert set(schema["properties"]) == {"input_digest", "groups", "failed"}


def test_group_result_reads_verify_outcomes():
    outcome = GroupOutcome("infinity", False, "ResampleOverflow: too long")
    result = GroupResult.model_validate(outcome)
    assert result.model_dump() == {"name": "infinity", "passed": False, "detail": "ResampleOverflow: too long"}
    assert GroupResult.model_config["from_attributes"]
    assert "Config" not in vars(GroupResult)


def test_csv_keeps_full_precision(tmp_path):
    path = ReportWriter(tmp_path).write_csv("values", ["re_t", "im_t"], [[1 / 3, 0.0], [np.float64(-2.0), 1e-17]])
    with open(path) as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["re_t", "im_t"]
    assert float(rows[1][0]) == 1 / 3
    assert float(rows[2][1]) == 1e-17


def test_plots_are_reproducible_svg(tmp_path, h_star_oval):
    writer = ReportWriter(tmp_path)
    paths = {"alpha0": BasePath([0, -1 + 0.5j, -2])}
    first = writer.plot_system("system", [-2, 2], 1 / 16, paths).read_text()
    second = writer.plot_system("system", [-2, 2], 1 / 16, paths).read_text()
    assert first.startswith("<?xml")
    assert first == second
    assert writer.plot_oval("oval", h_star_oval).exists()
