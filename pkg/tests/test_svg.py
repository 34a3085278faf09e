import xml.etree.ElementTree as ET

from gluegen.report.svg import heatmap_svg, loss_curve_svg, metric_bars_svg, projection_svg

NS = {"svg": "http://www.w3.org/2000/svg"}


def _parse(text):
    return ET.fromstring(text)


def test_loss_curve_point_per_epoch_with_values():
    rows = [
        {"epoch": 1, "total": "5.5", "kl": "0.2", "beta": "0.0"},
        {"epoch": 2, "total": "4.25", "kl": "0.3", "beta": "0.02"},
        {"epoch": 3, "total": "3.0", "kl": "0.4", "beta": "0.04"},
    ]
    root = _parse(loss_curve_svg(rows))
    assert root.findall(".//svg:polyline", NS)
    points = root.findall(".//svg:circle", NS)
    assert len(points) == 3
    assert [p.get("data-epoch") for p in points] == ["1", "2", "3"]
    assert [p.get("data-total") for p in points] == ["5.5", "4.25", "3.0"]


def test_metric_bars_with_undefined():
    text = metric_bars_svg({"validity": 0.75, "novelty": None})
    root = _parse(text)
    bars = root.findall(".//svg:rect[@data-metric]", NS)
    assert len(bars) == 1
    assert bars[0].get("data-value") == "0.75"
    assert 'data-value="undefined"' in text


def test_projection_one_element_per_point():
    points = [
        {"x": "0.1", "y": "0.5", "series": "training", "label": "CCO"},
        {"x": "-1.0", "y": "2.0", "series": "generated", "label": "CCN"},
    ]
    root = _parse(projection_svg(points))
    circles = root.findall(".//svg:circle[@data-series]", NS)
    squares = root.findall(".//svg:rect[@data-series]", NS)
    assert len(circles) == 1 and circles[0].get("data-label") == "CCO"
    assert len(squares) == 1 and squares[0].get("data-series") == "generated"
    assert squares[0].get("data-x") == "-1.0"


def test_heatmap_cells_and_scale():
    scores = {("VHL_1", "VHL"): -5.84, ("VHL_1", "CRBN"): -4.15}
    root = _parse(heatmap_svg(["VHL_1"], ["CRBN", "VHL"], scores))
    cells = root.findall(".//svg:rect[@data-compound]", NS)
    assert len(cells) == 2
    by_ligase = {c.get("data-ligase"): c.get("data-score") for c in cells}
    assert by_ligase["VHL"] == "-5.84"
    annotation = root.findall(".//svg:text[@data-scale-min]", NS)
    assert annotation and annotation[0].get("data-scale-max") == "-4.15"


def test_heatmap_single_cell_min_equals_max():
    scores = {("a", "VHL"): -5.0}
    text = heatmap_svg(["a"], ["VHL"], scores)
    root = _parse(text)
    assert len(root.findall(".//svg:rect[@data-compound]", NS)) == 1


def test_heatmap_missing_cell_marked():
    scores = {("a", "VHL"): -5.0}
    text = heatmap_svg(["a"], ["VHL", "MDM2"], scores)
    assert 'data-score="missing"' in text


def test_deterministic_output():
    rows = [{"epoch": 1, "total": "2.0", "kl": "0.1", "beta": "0.0"}]
    assert loss_curve_svg(rows) == loss_curve_svg(rows)
