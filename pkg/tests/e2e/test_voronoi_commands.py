# --- Tests for voronoi-check ---


def test_voronoi_check_for_delta(invoke):
    code, report = invoke(["voronoi-check", "--lo", "10", "--hi", "60"])
    assert code == 0
    assert report["summary"]["checks"] == 1
    assert report["summary"]["max_residual"] < 1e-6
    (row,) = report["rows"]
    assert (row["q"], row["d"]) == (1, 1)


def test_voronoi_check_over_residues(invoke):
    argv = ["voronoi-check", "--form", "divisor", "--mmax", "20000", "--q", "3", "4", "--lo", "10", "--hi", "60"]
    code, report = invoke(argv)
    assert code == 0
    assert [(row["q"], row["d"]) for row in report["rows"]] == [(3, 1), (3, 2), (4, 1), (4, 3)]
    assert report["summary"]["max_residual"] < 1e-6


def test_voronoi_check_with_short_truncation(invoke):
    code, record = invoke(["voronoi-check", "--q", "5", "--d", "2", "--lo", "10", "--hi", "60", "--m-cut", "3"])
    assert code == 3
    assert record["status"] == "failed"
    assert record["error"] == "VoronoiResidualError"


def test_voronoi_check_with_config(invoke, config_file):
    path = config_file(
        {"source": {"m_max": 20000}, "weights": {"lo": 10.0, "hi": 60.0}, "voronoi": {"q": [5], "d": [1, 4]}}
    )
    code, report = invoke(["--config", path, "voronoi-check"])
    assert code == 0
    assert [row["d"] for row in report["rows"]] == [1, 4]
