import pytest

from svmcoreset.base import read_json
from svmcoreset.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, dispatch


@pytest.fixture
def data(tmp_path):
    path = str(tmp_path / "blobs.csv")
    assert dispatch(["gen", "--n", "200", "--d", "2", "--separation", "4", "--seed", "1", "--out", path]) == EXIT_OK
    return path


def test_gen_writes_data_and_provenance(data):
    with open(data) as f:
        rows = f.read().splitlines()

    assert len(rows) == 200
    assert len(rows[0].split(",")) == 3

    record = read_json(f"{data}.provenance.json")
    assert record["dataset"] == {"n": 200, "d": 2}


def test_coreset_command(data, tmp_path):
    out = str(tmp_path / "core.csv")

    code = dispatch(["coreset", "--data", data, "--m", "20", "--epochs", "5", "--xi", "0", "--out", out])

    assert code == EXIT_OK
    with open(out) as f:
        lines = f.read().splitlines()
    assert lines[0] == "id,v"
    assert len(lines) == 21
    assert read_json(f"{out}.json")["m"] == 20
    assert read_json(f"{out}.provenance.json")["coreset"]["m"] == 20


def test_reruns_are_byte_identical(data, tmp_path):
    outputs = []

    for name in ("a.csv", "b.csv"):
        out = str(tmp_path / name)
        args = ["coreset", "--data", data, "--m", "15", "--epochs", "5", "--xi", "0", "--seed", "4", "--out", out]
        assert dispatch(args) == EXIT_OK

        with open(out, "rb") as f:
            outputs.append(f.read())

    assert outputs[0] == outputs[1]


def test_uniform_coreset_command(data, tmp_path):
    out = str(tmp_path / "uniform.csv")

    assert dispatch(["coreset", "--data", data, "--method", "uniform", "--m", "10", "--out", out]) == EXIT_OK
    assert read_json(f"{out}.json")["builder"]["method"] == "uniform"


def test_solve_command(data, tmp_path):
    out = str(tmp_path / "w.json")

    assert dispatch(["solve", "--data", data, "--epochs", "5", "--out", out]) == EXIT_OK

    result = read_json(out)
    assert len(result["w"]) == 3
    assert result["objective"] == pytest.approx(result["check"])


def test_sensitivity_command(data, tmp_path):
    out = str(tmp_path / "sens.csv")

    assert dispatch(["sensitivity", "--data", data, "--epochs", "5", "--xi", "0", "--k", "2", "--out", out]) == EXIT_OK

    with open(out) as f:
        assert f.readline().strip() == "id,gamma,q"

    assert read_json(f"{out}.provenance.json")["summary"]["n"] == 200


def test_stream_command(data, tmp_path):
    out = str(tmp_path / "root.csv")
    args = ["stream", "--data", data, "--method", "uniform", "--leaf", "20", "--n-estimate", "200", "--out", out]

    assert dispatch(args) == EXIT_OK
    assert read_json(f"{out}.json")["builder"]["streaming"]["n_seen"] == 200


def test_bench_command(data, tmp_path):
    out = str(tmp_path / "bench.csv")
    args = [
        "bench", "--data", data, "--size-list", "10", "20", "--trials", "2", "--epochs", "5",
        "--reference-epochs", "100", "--out", out,
    ]

    assert dispatch(args) == EXIT_OK

    with open(out) as f:
        assert f.readline().strip() == "method,m,rel_err_mean,rel_err_std,t_build_s,t_train_s,t_total_s"


@pytest.mark.parametrize(
    "argv",
    [
        ["coreset", "--out", "x.csv"],
        ["gen"],
        ["gen", "--out", "x.csv", "--lambda", "0"],
        ["gen", "--out", "x.csv", "--kind", "spiral"],
        ["nonsense"],
        [],
    ],
)
def test_usage_errors(argv):
    assert dispatch(argv) == EXIT_USAGE


def test_help_is_not_an_error():
    assert dispatch(["--help"]) == EXIT_OK


def test_missing_input_file_is_a_runtime_failure(tmp_path):
    out = str(tmp_path / "w.json")

    assert dispatch(["solve", "--data", str(tmp_path / "missing.csv"), "--out", out]) == EXIT_FAILURE
