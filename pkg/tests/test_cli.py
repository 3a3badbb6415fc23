import json

import pytest

from adiabatic_sat.cli import EXIT_CONFIG, EXIT_IO, main, parse_n_range
from adiabatic_sat.instances import Instance


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_n_range():
    assert parse_n_range("7-9") == (7, 8, 9)
    assert parse_n_range("7..9") == (7, 8, 9)
    assert parse_n_range("7,11") == (7, 11)
    assert parse_n_range("8") == (8,)


def test_gen_writes_unique_sa_instances(tmp_path, capsys):
    code, out, _ = run(capsys, "gen", "--problem", "ec3", "--n", "8", "--count", "5", "--seed", "42",
                       "--out", str(tmp_path / "a"))
    assert code == 0
    files = sorted((tmp_path / "a").glob("*.json"))
    assert len(files) == 5
    for f in files:
        assert len(Instance.from_json(f.read_text()).satisfying) == 1
    assert out.count("satisfying=1") == 5
    run(capsys, "gen", "--problem", "ec3", "--n", "8", "--count", "5", "--seed", "42", "--out", str(tmp_path / "b"))
    for f in files:
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_gen_multi(tmp_path, capsys):
    code, _, _ = run(capsys, "gen", "--problem", "ec3multi", "--n", "10", "--count", "3", "--seed", "7",
                     "--out", str(tmp_path))
    assert code == 0
    for f in tmp_path.glob("*.json"):
        assert 6 <= len(json.loads(f.read_text())["satisfying"]) <= 9


def test_gen_requires_seed(capsys):
    with pytest.raises(SystemExit) as err:
        main(["gen", "--problem", "ec3", "--n", "8"])
    assert err.value.code == 2


@pytest.fixture
def instance_file(tmp_path, capsys):
    main(["gen", "--problem", "ec3", "--n", "4", "--count", "1", "--seed", "1", "--out", str(tmp_path)])
    capsys.readouterr()
    return next(tmp_path.glob("*.json"))


def test_evolve_zero_time(instance_file, capsys):
    code, out, _ = run(capsys, "evolve", "--instance", str(instance_file), "--T", "0")
    assert code == 0
    assert json.loads(out)["probability"] == pytest.approx(1 / 16, abs=1e-12)


def test_evolve_adiabatic_limit(instance_file, capsys, tmp_path):
    dump = tmp_path / "psi.bin"
    code, out, _ = run(capsys, "evolve", "--instance", str(instance_file), "--T", "1000", "--dump-state", str(dump))
    assert code == 0
    assert json.loads(out)["probability"] > 0.99
    assert dump.stat().st_size == 16 * 16


def test_evolve_scrambled(instance_file, capsys):
    _, plain, _ = run(capsys, "evolve", "--instance", str(instance_file), "--T", "10")
    code, scram, _ = run(capsys, "evolve", "--instance", str(instance_file), "--T", "10", "--scramble-seed", "3")
    assert code == 0
    assert json.loads(plain)["probability"] != json.loads(scram)["probability"]


def test_evolve_accuracy_failure_exit_code(instance_file, capsys):
    code, _, err = run(capsys, "evolve", "--instance", str(instance_file), "--T", "10", "--max-steps", "2")
    assert code == 4
    assert "accuracy failure" in err


def test_missing_file_is_io_error(tmp_path, capsys):
    code, _, _ = run(capsys, "evolve", "--instance", str(tmp_path / "nope.json"), "--T", "1")
    assert code == EXIT_IO


def test_out_of_range_n_is_config_error(tmp_path, capsys):
    code, _, _ = run(capsys, "gen", "--problem", "ec3", "--n", "25", "--seed", "1", "--out", str(tmp_path))
    assert code == EXIT_CONFIG


def test_hunt_single_instance(instance_file, capsys):
    code, out, _ = run(capsys, "hunt", "--instance", str(instance_file))
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("problem,n,instance_index")
    assert lines[1].split(",")[6] in ("in-window", "bracket-jump")


def test_hunt_family_and_fit(tmp_path, capsys):
    code, out, _ = run(capsys, "hunt", "--problem", "ec3", "--n-range", "6-8", "--count", "3", "--seed", "2",
                       "--out", str(tmp_path), "--workers", "1")
    assert code == 0
    assert (tmp_path / "hunts.csv").exists()
    code, out, _ = run(capsys, "fit", "--model", "exponential", "--in", str(tmp_path / "summary.csv"))
    assert code == 0
    row = out.splitlines()[1].split(",")
    assert row[0] == "EC3" and row[1] == "exponential" and row[4] == ""
    assert float(row[3]) > 1


def test_experiment_fig6_small(tmp_path, capsys):
    code, out, _ = run(capsys, "experiment", "--preset", "fig6", "--seed", "1", "--out", str(tmp_path),
                       "--n-range", "7-8", "--count", "4", "--workers", "1")
    assert code == 0
    sweeps = (tmp_path / "fig6_sweeps.csv").read_text().splitlines()
    assert len(sweeps) == 1 + 8
    assert all(line.split(",")[4] == "5.82" for line in sweeps[1:])
    first = (tmp_path / "fig6_sweeps.csv").read_bytes()
    run(capsys, "experiment", "--preset", "fig6", "--seed", "1", "--out", str(tmp_path),
        "--n-range", "7-8", "--count", "4", "--workers", "1")
    assert (tmp_path / "fig6_sweeps.csv").read_bytes() == first


def test_experiment_fig1_then_fig4_from_fit_file(tmp_path, capsys):
    code, _, _ = run(capsys, "experiment", "--preset", "fig1", "--seed", "1", "--out", str(tmp_path),
                     "--n-range", "6-9", "--count", "2", "--workers", "1")
    assert code == 0
    for name in ("fig1_hunts.csv", "fig1_summary.csv", "fig1_fits.csv"):
        assert (tmp_path / name).exists()
    code, _, _ = run(capsys, "experiment", "--preset", "fig4", "--seed", "1", "--out", str(tmp_path),
                     "--n-range", "7", "--count", "2", "--fit", str(tmp_path / "fig1_fits.csv"), "--workers", "1")
    assert code == 0
    assert (tmp_path / "fig4_summary.csv").exists()


def test_experiment_requires_seed(capsys):
    with pytest.raises(SystemExit):
        main(["experiment", "--preset", "fig1"])
