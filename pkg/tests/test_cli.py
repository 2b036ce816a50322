import csv
import json

from click.testing import CliRunner

from betaopt.cli import main, parse_beta


def run(*args):
    result = CliRunner().invoke(main, list(args))
    return result


def report(*args):
    result = run(*args)
    assert result.exit_code == 0, result.output
    return json.loads(result.output)


def test_parse_beta_forms():
    assert abs(float(parse_beta("cubic:1,-2,-2,2")) - 2.4811943040920) < 1e-12
    assert abs(float(parse_beta("word:2(10)")) - 2.4811943040920) < 1e-12
    assert float(parse_beta("5/2")) == 2.5
    assert abs(float(parse_beta("golden")) - 1.6180339887) < 1e-9


def test_classify_cubic():
    doc = report("classify", "--beta", "cubic:1,-2,-2,2")
    assert doc["command"] == "classify"
    assert doc["config"]["schema"] == "betaopt-report/1"
    assert sorted(doc) == ["command", "config", "diagnostics", "results", "version"]
    text = json.dumps(doc["results"])
    assert "NonSimple" in text and "2(10)" in text


def test_expand():
    doc = report("expand", "--beta", "2", "--x", "1/3", "--n", "6")
    assert "010101" in json.dumps(doc["results"])


def test_parry_solve_rejects_word():
    result = run("parry-solve", "--word", "2(2)")
    assert result.exit_code == 3
    assert "not_a_parry_word" in result.output


def test_q_bracket_two_identity():
    doc = report("q-bracket", "--beta", "2", "--phi", "identity", "--depth", "10", "--max-period", "8")
    res = doc["results"]
    assert res["lower"][0] <= 1 <= res["upper"][1]
    assert res["witness"] == "(1)" and res["lower_T"] == 0.875


def test_output_is_deterministic(tmp_path):
    args = ["q-bracket", "--beta", "golden", "--phi", "trig:seed=2", "--depth", "10", "--max-period", "8"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("-o", str(a), *args).exit_code == 0
    assert run("-o", str(b), *args).exit_code == 0
    assert a.read_bytes() == b.read_bytes()


def test_orbits_count():
    doc = report("orbits", "--beta", "2", "--max-period", "4", "--map", "U")
    # necklaces of length 1..4 over two letters: 2 + 1 + 2 + 3
    assert doc["results"]["count"] == 8
    assert doc["results"]["by_period"] == {"1": 2, "2": 1, "3": 2, "4": 3}


def test_revealed_csv(tmp_path):
    path = tmp_path / "grid.csv"
    result = run(
        "revealed", "--beta", "cubic:1,-2,-2,2", "--phi", "pair-witness", "--grid", "512", "--depth", "10",
        "--max-period", "6", "--csv", str(path),
    )
    assert result.exit_code == 0, result.output
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["node", "left_value", "right_value"]
    assert len(rows) > 500


def test_shadow_and_constants():
    doc = report("shadow", "--beta", "cubic:1,-2,-2,2", "--orbit-word", "1")
    assert doc["results"]["within_bounds"] is True
    doc = report("perturb-constants", "--beta", "cubic:1,-2,-2,2", "--orbit-word", "1")
    assert abs(doc["results"]["r"] - 0.0437) < 1e-4


def test_shadow_error_exit():
    result = run("shadow", "--beta", "cubic:1,-2,-2,2", "--orbit-word", "1", "--gamma-offset", "0.6")
    assert result.exit_code == 3
    assert "not_shadowable" in result.output


def test_nonsimple_between():
    doc = report("nonsimple-between", "--beta1", "cubic:1,-2,-2,2", "--beta2", "5/2")
    assert "210110(00002)" in json.dumps(doc["results"])


def test_expanding_subaction_with_pack(tmp_path):
    path = tmp_path / "u.csv"
    doc = report(
        "expanding-subaction", "--phi", "dist:0;coef=-1,metric=circle", "--grid", "512", "--depth", "12",
        "--orbit", "0", "--csv", str(path),
    )
    assert "82425" in json.dumps(doc["results"])
    assert path.exists()


def test_bad_beta_is_usage_error():
    result = run("classify", "--beta", "banana:1")
    assert result.exit_code == 2
