import csv
import json

import pytest
from click.testing import CliRunner

from conftest import write_tsv
from main import cli

SYNTH_CONFIG = """\
users=300
social_groups=12
topical_groups=12
social_mean_size=6
topical_mean_size=12
detected_groups=10
vocabulary=200
terms_min=20
terms_max=120
background_degree=3
"""


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def synth_dir(runner, tmp_path):
    config = tmp_path / "synth.env"
    config.write_text(SYNTH_CONFIG, encoding="utf-8")
    out = tmp_path / "synth"
    result = runner.invoke(cli, ["synth", "generate", "--config", str(config), "--seed", "7", "--out", str(out)])
    assert result.exit_code == 0, result.output
    return out


def _metrics(runner, corpus_dir, out, threads=1):
    return runner.invoke(
        cli,
        [
            "metrics",
            "--interactions", str(corpus_dir / "interactions.tsv"),
            "--groups", str(corpus_dir / "groups.tsv"),
            "--terms", str(corpus_dir / "terms.tsv"),
            "--out", str(out),
            "--threads", str(threads),
        ],
    )


def test_help(runner):
    result = runner.invoke(cli, ["--help"])
    assert result.exit_code == 0
    assert "pipeline" in result.output


def test_missing_required_option_is_a_usage_error(runner):
    assert runner.invoke(cli, ["metrics", "--groups", "g.tsv"]).exit_code == 1


def test_overlap_without_seed_is_a_usage_error(runner, corpus_files, tmp_path):
    result = runner.invoke(
        cli,
        ["overlap", "--detected", str(corpus_files["groups"]), "--declared", str(corpus_files["groups"]),
         "--out", str(tmp_path / "o.json")],
    )
    assert result.exit_code == 1


def test_validate_clean_corpus(runner, corpus_files, tmp_path):
    out = tmp_path / "validation.json"
    result = runner.invoke(
        cli,
        ["validate"]
        + [arg for role in ("interactions", "groups", "terms", "labels") for arg in (f"--{role}", str(corpus_files[role]))]
        + ["--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["summary"]["nodes"] == 6
    assert report["manifest"]["command"] == "validate"
    assert (tmp_path / "validation.json.manifest.json").exists()


def test_contact_with_photo_is_a_data_error(runner, corpus_files, tmp_path):
    bad = write_tsv(tmp_path / "bad.tsv", [("a", "b", "contact", "p9", "100")])
    result = runner.invoke(cli, ["validate", "--interactions", str(bad), "--groups", str(corpus_files["groups"])])
    assert result.exit_code == 2


def test_undecodable_interactions_are_a_data_error(runner, corpus_files, tmp_path):
    bad = tmp_path / "interactions.tsv"
    bad.write_bytes(b"a\tb\tcomment\tp1\t1\n\xff\xfe\tb\tcomment\tp2\t2\n")
    result = runner.invoke(cli, ["validate", "--interactions", str(bad), "--groups", str(corpus_files["groups"])])
    assert result.exit_code == 2


def test_missing_input_file_is_a_data_error(runner, corpus_files, tmp_path):
    result = runner.invoke(
        cli, ["validate", "--interactions", str(tmp_path / "absent.tsv"), "--groups", str(corpus_files["groups"])]
    )
    assert result.exit_code == 2


def test_metrics_do_not_depend_on_threads(runner, synth_dir, tmp_path):
    one, many = tmp_path / "m1.csv", tmp_path / "m4.csv"
    assert _metrics(runner, synth_dir, one, threads=1).exit_code == 0
    assert _metrics(runner, synth_dir, many, threads=4).exit_code == 0
    assert one.read_bytes() == many.read_bytes()


def test_cross_validation_report_does_not_depend_on_threads(runner, synth_dir, tmp_path):
    features = tmp_path / "metrics.csv"
    assert _metrics(runner, synth_dir, features).exit_code == 0

    reports = []
    for threads in (1, 4):
        out = tmp_path / f"eval_{threads}.json"
        result = runner.invoke(
            cli,
            [
                "predict", "cv",
                "--features", str(features),
                "--labels", str(synth_dir / "labels.tsv"),
                "--seed", "42",
                "--folds", "3",
                "--trees", "20",
                "--out", str(out),
                "--threads", str(threads),
            ],
        )
        assert result.exit_code == 0, result.output
        reports.append(out.read_bytes())
    assert reports[0] == reports[1]

    report = json.loads(reports[0])
    assert report["manifest"]["seed"] == 42
    assert "threads" not in report["manifest"]
    sidecar = json.loads((tmp_path / "eval_4.json.manifest.json").read_text(encoding="utf-8"))
    assert sidecar["threads"] == 4


def test_train_then_apply(runner, synth_dir, tmp_path):
    features, model, predictions = tmp_path / "metrics.csv", tmp_path / "model.json", tmp_path / "pred.csv"
    assert _metrics(runner, synth_dir, features).exit_code == 0
    result = runner.invoke(
        cli,
        ["predict", "train", "--features", str(features), "--labels", str(synth_dir / "labels.tsv"),
         "--seed", "1", "--trees", "10", "--model", str(model)],
    )
    assert result.exit_code == 0, result.output
    result = runner.invoke(cli, ["predict", "apply", "--model", str(model), "--features", str(features),
                                 "--out", str(predictions)])
    assert result.exit_code == 0, result.output

    with open(predictions, encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 34
    assert {r["prediction"] for r in rows} <= {"social", "topical"}
    assert all(0.0 <= float(r["probability_social"]) <= 1.0 for r in rows)


def test_predict_score_writes_every_group(runner, synth_dir, tmp_path):
    features, scores = tmp_path / "metrics.csv", tmp_path / "scores.csv"
    assert _metrics(runner, synth_dir, features).exit_code == 0
    result = runner.invoke(
        cli,
        ["predict", "score", "--features", str(features), "--labels", str(synth_dir / "labels.tsv"),
         "--out", str(scores)],
    )
    assert result.exit_code == 0, result.output
    assert "AUC" in result.output
    assert len(scores.read_text(encoding="utf-8").splitlines()) == 35


def test_pipeline_without_labels_runs_score_only(runner, corpus_files, tmp_path):
    config = tmp_path / "pipeline.env"
    config.write_text(
        f"interactions={corpus_files['interactions']}\ngroups={corpus_files['groups']}\nterms={corpus_files['terms']}\n",
        encoding="utf-8",
    )
    out = tmp_path / "out"
    result = runner.invoke(cli, ["pipeline", "--config", str(config), "--seed", "3", "--out", str(out), "--threads", "1"])

    assert result.exit_code == 0, result.output
    assert (out / "metrics.csv").exists()
    assert (out / "scores.csv").exists()
    assert not (out / "eval_report.json").exists()
    assert (out / "overlap_report.json").exists()
    assert json.loads((out / "analysis_report.json").read_text(encoding="utf-8"))["groups"] == 3


def test_pipeline_with_labels_writes_evaluation(runner, synth_dir, tmp_path):
    config = tmp_path / "pipeline.env"
    config.write_text(
        "".join(f"{role}={synth_dir / (role + '.tsv')}\n" for role in ("interactions", "groups", "terms", "labels"))
        + "folds=3\ntrees=10\ntop_k=3\n",
        encoding="utf-8",
    )
    out = tmp_path / "out"
    result = runner.invoke(cli, ["pipeline", "--config", str(config), "--seed", "5", "--out", str(out), "--threads", "2"])

    assert result.exit_code == 0, result.output
    report = json.loads((out / "eval_report.json").read_text(encoding="utf-8"))
    for method in ("score", "classifier", "classifier_chi2_top3"):
        assert 0.0 <= report["summary"][method]["auc"] <= 1.0
    assert report["manifest"]["command"] == "pipeline predict"
    assert not (out / "scores.csv").exists()
    for name in ("metrics.csv", "overlap_report.json", "analysis_report.json"):
        assert (out / name).exists()


def test_pipeline_without_seed_is_a_usage_error(runner, corpus_files, tmp_path):
    config = tmp_path / "pipeline.env"
    config.write_text(f"interactions={corpus_files['interactions']}\ngroups={corpus_files['groups']}\n", encoding="utf-8")
    assert runner.invoke(cli, ["pipeline", "--config", str(config)]).exit_code == 1


def test_shuffle_terms_command(runner, synth_dir, tmp_path):
    out = tmp_path / "shuffled.tsv"
    result = runner.invoke(
        cli,
        ["synth", "shuffle-terms", "--groups", str(synth_dir / "groups.tsv"), "--terms", str(synth_dir / "terms.tsv"),
         "--seed", "5", "--out", str(out)],
    )
    assert result.exit_code == 0, result.output

    def total(path):
        return sum(int(line.split("\t")[3]) for line in path.read_text(encoding="utf-8").splitlines())

    assert total(out) == total(synth_dir / "terms.tsv")
