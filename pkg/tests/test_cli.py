import csv
import json
import re

import numpy as np
import pytest

from urlsentry.artifact import save_model
from urlsentry.cli import main
from urlsentry.config import PipelineConfig, build_config, parse_config_file
from urlsentry.errors import ConfigError, FeatureSpecMismatch, ThresholdOutOfRange
from urlsentry.features import FeatureSpec, featurize_many
from urlsentry.neural import TrainConfig
from urlsentry.pipeline import Dataset
from urlsentry.runner import (
    evaluate_artifact,
    filter_predictions,
    load_labeled_dataset,
    train_artifact,
)


def write_rows(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["url", "type"])
        writer.writerows(rows)
    return str(path)


@pytest.fixture
def tiny_csv(tmp_path):
    """Small labeled set with lexically distinct URLs (no feature collisions)."""
    rows = [
        ("https://www.meadow.org/articles/history.html", "benign"),
        ("https://copperfield.com/guides", "benign"),
        ("http://willowgarden.net/recipes/bread.html", "benign"),
        ("https://libraryarchive.edu/events/2024", "benign"),
        ("https://summitpress.io/reviews/cameras.html", "benign"),
        ("http://juniperatlas.org/wiki", "benign"),
        ("http://secure-payvault.tk/login?session=77812", "phishing"),
        ("http://203.0.113.9/verify/confirm.php?user=4413&token=99120", "phishing"),
        ("http://bankmail.login-harbor.gq/account/update.php", "phishing"),
        ("http://www.quarrytimber.com/index.php?option=12&task=34&id=56", "defacement"),
        ("http://198.51.100.7/setup22.exe", "malware"),
        ("http://free-codec91.xyz/download/player.exe?free=1", "malware"),
    ]
    path = write_rows(tmp_path / "tiny.csv", rows)
    feats = featurize_many([r[0] for r in rows], FeatureSpec())
    assert len(np.unique(feats, axis=0)) == len(rows), "feature collision in fixture"
    return path


class TestCmdTrain:
    def test_happy_path(self, tiny_csv, tmp_path, capsys):
        out = tmp_path / "out"
        code = main([
            "train", "--data", tiny_csv, "--out", str(out),
            "--classifier", "knn", "--seed", "5",
        ])
        assert code == 0
        assert (out / "model.json").exists()
        printed = capsys.readouterr().out
        assert "rows used: 12" in printed
        assert "seed: 5" in printed

    def test_unknown_label_exits_one(self, tmp_path, capsys):
        path = write_rows(tmp_path / "bad.csv", [("http://a.com", "weird_label")])
        code = main(["train", "--data", path, "--out", str(tmp_path / "o")])
        assert code == 1
        assert "UnknownLabel" in capsys.readouterr().err

    def test_same_seed_identical_artifacts_modulo_timestamp(self, tiny_csv, tmp_path):
        for name in ("a", "b"):
            code = main([
                "train", "--data", tiny_csv, "--out", str(tmp_path / name),
                "--classifier", "gb", "--seed", "3",
            ])
            assert code == 0
        d1 = json.loads((tmp_path / "a" / "model.json").read_text())
        d2 = json.loads((tmp_path / "b" / "model.json").read_text())
        d1.pop("created_at")
        d2.pop("created_at")
        assert d1 == d2

    def test_missing_data_flag(self, tmp_path, capsys):
        assert main(["train", "--out", str(tmp_path)]) == 1

    def test_missing_file_exits_one(self, tmp_path):
        assert main(["train", "--data", str(tmp_path / "nope.csv")]) == 1


class TestCmdPredict:
    def make_knn_artifact(self, tiny_csv, tmp_path, k=1):
        cfg = PipelineConfig(
            classifier="knn", knn_k=k, seed=1,
            autoencoder=TrainConfig(epochs=5, hidden_sizes=(6,)),
        )
        dataset, _ = load_labeled_dataset(tiny_csv, cfg)
        artifact = train_artifact(dataset, cfg)
        path = tmp_path / "knn.json"
        save_model(artifact, str(path))
        return str(path)

    def test_training_row_self_match_flagged(self, tiny_csv, tmp_path, capsys):
        model = self.make_knn_artifact(tiny_csv, tmp_path, k=1)
        url = "http://secure-payvault.tk/login?session=77812"
        code = main(["predict", "--model", model, "--out", str(tmp_path / "o"), url])
        assert code == 0
        line = [l for l in capsys.readouterr().out.splitlines() if l.startswith(url)][0]
        assert line.split("\t") == [url, "1.000000", "flagged"]

    def test_empty_input_file(self, tmp_path, tiny_csv, capsys):
        model = self.make_knn_artifact(tiny_csv, tmp_path)
        urls_file = tmp_path / "urls.txt"
        urls_file.write_text("\n\n")
        code = main(["predict", "--model", model, "--data", str(urls_file)])
        assert code == 1
        assert "no URLs" in capsys.readouterr().err

    def test_partition_conservation_and_safe_list(self, tiny_csv, tmp_path, capsys):
        model = self.make_knn_artifact(tiny_csv, tmp_path, k=3)
        urls_file = tmp_path / "urls.txt"
        inputs = [
            "https://www.meadow.org/articles/history.html",
            "",  # skipped with a warning
            "http://free-codec91.xyz/download/player.exe?free=1",
            "https://unseen-site.org/reading",
        ]
        urls_file.write_text("\n".join(inputs) + "\n")
        out = tmp_path / "o"
        code = main(["predict", "--model", model, "--data", str(urls_file),
                     "--out", str(out)])
        assert code == 0
        captured = capsys.readouterr()
        verdict_lines = [l for l in captured.out.splitlines() if "\t" in l]
        assert len(verdict_lines) == 3  # empty line dropped, rest processed
        safe = (out / "safe_urls.txt").read_text().splitlines()
        flagged = [l.split("\t")[0] for l in verdict_lines if l.endswith("flagged")]
        assert len(safe) + len(flagged) == 3
        assert "warning" in captured.err


class TestCmdEvaluate:
    def test_self_evaluation_k1_perfect(self, tiny_csv, tmp_path, capsys):
        cfg = PipelineConfig(
            classifier="knn", knn_k=1, seed=1, feature_mode="raw",
        )
        dataset, _ = load_labeled_dataset(tiny_csv, cfg)
        artifact = train_artifact(dataset, cfg)
        model_path = tmp_path / "m.json"
        save_model(artifact, str(model_path))

        code = main(["evaluate", "--model", str(model_path), "--data", tiny_csv])
        assert code == 0
        printed = capsys.readouterr().out
        match = re.search(r"accuracy\s+= (\S+)", printed)
        assert match and float(match.group(1)) == 1.0

    def test_printed_metrics_recompute_from_printed_cells(self, tiny_csv, tmp_path, capsys):
        cfg = PipelineConfig(classifier="rf", seed=2,
                             autoencoder=TrainConfig(epochs=5, hidden_sizes=(6,)))
        dataset, _ = load_labeled_dataset(tiny_csv, cfg)
        artifact = train_artifact(dataset, cfg)
        model_path = tmp_path / "m.json"
        save_model(artifact, str(model_path))

        assert main(["evaluate", "--model", str(model_path), "--data", tiny_csv]) == 0
        printed = capsys.readouterr().out
        cells = re.search(
            r"truth=benign\s+(\d+)\s+(\d+)\s+truth=malicious\s+(\d+)\s+(\d+)",
            printed,
        )
        tn, fp, fn, tp = (int(g) for g in cells.groups())
        recall = float(re.search(r"recall\s+= (\S+)", printed).group(1))
        fpr = float(re.search(r"false_positive_rate = (\S+)", printed).group(1))
        assert abs(recall - (tp / (tp + fn) if tp + fn else 0.0)) < 1e-12
        assert abs(fpr - (fp / (fp + tn) if fp + tn else 0.0)) < 1e-12

    def test_feature_spec_mismatch(self, tiny_csv):
        cfg = PipelineConfig(classifier="knn", knn_k=1, feature_mode="raw")
        dataset, _ = load_labeled_dataset(tiny_csv, cfg)
        artifact = train_artifact(dataset, cfg)
        wide_spec = FeatureSpec(keywords=FeatureSpec().keywords + ("aa", "bb"))
        wide = Dataset(
            featurize_many(dataset.urls, wide_spec), dataset.labels, dataset.urls
        )
        with pytest.raises(FeatureSpecMismatch):
            evaluate_artifact(artifact, wide)


class TestCmdCompareAndReport:
    def test_compare_emits_three_files(self, tiny_csv, tmp_path):
        out = tmp_path / "cmp"
        code = main([
            "compare", "--data", tiny_csv, "--out", str(out), "--seed", "11",
        ])
        assert code == 0
        csv_text = (out / "comparison.csv").read_text()
        lines = csv_text.strip().splitlines()
        assert lines[0] == "classifier,accuracy"
        assert len(lines) == 6
        for line in lines[1:]:
            acc = float(line.split(",")[1])
            assert 0.0 <= acc <= 1.0
        assert (out / "accuracy_chart.svg").exists()
        report = (out / "report.txt").read_text()
        assert "recall" in report and "false_positive_rate" in report

    def test_report_from_csv(self, tiny_csv, tmp_path):
        out = tmp_path / "cmp"
        assert main(["compare", "--data", tiny_csv, "--out", str(out)]) == 0
        out2 = tmp_path / "rep"
        code = main([
            "report", "--data", str(out / "comparison.csv"), "--out", str(out2),
        ])
        assert code == 0
        assert (out2 / "accuracy_chart.svg").exists()


class TestConfigHandling:
    def test_config_file_and_flag_override(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("seed = 9\nthreshold = 0.8\nfeatures = raw\n")
        values = parse_config_file(str(cfg_file))
        cfg = build_config(values, {"seed": 13})
        assert cfg.seed == 13  # flag wins
        assert cfg.threshold == 0.8
        assert cfg.feature_mode == "raw"

    def test_unknown_key_rejected(self, tmp_path):
        cfg_file = tmp_path / "bad.cfg"
        cfg_file.write_text("mystery = 1\n")
        with pytest.raises(ConfigError):
            parse_config_file(str(cfg_file))

    def test_unknown_key_via_cli_exits_one(self, tmp_path, tiny_csv, capsys):
        cfg_file = tmp_path / "bad.cfg"
        cfg_file.write_text("mystery = 1\n")
        code = main(["train", "--data", tiny_csv, "--config", str(cfg_file)])
        assert code == 1
        assert "ConfigError" in capsys.readouterr().err

    def test_bad_threshold_rejected(self):
        with pytest.raises(ConfigError):
            build_config({}, {"threshold": 1.5})

    def test_comments_and_blanks_ok(self, tmp_path):
        cfg_file = tmp_path / "ok.cfg"
        cfg_file.write_text("# comment\n\nseed = 4  # trailing\n")
        assert parse_config_file(str(cfg_file)) == {"seed": "4"}


class TestFilterPredictions:
    def test_basic_partition(self):
        safe, flagged = filter_predictions([("a", 0.9), ("b", 0.2)], 0.5)
        assert flagged == [("a", 0.9)]
        assert safe == [("b", 0.2)]

    def test_threshold_zero_flags_everything(self):
        safe, flagged = filter_predictions([("a", 0.0), ("b", 1.0)], 0.0)
        assert safe == [] and len(flagged) == 2

    def test_raising_threshold_shrinks_flagged(self):
        rng = np.random.default_rng(0)
        items = [(f"u{i}", float(c)) for i, c in enumerate(rng.uniform(size=100))]
        _, low = filter_predictions(items, 0.3)
        _, high = filter_predictions(items, 0.7)
        assert set(high).issubset(set(low))

    def test_out_of_range_threshold(self):
        with pytest.raises(ThresholdOutOfRange):
            filter_predictions([("a", 0.5)], 1.2)
