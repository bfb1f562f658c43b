import csv
import json

import numpy as np
import pytest

from app.cli import build_parser, main, with_seed
from app.network.model import load_checkpoint
from app.network.training import evaluate_loss
from app.pipeline import commands
from app.pipeline.features import scatter_regions
from app.scatternet.filters import build_filter_bank
from app.schemas.network import TrainConfig


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


def write_config(path, synthetic_dir, workdir, **extra):
    lines = {
        "DATASET_PATH": synthetic_dir / "annotations.jsonl",
        "BOXES_PATH": synthetic_dir / "boxes.jsonl",
        "MODELS_DIR": workdir / "models",
        "OUTPUTS_DIR": workdir / "outputs",
        "SCATTER__RESOLUTION_FACTORS": "[1.0]",
        "NET__CONV_WIDTHS": "[2,2,3,3]",
        "NET__FC1_WIDTH": 8,
        "TRAIN__EPOCHS": 1,
        "TRAIN__DROP_EPOCH": 0,
        "TRAIN__BASE_LR": 0.01,
        "TRAIN__LR_AFTER_DROP": 0.001,
        "PRIORS__MAX_ITEMS": 6,
        "PRIORS__PATCHES_PER_LAYER": 300,
    }
    lines.update(extra)
    path.write_text("".join(f"{key}={value}\n" for key, value in lines.items()))
    return str(path)


class TestEndToEnd:
    def test_full_chain(self, pipeline_settings):
        settings = pipeline_settings

        paths = commands.cmd_train_priors(settings)
        assert sorted(paths) == ["L3", "L4", "L5", "L6"]
        assert all(p.exists() for p in paths.values())
        assert settings.scatter_calibration_path.exists()

        result = commands.cmd_train_pose(settings)
        curve = read_csv(settings.outputs_dir / "loss_curve_structural_prior.csv")
        assert curve[0] == ["epoch", "train_loss", "val_loss"]
        assert len(curve) == 1 + settings.train.epochs
        assert not result.diverged

        # la perte enregistrée se retrouve en rechargeant le checkpoint
        net, header = load_checkpoint(settings.pose_checkpoint)
        regions = commands.load_regions(settings)
        parts = commands.region_split(regions, settings.seed)
        val_x = scatter_regions(
            regions.images[list(parts.val)], build_filter_bank(), commands._scatter_config(settings)
        )
        val_y = commands.region_targets(regions, settings)[list(parts.val)]
        assert evaluate_loss(net, val_x, val_y) == header["val_loss"]

        pck = commands.cmd_eval_pose(settings, [0.0, 5.0, 10.0])
        assert np.all(np.diff(pck.mean) >= 0)
        summary = json.loads((settings.outputs_dir / "pck_summary.json").read_text())
        assert summary["reference_mean_at_5"] == commands.REFERENCE_PCK_AT_5
        assert 0.0 <= summary["mean_at_5"] <= 100.0

        model = commands.cmd_train_svm(settings, "ground-truth")
        assert settings.svm_model_path.with_suffix(".json").exists()
        angles = read_csv(settings.outputs_dir / "angles_train.csv")
        assert len(angles[0]) == 28
        assert model.pairs_

        report = commands.cmd_eval_activity(settings, "model")
        assert 0.0 <= report.overall_accuracy <= 100.0
        assert report.confusion.shape == (6, 6)
        for name in ("activity_accuracy.csv", "accuracy_by_persons.csv",
                     "accuracy_by_violent_count.csv", "confusion_matrix.csv", "activity_summary.json"):
            assert (settings.outputs_dir / name).exists()

        results = commands.cmd_infer(settings, overlay=True)
        assert len(results) == 6
        for inferred in results:
            for person in inferred.persons:
                assert len(person.keypoints) == 14
                assert person.violent == (person.label.value != "neutral")
        written = json.loads((settings.outputs_dir / "results.json").read_text())
        assert [r["image"] for r in written] == [r.image for r in results]
        assert any((settings.outputs_dir / "overlays").iterdir())

    def test_random_init_curve_name(self, settings_factory):
        settings = settings_factory(train=TrainConfig(epochs=1, drop_epoch=0, base_lr=1e-2, lr_after_drop=1e-3))
        commands.cmd_train_pose(settings, random_init=True)
        assert (settings.outputs_dir / "loss_curve_random.csv").exists()

    def test_cross_validated_svm(self, settings_factory):
        settings = settings_factory()
        regions = commands.load_regions(settings)
        labels = [regions.labels[i] for i in commands.region_split(regions, settings.seed).train]
        if min(labels.count(l) for l in set(labels)) < 5:
            pytest.skip("jeu réduit trop petit pour 5 plis")
        commands.cmd_train_svm(settings, "ground-truth", C_grid=[1.0, 14.0], gamma_grid=[2e-5])
        assert len(read_csv(settings.outputs_dir / "svm_cv.csv")) == 3

    def test_infer_without_boxes(self, settings_factory, tmp_path):
        boxes = tmp_path / "empty_boxes.jsonl"
        boxes.write_text(json.dumps({"image": "images/00000.png", "boxes": []}) + "\n")
        settings = settings_factory(boxes_path=boxes, models_dir=tmp_path / "no_models")
        results = commands.cmd_infer(settings)
        assert results[0].persons == []

    def test_generate_data(self, settings_factory, tmp_path):
        settings = settings_factory(
            dataset_path=tmp_path / "generated" / "annotations.jsonl",
            boxes_path=tmp_path / "generated" / "boxes.jsonl",
        )
        records = commands.cmd_generate_data(settings, 3)
        assert len(records) == 3
        assert settings.dataset_path.exists() and settings.boxes_path.exists()
        assert (tmp_path / "generated" / records[0].image).exists()


class TestCli:
    def test_parser_defaults(self):
        args = build_parser().parse_args(["eval-activity"])
        assert args.poses == "model"
        assert args.split == "pose"
        assert build_parser().parse_args(["train-svm"]).poses == "ground-truth"

    def test_seed_propagates(self, pipeline_settings):
        seeded = with_seed(pipeline_settings, 9)
        assert (seeded.seed, seeded.train.seed, seeded.priors.seed, seeded.synthetic.seed) == (9, 9, 9, 9)

    def test_generate_and_train_priors(self, synthetic_dir, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        data = tmp_path / "data"
        config = write_config(
            tmp_path / "run.env", synthetic_dir, tmp_path,
            DATASET_PATH=data / "annotations.jsonl", BOXES_PATH=data / "boxes.jsonl",
            SYNTHETIC__PERSONS_PER_IMAGE="[2,3]",
        )
        assert main(["generate-data", "--config", config, "--size", "3", "--seed", "4"]) == 0
        assert main(["train-priors", "--config", config]) == 0
        assert (tmp_path / "models" / "priors" / "L6.json").exists()

    def test_missing_dataset(self, synthetic_dir, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        config = write_config(
            tmp_path / "run.env", synthetic_dir, tmp_path, DATASET_PATH=tmp_path / "absent.jsonl"
        )
        assert main(["train-priors", "--config", config]) == 2

    def test_invalid_config(self, synthetic_dir, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        config = write_config(tmp_path / "run.env", synthetic_dir, tmp_path, TRAIN__EPOCHS=-1)
        assert main(["train-pose", "--config", config]) == 2

    def test_divergence_exit_code(self, synthetic_dir, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        config = write_config(
            tmp_path / "run.env", synthetic_dir, tmp_path,
            TRAIN__BASE_LR="1e300", TRAIN__LR_AFTER_DROP="1e300",
        )
        assert main(["train-pose", "--random-init", "--config", config]) == 3
        assert (tmp_path / "outputs" / "loss_curve_random.csv").exists()


@pytest.mark.slow
def test_synthetic_activity_with_ground_truth_poses(settings_factory, tmp_path):
    from app.schemas.dataset import SyntheticConfig

    settings = settings_factory(
        dataset_path=tmp_path / "large" / "annotations.jsonl",
        boxes_path=tmp_path / "large" / "boxes.jsonl",
        synthetic=SyntheticConfig(seed=1),
    )
    commands.cmd_generate_data(settings, 200)
    commands.cmd_train_svm(settings, "ground-truth", protocol="activity")
    report = commands.cmd_eval_activity(settings, "ground-truth", protocol="activity")
    assert report.overall_accuracy >= 95.0
