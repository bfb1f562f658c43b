"""Sous-commandes du pipeline : priors, pose, SVM, évaluations, inférence, génération"""
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.stats import spearmanr

from app.core.config import Settings
from app.core.errors import DatasetNotFoundError, DivergenceError
from app.datasets.annotations import boxes_from_annotations, load_annotations, load_boxes, save_annotations, save_boxes
from app.datasets.regions import RegionSet, extract_regions, load_gray_png, save_gray_png
from app.datasets.splits import ACTIVITY_PROPORTIONS, POSE_PROPORTIONS, DatasetSplit, split
from app.datasets.synthetic import generate_dataset
from app.network.model import create_net, init_with_priors, load_checkpoint, predict_keypoints, save_checkpoint
from app.network.training import TrainingResult, evaluate_loss, train
from app.pipeline.features import resolve_scatter_config, scatter_regions
from app.pipeline.inference import DssPipeline, draw_overlay
from app.pose.metrics import PckCurve, pck_curve
from app.pose.skeleton import angle_features, angle_vector_header, decode_keypoints
from app.priors.assemble import assemble_priors
from app.priors.pca import load_priors, orthonormality_error, save_priors
from app.scatternet.filters import build_filter_bank
from app.scatternet.transform import GrayImage, calibrate_log_offsets, save_log_offsets
from app.schemas.activity import SvmHyperparams
from app.schemas.dataset import AnnotationRecord, DetectionStubRecord, InferenceResult
from app.svm.multiclass import LABEL_ORDER, SvmModel, confusion_matrix, load_svm, save_svm, train_multiclass
from app.svm.selection import cross_validate
from app.utils.serializers import write_csv, write_json

logger = logging.getLogger(__name__)

# Valeurs de référence mesurées sur le jeu aérien réel (en %)
REFERENCE_CLASS_ACCURACY = {"punching": 89.0, "kicking": 94.0, "strangling": 85.0, "shooting": 82.0, "stabbing": 92.0}
REFERENCE_VIOLENT_COUNT_ACCURACY = {1: 94.1, 2: 90.6, 3: 88.3, 4: 87.8, 5: 84.0}
REFERENCE_OVERALL_ACCURACY = 88.8
REFERENCE_PCK_AT_5 = 87.6

DEFAULT_D_VALUES = tuple(float(d) for d in range(0, 16))
CALIBRATION_IMAGES = 200
POSE_SOURCES = ("ground-truth", "model")
PROTOCOLS = ("pose", "activity")


# ============================================
# DONNÉES
# ============================================

def load_regions(settings: Settings) -> RegionSet:
    records = load_annotations(settings.dataset_path)
    if not any(record.persons for record in records):
        raise DatasetNotFoundError(f"aucune personne annotée dans {settings.dataset_path}")
    return extract_regions(
        records, settings.dataset_path.parent, settings.region_width, settings.region_height
    )


def region_split(regions: RegionSet, seed: int, protocol: str = "pose") -> DatasetSplit:
    proportions = POSE_PROPORTIONS if protocol == "pose" else ACTIVITY_PROPORTIONS
    return split(list(range(len(regions))), seed=seed, proportions=proportions, labels=regions.labels)


def region_targets(regions: RegionSet, settings: Settings) -> np.ndarray:
    """Points clés normalisés par la taille de la région, (N, 28)"""
    size = np.array([settings.region_width, settings.region_height], dtype=np.float64)
    return (regions.keypoints / size).reshape(len(regions), -1)


def _scatter_config(settings: Settings):
    return resolve_scatter_config(settings.scatter, settings.scatter_calibration_path)


def _format_gamma(gamma: float) -> str:
    return np.format_float_positional(gamma, trim="-")


# ============================================
# PRIORS STRUCTURELS
# ============================================

def cmd_train_priors(settings: Settings) -> Dict[str, Path]:
    """Calibrer les k_j puis apprendre les priors L3-L6 sur la partie apprentissage"""
    regions = load_regions(settings)
    train_part = regions.subset(region_split(regions, settings.seed).train)
    bank = build_filter_bank()

    calibration = [GrayImage(image) for image in train_part.images[:CALIBRATION_IMAGES]]
    offsets = calibrate_log_offsets(calibration, bank, settings.scatter)
    save_log_offsets(settings.scatter_calibration_path, offsets)
    scatter_config = settings.scatter.model_copy(update={"log_offsets": offsets})

    rng = np.random.default_rng(settings.priors.seed)
    chosen = np.sort(rng.permutation(len(train_part))[:settings.priors.max_items])
    features = scatter_regions(train_part.images[chosen], bank, scatter_config)
    logger.info(f"🚀 Priors sur {len(chosen)} régions, cartes {features.shape[1:]}")

    priors = assemble_priors(features, settings.net, settings.priors)
    save_priors(priors, settings.priors_dir)
    paths = {}
    for layer_id, prior in priors.items():
        error = orthonormality_error(prior)
        status = "✅" if error < 1e-6 else "⚠️"
        logger.info(
            f"{status} {layer_id}: {prior.K} filtres, {prior.rejected_count} damiers rejetés, "
            f"orthonormalité {error:.2e}"
        )
        paths[layer_id] = settings.priors_dir / f"{layer_id}.json"
    return paths


# ============================================
# RÉSEAU DE POSE
# ============================================

def cmd_train_pose(settings: Settings, random_init: bool = False) -> TrainingResult:
    """Entraîner sur 60 %, valider sur 20 % ; écrit le checkpoint et la courbe de perte"""
    regions = load_regions(settings)
    parts = region_split(regions, settings.seed)
    targets = region_targets(regions, settings)
    bank = build_filter_bank()
    scatter_config = _scatter_config(settings)

    train_x = scatter_regions(regions.images[list(parts.train)], bank, scatter_config)
    val_x = scatter_regions(regions.images[list(parts.val)], bank, scatter_config)
    train_y, val_y = targets[list(parts.train)], targets[list(parts.val)]

    net = create_net(
        settings.net, train_x.shape[1], train_x.shape[2:],
        seed=settings.train.seed, dropout_keep=settings.train.dropout_keep,
    )
    if not random_init:
        net = init_with_priors(net, load_priors(settings.priors_dir))

    result = train(net, train_x, train_y, val_x, val_y, settings.train)
    curve_path = settings.outputs_dir / f"loss_curve_{net.init_mode}.csv"
    write_csv(curve_path, ("epoch", "train_loss", "val_loss"), result.history.to_rows())
    logger.info(f"💾 Courbe de perte: {curve_path}")
    if result.diverged:
        raise DivergenceError(result.diagnostic, history=result.history)

    # perte de validation recalculée sur les poids tels qu'ils sont stockés
    stored = result.net.rounded_to_float32()
    val_loss = evaluate_loss(stored, val_x, val_y)
    save_checkpoint(stored, settings.pose_checkpoint, result.best_epoch or 0, val_loss, settings.train.seed)
    return result


def predict_region_keypoints(net, images: np.ndarray, settings: Settings) -> np.ndarray:
    features = scatter_regions(images, build_filter_bank(), _scatter_config(settings))
    outputs = predict_keypoints(net, features)
    return np.stack([
        decode_keypoints(v, settings.region_width, settings.region_height).points for v in outputs
    ])


def cmd_eval_pose(settings: Settings, d_values: Sequence[float] = DEFAULT_D_VALUES) -> PckCurve:
    """Précision des points clés en fonction de d sur la partie test"""
    net, _ = load_checkpoint(settings.pose_checkpoint)
    regions = load_regions(settings)
    test = regions.subset(region_split(regions, settings.seed).test)
    predictions = predict_region_keypoints(net, test.images, settings)
    curve = pck_curve(predictions, test.keypoints, sorted(d_values))

    write_csv(settings.outputs_dir / "pck.csv", curve.header(), curve.rows())
    summary = {"regions": len(test), "reference_mean_at_5": REFERENCE_PCK_AT_5}
    if 5.0 in curve.d_values:
        summary["mean_at_5"] = float(curve.mean[curve.d_values.index(5.0)] * 100)
        logger.info(f"📊 PCK@5 moyen: {summary['mean_at_5']:.1f}% (référence {REFERENCE_PCK_AT_5}%)")
    write_json(settings.outputs_dir / "pck_summary.json", summary)
    return curve


# ============================================
# CLASSIFIEUR D'ACTIVITÉ
# ============================================

def region_angles(regions: RegionSet, settings: Settings, pose_source: str) -> np.ndarray:
    if pose_source == "ground-truth":
        keypoints = regions.keypoints
    else:
        net, _ = load_checkpoint(settings.pose_checkpoint)
        keypoints = predict_region_keypoints(net, regions.images, settings)
    return np.stack([angle_features(points) for points in keypoints])


def cmd_train_svm(
    settings: Settings,
    pose_source: str = "ground-truth",
    C_grid: Optional[Sequence[float]] = None,
    gamma_grid: Optional[Sequence[float]] = None,
    protocol: str = "pose",
) -> SvmModel:
    regions = load_regions(settings)
    train_part = regions.subset(region_split(regions, settings.seed, protocol).train)
    angles = region_angles(train_part, settings, pose_source)
    labels = [label.value for label in train_part.labels]
    write_csv(
        settings.outputs_dir / "angles_train.csv",
        ("label",) + angle_vector_header(),
        ([label] + list(row) for label, row in zip(labels, angles)),
    )

    hp: SvmHyperparams = settings.svm
    if C_grid or gamma_grid:
        report = cross_validate(
            angles, labels, C_grid or [hp.C], gamma_grid or [hp.gamma],
            folds=5, seed=settings.seed, base=hp,
        )
        write_csv(
            settings.outputs_dir / "svm_cv.csv",
            ("C", "gamma", "mean_accuracy", "std_accuracy", "selected"),
            report.to_rows(),
        )
        hp = report.best
    logger.info(f"🚀 SVM: C={hp.C:g}, gamma={_format_gamma(hp.gamma)}, {len(labels)} personnes")

    model = train_multiclass(angles, labels, hp)
    accuracy = model.score(angles, labels)
    logger.info(f"📊 Précision d'apprentissage: {accuracy:.1%}")
    save_svm(model, settings.svm_model_path)
    return model


@dataclass
class ActivityReport:
    overall_accuracy: float
    per_class: Dict[str, float] = field(default_factory=dict)
    per_person_count: Dict[int, float] = field(default_factory=dict)
    per_violent_count: Dict[int, float] = field(default_factory=dict)
    confusion: Optional[np.ndarray] = None
    person_count_spearman: Optional[float] = None


def _grouped_accuracy(keys: Sequence[int], correct: np.ndarray) -> Dict[int, tuple]:
    groups: Dict[int, tuple] = {}
    keys = np.asarray(keys)
    for key in sorted(set(keys.tolist())):
        mask = keys == key
        groups[int(key)] = (int(mask.sum()), float(correct[mask].mean() * 100))
    return groups


def cmd_eval_activity(settings: Settings, pose_source: str = "model", protocol: str = "pose") -> ActivityReport:
    """Tables de précision par activité, par nombre de personnes et de personnes violentes"""
    model = load_svm(settings.svm_model_path)
    regions = load_regions(settings)
    test = regions.subset(region_split(regions, settings.seed, protocol).test)
    angles = region_angles(test, settings, pose_source)
    truth = np.array([label.value for label in test.labels], dtype=object)
    predicted = model.predict(angles)
    correct = (predicted == truth).astype(float)
    out = settings.outputs_dir

    per_class = {}
    rows = []
    for label in LABEL_ORDER:
        mask = truth == label
        if not np.any(mask):
            continue
        per_class[label] = float(correct[mask].mean() * 100)
        rows.append((label, int(mask.sum()), per_class[label], REFERENCE_CLASS_ACCURACY.get(label, "")))
    write_csv(out / "activity_accuracy.csv", ("label", "count", "accuracy_pct", "reference_pct"), rows)

    by_persons = _grouped_accuracy(test.persons_per_image, correct)
    write_csv(
        out / "accuracy_by_persons.csv", ("persons_per_image", "count", "accuracy_pct"),
        [(k, n, acc) for k, (n, acc) in by_persons.items()],
    )
    by_violent = _grouped_accuracy(test.violent_per_image, correct)
    write_csv(
        out / "accuracy_by_violent_count.csv",
        ("violent_individuals", "count", "accuracy_pct", "reference_pct"),
        [(k, n, acc, REFERENCE_VIOLENT_COUNT_ACCURACY.get(k, "")) for k, (n, acc) in by_violent.items()],
    )

    confusion = confusion_matrix(truth, predicted)
    write_csv(
        out / "confusion_matrix.csv", ("truth",) + LABEL_ORDER,
        ([label] + row.tolist() for label, row in zip(LABEL_ORDER, confusion)),
    )

    rho = None
    if len(by_persons) >= 2:
        counts = list(by_persons)
        correlation = spearmanr(counts, [by_persons[c][1] for c in counts]).correlation
        rho = float(correlation) if np.isfinite(correlation) else None
    overall = float(correct.mean() * 100)
    write_json(out / "activity_summary.json", {
        "overall_accuracy_pct": overall,
        "reference_overall_pct": REFERENCE_OVERALL_ACCURACY,
        "regions": len(test),
        "pose_source": pose_source,
        "person_count_spearman": rho,
    })
    logger.info(f"📊 Précision globale: {overall:.1f}% (référence {REFERENCE_OVERALL_ACCURACY}%)")
    return ActivityReport(
        overall_accuracy=overall,
        per_class=per_class,
        per_person_count={k: acc for k, (_, acc) in by_persons.items()},
        per_violent_count={k: acc for k, (_, acc) in by_violent.items()},
        confusion=confusion,
        person_count_spearman=rho,
    )


# ============================================
# INFÉRENCE ET GÉNÉRATION
# ============================================

def cmd_infer(settings: Settings, image: Optional[str] = None, overlay: bool = False) -> List[InferenceResult]:
    """Points clés et activité pour chaque boîte du fichier de boîtes"""
    records = load_boxes(settings.boxes_path)
    if image is not None:
        records = [r for r in records if r.image == image or Path(r.image).name == Path(image).name]
        if not records:
            logger.warning(f"⚠️ Aucune boîte pour {image}")
            records = [DetectionStubRecord(image=image)]

    root = settings.boxes_path.parent
    pipeline = DssPipeline.load(settings) if any(r.boxes for r in records) else None
    results: List[InferenceResult] = []
    total_regions, total_seconds = 0, 0.0
    for record in records:
        if not record.boxes:
            results.append(InferenceResult(image=record.image))
            continue
        data = load_gray_png(root / record.image)
        result, stats = pipeline.infer(data, record.boxes, record.image)
        results.append(result)
        total_regions += stats.regions
        total_seconds += stats.seconds
        if overlay:
            save_gray_png(draw_overlay(data, result), settings.outputs_dir / "overlays" / Path(record.image).name)

    write_json(settings.outputs_dir / "results.json", [r.model_dump(mode="json") for r in results])
    if total_seconds > 0:
        logger.info(f"📊 Débit: {total_regions / total_seconds:.1f} régions/s ({total_regions} régions)")
    violent = sum(p.violent for r in results for p in r.persons)
    logger.info(f"✅ {len(results)} images traitées, {violent} personnes violentes signalées")
    return results


def cmd_generate_data(settings: Settings, size: int) -> List[AnnotationRecord]:
    start = time.perf_counter()
    records = generate_dataset(settings.synthetic, size, settings.dataset_path.parent)
    save_annotations(records, settings.dataset_path)
    save_boxes(boxes_from_annotations(records), settings.boxes_path)
    logger.info(
        f"💾 Annotations: {settings.dataset_path}, boîtes: {settings.boxes_path} "
        f"({time.perf_counter() - start:.1f}s)"
    )
    return records
