"""Lecture et écriture des annotations (JSON lines, une image par ligne)"""
import json
import logging
from pathlib import Path
from typing import Iterable, List, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from app.core.errors import DatasetNotFoundError, SchemaError
from app.schemas.dataset import AnnotationRecord, DetectionStubRecord

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
RecordT = TypeVar("RecordT", bound=BaseModel)


def _read_jsonl(path: PathLike, model: Type[RecordT]) -> List[RecordT]:
    path = Path(path)
    if not path.exists():
        raise DatasetNotFoundError(f"fichier introuvable: {path}")

    records: List[RecordT] = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                document = json.loads(line)
            except json.JSONDecodeError as e:
                raise SchemaError(f"JSON invalide ({e.msg})", line=line_number) from e
            try:
                records.append(model.model_validate(document))
            except ValidationError as e:
                error = e.errors()[0]
                field = ".".join(str(part) for part in error["loc"]) or None
                raise SchemaError(error["msg"], line=line_number, field=field) from e
    return records


def _write_jsonl(records: Iterable[BaseModel], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(record.model_dump_json() + "\n")
    return path


def load_annotations(path: PathLike) -> List[AnnotationRecord]:
    records = _read_jsonl(path, AnnotationRecord)
    logger.info(f"📂 {len(records)} images annotées chargées depuis {path}")
    return records


def save_annotations(records: Iterable[AnnotationRecord], path: PathLike) -> Path:
    return _write_jsonl(records, path)


def load_boxes(path: PathLike) -> List[DetectionStubRecord]:
    """Fichier de boîtes remplaçant le détecteur de personnes"""
    return _read_jsonl(path, DetectionStubRecord)


def save_boxes(records: Iterable[DetectionStubRecord], path: PathLike) -> Path:
    return _write_jsonl(records, path)


def boxes_from_annotations(records: Iterable[AnnotationRecord]) -> List[DetectionStubRecord]:
    return [
        DetectionStubRecord(image=record.image, boxes=[person.box for person in record.persons])
        for record in records
    ]
