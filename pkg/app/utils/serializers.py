"""Fonctions de sérialisation : tableaux float32 little-endian + en-tête JSON

Un "bundle" est une paire de fichiers `<stem>.bin` (données brutes) et
`<stem>.json` (en-tête). L'en-tête liste les entrées dans l'ordre d'écriture.
"""
import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

BUNDLE_FORMAT = "f32le"
_DTYPE = np.dtype('<f4')

PathLike = Union[str, Path]


def bundle_paths(stem: PathLike) -> Tuple[Path, Path]:
    """Chemins (.bin, .json) d'un bundle"""
    stem = Path(stem)
    return stem.with_suffix(".bin"), stem.with_suffix(".json")


def write_array_bundle(
    stem: PathLike,
    arrays: Mapping[str, np.ndarray],
    header: Mapping[str, Any] = None,
    entry_metadata: Mapping[str, Mapping[str, Any]] = None,
) -> Tuple[Path, Path]:
    """Écrire des tableaux nommés dans un bundle float32"""
    bin_path, json_path = bundle_paths(stem)
    bin_path.parent.mkdir(parents=True, exist_ok=True)
    entry_metadata = entry_metadata or {}

    entries: List[Dict[str, Any]] = []
    offset = 0
    with open(bin_path, "wb") as f:
        for name, array in arrays.items():
            data = np.ascontiguousarray(array, dtype=_DTYPE)
            if not np.all(np.isfinite(data)):
                raise ValueError(f"valeurs non finies dans '{name}'")
            f.write(data.tobytes(order="C"))
            entry = {"name": name, "shape": list(data.shape), "offset": offset}
            entry.update(entry_metadata.get(name, {}))
            entries.append(entry)
            offset += data.size

    document = {"format": BUNDLE_FORMAT}
    document.update(header or {})
    document["entries"] = entries
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, sort_keys=False)
    return bin_path, json_path


def read_array_bundle(stem: PathLike) -> Tuple[Dict[str, np.ndarray], Dict[str, Any]]:
    """Lire un bundle ; les tableaux sont convertis en float64"""
    bin_path, json_path = bundle_paths(stem)
    with open(json_path, "r", encoding="utf-8") as f:
        header = json.load(f)
    if header.get("format") != BUNDLE_FORMAT:
        raise ValueError(f"format de bundle inconnu: {header.get('format')}")

    flat = np.fromfile(bin_path, dtype=_DTYPE)
    arrays: Dict[str, np.ndarray] = {}
    for entry in header["entries"]:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        if start + size > flat.size:
            raise ValueError(f"bundle tronqué: entrée '{entry['name']}'")
        arrays[entry["name"]] = flat[start:start + size].reshape(shape).astype(np.float64)
    return arrays, header


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Écrire un CSV à en-tête fixe"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])
    return path


def read_csv(path: PathLike) -> List[Dict[str, str]]:
    with open(path, "r", newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def write_json(path: PathLike, document: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2)
    return path


def _format_cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.6f}"
    if isinstance(value, np.integer):
        return int(value)
    return value
