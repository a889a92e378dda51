"""
CSV exchange formats for distance matrices, label assignments and features.
"""
from __future__ import annotations

import csv
from typing import Sequence

import numpy as np

from .nclm import FeatureVector


def save_matrix_csv(M: np.ndarray, ids: Sequence[str], path) -> None:
    """Square matrix with a header row of graph ids (row order follows ``ids``)."""
    M = np.asarray(M, dtype=float)
    if M.shape != (len(ids), len(ids)):
        raise ValueError("matrix shape does not match the number of ids")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(ids))
        for row in M:
            w.writerow([repr(float(v)) for v in row])


def load_matrix_csv(path) -> tuple[np.ndarray, list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    ids, body = rows[0], rows[1:]
    M = np.array([[float(v) for v in r] for r in body])
    if M.shape != (len(ids), len(ids)):
        raise ValueError(f"{path}: expected a {len(ids)}x{len(ids)} matrix")
    return M, ids


def save_labels_csv(ids: Sequence[str], labels, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["graph_id", "label"])
        for gid, lab in zip(ids, labels):
            w.writerow([gid, int(lab)])


def load_labels_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["graph_id", "label"]:
            raise ValueError(f"{path}: expected header graph_id,label")
        rows = list(reader)
    return [r["graph_id"] for r in rows], np.array([int(r["label"]) for r in rows])


def save_features_csv(ids: Sequence[str], features: Sequence[FeatureVector], path) -> None:
    """One row per graph: ``graph_id,method,J,v1..vJ``."""
    width = max(len(f.values) for f in features)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["graph_id", "method", "J"] + [f"v{i}" for i in range(1, width + 1)])
        for gid, f in zip(ids, features):
            J = "" if f.J is None else f.J
            w.writerow([gid, f.method, J] + [repr(float(v)) for v in f.values])


def load_features_csv(path) -> tuple[list[str], list[FeatureVector]]:
    ids, feats = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:3] != ["graph_id", "method", "J"]:
            raise ValueError(f"{path}: expected header graph_id,method,J,v1..")
        for row in reader:
            ids.append(row[0])
            J = int(row[2]) if row[2] else None
            feats.append(FeatureVector(row[1], [float(v) for v in row[3:] if v != ""], J))
    return ids, feats
