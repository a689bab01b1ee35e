"""Single-file JSON persistence for trained models.

The artifact bundles everything prediction needs: sparse weights, bias,
vocabulary, idf values and the training configuration echo.  Writing is
canonical (sorted keys, two-space indent, LF, trailing newline) so that
save -> load -> save is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ModelFormatError, VersionMismatchError
from .linear_model import LinearModel
from .vectorize import IdfModel, Vocabulary

FORMAT_VERSION = 1
_TOOL = "tracesvm/0.1.0"


@dataclass
class ModelArtifact:
    model: LinearModel
    vocabulary: Vocabulary
    idf: IdfModel


def _to_document(artifact: ModelArtifact) -> dict[str, Any]:
    model = artifact.model
    nz = np.nonzero(model.weights)[0]
    return {
        "format_version": FORMAT_VERSION,
        "created_by": _TOOL,
        "trainer": model.metadata.get("trainer"),
        "config": {k: v for k, v in model.metadata.items() if k != "trainer"},
        "ngram_min": artifact.vocabulary.n_min,
        "ngram_max": artifact.vocabulary.n_max,
        "vocabulary": list(artifact.vocabulary.by_index),
        "idf": [float(v) for v in artifact.idf.idf],
        "n_docs": artifact.idf.n_docs,
        "weights": [[int(j), float(model.weights[j])] for j in nz],
        "bias": model.bias,
    }


def save_model(artifact: ModelArtifact, path: Path | str) -> None:
    doc = _to_document(artifact)
    text = json.dumps(doc, sort_keys=True, indent=2)
    Path(path).write_bytes((text + "\n").encode("utf-8"))


def load_model(path: Path | str) -> ModelArtifact:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"{path}: not a valid model file: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError(f"{path}: expected a JSON object at top level")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"{path}: format_version {version!r} is not supported (expected {FORMAT_VERSION})"
        )
    try:
        vocab = Vocabulary(
            by_index=tuple(doc["vocabulary"]),
            n_min=int(doc["ngram_min"]),
            n_max=int(doc["ngram_max"]),
        )
        idf_values = np.asarray(doc["idf"], dtype=np.float64)
        idf = IdfModel(idf=idf_values, n_docs=int(doc["n_docs"]))
        dim = len(vocab)
        weights = np.zeros(dim)
        for j, v in doc["weights"]:
            weights[int(j)] = float(v)
        metadata = dict(doc.get("config", {}))
        metadata["trainer"] = doc.get("trainer")
        model = LinearModel(
            weights=weights, bias=float(doc["bias"]), dim=dim, metadata=metadata
        )
    except (KeyError, TypeError, ValueError, IndexError, AttributeError) as exc:
        raise ModelFormatError(f"{path}: malformed model document: {exc}") from exc
    if idf_values.shape[0] != dim:
        raise ModelFormatError(
            f"{path}: idf length {idf_values.shape[0]} != vocabulary size {dim}"
        )
    return ModelArtifact(model=model, vocabulary=vocab, idf=idf)
