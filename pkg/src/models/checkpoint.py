"""Named-tensor checkpoint archives.

A checkpoint is a safetensors file: a JSON header listing every tensor's dtype,
shape and byte range, followed by the raw little-endian float64 buffers. The
header metadata carries the encoder configuration, the format version and the
run description as one JSON document.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError
from safetensors import SafetensorError, safe_open
from safetensors.numpy import save_file

from src.exceptions import CompatibilityError, FileError
from src.schemas.encoder import EncoderConfig

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
METADATA_KEY = "protomatch"


@dataclass
class Checkpoint:
    """Tensors, encoder configuration and run description of one archive."""

    tensors: dict[str, np.ndarray]
    encoder: EncoderConfig
    info: dict[str, Any] = field(default_factory=dict)


def write_archive(path: str | Path, tensors: dict[str, np.ndarray], meta: dict[str, Any]) -> None:
    """
    Write float64 tensors plus one JSON metadata document.

    Metadata goes under a single header key (serialized with sorted keys) so the
    file bytes depend only on the contents.

    Raises:
        FileError: If the file cannot be written
    """
    path = Path(path)
    arrays = {
        name: np.ascontiguousarray(value, dtype="<f8") for name, value in tensors.items()
    }
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        save_file(arrays, str(path), metadata={METADATA_KEY: json.dumps(meta, sort_keys=True)})
    except (OSError, SafetensorError) as e:
        raise FileError(f"Cannot write archive {path}: {e}") from e


def read_archive(path: str | Path) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
    """
    Read every tensor and the metadata document of an archive.

    The header's byte ranges are validated against the file length on open.

    Raises:
        FileError: If the file is missing, truncated, or not an archive
    """
    path = Path(path)
    if not path.is_file():
        raise FileError(f"Archive not found: {path}")
    try:
        with safe_open(str(path), framework="np") as f:
            meta = json.loads((f.metadata() or {}).get(METADATA_KEY, "{}"))
            tensors = {name: f.get_tensor(name) for name in f.keys()}
    except (OSError, SafetensorError, json.JSONDecodeError) as e:
        raise FileError(f"Malformed archive {path}: {e}") from e
    return tensors, meta


def save_checkpoint(
    path: str | Path,
    tensors: dict[str, np.ndarray],
    encoder: EncoderConfig,
    info: dict[str, Any] | None = None,
) -> Path:
    """Write a model checkpoint (all named tensors, encoder config, run info)."""
    meta = {
        "format_version": FORMAT_VERSION,
        "encoder": encoder.model_dump(mode="json"),
        "info": info or {},
    }
    write_archive(path, tensors, meta)
    logger.info(f"Saved checkpoint {path} ({len(tensors)} tensors)")
    return Path(path)


def load_checkpoint(path: str | Path) -> Checkpoint:
    """
    Raises:
        FileError: If the archive is unreadable or lacks an encoder configuration
        CompatibilityError: If the format version is not supported
    """
    tensors, meta = read_archive(path)
    version = meta.get("format_version")
    if version != FORMAT_VERSION:
        raise CompatibilityError(
            f"Checkpoint {path} has format version {version}, expected {FORMAT_VERSION}"
        )
    try:
        encoder = EncoderConfig.model_validate(meta["encoder"])
    except (KeyError, ValidationError) as e:
        raise FileError(f"Checkpoint {path} has no valid encoder configuration: {e}") from e
    return Checkpoint(tensors=tensors, encoder=encoder, info=meta.get("info", {}))
