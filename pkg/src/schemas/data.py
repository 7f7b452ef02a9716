"""Pydantic schemas for corpora and manifests."""
import json
from pathlib import Path

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from src.exceptions import ManifestError, ParseError
from src.schemas.enums import Split


class DatasetManifest(BaseModel):
    """Scenario, ID/OOD class lists, split file locations and an optional word list."""

    scenario: str
    id_classes: list[str]
    ood_classes: list[str]
    train_path: str
    val_path: str
    test_path: str
    vocab_path: str | None = None

    @model_validator(mode="after")
    def _check_classes(self) -> "DatasetManifest":
        if not self.id_classes:
            raise ValueError("id_classes must not be empty")
        overlap = set(self.id_classes) & set(self.ood_classes)
        if overlap:
            raise ValueError(f"id_classes and ood_classes overlap: {sorted(overlap)}")
        if len(set(self.id_classes)) != len(self.id_classes):
            raise ValueError("id_classes contains duplicates")
        return self

    @classmethod
    def from_file(cls, path: str | Path) -> "DatasetManifest":
        """
        Load a manifest; relative file paths resolve against the manifest's directory.

        Raises:
            ParseError: If the file is missing, empty or not JSON
            ManifestError: If the JSON does not describe a valid manifest
        """
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ParseError(f"Cannot read manifest {path}: {e}") from e
        try:
            manifest = cls.model_validate(raw)
        except ValidationError as e:
            raise ManifestError(f"Invalid manifest {path}: {e}") from e
        base = path.parent
        return manifest.model_copy(
            update={
                key: str(base / getattr(manifest, key))
                for key in ("train_path", "val_path", "test_path", "vocab_path")
                if getattr(manifest, key) is not None
                and not Path(getattr(manifest, key)).is_absolute()
            }
        )


class Sample(BaseModel):
    """One tokenized utterance."""

    model_config = ConfigDict(frozen=True)

    sample_id: str
    text: str
    token_ids: tuple[int, ...]
    label: str
    split: Split
    is_id: bool
