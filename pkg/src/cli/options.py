"""Run-spec flags shared by train and grid, and their resolution into a RunSpec."""
import argparse
import json
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from src.config import settings
from src.exceptions import ConfigError, FileError
from src.schemas.enums import PrototypeVariant, RepLayer, TuningMethodName
from src.schemas.experiment import GridAxes, RunSpec, Shots
from src.workers.runs import resolve_seeds

AXIS_KEYS = ("methods", "shots_list", "lambdas", "variants")

# Flag dests, named like the RunSpec fields they set
SPEC_FLAGS = (
    "manifest",
    "method",
    "shots",
    "seeds",
    "variant",
    "lambda_",
    "tau",
    "soft_tokens",
    "shared_soft_tokens",
    "bank_include_prototypes",
    "lr",
    "epochs",
    "batch_size",
    "weight_decay",
    "embed_dim",
    "n_layers",
    "n_heads",
    "mlp_ratio",
    "lora_rank",
    "lora_alpha",
    "max_seq_len",
    "rep_layer",
    "backbone_seed",
    "out",
)


def parse_shots(value: str) -> Shots:
    if value == "full":
        return "full"
    try:
        shots = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"shots must be an integer or 'full', got {value!r}")
    if shots < 1:
        raise argparse.ArgumentTypeError(f"shots must be >= 1, got {shots}")
    return shots


def _values(enum_cls) -> list[str]:
    return [member.value for member in enum_cls]


def add_spec_arguments(parser: argparse.ArgumentParser, multi_seed: bool = False) -> None:
    """Every RunSpec field as an optional flag; unset flags defer to --config and defaults."""
    parser.add_argument("--config", help="JSON file of run-spec fields")
    parser.add_argument("--manifest", help="Dataset manifest JSON")
    parser.add_argument("--method", choices=_values(TuningMethodName))
    parser.add_argument("--shots", type=parse_shots, help="Per-class shots or 'full'")
    if multi_seed:
        parser.add_argument("--seeds", type=int, nargs="+")
    else:
        parser.add_argument("--seed", type=int)
    parser.add_argument("--variant", choices=_values(PrototypeVariant))
    parser.add_argument("--lambda", dest="lambda_", type=float, help="Diversity weight")
    parser.add_argument("--tau", type=float, help="Matching temperature")
    parser.add_argument("--soft-tokens", type=int, help="Learnable tokens per class (M)")
    parser.add_argument(
        "--shared-soft-tokens", action=argparse.BooleanOptionalAction, default=None
    )
    parser.add_argument(
        "--bank-include-prototypes", action=argparse.BooleanOptionalAction, default=None
    )
    parser.add_argument("--lr", type=float)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--weight-decay", type=float)
    parser.add_argument("--embed-dim", type=int)
    parser.add_argument("--n-layers", type=int)
    parser.add_argument("--n-heads", type=int)
    parser.add_argument("--mlp-ratio", type=int)
    parser.add_argument("--lora-rank", type=int)
    parser.add_argument("--lora-alpha", type=float)
    parser.add_argument("--max-seq-len", type=int)
    parser.add_argument("--rep-layer", choices=_values(RepLayer))
    parser.add_argument("--backbone-seed", type=int)
    parser.add_argument("--out", help="Output directory")


def add_axis_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--methods", nargs="+", choices=_values(TuningMethodName))
    parser.add_argument("--shots-list", nargs="+", type=parse_shots)
    parser.add_argument("--lambdas", nargs="+", type=float)
    parser.add_argument("--variants", nargs="+", choices=_values(PrototypeVariant))


def load_config_file(path: str | Path) -> dict[str, Any]:
    """
    Raises:
        FileError: If the file cannot be read
        ConfigError: If it is not a JSON object
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise FileError(f"Cannot read config {path}: {e}") from e
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config {path} is not valid JSON: {e.msg}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"Config {path} must be a JSON object")
    return raw


def resolve_spec(args: argparse.Namespace) -> tuple[RunSpec, GridAxes]:
    """
    Merge defaults, environment settings, the --config file and flags (flags win).

    Raises:
        ConfigError: If the merged values do not form a valid run spec
    """
    values: dict[str, Any] = {"out": settings.output_dir, "backbone_seed": settings.backbone_seed}
    file_values = load_config_file(args.config) if getattr(args, "config", None) else {}
    axis_values = {key: file_values.pop(key) for key in AXIS_KEYS if key in file_values}
    if "lambda" in file_values:
        file_values["lambda_"] = file_values.pop("lambda")
    values.update(file_values)

    for dest in SPEC_FLAGS:
        value = getattr(args, dest, None)
        if value is not None:
            values[dest] = value
    if getattr(args, "seed", None) is not None:
        values["seeds"] = [args.seed]
    for key in AXIS_KEYS:
        if getattr(args, key, None) is not None:
            axis_values[key] = getattr(args, key)

    if not values.get("manifest"):
        raise ConfigError("A dataset manifest is required (--manifest or 'manifest' in --config)")
    try:
        spec = RunSpec.model_validate(values)
        axes = GridAxes.model_validate(axis_values)
    except ValidationError as e:
        raise ConfigError(f"Invalid run configuration: {e}") from e
    return resolve_seeds(spec), axes
