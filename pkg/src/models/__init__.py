"""Encoder, adapters, prototypes, classifier head and checkpoint archives."""
from src.models.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from src.models.encoder import EncoderModel, encode_embeddings, encode_tokens
from src.models.head import ClassifierHead
from src.models.lora import LoraLinear, lora_forward
from src.models.prototypes import ClassPrototypeSet, compute_prototypes, init_prototype_set

__all__ = [
    "Checkpoint",
    "load_checkpoint",
    "save_checkpoint",
    "EncoderModel",
    "encode_embeddings",
    "encode_tokens",
    "ClassifierHead",
    "LoraLinear",
    "lora_forward",
    "ClassPrototypeSet",
    "compute_prototypes",
    "init_prototype_set",
]
