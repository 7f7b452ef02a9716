"""protomatch: semantic-matching fine-tuning with class prototypes and post-hoc OOD scoring."""

__version__ = "0.1.0"
