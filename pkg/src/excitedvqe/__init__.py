"""VQE workbench for ground, excited and charged states of small molecules."""

__version__ = "0.1.0"
