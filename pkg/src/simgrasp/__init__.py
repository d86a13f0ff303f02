"""Grasp candidate generation, annotation, scoring and refinement for two-finger grippers."""

__version__ = "0.1.0"
