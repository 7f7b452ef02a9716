"""Gradient QA: finite-difference checks of the differentiable building blocks."""
from src.qa.gradcheck import CaseReport, GradientQAEngine

__all__ = ["CaseReport", "GradientQAEngine"]
