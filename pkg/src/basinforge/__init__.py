"""Basins of attraction of iterative polynomial root finders."""

from .classifier import BasinGrid, NodeOutcome, OutcomeKind, ScanConfig, classify_node, scan_grid
from .entropy import EntropyConfig, EntropyReport, basin_entropy, cell_entropy
from .polynomials import Polynomial, RootCatalog, eval_with_derivatives, unity_polynomial, unity_roots
from .render import Palette, render_basins, render_iterations
from .schemes import SCHEMES, SchemeId, StepResult, StepStatus, computational_order, get_scheme, step
from .stats import (IterationHistogram, LaplaceFit, convergence_cdf, differential_entropy,
                    fit_laplace_tail, histogram, most_probable_n)

__version__ = "0.1.0"

__all__ = [
    "BasinGrid", "NodeOutcome", "OutcomeKind", "ScanConfig", "classify_node", "scan_grid",
    "EntropyConfig", "EntropyReport", "basin_entropy", "cell_entropy",
    "Polynomial", "RootCatalog", "eval_with_derivatives", "unity_polynomial", "unity_roots",
    "Palette", "render_basins", "render_iterations",
    "SCHEMES", "SchemeId", "StepResult", "StepStatus", "computational_order", "get_scheme", "step",
    "IterationHistogram", "LaplaceFit", "convergence_cdf", "differential_entropy",
    "fit_laplace_tail", "histogram", "most_probable_n",
]
