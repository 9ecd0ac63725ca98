"""physrec: execution-based evaluation harness for physical-reasoning
systems.

Generates seeded 2D rigid-body benchmark clips, executes scene hypotheses
on a deterministic simulator, and scores re-simulated clips against their
references via temporal alignment, frame/motion metrics, and paired
bootstrap statistics.
"""

from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
