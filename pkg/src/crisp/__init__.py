"""Citation-impact ranking toolkit.

Given a target paper, fetch every paper citing it along with their
reference lists and citation contexts, have an LLM judge rank each
citing paper's references by impact under three permuted runs, fuse
the runs with reciprocal-rank fusion, label each reference High /
Medium / Low (by majority vote or a trained ordinal model), and
evaluate the labels against binary ground truth.
"""

from .labels import BinaryLabel, ImpactCategory, binarize

__version__ = "0.1.0"

__all__ = ["BinaryLabel", "ImpactCategory", "binarize", "__version__"]
