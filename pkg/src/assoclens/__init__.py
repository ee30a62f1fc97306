"""Find words over-represented in one group's texts, cluster them, and name the clusters."""

__version__ = "0.1.0"

from .association import CorrectionPolicy, associated_terms, upper_tail  # noqa: E402
from .corpus import Document, GroupLabel, balance, term_counts  # noqa: E402

__all__ = ["CorrectionPolicy", "Document", "GroupLabel", "associated_terms", "balance",
           "term_counts", "upper_tail", "__version__"]
