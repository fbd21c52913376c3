"""pairblow: exact degeneration-identity engine for stable-pair blow-up formulas.

The engine enumerates admissible cohomology-weighted boundary partitions
under virtual-dimension constraints, assembles degeneration identities over
symbolic relative partition functions, and derives closed blow-up factors
as exact Laurent-polynomial identities with machine-checkable certificates.
"""

__version__ = "0.1.0"
