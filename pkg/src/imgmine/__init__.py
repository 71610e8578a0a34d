"""Image mining pipeline: preprocessing, edge-based segmentation, texture
transactions, FP-tree maximal itemset mining and a hybrid rule/tree classifier."""

__version__ = "0.1.0"
