"""Rainfall-prediction workbench: tabular preprocessing, PCA and t-SNE, a
from-scratch classifier zoo with voting ensembles, grid search and
evaluation metrics."""

from .errors import RainerError
from .frame import FeatureMatrix
from .ingest import BOM_SCHEMA, RawTable, load_csv

__version__ = "0.1.0"

__all__ = ["BOM_SCHEMA", "FeatureMatrix", "RainerError", "RawTable", "load_csv", "__version__"]
