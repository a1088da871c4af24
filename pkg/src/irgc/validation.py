"""Input validation helpers shared by the model, solvers and estimators."""

from __future__ import annotations

import numpy as np


def check_unary(unary):
    """Return ``unary`` as a finite float array of shape ``(n, L)`` with ``L >= 2``."""
    unary = np.asarray(unary, dtype=np.float64)
    if unary.ndim != 2:
        raise ValueError(f"unary table must be 2-D (nodes x labels), got shape {unary.shape}")
    if unary.shape[1] < 2:
        raise ValueError("at least two labels are required")
    if not np.all(np.isfinite(unary)):
        raise ValueError("unary table contains non-finite values")
    return unary


def check_edges(edges, node_count):
    """Validate an ``(m, 2)`` array of node pairs against ``node_count``."""
    edges = np.asarray(edges, dtype=np.int64)
    if edges.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if edges.ndim != 2 or edges.shape[1] != 2:
        raise ValueError(f"edges must have shape (m, 2), got {edges.shape}")
    if edges.min() < 0 or edges.max() >= node_count:
        raise ValueError("edge references an invalid node id")
    if np.any(edges[:, 0] == edges[:, 1]):
        raise ValueError("edge endpoints must differ")
    return edges


def check_nonnegative(values, size, name):
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 0:
        values = np.full(size, float(values))
    if values.shape != (size,):
        raise ValueError(f"{name} must have length {size}, got shape {values.shape}")
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise ValueError(f"{name} must be finite and non-negative")
    return values


def check_labeling(model, x):
    """Return ``x`` as an int array valid for ``model``."""
    x = np.asarray(x)
    if x.shape != (model.node_count,):
        raise ValueError(f"labeling must have length {model.node_count}, got shape {x.shape}")
    if x.size and not np.issubdtype(x.dtype, np.integer):
        if not np.all(x == np.round(x)):
            raise ValueError("labels must be integers")
    x = x.astype(np.int64)
    if x.size and (x.min() < 0 or x.max() >= model.label_count):
        raise ValueError(f"labels must lie in [0, {model.label_count - 1}]")
    return x


def check_weights(model, w):
    """Return per-edge iteration weights aligned with ``model.edges``."""
    return check_nonnegative(w, model.edge_count, "edge weights")


def check_model(model):
    from irgc.mrf_model import MRFModel

    if not isinstance(model, MRFModel):
        raise TypeError(f"expected an MRFModel, got {type(model).__name__}")
    return model
