"""Input validation shared by the estimators and the functional API."""
import numpy as np
from sklearn.utils import check_array

from .exceptions import DomainError, InsufficientDataError


def check_sample(X, sample_weight=None, *, min_samples=1):
    """Validate a 1-D sample of positive reals and optional non-negative weights.

    Accepts lists, 1-D arrays and single-column 2-D arrays (the scikit-learn
    ``(n_samples, 1)`` layout).  Returns ``(x, w)`` as float arrays; ``w`` is
    ``None`` when no weights were given.
    """
    x = check_array(X, ensure_2d=False, dtype=np.float64, ensure_all_finite=True,
                    ensure_min_samples=0)
    if x.ndim == 2:
        if x.shape[1] != 1:
            raise ValueError(f"expected a single feature column, got shape {x.shape}")
        x = x[:, 0]
    x = np.ascontiguousarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("samples must be strictly positive")
    w = None
    if sample_weight is not None:
        w = np.asarray(sample_weight, dtype=float).ravel()
        if w.shape != x.shape:
            raise ValueError("sample_weight must match the sample length")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("sample_weight must be finite and non-negative")
        keep = w > 0
        x, w = x[keep], w[keep]
    if len(x) < min_samples:
        raise InsufficientDataError(f"need at least {min_samples} samples, got {len(x)}")
    return x, w
