"""Central-moment features of the CIR amplitude distribution."""
import numpy as np
import pandas as pd

from hmiwlan.errors import FeatureError
from hmiwlan.models import FEATURE_NAMES, Cir, FeatureVector, Label

# relative spread below which an amplitude sample counts as constant
FLAT_TOLERANCE = 1e-12


def feature_matrix(taps):
    """Rows of taps -> (mu, sigma, s, kappa) per row plus the degenerate mask.

    Population moments of a = |taps|; kappa is the raw m4 / sigma^4.
    """
    a = np.abs(np.atleast_2d(np.asarray(taps)))
    if a.shape[1] < 2:
        raise FeatureError("features need at least 2 taps, got {}".format(a.shape[1]))
    mu = a.mean(axis=1)
    d = a - mu[:, None]
    m2 = np.mean(d ** 2, axis=1)
    sigma = np.sqrt(m2)
    degenerate = sigma <= FLAT_TOLERANCE * np.maximum(mu, np.finfo(float).tiny)
    safe = np.where(degenerate, 1.0, sigma)
    s = np.where(degenerate, 0.0, np.mean(d ** 3, axis=1) / safe ** 3)
    kappa = np.where(degenerate, 0.0, np.mean(d ** 4, axis=1) / safe ** 4)
    sigma = np.where(degenerate, 0.0, sigma)
    return np.column_stack([mu, sigma, s, kappa]), degenerate


def extract_features(cir):
    taps = cir.taps if isinstance(cir, Cir) else np.asarray(cir)
    values, degenerate = feature_matrix(taps.reshape(1, -1))
    mu, sigma, s, kappa = (float(v) for v in values[0])
    return FeatureVector(mu, sigma, s, kappa, bool(degenerate[0]))


def feature_table(dataset):
    values, degenerate = feature_matrix(dataset.taps)
    table = pd.DataFrame(values, columns=list(FEATURE_NAMES))
    table.insert(0, "label", [Label(int(v)).name for v in dataset.labels])
    table["degenerate"] = degenerate
    return table


def feature_summary(table):
    """Per-class feature means, LOS first."""
    summary = table.groupby("label", sort=True)[list(FEATURE_NAMES)].mean().reset_index()
    return summary.sort_values("label", key=lambda c: c.map(lambda name: Label[name].value)).reset_index(drop=True)
