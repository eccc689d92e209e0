"""Synthetic indoor CIRs: Rician first tap for LOS, Rayleigh taps for NLOS."""
import logging
from dataclasses import dataclass

import numpy as np

from hmiwlan.errors import ContractViolation
from hmiwlan.events import Rng
from hmiwlan.models import CirDataset, Label

logger = logging.getLogger(__name__)

MIN_PER_CLASS = 100


@dataclass(frozen=True)
class SyntheticCirParams:
    n_per_class: int = 1000
    tap_count: int = 16
    los_k_db: float = 6.0
    los_decay_taps: float = 3.0
    nlos_decay_taps: float = 9.0
    shadowing_db: float = 0.0
    seed: int = 1

    def __post_init__(self):
        if self.n_per_class < MIN_PER_CLASS:
            raise ContractViolation("n_per_class must be at least {}".format(MIN_PER_CLASS))
        if self.tap_count < 8:
            raise ContractViolation("a CIR needs at least 8 taps")
        if self.los_decay_taps <= 0 or self.nlos_decay_taps <= 0:
            raise ContractViolation("delay spreads must be positive")
        if self.shadowing_db < 0:
            raise ContractViolation("shadowing_db must be non-negative")

    @property
    def los_k(self):
        return 10.0 ** (self.los_k_db / 10.0)


def power_delay_profile(tap_count, decay_taps):
    """Exponential PDP normalized to unit total power."""
    p = np.exp(-np.arange(tap_count) / decay_taps)
    return p / p.sum()


def _scattered(rng, n, pdp):
    scale = np.sqrt(pdp / 2.0)
    return (rng.standard_normal((n, pdp.size)) + 1j * rng.standard_normal((n, pdp.size))) * scale


def _shadowing(rng, n, shadowing_db):
    if shadowing_db == 0:
        return np.ones((n, 1))
    return 10.0 ** (shadowing_db * rng.standard_normal((n, 1)) / 20.0)


def generate_dataset(params=SyntheticCirParams()):
    """n_per_class LOS CIRs followed by n_per_class NLOS CIRs."""
    rng = Rng(params.seed)
    n = params.n_per_class

    los_rng = rng.child("los")
    pdp = power_delay_profile(params.tap_count, params.los_decay_taps)
    los = _scattered(los_rng, n, pdp)
    k = params.los_k
    phase = los_rng.uniform(0.0, 2.0 * np.pi, size=n)
    los[:, 0] = np.sqrt(pdp[0] * k / (k + 1.0)) * np.exp(1j * phase) + los[:, 0] / np.sqrt(k + 1.0)
    los *= _shadowing(los_rng, n, params.shadowing_db)

    nlos_rng = rng.child("nlos")
    nlos = _scattered(nlos_rng, n, power_delay_profile(params.tap_count, params.nlos_decay_taps))
    nlos *= _shadowing(nlos_rng, n, params.shadowing_db)

    labels = np.concatenate([np.full(n, Label.LOS, dtype=np.uint8), np.full(n, Label.NLOS, dtype=np.uint8)])
    dataset = CirDataset(np.vstack([los, nlos]), labels)
    logger.debug("generated %r", dataset)
    return dataset


def rician_k_estimate(samples):
    """Moment estimate of the K-factor from complex samples of one tap."""
    power = np.abs(np.asarray(samples)) ** 2
    m2 = power.mean()
    m4 = np.mean(power ** 2)
    root = np.sqrt(max(2.0 * m2 ** 2 - m4, 0.0))
    if root >= m2:
        return np.inf
    return float(root / (m2 - root))
