import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from hmiwlan.errors import ConfigError, ContractViolation
from hmiwlan.events import MS, US


class TrafficKind(enum.Enum):
    SAFETY = "safety"
    AR = "ar"


class AccessMethod(enum.Enum):
    DCF = "dcf"
    PCF = "pcf"
    HCCA = "hcca"


class SchedulerKind(enum.Enum):
    REFERENCE = "ref"
    EDF = "edf"


@dataclass(frozen=True)
class TrafficClass:
    """Per-station traffic generator and its service deadline (MSI)."""
    kind: TrafficKind
    generation_period_ms: float
    msi_ms: float
    payload_bytes: int
    msdu_bytes: int

    def __post_init__(self):
        if self.msi_ms <= 0 or self.generation_period_ms <= 0:
            raise ContractViolation("msi and generation period must be positive")
        if self.payload_bytes <= 0 or self.msdu_bytes <= 0:
            raise ContractViolation("payload and MSDU size must be positive")

    @property
    def period_ns(self):
        return int(round(self.generation_period_ms * MS))

    @property
    def msi_ns(self):
        return int(round(self.msi_ms * MS))

    def fragments(self):
        """MSDU sizes of one generated burst."""
        full, rest = divmod(self.payload_bytes, self.msdu_bytes)
        return [self.msdu_bytes] * full + ([rest] if rest else [])

    @property
    def max_msdu_bytes(self):
        return min(self.payload_bytes, self.msdu_bytes)

    @property
    def mean_rate(self):
        """Mean data rate in bytes per nanosecond."""
        return self.payload_bytes / self.period_ns


SAFETY_PAYLOAD_BYTES = 64
AR_PAYLOAD_BYTES = 64000
AR_MSDU_BYTES = 1100
# AR burst that places the reference-scheduler capacity near 30 stations
CALIBRATED_AR_BURST_BYTES = 3300


def safety_class(msi_ms=8.0, generation_period_ms=8.0, payload_bytes=SAFETY_PAYLOAD_BYTES):
    return TrafficClass(TrafficKind.SAFETY, generation_period_ms, msi_ms, payload_bytes, payload_bytes)


def ar_class(payload_bytes=AR_PAYLOAD_BYTES, msi_ms=50.0, generation_period_ms=50.0, msdu_bytes=AR_MSDU_BYTES):
    return TrafficClass(TrafficKind.AR, generation_period_ms, msi_ms, payload_bytes, msdu_bytes)


@dataclass(frozen=True)
class PhyParams:
    """802.11 timing constants. Durations in µs unless suffixed otherwise."""
    slot_time: float = 9.0
    sifs: float = 16.0
    difs: float = 34.0
    pifs: float = 25.0
    data_rate: float = 65.0
    ack_duration: float = 44.0
    beacon_interval_ms: float = 48.0
    per_frame_overhead: float = 40.0
    cw_min: int = 15
    cw_max: int = 1023
    retry_limit: int = 7
    beacon_bytes: int = 100
    cfp_max_fraction: float = 0.4

    def __post_init__(self):
        if self.difs_ns != self.sifs_ns + 2 * self.slot_ns:
            raise ConfigError("difs must equal sifs + 2 * slot_time")
        if self.pifs_ns != self.sifs_ns + self.slot_ns:
            raise ConfigError("pifs must equal sifs + slot_time")
        if not 0 < self.cw_min <= self.cw_max:
            raise ConfigError("contention window bounds must satisfy 0 < cw_min <= cw_max")
        if self.data_rate <= 0:
            raise ConfigError("data_rate must be positive")
        if not 0 < self.cfp_max_fraction <= 1:
            raise ConfigError("cfp_max_fraction must lie in (0, 1]")

    @property
    def slot_ns(self):
        return int(round(self.slot_time * US))

    @property
    def sifs_ns(self):
        return int(round(self.sifs * US))

    @property
    def difs_ns(self):
        return int(round(self.difs * US))

    @property
    def pifs_ns(self):
        return int(round(self.pifs * US))

    @property
    def ack_ns(self):
        return int(round(self.ack_duration * US))

    @property
    def overhead_ns(self):
        return int(round(self.per_frame_overhead * US))

    @property
    def beacon_interval_ns(self):
        return int(round(self.beacon_interval_ms * MS))

    def tx_time(self, n_bytes):
        """Air time of a data frame: overhead plus payload at the PHY rate."""
        rate_kbps = int(round(self.data_rate * 1000))
        return self.overhead_ns + -(-(n_bytes * 8 * 10 ** 6) // rate_kbps)

    def exchange_time(self, n_bytes):
        """DATA, SIFS, ACK, SIFS."""
        return self.tx_time(n_bytes) + self.sifs_ns + self.ack_ns + self.sifs_ns

    @property
    def poll_time(self):
        return self.ack_ns + self.sifs_ns

    @property
    def null_time(self):
        return self.overhead_ns + self.sifs_ns

    @property
    def beacon_cost(self):
        return self.pifs_ns + self.tx_time(self.beacon_bytes) + self.sifs_ns


@dataclass
class Scenario:
    n_safety: int = 2
    n_ar: int = 0
    access: AccessMethod = AccessMethod.HCCA
    scheduler: SchedulerKind = SchedulerKind.REFERENCE
    duration: float = 30.0
    seed: int = 1
    safety: TrafficClass = field(default_factory=safety_class)
    ar: TrafficClass = field(default_factory=ar_class)
    random_phases: bool = False

    def __post_init__(self):
        if self.n_ar < 0 or self.n_safety < 0:
            raise ContractViolation("station counts must be non-negative")
        if self.duration <= 0:
            raise ContractViolation("duration must be positive")

    @property
    def duration_ns(self):
        return int(round(self.duration * 1e9))

    def traffic(self):
        """Traffic class per station id; safety stations come first."""
        return [self.safety] * self.n_safety + [self.ar] * self.n_ar


@dataclass
class ClassLatency:
    mean_delay_ms: float = 0.0
    max_delay_ms: float = 0.0
    deadline_miss_count: int = 0
    samples: int = 0
    generated: int = 0
    delivered: int = 0
    dropped: int = 0
    queued: int = 0
    mean_access_delay_ms: float = 0.0
    max_service_gap_ms: float = 0.0

    @property
    def miss_rate(self):
        return self.deadline_miss_count / self.generated if self.generated else 0.0


@dataclass
class LatencyStats:
    per_class: Dict[TrafficKind, ClassLatency] = field(default_factory=dict)
    collisions: int = 0
    admission_failed: bool = False
    rejected: List[int] = field(default_factory=list)
    events: int = 0

    def __getitem__(self, kind):
        return self.per_class.setdefault(kind, ClassLatency())


# gfdm-phy

class PulseKind(enum.Enum):
    RC = "rc"
    RRC = "rrc"
    RECT = "rect"


class Constellation(enum.Enum):
    BPSK = "bpsk"
    QPSK = "qpsk"
    QAM16 = "16qam"

    @property
    def bits_per_symbol(self):
        return {"bpsk": 1, "qpsk": 2, "16qam": 4}[self.value]


class Receiver(enum.Enum):
    MF = "mf"
    ZF = "zf"


@dataclass(frozen=True)
class GfdmConfig:
    """K subcarriers by M subsymbols; one block is N = K * M samples."""
    k: int
    m: int
    pulse: PulseKind = PulseKind.RC
    rolloff: float = 0.5
    cp_len: int = 0
    cs_len: int = 0
    constellation: Constellation = Constellation.QPSK
    receiver: Receiver = Receiver.ZF
    active_subcarriers: Optional[Tuple[int, ...]] = None
    window_len: int = 0

    def __post_init__(self):
        if self.k < 1 or self.m < 1:
            raise ConfigError("K and M must be at least 1")
        if self.n % 2:
            raise ConfigError("N = K * M must be even for the two-half preamble, got {}".format(self.n))
        if not 0 <= self.rolloff <= 1:
            raise ConfigError("rolloff must lie in [0, 1]")
        if self.cp_len < 0 or self.cs_len < 0:
            raise ConfigError("cp_len and cs_len must be non-negative")
        if self.cp_len > self.n or self.cs_len > self.n:
            raise ConfigError("cp_len and cs_len must not exceed N = {}".format(self.n))
        if self.window_len < 0 or self.window_len > min(self.cp_len, self.cs_len or self.cp_len):
            raise ConfigError("window_len must fit inside the cyclic prefix and suffix")
        if self.active_subcarriers is not None:
            active = tuple(sorted(set(int(k) for k in self.active_subcarriers)))
            if not active or active[0] < 0 or active[-1] >= self.k:
                raise ConfigError("active subcarriers must be a non-empty subset of [0, K)")
            object.__setattr__(self, "active_subcarriers", active)

    @property
    def n(self):
        return self.k * self.m

    @property
    def active(self):
        if self.active_subcarriers is None:
            return tuple(range(self.k))
        return self.active_subcarriers

    @property
    def symbols_per_block(self):
        return len(self.active) * self.m

    @property
    def bits_per_block(self):
        return self.symbols_per_block * self.constellation.bits_per_symbol

    @property
    def preamble_len(self):
        return self.n

    @property
    def frame_len(self):
        return 2 * (self.cp_len + self.cs_len) + self.preamble_len + self.n


@dataclass
class ResourceGrid:
    """d[k][m]: K x M complex symbols, inactive rows zero."""
    d: np.ndarray

    @property
    def shape(self):
        return self.d.shape


@dataclass
class Frame:
    preamble: np.ndarray
    payload: np.ndarray
    samples: np.ndarray


class ChannelKind(enum.Enum):
    IDEAL = "ideal"
    AWGN = "awgn"
    MULTIPATH = "multipath"


@dataclass(frozen=True)
class ChannelModel:
    """cfo in GFDM subcarrier spacings (1/K cycles per sample), delay in samples."""
    kind: ChannelKind = ChannelKind.IDEAL
    snr_db: float = float("inf")
    taps: Tuple[complex, ...] = (1.0,)
    cfo: float = 0.0
    delay: int = 0
    normalize: bool = True

    def __post_init__(self):
        if self.delay < 0:
            raise ConfigError("channel delay must be non-negative")
        if not self.taps:
            raise ConfigError("channel needs at least one tap")

    def tap_vector(self):
        taps = np.asarray(self.taps if self.kind == ChannelKind.MULTIPATH else (1.0,), dtype=complex)
        if self.normalize:
            energy = np.sum(np.abs(taps) ** 2)
            if energy == 0:
                raise ConfigError("channel taps have zero energy")
            taps = taps / np.sqrt(energy)
        return taps


# localization

@dataclass(frozen=True)
class Anchor:
    id: int
    position: Tuple[float, float, float]

    @property
    def xyz(self):
        return np.asarray(self.position, dtype=float)


@dataclass(frozen=True)
class RangingExchange:
    """t_round and t_reply in seconds, measured by initiator and responder."""
    t_round: float
    t_reply: float
    anchor_id: int


@dataclass
class PositionEstimate:
    position: np.ndarray
    residual_rms: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class RangingNoise:
    sigma_d: float = 0.0
    bias: float = 0.0

    def __post_init__(self):
        if self.sigma_d < 0:
            raise ContractViolation("sigma_d must be non-negative")


# nlos-id

class Label(enum.IntEnum):
    LOS = 0
    NLOS = 1
    UNKNOWN = 2


@dataclass
class Cir:
    taps: np.ndarray
    label: Label = Label.UNKNOWN

    def __post_init__(self):
        self.taps = np.asarray(self.taps, dtype=complex)
        if self.taps.size == 0 or not np.any(self.taps):
            raise ContractViolation("a CIR needs at least one nonzero tap")


@dataclass
class CirDataset:
    """Equal-length CIRs as rows of `taps` with one label each."""
    taps: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.taps = np.atleast_2d(np.asarray(self.taps, dtype=complex))
        self.labels = np.asarray(self.labels, dtype=np.uint8).reshape(-1)
        if self.labels.size != self.taps.shape[0]:
            raise ContractViolation("{} CIRs but {} labels".format(self.taps.shape[0], self.labels.size))

    def __len__(self):
        return self.labels.size

    def __iter__(self):
        for taps, label in zip(self.taps, self.labels):
            yield Cir(taps, Label(int(label)))

    @property
    def tap_count(self):
        return self.taps.shape[1]

    def count(self, label):
        return int(np.count_nonzero(self.labels == label))

    def __repr__(self):
        return "<CirDataset: {} LOS, {} NLOS, {} taps>".format(
            self.count(Label.LOS), self.count(Label.NLOS), self.tap_count)


@dataclass(frozen=True)
class FeatureVector:
    mu: float
    sigma: float
    s: float
    kappa: float
    degenerate: bool = False

    def as_array(self):
        return np.array([self.mu, self.sigma, self.s, self.kappa])


FEATURE_NAMES = ("mu", "sigma", "s", "kappa")


class FeatureSubset(enum.Enum):
    S1 = ("sigma",)
    S2 = ("s", "kappa")
    S3 = ("sigma", "s", "kappa")
    S4 = ("mu", "sigma", "s", "kappa")

    @property
    def columns(self):
        return [FEATURE_NAMES.index(name) for name in self.value]

    @staticmethod
    def parse(text):
        try:
            return FeatureSubset[text.strip().upper()]
        except KeyError:
            raise ConfigError("unknown feature subset '{}'".format(text))


def ceil_div(a, b):
    return -(-a // b)
