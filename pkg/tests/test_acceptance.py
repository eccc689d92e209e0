"""Full-length studies. They take minutes, so they only run with
HMIWLAN_ACCEPTANCE=1 in the environment."""
import dataclasses
import os
import unittest

import numpy as np
from scipy import stats as scistats

from hmiwlan.errors import NoFrameDetected
from hmiwlan.events import Rng
from hmiwlan.localization import position_dilution
from hmiwlan.localization.server import DEFAULT_ANCHORS, accuracy_study
from hmiwlan.mac.sweep import first_failure, last_suitable, sweep, sweep_stats
from hmiwlan.models import (CALIBRATED_AR_BURST_BYTES, AccessMethod, ChannelKind, ChannelModel, Constellation,
                            PhyParams, RangingNoise, Scenario, SchedulerKind, TrafficKind, ar_class,
                            safety_class)
from hmiwlan.nlos import SyntheticCirParams, evaluate_subsets, generate_dataset
from hmiwlan.phy import SHIPPED_CONFIGS, GfdmModem, ber_run, build_frame, schmidl_cox_sync, theoretical_ber
from hmiwlan.phy.ber import binomial_interval
from hmiwlan.phy.channel import apply_channel, ebn0_to_snr_db

ACCEPTANCE = os.environ.get("HMIWLAN_ACCEPTANCE") == "1"
N_AR = list(range(5, 55, 5))


def scenario(access, scheduler=SchedulerKind.REFERENCE, safety_msi_ms=8.0):
    return Scenario(access=access, scheduler=scheduler, duration=30.0, seed=1,
                    safety=safety_class(msi_ms=safety_msi_ms),
                    ar=ar_class(payload_bytes=CALIBRATED_AR_BURST_BYTES))


@unittest.skipUnless(ACCEPTANCE, "set HMIWLAN_ACCEPTANCE=1 to run the full studies")
class MacAcceptanceTestCase(unittest.TestCase):
    """Test case for the latency studies over the AR station sweep."""

    def setUp(self):
        self.phy = PhyParams()

    def test_hcca_safety_guarantee(self):
        """Test HCCA keeps every safety delay within the MSI for 5 to 50 AR stations."""
        for n_ar, result in sweep_stats(scenario(AccessMethod.HCCA), N_AR, self.phy, threads=4):
            safety = result[TrafficKind.SAFETY]
            self.assertLessEqual(safety.max_delay_ms, 8.0, n_ar)
            self.assertEqual(safety.deadline_miss_count, 0, n_ar)

    def test_access_method_ordering(self):
        """Test DCF and PCF miss the safety MSI at 20 AR stations and HCCA does not."""
        worst = {}
        for access in AccessMethod:
            (_, result), = sweep_stats(scenario(access), [20], self.phy)
            worst[access] = result[TrafficKind.SAFETY].max_delay_ms
        self.assertGreater(worst[AccessMethod.DCF], 8.0)
        self.assertGreater(worst[AccessMethod.PCF], 8.0)
        self.assertLessEqual(worst[AccessMethod.HCCA], 8.0)

    def test_hcca_ar_capacity(self):
        """Test the reference scheduler's AR crossover lies between 25 and 40 stations."""
        results = sweep_stats(scenario(AccessMethod.HCCA), list(range(20, 41)), self.phy, threads=4)
        crossover = first_failure(results, TrafficKind.AR, 50.0)
        self.assertIsNotNone(crossover)
        self.assertTrue(25 <= crossover <= 40, crossover)

    def test_pcf_crossovers(self):
        """Test PCF safety max delay fails from 4 to 10 stations and the mean from 8 to 16."""
        results = sweep_stats(scenario(AccessMethod.PCF), list(range(1, 21)), self.phy, threads=4)
        crossover = first_failure(results, TrafficKind.SAFETY, 8.0)
        self.assertTrue(4 <= crossover <= 10, crossover)
        bound = last_suitable(results, TrafficKind.SAFETY, 8.0)
        self.assertTrue(8 <= bound <= 16, bound)

    def test_edf_beats_reference(self):
        """Test EDF serves 45 AR stations at a 24 ms safety MSI with no safety misses, the reference fewer."""
        edf = sweep_stats(scenario(AccessMethod.HCCA, SchedulerKind.EDF, 24.0), N_AR, self.phy, threads=4)
        ref = sweep_stats(scenario(AccessMethod.HCCA, SchedulerKind.REFERENCE, 24.0), N_AR, self.phy, threads=4)
        edf_failure = first_failure(edf, TrafficKind.AR, 50.0) or max(N_AR) + 5
        ref_failure = first_failure(ref, TrafficKind.AR, 50.0) or max(N_AR) + 5
        self.assertGreater(edf_failure, 45)
        self.assertLess(ref_failure, edf_failure)
        feasible = [(n, r[TrafficKind.AR].max_delay_ms) for n, r in edf if n < edf_failure]
        fit = scistats.linregress([n for n, _ in feasible], [d for _, d in feasible])
        self.assertGreaterEqual(fit.rvalue ** 2, 0.9)
        for n_ar, result in edf:
            if n_ar <= 45:
                self.assertEqual(result[TrafficKind.SAFETY].deadline_miss_count, 0, n_ar)

    def test_deterministic(self):
        """Test a repeated sweep gives byte-identical CSV text."""
        sc = dataclasses.replace(scenario(AccessMethod.DCF), duration=5.0)
        a = sweep(sc, N_AR, self.phy, threads=4).to_csv(index=False)
        b = sweep(sc, N_AR, self.phy).to_csv(index=False)
        self.assertEqual(a, b)


@unittest.skipUnless(ACCEPTANCE, "set HMIWLAN_ACCEPTANCE=1 to run the full studies")
class PhyAcceptanceTestCase(unittest.TestCase):
    """Test case for the GFDM bit error ratio and synchronization studies."""

    def test_qpsk_ber_curve(self):
        """Test OFDM-mode QPSK BER at 0, 4 and 8 dB Eb/N0 over 10^6 bits."""
        config = SHIPPED_CONFIGS["ofdm"]
        for ebn0 in (0.0, 4.0, 8.0):
            channel = ChannelModel(kind=ChannelKind.AWGN, snr_db=ebn0_to_snr_db(ebn0, 2))
            result = ber_run(config, channel, 10 ** 6, seed=7, ideal_sync=True, ideal_csi=True)
            lo, hi = binomial_interval(float(theoretical_ber(Constellation.QPSK, ebn0)), result.bits)
            self.assertTrue(lo <= result.ber <= hi, (ebn0, result.ber, lo, hi))

    def test_sync_at_10_db(self):
        """Test timing error stays within two samples in 99% of 1000 trials at 10 dB."""
        config = SHIPPED_CONFIGS["gfdm"]
        rng = Rng(13)
        delays = rng.child("delays").integers(0, 100, size=1000)
        good = 0
        for trial, delay in enumerate(delays):
            bits = rng.child("bits", trial).integers(0, 2, size=config.bits_per_block)
            frame = build_frame(GfdmModem(config).modulate_bits(bits)[0], config)
            channel = ChannelModel(kind=ChannelKind.AWGN, snr_db=10.0, delay=int(delay))
            rx = apply_channel(frame.samples, channel, rng.child("noise", trial), config.k, tail=config.n)
            try:
                good += abs(schmidl_cox_sync(rx, config).frame_start - int(delay)) <= 2
            except NoFrameDetected:
                pass
        self.assertGreaterEqual(good, 990)


@unittest.skipUnless(ACCEPTANCE, "set HMIWLAN_ACCEPTANCE=1 to run the full studies")
class LocalizationAcceptanceTestCase(unittest.TestCase):
    """Test case for the four-anchor room study."""

    def test_rmse(self):
        """Test the 3-D RMSE over 1000 positions with 1 m per-distance noise matches the geometry."""
        frame, rmse = accuracy_study(noise=RangingNoise(sigma_d=1.0), trials=1000, seed=1)
        self.assertEqual(len(frame), 1000)
        self.assertFalse(frame["err_m"].isna().any())
        truths = frame[["true_x", "true_y", "true_z"]].to_numpy()
        predicted = np.sqrt(np.mean([position_dilution(DEFAULT_ANCHORS, t) ** 2 for t in truths]))
        self.assertTrue(1.5 <= rmse and 0.9 <= rmse / predicted <= 1.1, (rmse, predicted))
        again, _ = accuracy_study(noise=RangingNoise(sigma_d=1.0), trials=1000, seed=1)
        self.assertEqual(frame.to_csv(index=False), again.to_csv(index=False))


@unittest.skipUnless(ACCEPTANCE, "set HMIWLAN_ACCEPTANCE=1 to run the full studies")
class NlosAcceptanceTestCase(unittest.TestCase):
    """Test case for the feature subset study."""

    def test_accuracy_grows_with_features(self):
        """Test mean accuracy over ten seeds orders S4 >= S3 >= max(S2, S1) within two points."""
        overall = []
        for seed in range(1, 11):
            dataset = generate_dataset(SyntheticCirParams(seed=seed))
            overall.append(evaluate_subsets(dataset, seed=seed, threads=4)["overall"].to_numpy())
        s1, s2, s3, s4 = np.mean(overall, axis=0)
        self.assertGreaterEqual(s4, s3 - 0.02)
        self.assertGreaterEqual(s3, max(s1, s2) - 0.02)


if __name__ == "__main__":
    unittest.main()
