
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdagodec.estimation import (
    Estimate,
    EstimateSet,
    estimate_targets,
    evaluate_trial,
    extract_target_vectors,
    find_peaks,
    peak_to_params,
    power_spectrum,
    range_angle_cell,
    spectrum_2d,
)
from fdagodec.radar import RadarConfig, Target, joint_steering, target_snapshot_matrix

deg = np.deg2rad
NFFT = 512


def argmax2(F):
    return np.unravel_index(np.argmax(np.abs(F)), F.shape)


def cosine(a, b):
    return abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b))


class TestExtract:
    def test_rank_one(self, rng):
        u = rng.standard_normal(36) + 1j * rng.standard_normal(36)
        u /= np.linalg.norm(u)
        v = rng.standard_normal(50) + 0j
        v /= np.linalg.norm(v)
        vecs = extract_target_vectors(7.0 * np.outer(u, v.conj()), 1)
        assert len(vecs) == 1
        w = vecs[0][1]
        assert np.linalg.norm(w) == pytest.approx(7.0)
        assert cosine(w, u) == pytest.approx(1.0)

    def test_zero_matrix(self):
        assert extract_target_vectors(np.zeros((36, 10)), 2) == []

    def test_rank_deficient(self, rng):
        L = np.outer(rng.standard_normal(36), rng.standard_normal(20)) + 0j
        (_, a), (_, b) = extract_target_vectors(L, 2)
        assert np.linalg.norm(b) < 1e-6 * np.linalg.norm(a)

    def test_orthogonal_targets(self, cfg):
        # receive frequencies 0 and 1/6 are orthogonal on six elements
        tgs = [Target(0.0, 700.0), Target(float(np.arcsin(1 / 3)), 1200.0)]
        T = cfg.pulses
        xi = np.vstack([3.0 * np.ones(T), (-1.0) ** np.arange(T)])
        X = target_snapshot_matrix(cfg, tgs, xi=xi)
        vecs = extract_target_vectors(X, 2)
        for (_, v), tg in zip(vecs, tgs):
            assert cosine(v, joint_steering(cfg, tg.theta, tg.range)) > 0.99


class TestSpectrum:
    def test_dc(self, cfg):
        F = spectrum_2d(joint_steering(cfg, 0.0, 0.0), cfg, 64)
        assert argmax2(F) == (0, 0)

    def test_analytic_bins(self, cfg):
        th, r = deg(5), 200.0
        F = spectrum_2d(joint_steering(cfg, th, r), cfg, NFFT)
        f_r = cfg.d_r * cfg.f0 * np.sin(th) / cfg.c
        f_t = cfg.d_t * cfg.f0 * np.sin(th) / cfg.c - 2 * cfg.delta_f * r / cfg.c
        row, col = argmax2(F)
        # e^{+j 2 pi f k} peaks at bin f * nfft under the negative-exponent DFT
        def bin_gap(b, f):
            d = (b / NFFT - f) % 1.0
            return min(d, 1 - d) * NFFT
        assert bin_gap(row, f_t) <= 1 and bin_gap(col, f_r) <= 1

    def test_reshape_round_trip(self, cfg, rng):
        v = rng.standard_normal(cfg.MN) + 1j * rng.standard_normal(cfg.MN)
        Z = np.fft.ifft2(spectrum_2d(v, cfg, cfg.M))
        assert np.allclose(Z.T.ravel(), v)

    def test_window_forms_agree(self, cfg, rng):
        v = rng.standard_normal(cfg.MN) + 0j
        w = np.hamming(6)
        assert np.allclose(spectrum_2d(v, cfg, 32, (w, w)), spectrum_2d(v, cfg, 32, np.outer(w, w)))

    def test_input_checks(self, cfg):
        with pytest.raises(ValueError):
            spectrum_2d(np.ones(35), cfg, 64)
        with pytest.raises(ValueError):
            spectrum_2d(np.ones(36), cfg, 4)

    def test_global_phase_invariance(self, cfg):
        v = joint_steering(cfg, deg(12), 333.0)
        a = np.abs(spectrum_2d(v, cfg, 128))
        b = np.abs(spectrum_2d(np.exp(1.3j) * v, cfg, 128))
        assert np.allclose(a, b)


class TestPeakToParams:
    def test_dc(self, cfg):
        assert peak_to_params((0, 0), cfg, NFFT) == (0.0, 0.0)

    def _peak(self, cfg, tg, nfft=NFFT):
        return argmax2(spectrum_2d(joint_steering(cfg, tg.theta, tg.range), cfg, nfft))

    def test_range_with_hint(self, cfg):
        tg = Target(0.0, 5000.0)
        r, th = peak_to_params(self._peak(cfg, tg), cfg, NFFT, coarse_range_hint=5000.0)
        assert abs(r - 5000.0) <= cfg.ambiguity_period / NFFT
        assert th == 0.0

    def test_angle_resolution(self, cfg):
        tg = Target(deg(30), 0.0)
        _, th = peak_to_params(self._peak(cfg, tg), cfg, NFFT)
        bound = cfg.c / (NFFT * cfg.d_r * cfg.f0 * np.cos(tg.theta))
        assert abs(th - tg.theta) < bound

    def test_no_valid_angle(self):
        cfg = RadarConfig(d_r=0.01)
        with pytest.raises(ValueError):
            peak_to_params((0, int(0.45 * NFFT)), cfg, NFFT)

    def test_zero_frequency_step(self):
        cfg = RadarConfig(delta_f=0.0)
        assert peak_to_params((3, 0), cfg, NFFT)[0] == 0.0

    @settings(max_examples=200, deadline=None)
    @given(theta=st.floats(-1.4, 1.4), frac=st.floats(0.0, 0.999))
    def test_round_trip(self, theta, frac):
        cfg = RadarConfig()
        r = frac * cfg.ambiguity_period
        tg = Target(theta, r)
        est_r, est_th = peak_to_params(self._peak(cfg, tg), cfg, NFFT)
        cell_r, cell_th = range_angle_cell(r, theta, cfg, NFFT)
        hat_r, hat_th = range_angle_cell(est_r, est_th, cfg, NFFT)
        assert min(abs(cell_th - hat_th), NFFT - abs(cell_th - hat_th)) <= 1
        assert min(abs(cell_r - hat_r), NFFT - abs(cell_r - hat_r)) <= 1


class TestFindPeaks:
    def test_ordering_and_floor(self):
        P = np.zeros((16, 16))
        P[3, 4] = 10.0
        P[10, 12] = 1.0
        P[7, 7] = 0.05
        assert find_peaks(P, floor_db=-20) == [(3, 4), (10, 12)]
        assert find_peaks(P, floor_db=-30) == [(3, 4), (10, 12), (7, 7)]
        assert find_peaks(P, count=1) == [(3, 4)]

    def test_periodic_neighbours(self):
        P = np.zeros((8, 8))
        P[0, 0] = 2.0
        P[7, 7] = 1.0
        assert find_peaks(P, floor_db=-60) == [(0, 0)]

    def test_flat_grid(self):
        assert find_peaks(np.ones((4, 4))) == []
        assert find_peaks(np.zeros((4, 4))) == []


class TestEstimateTargets:
    def test_noiseless_two_targets(self, cfg):
        tgs = [Target(deg(-20), 5000.0), Target(deg(5), 1500.0)]
        X = target_snapshot_matrix(cfg, tgs, np.random.default_rng(1))
        es = estimate_targets(X, cfg, 2, NFFT, range_hints=[5000.0, 1500.0])
        assert isinstance(es, EstimateSet) and es.ambiguity_period_m == cfg.ambiguity_period
        m = evaluate_trial(es, tgs, angle_unit="rad")
        assert m.success and m.matched == 2

    def test_refinement_tightens_angle(self, cfg):
        tg = [Target(deg(23.3), 812.0)]
        X = target_snapshot_matrix(cfg, tg, np.random.default_rng(2))
        coarse = estimate_targets(X, cfg, 1, 64, [812.0]).estimates[0]
        fine = estimate_targets(X, cfg, 1, 64, [812.0], refine=True).estimates[0]
        assert abs(fine.theta - tg[0].theta) < abs(coarse.theta - tg[0].theta)

    def test_power_spectrum_rotation_invariant(self, cfg, rng):
        X = target_snapshot_matrix(cfg, [Target(0.1, 10.0), Target(-0.3, 90.0)], rng)
        Q, _ = np.linalg.qr(rng.standard_normal((cfg.pulses, cfg.pulses)))
        assert np.allclose(power_spectrum(X, cfg, 2, 64), power_spectrum(X @ Q, cfg, 2, 64))


class TestSeparability:
    def _cells(self, cfg, tgs):
        return [range_angle_cell(*peak_to_params(
            argmax2(spectrum_2d(joint_steering(cfg, t.theta, t.range), cfg, NFFT)), cfg, NFFT),
            cfg, NFFT) for t in tgs]

    def test_same_range_splits_in_angle(self, cfg):
        (r1, a1), (r2, a2) = self._cells(cfg, [Target(deg(-20), 5000.0), Target(deg(5), 5000.0)])
        assert abs(r1 - r2) <= 1 and abs(a1 - a2) > 1

    def test_same_angle_splits_in_range(self, cfg):
        (r1, a1), (r2, a2) = self._cells(cfg, [Target(deg(5), 1500.0), Target(deg(5), 5000.0)])
        assert abs(a1 - a2) <= 1 and abs(r1 - r2) > 1


class TestEvaluate:
    truth = [Target(deg(-20), 5000.0), Target(deg(5), 1500.0)]

    def _set(self, pairs):
        return EstimateSet([Estimate(r, th, 1.0) for r, th in pairs], NFFT, 497.9)

    def test_exact(self):
        m = evaluate_trial(self._set([(t.range, t.theta) for t in self.truth]), self.truth)
        assert m.success and m.rmse_range_m == 0 and m.rmse_theta_deg == 0

    def test_range_rule(self):
        t = Target(0.0, 5000.0)
        assert not evaluate_trial(self._set([(5011.0, 0.0)]), [t]).success
        assert evaluate_trial(self._set([(5009.0, 0.0)]), [t]).success

    def test_permutation_invariant(self):
        pairs = [(5003.0, deg(-19.99)), (1496.0, deg(5.004))]
        a = evaluate_trial(self._set(pairs), self.truth)
        b = evaluate_trial(self._set(pairs[::-1]), self.truth)
        assert (a.rmse_range_m, a.rmse_theta_deg, a.success) == (b.rmse_range_m, b.rmse_theta_deg, b.success)
        assert a.rmse_range_m == pytest.approx(np.sqrt((9 + 16) / 2))

    def test_unmatched_truth_fails(self):
        m = evaluate_trial(self._set([(5000.0, deg(-20))]), self.truth)
        assert m.unmatched == 1 and not m.success

    def test_angle_units(self):
        t = [Target(0.0, 100.0)]
        est = self._set([(100.0, deg(0.2))])
        assert not evaluate_trial(est, t, angle_unit="deg").success
        assert evaluate_trial(est, t, angle_unit="rad").success
        with pytest.raises(ValueError):
            evaluate_trial(est, t, angle_unit="grad")

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            evaluate_trial(self._set([]), self.truth)
