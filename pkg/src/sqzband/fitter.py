"""Weighted nonlinear least-squares fits of heterodyne sideband spectra.

Two-stage protocol: the drive-off spectrum is fitted with one pair of
Lorentzians sharing a single width (-> Gamma_eff, R0, n_bar); the drive-on
spectrum with two pairs whose widths are tied to Gamma_eff (1 -/+ s) with
Gamma_eff frozen at the off-fit value and s the only extra shape parameter
(-> s, R+, R-).  Weights follow the averaged-periodogram noise law
sigma_bin = PSD_model / sqrt(n_avg), refreshed from the current model.

s enters the optimizer through a logistic transform onto (0, 0.999): the
spectra depend only on |s| and the transform keeps the fit smooth at the
s = 0 boundary, which is what folds the no-drive fitted-s distribution to
small positive values.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.special import expit, logit

from .core import TWO_PI, DerivedRates
from .data import OnOffPair, SpectrumData
from .errors import FitFailureError, GridError
from .lineshape import Ratios
from .synthesizer import DetectionConfig, synth_onoff_from_rates

S_MAX = 0.999
_GTOL = 1e-10
# cost plateaus long before 1e-12 when s is pinned at its lower bound; 1e-9
# stops the boundary walk ~3x earlier at < 2e-4 shift in the estimates
_FTOL = 1e-9
_MAX_NFEV = 500
_WEIGHT_REFRESH = 1


@dataclass(frozen=True, eq=False)
class FitResult:
    """Fitted parameters (Hz at the data boundary), uncertainties, ratios."""

    params: dict
    sigmas: dict
    chi2_reduced: float
    ratios: Ratios | None
    n_bar_inferred: float | None
    converged: bool
    n_iter: int
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        out = {
            "params": dict(self.params),
            "sigmas": dict(self.sigmas),
            "chi2_reduced": self.chi2_reduced,
            "converged": self.converged,
            "n_iter": self.n_iter,
            "flags": list(self.flags),
            "n_bar_inferred": self.n_bar_inferred,
        }
        if self.ratios is not None:
            out["ratios"] = {
                "r0": self.ratios.r0,
                "r_plus": self.ratios.r_plus,
                "r_minus": self.ratios.r_minus,
            }
        return out


@dataclass(frozen=True)
class ExperimentTruth:
    """Model-level truth for synthetic campaigns (rates in rad/s)."""

    gamma_eff: float
    s: float
    n_bar: float
    phi: float = 0.0
    center_hz: float = 530e3
    detection: DetectionConfig = field(default_factory=DetectionConfig)

    def rates_pair(self) -> tuple[DerivedRates, DerivedRates]:
        on = DerivedRates.from_effective(
            self.gamma_eff,
            self.s,
            phi=self.phi,
            omega_m=TWO_PI * self.center_hz,
            n_bar=self.n_bar,
        )
        return on, on.without_parametric_drive()


@dataclass(frozen=True)
class BiasStudyReport:
    """Moments and histogram of fitted s over a no-drive ensemble."""

    n_trials: int
    n_failed: int
    mean_s: float
    std_s: float
    skewness_s: float
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    valid: bool

    def to_dict(self) -> dict:
        return {
            "n_trials": self.n_trials,
            "n_failed": self.n_failed,
            "mean_s": self.mean_s,
            "std_s": self.std_s,
            "skewness_s": self.skewness_s,
            "valid": self.valid,
            "hist_edges": list(map(float, self.hist_edges)),
            "hist_counts": list(map(int, self.hist_counts)),
        }


def _lorentz(f, center, gamma_hz):
    """Unit-area Lorentzian in per-Hz density form."""
    d = f - center
    return (gamma_hz / TWO_PI) / (d * d + gamma_hz * gamma_hz / 4)


def _lorentz_terms(f, center, gamma_hz):
    """(L, dL/dcenter, dL/dgamma) sharing one denominator evaluation."""
    d = f - center
    quarter = gamma_hz * gamma_hz / 4
    den = d * d + quarter
    inv = 1.0 / den
    line = (gamma_hz / TWO_PI) * inv
    d_center = line * 2 * d * inv
    d_gamma = (1 / TWO_PI) * (d * d - quarter) * inv * inv
    return line, d_center, d_gamma


class _SinglePairModel:
    """floor + two equal-width Lorentzians: p = (floor, c1, c2, gamma, a1, a2)."""

    names = ("floor", "center_1_hz", "center_2_hz", "gamma_eff_hz", "area_1", "area_2")

    @staticmethod
    def model(p, f):
        floor, c1, c2, g, a1, a2 = p
        return floor + a1 * _lorentz(f, c1, g) + a2 * _lorentz(f, c2, g)

    @staticmethod
    def jac(p, f):
        floor, c1, c2, g, a1, a2 = p
        l1, dc1, dg1 = _lorentz_terms(f, c1, g)
        l2, dc2, dg2 = _lorentz_terms(f, c2, g)
        cols = np.empty((f.size, 6))
        cols[:, 0] = 1.0
        cols[:, 1] = a1 * dc1
        cols[:, 2] = a2 * dc2
        cols[:, 3] = a1 * dg1 + a2 * dg2
        cols[:, 4] = l1
        cols[:, 5] = l2
        return cols


class _DoublePairModel:
    """floor + two Lorentzian pairs with widths Gamma_eff (1 -/+ s); s = S_MAX expit(q).

    p = (floor, c1, c2, q, a1_narrow, a1_broad, a2_narrow, a2_broad); the
    shared Gamma_eff is frozen (from the paired off-fit).
    """

    names = (
        "floor",
        "center_1_hz",
        "center_2_hz",
        "q",
        "area_1_narrow",
        "area_1_broad",
        "area_2_narrow",
        "area_2_broad",
    )

    def __init__(self, gamma_eff_hz: float):
        self.gamma_eff_hz = gamma_eff_hz

    def widths(self, q):
        s = S_MAX * expit(q)
        return self.gamma_eff_hz * (1 - s), self.gamma_eff_hz * (1 + s)

    def model(self, p, f):
        floor, c1, c2, q, a1n, a1b, a2n, a2b = p
        gn, gb = self.widths(q)
        return (
            floor
            + a1n * _lorentz(f, c1, gn)
            + a1b * _lorentz(f, c1, gb)
            + a2n * _lorentz(f, c2, gn)
            + a2b * _lorentz(f, c2, gb)
        )

    def jac(self, p, f):
        floor, c1, c2, q, a1n, a1b, a2n, a2b = p
        gn, gb = self.widths(q)
        e = expit(q)
        ds_dq = S_MAX * e * (1 - e)
        l1n, dc1n, dg1n = _lorentz_terms(f, c1, gn)
        l1b, dc1b, dg1b = _lorentz_terms(f, c1, gb)
        l2n, dc2n, dg2n = _lorentz_terms(f, c2, gn)
        l2b, dc2b, dg2b = _lorentz_terms(f, c2, gb)
        dgn = -self.gamma_eff_hz * ds_dq
        dgb = self.gamma_eff_hz * ds_dq
        cols = np.empty((f.size, 8))
        cols[:, 0] = 1.0
        cols[:, 1] = a1n * dc1n + a1b * dc1b
        cols[:, 2] = a2n * dc2n + a2b * dc2b
        cols[:, 3] = (a1n * dg1n + a2n * dg2n) * dgn + (a1b * dg1b + a2b * dg2b) * dgb
        cols[:, 4] = l1n
        cols[:, 5] = l1b
        cols[:, 6] = l2n
        cols[:, 7] = l2b
        return cols


def _smooth(y: np.ndarray, width: int = 7) -> np.ndarray:
    kernel = np.ones(width) / width
    return np.convolve(y, kernel, mode="same")


def _initial_guess(freq, psd):
    """Floor, two peak centers, common width and areas from the raw data.

    Centers come from the two largest separated maxima of a lightly smoothed
    spectrum, the width from the Lorentzian peak/area relation and areas from
    trapezoidal integration above the floor.
    """
    smooth = _smooth(psd)
    floor = float(np.percentile(smooth, 10))
    res = freq[1] - freq[0]

    i1 = int(np.argmax(smooth))
    height1 = smooth[i1] - floor
    area_total = float(np.trapezoid(np.clip(psd - floor, 0, None), freq))
    gamma0 = max(2 * (area_total / 2) / (math.pi * max(height1, 1e-300)), 2 * res)

    exclude = np.abs(freq - freq[i1]) < 10 * gamma0
    rest = np.where(~exclude, smooth, -np.inf)
    i2 = int(np.argmax(rest))
    c_pair = sorted((freq[i1], freq[i2]))

    areas = []
    for c in c_pair:
        window = np.abs(freq - c) <= 5 * gamma0
        areas.append(float(np.trapezoid(np.clip(psd[window] - floor, 0, None), freq[window])))
    return floor, c_pair[0], c_pair[1], gamma0, areas[0], areas[1]


def _sigma_floor(values: np.ndarray) -> float:
    top = float(np.max(np.abs(values))) if values.size else 1.0
    return max(top * 1e-12, 1e-300)


def _run_weighted_fit(model_fn, jac_fn, p0, freq, psd, n_avg):
    """IRLS loop: LM passes with sigma = model / sqrt(n_avg) refreshed."""
    sigma = np.maximum(_smooth(psd), _sigma_floor(psd)) / math.sqrt(n_avg)
    result = None
    p = np.asarray(p0, dtype=float)
    for _ in range(_WEIGHT_REFRESH + 1):
        def resid(x):
            return (model_fn(x, freq) - psd) / sigma

        def jac(x):
            return jac_fn(x, freq) / sigma[:, None]

        result = least_squares(
            resid,
            p,
            jac=jac,
            method="lm",
            gtol=_GTOL,
            xtol=1e-12,
            ftol=_FTOL,
            max_nfev=_MAX_NFEV,
            x_scale="jac",
        )
        p = result.x
        sigma = np.maximum(model_fn(p, freq), _sigma_floor(psd)) / math.sqrt(n_avg)
    return result, sigma


def _param_sigmas(jac: np.ndarray) -> np.ndarray:
    jtj = jac.T @ jac
    cov = np.linalg.pinv(jtj)
    return np.sqrt(np.clip(np.diag(cov), 0.0, None))


def _chi2_reduced(res, n_params: int) -> float:
    dof = max(res.fun.size - n_params, 1)
    return float(2 * res.cost / dof)


def _coverage_flags(data: SpectrumData, centers_hz, width_hz) -> tuple[str, ...]:
    """Flag peaks whose fit region is mostly masked out (error inflation)."""
    flags = []
    for c in centers_hz:
        window = np.abs(data.freq_hz - c) <= width_hz / 2
        if window.sum() and data.mask[window].mean() > 0.8:
            flags.append("peak_region_masked")
            break
    return tuple(flags)


def apply_mask(data: SpectrumData, exclusion_windows) -> SpectrumData:
    """Mark bins inside the given (lo_hz, hi_hz) windows as excluded."""
    mask = data.mask.copy()
    lo_grid, hi_grid = data.freq_hz[0], data.freq_hz[-1]
    for lo, hi in exclusion_windows:
        if hi < lo:
            raise GridError(f"window ({lo}, {hi}) is inverted")
        if hi < lo_grid or lo > hi_grid:
            raise GridError(f"window ({lo}, {hi}) lies outside the grid")
        mask |= (data.freq_hz >= lo) & (data.freq_hz <= hi)
    return data.with_mask(mask)


def fit_single_pair(
    data: SpectrumData,
    init_hint: dict | None = None,
    ratio_correction: float = 1.0,
) -> FitResult:
    """One pair of equal-width Lorentzians over a floor (drive-off model).

    Returns Gamma_eff, the Stokes/anti-Stokes area ratio R0 (after the
    optional external ratio correction) and the occupancy implied by
    R0 = 1 + 1/n.  The higher-frequency peak is the Stokes sideband.
    """
    sel = data.included()
    freq, psd = data.freq_hz[sel], data.psd[sel]
    guess = list(_initial_guess(freq, psd))
    if init_hint:
        for i, name in enumerate(_SinglePairModel.names):
            if name in init_hint:
                guess[i] = init_hint[name]
    res, _ = _run_weighted_fit(
        _SinglePairModel.model, _SinglePairModel.jac, guess, freq, psd, data.n_avg
    )
    p = res.x
    flags = list(_coverage_flags(data, p[1:3], abs(p[3])))
    converged = bool(res.success)
    if p[3] <= 0:
        flags.append("negative_width")
        converged = False

    sig = _param_sigmas(res.jac)
    params = dict(zip(_SinglePairModel.names, map(float, p)))
    sigmas = dict(zip(_SinglePairModel.names, map(float, sig)))
    # Stokes is the upper sideband
    if params["center_2_hz"] >= params["center_1_hz"]:
        a_stokes, a_anti = params["area_2"], params["area_1"]
    else:
        a_stokes, a_anti = params["area_1"], params["area_2"]
    r0 = math.inf if a_anti == 0 else (a_stokes / a_anti) * ratio_correction
    ratios = Ratios(r0=r0, r_plus=r0, r_minus=r0)
    n_bar = 1.0 / (r0 - 1.0) if math.isfinite(r0) and r0 > 1 else math.nan
    params["r0"] = r0
    return FitResult(
        params=params,
        sigmas=sigmas,
        chi2_reduced=_chi2_reduced(res, len(p)),
        ratios=ratios,
        n_bar_inferred=n_bar,
        converged=converged,
        n_iter=int(res.nfev),
        flags=tuple(flags),
    )


_S_SCAN = (0.02, 0.08, 0.18, 0.32, 0.5, 0.7, 0.9)


def _scan_linear_start(gamma_eff_hz, freq, psd, sigma, c1, c2):
    """Best (floor, s, areas) over a coarse s grid, areas by weighted linear LS.

    At fixed widths and centers the model is linear in floor and the four
    component areas, so each grid point is one lstsq solve; this puts the
    nonlinear polish close to the optimum."""
    target = psd / sigma
    ones = 1.0 / sigma
    best = None
    for s in _S_SCAN:
        gn, gb = gamma_eff_hz * (1 - s), gamma_eff_hz * (1 + s)
        design = np.stack(
            [
                ones,
                _lorentz(freq, c1, gn) / sigma,
                _lorentz(freq, c1, gb) / sigma,
                _lorentz(freq, c2, gn) / sigma,
                _lorentz(freq, c2, gb) / sigma,
            ],
            axis=1,
        )
        coef, *_ = np.linalg.lstsq(design, target, rcond=None)
        cost = float(np.sum((design @ coef - target) ** 2))
        if best is None or cost < best[0]:
            best = (cost, s, coef)
    _, s, coef = best
    return [float(coef[0]), c1, c2, float(logit(s / S_MAX)), *map(float, coef[1:])]


def fit_double_pair(
    data: SpectrumData,
    gamma_eff_fixed: float,
    init_hint: dict | None = None,
    ratio_correction: float = 1.0,
) -> FitResult:
    """Two Lorentzian pairs with widths Gamma_eff (1 -/+ s), s free (drive-on model).

    gamma_eff_fixed is angular (rad/s), normally the paired off-fit value.
    Returns s and the broad/narrow area ratios R+ and R-.
    """
    gamma_eff_hz = gamma_eff_fixed / TWO_PI
    if gamma_eff_hz <= 0:
        raise ValueError("gamma_eff_fixed must be positive")
    model = _DoublePairModel(gamma_eff_hz)
    sel = data.included()
    freq, psd = data.freq_hz[sel], data.psd[sel]
    floor, c1, c2, _, a1, a2 = _initial_guess(freq, psd)
    if init_hint:
        c1 = init_hint.get("center_1_hz", c1)
        c2 = init_hint.get("center_2_hz", c2)
    sigma0 = np.maximum(_smooth(psd), _sigma_floor(psd)) / math.sqrt(data.n_avg)
    guess = _scan_linear_start(gamma_eff_hz, freq, psd, sigma0, c1, c2)
    if init_hint:
        for i, name in enumerate(_DoublePairModel.names):
            if name in init_hint:
                guess[i] = init_hint[name]
        if "s" in init_hint:
            guess[3] = float(logit(min(max(init_hint["s"], 1e-6), S_MAX * 0.999) / S_MAX))
    res, _ = _run_weighted_fit(model.model, model.jac, guess, freq, psd, data.n_avg)
    p = res.x
    s_hat = float(S_MAX * expit(p[3]))
    e = expit(p[3])
    ds_dq = S_MAX * e * (1 - e)

    sig = _param_sigmas(res.jac)
    params = dict(zip(_DoublePairModel.names, map(float, p)))
    sigmas = dict(zip(_DoublePairModel.names, map(float, sig)))
    params["s"] = s_hat
    params["gamma_eff_hz"] = gamma_eff_hz
    sigmas["s"] = float(sig[3] * ds_dq)

    flags = list(_coverage_flags(data, (p[1], p[2]), gamma_eff_hz))
    if s_hat < 1e-4:
        flags.append("s_at_lower_bound")
    if s_hat > S_MAX * 0.999:
        flags.append("s_at_upper_bound")

    if params["center_2_hz"] >= params["center_1_hz"]:
        a_s_n, a_s_b = params["area_2_narrow"], params["area_2_broad"]
        a_a_n, a_a_b = params["area_1_narrow"], params["area_1_broad"]
    else:
        a_s_n, a_s_b = params["area_1_narrow"], params["area_1_broad"]
        a_a_n, a_a_b = params["area_2_narrow"], params["area_2_broad"]
    r_plus = (a_s_b / a_a_b) * ratio_correction if a_a_b != 0 else math.inf
    r_minus = (a_s_n / a_a_n) * ratio_correction if a_a_n != 0 else math.inf
    r0 = (
        ((a_s_b + a_s_n) / (a_a_b + a_a_n)) * ratio_correction
        if (a_a_b + a_a_n) != 0
        else math.inf
    )
    return FitResult(
        params=params,
        sigmas=sigmas,
        chi2_reduced=_chi2_reduced(res, len(p)),
        ratios=Ratios(r0=r0, r_plus=r_plus, r_minus=r_minus),
        n_bar_inferred=None,
        converged=bool(res.success),
        n_iter=int(res.nfev),
        flags=tuple(flags),
    )


def fit_pair_two_stage(pair: OnOffPair, ratio_correction: float = 1.0):
    """Off-fit then on-fit with Gamma_eff frozen; returns (off, on) results."""
    off = fit_single_pair(pair.drive_off, ratio_correction=ratio_correction)
    gamma_eff = off.params["gamma_eff_hz"] * TWO_PI
    hint = {
        "center_1_hz": off.params["center_1_hz"],
        "center_2_hz": off.params["center_2_hz"],
    }
    on = fit_double_pair(
        pair.drive_on, gamma_eff, init_hint=hint, ratio_correction=ratio_correction
    )
    return off, on


def _bias_trial(args) -> float | None:
    truth, root_seed, idx = args
    rates_on, rates_off = truth.rates_pair()
    pair = synth_onoff_from_rates(
        rates_on,
        rates_off,
        n_bar=truth.n_bar,
        detection=truth.detection,
        seed=root_seed,
    )
    try:
        off, on = fit_pair_two_stage(pair)
    except (np.linalg.LinAlgError, ValueError):
        return None
    if not (off.converged and on.converged):
        return None
    return on.params["s"]


def _trial_inputs(truth, root_seed: int, n_trials: int):
    from .seeding import task_seed

    return [(truth, task_seed(root_seed, i), i) for i in range(n_trials)]


def bias_study(
    truth: ExperimentTruth, n_trials: int, root_seed: int, n_jobs: int = 1
) -> BiasStudyReport:
    """Fitted-s distribution over synthetic no-drive spectra.

    Each trial draws an independent on/off pair at s = 0 truth, runs the
    two-stage fit and records the fitted s.  Aggregation is index-ordered,
    so worker count does not change the report.
    """
    if truth.s != 0:
        raise ValueError("bias study is defined for s = 0 truth")
    if n_trials < 100:
        raise ValueError("need at least 100 trials for reported moments")
    inputs = _trial_inputs(truth, root_seed, n_trials)
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_bias_trial, inputs, chunksize=32))
    else:
        results = [_bias_trial(item) for item in inputs]
    values = np.array([r for r in results if r is not None], dtype=float)
    n_failed = n_trials - values.size
    if values.size < 2:
        raise FitFailureError("bias study produced fewer than 2 usable fits")
    mean = float(values.mean())
    std = float(values.std(ddof=1))
    centered = values - mean
    m2 = float((centered**2).mean())
    m3 = float((centered**3).mean())
    skew = m3 / m2**1.5 if m2 > 0 else 0.0
    upper = max(0.2, float(values.max()))
    counts, edges = np.histogram(values, bins=60, range=(0.0, upper))
    return BiasStudyReport(
        n_trials=n_trials,
        n_failed=n_failed,
        mean_s=mean,
        std_s=std,
        skewness_s=skew,
        hist_edges=edges,
        hist_counts=counts,
        valid=(n_failed <= 0.05 * n_trials),
    )


def _recovery_trial(args) -> dict | None:
    truth, seed, idx = args
    rates_on, rates_off = truth.rates_pair()
    pair = synth_onoff_from_rates(
        rates_on, rates_off, n_bar=truth.n_bar, detection=truth.detection, seed=seed
    )
    try:
        off, on = fit_pair_two_stage(pair)
    except (np.linalg.LinAlgError, ValueError):
        return None
    if not (off.converged and on.converged):
        return None
    return {
        "index": idx,
        "s": on.params["s"],
        "s_sigma_fit": on.sigmas["s"],
        "gamma_eff_hz": off.params["gamma_eff_hz"],
        "r0": off.ratios.r0,
        "r_plus": on.ratios.r_plus,
        "r_minus": on.ratios.r_minus,
        "n_bar": off.n_bar_inferred,
    }


def recovery_campaign(
    truth: ExperimentTruth, n_repeats: int, root_seed: int, n_jobs: int = 1
) -> list[dict]:
    """Repeated synth -> two-stage-fit rounds; per-repeat recovered values."""
    inputs = _trial_inputs(truth, root_seed, n_repeats)
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_recovery_trial, inputs, chunksize=8))
    else:
        results = [_recovery_trial(item) for item in inputs]
    kept = [r for r in results if r is not None]
    if len(kept) < 0.5 * n_repeats:
        raise FitFailureError("more than half of the campaign repeats failed to fit")
    return kept
