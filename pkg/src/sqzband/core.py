"""Closed-form rates of a mechanical oscillator driven by a two-tone pump.

The pump consists of two tones at omega_L -/+ Omega_m injected into a cavity
detuned by Delta (mean detuning of the pair from cavity resonance).  The
lower tone cools, the pair together modulates the mechanical spring at
2*Omega_m and squeezes one motional quadrature.  Everything here is the
quasi-resonant weak-coupling model: intracavity tone amplitudes, optical
damping, self-consistent resonance shift, parametric rate, Stokes /
anti-Stokes scattering rates and occupancies.

Units: every rate and frequency in this module is angular (rad/s).  The
config layer is the single place where Hz from user input are multiplied
by 2*pi.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

from scipy.constants import hbar, k as k_B

from .errors import (
    AntiDampingError,
    InternalConsistencyError,
    ParametricInstabilityError,
    SelfConsistencyError,
    ZeroPumpError,
)

TWO_PI = 2.0 * math.pi

# relative tolerance for the A- - A+ = Gamma_opt identity check
_IDENTITY_RTOL = 1e-10


@dataclass(frozen=True)
class SystemParams:
    """Static physical parameters (all angular rates, rad/s).

    kappa          cavity linewidth
    kappa_in       input coupling rate (<= kappa)
    g0             single-photon optomechanical coupling
    omega_m0       bare mechanical resonance
    gamma_m        mechanical damping
    delta          mean two-tone detuning from cavity resonance (signed)
    n_th           thermal bath occupancy
    bath_temperature  optional record of the temperature n_th came from (K)
    n_extra        additive occupancy for unmodelled back-action (default 0)
    """

    kappa: float
    kappa_in: float
    g0: float
    omega_m0: float
    gamma_m: float
    delta: float
    n_th: float
    bath_temperature: float | None = None
    n_extra: float = 0.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if not 0 < self.kappa_in <= self.kappa:
            raise ValueError("kappa_in must satisfy 0 < kappa_in <= kappa")
        if not self.omega_m0 > 0:
            raise ValueError("omega_m0 must be positive")
        if not self.gamma_m > 0:
            raise ValueError("gamma_m must be positive")
        if self.n_th < 0:
            raise ValueError("n_th must be nonnegative")
        if self.g0 < 0:
            raise ValueError("g0 must be nonnegative")

    @classmethod
    def from_hz(
        cls,
        *,
        kappa_hz: float,
        g0_hz: float,
        omega_m_hz: float,
        gamma_m_hz: float,
        delta_hz: float,
        kappa_in_hz: float | None = None,
        n_th: float | None = None,
        temperature_k: float | None = None,
        n_extra: float = 0.0,
    ) -> "SystemParams":
        """Build from user-facing Hz values (the one Hz -> rad/s boundary).

        kappa_in defaults to kappa/2 (symmetric cavity).  n_th may be given
        directly or through a bath temperature; an explicit n_th wins.
        """
        omega_m0 = TWO_PI * omega_m_hz
        if n_th is None:
            if temperature_k is None:
                raise ValueError("provide n_th or temperature_k")
            n_th = thermal_occupation(temperature_k, omega_m0)
        kappa = TWO_PI * kappa_hz
        kappa_in = kappa / 2.0 if kappa_in_hz is None else TWO_PI * kappa_in_hz
        return cls(
            kappa=kappa,
            kappa_in=kappa_in,
            g0=TWO_PI * g0_hz,
            omega_m0=omega_m0,
            gamma_m=TWO_PI * gamma_m_hz,
            delta=TWO_PI * delta_hz,
            n_th=n_th,
            bath_temperature=temperature_k,
            n_extra=n_extra,
        )


@dataclass(frozen=True)
class PumpConfig:
    """Input tone amplitudes, sqrt(photons/s), complex.

    alpha_in_minus drives at omega_L - Omega_m (cooling side),
    alpha_in_plus at omega_L + Omega_m.
    """

    alpha_in_minus: complex
    alpha_in_plus: complex

    @classmethod
    def from_polar(cls, mag_minus, phase_minus_deg, mag_plus, phase_plus_deg):
        return cls(
            alpha_in_minus=mag_minus * cmath.exp(1j * math.radians(phase_minus_deg)),
            alpha_in_plus=mag_plus * cmath.exp(1j * math.radians(phase_plus_deg)),
        )

    def scaled(self, factor: float) -> "PumpConfig":
        """Both tones scaled by a common real amplitude factor."""
        return PumpConfig(self.alpha_in_minus * factor, self.alpha_in_plus * factor)

    @property
    def total_flux(self) -> float:
        return abs(self.alpha_in_minus) ** 2 + abs(self.alpha_in_plus) ** 2


@dataclass(frozen=True)
class IntracavityField:
    """Steady-state intracavity tone amplitudes and the derived couplings.

    g^2 = g0^2 (|alpha_-|^2 + |alpha_+|^2) is the total coupling;
    epsilon_c = |alpha_-|^2 / (|alpha_-|^2 + |alpha_+|^2) the cooling-tone
    share of the intracavity power.
    """

    alpha_minus: complex
    alpha_plus: complex
    g: float
    epsilon_c: float

    def __post_init__(self):
        total = abs(self.alpha_minus) ** 2 + abs(self.alpha_plus) ** 2
        if total > 0:
            eps = abs(self.alpha_minus) ** 2 / total
            if abs(eps - self.epsilon_c) > 1e-12 * max(1.0, abs(eps)):
                raise InternalConsistencyError("epsilon_c inconsistent with amplitudes")
        if self.g < 0 or not 0.0 <= self.epsilon_c <= 1.0:
            raise ValueError("g must be >= 0 and epsilon_c in [0, 1]")


@dataclass(frozen=True)
class DerivedRates:
    """All derived rates for one operating point (angular units).

    gamma_par and s are signed (sign follows the detuning); the spectra are
    invariant under s -> -s, so reporting layers fold to |s|.  `anomalous`
    is the coefficient of the two-tone input-noise cross correlator,
    -g0^2 kappa alpha_-^* alpha_+ / (Delta^2 + kappa^2/4).
    """

    omega_m: float
    gamma_opt: float
    gamma_eff: float
    gamma_par: float
    phi: float
    s: float
    gamma_plus: float
    gamma_minus: float
    a_minus: float
    a_plus: float
    n_ba: float | None
    n_bar: float
    anomalous: complex

    def __post_init__(self):
        if not self.gamma_eff > 0:
            raise AntiDampingError("gamma_eff must be positive")
        if not abs(self.s) < 1:
            raise ParametricInstabilityError("stable only for |s| < 1")
        if abs(self.gamma_plus - self.gamma_eff * (1 + self.s)) > 1e-12 * self.gamma_eff:
            raise InternalConsistencyError("gamma_plus != gamma_eff * (1 + s)")
        if abs(self.gamma_minus - self.gamma_eff * (1 - self.s)) > 1e-12 * self.gamma_eff:
            raise InternalConsistencyError("gamma_minus != gamma_eff * (1 - s)")

    @property
    def s_folded(self) -> float:
        """|s|: the reported squeezing parameter (spectra are even in s)."""
        return abs(self.s)

    @classmethod
    def from_effective(
        cls,
        gamma_eff: float,
        s: float,
        *,
        phi: float = 0.0,
        omega_m: float = 0.0,
        n_bar: float = 0.0,
        anomalous: complex = 0.0j,
    ) -> "DerivedRates":
        """Model-level rates without a pump behind them.

        Used when the effective width and squeezing parameter are the truth
        values themselves (synthetic campaigns, abstract sweeps).  The
        optical rates are zero, so damping is formally all mechanical.
        """
        return cls(
            omega_m=omega_m,
            gamma_opt=0.0,
            gamma_eff=gamma_eff,
            gamma_par=s * gamma_eff,
            phi=phi,
            s=s,
            gamma_plus=gamma_eff * (1 + s),
            gamma_minus=gamma_eff * (1 - s),
            a_minus=0.0,
            a_plus=0.0,
            n_ba=None,
            n_bar=n_bar,
            anomalous=anomalous,
        )

    def without_parametric_drive(self) -> "DerivedRates":
        """Same cooling, parametric effect switched off (drive-off emulation)."""
        return replace(
            self,
            gamma_par=0.0,
            s=0.0,
            gamma_plus=self.gamma_eff,
            gamma_minus=self.gamma_eff,
            anomalous=0.0j,
        )


def thermal_occupation(temperature: float, omega: float) -> float:
    """Bose-Einstein occupancy 1 / (exp(hbar omega / kB T) - 1)."""
    if temperature <= 0 or omega <= 0:
        raise ValueError("temperature and omega must be positive")
    # expm1 keeps the high-temperature limit accurate (x ~ 1e-6 is typical)
    return 1.0 / math.expm1(hbar * omega / (k_B * temperature))


def intracavity_amplitudes(
    params: SystemParams, pump: PumpConfig, omega_m: float
) -> IntracavityField:
    """Intracavity amplitudes of the two tones at mechanical frequency omega_m.

    alpha_pm = alpha_pm_in sqrt(kappa_in) / (-i(Delta pm Omega_m) + kappa/2)
    """
    if omega_m <= 0:
        raise ValueError("omega_m must be positive")
    if pump.total_flux == 0:
        raise ZeroPumpError("zero total pump power: epsilon_c undefined")
    root_kin = math.sqrt(params.kappa_in)
    alpha_minus = pump.alpha_in_minus * root_kin / (
        -1j * (params.delta - omega_m) + params.kappa / 2
    )
    alpha_plus = pump.alpha_in_plus * root_kin / (
        -1j * (params.delta + omega_m) + params.kappa / 2
    )
    p_minus = abs(alpha_minus) ** 2
    p_plus = abs(alpha_plus) ** 2
    total = p_minus + p_plus
    return IntracavityField(
        alpha_minus=alpha_minus,
        alpha_plus=alpha_plus,
        g=params.g0 * math.sqrt(total),
        epsilon_c=p_minus / total,
    )


def _sideband_denominators(kappa: float, delta: float, omega_m: float):
    """(Delta^2 + k^2/4, (Delta - 2 Om)^2 + k^2/4, (Delta + 2 Om)^2 + k^2/4)."""
    quarter = kappa * kappa / 4.0
    return (
        delta * delta + quarter,
        (delta - 2 * omega_m) ** 2 + quarter,
        (delta + 2 * omega_m) ** 2 + quarter,
    )


def optical_damping(params: SystemParams, field: IntracavityField, omega_m: float) -> float:
    """Optical damping Gamma_opt in the quasi-resonant limit.

    Gamma_opt = g^2 kappa [ eps/(D0) - eps/(Dm) + (1-eps)/(Dp) - (1-eps)/(D0) ]
    with D0, Dm, Dp the resonant and 2*Omega_m-shifted Lorentzian denominators.
    """
    d0, dm, dp = _sideband_denominators(params.kappa, params.delta, omega_m)
    eps = field.epsilon_c
    bracket = eps / d0 - eps / dm + (1 - eps) / dp - (1 - eps) / d0
    return field.g**2 * params.kappa * bracket


def _response_sum(params: SystemParams, field: IntracavityField, omega_m: float) -> complex:
    """Complex cavity back-action response at Omega = Omega_m.

    B = |a_-|^2 (d1 - d3) + |a_+|^2 (d2 - d4); Gamma_opt = 2 g0^2 Re B and the
    resonance shift is g0^2 Im B.
    """
    kappa, delta = params.kappa, params.delta
    d1 = 1.0 / (-1j * delta + kappa / 2)
    d3 = 1.0 / (1j * (delta - 2 * omega_m) + kappa / 2)
    d2 = 1.0 / (-1j * (delta + 2 * omega_m) + kappa / 2)
    d4 = 1.0 / (1j * delta + kappa / 2)
    return abs(field.alpha_minus) ** 2 * (d1 - d3) + abs(field.alpha_plus) ** 2 * (d2 - d4)


def _iterate_resonance(
    params: SystemParams, pump: PumpConfig, max_iter: int = 50
) -> tuple[float, int]:
    """Fixed-point solve of the self-consistent resonance; returns (omega, iters)."""
    tol = 1e-6 * params.gamma_m
    omega = params.omega_m0
    for it in range(1, max_iter + 1):
        field = intracavity_amplitudes(params, pump, omega)
        shift = params.g0**2 * _response_sum(params, field, omega).imag
        new = params.omega_m0 + shift
        if abs(new - omega) < tol:
            return new, it
        omega = new
    raise SelfConsistencyError(
        f"no convergence in {max_iter} iterations: outside weak-coupling validity"
    )


def self_consistent_frequency(params: SystemParams, pump: PumpConfig) -> float:
    """Effective resonance Omega_m solving the spring-shift equation.

    Plain fixed-point iteration; the contraction factor is ~(g/kappa)^2 in
    the weak-coupling regime, so a handful of iterations suffice.
    """
    omega, _ = _iterate_resonance(params, pump)
    return omega


def parametric_rate(
    params: SystemParams, field: IntracavityField, omega_m: float
) -> tuple[float, float]:
    """(Gamma_par, phi): spring-modulation rate and its phase.

    Gamma_par = 4 g^2 sqrt(eps(1-eps)) Delta / (Delta^2 + kappa^2/4),
    phi = pi/2 + arg(alpha_-^* alpha_+).  Gamma_par carries the sign of
    Delta and vanishes for a single tone or for Delta = 0.
    """
    d0, _, _ = _sideband_denominators(params.kappa, params.delta, omega_m)
    eps = field.epsilon_c
    gamma_par = 4 * field.g**2 * math.sqrt(eps * (1 - eps)) * params.delta / d0
    phi = math.pi / 2 + cmath.phase(field.alpha_minus.conjugate() * field.alpha_plus)
    return gamma_par, phi


def scattering_rates(
    params: SystemParams, field: IntracavityField, omega_m: float
) -> tuple[float, float]:
    """Stokes / anti-Stokes rates (A-, A+) of the two tones combined.

    A- = g0^2 kappa [ |a_-|^2/D0 + |a_+|^2/Dp ]
    A+ = g0^2 kappa [ |a_-|^2/Dm + |a_+|^2/D0 ]
    The difference must reproduce Gamma_opt; a violation beyond rounding
    means the two code paths diverged and is raised as an internal error.
    """
    d0, dm, dp = _sideband_denominators(params.kappa, params.delta, omega_m)
    gk = params.g0**2 * params.kappa
    p_minus = abs(field.alpha_minus) ** 2
    p_plus = abs(field.alpha_plus) ** 2
    a_minus = gk * (p_minus / d0 + p_plus / dp)
    a_plus = gk * (p_minus / dm + p_plus / d0)
    gamma_opt = optical_damping(params, field, omega_m)
    scale = max(a_minus, a_plus)
    if scale > 0 and abs(gamma_opt - (a_minus - a_plus)) > _IDENTITY_RTOL * scale:
        raise InternalConsistencyError("A- - A+ does not reproduce Gamma_opt")
    return a_minus, a_plus


def occupancy(
    params: SystemParams, *, gamma_eff: float, a_plus: float, gamma_opt: float
) -> tuple[float | None, float]:
    """(n_BA, n_bar) for the cooled oscillator without parametric drive.

    n_bar = (Gamma_m n_th + A+) / Gamma_eff (+ n_extra); this form is the
    back-action expression Gamma_opt n_BA / Gamma_eff with n_BA = A+/Gamma_opt
    rewritten to stay finite at Gamma_opt = 0.  n_BA is only reported when
    Gamma_opt is nonzero.
    """
    if gamma_eff <= 0:
        raise AntiDampingError("gamma_eff must be positive for a steady state")
    n_bar = (params.gamma_m * params.n_th + a_plus) / gamma_eff + params.n_extra
    n_ba = a_plus / gamma_opt if gamma_opt != 0 else None
    return n_ba, n_bar


def derive_all(params: SystemParams, pump: PumpConfig) -> DerivedRates:
    """Complete set of derived rates with all stability checks enforced."""
    omega_m = self_consistent_frequency(params, pump)
    field = intracavity_amplitudes(params, pump, omega_m)
    gamma_opt = optical_damping(params, field, omega_m)
    gamma_eff = params.gamma_m + gamma_opt
    if gamma_eff <= 0:
        raise AntiDampingError(
            f"gamma_eff = {gamma_eff:.3e} rad/s <= 0: pump anti-damps the oscillator"
        )
    gamma_par, phi = parametric_rate(params, field, omega_m)
    a_minus, a_plus = scattering_rates(params, field, omega_m)
    s = gamma_par / gamma_eff
    if abs(s) >= 1:
        raise ParametricInstabilityError(
            f"|s| = {abs(s):.4f} >= 1: the system is stable for s < 1"
        )
    n_ba, n_bar = occupancy(params, gamma_eff=gamma_eff, a_plus=a_plus, gamma_opt=gamma_opt)
    d0, _, _ = _sideband_denominators(params.kappa, params.delta, omega_m)
    anomalous = (
        -params.g0**2
        * params.kappa
        * field.alpha_minus.conjugate()
        * field.alpha_plus
        / d0
    )
    return DerivedRates(
        omega_m=omega_m,
        gamma_opt=gamma_opt,
        gamma_eff=gamma_eff,
        gamma_par=gamma_par,
        phi=phi,
        s=s,
        gamma_plus=gamma_eff * (1 + s),
        gamma_minus=gamma_eff * (1 - s),
        a_minus=a_minus,
        a_plus=a_plus,
        n_ba=n_ba,
        n_bar=n_bar,
        anomalous=anomalous,
    )
