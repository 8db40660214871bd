"""Asymptotic secret key rates when the source intensity is covertly inflated.

An attack on the OPL lowers its insertion loss, so every intensity Alice
(and, for MDI, Bob) sends is ``g`` times the set value. Observables are
generated with the true intensities. The *incorrect* rate R_I analyses them
with the set intensities; the *correct* rate R_C uses the true ones.

BB84 uses the one-decoy (signal + weak decoy, dark count known) analytic
bounds with the GLLP rate. MDI-QKD uses the weak-coherent-pulse gain/QBER
model of Ma & Razavi (PRA 86, 062319, 2012) with vacuum + weak-decoy bounds on
the single-photon-pair yield and phase error.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import i0

from .errors import ValidationError

ATTACK_PRESETS = (1.17, 4.41, 7.16)


def binary_entropy(x):
    """H2(x) in bits, with H2(0) = H2(1) = 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(~((arr >= 0) & (arr <= 1))):
        raise ValidationError("binary_entropy argument must lie in [0, 1]")
    inner = (arr > 0) & (arr < 1)
    safe = np.where(inner, arr, 0.5)
    h = -safe * np.log2(safe) - (1 - safe) * np.log2(1 - safe)
    h = np.where(inner, h, 0.0)
    return float(h) if h.ndim == 0 else h


def _check_g(g: float) -> float:
    g = float(g)
    if not g >= 1:
        raise ValidationError(f"inflation factor g must be >= 1, got {g}")
    return g


def channel_transmittance(alpha_db_per_km: float, distance_km: float) -> float:
    if distance_km < 0:
        raise ValidationError("distance must be non-negative")
    return 10 ** (-alpha_db_per_km * distance_km / 10)


# --------------------------------------------------------------------------
# decoy-state BB84


@dataclass(frozen=True)
class Bb84Params:
    mu: float = 0.1
    nu: float = 0.05
    Y0: float = 2e-6
    e_det: float = 0.01
    f_ec: float = 1.0
    eta_det: float = 0.1
    internal_transmittance: float = 0.6
    alpha_db_per_km: float = 0.2
    q: float = 0.5
    e0: float = 0.5

    def __post_init__(self):
        if not 0 < self.nu < self.mu:
            raise ValidationError("need 0 < nu < mu")
        for name in ("e_det", "eta_det", "internal_transmittance", "q", "e0", "Y0"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValidationError(f"{name} must lie in [0, 1]")
        if self.f_ec < 1 or self.alpha_db_per_km < 0:
            raise ValidationError("f_ec must be >= 1 and alpha non-negative")

    def eta(self, distance_km: float) -> float:
        return (self.internal_transmittance * self.eta_det
                * channel_transmittance(self.alpha_db_per_km, distance_km))


@dataclass(frozen=True)
class Bb84Observables:
    Q_mu: float
    E_mu: float
    Q_nu: float
    E_nu: float


@dataclass(frozen=True)
class DecoyBounds:
    Y1: float  # lower bound on the single-photon yield
    e1: float  # upper bound on the single-photon error rate
    Q1: float


def bb84_observables(params: Bb84Params, distance_km: float, g: float = 1.0) -> Bb84Observables:
    g = _check_g(g)
    eta = params.eta(distance_km)
    vals = []
    for x in (params.mu, params.nu):
        clicks = -np.expm1(-eta * g * x)
        gain = params.Y0 + clicks
        vals += [gain, (params.e0 * params.Y0 + params.e_det * clicks) / gain]
    return Bb84Observables(*vals)


def decoy_bounds(obs: Bb84Observables, mu: float, nu: float, Y0: float, e0: float) -> DecoyBounds:
    """Single-photon yield and error bounds from signal + weak decoy."""
    y1 = (mu / (mu * nu - nu**2)) * (
        obs.Q_nu * np.exp(nu)
        - obs.Q_mu * np.exp(mu) * nu**2 / mu**2
        - (mu**2 - nu**2) / mu**2 * Y0
    )
    e1 = (obs.E_nu * obs.Q_nu * np.exp(nu) - e0 * Y0) / (y1 * nu) if y1 > 0 else np.nan
    return DecoyBounds(float(y1), float(e1), float(y1 * mu * np.exp(-mu)))


def bb84_rate(obs: Bb84Observables, assumed_mu: float, assumed_nu: float,
              params: Bb84Params) -> float:
    """GLLP key rate per pulse, evaluated with the intensities the parties assume."""
    b = decoy_bounds(obs, assumed_mu, assumed_nu, params.Y0, params.e0)
    if not b.Y1 > 0 or not b.e1 <= 0.5:
        return 0.0
    e1 = max(b.e1, 0.0)
    rate = params.q * (-obs.Q_mu * params.f_ec * binary_entropy(obs.E_mu)
                       + b.Q1 * (1 - binary_entropy(e1)))
    return max(rate, 0.0)


# --------------------------------------------------------------------------
# rate curves


class Label(enum.Enum):
    NO_ATTACK = "NoAttack"
    R_I = "R_I"
    R_C = "R_C"


@dataclass(frozen=True)
class RateCurve:
    label: Label
    g: float
    distances_km: np.ndarray
    rates: np.ndarray

    def rows(self):
        for d, r in zip(self.distances_km, self.rates):
            yield float(d), float(r), self.label.value, self.g


def _distances(distances_km) -> np.ndarray:
    d = np.asarray(distances_km, dtype=float)
    if d.ndim != 1 or np.any(np.diff(d) <= 0) or np.any(d < 0):
        raise ValidationError("distances must be non-negative and strictly increasing")
    return d


def bb84_curves(params: Bb84Params, distances_km, g: float) -> dict:
    """NoAttack, R_I and R_C curves for one inflation factor."""
    g = _check_g(g)
    d = _distances(distances_km)
    clean, r_i, r_c = [], [], []
    for L in d:
        base = bb84_observables(params, L, 1.0)
        clean.append(bb84_rate(base, params.mu, params.nu, params))
        obs = bb84_observables(params, L, g)
        r_i.append(bb84_rate(obs, params.mu, params.nu, params))
        r_c.append(bb84_rate(obs, g * params.mu, g * params.nu, params))
    return {
        Label.NO_ATTACK: RateCurve(Label.NO_ATTACK, 1.0, d, np.array(clean)),
        Label.R_I: RateCurve(Label.R_I, g, d, np.array(r_i)),
        Label.R_C: RateCurve(Label.R_C, g, d, np.array(r_c)),
    }


# --------------------------------------------------------------------------
# MDI-QKD


class MdiMode(enum.Enum):
    ESTIMATED = "estimated"
    CORRECT = "correct"


@dataclass(frozen=True)
class MdiParams:
    """Symmetric MDI link. Detector and channel defaults follow Ma & Razavi."""

    signal: float = 0.5
    decoy: float = 0.03
    vacuum: float = 0.0
    Y0: float = 3e-6  # dark count probability per detector
    e_det: float = 0.015
    f_ec: float = 1.16
    eta_det: float = 0.145
    alpha_db_per_km: float = 0.2
    e0: float = 0.5

    def __post_init__(self):
        if not 0 <= self.vacuum < self.decoy < self.signal:
            raise ValidationError("need vacuum < decoy < signal")
        if self.vacuum != 0:
            raise ValidationError("the two-decoy analysis requires a true vacuum state")
        for name in ("Y0", "e_det", "eta_det", "e0"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValidationError(f"{name} must lie in [0, 1]")

    def eta_side(self, distance_km: float) -> float:
        """Transmittance of one arm (half the link) including the detector."""
        return self.eta_det * channel_transmittance(self.alpha_db_per_km, distance_km / 2)


@dataclass(frozen=True)
class MdiGains:
    Q_rect: float
    EQ_rect: float
    Q_diag: float
    EQ_diag: float


def mdi_gains(params: MdiParams, mu_a: float, mu_b: float, eta_a: float, eta_b: float) -> MdiGains:
    """Overall gains and error-weighted gains in both bases for one intensity pair."""
    pd, ed, e0 = params.Y0, params.e_det, params.e0
    mu_p = eta_a * mu_a + eta_b * mu_b
    x = np.sqrt(eta_a * mu_a * eta_b * mu_b) / 2
    q_c = (2 * (1 - pd) ** 2 * np.exp(-mu_p / 2)
           * (1 - (1 - pd) * np.exp(-eta_a * mu_a / 2))
           * (1 - (1 - pd) * np.exp(-eta_b * mu_b / 2)))
    q_e = 2 * pd * (1 - pd) ** 2 * np.exp(-mu_p / 2) * (i0(2 * x) - (1 - pd) * np.exp(-mu_p / 2))
    y = (1 - pd) * np.exp(-mu_p / 4)
    q_diag = 2 * y**2 * (1 + 2 * y**2 - 4 * y * i0(x) + i0(2 * x))
    eq_diag = e0 * q_diag - 2 * (e0 - ed) * y**2 * (i0(2 * x) - 1)
    return MdiGains(float(q_c + q_e), float(ed * q_c + (1 - ed) * q_e), float(q_diag), float(eq_diag))


@dataclass(frozen=True)
class MdiBounds:
    Y11: float  # lower bound, rectilinear basis
    e11: float  # upper bound, diagonal basis


def _pair_sum(table: dict, s: float) -> float:
    """Inclusion-exclusion that keeps only terms with photons on both sides:
    sum over n, m >= 1 of s^(n+m) / (n! m!) * F_nm."""
    return (np.exp(2 * s) * table[(s, s)] - np.exp(s) * table[(s, 0.0)]
            - np.exp(s) * table[(0.0, s)] + table[(0.0, 0.0)])


def mdi_bounds(rect_gain: dict, diag_gain: dict, diag_err: dict, mu: float, nu: float) -> MdiBounds:
    """Vacuum + weak-decoy bounds on Y11 and e11.

    The dicts map an intensity pair ``(a, b)`` to Q or EQ, for pairs built
    from ``{0, nu, mu}`` on the diagonal and with one side vacuum.
    """
    def y11_lower(table):
        s_nu, s_mu = _pair_sum(table, nu), _pair_sum(table, mu)
        return (mu**3 * s_nu - nu**3 * s_mu) / (mu**2 * nu**2 * (mu - nu))

    y11_z = y11_lower(rect_gain)
    y11_x = y11_lower(diag_gain)
    e11 = _pair_sum(diag_err, nu) / (nu**2 * y11_x) if y11_x > 0 else np.nan
    return MdiBounds(float(y11_z), float(e11))


def mdi_observables(params: MdiParams, distance_km: float, g: float):
    """Gain tables at the true (inflated) intensities, keyed by the *set* pair."""
    eta = params.eta_side(distance_km)
    levels = (0.0, params.decoy, params.signal)
    pairs = {(a, b) for a in levels for b in levels if a == b or a == 0.0 or b == 0.0}
    return {pair: mdi_gains(params, g * pair[0], g * pair[1], eta, eta) for pair in pairs}


def mdi_rate(params: MdiParams, distance_km: float, g: float = 1.0,
             mode: MdiMode | str = MdiMode.ESTIMATED) -> float:
    """Asymptotic MDI key rate per pulse pair for a symmetric link."""
    g = _check_g(g)
    mode = MdiMode(mode)
    if distance_km < 0:
        raise ValidationError("distance must be non-negative")
    obs = mdi_observables(params, distance_km, g)
    scale = 1.0 if mode is MdiMode.ESTIMATED else g
    mu, nu = scale * params.signal, scale * params.decoy

    def keyed(attr):
        return {(scale * a, scale * b): getattr(v, attr) for (a, b), v in obs.items()}

    b = mdi_bounds(keyed("Q_rect"), keyed("Q_diag"), keyed("EQ_diag"), mu, nu)
    if not b.Y11 > 0 or not b.e11 <= 0.5:
        return 0.0
    sig = obs[(params.signal, params.signal)]
    e_rect = sig.EQ_rect / sig.Q_rect
    p11 = (mu * np.exp(-mu)) ** 2
    rate = p11 * b.Y11 * (1 - binary_entropy(max(b.e11, 0.0))) - sig.Q_rect * params.f_ec * binary_entropy(e_rect)
    return max(float(rate), 0.0)


def mdi_curves(params: MdiParams, distances_km, g: float) -> dict:
    g = _check_g(g)
    d = _distances(distances_km)
    clean = np.array([mdi_rate(params, L, 1.0) for L in d])
    r_i = np.array([mdi_rate(params, L, g, MdiMode.ESTIMATED) for L in d])
    r_c = np.array([mdi_rate(params, L, g, MdiMode.CORRECT) for L in d])
    return {
        Label.NO_ATTACK: RateCurve(Label.NO_ATTACK, 1.0, d, clean),
        Label.R_I: RateCurve(Label.R_I, g, d, r_i),
        Label.R_C: RateCurve(Label.R_C, g, d, r_c),
    }


def with_overrides(params, overrides: dict):
    """Copy of a parameter dataclass with selected fields replaced."""
    unknown = set(overrides) - set(params.__dataclass_fields__)
    if unknown:
        raise ValidationError(f"unknown protocol parameters: {', '.join(sorted(unknown))}")
    return replace(params, **{k: float(v) for k, v in overrides.items()})
