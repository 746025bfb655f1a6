"""Thermo-hydro-mechanical elastoplastic model at one material point.

Water retention with a temperature-dependent air-entry factor, meniscus
bonding, suction- and temperature-dependent preconsolidation, linear
thermoelasticity, a modified Cam-Clay yield surface with associative flow,
and an implicit return mapping in the space of elastic volumetric strain,
elastic deviatoric strain and plastic multiplier.

Conventions: tension positive, compression negative; preconsolidation
pressures negative; suction nonnegative; temperatures in degrees Celsius;
all pressures in Pa.  Stress is computed from the elastic strain with the
thermal eigenstrain subtracted, so stress-free heating of an unconstrained
point produces zero stress.

All functions are pure; states are treated as immutable and new instances
are returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _model_math as mm
from .errors import DomainError, NonConvergence

_IDENTITY = np.eye(3)


@dataclass(frozen=True)
class MaterialParams:
    """Constitutive constants for one material.

    Units are embedded in the physical meaning: densities kg/m^3, moduli Pa,
    thermal expansion 1/degC, retention_a1 1/Pa, retention_a2 degC,
    preconsolidation_ref Pa (negative), temperatures degC.
    """

    solid_density: float
    water_density: float
    bulk_modulus: float
    shear_modulus: float
    thermal_expansion_vol: float
    compression_index: float
    swelling_index: float
    csl_slope: float
    plastic_thermal: float
    specific_volume_ref: float
    bonding_c1: float
    bonding_c2: float
    retention_a1: float
    retention_b1: float
    retention_a2: float
    retention_b2: float
    retention_n: float
    retention_m: float
    preconsolidation_ref: float
    reference_temperature: float
    atmospheric_pressure: float
    initial_porosity: float
    initial_specific_volume: float

    def __post_init__(self):
        if self.bulk_modulus <= 0.0 or self.shear_modulus <= 0.0:
            raise ValueError("elastic moduli must be positive")
        if not (self.compression_index > self.swelling_index > 0.0):
            raise ValueError("need compression_index > swelling_index > 0")
        if self.csl_slope <= 0.0:
            raise ValueError("critical state line slope must be positive")
        if self.retention_n <= 0.0 or self.retention_m <= 0.0:
            raise ValueError("retention exponents must be positive")
        if self.retention_a1 <= 0.0:
            raise ValueError("retention_a1 must be positive")
        if self.preconsolidation_ref >= 0.0:
            raise ValueError("preconsolidation_ref must be negative "
                             "(compression-negative convention)")
        if not 0.0 < self.initial_porosity < 1.0:
            raise ValueError("initial_porosity must lie in (0, 1)")
        nu0 = 1.0 / (1.0 - self.initial_porosity)
        if abs(self.initial_specific_volume - nu0) > 1.0e-12 * nu0:
            raise ValueError("initial_specific_volume inconsistent with "
                             "initial_porosity")


@dataclass(frozen=True)
class ThermoHydroState:
    """Suction, temperature and the derived hydraulic quantities."""

    suction: float
    temperature: float
    saturation: float
    specific_volume: float
    bonding: float


@dataclass(frozen=True)
class MechanicalState:
    """Stress, strain split and hardening record at one point.

    ``preconsolidation_sat`` is the hardening variable: the saturated
    reference-temperature preconsolidation pressure (negative), which the
    bonding power law maps to the apparent value.
    """

    elastic_strain: np.ndarray
    plastic_strain: np.ndarray
    preconsolidation_sat: float
    unrotated_stress: np.ndarray
    equiv_plastic_shear: float = 0.0
    plastic_volume: float = 0.0


@dataclass(frozen=True)
class TrialState:
    """Frozen trial quantities entering the return-mapping residuals."""

    ev_trial: float
    ed_trial: float
    thermal_volumetric: float
    preconsolidation_sat: float
    bonding: float
    temperature: float
    specific_volume: float


@dataclass(frozen=True)
class ReturnMapInfo:
    plastic: bool
    iterations: int
    plastic_multiplier: float
    yield_final: float
    preconsolidation: float


def initial_hydro_state(suction, temperature, params,
                        specific_volume=None) -> ThermoHydroState:
    """Consistent hydraulic state at given suction and temperature."""
    nu = (params.initial_specific_volume if specific_volume is None
          else specific_volume)
    sr = retention_saturation(suction, nu, temperature, params)
    return ThermoHydroState(suction, temperature, sr, nu,
                            bonding_variable(sr, suction, params))


def air_entry_factor(theta_c, params) -> float:
    """Temperature scaling of the air-entry suction; 1 at the reference."""
    out = mm.air_entry_core(theta_c, params.retention_a2,
                            params.retention_b2,
                            params.reference_temperature)
    if math.isnan(out):
        raise DomainError(
            f"air entry factor undefined at {theta_c} degC: "
            "a2 + b2*theta must stay positive")
    return out


def retention_saturation(suction, specific_volume, theta_c, params) -> float:
    """Degree of saturation from the water retention curve, in (0, 1]."""
    if suction < 0.0:
        raise DomainError("suction must be nonnegative")
    if specific_volume <= 1.0:
        raise DomainError("specific volume must exceed 1")
    out = mm.retention_core(
        suction, specific_volume, theta_c,
        params.retention_a1, params.retention_b1, params.retention_a2,
        params.retention_b2, params.retention_n, params.retention_m,
        params.reference_temperature)
    if math.isnan(out):
        raise DomainError(
            f"air entry factor undefined at {theta_c} degC")
    return out


def meniscus_force(suction, params) -> float:
    """Normalized stabilizing force of a single water meniscus."""
    if suction < 0.0:
        raise DomainError("suction must be nonnegative")
    return mm.meniscus_core(suction, params.atmospheric_pressure)


def bonding_variable(saturation, suction, params) -> float:
    """Meniscus bonding measure, zero when fully saturated."""
    return mm.bonding_core(saturation, suction, params.atmospheric_pressure)


def preconsolidation_pressure(bonding, theta_c, pc_ref, params) -> float:
    """Apparent preconsolidation pressure (Pa, negative).

    Combines the bonding power law with logarithmic thermal softening.
    Pressures are expressed in kPa inside the power law.
    """
    if pc_ref >= 0.0:
        raise DomainError("reference preconsolidation must be negative")
    out = mm.pc_core(bonding, theta_c, pc_ref,
                     params.compression_index, params.swelling_index,
                     params.plastic_thermal, params.specific_volume_ref,
                     params.bonding_c1, params.bonding_c2,
                     params.reference_temperature)
    if math.isnan(out):
        raise DomainError(
            "preconsolidation undefined: hardening denominator or thermal "
            "bracket left its admissible range")
    return out


def preconsolidation_ref_for_apparent(pc_apparent, bonding, theta_c,
                                      params) -> float:
    """Invert the bonding power law: hardening variable for a target
    apparent preconsolidation at the given bonding and temperature."""
    ahat, bhat = mm.pc_exponents(
        bonding, params.compression_index, params.swelling_index,
        params.specific_volume_ref, params.bonding_c1, params.bonding_c2)
    if math.isnan(bhat):
        raise DomainError("hardening denominator not positive")
    bracket = 1.0 - params.plastic_thermal * math.log(
        theta_c / params.reference_temperature)
    if bracket <= 0.0:
        raise DomainError("thermal softening bracket not positive")
    base = -pc_apparent / (math.exp(ahat) * bracket * mm.PC_UNIT)
    return -(base ** (1.0 / bhat)) * mm.PC_UNIT


def harden_preconsolidation(pc_ref, plastic_volume_increment,
                            specific_volume, params) -> float:
    """Exponential hardening of the reference preconsolidation.

    Plastic compaction (negative volumetric increment under tension-positive
    strains) grows the preconsolidation magnitude; dilation shrinks it.
    """
    lam = params.compression_index
    kap = params.swelling_index
    return pc_ref * math.exp(-specific_volume * plastic_volume_increment
                             / (lam - kap))


def thermal_strain_increment(dtheta_c, params) -> np.ndarray:
    """Isotropic thermal strain increment for a temperature change."""
    return (params.thermal_expansion_vol * dtheta_c / 3.0) * _IDENTITY


def elastic_stress(elastic_strain, dtheta_from_ref, params) -> np.ndarray:
    """Stress from the thermoelastic law with eigenstrain subtraction.

    ``dtheta_from_ref`` is the temperature offset from the reference, so the
    eigenstrain cancels exactly when the elastic strain equals the
    accumulated thermal expansion.
    """
    eps = np.asarray(elastic_strain, dtype=float)
    eps_mech = eps - (params.thermal_expansion_vol * dtheta_from_ref / 3.0) \
        * _IDENTITY
    ev = np.trace(eps_mech)
    dev = eps_mech - ev / 3.0 * _IDENTITY
    return params.bulk_modulus * ev * _IDENTITY \
        + 2.0 * params.shear_modulus * dev


def stress_invariants(sigma) -> tuple[float, float]:
    """Mean stress and deviatoric stress magnitude (p, q), q >= 0."""
    sig = np.asarray(sigma, dtype=float)
    p = np.trace(sig) / 3.0
    dev = sig - p * _IDENTITY
    q = math.sqrt(1.5) * float(np.linalg.norm(dev))
    return float(p), q


def yield_value(p, q, pc, csl_slope) -> float:
    """Modified Cam-Clay yield function; <= 0 is elastic."""
    return p * p - p * pc + q * q / (csl_slope * csl_slope)


def flow_derivatives(p, q, pc, csl_slope) -> tuple[float, float]:
    """Partial derivatives of the yield function wrt (p, q)."""
    return 2.0 * p - pc, 2.0 * q / (csl_slope * csl_slope)


def mixture_density(porosity, saturation, params) -> float:
    """Bulk density of the solid-water mixture, weightless air."""
    return (1.0 - porosity) * params.solid_density \
        + porosity * saturation * params.water_density


def solid_partial_density(porosity, params) -> float:
    """Partial density of the solid phase."""
    return (1.0 - porosity) * params.solid_density


def isoerror(sigma, sigma_ref) -> float:
    """Relative stress error in percent against a reference tensor."""
    ref = np.asarray(sigma_ref, dtype=float)
    nrm = float(np.linalg.norm(ref))
    if nrm == 0.0:
        raise ZeroDivisionError("reference stress tensor is zero")
    diff = np.asarray(sigma, dtype=float) - ref
    return 100.0 * float(np.linalg.norm(diff)) / nrm


def _invariant_split(eps):
    """(ev, ed, unit deviatoric direction) of a symmetric tensor."""
    ev = float(np.trace(eps))
    dev = eps - ev / 3.0 * _IDENTITY
    nrm = float(np.linalg.norm(dev))
    ed = math.sqrt(2.0 / 3.0) * nrm
    if nrm < 1.0e-16:
        return ev, 0.0, np.zeros((3, 3))
    return ev, ed, dev / nrm


def compute_trial(mech, hydro, strain_increment, dtheta_c, dsuction,
                  params) -> tuple[TrialState, ThermoHydroState]:
    """Trial invariants plus the advanced hydraulic state."""
    deps = np.asarray(strain_increment, dtype=float)
    suction = hydro.suction + dsuction
    if suction < 0.0:
        raise DomainError("suction path went negative")
    theta = hydro.temperature + dtheta_c
    nu = hydro.specific_volume * math.exp(float(np.trace(deps)))
    sr = retention_saturation(suction, nu, theta, params)
    zeta = bonding_variable(sr, suction, params)
    hydro2 = ThermoHydroState(suction, theta, sr, nu, zeta)

    eps_tr = mech.elastic_strain + deps
    ev_tr, ed_tr, _ = _invariant_split(eps_tr)
    ev_th = params.thermal_expansion_vol \
        * (theta - params.reference_temperature)
    trial = TrialState(ev_tr, ed_tr, ev_th, mech.preconsolidation_sat,
                       zeta, theta, nu)
    return trial, hydro2


def residual_vector(x, trial, params) -> np.ndarray:
    """Return-mapping residuals at unknowns x = (ev, ed, dlam).

    The first two components are strain residuals; the third is the yield
    function in Pa^2.  The preconsolidation entering all three hardens with
    the plastic volumetric increment implied by x.
    """
    ev, ed, dlam = (float(v) for v in x)
    pc_ref = harden_preconsolidation(
        trial.preconsolidation_sat, trial.ev_trial - ev,
        trial.specific_volume, params)
    pc = preconsolidation_pressure(trial.bonding, trial.temperature,
                                   pc_ref, params)
    p = params.bulk_modulus * (ev - trial.thermal_volumetric)
    q = 3.0 * params.shear_modulus * ed
    m2 = params.csl_slope ** 2
    return np.array([
        ev - trial.ev_trial + dlam * (2.0 * p - pc),
        ed - trial.ed_trial + dlam * (2.0 * q / m2),
        p * p - p * pc + q * q / m2,
    ])


def tangent_matrix(x, trial, params) -> np.ndarray:
    """Analytic Jacobian of :func:`residual_vector` wrt (ev, ed, dlam)."""
    ev, ed, dlam = (float(v) for v in x)
    lam = params.compression_index
    kap = params.swelling_index
    hard = trial.specific_volume / (lam - kap)
    _, bhat = mm.pc_exponents(trial.bonding, lam, kap,
                              params.specific_volume_ref,
                              params.bonding_c1, params.bonding_c2)
    pc_ref = harden_preconsolidation(
        trial.preconsolidation_sat, trial.ev_trial - ev,
        trial.specific_volume, params)
    pc = preconsolidation_pressure(trial.bonding, trial.temperature,
                                   pc_ref, params)
    dpc_dev = pc * bhat * hard
    bulk = params.bulk_modulus
    shear = params.shear_modulus
    p = bulk * (ev - trial.thermal_volumetric)
    q = 3.0 * shear * ed
    m2 = params.csl_slope ** 2
    return np.array([
        [1.0 + dlam * (2.0 * bulk - dpc_dev), 0.0, 2.0 * p - pc],
        [0.0, 1.0 + dlam * 6.0 * shear / m2, 2.0 * q / m2],
        [(2.0 * p - pc) * bulk - p * dpc_dev, 6.0 * shear * q / m2, 0.0],
    ])


def update_state(mech, hydro, strain_increment, dtheta_c, dsuction, params,
                 plasticity=True):
    """Advance one material point by a strain/temperature/suction increment.

    Returns (MechanicalState, ThermoHydroState, ReturnMapInfo).  The elastic
    branch keeps the full trial strain tensor; the plastic branch returns
    along the frozen trial deviatoric direction, hardens the
    preconsolidation with the plastic volumetric increment, and satisfies
    the yield condition to within the yield tolerance.
    """
    deps = np.asarray(strain_increment, dtype=float)
    trial, hydro2 = compute_trial(mech, hydro, deps, dtheta_c, dsuction,
                                  params)
    eps_tr = mech.elastic_strain + deps
    _, _, nhat = _invariant_split(eps_tr)

    pc_tr = preconsolidation_pressure(trial.bonding, trial.temperature,
                                      trial.preconsolidation_sat, params)
    p_tr = params.bulk_modulus * (trial.ev_trial - trial.thermal_volumetric)
    q_tr = 3.0 * params.shear_modulus * trial.ed_trial
    f_tr = yield_value(p_tr, q_tr, pc_tr, params.csl_slope)
    tol_f = mm.yield_tolerance(pc_tr)

    if not plasticity or f_tr <= tol_f:
        sigma = elastic_stress(
            eps_tr, trial.temperature - params.reference_temperature, params)
        mech2 = replace(mech, elastic_strain=eps_tr, unrotated_stress=sigma)
        info = ReturnMapInfo(False, 0, 0.0,
                             f_tr if plasticity else float("nan"), pc_tr)
        return mech2, hydro2, info

    ev, ed, dlam, pc, pc_ref_new, iters, status = mm.return_map_core(
        trial.ev_trial, trial.ed_trial, trial.thermal_volumetric,
        trial.preconsolidation_sat, trial.bonding, trial.temperature,
        trial.specific_volume,
        params.bulk_modulus, params.shear_modulus, params.csl_slope,
        params.compression_index, params.swelling_index,
        params.plastic_thermal, params.specific_volume_ref,
        params.bonding_c1, params.bonding_c2,
        params.reference_temperature)
    if status == mm.RM_DOMAIN:
        raise DomainError("preconsolidation undefined during return mapping")
    if status != mm.RM_OK:
        raise NonConvergence("return mapping", iterations=iters,
                             residual=float("nan"))

    p = params.bulk_modulus * (ev - trial.thermal_volumetric)
    q = 3.0 * params.shear_modulus * ed
    f_final = yield_value(p, q, pc, params.csl_slope)

    eps_e = ev / 3.0 * _IDENTITY + math.sqrt(1.5) * ed * nhat
    sigma = p * _IDENTITY + math.sqrt(2.0 / 3.0) * q * nhat
    deps_p = eps_tr - eps_e
    mech2 = MechanicalState(
        elastic_strain=eps_e,
        plastic_strain=mech.plastic_strain + deps_p,
        preconsolidation_sat=pc_ref_new,
        unrotated_stress=sigma,
        equiv_plastic_shear=mech.equiv_plastic_shear
        + abs(trial.ed_trial - ed),
        plastic_volume=mech.plastic_volume + (trial.ev_trial - ev),
    )
    info = ReturnMapInfo(True, iters, dlam, f_final, pc)
    return mech2, hydro2, info
