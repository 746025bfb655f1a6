"""Correspondence force states, stabilization, bond energy and breakage.

Force states are bond force densities (N/m^6).  A broken bond carries no
mechanical load of any kind.  Bond energies accumulate trapezoidally from
the constitutive force-state pair only; the non-affine stabilization force
is excluded from breakage bookkeeping.
"""

from __future__ import annotations

import math

import numpy as np

from . import kinematics
from .errors import InvertedElement


def piola_from_unrotated(unrotated_stress, rotation, deformation_grad,
                         jacobian) -> np.ndarray:
    """Effective first Piola stress from the unrotated Cauchy stress."""
    f = np.asarray(deformation_grad, dtype=float)
    if jacobian <= 0.0:
        raise InvertedElement(determinant=jacobian)
    sigma = kinematics.rotate_to_spatial(unrotated_stress, rotation)
    return jacobian * sigma @ np.linalg.inv(f).T


def effective_force_state(piola, shape_inv, xi, influence) -> np.ndarray:
    """In-plane bond force density from the Piola stress."""
    if not influence:
        return np.zeros(2)
    p2 = np.asarray(piola, dtype=float)[:2, :2]
    return p2 @ (np.asarray(shape_inv) @ np.asarray(xi, dtype=float))


def fluid_force_state(pore_pressure, shape_inv, xi, influence) -> np.ndarray:
    """Diagnostic fluid force density; not added to the motion equation."""
    if not influence:
        return np.zeros(2)
    return pore_pressure * (np.asarray(shape_inv) @ np.asarray(xi,
                                                               dtype=float))


def stabilization_coefficient(bulk_modulus, horizon, thickness) -> float:
    """Penalty scale of the non-affine control for the planar volume
    measure."""
    return 18.0 * bulk_modulus / (math.pi * horizon ** 5 * thickness)


def stabilization_force_state(deformed_bond, deformation_grad, xi, influence,
                              penalty, control) -> np.ndarray:
    """Spring penalty on the non-affine part of the bond deformation.

    Vanishes identically on affine fields and with control = 0.
    """
    if not influence or control == 0.0:
        return np.zeros(2)
    f2 = np.asarray(deformation_grad, dtype=float)[:2, :2]
    y = np.asarray(deformed_bond, dtype=float)
    return control * penalty * (y - f2 @ np.asarray(xi, dtype=float))


def bond_energy_increment(tbar, tbar_prime, rel_velocity, dt, w_n) -> float:
    """Accumulate bond energy density from the force-state pair.

    Callers pass time-averaged force states for trapezoidal accumulation.
    """
    if dt < 0.0:
        raise ValueError("time step must be nonnegative")
    pair = np.asarray(tbar, dtype=float) - np.asarray(tbar_prime, dtype=float)
    return w_n + float(pair @ np.asarray(rel_velocity, dtype=float)) * dt


def critical_energy_density(energy_release_rate, horizon) -> float:
    """Critical bond energy density from the energy release rate."""
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    return 4.0 * energy_release_rate / (math.pi * horizon ** 4)


def apply_breakage(net, critical_energy, pair_prev=None) -> int:
    """Break every bond at or above the critical energy, symmetrically.

    Updates the damage field and recomputes shape tensors of affected
    points.  Returns the number of newly broken bonds (each direction of a
    pair counts once).
    """
    hit = np.flatnonzero((net.bond_energy >= critical_energy)
                         & (net.influence == 1))
    if len(hit) == 0:
        return 0
    slots = np.union1d(hit, net.recip[hit])
    net.influence[slots] = 0
    if pair_prev is not None:
        pair_prev[slots] = 0.0
    touched = np.unique(np.concatenate(
        [net.source[slots], net.indices[slots]]))
    kinematics.refresh_shape_tensors(net, touched)
    update_damage(net)
    return int(len(slots))


def update_damage(net) -> np.ndarray:
    """Broken bond volume fraction per point, in [0, 1]."""
    intact = np.bincount(
        net.source,
        weights=net.influence * net.volumes[net.indices],
        minlength=net.npoints)
    net.damage = 1.0 - intact / net.bond_volume_total
    return net.damage
