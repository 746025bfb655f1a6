"""Nonlocal state kinematics: bonds, shape tensors and deformation measures.

Planar discretization with out-of-plane thickness carried by the point
volumes.  In-plane 2x2 tensors are promoted to 3x3 with a plane-strain
closure (F33 = 1) so the three-dimensional stress invariants are exact.

Rotation convention: quantities are mapped to the unrotated configuration
with R^T (.) R and back with R (.) R^T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvertedElement, SingularShapeTensor

# shape tensors beyond this condition number mark the point inert
CONDITION_LIMIT = 1.0e12


@dataclass
class Neighborhood:
    """Bond list of one material point in the reference configuration."""

    owner: int
    indices: np.ndarray          # neighbor point ids, (k,)
    xi: np.ndarray               # reference bond vectors, (k, 2)
    volumes: np.ndarray          # neighbor volumes, (k,)
    influence: np.ndarray        # 0/1 bond intactness, (k,)
    bond_energy: np.ndarray = None          # accumulated densities, (k,)
    shape_tensor: np.ndarray = field(default=None)        # (2, 2)
    shape_tensor_inv: np.ndarray = field(default=None)    # (2, 2)

    def __post_init__(self):
        if self.bond_energy is None:
            self.bond_energy = np.zeros(len(self.indices))


def build_neighborhoods(positions, volumes, horizon) -> list[Neighborhood]:
    """Bond lists for every point within the horizon, grid-binned.

    Bonds are reciprocal by construction and exclude the point itself.
    Neighbor order is by point id, so sums are reproducible.
    """
    pos = np.asarray(positions, dtype=float)
    vol = np.asarray(volumes, dtype=float)
    n = len(pos)
    cell = horizon
    keys = np.floor(pos / cell).astype(np.int64)
    bins: dict[tuple[int, int], list[int]] = {}
    for i, (cx, cy) in enumerate(keys):
        bins.setdefault((int(cx), int(cy)), []).append(i)

    out = []
    h2 = horizon * horizon * (1.0 + 1.0e-12)
    for i in range(n):
        cx, cy = int(keys[i, 0]), int(keys[i, 1])
        cand = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                cand.extend(bins.get((cx + dx, cy + dy), ()))
        cand = np.array(sorted(cand), dtype=np.int64)
        rel = pos[cand] - pos[i]
        d2 = np.einsum("ij,ij->i", rel, rel)
        keep = (d2 <= h2) & (cand != i)
        idx = cand[keep]
        out.append(Neighborhood(
            owner=i,
            indices=idx,
            xi=rel[keep],
            volumes=vol[idx],
            influence=np.ones(len(idx), dtype=np.uint8),
        ))
    return out


def build_shape_tensor(neighborhood) -> np.ndarray:
    """Reference moment tensor over intact bonds; caches its inverse.

    Raises SingularShapeTensor when fewer than three non-collinear intact
    bonds remain (condition number above the limit).
    """
    nb = neighborhood
    w = nb.influence.astype(float) * nb.volumes
    k = np.einsum("e,ei,ej->ij", w, nb.xi, nb.xi)
    eigs = np.linalg.eigvalsh(k)
    if eigs[0] <= 0.0 or eigs[1] / eigs[0] > CONDITION_LIMIT:
        cond = math.inf if eigs[0] <= 0.0 else eigs[1] / eigs[0]
        raise SingularShapeTensor(point=nb.owner, condition=cond)
    nb.shape_tensor = k
    nb.shape_tensor_inv = np.linalg.inv(k)
    return k


def _promote(mat2, diag=1.0) -> np.ndarray:
    out = np.zeros((3, 3))
    out[:2, :2] = mat2
    out[2, 2] = diag
    return out


def deformation_gradient(neighborhood, displacements) -> np.ndarray:
    """Nonlocal deformation gradient, promoted to 3x3 plane strain."""
    nb = neighborhood
    if nb.shape_tensor_inv is None:
        build_shape_tensor(nb)
    u = np.asarray(displacements, dtype=float)
    y = nb.xi + u[nb.indices] - u[nb.owner]
    w = nb.influence.astype(float) * nb.volumes
    a = np.einsum("e,ei,ej->ij", w, y, nb.xi)
    return _promote(a @ nb.shape_tensor_inv)


def velocity_gradient(neighborhood, velocities, deformation_grad) -> np.ndarray:
    """Spatial velocity gradient from the bond velocity state."""
    nb = neighborhood
    f = np.asarray(deformation_grad, dtype=float)[:2, :2]
    det = f[0, 0] * f[1, 1] - f[0, 1] * f[1, 0]
    if det <= 0.0:
        raise InvertedElement(point=nb.owner, determinant=det)
    v = np.asarray(velocities, dtype=float)
    du = v[nb.indices] - v[nb.owner]
    w = nb.influence.astype(float) * nb.volumes
    fdot = np.einsum("e,ei,ej->ij", w, du, nb.xi) @ nb.shape_tensor_inv
    finv = np.array([[f[1, 1], -f[0, 1]], [-f[1, 0], f[0, 0]]]) / det
    return _promote(fdot @ finv, diag=0.0)


def rate_of_deformation(velocity_grad) -> np.ndarray:
    """Symmetric part of the velocity gradient."""
    l = np.asarray(velocity_grad, dtype=float)
    return 0.5 * (l + l.T)


def unrotated_rate(rate, rotation) -> np.ndarray:
    """Rate of deformation pulled back to the unrotated configuration."""
    r = _as_rotation3(rotation)
    return r.T @ np.asarray(rate, dtype=float) @ r


def rotate_to_spatial(tensor, rotation) -> np.ndarray:
    """Push an unrotated tensor forward to the spatial configuration."""
    r = _as_rotation3(rotation)
    return r @ np.asarray(tensor, dtype=float) @ r.T


def _as_rotation3(rotation) -> np.ndarray:
    r = np.asarray(rotation, dtype=float)
    if r.shape == (2, 2):
        return _promote(r)
    return r


def polar_decompose(deformation_grad):
    """Closed-form planar polar decomposition F = R U.

    Accepts a 2x2 tensor or a plane-strain embedded 3x3 and returns (R, U)
    of the same shape.  Raises InvertedElement for det F <= 0.
    """
    f_in = np.asarray(deformation_grad, dtype=float)
    planar = f_in.shape == (2, 2)
    f = f_in if planar else f_in[:2, :2]
    det = f[0, 0] * f[1, 1] - f[0, 1] * f[1, 0]
    if det <= 0.0:
        raise InvertedElement(determinant=det)
    c = f[0, 0] + f[1, 1]
    s = f[1, 0] - f[0, 1]
    h = math.hypot(c, s)
    if h < 1.0e-300:
        r = np.eye(2)
    else:
        r = np.array([[c, -s], [s, c]]) / h
    u = r.T @ f
    u = 0.5 * (u + u.T)
    if planar:
        return r, u
    return _promote(r), _promote(u)


def strain_increment(unrotated_rate_tensor, dt) -> np.ndarray:
    """Strain increment from the unrotated rate over one time step."""
    if dt < 0.0:
        raise ValueError("time step must be nonnegative")
    return dt * np.asarray(unrotated_rate_tensor, dtype=float)


def update_porosity(jacobian, initial_porosity) -> float:
    """Current porosity from the deformation Jacobian, clamped to (0, 1)."""
    if jacobian <= 0.0:
        raise InvertedElement(determinant=jacobian)
    phi = 1.0 - (1.0 - initial_porosity) / jacobian
    return min(max(phi, 1.0e-6), 1.0 - 1.0e-6)


@dataclass
class BondNetwork:
    """All neighborhoods packed into flat CSR arrays for the hot loops.

    ``recip[e]`` is the slot of the mirrored bond, so breakage can be
    applied symmetrically in one sweep.
    """

    indptr: np.ndarray           # (n+1,)
    indices: np.ndarray          # (nbonds,)
    xi: np.ndarray               # (nbonds, 2)
    influence: np.ndarray        # (nbonds,) uint8
    bond_energy: np.ndarray      # (nbonds,)
    recip: np.ndarray            # (nbonds,)
    source: np.ndarray           # (nbonds,) owner of each slot
    volumes: np.ndarray          # (n,)
    shape_inv: np.ndarray        # (n, 2, 2)
    inert: np.ndarray            # (n,) bool, singular shape tensor
    damage: np.ndarray           # (n,)
    bond_volume_total: np.ndarray  # (n,) reference total, fixed

    @property
    def npoints(self):
        return len(self.indptr) - 1

    def neighborhood(self, i) -> Neighborhood:
        """Per-point view (copies) for the tensor-level operations."""
        sl = slice(self.indptr[i], self.indptr[i + 1])
        nb = Neighborhood(
            owner=i,
            indices=self.indices[sl].copy(),
            xi=self.xi[sl].copy(),
            volumes=self.volumes[self.indices[sl]],
            influence=self.influence[sl].copy(),
            bond_energy=self.bond_energy[sl].copy(),
        )
        build_shape_tensor(nb)
        return nb


def pack_network(neighborhoods, volumes) -> BondNetwork:
    """Flatten neighborhoods to CSR and precompute shape tensor inverses."""
    n = len(neighborhoods)
    counts = np.array([len(nb.indices) for nb in neighborhoods],
                      dtype=np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    nb_total = int(indptr[-1])
    indices = np.empty(nb_total, dtype=np.int64)
    xi = np.empty((nb_total, 2))
    source = np.empty(nb_total, dtype=np.int64)
    for i, nb in enumerate(neighborhoods):
        sl = slice(indptr[i], indptr[i + 1])
        indices[sl] = nb.indices
        xi[sl] = nb.xi
        source[sl] = i

    # reciprocal slot of each bond: neighbors are sorted by id per point
    recip = np.empty(nb_total, dtype=np.int64)
    for e in range(nb_total):
        i = source[e]
        j = indices[e]
        sl = slice(indptr[j], indptr[j + 1])
        k = np.searchsorted(indices[sl], i)
        recip[e] = indptr[j] + k

    vol = np.asarray(volumes, dtype=float)
    net = BondNetwork(
        indptr=indptr, indices=indices, xi=xi,
        influence=np.ones(nb_total, dtype=np.uint8),
        bond_energy=np.zeros(nb_total),
        recip=recip, source=source, volumes=vol,
        shape_inv=np.zeros((n, 2, 2)),
        inert=np.zeros(n, dtype=bool),
        damage=np.zeros(n),
        bond_volume_total=np.array(
            [vol[nb.indices].sum() for nb in neighborhoods]),
    )
    refresh_shape_tensors(net, np.arange(n))
    return net


def refresh_shape_tensors(net, points) -> None:
    """Recompute cached shape tensor inverses for the given points.

    Points whose remaining intact bonds are degenerate are flagged inert
    instead of raising, so a heavily damaged region keeps integrating.
    """
    for i in points:
        sl = slice(net.indptr[i], net.indptr[i + 1])
        w = net.influence[sl].astype(float) * net.volumes[net.indices[sl]]
        x = net.xi[sl]
        k00 = float(np.sum(w * x[:, 0] * x[:, 0]))
        k01 = float(np.sum(w * x[:, 0] * x[:, 1]))
        k11 = float(np.sum(w * x[:, 1] * x[:, 1]))
        tr = k00 + k11
        det = k00 * k11 - k01 * k01
        disc = math.sqrt(max(0.25 * tr * tr - det, 0.0))
        lo = 0.5 * tr - disc
        hi = 0.5 * tr + disc
        if lo <= 0.0 or hi / lo > CONDITION_LIMIT:
            net.inert[i] = True
            net.shape_inv[i] = np.eye(2)
            continue
        net.inert[i] = False
        net.shape_inv[i] = np.array([[k11, -k01], [-k01, k00]]) / det
