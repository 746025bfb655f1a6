"""Scalar cores of the material model.

Plain-float functions with no numpy dependence so the numba backend can
compile them directly; the public API in :mod:`periporo.constitutive` wraps
them with validation and tensor bookkeeping.  Domain failures are signalled
by NaN results, never by exceptions.

Units: Pa, m, s, degrees Celsius.  Tension positive; preconsolidation
pressures negative; suction nonnegative.
"""

import math

# saturation floor; the retention curve is clamped to (SR_MIN, 1]
SR_MIN = 1.0e-6

# pressures are expressed in kPa inside the preconsolidation power law
PC_UNIT = 1.0e3

# return mapping controls
NEWTON_TOL = 1.0e-10
NEWTON_MAX_ITER = 50
LINESEARCH_MAX_HALVINGS = 10

# status codes for _return_map_core
RM_OK = 1
RM_NO_CONVERGENCE = 0
RM_DOMAIN = -1


def yield_tolerance(pc):
    """Absolute tolerance on the yield function, Pa^2."""
    return 1.0e-8 * max(1.0e6, pc * pc)


def air_entry_core(theta_c, a2, b2, theta0):
    den = a2 + b2 * theta_c
    if den <= 0.0:
        return math.nan
    return ((a2 + b2 * theta0) / den) ** b2


def meniscus_core(suction, p_atm):
    x = suction / p_atm
    return 1.0 + x / (10.7 + 2.4 * x)


def retention_core(suction, nu, theta_c, a1, b1, a2, b2, n_ret, m_ret,
                   theta0):
    """van Genuchten saturation with temperature-scaled air entry."""
    gam = air_entry_core(theta_c, a2, b2, theta0)
    if gam != gam:
        return math.nan
    x = a1 * gam * (nu - 1.0) ** b1 * suction
    sr = (1.0 + x ** n_ret) ** (-m_ret)
    if sr < SR_MIN:
        sr = SR_MIN
    elif sr > 1.0:
        sr = 1.0
    return sr


def bonding_core(saturation, suction, p_atm):
    return (1.0 - saturation) * meniscus_core(suction, p_atm)


def pc_core(zeta, theta_c, pc_ref, lam, kap, alpha_th, n_ref, c1, c2,
            theta0):
    """Apparent preconsolidation pressure from bonding and temperature.

    Negative output; NaN when the hardening denominator or the thermal
    softening bracket leaves its admissible range.
    """
    chat = 1.0 - c1 * (1.0 - math.exp(c2 * zeta))
    den = lam * chat - kap
    if den <= 0.0:
        return math.nan
    ahat = n_ref * (chat - 1.0) / den
    bhat = (lam - kap) / den
    bracket = 1.0 - alpha_th * math.log(theta_c / theta0)
    if bracket <= 0.0:
        return math.nan
    return -math.exp(ahat) * (-pc_ref / PC_UNIT) ** bhat * bracket * PC_UNIT


def pc_exponents(zeta, lam, kap, n_ref, c1, c2):
    """(ahat, bhat) of the bonding power law; bhat NaN when inadmissible."""
    chat = 1.0 - c1 * (1.0 - math.exp(c2 * zeta))
    den = lam * chat - kap
    if den <= 0.0:
        return math.nan, math.nan
    return n_ref * (chat - 1.0) / den, (lam - kap) / den


def return_map_core(ev_tr, ed_tr, ev_th, pc_ref, zeta, theta_c, nu,
                    bulk, shear, csl, lam, kap, alpha_th, n_ref, c1, c2,
                    theta0):
    """Implicit return mapping in (ev, ed, dlam) space.

    ev_tr, ed_tr: trial elastic volumetric / deviatoric strain invariants.
    ev_th:        thermal volumetric strain at the target temperature.
    pc_ref:       hardening variable entering the bonding power law (Pa < 0).

    Returns (ev, ed, dlam, pc, pc_ref_new, iterations, status).  The
    hardening variable evolves with the plastic volumetric increment inside
    the iteration, so the converged state satisfies the yield condition with
    the updated preconsolidation pressure.
    """
    hard = nu / (lam - kap)
    m2 = csl * csl

    ahat, bhat = pc_exponents(zeta, lam, kap, n_ref, c1, c2)
    if bhat != bhat:
        return ev_tr, ed_tr, 0.0, math.nan, pc_ref, 0, RM_DOMAIN
    bracket = 1.0 - alpha_th * math.log(theta_c / theta0)
    if bracket <= 0.0:
        return ev_tr, ed_tr, 0.0, math.nan, pc_ref, 0, RM_DOMAIN
    scale = math.exp(ahat) * bracket * PC_UNIT

    pc_tr = -scale * (-pc_ref / PC_UNIT) ** bhat
    pscale = max(abs(pc_tr), PC_UNIT)

    # unknowns: ev, ed, lam_s = dlam * pscale (keeps the system O(1))
    ev = ev_tr
    ed = ed_tr
    lam_s = 0.0

    r1 = 0.0
    r2 = 0.0
    r3 = 0.0
    pc = pc_tr
    pc_ref_h = pc_ref
    p = 0.0
    q = 0.0

    norm0 = -1.0
    norm = 0.0
    stalls = 0
    it = 0
    while it <= NEWTON_MAX_ITER:
        pc_ref_h = pc_ref * math.exp(-hard * (ev_tr - ev))
        pc = -scale * (-pc_ref_h / PC_UNIT) ** bhat
        p = bulk * (ev - ev_th)
        q = 3.0 * shear * ed
        dlam = lam_s / pscale
        r1 = ev - ev_tr + dlam * (2.0 * p - pc)
        r2 = ed - ed_tr + dlam * (2.0 * q / m2)
        r3 = (p * p - p * pc + q * q / m2) / (pscale * pscale)
        norm = math.sqrt(r1 * r1 + r2 * r2 + r3 * r3)
        if norm0 < 0.0:
            norm0 = norm
        if norm <= max(NEWTON_TOL * norm0, 1.0e-16):
            break
        if it == NEWTON_MAX_ITER:
            return ev, ed, lam_s / pscale, pc, pc_ref_h, it, RM_NO_CONVERGENCE

        dpc_dev = pc * bhat * hard
        j11 = 1.0 + dlam * (2.0 * bulk - dpc_dev)
        j13 = (2.0 * p - pc) / pscale
        j22 = 1.0 + dlam * 6.0 * shear / m2
        j23 = 2.0 * q / (m2 * pscale)
        j31 = ((2.0 * p - pc) * bulk - p * dpc_dev) / (pscale * pscale)
        j32 = 6.0 * shear * q / (m2 * pscale * pscale)

        # solve [[j11,0,j13],[0,j22,j23],[j31,j32,0]] d = -r by substitution:
        # d_ev, d_ed from rows 1-2 given d_ls, then row 3 fixes d_ls
        if abs(j11) < 1.0e-300 or abs(j22) < 1.0e-300:
            return ev, ed, lam_s / pscale, pc, pc_ref_h, it, RM_NO_CONVERGENCE
        den = j31 * j13 / j11 + j32 * j23 / j22
        if den == 0.0 or den != den:
            return ev, ed, lam_s / pscale, pc, pc_ref_h, it, RM_NO_CONVERGENCE
        d_ls = (r3 - j31 * r1 / j11 - j32 * r2 / j22) / den
        d_ev = (-r1 - j13 * d_ls) / j11
        d_ed = (-r2 - j23 * d_ls) / j22

        # halving line search on divergence
        step = 1.0
        improved = False
        ev_n = ev
        ed_n = ed
        ls_n = lam_s
        for _ in range(LINESEARCH_MAX_HALVINGS + 1):
            ev_n = ev + step * d_ev
            ed_n = ed + step * d_ed
            if ed_n < 0.0:
                ed_n = 0.0
            ls_n = lam_s + step * d_ls
            pc_ref_t = pc_ref * math.exp(-hard * (ev_tr - ev_n))
            pc_t = -scale * (-pc_ref_t / PC_UNIT) ** bhat
            p_t = bulk * (ev_n - ev_th)
            q_t = 3.0 * shear * ed_n
            dl_t = ls_n / pscale
            t1 = ev_n - ev_tr + dl_t * (2.0 * p_t - pc_t)
            t2 = ed_n - ed_tr + dl_t * (2.0 * q_t / m2)
            t3 = (p_t * p_t - p_t * pc_t + q_t * q_t / m2) / (pscale * pscale)
            norm_t = math.sqrt(t1 * t1 + t2 * t2 + t3 * t3)
            if norm_t < norm:
                improved = True
                break
            step *= 0.5
        ev = ev_n
        ed = ed_n
        lam_s = ls_n
        if not improved:
            stalls += 1
            if stalls >= 2:
                return (ev, ed, lam_s / pscale, pc, pc_ref_h, it,
                        RM_NO_CONVERGENCE)
        else:
            stalls = 0
        it += 1

    dlam = lam_s / pscale
    if dlam < 0.0:
        if dlam < -1.0e-12:
            return ev, ed, dlam, pc, pc_ref_h, it, RM_NO_CONVERGENCE
        dlam = 0.0
    return ev, ed, dlam, pc, pc_ref_h, it, RM_OK
