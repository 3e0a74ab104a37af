"""Exact Riemann solver for the 1-D ideal-gas Euler equations.

Newton iteration for the star-region pressure followed by standard
self-similar sampling; used as the oracle for the shock-tube check.
"""

from __future__ import annotations

import math

import numpy as np


def _f_and_df(p, rho_k, p_k, c_k, gamma):
    """Velocity-jump contribution of one side and its derivative."""
    if p > p_k:  # shock
        a = 2.0 / ((gamma + 1.0) * rho_k)
        b = (gamma - 1.0) / (gamma + 1.0) * p_k
        root = math.sqrt(a / (p + b))
        f = (p - p_k) * root
        df = root * (1.0 - 0.5 * (p - p_k) / (p + b))
    else:  # rarefaction
        f = 2.0 * c_k / (gamma - 1.0) * ((p / p_k) ** ((gamma - 1.0)
                                                       / (2.0 * gamma)) - 1.0)
        df = (p / p_k) ** (-(gamma + 1.0) / (2.0 * gamma)) / (rho_k * c_k)
    return f, df


def star_state(left, right, gamma=1.4, tol=1e-12, max_iter=100):
    """(p*, u*) for left/right (rho, u, p) primitive states."""
    rho_l, u_l, p_l = left
    rho_r, u_r, p_r = right
    c_l = math.sqrt(gamma * p_l / rho_l)
    c_r = math.sqrt(gamma * p_r / rho_r)
    du = u_r - u_l
    p = max(0.5 * (p_l + p_r), 1e-10)
    for _ in range(max_iter):
        f_l, df_l = _f_and_df(p, rho_l, p_l, c_l, gamma)
        f_r, df_r = _f_and_df(p, rho_r, p_r, c_r, gamma)
        delta = (f_l + f_r + du) / (df_l + df_r)
        p_new = max(p - delta, 1e-12)
        if abs(p_new - p) < tol * p:
            p = p_new
            break
        p = p_new
    f_l, _ = _f_and_df(p, rho_l, p_l, c_l, gamma)
    f_r, _ = _f_and_df(p, rho_r, p_r, c_r, gamma)
    u = 0.5 * (u_l + u_r) + 0.5 * (f_r - f_l)
    return p, u


def sample(xi, left, right, gamma=1.4):
    """Primitive (rho, u, p) of the exact solution at similarity point xi."""
    rho_l, u_l, p_l = left
    rho_r, u_r, p_r = right
    c_l = math.sqrt(gamma * p_l / rho_l)
    c_r = math.sqrt(gamma * p_r / rho_r)
    p_s, u_s = star_state(left, right, gamma)
    gm, gp = gamma - 1.0, gamma + 1.0

    if xi <= u_s:  # left of the contact
        if p_s > p_l:  # left shock
            s_l = u_l - c_l * math.sqrt((gp * p_s / p_l + gm) / (2.0 * gamma))
            if xi <= s_l:
                return rho_l, u_l, p_l
            rho = rho_l * (p_s / p_l + gm / gp) / (gm / gp * p_s / p_l + 1.0)
            return rho, u_s, p_s
        head = u_l - c_l
        c_sl = c_l * (p_s / p_l) ** (gm / (2.0 * gamma))
        tail = u_s - c_sl
        if xi <= head:
            return rho_l, u_l, p_l
        if xi >= tail:
            return rho_l * (p_s / p_l) ** (1.0 / gamma), u_s, p_s
        c = (2.0 * c_l + gm * (u_l - xi)) / gp
        u = xi + c
        rho = rho_l * (c / c_l) ** (2.0 / gm)
        return rho, u, p_l * (c / c_l) ** (2.0 * gamma / gm)

    if p_s > p_r:  # right shock
        s_r = u_r + c_r * math.sqrt((gp * p_s / p_r + gm) / (2.0 * gamma))
        if xi >= s_r:
            return rho_r, u_r, p_r
        rho = rho_r * (p_s / p_r + gm / gp) / (gm / gp * p_s / p_r + 1.0)
        return rho, u_s, p_s
    head = u_r + c_r
    c_sr = c_r * (p_s / p_r) ** (gm / (2.0 * gamma))
    tail = u_s + c_sr
    if xi >= head:
        return rho_r, u_r, p_r
    if xi <= tail:
        return rho_r * (p_s / p_r) ** (1.0 / gamma), u_s, p_s
    c = (2.0 * c_r - gm * (u_r - xi)) / gp
    u = xi - c
    rho = rho_r * (c / c_r) ** (2.0 / gm)
    return rho, u, p_r * (c / c_r) ** (2.0 * gamma / gm)


def sod_density_profile(xs, t, x0=0.5, gamma=1.4):
    """Exact density at positions xs and time t for the standard shock tube."""
    left = (1.0, 0.0, 1.0)
    right = (0.125, 0.0, 0.1)
    return np.array([sample((x - x0) / t, left, right, gamma)[0] for x in xs])
