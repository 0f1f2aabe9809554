"""Pure-numpy reference kernels.

The semantics here define the kernel contract; the compiled extension in
``_core`` must reproduce them within floating-point round-off.  All arrays
are contiguous float64.
"""

import numpy as np

BACKEND_NAME = "fallback"

IDENTITY = 0
RELU = 1
TANH = 2
SOFTPLUS = 3

ACTIVATION_IDS = {
    "identity": IDENTITY,
    "relu": RELU,
    "tanh": TANH,
    "softplus": SOFTPLUS,
}


def softplus(x):
    # log(1 + e^x) without overflow for large |x|
    x = np.asarray(x, dtype=np.float64)
    return np.log1p(np.exp(-np.abs(x))) + np.maximum(x, 0.0)


def sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def act_forward(pre, act):
    if act == IDENTITY:
        return pre.copy()
    if act == RELU:
        return np.maximum(pre, 0.0)
    if act == TANH:
        return np.tanh(pre)
    if act == SOFTPLUS:
        return softplus(pre)
    raise ValueError(f"unknown activation id {act}")


def act_backward(g, pre, out, act):
    """d(loss)/d(pre) given d(loss)/d(out); fused elementwise chain."""
    if act == IDENTITY:
        return g.copy()
    if act == RELU:
        return np.where(pre > 0.0, g, 0.0)
    if act == TANH:
        return g * (1.0 - out * out)
    if act == SOFTPLUS:
        return g * sigmoid(pre)
    raise ValueError(f"unknown activation id {act}")


def adam_update(p, g, m, v, t, lr, beta1, beta2, eps):
    """Bias-corrected adaptive-moment step, applied to ``p`` in place."""
    m *= beta1
    m += (1.0 - beta1) * g
    v *= beta2
    v += (1.0 - beta2) * (g * g)
    mhat = m / (1.0 - beta1 ** t)
    vhat = v / (1.0 - beta2 ** t)
    p -= lr * mhat / (np.sqrt(vhat) + eps)


def wrap_angle(a):
    """Wrap angle(s) to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(a, dtype=np.float64), 2.0 * np.pi)


def kinematic_transform(eta):
    """6x6 transform from body velocity to inertial pose rate.

    Upper-left block: ZYX rotation body->inertial.  Lower-right block:
    Euler-angle rate transform.  Raises ValueError at the pitch singularity.
    """
    phi, theta, psi = eta[3], eta[4], eta[5]
    cphi, sphi = np.cos(phi), np.sin(phi)
    cth, sth = np.cos(theta), np.sin(theta)
    cpsi, spsi = np.cos(psi), np.sin(psi)
    if abs(cth) < 1e-6:
        raise ValueError("pitch at +-pi/2: Euler-rate transform singular")
    J = np.zeros((6, 6), dtype=np.float64)
    J[0, 0] = cpsi * cth
    J[0, 1] = -spsi * cphi + cpsi * sth * sphi
    J[0, 2] = spsi * sphi + cpsi * cphi * sth
    J[1, 0] = spsi * cth
    J[1, 1] = cpsi * cphi + sphi * sth * spsi
    J[1, 2] = -cpsi * sphi + sth * spsi * cphi
    J[2, 0] = -sth
    J[2, 1] = cth * sphi
    J[2, 2] = cth * cphi
    tth = sth / cth
    J[3, 3] = 1.0
    J[3, 4] = sphi * tth
    J[3, 5] = cphi * tth
    J[4, 4] = cphi
    J[4, 5] = -sphi
    J[5, 4] = sphi / cth
    J[5, 5] = cphi / cth
    return J


def coriolis_force(M, nu):
    """C(nu)*nu for a symmetric mass matrix, skew construction.

    Built so that nu . C(nu) nu == 0 exactly (Coriolis does no work).
    """
    nu1 = nu[:3]
    nu2 = nu[3:]
    p = M[:3, :3] @ nu1 + M[:3, 3:] @ nu2
    q = M[3:, :3] @ nu1 + M[3:, 3:] @ nu2
    out = np.empty(6, dtype=np.float64)
    out[:3] = np.cross(nu2, p)
    out[3:] = np.cross(nu2, q) + np.cross(nu1, p)
    return out


def damping_force(d_lin, d_quad, nu):
    """Diagonal linear + quadratic damping, D(nu)*nu."""
    return (d_lin + d_quad * np.abs(nu)) * nu


def restoring_force(weight, buoyancy, r_g, r_b, eta):
    """Hydrostatic restoring vector g(eta), NED convention (z down)."""
    phi, theta = eta[3], eta[4]
    cphi, sphi = np.cos(phi), np.sin(phi)
    cth, sth = np.cos(theta), np.sin(theta)
    W, B = weight, buoyancy
    xg, yg, zg = r_g
    xb, yb, zb = r_b
    g = np.empty(6, dtype=np.float64)
    g[0] = (W - B) * sth
    g[1] = -(W - B) * cth * sphi
    g[2] = -(W - B) * cth * cphi
    g[3] = -(yg * W - yb * B) * cth * cphi + (zg * W - zb * B) * cth * sphi
    g[4] = (zg * W - zb * B) * sth + (xg * W - xb * B) * cth * cphi
    g[5] = -(xg * W - xb * B) * cth * sphi - (yg * W - yb * B) * sth
    return g


def residual_force(M, d_lin, d_quad, weight, buoyancy, r_g, r_b, eta, nu, tau):
    """F = tau - C(nu)nu - D(nu)nu - g(eta)."""
    return (
        tau
        - coriolis_force(M, nu)
        - damping_force(d_lin, d_quad, nu)
        - restoring_force(weight, buoyancy, r_g, r_b, eta)
    )


def dynamics_step(
    eta,
    nu,
    tau,
    dt,
    M,
    Minv,
    d_lin,
    d_quad,
    weight,
    buoyancy,
    r_g,
    r_b,
    current,
    v_max,
    r_max,
):
    """One first-order step: pose from old velocity, then velocity update.

    ``current`` advects the position kinematically.  Linear speed is capped
    at ``v_max`` (vector norm) and yaw rate at ``r_max`` after the update.
    Returns (eta_next, nu_next).
    """
    J = kinematic_transform(eta)
    eta2 = eta + dt * (J @ nu)
    eta2[:3] += dt * current
    eta2[3:] = wrap_angle(eta2[3:])
    F = residual_force(M, d_lin, d_quad, weight, buoyancy, r_g, r_b, eta, nu, tau)
    nu2 = nu + dt * (Minv @ F)
    speed = np.sqrt(nu2[0] ** 2 + nu2[1] ** 2 + nu2[2] ** 2)
    if speed > v_max:
        nu2[:3] *= v_max / speed
    if abs(nu2[5]) > r_max:
        nu2[5] = np.sign(nu2[5]) * r_max
    return eta2, nu2
