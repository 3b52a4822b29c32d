"""Explicit time stepping shared by the reduced ODE and the PDE solver."""

import numpy as np


def rk4_step(rhs, t, y, dt):
    """Advance ``y`` by one classical fourth-order Runge-Kutta step.

    Parameters
    ----------
    rhs : callable
        ``rhs(t, y)`` returning an array shaped like ``y``. It is evaluated at
        every stage, so any nonlocal quantity derived from ``y`` is recomputed
        from the stage value.
    t : float
        Current time.
    y : ndarray
        Current state.
    dt : float
        Step size.

    Returns
    -------
    ndarray
        State at ``t + dt``.
    """
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * dt, y + (0.5 * dt) * k1)
    k3 = rhs(t + 0.5 * dt, y + (0.5 * dt) * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(rhs, y0, t_end, dt, t0=0.0):
    """Integrate with fixed steps; the last step is shortened to land on ``t_end``.

    Returns the arrays of times and states (states stacked on axis 0).
    """
    y = np.asarray(y0, dtype=float)
    ts = [t0]
    ys = [y]
    t = t0
    n_steps = int(np.ceil((t_end - t0) / dt - 1e-12))
    for i in range(n_steps):
        h = min(dt, t_end - t)
        y = rk4_step(rhs, t, y, h)
        t = t0 + (i + 1) * dt if i + 1 < n_steps else t_end
        ts.append(t)
        ys.append(y)
    return np.array(ts), np.array(ys)
