"""Extended-precision reference values built directly from the defining integrals."""

import mpmath as mp


def p2_mp(zeta, t, r, s):
    zeta, t, r, s = (mp.mpf(x) for x in (zeta, t, r, s))
    return (r * s) ** (mp.mpf(0.5) - zeta) / (2 * t) * mp.exp(-(r * r + s * s) / (4 * t)) * mp.besseli(zeta - 0.5, r * s / (2 * t))


def levy_mp(t, tau):
    return t / (2 * mp.sqrt(mp.pi)) * tau ** mp.mpf(-1.5) * mp.exp(-t * t / (4 * tau))


def sigma_mp(beta, tau):
    """sigma_1 by Zolotarev's integral over (0, pi)."""
    b = mp.mpf(beta)
    tau = mp.mpf(tau)
    g = b / (1 - b)

    def a_of(phi):
        return (mp.sin(b * phi) ** b * mp.sin((1 - b) * phi) ** (1 - b) / mp.sin(phi)) ** (1 / (1 - b))

    x = tau ** (-g)
    f = lambda phi: a_of(phi) * mp.exp(-x * a_of(phi))  # noqa: E731
    return g / mp.pi * tau ** (-1 / (1 - b)) * mp.quad(f, [0, mp.pi / 2, mp.pi])


def p_alpha1_mp(zeta, t, r, s):
    """alpha = 1: subordinate p2 against the Levy density with scale t."""
    f = lambda tau: p2_mp(zeta, tau, r, s) * levy_mp(mp.mpf(t), tau)  # noqa: E731
    return mp.quad(f, [0, mp.mpf(t) ** 2 / 8, 1, mp.inf])


def p_alpha_mp(zeta, alpha, t, r, s):
    """General alpha at t = 1 via the Zolotarev density; slow, a handful of points only."""
    assert t == 1.0
    beta = alpha / 2
    f = lambda tau: p2_mp(zeta, tau, r, s) * sigma_mp(beta, tau)  # noqa: E731
    with mp.workdps(25):
        return mp.quad(f, [0, 0.1, 1, 10, mp.inf])
