"""Independent reference computations shared by the unit and acceptance tests."""
import math

import numpy as np

from limiter_lab.keyrate import Bb84Observables

N_MAX = 3  # photon-number truncation of the toy channels


def poisson(n, mean):
    return math.exp(-mean) * mean**n / math.factorial(n)


def draw_bb84_toy(rng):
    """Random truncated channel: yields and error rates for 0..N_MAX photons."""
    Y = rng.uniform(0.0, 1.0, N_MAX + 1) * np.array([1e-3, 0.3, 0.6, 0.9])
    e = np.concatenate([[0.5], rng.uniform(0.0, 0.5, N_MAX)])
    mu = rng.uniform(0.2, 0.9)
    nu = rng.uniform(0.02, 0.8) * mu
    return Y, e, mu, nu


def bb84_toy_observables(Y, e, mu, nu):
    """Gains and QBERs by direct Poisson expansion of the truncated channel."""
    def gain(x):
        return sum(poisson(n, x) * Y[n] for n in range(N_MAX + 1))

    def err(x):
        return sum(poisson(n, x) * e[n] * Y[n] for n in range(N_MAX + 1))

    q_mu, q_nu = gain(mu), gain(nu)
    return Bb84Observables(q_mu, err(mu) / q_mu, q_nu, err(nu) / q_nu)


def draw_mdi_toy(rng):
    """Random truncated two-sender channel: Y[n, m] and e[n, m] for n, m <= N_MAX."""
    Y = rng.uniform(0.0, 1.0, (N_MAX + 1, N_MAX + 1))
    e = rng.uniform(0.0, 0.5, (N_MAX + 1, N_MAX + 1))
    mu = rng.uniform(0.2, 0.9)
    nu = rng.uniform(0.02, 0.8) * mu
    return Y, e, mu, nu


def mdi_toy_tables(Y, e, mu, nu):
    """Gain and error-gain tables keyed by intensity pair, as the analysis expects."""
    gains, errs = {}, {}
    levels = (0.0, nu, mu)
    for a in levels:
        for b in levels:
            if not (a == b or a == 0.0 or b == 0.0):
                continue
            w = np.array([[poisson(n, a) * poisson(m, b) for m in range(N_MAX + 1)]
                          for n in range(N_MAX + 1)])
            gains[(a, b)] = float(np.sum(w * Y))
            errs[(a, b)] = float(np.sum(w * e * Y))
    return gains, errs


def brute_force_stacks(catalog, required):
    """Every catalog stack, filtered by achieved isolation."""
    out = []
    for n in range(catalog.max_isolators + 1):
        for iso in ((0.0,) if n == 0 else catalog.isolator_db):
            for att in catalog.attenuator_db:
                for refl in catalog.reflectivity_db:
                    if n * iso + 2 * att + refl >= abs(required) - 1e-9:
                        out.append((n, iso, att, refl))
    return sorted(set(out))
