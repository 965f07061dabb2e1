"""Independent reference computations used as test oracles.

Deliberately written without the package's fitting code: plain loops,
``numpy.linalg.lstsq`` on sqrt-weighted rows and Python's ``**``.
"""

import statistics

import numpy as np

GRID = [round(-0.99 + 0.01 * k, 2) for k in range(99)]


def sigma_hat_sq(data, sigma0_sq):
    xs, ys = [], []
    for n, errs in data.items():
        if len(errs) >= 2:
            xs.append(1.0 / n)
            ys.append(statistics.variance(errs) - sigma0_sq)
    if not xs:
        return 0.0
    return max(0.0, sum(x * y for x, y in zip(xs, ys)) / sum(x * x for x in xs))


def weights(data, sigma0_sq, scheme="folds"):
    sh = sigma_hat_sq(data, sigma0_sq)
    w = []
    for n, errs in sorted(data.items()):
        var = sigma0_sq + sh / n
        for _ in errs:
            w.append({"none": 1.0, "invvar": 1.0 / var, "folds": 1.0 / (len(errs) * var)}[scheme])
    return np.array(w)


def objective(data, gamma, w, columns=("1", "g")):
    rows, e = [], []
    for n, errs in sorted(data.items()):
        for x in errs:
            cols = {"1": 1.0, "g": n**gamma, "2g": n ** (2 * gamma)}
            rows.append([cols[c] for c in columns])
            e.append(x)
    a = np.array(rows)
    e = np.array(e)
    sw = np.sqrt(w)
    theta = np.linalg.lstsq(a * sw[:, None], e * sw, rcond=None)[0]
    r = e - a @ theta
    return float(np.sum(w * r * r)), theta


def brute_force_gamma(data, sigma0_sq=0.02, lam=5.0, scheme="folds", columns=("1", "g")):
    w = weights(data, sigma0_sq, scheme)
    best = None
    for g in GRID:
        total = objective(data, g, w, columns)[0] + lam * abs(g + 0.5)
        key = (total, abs(g + 0.5), g)
        if best is None or key < best[0]:
            best = (key, g)
    return best[1]
