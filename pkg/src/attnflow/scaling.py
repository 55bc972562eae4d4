"""Log-log fit of impact against traffic and the diagnostics used to judge it."""
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateFitError, InsufficientDataError, ValidationError

# two-sample KS critical coefficients c(alpha); critical D = c(alpha) / sqrt(n)
KS_COEFFICIENTS = {0.10: 1.22, 0.05: 1.36, 0.01: 1.63}
DEFAULT_THRESHOLD_N = 1200
KS_RTOL = 1e-9


@dataclass(frozen=True)
class ScalingFit:
    gamma: float
    intercept: float
    r2: float
    rho: float
    rho_degenerate: bool
    d: float
    d_threshold: float
    n_used: int
    n_dropped: int
    log_base: float = math.e

    @property
    def passes_ks(self):
        return self.d < self.d_threshold

    def predict(self, traffic):
        """Fitted impact ``base**intercept * traffic**gamma``."""
        x = np.log(np.asarray(traffic, dtype=float))
        return np.exp(self.intercept * math.log(self.log_base) + self.gamma * x)

    def to_dict(self):
        d = asdict(self)
        d.pop("log_base")
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def ks_statistic(sample_a, sample_b, rtol=0.0):
    """Two-sample Kolmogorov-Smirnov distance ``sup |F_a - F_b|``.

    Pooled values closer than ``rtol`` (relative) are treated as one value,
    so samples that agree up to rounding give zero.
    """
    a = np.sort(np.asarray(sample_a, dtype=float).ravel())
    b = np.sort(np.asarray(sample_b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise InsufficientDataError("KS statistic needs two non-empty samples")
    pooled = np.concatenate([a, b])
    pooled.sort()
    if rtol > 0:
        gap = np.diff(pooled) > rtol * np.maximum(np.abs(pooled[:-1]), np.abs(pooled[1:]))
        # evaluate only at the top of each cluster of near-equal values
        points = pooled[np.append(gap, True)]
    else:
        points = pooled
    fa = np.searchsorted(a, points, side="right") / a.size
    fb = np.searchsorted(b, points, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_threshold(n, alpha=0.10):
    """Critical two-sample KS distance ``c(alpha) / sqrt(n)`` for ``alpha`` in {0.10, 0.05, 0.01}."""
    if n < 1:
        raise ValidationError("sample size must be >= 1")
    for key, c in KS_COEFFICIENTS.items():
        if math.isclose(alpha, key):
            return c / math.sqrt(n)
    raise ValidationError(f"unsupported KS significance {alpha}; use one of {sorted(KS_COEFFICIENTS)}")


def _arrays(table_or_a, C=None):
    if C is None:
        return np.asarray(table_or_a.A, dtype=float), np.asarray(table_or_a.C, dtype=float)
    return np.asarray(table_or_a, dtype=float), np.asarray(C, dtype=float)


def fit_scaling(table, C=None, log_base=math.e, ks_alpha=0.10, threshold_n=DEFAULT_THRESHOLD_N):
    """OLS fit of ``log C`` on ``log A``.

    ``table`` is an :class:`~attnflow.impact.ImpactTable`, or a traffic array
    when ``C`` is given. Sites with non-positive traffic or impact are left
    out and counted in ``n_dropped``. ``d`` compares the observed impacts with
    the fitted ones; ``d_threshold`` is the KS critical value for
    ``threshold_n`` samples at ``ks_alpha``.
    """
    A, C = _arrays(table, C)
    ok = (A > 0) & (C > 0) & np.isfinite(A) & np.isfinite(C)
    n_used = int(ok.sum())
    n_dropped = int(A.size - n_used)
    if n_used < 3:
        raise InsufficientDataError(f"need >= 3 sites with positive A and C, have {n_used}")
    A, C = A[ok], C[ok]
    lb = math.log(log_base)
    x = np.log(A) / lb
    y = np.log(C) / lb
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx <= (1e-12 * max(1.0, float(np.abs(x).max()))) ** 2 * x.size:
        raise DegenerateFitError("all sites have the same traffic; slope undefined")
    yc = y - y.mean()
    gamma = float(xc @ yc) / sxx
    intercept = float(y.mean() - gamma * x.mean())
    ss_tot = float(yc @ yc)
    resid = yc - gamma * xc
    ss_res = float(resid @ resid)
    if ss_tot == 0.0:
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    z = y - x
    zc = z - z.mean()
    szz = float(zc @ zc)
    if szz <= (1e-12 * max(1.0, float(np.abs(z).max()))) ** 2 * z.size:
        rho, degenerate = 0.0, True
    else:
        rho = float(np.clip((zc @ xc) / math.sqrt(szz * sxx), -1.0, 1.0))
        degenerate = False
    # in log space: base**intercept alone can overflow on steep, narrow fits
    predicted = np.exp((intercept + gamma * x) * lb)
    d = ks_statistic(C, predicted, rtol=KS_RTOL)
    return ScalingFit(gamma, intercept, r2, rho, degenerate, d,
                      ks_threshold(threshold_n, ks_alpha), n_used, n_dropped, log_base)


def predicted_impact(traffic, gamma, scale=1.0):
    """``scale * traffic**gamma`` elementwise."""
    return scale * np.asarray(traffic, dtype=float) ** gamma


def dominance_share(traffic, gamma):
    """Share of total impact held by the largest site when impact ~ traffic**gamma."""
    t = np.asarray(traffic, dtype=float)
    if t.size == 0:
        raise InsufficientDataError("dominance share of an empty list")
    if np.any(t <= 0):
        raise ValidationError("traffic values must be positive")
    # normalising by the max keeps large exponents finite
    p = (t / t.max()) ** gamma
    return float(p.max() / p.sum())
