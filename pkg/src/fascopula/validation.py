"""Dual-oracle consistency suite behind ``fascopula validate``.

Every check is deterministic given the seed. The report carries no
timings, so two runs with the same seed serialise byte-identically.
"""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, fas, montecarlo
from .copula import empirical_kendall, kendall_from_eta, sample_copula
from .mvn import MvnOptions, bvn_cdf, mvn_probability
from .specfun import norm_cdf

__all__ = ["CheckResult", "Report", "run_suite"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    metric: float
    tolerance: float
    detail: str = ""


@dataclass
class Report:
    seed: int
    quick: bool
    version: str = __version__
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_json(self):
        body = asdict(self)
        body["passed"] = self.passed
        return json.dumps(body, indent=2, sort_keys=True, allow_nan=True) + "\n"

    def to_text(self):
        lines = [f"fascopula {self.version} validate (seed={self.seed}, quick={self.quick})"]
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            lines.append(f"{flag}  {c.name}: metric={c.metric:.6g} tol={c.tolerance:.3g}"
                         + (f"  [{c.detail}]" if c.detail else ""))
        lines.append("ALL PASSED" if self.passed else "SOME CHECKS FAILED")
        return "\n".join(lines) + "\n"


def _check(name, metric, tol, detail=""):
    ok = bool(np.isfinite(metric) and metric <= tol)
    return CheckResult(name, ok, float(metric), float(tol), detail)


def check_orthant():
    worst = 0.0
    for rho in (-0.9, -0.5, 0.0, 0.3042, 0.5, 0.9):
        exact = 0.25 + math.asin(rho) / (2.0 * math.pi)
        worst = max(worst, abs(bvn_cdf(0.0, 0.0, rho) - exact))
    return _check("bivariate orthant identity", worst, 5e-5)


def check_independence(options):
    worst = 0.0
    b = np.array([0.3, -0.4, 1.1, 0.0, -1.2, 0.7])
    for K in range(2, 7):
        exact = math.prod(norm_cdf(x) for x in b[:K])
        worst = max(worst, abs(mvn_probability(b[:K], np.eye(K), options) - exact))
    return _check("independence product", worst, 3.0 * options.abs_tol)


def check_limits(options):
    worst = 0.0
    snr = fas.SnrParams(fas.db_to_linear(5.0), 1.0)
    for m in (0.5, 1.0, 3.0):
        marg = fas.NakagamiMarginal(m, 1.0)
        F = marg.cdf(snr.threshold)
        one = fas.outage_probability(snr, fas.FasConfig(1, 1.0), marg, options)
        indep = fas.outage_probability(snr, fas.FasConfig(3, 1.0), marg, options, corr=np.eye(3))
        como = fas.outage_probability(snr, fas.FasConfig(3, 1.0), marg, options,
                                      corr=np.ones((3, 3)))
        worst = max(worst, abs(one - F), abs(indep - F**3), abs(como - F))
    return _check("limit cases (K=1, independent, comonotone)", worst, 1e-3)


def check_copula_consistency(n, seed, options):
    config = fas.FasConfig(3, 2.5)
    marg = fas.NakagamiMarginal(1.0, 1.0)
    _, best = montecarlo.sample_fas_gains(config, marg, n, seed)
    grid = np.linspace(0.4, 1.6, 7)
    worst = 0.0
    for r, est in zip(grid, montecarlo.exceedance_curve(best, grid)):
        p = fas.fas_cdf(r, config, marg, options)
        se = math.sqrt(p * (1.0 - p) / n)
        worst = max(worst, abs(est.value - p) / se)
    return _check("copula MC vs analytic CDF", worst, 4.0,
                  f"K=3 W=2.5 m=1 n={n}, max |z| over 7 points")


def check_jakes_copula(n, seed, options):
    # Jakes and copula models agree closely where the ports are strongly and
    # positively correlated; a wrong sign or scale in J0 breaks this.
    config = fas.FasConfig(2, 0.1)
    marg = fas.NakagamiMarginal(1.0, 1.0)
    best = montecarlo.sample_jakes_direct(config, 1.0, 1.0, n, seed)
    worst = 0.0
    for gb_db in (0.0, 5.0, 10.0):
        snr = fas.SnrParams(fas.db_to_linear(gb_db), fas.db_to_linear(10.0))
        analytic = fas.outage_probability(snr, config, marg, options)
        mc = montecarlo.estimate_exceedance(best, snr.threshold).value
        worst = max(worst, abs(mc - analytic) / analytic)
    return _check("Jakes direct MC vs copula OP", worst, 0.15,
                  f"K=2 W=0.1 m=1 gamma_th=10dB n={n}, max relative gap")


def check_rank(n, seed):
    config = fas.FasConfig(2, 0.05)
    eta = fas.jakes_correlation(config)[0, 1]
    batch = sample_copula(fas.jakes_correlation(config), n, seed)
    gap = abs(empirical_kendall(batch) - kendall_from_eta(eta))
    return _check("empirical vs analytic Kendall tau", gap, 0.01, f"W=0.05 n={n}")


def check_pdf(options):
    config = fas.FasConfig(2, 0.5)
    marg = fas.NakagamiMarginal(1.0, 1.0)
    worst = 0.0
    for r in (0.6, 1.0, 1.4):
        h = 1e-4 * r
        fd = (fas.fas_cdf(r + h, config, marg, options)
              - fas.fas_cdf(r - h, config, marg, options)) / (2.0 * h)
        worst = max(worst, abs(fas.fas_pdf(r, config, marg, options) - fd) / fd)
    return _check("pdf vs finite-difference CDF", worst, 1e-3, "K=2 W=0.5 m=1")


def run_suite(seed=0, quick=False, mvn_tol=1e-6, workers=1):
    options = MvnOptions(abs_tol=mvn_tol, seed=seed, workers=workers)
    n_cop = 100_000 if quick else 1_000_000
    n_jakes = 200_000 if quick else 2_000_000
    n_rank = 20_000 if quick else 100_000
    report = Report(seed=seed, quick=quick)
    report.checks = [
        check_orthant(),
        check_independence(options),
        check_limits(options),
        check_copula_consistency(n_cop, seed, options),
        check_jakes_copula(n_jakes, seed, options),
        check_rank(n_rank, seed),
        check_pdf(options),
    ]
    return report
