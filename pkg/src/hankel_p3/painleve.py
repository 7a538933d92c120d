"""Differential equations in t: the Riccati pair, Painleve III' for R_n, the sigma-form.

Residual checks consume exact t-derivatives from :mod:`hankel_p3.ladder`.
This module also provides a Taylor-series integrator for the R_n equation
and the integral representation of ``ln D_n(t) / D_n(0)``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import mpmath
from mpmath import mp

from .errors import DomainError, QuadratureError, SingularityError
from .hankel_core import compute_recurrence, gaussian_table, hermite_logD0
from .ladder import AuxQuantities, _parity, _sign, gaussian_aux
from .precision import PrecisionConfig, to_mpf
from .report import ResidualReport, scaled_residual

log = logging.getLogger(__name__)


def _default_prec(aux):
    return PrecisionConfig(aux.work_bits, min(64, aux.work_bits - 1))


def _abs_sum(terms):
    return mpmath.fsum(abs(x) for x in terms)


@dataclass(frozen=True)
class ODEState:
    t: mpmath.mpf
    y: mpmath.mpf
    dy: mpmath.mpf
    n: int


@dataclass(frozen=True)
class ResidualGrid:
    """Worst residual over n of each equation at every grid point.

    ``detail[name][i]`` holds the per-n report behind ``residuals[name][i]``.
    """

    t_grid: tuple
    residuals: dict
    detail: dict = field(default_factory=dict)

    def worst(self, name):
        return max(self.residuals[name])

    def rows(self):
        """``(equation, n, t, residual)`` sorted by equation, t, n."""
        out = []
        for name in sorted(self.detail):
            for rep in self.detail[name]:
                out.extend(rep.rows())
        return out


# --- residual checks -------------------------------------------------------

def riccati_residuals(aux: AuxQuantities, prec: PrecisionConfig | None = None, n_min: int = 1):
    """Residuals of the linear ODE for r_n and the Riccati equation for R_n.

    ``r_n' = -2(-1)^n r_n / R_n - (n + r_n) R_n / (2t)`` and
    ``2t R_n' = R_n^2 + (1 - 2 r_n) R_n - 4(-1)^n t``.
    """
    prec = prec or _default_prec(aux)
    t = aux.t
    lin, ric = {}, {}
    with prec.workprec():
        for n in range(n_min, aux.n_max + 1):
            s = _sign(n)
            R, r, dR, dr = aux.R[n], aux.r[n], aux.dR[n], aux.dr[n]
            a, b = -2 * s * r / R, -(n + r) * R / (2 * t)
            lin[n] = scaled_residual(dr, a + b, abs(dr) + abs(a) + abs(b))
            terms = (R ** 2, (1 - 2 * r) * R, -4 * s * t)
            ric[n] = scaled_residual(2 * t * dR, mpmath.fsum(terms), abs(2 * t * dR) + _abs_sum(terms))
    return {"r_linear_ode": ResidualReport("r_linear_ode", t, lin),
            "R_riccati": ResidualReport("R_riccati", t, ric)}


def log_derivative_residuals(aux: AuxQuantities, prec: PrecisionConfig | None = None):
    """Residuals of ``2t beta_n' = beta_n (R_{n-1} - R_n)`` and ``2t p' = (1-(-1)^n) t - beta_n R_n``."""
    prec = prec or _default_prec(aux)
    t = aux.t
    bd, pd = {}, {}
    with prec.workprec():
        dbeta = [mpmath.mpf(0)] + [aux.dr[n] / 2 for n in range(1, aux.n_max + 1)]
        dp = mpmath.mpf(0)
        for n in range(1, aux.n_max + 1):
            b = aux.beta[n]
            lhs, rhs = 2 * t * dbeta[n], b * (aux.R[n - 1] - aux.R[n])
            bd[n] = scaled_residual(lhs, rhs, abs(lhs) + b * (aux.R[n - 1] + aux.R[n]))
            dp -= dbeta[n - 1]
            lhs, rhs = 2 * t * dp, _parity(n) * t - b * aux.R[n]
            pd[n] = scaled_residual(lhs, rhs, abs(lhs) + _parity(n) * t + b * aux.R[n])
    return {"beta_derivative": ResidualReport("beta_derivative", t, bd),
            "p_derivative": ResidualReport("p_derivative", t, pd)}


def p3_rhs(n, t, y, dy):
    """Right-hand side of ``R'' = F(t, R, R')`` for the Painleve III' equation of R_n."""
    return (dy ** 2 / y - dy / t + (2 * n + 1) * y ** 2 / (4 * t ** 2) - _sign(n) / t
            + y ** 3 / (4 * t ** 2) - 4 / y)


def p3_residual(aux: AuxQuantities, prec: PrecisionConfig | None = None, n_min: int = 1):
    """Residuals of the Painleve III' equation for R_n and the second-order equation for r_n."""
    if not aux.has_second_derivatives:
        raise DomainError("second t-derivatives required")
    prec = prec or _default_prec(aux)
    t = aux.t
    p3, rode = {}, {}
    with prec.workprec():
        for n in range(n_min, aux.n_max + 1):
            s = _sign(n)
            y, dy, d2y = aux.R[n], aux.dR[n], aux.d2R[n]
            terms = (dy ** 2 / y, -dy / t, (2 * n + 1) * y ** 2 / (4 * t ** 2), -s / t,
                     y ** 3 / (4 * t ** 2), -4 / y)
            p3[n] = scaled_residual(d2y, mpmath.fsum(terms), abs(d2y) + _abs_sum(terms))
            r, dr, d2r = aux.r[n], aux.dr[n], aux.d2r[n]
            inner = (2 * t ** 2 * dr * d2r, 2 * t * r * dr ** 2, -8 * s * t * r * dr, t * dr ** 2,
                     -4 * s * n * t * dr, -8 * s * r ** 3, -8 * s * n * r ** 2)
            f1 = (t * dr ** 2, -4 * s * r ** 2, -4 * s * n * r)
            f2 = (2 * t * d2r, 2 * r * dr, dr, -8 * s * r, -4 * s * n)
            lhs = mpmath.fsum(inner) ** 2
            rhs = t * mpmath.fsum(f1) * mpmath.fsum(f2) ** 2
            scale = _abs_sum(inner) ** 2 + t * _abs_sum(f1) * _abs_sum(f2) ** 2
            rode[n] = scaled_residual(lhs, rhs, scale)
    return {"painleve_iii": ResidualReport("painleve_iii", t, p3),
            "r_second_order": ResidualReport("r_second_order", t, rode)}


def sigma_from_R(n, t, R, dR):
    """sigma_n expressed through R_n and R_n' (the integrand of the integral representation times 2t)."""
    return (mpmath.mpf(1) / 4 + 2 * t - n * R - R ** 2 / 4 - t * dR / R
            + t ** 2 * (dR ** 2 - 4) / R ** 2)


def sigma_ode_residual(aux: AuxQuantities, prec: PrecisionConfig | None = None, n_min: int = 1):
    """Residuals of the sigma_n equation and its supporting relations.

    Reports ``sigma_ode`` (the second-order equation, scaled by the magnitude of
    both sides), ``r_squared_sigma`` (``r_n^2 = sigma_n - 2t sigma_n' + 2(1-(-1)^n)t``),
    ``product_relation`` and ``sigma_from_R``.
    """
    if not aux.has_second_derivatives:
        raise DomainError("second t-derivatives required")
    prec = prec or _default_prec(aux)
    t = aux.t
    out = {k: {} for k in ("sigma_ode", "r_squared_sigma", "product_relation", "sigma_from_R")}
    with prec.workprec():
        for n in range(max(1, n_min), aux.n_max + 1):
            s, par = _sign(n), _parity(n)
            sg, d1, d2 = aux.sigma[n], aux.dsigma[n], aux.d2sigma[n]
            r, dr = aux.r[n], aux.dr[n]
            u = (4 * sg, -4 * (1 + s) * t * d1, s * t * d1 ** 2)
            v = (4 * sg, -8 * t * d1, 8 * par * t)
            w = (2 * par, -d1, -2 * t * d2)
            cube = (sg, -2 * t * d1, 2 * par * t)
            brace = mpmath.fsum(u) * mpmath.fsum(v) - s * t * mpmath.fsum(w) ** 2
            brace_abs = _abs_sum(u) * _abs_sum(v) + t * _abs_sum(w) ** 2
            lhs, rhs = brace ** 2, 256 * n ** 2 * mpmath.fsum(cube) ** 3
            out["sigma_ode"][n] = scaled_residual(lhs, rhs, brace_abs ** 2 + 256 * n ** 2 * _abs_sum(cube) ** 3)
            out["r_squared_sigma"][n] = scaled_residual(r ** 2, mpmath.fsum(cube), r ** 2 + _abs_sum(cube))
            g = (r ** 2, 2 * par * t, -sg)
            lhs = -16 * s * (n + r) * t * r
            rhs = mpmath.fsum(g) ** 2 - 4 * t ** 2 * dr ** 2
            out["product_relation"][n] = scaled_residual(lhs, rhs, abs(lhs) + _abs_sum(g) ** 2
                                                         + 4 * t ** 2 * dr ** 2)
            R, dR = aux.R[n], aux.dR[n]
            terms = (mpmath.mpf(1) / 4, 2 * t, -n * R, -R ** 2 / 4, -t * dR / R, t ** 2 * (dR ** 2 - 4) / R ** 2)
            out["sigma_from_R"][n] = scaled_residual(sg, mpmath.fsum(terms), abs(sg) + _abs_sum(terms))
    return {k: ResidualReport(k, t, v) for k, v in out.items()}


ODE_CHECKS = (riccati_residuals, log_derivative_residuals, p3_residual, sigma_ode_residual)


def residual_grid(t_grid, n_max: int, prec: PrecisionConfig | None = None, checks=ODE_CHECKS) -> ResidualGrid:
    """Run every check in ``checks`` at each t and collect the worst residual over n."""
    prec = prec or PrecisionConfig.for_order(n_max)
    ts = sorted(to_mpf(t) if not isinstance(t, mpmath.mpf) else t for t in t_grid)
    residuals, detail = {}, {}
    for t in ts:
        _, _, aux = gaussian_aux(t, n_max, prec, 3)
        for check in checks:
            for name, rep in check(aux, prec).items():
                residuals.setdefault(name, []).append(rep.worst)
                detail.setdefault(name, []).append(rep)
    return ResidualGrid(tuple(ts), residuals, detail)


# --- integrator --------------------------------------------------------------

@dataclass(frozen=True)
class IntegrationLog:
    n: int
    t0: mpmath.mpf
    t1: mpmath.mpf
    steps: int
    rejected_steps: int
    final_error_estimate: mpmath.mpf

    def to_json(self, digits: int = 20) -> str:
        return json.dumps({"n": self.n, "t0": mpmath.nstr(self.t0, digits), "t1": mpmath.nstr(self.t1, digits),
                           "steps": self.steps, "rejected_steps": self.rejected_steps,
                           "final_error_estimate": mpmath.nstr(self.final_error_estimate, 6)})


def _taylor_coeffs(n, t0, y0, dy0, order):
    """Taylor coefficients of the solution of the R_n equation around ``t0``.

    Products of truncated series are built one coefficient at a time, so each
    new coefficient ``c_{k+2} = F_k / ((k+1)(k+2))`` only needs earlier ones.
    """
    c = [y0, dy0]
    yp, yp2, y2, y3, u = [], [], [], [], []
    tau = [(-1) ** k / t0 ** (k + 1) for k in range(order)]
    tau2 = [(k + 1) * (-1) ** k / t0 ** (k + 2) for k in range(order)]
    yp2u, ypt, y2t, y3t = [], [], [], []
    sgn = _sign(n)

    def conv(a, b, k):
        return mpmath.fsum(a[j] * b[k - j] for j in range(k + 1))

    for k in range(order - 1):
        yp.append((k + 1) * c[k + 1])
        yp2.append(conv(yp, yp, k))
        y2.append(conv(c, c, k))
        y3.append(conv(y2, c, k))
        if k == 0:
            u.append(1 / c[0])
        else:
            u.append(-mpmath.fsum(c[j] * u[k - j] for j in range(1, k + 1)) / c[0])
        yp2u.append(conv(yp2, u, k))
        ypt.append(conv(yp, tau, k))
        y2t.append(conv(y2, tau2, k))
        y3t.append(conv(y3, tau2, k))
        F = (yp2u[k] - ypt[k] + (2 * n + 1) * y2t[k] / 4 - sgn * tau[k] + y3t[k] / 4 - 4 * u[k])
        c.append(F / ((k + 1) * (k + 2)))
    return c


def _taylor_step(n, t0, y0, dy0, h, order):
    c = _taylor_coeffs(n, t0, y0, dy0, order)
    y = mpmath.fsum(ck * h ** k for k, ck in enumerate(c))
    dy = mpmath.fsum(k * ck * h ** (k - 1) for k, ck in enumerate(c) if k)
    return y, dy


def _integrate(n, init: ODEState, t_end, tol, order, h_min, max_steps):
    t, y, dy = init.t, init.y, init.dy
    span = t_end - t
    direction = 1 if span > 0 else -1
    h = direction * min(abs(span), t / 4)
    steps = rejected = 0
    err_total = mpmath.mpf(0)
    while (t_end - t) * direction > 0:
        if steps + rejected > max_steps:
            raise SingularityError("step budget exhausted", ODEState(t, y, dy, n))
        if abs(h) > abs(t_end - t):
            h = t_end - t
        if abs(h) < h_min:
            raise SingularityError(f"step underflow at t={mpmath.nstr(t, 10)}", ODEState(t, y, dy, n))
        if t + h <= 0:
            h = -t / 2
            continue
        y1, d1 = _taylor_step(n, t, y, dy, h, order)
        ym, dm = _taylor_step(n, t, y, dy, h / 2, order)
        y2, d2 = _taylor_step(n, t + h / 2, ym, dm, h / 2, order)
        err = max(abs(y1 - y2), abs(d1 - d2)) / max(1, abs(y2))
        if err <= tol and y2 > 0:
            t, y, dy = t + h, y2, d2
            steps += 1
            err_total += err
            if y <= 0:
                raise SingularityError(f"R_n reached zero near t={mpmath.nstr(t, 10)}", ODEState(t, y, dy, n))
            factor = 2 if err == 0 else min(2, max(mpmath.mpf(1) / 5, mpmath.mpf(9) / 10 * (tol / err) ** (mpmath.mpf(1) / (order + 1))))
            h *= factor
        else:
            rejected += 1
            h /= 2
    return ODEState(t, y, dy, n), steps, rejected, err_total


def integrate_p3_with_log(n: int, t_start, t_end, init: ODEState, prec: PrecisionConfig | None = None,
                          step_tol="1e-25", order: int = 30, certify: bool = True, max_steps: int = 100000):
    """Integrate the Painleve III' equation for R_n from ``t_start`` to ``t_end``.

    A Taylor-series method of the given order advances the solution, with
    local error estimated by step doubling. With ``certify`` the run is
    repeated at half the tolerance and the endpoint difference is folded into
    the reported error estimate.

    Returns
    -------
    (ODEState, IntegrationLog)

    Raises
    ------
    SingularityError
        If R_n reaches zero or the step size underflows; carries the last good state.
    """
    prec = prec or PrecisionConfig()
    if init.n != n:
        raise DomainError("initial state belongs to a different n")
    with prec.workprec():
        t0, t1, tol = to_mpf(t_start), to_mpf(t_end), to_mpf(step_tol)
        if t0 <= 0 or t1 <= 0:
            raise DomainError("integration endpoints must be positive")
        if init.t != t0:
            raise DomainError("initial state is not at t_start")
        if init.y <= 0:
            raise SingularityError("initial R_n must be positive", init)
        if t0 == t1:
            return init, IntegrationLog(n, t0, t1, 0, 0, mpmath.mpf(0))
        h_min = mpmath.ldexp(abs(t1 - t0), -prec.work_bits // 2)
        end, steps, rejected, est = _integrate(n, init, t1, tol, order, h_min, max_steps)
        if certify:
            end2, s2, r2, _ = _integrate(n, init, t1, tol / 2, order, h_min, max_steps)
            est = max(est, abs(end.y - end2.y), abs(end.dy - end2.dy))
            steps, rejected, end = steps + s2, rejected + r2, end2
    entry = IntegrationLog(n, t0, t1, steps, rejected, est)
    log.info("integration %s", entry.to_json())
    return end, entry


def integrate_p3(n: int, t_start, t_end, init: ODEState, prec: PrecisionConfig | None = None,
                 step_tol="1e-25", order: int = 30) -> ODEState:
    return integrate_p3_with_log(n, t_start, t_end, init, prec, step_tol, order)[0]


def initial_state(n: int, t, prec: PrecisionConfig | None = None) -> ODEState:
    """``(R_n(t), R_n'(t))`` from moments and exact trace derivatives."""
    prec = prec or PrecisionConfig.for_order(max(n, 1))
    _, _, aux = gaussian_aux(t, max(n, 1), prec, 2)
    return ODEState(aux.t, aux.R[n], aux.dR[n], n)


# --- integral representation ---------------------------------------------------

@dataclass(frozen=True)
class QuadratureParams:
    """Gauss-Legendre degrees ``m`` use ``3 * 2**(m-1)`` nodes; the error is the
    difference between consecutive degrees."""

    start_degree: int = 3
    max_degree: int = 7
    target: object = "1e-30"


@dataclass(frozen=True)
class IntegralResult:
    values: dict
    error_estimate: dict
    degree: int


def _gl_nodes(degree, prec_bits):
    return mpmath.calculus.quadrature.GaussLegendre(mp).calc_nodes(degree, prec_bits)


def integral_representation_all(n_max: int, t, prec: PrecisionConfig | None = None,
                                quad: QuadratureParams | None = None, builder=None) -> IntegralResult:
    """``ln D_n(t)/D_n(0)`` for ``0 <= n <= n_max`` from the integral over s of sigma_n(s)/(2s).

    sigma_n is rebuilt from R_n and R_n' (supplied by ``builder``, default the
    Gaussian pipeline) at each node. The substitution ``s = u^2`` removes the
    ``s^(-1/2)`` endpoint behaviour.
    """
    prec = prec or PrecisionConfig.for_order(max(n_max, 1))
    quad = quad or QuadratureParams()
    builder = builder or (lambda s, nm, p: gaussian_aux(s, nm, p, 2)[2])
    cache = {}

    def integrand(u):
        key = mpmath.nstr(u, prec.digits)
        if key not in cache:
            s = u ** 2
            aux = builder(s, n_max, prec)
            with prec.workprec():
                cache[key] = [sigma_from_R(n, s, aux.R[n], aux.dR[n]) / u for n in range(n_max + 1)]
        return cache[key]

    with prec.workprec():
        tt = to_mpf(t)
        if tt <= 0:
            raise DomainError("t must be positive")
        b = mpmath.sqrt(tt)
        target = to_mpf(quad.target)
        prev = None
        for degree in range(quad.start_degree, quad.max_degree + 1):
            sums = [mpmath.mpf(0)] * (n_max + 1)
            for x, w in _gl_nodes(degree, prec.work_bits):
                u = b * (x + 1) / 2
                vals = integrand(u)
                for n in range(n_max + 1):
                    sums[n] += w * vals[n]
            cur = [v * b / 2 for v in sums]
            if prev is not None:
                err = [abs(c - p) for c, p in zip(cur, prev)]
                if max(err) <= target:
                    return IntegralResult(dict(enumerate(cur)), dict(enumerate(err)), degree)
            prev = cur
    raise QuadratureError(f"no convergence by degree {quad.max_degree}", max(err))


def integral_representation(n: int, t, prec: PrecisionConfig | None = None,
                            quad: QuadratureParams | None = None, builder=None):
    """``(value, error_estimate)`` of the integral representation for a single n."""
    res = integral_representation_all(n, t, prec, quad, builder)
    return res.values[n], res.error_estimate[n]


def integral_vs_logdet(n_max: int, t, prec: PrecisionConfig | None = None, quad: QuadratureParams | None = None):
    """Per-n ``|integral - (ln D_n(t) - ln D_n(0))|`` and quadrature error estimates."""
    prec = prec or PrecisionConfig.for_order(max(n_max, 1))
    res = integral_representation_all(n_max, t, prec, quad)
    rec = compute_recurrence(gaussian_table(t, n_max, prec, 0), n_max, prec, 0)
    with prec.workprec():
        diff = {n: abs(res.values[n] - (rec.logD[n] - hermite_logD0(n, prec))) for n in range(n_max + 1)}
    return diff, res


# --- scaled sigma-form ------------------------------------------------------------

@dataclass(frozen=True)
class ScaledSigmaSample:
    n: int
    s: mpmath.mpf
    sigma: mpmath.mpf
    dsigma: mpmath.mpf
    d2sigma: mpmath.mpf


def scaled_sigma_samples(n: int, s_values, prec: PrecisionConfig | None = None):
    """``sigma_n(s/n^2)`` with s-derivatives ``sigma_n'(t)/n^2`` and ``sigma_n''(t)/n^4``."""
    prec = prec or PrecisionConfig.for_order(n)
    out = []
    for s in s_values:
        with prec.workprec():
            ss = to_mpf(s)
            t = ss / n ** 2
        _, _, aux = gaussian_aux(t, n, prec, 3)
        with prec.workprec():
            out.append(ScaledSigmaSample(n, ss, aux.sigma[n], aux.dsigma[n] / n ** 2, aux.d2sigma[n] / n ** 4))
    return out


def scaled_sigma_form_residual(samples, prec: PrecisionConfig | None = None):
    """Residual of ``4s^2 S''^2 + 4s S' S'' + 8s S'^3 - 4S S'^2 + S'^2 = 0`` per sample.

    ``samples`` are :class:`ScaledSigmaSample` or ``(s, S, S', S'')`` tuples.
    """
    prec = prec or PrecisionConfig()
    out = {}
    with prec.workprec():
        for smp in samples:
            if isinstance(smp, ScaledSigmaSample):
                s, S, d1, d2 = smp.s, smp.sigma, smp.dsigma, smp.d2sigma
            else:
                s, S, d1, d2 = (to_mpf(x) for x in smp)
            terms = (4 * s ** 2 * d2 ** 2, 4 * s * d1 * d2, 8 * s * d1 ** 3, -4 * S * d1 ** 2, d1 ** 2)
            out[s] = scaled_residual(mpmath.fsum(terms), 0, _abs_sum(terms))
    return out
