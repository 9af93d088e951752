"""Limited-memory BFGS with a Wolfe line search."""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import line_search


@dataclass(frozen=True)
class LBFGSOptions:
    history: int = 10
    max_iter: int = 500
    gtol: float = 1e-7  # infinity norm
    ftol: float = 1e-10  # |dE| ...
    fstall: int = 3  # ... for this many consecutive iterations
    c1: float = 1e-4
    c2: float = 0.1  # near-exact line search; keeps quadratic convergence within n + 5 steps


@dataclass
class LBFGSResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    iterations: int
    n_evals: int
    converged: bool
    message: str
    fallback_steps: int = 0
    trace: list = field(default_factory=list)


def two_loop(grad, s_hist, y_hist):
    """Apply the inverse-Hessian approximation to ``grad``."""
    q = grad.copy()
    alphas = []
    rhos = [1.0 / float(y @ s) for s, y in zip(s_hist, y_hist)]
    for s, y, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rhos)):
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * y
    if s_hist:
        s, y = s_hist[-1], y_hist[-1]
        q *= float(s @ y) / float(y @ y)
    for (s, y, rho), a in zip(zip(s_hist, y_hist, rhos), reversed(alphas)):
        b = rho * float(y @ q)
        q += (a - b) * s
    return q


class _Memo:
    """Caches the last (x, f, g) so the line search's separate f/g calls share work."""

    def __init__(self, fun_and_grad):
        self.fun_and_grad = fun_and_grad
        self.x = None
        self.n_evals = 0

    def __call__(self, x):
        if self.x is None or not np.array_equal(x, self.x):
            self.x = np.array(x, dtype=float)
            self._f, self._g = self.fun_and_grad(self.x)
            self.n_evals += 1
        return self._f, self._g

    def f(self, x):
        return self(x)[0]

    def grad(self, x):
        return self(x)[1]


def _backtrack(memo, x, f, g, d, c1=1e-4, shrink=0.5, max_halvings=60):
    slope = float(g @ d)
    alpha = 1.0
    for _ in range(max_halvings):
        fn, gn = memo(x + alpha * d)
        if fn <= f + c1 * alpha * slope:
            return alpha, fn, gn
        alpha *= shrink
    return None, f, g


def lbfgs(fun_and_grad, x0, options: LBFGSOptions = LBFGSOptions(), callback=None) -> LBFGSResult:
    """Minimize ``f`` given ``fun_and_grad(x) -> (f, g)``.

    Stops when ``|g|_inf < gtol`` or when ``|dE| < ftol`` for ``fstall``
    consecutive iterations. Accepted steps never increase ``f``.
    """
    memo = _Memo(fun_and_grad)
    x = np.array(x0, dtype=float)
    f, g = memo(x)
    s_hist = deque(maxlen=options.history)
    y_hist = deque(maxlen=options.history)
    stall = 0
    fallbacks = 0
    message = "iteration limit reached"
    converged = False
    it = 0
    if callback:
        callback(0, x, f, g)
    for it in range(1, options.max_iter + 1):
        if np.max(np.abs(g), initial=0.0) < options.gtol:
            converged, message = True, "gradient tolerance reached"
            it -= 1
            break
        d = -two_loop(g, list(s_hist), list(y_hist))
        if float(d @ g) >= 0:
            d = -g
            s_hist.clear()
            y_hist.clear()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            alpha, *_ = line_search(memo.f, memo.grad, x, d, gfk=g, old_fval=f,
                                    c1=options.c1, c2=options.c2, maxiter=20)
        if alpha is not None:
            fn, gn = memo(x + alpha * d)
            if not np.isfinite(fn) or fn > f:
                alpha = None
        if alpha is None:
            # steepest-descent fallback, then re-enter with fresh curvature history
            fallbacks += 1
            s_hist.clear()
            y_hist.clear()
            d = -g
            alpha, fn, gn = _backtrack(memo, x, f, g, d)
            if alpha is None:
                message = "line search failed along steepest descent"
                converged = np.max(np.abs(g)) < 1e3 * options.gtol
                break
        x_new = x + alpha * d
        s, y = x_new - x, gn - g
        if float(s @ y) > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(y)):
            s_hist.append(s)
            y_hist.append(y)
        df = f - fn
        x, f, g = x_new, fn, gn
        if callback:
            callback(it, x, f, g)
        stall = stall + 1 if abs(df) < options.ftol else 0
        if stall >= options.fstall:
            converged, message = True, "energy change tolerance reached"
            break
    return LBFGSResult(x, float(f), g, it, memo.n_evals, converged, message, fallbacks)
