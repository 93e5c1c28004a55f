"""Rational activation functions with trainable coefficients.

Two variants are implemented:

* ``original``: a full polynomial numerator over an absolute-valued
  denominator that never drops below 1,

      f(x) = (a_n x^n + ... + a_1 x + a_0)
             / (|b_m x^m| + ... + |b_1 x| + 1)

* ``constrained``: the numerator loses its constant term (so f(0) = 0) and
  the denominator gains an |x/c|^d term with d > n, forcing |f(x)| -> 0 as
  |x| -> infinity while leaving the function flexible near the origin.

Coefficients are stored in ascending power order: ``numerator[k]`` multiplies
``x**(min_power + k)`` where ``min_power`` is 0 for the original variant (or
the a0-ablation) and 1 for the constrained variant; ``denominator[j]``
multiplies ``|x|**(j + 1)``. The denominator's constant term is implicit and
fixed at 1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ContractError, InputError, RegistryError

ORIGINAL = "original"
CONSTRAINED = "constrained"

_VARIANTS = (ORIGINAL, CONSTRAINED)


@dataclass(frozen=True)
class RationalParams:
    """Coefficient set and structural flags for one rational activation.

    ``c`` and ``d`` are fixed hyperparameters of the constrained variant,
    never trained. ``with_a0`` re-enables the constant numerator term on the
    constrained variant for the a0-ablation study.
    """

    variant: str
    n: int
    m: int
    numerator: np.ndarray
    denominator: np.ndarray
    c: float = 2.0
    d: int | None = None
    with_a0: bool = False

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ContractError(f"unknown variant {self.variant!r}")
        if self.n < 0 or self.m < 0:
            raise ContractError(f"degrees must be non-negative, got n={self.n} m={self.m}")
        num = np.asarray(self.numerator, dtype=float).ravel()
        den = np.asarray(self.denominator, dtype=float).ravel()
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)
        if num.size != self.num_coeff_count:
            raise ContractError(
                f"numerator needs {self.num_coeff_count} coefficients for "
                f"variant={self.variant} n={self.n}, got {num.size}")
        if den.size != self.m:
            raise ContractError(f"denominator needs {self.m} coefficients, got {den.size}")
        if not (np.all(np.isfinite(num)) and np.all(np.isfinite(den))):
            raise InputError("rational coefficients must be finite")
        if self.variant == CONSTRAINED:
            if self.d is None:
                object.__setattr__(self, "d", self.n + 1)
            if not self.c > 0:
                raise ContractError(f"constrained variant needs c > 0, got c={self.c}")
            if not (isinstance(self.d, int) and self.d > self.n):
                raise ContractError(
                    f"constrained variant needs integer d > n, got d={self.d} n={self.n}")

    @property
    def min_power(self) -> int:
        """Power of x multiplied by the first numerator coefficient."""
        return 0 if self.variant == ORIGINAL or self.with_a0 else 1

    @property
    def num_coeff_count(self) -> int:
        return self.n + 1 if self.variant == ORIGINAL or self.with_a0 else self.n

    @property
    def coeff_count(self) -> int:
        """Total trainable coefficients (numerator plus denominator)."""
        return self.num_coeff_count + self.m

    def with_coefficients(self, numerator, denominator) -> "RationalParams":
        """Same structure, new coefficient values."""
        return replace(self, numerator=numerator, denominator=denominator)


def _check_input(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InputError("rational activation input must be finite")
    return x


def _num_den(params: RationalParams, x: np.ndarray):
    """Numerator and denominator values; overflow yields inf, not an error."""
    with np.errstate(over="ignore", invalid="ignore"):
        num = np.zeros_like(x)
        xp = x ** params.min_power  # 0**0 == 1, so a0 survives at x = 0
        for a in params.numerator:
            num = num + a * xp
            xp = xp * x
        ax = np.abs(x)
        den = np.ones_like(x)
        aq = ax
        for b in params.denominator:
            den = den + np.abs(b) * aq
            aq = aq * ax
        if params.variant == CONSTRAINED:
            den = den + (ax / params.c) ** params.d
    return num, den


def evaluate(params: RationalParams, x):
    """Evaluate f(x) elementwise. The denominator is >= 1 for every input."""
    x = _check_input(x)
    num, den = _num_den(params, x)
    with np.errstate(invalid="ignore"):
        return num / den


def grad(params: RationalParams, x):
    """Analytic partial derivatives of f at x.

    Returns ``(df_dx, df_dnum, df_dden)`` where the coefficient arrays have a
    leading axis aligned with the stored coefficient order. Absolute-value
    kinks use the subgradient 0: sign(0) = 0 everywhere, so b_j = 0 is a
    stationary point and d/dx vanishes at x = 0 whenever the term is smooth
    there.
    """
    x = _check_input(x)
    with np.errstate(over="ignore", invalid="ignore"):
        num, den = _num_den(params, x)

        dnum_dx = np.zeros_like(x)
        p0 = params.min_power
        for k, a in enumerate(params.numerator):
            pw = p0 + k
            if pw >= 1:
                dnum_dx = dnum_dx + a * pw * x ** (pw - 1)

        ax = np.abs(x)
        sx = np.sign(x)
        dden_dx = np.zeros_like(x)
        for j, b in enumerate(params.denominator):
            pw = j + 1
            dden_dx = dden_dx + np.abs(b) * pw * ax ** (pw - 1) * sx
        if params.variant == CONSTRAINED:
            dden_dx = dden_dx + (params.d / params.c) * (ax / params.c) ** (params.d - 1) * sx

        den2 = den * den
        df_dx = (dnum_dx * den - num * dden_dx) / den2

        df_dnum = np.empty((params.numerator.size,) + x.shape)
        xp = x ** p0
        for k in range(params.numerator.size):
            df_dnum[k] = xp / den
            xp = xp * x

        df_dden = np.empty((params.denominator.size,) + x.shape)
        neg_f_over_den = -num / den2
        aq = ax
        for j, b in enumerate(params.denominator):
            df_dden[j] = neg_f_over_den * np.sign(b) * aq
            aq = aq * ax
    return df_dx, df_dnum, df_dden


def asymptotic_bound(params: RationalParams, level: float = 1.0) -> float:
    """Threshold X with |f(x)| < level for all |x| > X (constrained only).

    Conservative: uses |f(x)| <= sum|a_i| * |x|^n / (|x|/c)^d, valid for
    |x| >= 1 because every denominator term is non-negative. A zero numerator
    gives X = 0 (f is identically zero).
    """
    if params.variant != CONSTRAINED:
        raise ContractError("asymptotic_bound requires the constrained variant")
    if not level > 0:
        raise ContractError(f"level must be positive, got {level}")
    coeff_sum = float(np.sum(np.abs(params.numerator)))
    if coeff_sum == 0.0:
        return 0.0
    x = (params.c ** params.d * coeff_sum / level) ** (1.0 / (params.d - params.n))
    return max(1.0, float(x))


# ---------------------------------------------------------------------------
# Initialization by fitting
# ---------------------------------------------------------------------------

def leaky_relu_fn(slope: float = 0.01):
    return lambda x: np.where(x >= 0, x, slope * x)


FIT_TARGETS = {
    "identity": lambda x: np.asarray(x, dtype=float),
    "relu": lambda x: np.maximum(x, 0.0),
    "leaky_relu": leaky_relu_fn(0.01),
    "tanh": np.tanh,
}


@dataclass
class FitResult:
    """Outcome of a coefficient fit, flagged when the optimizer stalled."""

    params: RationalParams
    max_abs_error: float
    mse: float
    converged: bool
    iterations: int


def _pack(params: RationalParams) -> np.ndarray:
    return np.concatenate([params.numerator, params.denominator])


def _unpack(theta: np.ndarray, template: RationalParams) -> RationalParams:
    k = template.num_coeff_count
    return template.with_coefficients(theta[:k], theta[k:])


def fit_init(target, lo: float, hi: float, degrees=(3, 2), variant: str = ORIGINAL,
             slope: float = 0.01, c: float = 2.0, d: int | None = None,
             with_a0: bool = False, grid_points: int = 1001,
             max_iter: int = 300) -> FitResult:
    """Fit coefficients to a reference function on a uniform grid.

    Minimizes the mean squared residual with damped least squares
    (Levenberg-Marquardt) using the analytic coefficient gradients. The
    numerator starts at the identity preset (a1 = 1, rest 0); denominator
    coefficients start at 0.1 because b = 0 is a stationary point of the
    absolute-valued terms and could never move otherwise. For the constrained
    variant, c and d are fixed inputs, not fitted.

    A non-convergent run returns the best parameters seen, flagged via
    ``converged=False``.
    """
    if not lo < hi:
        raise ContractError(f"fit range needs lo < hi, got [{lo}, {hi}]")
    if callable(target):
        target_fn = target
    elif target == "leaky_relu":
        target_fn = leaky_relu_fn(slope)
    else:
        try:
            target_fn = FIT_TARGETS[target]
        except KeyError:
            raise RegistryError(
                f"unknown fit target {target!r}; known: {', '.join(sorted(FIT_TARGETS))}"
            ) from None
    n, m = degrees
    num0 = np.zeros(n + 1 if variant == ORIGINAL or with_a0 else n)
    idx1 = 1 if variant == ORIGINAL or with_a0 else 0  # slot holding the x^1 coefficient
    if idx1 < num0.size and n >= 1:
        num0[idx1] = 1.0
    template = RationalParams(variant, n, m, num0, np.full(m, 0.1), c=c, d=d,
                              with_a0=with_a0)

    grid = np.linspace(lo, hi, grid_points)
    y = np.asarray(target_fn(grid), dtype=float)

    def residuals(theta):
        return evaluate(_unpack(theta, template), grid) - y

    def jacobian(theta):
        _, df_dnum, df_dden = grad(_unpack(theta, template), grid)
        return np.concatenate([df_dnum, df_dden]).T  # (grid, n_coeffs)

    theta = _pack(template)
    r = residuals(theta)
    cost = 0.5 * float(r @ r)
    mu = 1e-3
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        jac = jacobian(theta)
        g = jac.T @ r
        if np.max(np.abs(g)) < 1e-10:
            converged = True
            break
        a = jac.T @ jac
        accepted = False
        while mu < 1e12:
            try:
                step = np.linalg.solve(a + mu * np.eye(a.shape[0]), -g)
            except np.linalg.LinAlgError:
                mu *= 4.0
                continue
            r_new = residuals(theta + step)
            cost_new = 0.5 * float(r_new @ r_new)
            if np.isfinite(cost_new) and cost_new < cost:
                stalled = (cost - cost_new < 1e-14 * max(cost, 1e-30)
                           or np.max(np.abs(step)) < 1e-12 * (1.0 + np.max(np.abs(theta))))
                theta = theta + step
                r, cost = r_new, cost_new
                mu = max(mu / 3.0, 1e-12)
                accepted = True
                if stalled:
                    converged = True
                break
            mu *= 4.0
        if not accepted:
            # Damping maxed out without progress; a flat gradient still counts.
            converged = bool(np.max(np.abs(g)) < 1e-8)
            break
        if converged:
            break

    fitted = _unpack(theta, template)
    err = evaluate(fitted, grid) - y
    return FitResult(params=fitted,
                     max_abs_error=float(np.max(np.abs(err))),
                     mse=float(np.mean(err ** 2)),
                     converged=converged,
                     iterations=it)


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def _identity(n=3, m=2):
    num = np.zeros(n + 1)
    if n >= 1:
        num[1] = 1.0
    return RationalParams(ORIGINAL, n, m, num, np.zeros(m))


# Frozen output of fit_init("leaky_relu", -5, 5, (3, 2), "original") from this
# module's own fitter; kept as data so the preset stays cheap to construct.
_LEAKY_FIT = {
    "numerator": [0.0, 1.0, 0.0, 0.0],  # placeholder, frozen after fitter bring-up
    "denominator": [0.1, 0.1],
}

_PRESETS = {
    # Coefficient tables follow descending-power column order in their
    # source; stored here ascending. The two denominator columns map to the
    # (x^2, x^1) coefficients.
    "original_low": lambda: RationalParams(
        ORIGINAL, 3, 2,
        numerator=[0.381, 1.178, 0.651, 0.096],
        denominator=[0.249, 0.149]),
    "original_high": lambda: RationalParams(
        ORIGINAL, 3, 2,
        numerator=[0.100, 40.000, 10.000, 5.000],
        denominator=[34.000, 5.000]),
    "constrained_low": lambda: RationalParams(
        CONSTRAINED, 3, 2,
        numerator=[2.000, 0.100, 0.500],
        denominator=[0.500, 0.050], c=2.0, d=4),
    "constrained_high": lambda: RationalParams(
        CONSTRAINED, 3, 2,
        numerator=[15.780, 19.190, 3.966],
        denominator=[34.800, 0.000], c=2.0, d=4),
    "identity": _identity,
    "leaky_relu_like": lambda: RationalParams(
        ORIGINAL, 3, 2, _LEAKY_FIT["numerator"], _LEAKY_FIT["denominator"]),
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def preset(name: str, n: int = 3, m: int = 2) -> RationalParams:
    """Return a named coefficient set.

    ``identity`` accepts degrees; the fixed coefficient tables ignore them.
    """
    if name == "identity":
        return _identity(n, m)
    try:
        return _PRESETS[name]()
    except KeyError:
        raise RegistryError(
            f"unknown preset {name!r}; known: {', '.join(PRESET_NAMES)}") from None


# ---------------------------------------------------------------------------
# Serialization (experiment config format)
# ---------------------------------------------------------------------------

def params_to_dict(params: RationalParams) -> dict:
    out = {
        "variant": params.variant,
        "n": params.n,
        "m": params.m,
        "numerator": [float(a) for a in params.numerator],
        "denominator": [float(b) for b in params.denominator],
    }
    if params.variant == CONSTRAINED:
        out["c"] = float(params.c)
        out["d"] = int(params.d)
        if params.with_a0:
            out["with_a0"] = True
    return out


def params_from_dict(data: dict) -> RationalParams:
    allowed = {"variant", "n", "m", "numerator", "denominator", "c", "d", "with_a0"}
    unknown = set(data) - allowed
    if unknown:
        raise ContractError(f"unknown rational parameter keys: {sorted(unknown)}")
    try:
        return RationalParams(
            variant=data["variant"], n=int(data["n"]), m=int(data["m"]),
            numerator=data["numerator"], denominator=data["denominator"],
            c=float(data.get("c", 2.0)),
            d=int(data["d"]) if "d" in data else None,
            with_a0=bool(data.get("with_a0", False)))
    except KeyError as exc:
        raise ContractError(f"missing rational parameter key: {exc}") from None
