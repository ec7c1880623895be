"""Generative models with exact ground-truth functionals.

Each model can sample a dataset and report closed-form population targets:
the best linear coefficient, the misclassification rate of any rule, the
smoothed surrogate risk, and (for decision models) the mean outcome of any
linear rule. Coverage experiments check intervals against these values.

Sampling uses a fixed draw order (selectors, then uniforms, then normals) so
a given (model, n, rng) triple is reproducible across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, ndtr

from .data import ClassDataset, DecisionDataset
from .errors import ValidationError
from .rng import RngSeed, as_generator

__all__ = [
    "MixtureModel",
    "LocalSequence",
    "AtomModel",
    "DecisionGenModel",
    "MisclassProbability",
    "MonteCarloValue",
    "true_misclass",
    "true_smooth_surrogate",
    "population_beta",
    "learning_curve_limit",
    "true_value",
    "true_value_mc",
    "model_to_config",
    "model_from_config",
]

_SQRT2 = math.sqrt(2.0)
_GH_NODES: tuple[np.ndarray, np.ndarray] | None = None


def _hermgauss() -> tuple[np.ndarray, np.ndarray]:
    global _GH_NODES
    if _GH_NODES is None:
        u, w = np.polynomial.hermite.hermgauss(128)
        _GH_NODES = (u, w / math.sqrt(math.pi))
    return _GH_NODES


@dataclass(frozen=True)
class MisclassProbability:
    """Misclassification rate under both boundary-tie conventions.

    ``strict`` counts only points classified with the wrong sign;
    ``randomized`` adds half of ``boundary_mass``, the probability of
    landing exactly on the rule's boundary.
    """

    strict: float
    randomized: float
    boundary_mass: float


@dataclass(frozen=True)
class MonteCarloValue:
    value: float
    se: float
    n_draws: int


@dataclass(frozen=True)
class MixtureModel:
    """Scalar-feature two-class model with a tiltable positive class.

    Labels are uniform on {-1, +1}. Given Y=+1, X is drawn from the mean 2
    normal component with probability 1/2 + delta and from the mean -2
    component otherwise; given Y=-1, X is centered at 0. The feature vector
    is (1, X). delta=0 makes the best linear coefficient exactly zero.
    """

    delta: float
    sd_pos: float = 0.5
    sd_neg: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.delta <= 0.5:
            raise ValidationError(f"delta must be in [0, 1/2], got {self.delta!r}")
        if self.sd_pos <= 0 or self.sd_neg <= 0:
            raise ValidationError("component standard deviations must be positive")

    def sample(self, n: int, rng: RngSeed | int | np.random.Generator) -> ClassDataset:
        if n < 1:
            raise ValidationError("n must be at least 1")
        gen = as_generator(rng)
        y = np.where(gen.random(n) < 0.5, 1.0, -1.0)
        u = gen.random(n)
        z = gen.standard_normal(n)
        mean_pos = np.where(u <= 0.5 - self.delta, -2.0, 2.0)
        x = np.where(y > 0, mean_pos + self.sd_pos * z, self.sd_neg * z)
        return ClassDataset(np.column_stack([np.ones(n), x]), y)

    def _components(self) -> list[tuple[float, float, float, float]]:
        """(class weight * mixture weight, mean, sd, label) per component."""
        return [
            (0.5 * (0.5 - self.delta), -2.0, self.sd_pos, 1.0),
            (0.5 * (0.5 + self.delta), 2.0, self.sd_pos, 1.0),
            (0.5, 0.0, self.sd_neg, -1.0),
        ]


@dataclass(frozen=True)
class LocalSequence:
    """Drifting mixture with tilt c/sqrt(n), clipped to [0, 1/2]."""

    c: float
    sd_pos: float = 0.5
    sd_neg: float = 0.5

    def __post_init__(self) -> None:
        if self.c < 0:
            raise ValidationError(f"drift constant must be nonnegative, got {self.c!r}")
        if self.sd_pos <= 0 or self.sd_neg <= 0:
            raise ValidationError("component standard deviations must be positive")

    def at(self, n: int) -> MixtureModel:
        if n < 1:
            raise ValidationError("n must be at least 1")
        return MixtureModel(min(self.c / math.sqrt(n), 0.5), self.sd_pos, self.sd_neg)

    def sample(self, n: int, rng: RngSeed | int | np.random.Generator) -> ClassDataset:
        return self.at(n).sample(n, rng)


@dataclass(frozen=True)
class AtomModel:
    """Two-atom scalar feature with label noise at each atom.

    X is 0 with probability q and x_pos otherwise. With the intercept
    feature (1, X) and the defaults, the best linear coefficient is
    (0, 0.4), so the rule's boundary carries the full mass of the X=0 atom.
    Setting intercept=False uses the bare scalar feature, whose X=0 rows are
    the zero vector and never score against any coefficient.
    """

    q: float = 0.4
    x_pos: float = 2.0
    p_pos_at_zero: float = 0.5
    p_pos_at_xpos: float = 0.9
    intercept: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.q < 1.0:
            raise ValidationError(f"q must be in (0,1), got {self.q!r}")
        for name in ("p_pos_at_zero", "p_pos_at_xpos"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValidationError(f"{name} must be in (0,1), got {v!r}")
        if self.x_pos == 0.0:
            raise ValidationError("x_pos must be nonzero so the atoms are distinct")

    def _features(self, x: np.ndarray) -> np.ndarray:
        if self.intercept:
            return np.column_stack([np.ones(x.shape[0]), x])
        return x.reshape(-1, 1)

    def sample(self, n: int, rng: RngSeed | int | np.random.Generator) -> ClassDataset:
        if n < 1:
            raise ValidationError("n must be at least 1")
        gen = as_generator(rng)
        at_zero = gen.random(n) < self.q
        x = np.where(at_zero, 0.0, self.x_pos)
        p_pos = np.where(at_zero, self.p_pos_at_zero, self.p_pos_at_xpos)
        y = np.where(gen.random(n) < p_pos, 1.0, -1.0)
        return ClassDataset(self._features(x), y)

    def atoms(self) -> list[tuple[float, np.ndarray, float]]:
        """(mass, feature vector, P(Y=1)) per support point."""
        f0 = np.array([1.0, 0.0]) if self.intercept else np.array([0.0])
        f1 = np.array([1.0, self.x_pos]) if self.intercept else np.array([self.x_pos])
        return [(self.q, f0, self.p_pos_at_zero), (1.0 - self.q, f1, self.p_pos_at_xpos)]


@dataclass(frozen=True)
class DecisionGenModel:
    """Randomized-action outcome model with linear action interaction.

    X ~ N(0, I_p) with p = len(mu) - 1. Main features are x0 = (1, X);
    the rule features are x1 = (1, X_1, ..) of length len(theta). The
    outcome is Y = x0.mu + a * (x1.theta) + noise, with P(A=+1) = pi
    independent of X. The best interaction coefficient equals theta exactly,
    so theta = 0 puts the whole population on the rule's boundary.
    """

    theta: tuple[float, float] = (0.0, 0.0)
    mu: tuple[float, ...] = (1.0, 0.5, 0.0)
    noise_sd: float = 1.0
    pi: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < self.pi < 1.0:
            raise ValidationError(f"pi must be in (0,1), got {self.pi!r}")
        if self.noise_sd <= 0:
            raise ValidationError("noise_sd must be positive")
        if len(self.theta) < 1 or len(self.mu) < 2:
            raise ValidationError("theta needs >= 1 and mu needs >= 2 coefficients")
        if len(self.theta) > len(self.mu):
            raise ValidationError("rule features must be a subset of the main features")

    @property
    def p(self) -> int:
        return len(self.mu) - 1

    @property
    def p1(self) -> int:
        return len(self.theta)

    def sample(
        self,
        n: int,
        rng: RngSeed | int | np.random.Generator,
        *,
        include_pi: bool = True,
    ) -> DecisionDataset:
        if n < 1:
            raise ValidationError("n must be at least 1")
        gen = as_generator(rng)
        x = gen.standard_normal((n, self.p))
        a = np.where(gen.random(n) < self.pi, 1.0, -1.0)
        noise = self.noise_sd * gen.standard_normal(n)
        x0 = np.column_stack([np.ones(n), x])
        x1 = x0[:, : self.p1]
        y = x0 @ np.asarray(self.mu) + a * (x1 @ np.asarray(self.theta)) + noise
        pi_col = np.where(a > 0, self.pi, 1.0 - self.pi) if include_pi else None
        return DecisionDataset(x0, x1, a, y, pi_col)


ClassModel = MixtureModel | LocalSequence | AtomModel


def _mixture_cdf_below(model: MixtureModel, t: float, label: float) -> float:
    """P(X < t | Y = label); X has no atoms so < and <= coincide."""
    total = 0.0
    weight = 0.0
    for w, m, s, y in model._components():
        if y != label:
            continue
        total += w * float(ndtr((t - m) / s))
        weight += w
    return total / weight


def true_misclass(model: ClassModel, beta) -> MisclassProbability:
    """Exact error rate of the linear rule sign(x.beta) under the model.

    Classifying strictly, a point is an error when y * x.beta < 0; the
    randomized figure charges half of the boundary mass P(x.beta = 0) as
    well. For nonzero coefficients on the continuous mixture the two agree.
    """
    beta = np.asarray(beta, dtype=float).ravel()
    if not np.isfinite(beta).all():
        raise ValidationError("beta must be finite")
    if isinstance(model, LocalSequence):
        raise ValidationError("true_misclass needs a fixed model; call .at(n) first")
    if isinstance(model, AtomModel):
        expected = 2 if model.intercept else 1
        if beta.size != expected:
            raise ValidationError(f"beta must have length {expected} for this model")
        strict = 0.0
        boundary = 0.0
        for mass, f, p_pos in model.atoms():
            score = float(f @ beta)
            if score > 0:
                strict += mass * (1.0 - p_pos)
            elif score < 0:
                strict += mass * p_pos
            else:
                boundary += mass
        return MisclassProbability(strict, strict + boundary / 2.0, boundary)

    if beta.size != 2:
        raise ValidationError("beta must have length 2 for this model")
    b0, b1 = float(beta[0]), float(beta[1])
    if b0 == 0.0 and b1 == 0.0:
        return MisclassProbability(0.0, 0.5, 1.0)
    if b1 == 0.0:
        # Constant rule sign(b0): all of one class is wrong.
        return MisclassProbability(0.5, 0.5, 0.0)
    t = -b0 / b1
    below_pos = _mixture_cdf_below(model, t, 1.0)
    below_neg = _mixture_cdf_below(model, t, -1.0)
    if b1 > 0:
        err_pos = below_pos
        err_neg = 1.0 - below_neg
    else:
        err_pos = 1.0 - below_pos
        err_neg = below_neg
    strict = 0.5 * err_pos + 0.5 * err_neg
    return MisclassProbability(strict, strict, 0.0)


def true_smooth_surrogate(model: ClassModel, beta, tau: float = 3.0) -> float:
    """Exact smoothed risk E expit(-tau * y * x.beta) under the model.

    Normal components are integrated with 128-node Gauss-Hermite quadrature,
    exact to machine precision at this smoothness; atom models sum directly.
    """
    beta = np.asarray(beta, dtype=float).ravel()
    if not np.isfinite(beta).all():
        raise ValidationError("beta must be finite")
    if tau <= 0:
        raise ValidationError(f"tau must be positive, got {tau!r}")
    if isinstance(model, LocalSequence):
        raise ValidationError("true_smooth_surrogate needs a fixed model; call .at(n) first")
    if isinstance(model, AtomModel):
        total = 0.0
        for mass, f, p_pos in model.atoms():
            score = float(f @ beta)
            total += mass * (
                p_pos * float(expit(-tau * score)) + (1 - p_pos) * float(expit(tau * score))
            )
        return total
    b0, b1 = float(beta[0]), float(beta[1])
    u, w = _hermgauss()
    total = 0.0
    for weight, m, s, y in model._components():
        x = m + _SQRT2 * s * u
        total += weight * float(w @ expit(-tau * y * (b0 + b1 * x)))
    return total


def population_beta(model: ClassModel) -> np.ndarray:
    """Best linear coefficient: the solution of E[x x^T] b = E[x y]."""
    if isinstance(model, LocalSequence):
        raise ValidationError("population_beta needs a fixed model; call .at(n) first")
    if isinstance(model, AtomModel):
        gram = np.zeros((2, 2)) if model.intercept else np.zeros((1, 1))
        rhs = np.zeros(gram.shape[0])
        for mass, f, p_pos in model.atoms():
            ey = 2.0 * p_pos - 1.0
            gram += mass * np.outer(f, f)
            rhs += mass * ey * f
        return np.linalg.solve(gram, rhs)
    d = model.delta
    ex = 2.0 * d
    ex2 = 0.5 * (4.0 + model.sd_pos**2) + 0.5 * model.sd_neg**2
    exy = 2.0 * d
    gram = np.array([[1.0, ex], [ex, ex2]])
    return np.linalg.solve(gram, np.array([0.0, exy]))


def learning_curve_limit(model: ClassModel, n: int | None = None) -> float:
    """Limit of the expected error of the fitted rule as n grows.

    Equals half the boundary mass of the best coefficient plus its strict
    error rate, i.e. the randomized-tie error at the population coefficient.
    For a drifting model the limit is taken along the sequence, where the
    best coefficient tends to zero.
    """
    if isinstance(model, LocalSequence):
        # Tilt c/sqrt(n) -> 0, so the limiting best coefficient is zero.
        return 0.5
    fixed = model
    beta_star = population_beta(fixed)
    return true_misclass(fixed, beta_star).randomized


def true_value(model: DecisionGenModel, beta1) -> float:
    """Exact mean outcome of the rule a = sign(x1.beta1), sign(0) = +1.

    Closed form for rule features (1, X_1): the action-free mean mu_0 plus
    the tilt the rule extracts from the interaction. Longer rule blocks fall
    back to quadrature over the scalar projection when possible.
    """
    beta1 = np.asarray(beta1, dtype=float).ravel()
    if beta1.size != model.p1:
        raise ValidationError(f"beta1 must have length {model.p1}")
    if not np.isfinite(beta1).all():
        raise ValidationError("beta1 must be finite")
    if model.p1 != 2:
        raise ValidationError("closed form implemented for 2-coefficient rules only")
    base = float(model.mu[0])
    th0, th1 = float(model.theta[0]), float(model.theta[1])
    b0, b1 = float(beta1[0]), float(beta1[1])
    if b1 == 0.0:
        sign = 1.0 if b0 >= 0 else -1.0
        return base + sign * th0
    u = b0 / abs(b1)
    phi = math.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)
    return base + th0 * (1.0 - 2.0 * float(ndtr(-u))) + 2.0 * th1 * math.copysign(1.0, b1) * phi


def true_value_mc(
    model: DecisionGenModel,
    beta1,
    n_draws: int = 1_000_000,
    rng: RngSeed | int | np.random.Generator = 0,
) -> MonteCarloValue:
    """Monte Carlo mean outcome of the rule, with its standard error.

    Draws potential outcomes directly: Y(a) = x0.mu + a x1.theta + noise at
    a = sign(x1.beta1). Useful as a cross-check for models without a closed
    form.
    """
    beta1 = np.asarray(beta1, dtype=float).ravel()
    if beta1.size != model.p1:
        raise ValidationError(f"beta1 must have length {model.p1}")
    if n_draws < 2:
        raise ValidationError("n_draws must be at least 2")
    gen = as_generator(rng)
    vals = np.empty(n_draws)
    done = 0
    while done < n_draws:
        m = min(250_000, n_draws - done)
        x = gen.standard_normal((m, model.p))
        noise = model.noise_sd * gen.standard_normal(m)
        x0 = np.column_stack([np.ones(m), x])
        x1 = x0[:, : model.p1]
        act = np.where(x1 @ beta1 >= 0, 1.0, -1.0)
        vals[done : done + m] = x0 @ np.asarray(model.mu) + act * (x1 @ np.asarray(model.theta)) + noise
        done += m
    value = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n_draws))
    return MonteCarloValue(value, se, n_draws)


def population_beta1(model: DecisionGenModel) -> np.ndarray:
    """Best interaction coefficient of the linear working model.

    The outcome is linear in the stacked regressors (x0, a*x1), so the
    population least-squares solution recovers the generative coefficients
    exactly, for any randomization probability.
    """
    return np.asarray(model.theta, dtype=float).copy()


def model_to_config(model) -> dict:
    """JSON-ready description of a model; inverse of model_from_config."""
    if isinstance(model, MixtureModel):
        return {
            "model": "mixture",
            "delta": model.delta,
            "sds": [model.sd_pos, model.sd_neg],
        }
    if isinstance(model, LocalSequence):
        return {"model": "local", "c": model.c, "sds": [model.sd_pos, model.sd_neg]}
    if isinstance(model, AtomModel):
        return {
            "model": "atom",
            "q": model.q,
            "x_pos": model.x_pos,
            "p_pos_at_zero": model.p_pos_at_zero,
            "p_pos_at_xpos": model.p_pos_at_xpos,
            "intercept": model.intercept,
        }
    if isinstance(model, DecisionGenModel):
        return {
            "model": "decision",
            "theta": list(model.theta),
            "mu": list(model.mu),
            "noise_sd": model.noise_sd,
            "pi": model.pi,
        }
    raise ValidationError(f"unknown model type: {type(model).__name__}")


def model_from_config(config: dict):
    """Build a model from its JSON description."""
    if not isinstance(config, dict) or "model" not in config:
        raise ValidationError("model config must be a mapping with a 'model' key")
    kind = config["model"]
    extra = dict(config)
    extra.pop("model")
    try:
        if kind == "mixture":
            sds = extra.pop("sds", [0.5, 0.5])
            return MixtureModel(delta=float(extra.pop("delta")), sd_pos=float(sds[0]), sd_neg=float(sds[1]), **extra)
        if kind == "local":
            sds = extra.pop("sds", [0.5, 0.5])
            return LocalSequence(c=float(extra.pop("c")), sd_pos=float(sds[0]), sd_neg=float(sds[1]), **extra)
        if kind == "atom":
            if "theta" in extra or "delta" in extra:
                raise TypeError("unexpected keys for atom model")
            return AtomModel(**extra)
        if kind == "decision":
            if "theta" in extra:
                extra["theta"] = tuple(float(v) for v in extra["theta"])
            if "mu" in extra:
                extra["mu"] = tuple(float(v) for v in extra["mu"])
            return DecisionGenModel(**extra)
    except TypeError as exc:
        raise ValidationError(f"bad model config for '{kind}': {exc}") from None
    except KeyError as exc:
        raise ValidationError(f"model config missing key {exc} for '{kind}'") from None
    raise ValidationError(f"unknown model kind: {kind!r}")
