"""
Targets - Product Densities

Target densities pi(x) = prod_i f(x_i) on R^d together with the per-component
quantities the scaling theory needs: score, second score, Fisher information
and marginal CDF. Densities are handled in log space and need not be
normalized for sampling.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Sequence, Union

import numpy as np
from scipy.special import ndtr

from .errors import (
    DimensionMismatchError,
    InvalidParameterError,
    NonFiniteError,
    UnsupportedError,
)

ArrayLike = Union[float, Sequence[float], np.ndarray]

# A chain position: a length-d float vector with finite entries.
StateVector = np.ndarray


class ComponentDensity(ABC):
    """One-dimensional component f of a product target."""

    name = "component"

    @abstractmethod
    def log_density(self, x: ArrayLike) -> np.ndarray:
        """log f(x), elementwise."""

    @abstractmethod
    def score(self, x: ArrayLike) -> np.ndarray:
        """(log f)'(x), elementwise."""

    @abstractmethod
    def second_score(self, x: ArrayLike) -> np.ndarray:
        """(log f)''(x), elementwise."""

    @abstractmethod
    def cdf(self, x: ArrayLike) -> np.ndarray:
        """Marginal CDF F(x), elementwise."""

    @abstractmethod
    def sample(self, stream, size: int) -> np.ndarray:
        """iid draws from f."""

    def fisher_info(self) -> float:
        """Analytic I = E[(log f)'(X)^2]."""
        raise UnsupportedError(f"{self.name} component has no analytic Fisher information")

    def curvature_ratio(self, x: ArrayLike) -> np.ndarray:
        """f''(x)/f(x) = (log f)''(x) + (log f)'(x)^2."""
        s = self.score(x)
        return self.second_score(x) + s * s

    def describe(self) -> Dict[str, object]:
        """Parameters for metadata output."""
        return {"component": self.name}


class GaussianComponent(ComponentDensity):
    """N(0, variance) component."""

    name = "gaussian"

    def __init__(self, variance: float = 1.0):
        """Initialize the component."""
        variance = float(variance)
        if not math.isfinite(variance) or variance <= 0.0:
            raise InvalidParameterError(f"variance must be positive and finite, got {variance}")
        self.variance = variance
        self.sigma = math.sqrt(variance)
        self._log_norm = -0.5 * math.log(2.0 * math.pi * variance)

    def log_density(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self._log_norm - 0.5 * x * x / self.variance

    def score(self, x: ArrayLike) -> np.ndarray:
        return -np.asarray(x, dtype=float) / self.variance

    def second_score(self, x: ArrayLike) -> np.ndarray:
        return np.full_like(np.asarray(x, dtype=float), -1.0 / self.variance)

    def cdf(self, x: ArrayLike) -> np.ndarray:
        return ndtr(np.asarray(x, dtype=float) / self.sigma)

    def sample(self, stream, size: int) -> np.ndarray:
        return stream.std_normal_vec(int(size), self.sigma)

    def fisher_info(self) -> float:
        return 1.0 / self.variance

    def describe(self) -> Dict[str, object]:
        return {"component": self.name, "variance": self.variance}

    def __repr__(self):
        return f"GaussianComponent(variance={self.variance})"


COMPONENTS = {
    GaussianComponent.name: GaussianComponent,
}


@dataclass(frozen=True)
class TargetModel:
    """Product target pi = prod_{i=1}^d f; immutable and shareable."""

    component: ComponentDensity
    d: int

    def __post_init__(self):
        if isinstance(self.d, bool) or not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise InvalidParameterError(f"d must be a positive integer (d >= 1), got {self.d!r}")

    def check_state(self, x: ArrayLike) -> StateVector:
        """Validate a state (or a stack of states along the last axis)."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self.d:
            raise DimensionMismatchError(f"state has shape {x.shape}, target dimension is {self.d}")
        if not np.all(np.isfinite(x)):
            raise NonFiniteError("state has non-finite coordinates")
        return x

    def log_pi(self, x: ArrayLike) -> Union[float, np.ndarray]:
        """Sum of log f over coordinates; rows of a 2-D input are separate states."""
        x = self.check_state(x)
        total = np.sum(self.component.log_density(x), axis=-1)
        return float(total) if x.ndim == 1 else total

    def marginal_cdf(self, x: ArrayLike) -> np.ndarray:
        """Marginal CDF of any one coordinate."""
        return self.component.cdf(x)

    def fisher_info(self) -> float:
        return self.component.fisher_info()

    def describe(self) -> Dict[str, object]:
        return {**self.component.describe(), "d": int(self.d)}


def make_target(component: str = "gaussian", variance: float = 1.0, d: int = 1) -> TargetModel:
    """Build a target from its config description."""
    if component not in COMPONENTS:
        raise UnsupportedError(f"unknown component '{component}' (available: {', '.join(COMPONENTS)})")
    return TargetModel(COMPONENTS[component](variance), d)


def log_pi(model: TargetModel, x: ArrayLike) -> float:
    """log pi(x) = sum_i log f(x_i)."""
    return model.log_pi(x)


def fisher_info(model: TargetModel) -> float:
    """Analytic Fisher information of the component density."""
    return model.fisher_info()
