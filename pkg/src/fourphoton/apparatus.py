"""Value types describing the optical set-up.

Angles are radians everywhere inside the package; the CLI and CSV files
use degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

UNITARITY_TOL = 1e-12


def sinc_squared(x: float) -> float:
    """[sin(x)/x]**2 with the removable singularity at 0 filled in."""
    if x == 0.0:
        return 1.0
    return (math.sin(x) / x) ** 2


@dataclass(frozen=True)
class BeamSplitter:
    """Real amplitude transmittances/reflectances per polarization."""

    t_x: float
    t_y: float
    r_x: float
    r_y: float

    def __post_init__(self) -> None:
        for name in ("t_x", "t_y", "r_x", "r_y"):
            val = getattr(self, name)
            if not (math.isfinite(val) and 0.0 <= val <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {val!r}")
        for q in ("x", "y"):
            t = getattr(self, f"t_{q}")
            r = getattr(self, f"r_{q}")
            if abs(t * t + r * r - 1.0) > UNITARITY_TOL:
                raise ValueError(
                    f"beam splitter is not unitary for polarization {q}: "
                    f"t^2 + r^2 = {t * t + r * r!r}"
                )

    @classmethod
    def from_reflectance(cls, R: float) -> "BeamSplitter":
        """Polarization-independent splitter (near-normal incidence)."""
        if not 0.0 <= R <= 1.0:
            raise ValueError(f"reflectance must lie in [0, 1], got {R!r}")
        t = math.sqrt(1.0 - R)
        r = math.sqrt(R)
        return cls(t, t, r, r)

    @classmethod
    def from_rho(cls, rho: float) -> "BeamSplitter":
        """Splitter with R/T = rho."""
        if not (math.isfinite(rho) and rho >= 0.0):
            raise ValueError(f"rho must be a nonnegative finite number, got {rho!r}")
        return cls.from_reflectance(rho / (1.0 + rho))

    @classmethod
    def symmetric(cls) -> "BeamSplitter":
        return cls.from_reflectance(0.5)

    @classmethod
    def from_polarized(cls, R_x: float, R_y: float) -> "BeamSplitter":
        return cls(math.sqrt(1.0 - R_x), math.sqrt(1.0 - R_y), math.sqrt(R_x), math.sqrt(R_y))

    @property
    def polarization_independent(self) -> bool:
        return abs(self.r_x - self.r_y) <= UNITARITY_TOL

    def _require_pi(self) -> None:
        if not self.polarization_independent:
            raise ValueError("R, T, rho and s are defined for polarization-independent splitters only")

    @property
    def R(self) -> float:
        self._require_pi()
        return self.r_x * self.r_x

    @property
    def T(self) -> float:
        self._require_pi()
        return self.t_x * self.t_x

    @property
    def rho(self) -> float:
        T = self.T
        if T == 0.0:
            raise ValueError("rho is undefined for a fully reflecting splitter")
        return self.R / T

    @property
    def s(self) -> float:
        R, T = self.R, self.T
        return T * T / (R * R + T * T)


@dataclass(frozen=True)
class AnalyzerSettings:
    """Bell analyzer angles (a1, a2 at D1; b1, b2 at D2) and selector angles.

    ``alpha`` orients the polarizer in front of D1', ``beta`` the one in front
    of D2'.  The defaults are the gating configuration 90 deg / 0 deg.
    """

    a1: float
    a2: float
    b1: float
    b2: float
    alpha: float = math.pi / 2
    beta: float = 0.0

    def __post_init__(self) -> None:
        for name in ("a1", "a2", "b1", "b2", "alpha", "beta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"angle {name} must be finite")

    @classmethod
    def from_degrees(
        cls,
        a1: float,
        a2: float,
        b1: float,
        b2: float,
        alpha: float = 90.0,
        beta: float = 0.0,
    ) -> "AnalyzerSettings":
        r = math.radians
        return cls(r(a1), r(a2), r(b1), r(b2), r(alpha), r(beta))

    def canonical(self) -> "AnalyzerSettings":
        """All angles reduced to [0, 2*pi)."""
        tau = 2.0 * math.pi
        return AnalyzerSettings(
            *(getattr(self, n) % tau for n in ("a1", "a2", "b1", "b2", "alpha", "beta"))
        )

    def degrees(self) -> dict[str, float]:
        return {
            n: math.degrees(getattr(self, n))
            for n in ("a1", "a2", "b1", "b2", "alpha", "beta")
        }

    @property
    def bell_angles(self) -> tuple[float, float, float, float]:
        return (self.a1, self.a2, self.b1, self.b2)


@dataclass(frozen=True)
class InterferenceModel:
    """Fringe phase and visibility of the fourth-order interference.

    The combined visibility is ``v_e * sinc^2(pi * dz / L)``.
    """

    phi: float = 0.0
    v_e: float = 1.0
    dz: float = 0.0
    L: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.phi):
            raise ValueError("phi must be finite")
        if not 0.0 <= self.v_e <= 1.0:
            raise ValueError(f"v_e must lie in [0, 1], got {self.v_e!r}")
        if not self.L > 0.0:
            raise ValueError(f"fringe spacing L must be positive, got {self.L!r}")
        if not self.dz >= 0.0:
            raise ValueError(f"pinhole width dz must be nonnegative, got {self.dz!r}")

    @classmethod
    def with_visibility(cls, v: float, phi: float = 0.0) -> "InterferenceModel":
        return cls(phi=phi, v_e=v)

    @property
    def v(self) -> float:
        return self.v_e * sinc_squared(math.pi * self.dz / self.L)


@dataclass(frozen=True)
class DetectorModel:
    """Threshold detector: fires iff at least one incident photon is registered."""

    eta: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"efficiency must lie in [0, 1], got {self.eta!r}")

    def fire_probability(self, n: int) -> float:
        if n <= 0:
            return 0.0
        return 1.0 - (1.0 - self.eta) ** n
