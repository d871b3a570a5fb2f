"""Trap parameters, natural oscillator units and the double-well potential.

Internally everything runs with hbar = m = omega_x = 1. The harmonic term
follows the form m*omega^2*x^2 (no factor 1/2) unless
``conventional_half_factor`` is set, so by default every harmonic direction
behaves like a conventional oscillator of frequency sqrt(2)*omega.
"""
import math
import numbers
from dataclasses import dataclass, replace

import numpy as np
from scipy import constants
from scipy.optimize import brentq

HBAR = constants.hbar
ATOMIC_MASS = constants.atomic_mass


class TrapSpecError(ValueError):
    """Invalid trap parameter; ``field`` names the offending attribute."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def _is_real(value):
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


@dataclass(frozen=True)
class TrapSpec:
    """Physical trap and gas parameters (SI units; ``barrier_strength`` is natural).

    Attributes
    ----------
    mass : float
        Particle mass in kg.
    scattering_length : float
        s-wave scattering length in m.
    omega_x, omega_y, omega_z : float
        Trap angular frequencies in rad/s.
    barrier_width : float
        Gaussian barrier width in m.
    barrier_strength : float
        Barrier strength in units of sqrt(hbar^3 omega_x / m).
    particle_count : int
        Even number of bosons, at least 2.
    conventional_half_factor : bool
        Use (1/2) m omega^2 x^2 for the harmonic part.
    """

    mass: float
    scattering_length: float
    omega_x: float
    omega_y: float
    omega_z: float
    barrier_width: float
    barrier_strength: float = 0.0
    particle_count: int = 100
    conventional_half_factor: bool = False

    def __post_init__(self):
        for name in ("mass", "scattering_length", "omega_x", "omega_y", "omega_z", "barrier_width"):
            value = getattr(self, name)
            if not (_is_real(value) and math.isfinite(value) and value > 0):
                raise TrapSpecError(name, f"must be a finite positive number, got {value!r}")
        alpha = self.barrier_strength
        if not (_is_real(alpha) and math.isfinite(alpha) and alpha >= 0):
            raise TrapSpecError("barrier_strength", f"must be finite and >= 0, got {alpha!r}")
        n = self.particle_count
        if isinstance(n, bool) or not isinstance(n, numbers.Integral) or n < 2 or n % 2:
            raise TrapSpecError("particle_count", f"must be an even integer >= 2, got {n!r}")

    @classmethod
    def from_lab_units(cls, *, mass_amu, scattering_length_nm, omega_x_hz, omega_y_hz, omega_z_hz,
                       delta_um, alpha_natural=0.0, particle_count=100, conventional_half_factor=False):
        """Build from amu, nm, Hz (ordinary frequency) and micrometres."""
        two_pi = 2.0 * math.pi
        return cls(
            mass=mass_amu * ATOMIC_MASS,
            scattering_length=scattering_length_nm * 1e-9,
            omega_x=two_pi * omega_x_hz,
            omega_y=two_pi * omega_y_hz,
            omega_z=two_pi * omega_z_hz,
            barrier_width=delta_um * 1e-6,
            barrier_strength=alpha_natural,
            particle_count=particle_count,
            conventional_half_factor=conventional_half_factor,
        )

    def with_barrier(self, alpha):
        return replace(self, barrier_strength=alpha)

    def with_particle_count(self, n):
        return replace(self, particle_count=n)


@dataclass(frozen=True)
class NaturalScale:
    """Unit scales for hbar = m = omega_x = 1 and the reduced coupling 4*pi*a_sc/a0."""

    length_unit: float
    energy_unit: float
    time_unit: float
    reduced_interaction: float
    harmonic_coefficient: float = 1.0

    @property
    def omega_x(self):
        return 1.0 / self.time_unit

    def length_to_natural(self, meters):
        return meters / self.length_unit

    def length_to_physical(self, value):
        return value * self.length_unit

    def energy_to_natural(self, joules):
        return joules / self.energy_unit

    def energy_to_physical(self, value):
        return value * self.energy_unit

    def time_to_natural(self, seconds):
        return seconds / self.time_unit

    def time_to_physical(self, value):
        return value * self.time_unit

    def frequency_to_natural(self, omega):
        return omega * self.time_unit

    def frequency_to_physical(self, value):
        return value / self.time_unit


def to_natural(spec: TrapSpec) -> NaturalScale:
    a0 = math.sqrt(HBAR / (spec.mass * spec.omega_x))
    return NaturalScale(
        length_unit=a0,
        energy_unit=HBAR * spec.omega_x,
        time_unit=1.0 / spec.omega_x,
        reduced_interaction=4.0 * math.pi * spec.scattering_length / a0,
        harmonic_coefficient=0.5 if spec.conventional_half_factor else 1.0,
    )


@dataclass(frozen=True)
class PotentialProfile:
    """U(x, 0, 0) in natural units: c*x^2 + alpha/(sqrt(2 pi) delta) exp(-x^2 / 2 delta^2)."""

    harmonic_coefficient: float
    barrier_strength: float
    barrier_width: float

    @property
    def barrier_peak(self):
        return self.barrier_strength / (math.sqrt(2.0 * math.pi) * self.barrier_width)

    @property
    def effective_frequency(self):
        """Conventional oscillator frequency of the harmonic part, sqrt(2c)."""
        return math.sqrt(2.0 * self.harmonic_coefficient)

    def harmonic_term(self, x):
        x = np.asarray(x, dtype=float)
        return self.harmonic_coefficient * x * x

    def gaussian_term(self, x):
        x = np.asarray(x, dtype=float)
        return self.barrier_peak * np.exp(-(x * x) / (2.0 * self.barrier_width**2))

    def __call__(self, x):
        return self.harmonic_term(x) + self.gaussian_term(x)

    def growth_radius(self):
        """|x| beyond which U is strictly increasing in |x|."""
        c, d = self.harmonic_coefficient, self.barrier_width
        ratio = self.barrier_peak / (2.0 * c * d * d)
        return d * math.sqrt(2.0 * math.log(ratio)) if ratio > 1.0 else 0.0

    def turning_point(self, energy):
        """Outermost x > 0 with U(x) = energy."""
        r0 = self.growth_radius()
        if self(r0) >= energy:
            raise ValueError(f"energy {energy} lies below the outer potential branch")
        hi = max(r0, 1.0)
        while self(hi) < energy:
            hi *= 2.0
        return brentq(lambda x: float(self(x)) - energy, r0, hi, xtol=1e-14, rtol=1e-14)


def potential_profile(spec: TrapSpec) -> PotentialProfile:
    scale = to_natural(spec)
    return PotentialProfile(
        harmonic_coefficient=scale.harmonic_coefficient,
        barrier_strength=float(spec.barrier_strength),
        barrier_width=scale.length_to_natural(spec.barrier_width),
    )


@dataclass(frozen=True)
class TransverseFactor:
    """Integral of g^4 over one transverse axis (1/length) and its zero-point energy."""

    quartic: float
    zero_point: float


def transverse_quartic_factor(omega_t: float, scale: NaturalScale) -> TransverseFactor:
    """Gaussian ground state along a transverse axis with angular frequency ``omega_t`` (rad/s)."""
    if not omega_t > 0:
        raise TrapSpecError("omega_t", "must be positive")
    w = math.sqrt(2.0 * scale.harmonic_coefficient) * scale.frequency_to_natural(omega_t)
    return TransverseFactor(quartic=math.sqrt(w / (2.0 * math.pi)), zero_point=0.5 * w)


def transverse_factors(spec: TrapSpec, scale: NaturalScale = None):
    """Product of the y and z quartic factors and the summed transverse zero-point energy."""
    scale = scale or to_natural(spec)
    fy = transverse_quartic_factor(spec.omega_y, scale)
    fz = transverse_quartic_factor(spec.omega_z, scale)
    return fy.quartic * fz.quartic, fy.zero_point + fz.zero_point
