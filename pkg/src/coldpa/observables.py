"""Analysis of propagated states: level populations, momentum peaks,
thermal averaging, and depletion holes in the pair density."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NumericsError
from .grids import MomentumSpectrum, RadialGrid, ensure_same_grid
from .potentials import CoupledSystem
from .spectrum import LevelSet
from .units import convert, kb_hartree


def project_levels(grid: RadialGrid, amp: np.ndarray,
                   levels: LevelSet) -> np.ndarray:
    """Complex coefficients <v | amp> for every level in the set."""
    ensure_same_grid(grid, levels.grid)
    return levels.states.conj().T @ (grid.w * amp)


def level_populations(grid: RadialGrid, amp: np.ndarray,
                      levels: LevelSet) -> np.ndarray:
    return np.abs(project_levels(grid, amp, levels)) ** 2


def bound_fraction(grid: RadialGrid, amp: np.ndarray,
                   levels: LevelSet) -> float:
    """Population captured by the bound subset of a level set."""
    return float(np.sum(level_populations(grid, amp, levels.bound())))


def continuum_fraction(grid: RadialGrid, amp: np.ndarray,
                       levels: LevelSet) -> float:
    """Channel norm not accounted for by the bound levels.

    Needs a level set converged on the same grid; the box discretizes the
    continuum, so "bound" is decided against the channel asymptote.
    """
    total = float(np.sum(np.abs(amp) ** 2 * grid.w))
    return total - bound_fraction(grid, amp, levels)


# ---------------------------------------------------------------------------
# momentum-space peak finding and inversion back to radius

@dataclass(frozen=True)
class MomentumPeak:
    k: float          # a.u., signed
    height: float     # |amp|^2 at the maximum
    index: int


def find_momentum_peaks(spec: MomentumSpectrum, k_min: float = 0.0,
                        floor_sigmas: float = 5.0,
                        max_peaks: int = None) -> list[MomentumPeak]:
    """Interior local maxima of |amp(k)|^2 standing clear of the noise floor.

    The floor is median + floor_sigmas * MAD of the density, which ignores
    the peaks themselves as long as they are sparse. k_min drops the
    near-zero hump of the unmoved part of the wavepacket (set it to 0 to
    keep everything).
    """
    rho = np.abs(spec.amp) ** 2
    med = float(np.median(rho))
    mad = float(np.median(np.abs(rho - med)))
    floor = med + floor_sigmas * mad
    inner = np.arange(1, len(rho) - 1)
    up = rho[inner] > rho[inner - 1]
    down = rho[inner] >= rho[inner + 1]
    ok = up & down & (rho[inner] > floor)
    if k_min > 0.0:
        ok &= np.abs(spec.k[inner]) >= k_min
    idx = inner[ok]
    peaks = [MomentumPeak(float(spec.k[i]), float(rho[i]), int(i))
             for i in idx]
    peaks.sort(key=lambda p: -p.height)
    if max_peaks is not None:
        peaks = peaks[:max_peaks]
    return peaks


def momentum_at_radius(sys: CoupledSystem, r) -> np.ndarray:
    """Free momentum matching the local channel gap: k = sqrt(2 mu (Ve-Vg))."""
    r = np.asarray(r, dtype=float)
    gap = sys.excited.value(r) - sys.ground.value(r)
    if np.any(gap <= 0.0):
        raise DomainError("channel gap is not positive at the given radius")
    return np.sqrt(2.0 * sys.mu * gap)


def radius_from_momentum(sys: CoupledSystem, k: float,
                         check_cm: float = 0.5) -> float:
    """Invert k = sqrt(2 mu (Ve - Vg)) on the outer branch r > r_crossing.

    The gap grows monotonically toward its asymptotic value out there, so
    the root is unique when it exists. The returned radius is verified by
    a forward evaluation to within check_cm (in wavenumber units).
    """
    from .potentials import find_crossing

    e_target = float(k) ** 2 / (2.0 * sys.mu)
    rc = find_crossing(sys)
    r_hi = sys.working_range[1]
    gap = lambda r: (sys.excited.value(r) - sys.ground.value(r)) - e_target
    lo = rc * (1.0 + 1e-6)
    if gap(lo) > 0.0 or gap(r_hi) < 0.0:
        raise DomainError(
            f"momentum {k:.4f} maps outside the outer branch "
            f"({lo:.2f}, {r_hi:.2f})"
        )
    r = brentq(gap, lo, r_hi, xtol=1e-10)
    err_cm = abs(convert(gap(r), "hartree", "cm-1"))
    if err_cm > check_cm:
        raise NumericsError(
            f"radius inversion check failed: residual {err_cm:.3f} exceeds "
            f"{check_cm} in wavenumbers"
        )
    return float(r)


# ---------------------------------------------------------------------------
# thermal averaging of a single boxed-continuum probability

@dataclass(frozen=True)
class ThermalYield:
    p_single: float       # probability out of one box-normalized state
    zp: float             # box-independent: p * kT / (dE/dn)
    z_translational: float
    p_thermal: float      # zp / Z
    n_molecules: float


def thermal_yield(p_single: float, temperature_k: float, de_dn: float,
                  mu: float, volume: float, n_atoms: float,
                  spin_factor: float = 0.75) -> ThermalYield:
    """Scale one stationary-state probability to a thermal pair ensemble.

    de_dn is the local continuum level spacing of the box used for the
    run (hartree per index); it cancels the box dependence of p_single.
    volume is the trap volume in bohr^3. The pair count is N(N-1)/2 ~ N^2/2
    and spin_factor keeps only collision channels that couple to the probe.
    """
    if p_single < 0.0 or temperature_k <= 0.0 or de_dn <= 0.0:
        raise DomainError("thermal chain needs p >= 0, T > 0, dE/dn > 0")
    if volume <= 0.0 or n_atoms <= 0.0:
        raise DomainError("volume and atom number must be positive")
    kt = kb_hartree * temperature_k
    zp = p_single * kt / de_dn
    z = (2.0 * math.pi * mu * kt) ** 1.5 * volume / (2.0 * math.pi) ** 3
    p_thermal = zp / z
    n_mol = 0.5 * n_atoms**2 * p_thermal * spin_factor
    return ThermalYield(p_single, zp, z, p_thermal, n_mol)


# ---------------------------------------------------------------------------
# depletion hole in the radial density

@dataclass(frozen=True)
class HoleReport:
    r_lo: float
    r_hi: float
    r_deepest: float
    depth: float          # 1 - min(rho_final / rho_initial) inside the hole

    @property
    def width(self) -> float:
        return self.r_hi - self.r_lo


def _smooth_density(grid: RadialGrid, amp: np.ndarray,
                    width: float) -> np.ndarray:
    """Gaussian kernel average of |amp|^2, correct on nonuniform grids."""
    rho = np.abs(amp) ** 2
    dr = grid.r[:, None] - grid.r[None, :]
    kern = np.exp(-0.5 * (dr / width) ** 2)
    wk = kern * grid.w[None, :]
    return (wk @ rho) / np.sum(wk, axis=1)


def detect_hole(grid: RadialGrid, amp_before: np.ndarray,
                amp_after: np.ndarray, threshold: float = 0.5,
                smooth_width: float = 2.0,
                support_floor: float = 1e-3) -> HoleReport:
    """Locate the widest contiguous dip where the smoothed density dropped
    below (1 - threshold) of its initial value.

    Oscillatory structure inside the packet is ironed out by a Gaussian
    kernel of smooth_width (bohr) before the ratio is taken; points where
    the initial density is below support_floor of its own maximum carry no
    information and are skipped.
    """
    if not 0.0 < threshold < 1.0:
        raise DomainError("threshold must sit strictly inside (0, 1)")
    rho_i = _smooth_density(grid, amp_before, smooth_width)
    rho_f = _smooth_density(grid, amp_after, smooth_width)
    support = rho_i > support_floor * rho_i.max()
    ratio = np.ones_like(rho_i)
    ratio[support] = rho_f[support] / rho_i[support]
    depleted = support & (ratio < 1.0 - threshold)
    if not np.any(depleted):
        raise DomainError(
            f"no region lost more than {100 * threshold:.0f} percent of "
            "its initial density"
        )
    # widest run of consecutive depleted points
    edges = np.flatnonzero(np.diff(depleted.astype(int)))
    starts = [0] if depleted[0] else []
    starts += [int(e) + 1 for e in edges if depleted[e + 1]]
    stops = [int(e) for e in edges if depleted[e]]
    if depleted[-1]:
        stops.append(len(depleted) - 1)
    spans = list(zip(starts, stops))
    i0, i1 = max(spans, key=lambda s: grid.r[s[1]] - grid.r[s[0]])
    inside = slice(i0, i1 + 1)
    j = i0 + int(np.argmin(ratio[inside]))
    return HoleReport(
        r_lo=float(grid.r[i0]), r_hi=float(grid.r[i1]),
        r_deepest=float(grid.r[j]), depth=float(1.0 - ratio[j]),
    )
