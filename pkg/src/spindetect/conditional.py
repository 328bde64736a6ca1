"""Conditional (no-detection) wave packet propagation on a 1D grid.

The no-detection branch of the dynamics is generated by a non-Hermitian
Hamiltonian

    H = p^2 / (2m) + V(x),   V(x) = (hbar/2) * (shift(x) - i * decay(x)),

with decay(x) >= 0, so the norm of the evolving field can only shrink.
The lost norm is the cumulative detection probability and its rate

    w1(t) = integral decay(x) |psi(x, t)|^2 dx = -d/dt ||psi||^2

is the arrival-time density.  Time stepping uses the Cayley form of
Crank-Nicolson,

    (1 + i dt H / 2) psi_{n+1} = (1 - i dt H / 2) psi_n,

with the kinetic term discretized by the standard 3-point Laplacian.  For
Im V <= 0 the scheme is contractive at any dt: with B = dt (H_h + H_a)/2
split into Hermitian and anti-Hermitian discrete parts, the step map is
(1 + iB)^{-1} (1 - iB) and ||(1 - iB)y||^2 - ||(1 + iB)y||^2 =
4 Im<y|B y> <= 0.  Equality holds exactly when the field does not overlap
the decay profile.

The same stepper, on an interleaved two-channel grid, propagates the
fluorescence analog

    H = p^2/(2m) x 1 + (hbar/2) [[0, Omega(x)], [Omega(x), -2*detuning - i*linewidth]],

whose strong-damping limit collapses to the single-channel complex
potential returned by one_channel_limit_potential.

All public inputs and outputs are SI; internally fields and operators are
rescaled to detector units (see units.UnitSystem) before factoring the
step matrices.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lapack
from scipy.sparse.linalg import splu

from .errors import ConfigurationError, NumericsError
from .model import Grid1D, Sensitivity
from .units import HBAR, UnitSystem

__all__ = [
    "ComplexPotential",
    "ConditionalTrajectory",
    "TwoChannelTrajectory",
    "CrankNicolson1D",
    "build_conditional_potential",
    "propagate_conditional",
    "detection_density",
    "propagate_two_channel",
    "one_channel_limit_potential",
    "adiabaticity_ratio",
]

# Fraction of total mass tolerated near the grid edges before the run is
# flagged as contaminated by boundary reflections.
EDGE_MASS_WARN = 1e-6
EDGE_CELLS = 5


@dataclass(frozen=True)
class ComplexPotential:
    """Complex detector potential sampled on a grid.

    values[j] = (hbar/2) * (shift_profile[j] - 1j * decay_profile[j]) in
    joules; decay_profile (1/s) is kept separately because the detection
    density needs it without the factor hbar/2.
    """

    grid: Grid1D
    values: np.ndarray
    decay_profile: np.ndarray
    shift_profile: np.ndarray
    region: tuple[float, float]

    def __post_init__(self):
        n = self.grid.n_points
        for name in ("values", "decay_profile", "shift_profile"):
            arr = getattr(self, name)
            if arr.shape != (n,):
                raise ConfigurationError(f"{name} must have shape ({n},)")
        if not np.all(np.isfinite(self.decay_profile)):
            raise ConfigurationError("decay profile must be finite")
        if np.any(self.decay_profile < 0.0):
            raise ConfigurationError("decay profile must be nonnegative")
        if np.any(self.values.imag > 1e-300):
            raise ConfigurationError("Im V must be <= 0 everywhere")

    @property
    def max_magnitude(self) -> float:
        return float(np.max(np.abs(self.values)))


def build_conditional_potential(decay_rate, level_shift, sensitivity: Sensitivity,
                                grid: Grid1D, *, include_shift: bool = True) -> ComplexPotential:
    """Assemble V(x) = (hbar/2)(shift - i decay) * chi(x)^2 on the grid.

    decay_rate and level_shift are scalars (1/s) multiplying the squared
    sensitivity profile, or arrays already sampled on the grid (a rate map
    evaluated along the axis).  A negative scalar decay rate, or any
    negative entry of an array one, is rejected: gain is outside the model.
    """
    x = grid.points()
    chi2 = np.asarray(sensitivity(x), dtype=float) ** 2
    decay = np.asarray(decay_rate, dtype=float)
    shift = np.asarray(level_shift, dtype=float)
    if decay.ndim == 0:
        if decay < 0.0:
            raise ConfigurationError("decay rate must be nonnegative")
        decay = float(decay) * chi2
    elif decay.shape == (grid.n_points,):
        if np.any(decay < 0.0):
            raise ConfigurationError("decay rate profile must be nonnegative")
        decay = decay.copy()
    else:
        raise ConfigurationError("decay rate must be scalar or one value per grid point")
    if shift.ndim == 0:
        shift = float(shift) * chi2
    elif shift.shape != (grid.n_points,):
        raise ConfigurationError("level shift must be scalar or one value per grid point")
    else:
        shift = shift.copy()
    if not include_shift:
        shift = np.zeros_like(shift)
    values = 0.5 * HBAR * (shift - 1j * decay)
    lo, hi = sensitivity.support
    return ComplexPotential(grid=grid, values=values, decay_profile=decay,
                            shift_profile=shift, region=(float(lo), float(hi)))


class CrankNicolson1D:
    """Prefactored Crank-Nicolson step for one field on a uniform grid.

    Works in dimensionless detector units: the caller supplies the
    potential as V / (hbar * omega_ref) and the time step as dt * omega_ref;
    the grid spacing must already be in units of the associated length.
    The factored forward matrix is tridiagonal, solved by LAPACK zgttrs.
    """

    def __init__(self, n_points: int, spacing: float, potential: np.ndarray, dt: float):
        h2 = spacing * spacing
        # H psi = -(psi'' )/2 + V psi with the 3-point Laplacian
        diag = 1.0 / h2 + potential.astype(complex)
        off = -0.5 / h2
        z = 0.5j * dt
        self._bp_diag = 1.0 + z * diag
        self._bp_off = z * off
        self._bm_diag = 1.0 - z * diag
        self._bm_off = -z * off
        n = n_points
        dl = np.full(n - 1, self._bp_off, dtype=complex)
        du = dl.copy()
        dlf, df, duf, du2, ipiv, info = lapack.zgttrf(dl, self._bp_diag.copy(), du)
        if info != 0:
            raise NumericsError(f"step matrix factorization failed (info={info})")
        self._factors = (dlf, df, duf, du2, ipiv)

    def apply_explicit(self, psi: np.ndarray) -> np.ndarray:
        out = self._bm_diag * psi
        out[:-1] += self._bm_off * psi[1:]
        out[1:] += self._bm_off * psi[:-1]
        return out

    def step(self, psi: np.ndarray) -> np.ndarray:
        rhs = self.apply_explicit(psi)
        dlf, df, duf, du2, ipiv = self._factors
        out, info = lapack.zgttrs(dlf, df, duf, du2, ipiv, rhs)
        if info != 0:
            raise NumericsError(f"tridiagonal solve failed (info={info})")
        return out


@dataclass
class ConditionalTrajectory:
    """Record of one conditional run: survival series, detection density,
    sparse field snapshots, and the final mass ledger.

    Sampling is staggered: no_detection_prob lives on the step boundaries
    (`times`) while detection_density lives on the step midpoints
    (`detection_density_times`), where the scheme satisfies
    [P0(n) - P0(n+1)]/dt = w1(midpoint) exactly.  Sampling the density at
    the nodes instead would bias it against the P0 drain by the factor
    1 + (E dt)^2/4 from the fast kinetic phase.
    """

    grid: Grid1D
    times: np.ndarray
    no_detection_prob: np.ndarray
    detection_density_times: np.ndarray
    detection_density: np.ndarray
    snapshot_times: np.ndarray
    snapshots: np.ndarray
    final_field: np.ndarray
    region: tuple[float, float]
    mass_split: dict[str, float]
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        p0 = self.no_detection_prob
        if np.any(p0 < -1e-12) or np.any(p0 > 1.0 + 1e-8):
            raise NumericsError("survival probability left [0, 1]")
        if np.any(np.diff(p0) > 1e-10):
            raise NumericsError("survival probability increased between steps")
        total = sum(self.mass_split.values())
        if abs(total - 1.0) > 1e-6:
            raise NumericsError(f"mass ledger sums to {total!r}, not 1")

    @property
    def final_survival(self) -> float:
        return float(self.no_detection_prob[-1])

    def to_csv(self, path) -> None:
        """Rows on the midpoint grid; P0 is averaged onto it."""
        from .output import write_csv
        p0_mid = 0.5 * (self.no_detection_prob[:-1] + self.no_detection_prob[1:])
        write_csv(path, ["t_s", "no_detection_prob", "detection_density_per_s"],
                  [self.detection_density_times, p0_mid, self.detection_density])

    def snapshots_to_csv(self, path) -> None:
        from .output import write_csv
        x = self.grid.points()
        header = ["x_m"]
        cols = [x]
        for i, t in enumerate(self.snapshot_times):
            header += [f"re_psi_t{i}", f"im_psi_t{i}"]
            cols += [self.snapshots[i].real, self.snapshots[i].imag]
        write_csv(path, header, cols)


def _edge_mass(prob_density: np.ndarray, spacing: float) -> float:
    return float((prob_density[:EDGE_CELLS].sum() + prob_density[-EDGE_CELLS:].sum()) * spacing)


def _mass_split(psi: np.ndarray, grid: Grid1D, region: tuple[float, float],
                detected: float) -> dict[str, float]:
    x = grid.points()
    dens = np.abs(psi) ** 2
    lo, hi = region
    left = x < lo
    right = x > hi
    inside = ~(left | right)
    # plain-sum weights: the three pieces then total exactly the recorded norm
    h = grid.spacing
    return {
        "reflected": float(np.sum(dens[left]) * h),
        "transmitted_undetected": float(np.sum(dens[right]) * h),
        "residual_in_region": float(np.sum(dens[inside]) * h),
        "detected": detected,
    }


def propagate_conditional(psi0: np.ndarray, potential: ComplexPotential,
                          t_span: tuple[float, float], dt: float, *, mass: float,
                          reference_frequency: float | None = None,
                          snapshots: int = 512, kinetic_safety: float = 64.0
                          ) -> ConditionalTrajectory:
    """Propagate psi0 (SI, units m^-1/2) under p^2/2m + V from t_span[0] to
    t_span[1] in uniform steps dt, recording the survival probability at
    every step boundary and the detection density at every step midpoint.

    Preconditions enforced as configuration errors: dt must resolve the
    potential phase (dt |V|_max / hbar < 0.1) and must not exceed
    kinetic_safety * (2 m dx^2 / hbar) * pi, a blunt guard against grossly
    unresolved kinetic phases.  Mass accumulating within EDGE_CELLS of
    either grid end above 1e-6 is reported as a warning on the trajectory,
    not an error.
    """
    grid = potential.grid
    if psi0.shape != (grid.n_points,):
        raise ConfigurationError("initial field shape does not match the grid")
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ConfigurationError("t_span must be increasing")
    if dt <= 0.0:
        raise ConfigurationError("dt must be positive")
    if mass <= 0.0:
        raise ConfigurationError("mass must be positive")
    vmax = potential.max_magnitude
    if vmax > 0.0 and dt * vmax / HBAR >= 0.1:
        raise ConfigurationError(
            f"dt*|V|max/hbar = {dt * vmax / HBAR:.3g} >= 0.1: reduce dt")
    kinetic_scale = 2.0 * mass * grid.spacing ** 2 / HBAR * np.pi
    if dt >= kinetic_safety * kinetic_scale:
        raise ConfigurationError(
            f"dt = {dt:.3g} s exceeds {kinetic_safety:g} x the grid kinetic time "
            f"{kinetic_scale:.3g} s; reduce dt or relax kinetic_safety")

    if reference_frequency is None:
        # grid-scale frequency: makes the internal spacing exactly 1
        reference_frequency = HBAR / (mass * grid.spacing ** 2)
    units = UnitSystem(reference_frequency=reference_frequency, mass=mass)
    h_int = grid.spacing / units.length_unit
    dt_int = dt * reference_frequency
    v_int = potential.values / (HBAR * reference_frequency)

    n_steps = int(round((t1 - t0) / dt))
    if abs(t0 + n_steps * dt - t1) > 1e-9 * max(abs(t1), dt):
        raise ConfigurationError("t_span length must be an integer number of dt steps")
    if n_steps < 1:
        raise ConfigurationError("t_span shorter than one step")

    stepper = CrankNicolson1D(grid.n_points, h_int, v_int, dt_int)
    # internal field: psi_int = psi_SI * sqrt(L0) keeps ||.||^2 dimensionless
    scale = np.sqrt(units.length_unit)
    psi = psi0.astype(complex) * scale

    times = t0 + dt * np.arange(n_steps + 1)
    p0 = np.empty(n_steps + 1)
    w1 = np.empty(n_steps)
    # plain l2 sums: the Cayley step contracts this norm, so P0 is monotone
    # to roundoff, and the midpoint-state density balances its drain exactly
    decay_w = potential.decay_profile * h_int
    p0[0] = np.sum(np.abs(psi) ** 2) * h_int

    n_snap = max(2, min(snapshots, n_steps + 1))
    snap_idx = np.unique(np.round(np.linspace(0, n_steps, n_snap)).astype(int))
    snaps = np.empty((snap_idx.size, grid.n_points), dtype=complex)
    snap_pos = 0
    if snap_idx[0] == 0:
        snaps[0] = psi / scale
        snap_pos = 1
    edge_max = 0.0
    for n in range(1, n_steps + 1):
        psi_next = stepper.step(psi)
        mid = 0.5 * (psi + psi_next)
        w1[n - 1] = np.sum(decay_w * np.abs(mid) ** 2)
        psi = psi_next
        p0[n] = np.sum(np.abs(psi) ** 2) * h_int
        if snap_pos < snap_idx.size and n == snap_idx[snap_pos]:
            snaps[snap_pos] = psi / scale
            snap_pos += 1
        if n % 32 == 0 or n == n_steps:
            edge_max = max(edge_max, _edge_mass(np.abs(psi) ** 2, h_int))

    warn_list = []
    norm0 = float(p0[0])
    if norm0 <= 0.0:
        raise ConfigurationError("initial field has zero norm")
    if abs(norm0 - 1.0) > 1e-6:
        warn_list.append(f"initial norm {norm0!r} differs from 1; mass ledger is renormalized")
    if edge_max > EDGE_MASS_WARN:
        msg = (f"edge mass reached {edge_max:.3e} (> {EDGE_MASS_WARN:g}); "
               "boundary reflections may contaminate the run")
        warn_list.append(msg)
        warnings.warn(msg, stacklevel=2)

    psi_si = psi / scale
    detected = float(p0[0] - p0[-1])
    split = _mass_split(psi_si, grid, potential.region, detected)
    # the ledger is stated as a fraction of the launched norm
    split = {k: v / norm0 for k, v in split.items()}
    return ConditionalTrajectory(
        grid=grid, times=times, no_detection_prob=p0,
        detection_density_times=times[:-1] + 0.5 * dt, detection_density=w1,
        snapshot_times=times[snap_idx], snapshots=snaps, final_field=psi_si,
        region=potential.region, mass_split=split, warnings=warn_list)


def detection_density(trajectory: ConditionalTrajectory, *,
                      check_tolerance: float = 1e-3) -> np.ndarray:
    """Return the recorded detection density series after checking it against
    the survival-probability drain: each midpoint sample must match the
    per-step difference quotient -[P0(n+1) - P0(n)]/dt to within
    check_tolerance times the peak density.  The density is computed from
    the spatial decay-weighted integral and P0 from the field norm, so the
    agreement is the discrete continuity statement, not a tautology.
    """
    w1 = trajectory.detection_density
    peak = float(np.max(w1))
    if peak <= 0.0:
        return w1
    dt = float(trajectory.times[1] - trajectory.times[0])
    drain = -np.diff(trajectory.no_detection_prob) / dt
    resid = float(np.max(np.abs(w1 - drain)))
    if resid > check_tolerance * peak:
        raise NumericsError(
            f"detection density disagrees with -dP0/dt: residual {resid:.3e} "
            f"exceeds {check_tolerance:g} x peak {peak:.3e}")
    return w1


# ---------------------------------------------------------------------------
# two-channel fluorescence analog


@dataclass
class TwoChannelTrajectory:
    """Conditional run of the driven two-level system: ground and excited
    channel fields, combined survival probability, and the photon-emission
    density w1 = linewidth * ||excited||^2, sampled at step midpoints like
    ConditionalTrajectory.detection_density."""

    grid: Grid1D
    times: np.ndarray
    survival_prob: np.ndarray
    excited_mass: np.ndarray
    detection_density_times: np.ndarray
    detection_density: np.ndarray
    snapshot_times: np.ndarray
    ground_snapshots: np.ndarray
    excited_snapshots: np.ndarray
    final_ground: np.ndarray
    final_excited: np.ndarray
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        if np.any(np.diff(self.survival_prob) > 1e-10):
            raise NumericsError("combined norm increased between steps")

    def to_csv(self, path) -> None:
        from .output import write_csv
        p0_mid = 0.5 * (self.survival_prob[:-1] + self.survival_prob[1:])
        exc_mid = 0.5 * (self.excited_mass[:-1] + self.excited_mass[1:])
        write_csv(path, ["t_s", "no_detection_prob", "excited_mass",
                         "detection_density_per_s"],
                  [self.detection_density_times, p0_mid, exc_mid,
                   self.detection_density])


def _two_channel_matrix(n: int, h_int: float, rabi_int: np.ndarray,
                        excited_diag_int: complex) -> sp.csc_matrix:
    """Interleaved (ground, excited) Hamiltonian in internal units; returns
    a pentadiagonal sparse matrix of size 2n."""
    kin_diag = 1.0 / h_int ** 2
    kin_off = -0.5 / h_int ** 2
    m = 2 * n
    diag = np.empty(m, dtype=complex)
    diag[0::2] = kin_diag
    diag[1::2] = kin_diag + excited_diag_int
    off1 = np.zeros(m - 1, dtype=complex)
    off1[0::2] = 0.5 * rabi_int          # couples site j ground <-> excited
    off2 = np.full(m - 2, kin_off, dtype=complex)
    return sp.diags([off2, off1, diag, off1, off2], [-2, -1, 0, 1, 2],
                    format="csc")


def propagate_two_channel(ground0: np.ndarray, excited0: np.ndarray,
                          rabi_profile: np.ndarray, detuning: float, linewidth: float,
                          grid: Grid1D, t_span: tuple[float, float], dt: float, *,
                          mass: float, reference_frequency: float | None = None,
                          snapshots: int = 128) -> TwoChannelTrajectory:
    """Propagate the coupled ground/excited fields of the fluorescence model.

    The conditional generator is kinetic energy on both channels plus the
    block (hbar/2) [[0, Omega(x)], [Omega(x), -2*detuning - i*linewidth]];
    spontaneous emission drains the excited channel at rate linewidth, and
    the emission density is w1 = linewidth * ||excited||^2, balancing the
    combined norm loss.
    """
    n = grid.n_points
    if ground0.shape != (n,) or excited0.shape != (n,):
        raise ConfigurationError("channel fields must match the grid")
    rabi = np.asarray(rabi_profile, dtype=float)
    if rabi.shape != (n,):
        raise ConfigurationError("Rabi profile must have one value per grid point")
    if np.any(rabi < 0.0):
        raise ConfigurationError("Rabi profile must be nonnegative")
    if linewidth < 0.0:
        raise ConfigurationError("linewidth must be nonnegative")
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ConfigurationError("t_span must be increasing")
    scales = [np.max(rabi) / 2.0, abs(detuning), linewidth / 2.0]
    if reference_frequency is None:
        reference_frequency = max([s for s in scales if s > 0.0]
                                  + [HBAR / (mass * grid.spacing ** 2)])
    vmax = HBAR * max(np.max(rabi) / 2.0, 0.5 * abs(-2.0 * detuning - 1j * linewidth))
    if vmax > 0.0 and dt * vmax / HBAR >= 0.1:
        raise ConfigurationError(
            f"dt*|V|max/hbar = {dt * vmax / HBAR:.3g} >= 0.1: reduce dt")

    units = UnitSystem(reference_frequency=reference_frequency, mass=mass)
    h_int = grid.spacing / units.length_unit
    dt_int = dt * reference_frequency
    rabi_int = rabi / reference_frequency
    exdiag_int = 0.5 * (-2.0 * detuning - 1j * linewidth) / reference_frequency

    ham = _two_channel_matrix(n, h_int, rabi_int, exdiag_int)
    z = 0.5j * dt_int
    ident = sp.identity(2 * n, dtype=complex, format="csc")
    forward = (ident + z * ham).tocsc()
    backward = (ident - z * ham).tocsr()
    solver = splu(forward)

    scale = np.sqrt(units.length_unit)
    y = np.empty(2 * n, dtype=complex)
    y[0::2] = ground0 * scale
    y[1::2] = excited0 * scale

    n_steps = int(round((t1 - t0) / dt))
    if n_steps < 1:
        raise ConfigurationError("t_span shorter than one step")
    times = t0 + dt * np.arange(n_steps + 1)
    surv = np.empty(n_steps + 1)
    exc = np.empty(n_steps + 1)
    w1 = np.empty(n_steps)

    def record(i, y):
        # plain l2 sums; see propagate_conditional
        exc[i] = np.sum(np.abs(y[1::2]) ** 2) * h_int
        surv[i] = np.sum(np.abs(y[0::2]) ** 2) * h_int + exc[i]

    record(0, y)
    n_snap = max(2, min(snapshots, n_steps + 1))
    snap_idx = np.unique(np.round(np.linspace(0, n_steps, n_snap)).astype(int))
    gsnaps = np.empty((snap_idx.size, n), dtype=complex)
    esnaps = np.empty((snap_idx.size, n), dtype=complex)
    snap_pos = 0
    if snap_idx[0] == 0:
        gsnaps[0] = y[0::2] / scale
        esnaps[0] = y[1::2] / scale
        snap_pos = 1
    edge_max = 0.0
    for step in range(1, n_steps + 1):
        rhs = backward @ y
        y_next = solver.solve(rhs)
        mid_e = 0.5 * (y[1::2] + y_next[1::2])
        w1[step - 1] = linewidth * np.sum(np.abs(mid_e) ** 2) * h_int
        y = y_next
        record(step, y)
        if snap_pos < snap_idx.size and step == snap_idx[snap_pos]:
            gsnaps[snap_pos] = y[0::2] / scale
            esnaps[snap_pos] = y[1::2] / scale
            snap_pos += 1
        if step % 32 == 0 or step == n_steps:
            dens = np.abs(y[0::2]) ** 2 + np.abs(y[1::2]) ** 2
            edge_max = max(edge_max, _edge_mass(dens, h_int))

    warn_list = []
    if edge_max > EDGE_MASS_WARN:
        msg = (f"edge mass reached {edge_max:.3e} (> {EDGE_MASS_WARN:g}); "
               "boundary reflections may contaminate the run")
        warn_list.append(msg)
        warnings.warn(msg, stacklevel=2)
    return TwoChannelTrajectory(
        grid=grid, times=times, survival_prob=surv, excited_mass=exc,
        detection_density_times=times[:-1] + 0.5 * dt, detection_density=w1,
        snapshot_times=times[snap_idx],
        ground_snapshots=gsnaps, excited_snapshots=esnaps,
        final_ground=y[0::2] / scale, final_excited=y[1::2] / scale,
        warnings=warn_list)


def one_channel_limit_potential(rabi_profile: np.ndarray, detuning: float,
                                linewidth: float, grid: Grid1D,
                                region: tuple[float, float] | None = None) -> ComplexPotential:
    """Adiabatically eliminated excited channel: the ground field then moves in

        V(x) = (hbar * detuning * Omega(x)^2 - i hbar * linewidth * Omega(x)^2 / 2)
               / (4 detuning^2 + linewidth^2).

    Requires (detuning, linewidth) != (0, 0).  At detuning = 0 the result is
    the purely absorbing -i hbar Omega^2 / (2 linewidth); at linewidth = 0 it
    is the real light shift hbar Omega^2 / (4 detuning).
    """
    denom = 4.0 * detuning ** 2 + linewidth ** 2
    if denom == 0.0:
        raise ConfigurationError("detuning and linewidth cannot both vanish")
    rabi = np.asarray(rabi_profile, dtype=float)
    if rabi.shape != (grid.n_points,):
        raise ConfigurationError("Rabi profile must have one value per grid point")
    if np.any(rabi < 0.0):
        raise ConfigurationError("Rabi profile must be nonnegative")
    om2 = rabi ** 2
    decay = linewidth * om2 / denom
    shift = 2.0 * detuning * om2 / denom
    values = 0.5 * HBAR * (shift - 1j * decay)
    if region is None:
        lit = np.nonzero(rabi > 0.0)[0]
        if lit.size:
            x = grid.points()
            region = (float(x[lit[0]]), float(x[lit[-1]]))
        else:
            region = (grid.x_max, grid.x_max)
    return ComplexPotential(grid=grid, values=values, decay_profile=decay,
                            shift_profile=shift, region=region)


def adiabaticity_ratio(rabi_max: float, detuning: float, linewidth: float,
                       kinetic_energy: float) -> float:
    """Ratio of the excited-channel energy scale hbar|2*detuning + i*linewidth|/2
    to the larger of the coupling hbar*Omega/2 and the kinetic energy.  The
    one-channel reduction is trustworthy when this is large (>= 20)."""
    gap = 0.5 * HBAR * abs(2.0 * detuning + 1j * linewidth)
    drive = max(0.5 * HBAR * rabi_max, kinetic_energy)
    if drive <= 0.0:
        return np.inf
    return gap / drive
