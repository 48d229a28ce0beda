"""Discrete torus geometry, spectral transforms, and Fourier-multiplier operators.

Everything lives on the torus [0, 2pi)^d sampled at N points per axis.  The
Fourier convention is

    u_hat(k) = (2pi)^{-d} integral u(x) exp(-i k.x) dx,

discretized by the trapezoid rule, i.e. ``u_hat = rfftn(u) / N**d``.  Real
fields are stored in the half-spectrum (rfft) layout; Hermitian symmetry is
implicit along the last axis and bookkept with per-mode weights wherever a
sum over the full integer lattice is needed.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field as dataclass_field
from functools import cached_property

import numpy as np
import scipy.fft as _fft
from scipy.special import j0 as _bessel_j0

from .errors import GridMismatch, UnresolvableScale

_TWO_PI = 2.0 * np.pi


def _workers(dim):
    # multi-threaded FFT only pays off for multi-axis transforms
    return -1 if dim >= 2 else 1


class TorusGrid:
    """Uniform grid on the d-torus of side 2pi, N points per axis (N even)."""

    def __init__(self, dim: int, points_per_axis: int):
        if dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
        n = int(points_per_axis)
        if n < 8 or n % 2 != 0:
            raise ValueError(f"points_per_axis must be even and >= 8, got {points_per_axis}")
        self.dim = dim
        self.n = n
        self.side_length = _TWO_PI
        self.spacing = _TWO_PI / n
        self.shape = (n,) * dim
        self.spec_shape = (n,) * (dim - 1) + (n // 2 + 1,)
        self._lock = threading.Lock()
        self._sobolev_cache: dict[float, np.ndarray] = {}

    def __eq__(self, other):
        return isinstance(other, TorusGrid) and (self.dim, self.n) == (other.dim, other.n)

    def __hash__(self):
        return hash((self.dim, self.n))

    def __repr__(self):
        return f"TorusGrid(dim={self.dim}, n={self.n})"

    # -- frequency bookkeeping -------------------------------------------------

    @cached_property
    def axis_frequencies(self):
        """Integer frequencies per axis, rfft layout on the last axis."""
        full = np.fft.fftfreq(self.n, d=1.0 / self.n)
        half = np.arange(self.n // 2 + 1, dtype=float)
        return [full] * (self.dim - 1) + [half]

    @cached_property
    def k_squared(self):
        ks = self.axis_frequencies
        out = np.zeros(self.spec_shape)
        for axis, k in enumerate(ks):
            shape = [1] * self.dim
            shape[axis] = len(k)
            out = out + (k ** 2).reshape(shape)
        return out

    @cached_property
    def omega(self):
        """|k| on the half-spectrum: the dispersion of each wave mode."""
        return np.sqrt(self.k_squared)

    @cached_property
    def mode_weights(self):
        """Multiplicity of each stored mode in the full-lattice sum (1 or 2)."""
        w = np.full(self.spec_shape, 2.0)
        w[..., 0] = 1.0
        w[..., -1] = 1.0
        return w

    def sobolev_weights(self, s: float):
        """mode_weights * (1 + |k|^2)^s, cached per regularity index."""
        s = float(s)
        with self._lock:
            table = self._sobolev_cache.get(s)
            if table is None:
                table = self.mode_weights * (1.0 + self.k_squared) ** s
                self._sobolev_cache[s] = table
        return table

    # -- physical-space geometry -----------------------------------------------

    @cached_property
    def axes(self):
        x = np.arange(self.n) * self.spacing
        return [x] * self.dim

    def coordinates(self):
        """Sparse meshgrid of physical node coordinates."""
        return np.meshgrid(*self.axes, indexing="ij", sparse=True)

    def periodic_distance(self, center):
        """Field of distances to `center`, shortest way around the torus."""
        center = np.atleast_1d(np.asarray(center, dtype=float))
        if center.shape != (self.dim,):
            raise ValueError(f"center must have {self.dim} components")
        coords = self.coordinates()
        r2 = np.zeros(self.shape)
        for axis in range(self.dim):
            d = np.mod(coords[axis] - center[axis] + np.pi, _TWO_PI) - np.pi
            r2 = r2 + d * d
        return np.sqrt(r2)

    def cells_in_ball(self, radius: float) -> float:
        """Grid cells covered by a ball of the given radius (volume count)."""
        unit_ball = {1: 2.0, 2: np.pi, 3: 4.0 * np.pi / 3.0}[self.dim]
        return unit_ball * radius ** self.dim / self.spacing ** self.dim

    def cell_volume(self):
        return self.spacing ** self.dim

    # -- transforms --------------------------------------------------------------

    def forward(self, physical):
        return _fft.rfftn(physical, workers=_workers(self.dim)) / self.n ** self.dim

    def backward(self, spectral):
        return _fft.irfftn(spectral * self.n ** self.dim, s=self.shape,
                           workers=_workers(self.dim))


class SpectralField:
    """Real field on a TorusGrid, carrying physical samples and/or coefficients.

    Either representation is computed lazily from the other and cached.
    Fields are immutable by convention: do not write into the arrays.
    """

    __slots__ = ("grid", "_physical", "_spectral")

    def __init__(self, grid: TorusGrid, physical=None, spectral=None):
        if physical is None and spectral is None:
            raise ValueError("need physical samples or spectral coefficients")
        self.grid = grid
        self._physical = physical
        self._spectral = spectral

    @classmethod
    def from_physical(cls, grid, values):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError(f"expected shape {grid.shape}, got {values.shape}")
        return cls(grid, physical=values)

    @classmethod
    def from_spectral(cls, grid, coefficients):
        coefficients = np.asarray(coefficients, dtype=complex)
        if coefficients.shape != grid.spec_shape:
            raise ValueError(f"expected shape {grid.spec_shape}, got {coefficients.shape}")
        return cls(grid, spectral=coefficients)

    @classmethod
    def zero(cls, grid):
        return cls(grid, physical=np.zeros(grid.shape))

    @property
    def physical(self):
        if self._physical is None:
            self._physical = self.grid.backward(self._spectral)
        return self._physical

    @property
    def spectral(self):
        if self._spectral is None:
            self._spectral = self.grid.forward(self._physical)
        return self._spectral

    def coefficient(self, k):
        """Coefficient at integer lattice frequency k (tuple of length dim)."""
        k = tuple(int(c) for c in np.atleast_1d(k))
        if len(k) != self.grid.dim:
            raise ValueError(f"frequency must have {self.grid.dim} components")
        n = self.grid.n
        if any(abs(c) > n // 2 for c in k):
            raise ValueError(f"frequency {k} outside the resolved lattice")
        last = k[-1]
        if last >= 0:
            idx = tuple(c % n for c in k[:-1]) + (last,)
            return complex(self.spectral[idx])
        # negative last frequency: Hermitian partner of the mirrored mode
        idx = tuple((-c) % n for c in k[:-1]) + (-last,)
        return complex(np.conj(self.spectral[idx]))

    def l_inf(self):
        return float(np.max(np.abs(self.physical)))

    def _check_grid(self, other):
        if self.grid != other.grid:
            raise GridMismatch(f"{self.grid} vs {other.grid}")

    def __add__(self, other):
        self._check_grid(other)
        if self._spectral is not None and other._spectral is not None:
            return SpectralField(self.grid, spectral=self._spectral + other._spectral)
        return SpectralField(self.grid, physical=self.physical + other.physical)

    def __sub__(self, other):
        self._check_grid(other)
        if self._spectral is not None and other._spectral is not None:
            return SpectralField(self.grid, spectral=self._spectral - other._spectral)
        return SpectralField(self.grid, physical=self.physical - other.physical)

    def __mul__(self, scalar):
        scalar = float(scalar)
        phys = None if self._physical is None else scalar * self._physical
        spec = None if self._spectral is None else scalar * self._spectral
        return SpectralField(self.grid, physical=phys, spectral=spec)

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)


@dataclass(frozen=True)
class WaveState:
    """A pair (u, du/dt) of real fields at a time stamp."""

    u: SpectralField
    ut: SpectralField
    time: float = 0.0

    def __post_init__(self):
        if self.u.grid != self.ut.grid:
            raise GridMismatch("state components live on different grids")

    @property
    def grid(self):
        return self.u.grid


# -- core operations -------------------------------------------------------------


def to_spectral(field: SpectralField) -> SpectralField:
    """Force the spectral side to be populated (no-op on the values)."""
    field.spectral
    return field


def to_physical(field: SpectralField) -> SpectralField:
    field.physical
    return field


def sobolev_norm(field: SpectralField, s: float) -> float:
    """Fractional Sobolev norm (sum_k (1+|k|^2)^s |u_hat_k|^2)^(1/2)."""
    spec = field.spectral
    w = field.grid.sobolev_weights(s)
    return float(np.sqrt(np.sum(w * (spec.real ** 2 + spec.imag ** 2))))


def pair_norm(state: WaveState, s: float) -> float:
    """Norm of (u, ut) in H^s x H^(s-1)."""
    return float(np.hypot(sobolev_norm(state.u, s), sobolev_norm(state.ut, s - 1.0)))


def apply_linear_propagator(state: WaveState, t: float) -> WaveState:
    """Exact free-wave evolution: mode k advances with frequency |k|.

    The zero mode uses the limit sin(t w)/w -> t.  Mode-wise linear energy
    |ut_hat|^2 + w^2 |u_hat|^2 is conserved to roundoff.
    """
    grid = state.grid
    w = grid.omega
    wt = w * t
    c = np.cos(wt)
    # t * sinc(w t / pi) == sin(w t)/w, with the correct w -> 0 limit
    s_over_w = t * np.sinc(wt / np.pi)
    u_hat = state.u.spectral
    ut_hat = state.ut.spectral
    new_u = c * u_hat + s_over_w * ut_hat
    new_ut = -w * np.sin(wt) * u_hat + c * ut_hat
    return WaveState(
        u=SpectralField.from_spectral(grid, new_u),
        ut=SpectralField.from_spectral(grid, new_ut),
        time=state.time + t,
    )


# -- mollification ----------------------------------------------------------------


def standard_bump(r):
    """The reference C_c^infty profile exp(-1/(1-r^2)) on |r| < 1, up to scale."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = np.abs(r) < 1.0
    with np.errstate(divide="ignore", over="ignore"):
        out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


class MollifierSpec:
    """A compactly supported nonnegative kernel rho and a scale epsilon.

    `base_profile` is the radial shape (not mass-normalized; normalization
    happens inside the transform so that rho_hat(0) = 1 exactly).
    """

    def __init__(self, epsilon: float, support_radius: float = 1.0, base_profile=standard_bump):
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if support_radius <= 0:
            raise ValueError("support_radius must be positive")
        self.epsilon = float(epsilon)
        self.support_radius = float(support_radius)
        self.base_profile = base_profile
        self._lock = threading.Lock()
        self._hat_tables: dict = {}

    def scaled(self, epsilon):
        return MollifierSpec(epsilon, self.support_radius, self.base_profile)

    def kernel_radius(self):
        """Radius of supp(rho_epsilon)."""
        return self.epsilon * self.support_radius

    def cells_across_support(self, grid: TorusGrid) -> float:
        return 2.0 * self.kernel_radius() / grid.spacing

    def resolvable_on(self, grid: TorusGrid) -> bool:
        return self.cells_across_support(grid) >= 2.0

    def hat(self, kappa, dim: int):
        """Radial Fourier transform of the unit-mass kernel at |xi| = kappa.

        Computed by composite-Simpson quadrature of the d-dimensional radial
        transform on a dense table, then interpolated.  Positivity of rho and
        of the quadrature weights gives |rho_hat| <= 1 with equality at 0.
        """
        kappa = np.asarray(kappa, dtype=float)
        kappa_max = float(kappa.max()) if kappa.size else 0.0
        table = self._hat_table(dim, kappa_max)
        grid_k, values = table
        return np.interp(kappa, grid_k, values)

    def _hat_table(self, dim, kappa_max):
        key_max = max(8.0, 2.0 ** np.ceil(np.log2(max(kappa_max, 1e-9))))
        key = (dim, key_max)
        with self._lock:
            cached = self._hat_tables.get(key)
        if cached is not None:
            return cached
        R = self.support_radius
        # quadrature nodes: enough to resolve sin(kappa r) at the largest kappa
        m = int(min(max(4097, 64 * np.ceil(key_max * R)), 2 ** 17)) | 1
        r = np.linspace(0.0, R, m)
        simpson = np.ones(m)
        simpson[1:-1:2] = 4.0
        simpson[2:-1:2] = 2.0
        simpson *= (R / (m - 1)) / 3.0
        rho = self.base_profile(r / R)
        if np.any(rho < 0):
            raise ValueError("mollifier profile must be nonnegative")
        if dim == 1:
            radial_weight = np.ones_like(r)
        elif dim == 2:
            radial_weight = r
        else:
            radial_weight = r ** 2
        base = simpson * radial_weight * rho
        mass = base.sum()
        kappas = np.linspace(0.0, key_max, 4097)
        values = np.empty_like(kappas)
        # chunked so the (kappa x node) kernel matrix stays small
        chunk = 256
        for i in range(0, len(kappas), chunk):
            kr = np.outer(kappas[i:i + chunk], r)
            if dim == 1:
                kern = np.cos(kr)
            elif dim == 2:
                kern = _bessel_j0(kr)
            else:
                kern = np.sinc(kr / np.pi)
            values[i:i + chunk] = kern @ base / mass
        table = (kappas, values)
        with self._lock:
            self._hat_tables[key] = table
        return table


def mollify(field: SpectralField, moll: MollifierSpec, strict: bool = True) -> SpectralField:
    """Convolve with rho_epsilon, realized as multiplication by rho_hat(eps k).

    With `strict` the kernel support must span at least 2 grid cells; pass
    strict=False to permit sub-grid scales (the multiplier is then a gentle
    high-frequency taper on the resolved modes).
    """
    grid = field.grid
    if strict and not moll.resolvable_on(grid):
        raise UnresolvableScale(
            f"mollifier support spans {moll.cells_across_support(grid):.2f} cells "
            f"on {grid}; need >= 2 (pass strict=False to override)"
        )
    multiplier = moll.hat(moll.epsilon * grid.omega, grid.dim)
    return SpectralField.from_spectral(grid, field.spectral * multiplier)


def mollify_state(state: WaveState, moll: MollifierSpec, strict: bool = True) -> WaveState:
    return WaveState(
        u=mollify(state.u, moll, strict=strict),
        ut=mollify(state.ut, moll, strict=strict),
        time=state.time,
    )


# -- smooth ball cutoff ------------------------------------------------------------


def _smoothstep(t):
    """C^infty step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
        b = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
    return a / (a + b)


def ball_cutoff(grid: TorusGrid, center, radius: float,
                cutoff_sharpness: float = 1.0) -> SpectralField:
    """Smooth cutoff: 1 inside the inner ball, 0 outside radius/2.

    The transition annulus sits between radius/3 and radius/2 by default;
    `cutoff_sharpness` > 1 narrows it toward the outer edge.
    """
    if cutoff_sharpness < 1.0:
        raise ValueError("cutoff_sharpness must be >= 1")
    outer = radius / 2.0
    inner = outer - (outer - radius / 3.0) / cutoff_sharpness
    r = grid.periodic_distance(center)
    chi = 1.0 - _smoothstep((r - inner) / (outer - inner))
    return SpectralField.from_physical(grid, chi)


def restrict_ball_norm(field: SpectralField, center, radius: float, s: float,
                       cutoff_sharpness: float = 1.0) -> float:
    """H^s norm of the field multiplied by a smooth ball cutoff at `center`."""
    grid = field.grid
    if radius <= 2.0 * grid.spacing:
        raise UnresolvableScale(
            f"cutoff radius {radius:.4g} must exceed 2 grid cells ({2 * grid.spacing:.4g})"
        )
    chi = ball_cutoff(grid, center, radius, cutoff_sharpness)
    product = SpectralField.from_physical(grid, chi.physical * field.physical)
    return sobolev_norm(product, s)


# -- resolution changes --------------------------------------------------------------


def _resample_axis_full(arr, axis, n_to):
    """Spectrally pad/truncate one full-FFT axis, splitting/folding Nyquist."""
    n_from = arr.shape[axis]
    sl = [slice(None)] * arr.ndim

    def take(i):
        s = list(sl)
        s[axis] = i
        return tuple(s)

    shape = list(arr.shape)
    shape[axis] = n_to
    out = np.zeros(shape, dtype=arr.dtype)
    if n_to > n_from:
        h = n_from // 2
        out[take(slice(0, h))] = arr[take(slice(0, h))]
        out[take(slice(n_to - h + 1, n_to))] = arr[take(slice(h + 1, n_from))]
        nyq = arr[take(h)]
        out[take(n_to - h)] = 0.5 * nyq   # frequency -h
        out[take(h)] = 0.5 * nyq          # frequency +h
    else:
        h = n_to // 2
        out[take(slice(0, h))] = arr[take(slice(0, h))]
        out[take(slice(h + 1, n_to))] = arr[take(slice(n_from - h + 1, n_from))]
        out[take(h)] = arr[take(n_from - h)] + arr[take(h)]  # fold +/- h
    return out


def _conjugate_mirror(arr, full_axes):
    """conj of the frequency-reversed array along the given full axes."""
    out = np.conj(arr)
    for axis in full_axes:
        out = np.roll(np.flip(out, axis=axis), 1, axis=axis)
    return out


def _resample_axis_rfft(arr, n_from, n_to):
    """Pad/truncate the last (half-spectrum) axis."""
    shape = list(arr.shape)
    shape[-1] = n_to // 2 + 1
    out = np.zeros(shape, dtype=arr.dtype)
    if n_to > n_from:
        h = n_from // 2
        out[..., :h] = arr[..., :h]
        out[..., h] = 0.5 * arr[..., h]
    else:
        h = n_to // 2
        out[..., :h] = arr[..., :h]
        nyq = arr[..., h]
        out[..., h] = nyq + _conjugate_mirror(nyq, range(arr.ndim - 1))
    return out


def resample_spectrum(spec, grid_from: TorusGrid, grid_to: TorusGrid):
    """Map half-spectrum coefficients between grids of the same dimension.

    Padding (finer grid) leaves the represented trigonometric polynomial
    unchanged; truncation projects onto the coarser lattice.  The two are
    mutually inverse on resolved content.
    """
    if grid_from.dim != grid_to.dim:
        raise GridMismatch("resampling cannot change the dimension")
    out = np.asarray(spec, dtype=complex)
    for axis in range(grid_from.dim - 1):
        out = _resample_axis_full(out, axis, grid_to.n)
    out = _resample_axis_rfft(out, grid_from.n, grid_to.n)
    return out


def change_resolution(field: SpectralField, points_per_axis: int) -> SpectralField:
    grid_to = TorusGrid(field.grid.dim, points_per_axis)
    return SpectralField.from_spectral(
        grid_to, resample_spectrum(field.spectral, field.grid, grid_to))


def change_state_resolution(state: WaveState, points_per_axis: int) -> WaveState:
    return WaveState(
        u=change_resolution(state.u, points_per_axis),
        ut=change_resolution(state.ut, points_per_axis),
        time=state.time,
    )


# -- deterministic random fields ------------------------------------------------------


def random_band_limited(grid: TorusGrid, max_mode: int, seed: int,
                        amplitude: float = 1.0, norm_s: float | None = None) -> SpectralField:
    """Deterministic smooth random field supported on |k| <= max_mode.

    If `norm_s` is given the field is rescaled to have that H^s norm equal
    to `amplitude`; otherwise the L-infinity amplitude is set to it.
    """
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal(grid.shape)
    spec = grid.forward(raw)
    mask = grid.k_squared <= float(max_mode) ** 2
    spec = spec * mask
    field = SpectralField.from_spectral(grid, spec)
    if norm_s is not None:
        scale = amplitude / max(sobolev_norm(field, norm_s), 1e-300)
    else:
        scale = amplitude / max(field.l_inf(), 1e-300)
    return field * scale
