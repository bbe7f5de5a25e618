"""Monte Carlo sampling of random product-state ensembles and their spectra.

Each trial draws ``p`` product vectors (or, for the partial-trace model, ``p``
product operators ``A_1 (x) ... (x) A_k``), stacks them as the columns of a
factor matrix ``Phi`` with ``M = Phi Phi^dagger``, and diagonalizes whichever
of ``Phi Phi^dagger`` / ``Phi^dagger Phi`` is smaller.

The Marchenko-Pastur reference law used here is the full spectral law of the
``D`` eigenvalues of ``M``: an atom of mass ``max(0, 1 - x)`` at zero plus the
continuous part ``sqrt((l+ - l)(l - l-)) / (2 pi l)``. Its moments are
``beta_m(x)``. Conditioning on the nonzero eigenvalues divides the continuous
part by ``min(1, x)``.
"""

from __future__ import annotations

import enum
import math
import threading
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .combinatorics import exact_root
from .errors import DomainError, NumericError, ResourceGuardError
from .moments import letter_maps

MAX_DIM = 4096
MAX_P = 10 ** 6
RESIDUAL_TOL = 1e-8
ZERO_REL = 1e-10
CDF_GRID = 10_000


class EnsembleKind(enum.Enum):
    NORMALIZED = "normalized"
    GAUSSIAN = "gaussian"
    PARTIAL_TRACE = "partial_trace"
    REPEATED = "repeated"


class StateKind(enum.Enum):
    UNIT = "unit"
    GAUSSIAN_NORM = "gaussian_norm"


@dataclass(frozen=True)
class EnsembleSpec:
    kind: EnsembleKind
    p: int
    d: int
    k: int = 1
    master_seed: int = 0
    d_a: int | None = None
    d_b: int | None = None

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", EnsembleKind(self.kind))
        if self.p < 1 or self.k < 1:
            raise DomainError("p and k must be positive")
        if not 0 <= self.master_seed < 2 ** 64:
            raise DomainError("master_seed must be a 64-bit unsigned integer")
        if self.kind is EnsembleKind.PARTIAL_TRACE:
            if not self.d_a or not self.d_b or self.d_a < 1 or self.d_b < 1:
                raise DomainError("partial-trace ensembles need d_a, d_b >= 1")
            # keep d consistent with the local dimension of M
            object.__setattr__(self, "d", self.d_a)
        elif self.d < 1:
            raise DomainError("d must be positive")
        if self.kind is EnsembleKind.REPEATED and exact_root(self.p, self.k) is None:
            raise DomainError(f"p={self.p} is not a perfect {self.k}-th power")

    @property
    def dim(self) -> int:
        return self.d ** self.k

    @property
    def x(self) -> float:
        return self.p / self.dim

    @property
    def columns(self) -> int:
        """Number of columns of the factor matrix."""
        if self.kind is EnsembleKind.PARTIAL_TRACE:
            return self.p * self.d_b ** self.k
        return self.p

    @property
    def max_rank(self) -> int:
        return min(self.columns, self.dim)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["kind"] = self.kind.value
        return out


@dataclass(frozen=True)
class SpectralSample:
    eigenvalues: np.ndarray  # descending, length D
    trial_index: int
    seed_used: int
    spec: EnsembleSpec
    residual: float

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def zero_threshold(self) -> float:
        return ZERO_REL * max(1.0, self.lambda_max)

    @property
    def nonzero(self) -> np.ndarray:
        return self.eigenvalues[self.eigenvalues > self.zero_threshold]

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.eigenvalues > self.zero_threshold))


# ---------------------------------------------------------------------------
# random vectors


def trial_rng(master_seed: int, trial: int) -> tuple[np.random.Generator, int]:
    """Counter-based Philox stream keyed by ``(master_seed, trial)``."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial,))
    seed_used = int(ss.generate_state(1, dtype=np.uint64)[0])
    return np.random.Generator(np.random.Philox(ss)), seed_used


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard complex Gaussians (``E|z|^2 = 1``) by the Box-Muller polar form."""
    u1 = rng.random(shape)
    u2 = rng.random(shape)
    r = np.sqrt(-np.log1p(-u1))
    return r * np.exp(2j * np.pi * u2)


def sample_state(d: int, kind: StateKind, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar unit vector(s) or Gaussian vectors with entry variance ``1/d``.

    With ``size`` given, returns a ``(size, d)`` array of independent vectors.
    """
    if d < 1:
        raise DomainError("d must be >= 1")
    shape = (d,) if size is None else (size, d)
    z = complex_normal(rng, shape)
    if StateKind(kind) is StateKind.UNIT:
        return z / np.linalg.norm(z, axis=-1, keepdims=True)
    return z / math.sqrt(d)


def _kron_rows(factors: list[np.ndarray]) -> np.ndarray:
    """Row-wise Kronecker product of ``(n, d_j)`` arrays -> ``(n, prod d_j)``."""
    out = factors[0]
    for f in factors[1:]:
        out = np.einsum("si,sj->sij", out, f).reshape(out.shape[0], -1)
    return out


def _check_guards(spec: EnsembleSpec) -> None:
    if spec.dim > MAX_DIM:
        raise ResourceGuardError(f"D = {spec.dim} exceeds the dimension guard {MAX_DIM}")
    if spec.p > MAX_P:
        raise ResourceGuardError(f"p = {spec.p} exceeds the guard {MAX_P}")
    if spec.columns * spec.dim > 64 * 10 ** 6:
        raise ResourceGuardError("factor matrix would exceed 64M entries")


def factor_matrix(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    """``Phi`` of shape ``(D, columns)`` with ``M = Phi Phi^dagger``."""
    _check_guards(spec)
    p, d, k = spec.p, spec.d, spec.k
    if spec.kind is EnsembleKind.NORMALIZED:
        rows = _kron_rows([sample_state(d, StateKind.UNIT, rng, p) for _ in range(k)])
    elif spec.kind is EnsembleKind.GAUSSIAN:
        rows = _kron_rows([sample_state(d, StateKind.GAUSSIAN_NORM, rng, p) for _ in range(k)])
    elif spec.kind is EnsembleKind.REPEATED:
        factors = []
        for mp in letter_maps(p, k):
            pool = sample_state(d, StateKind.UNIT, rng, max(mp))
            factors.append(pool[np.asarray(mp) - 1])
        rows = _kron_rows(factors)
    else:
        d_a, d_b = spec.d_a, spec.d_b
        # each factor: unit vector in C^{d_a d_b} reshaped to G (d_a x d_b); A = G G^dagger
        gs = [sample_state(d_a * d_b, StateKind.UNIT, rng, p).reshape(p, d_a, d_b) for _ in range(k)]
        prod = gs[0]
        for g in gs[1:]:
            prod = np.einsum("sab,scd->sacbd", prod, g).reshape(p, prod.shape[1] * d_a, prod.shape[2] * d_b)
        # columns of Phi: for each s, the d_b^k columns of G_1 (x) ... (x) G_k
        return np.ascontiguousarray(prod.transpose(1, 0, 2).reshape(spec.dim, -1))
    return np.ascontiguousarray(rows.T)


def coupled_factor_matrices(spec: EnsembleSpec, rng: np.random.Generator):
    """Normalized and Gaussian factor matrices built from the same draws.

    Returns ``(Phi, Phi_hat, sq_norms)`` where column ``s`` of ``Phi_hat`` is
    column ``s`` of ``Phi`` scaled by ``sqrt(sq_norms[s])``.
    """
    _check_guards(spec)
    units, scales = [], np.ones(spec.p)
    for _ in range(spec.k):
        z = complex_normal(rng, (spec.p, spec.d))
        r2 = np.sum(np.abs(z) ** 2, axis=1) / spec.d
        units.append(z / np.sqrt(r2 * spec.d)[:, None])
        scales *= r2
    phi = _kron_rows(units).T
    return phi, phi * np.sqrt(scales)[None, :], scales


# ---------------------------------------------------------------------------
# spectra


def spectrum_from_factors(phi: np.ndarray, spec: EnsembleSpec, trial: int = 0, seed_used: int = 0) -> SpectralSample:
    dim, cols = phi.shape
    small = phi.conj().T @ phi if cols < dim else phi @ phi.conj().T
    small = (small + small.conj().T) / 2
    try:
        vals, vecs = np.linalg.eigh(small)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigh failed on a {small.shape[0]}x{small.shape[0]} matrix "
                           f"(trial {trial}, spec {spec}): {exc}") from exc
    if not np.all(np.isfinite(vals)):
        raise NumericError(f"non-finite eigenvalues in trial {trial}")
    norm = max(abs(vals[0]), abs(vals[-1]), 1e-300)
    resid = np.linalg.norm(small @ vecs - vecs * vals, axis=0).max() / norm
    if resid > RESIDUAL_TOL:
        raise NumericError(f"eigen residual {resid:.3e} > {RESIDUAL_TOL} in trial {trial}")
    out = np.zeros(dim)
    n = min(len(vals), dim)
    out[:n] = vals[::-1][:n]
    out = np.sort(out)[::-1]
    return SpectralSample(out, trial, seed_used, spec, float(resid))


def spectrum(spec: EnsembleSpec, trial: int = 0) -> SpectralSample:
    rng, seed_used = trial_rng(spec.master_seed, trial)
    phi = factor_matrix(spec, rng)
    return spectrum_from_factors(phi, spec, trial, seed_used)


def run_trials(spec: EnsembleSpec, trials: int, threads: int | None = None) -> list[SpectralSample]:
    """Independent trials; results depend only on ``(spec, trial index)``."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    _check_guards(spec)

    def one(i):
        try:
            return spectrum(spec, i)
        except (NumericError, ResourceGuardError) as exc:
            raise type(exc)(f"trial {i}: {exc}") from exc

    if threads == 1 or trials == 1:
        return [one(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(trials)))


# ---------------------------------------------------------------------------
# statistics


def _mean_stderr(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise DomainError("no samples")
    mean = float(math.fsum(v) / v.size)
    if v.size == 1:
        return mean, 0.0
    return mean, float(np.std(v, ddof=1) / math.sqrt(v.size))


def empirical_moment(samples, m: int) -> tuple[float, float]:
    """Mean and standard error of ``D^{-1} sum_i lambda_i^m`` across samples."""
    if not samples:
        raise DomainError("no samples")
    if m < 0:
        raise DomainError("m must be >= 0")
    per = [math.fsum(s.eigenvalues.astype(float) ** m) / len(s.eigenvalues) for s in samples]
    return _mean_stderr(per)


def mp_edges(x: float) -> tuple[float, float]:
    if x <= 0:
        raise DomainError("x must be positive")
    r = math.sqrt(x)
    return (1 - r) ** 2, (1 + r) ** 2


def mp_atom(x: float) -> float:
    """Mass at zero of the limiting law of all ``D`` eigenvalues."""
    return max(0.0, 1.0 - x)


def mp_density(x: float, lam: float) -> float:
    """Continuous part ``sqrt((l+ - l)(l - l-)) / (2 pi l)`` of the limiting law."""
    a, b = mp_edges(x)
    if lam <= a or lam >= b or lam <= 0:
        return 0.0
    return math.sqrt((b - lam) * (lam - a)) / (2 * math.pi * lam)


def mp_density_nonzero(x: float, lam: float) -> float:
    """Density of the nonzero eigenvalues; equals ``sqrt(...)/(2 pi x l)`` for ``x <= 1``."""
    return mp_density(x, lam) / min(1.0, x)


def _theta_integrand(x: float, f):
    # lam = a + (b - a)(1 - cos t)/2 makes the square-root edges smooth
    a, b = mp_edges(x)
    h = (b - a) / 2

    def g(t):
        lam = a + h * (1 - math.cos(t))
        return f(lam) * h * h * math.sin(t) ** 2 / (2 * math.pi * lam)

    return g


def mp_moment(x: float, m: int, include_atom: bool = True) -> float:
    """``int lam^m d(law)`` by adaptive quadrature (absolute tolerance 1e-9)."""
    if m < 0:
        raise DomainError("m must be >= 0")
    g = _theta_integrand(x, lambda lam: lam ** m)
    val, err, info = integrate.quad(g, 0.0, math.pi, epsabs=1e-12, epsrel=1e-12, limit=200, full_output=True)[:3]
    if err > 1e-9 or not math.isfinite(val):
        raise NumericError(f"quadrature did not converge for x={x}, m={m}: estimate {val}, error {err}")
    if m == 0 and include_atom:
        val += mp_atom(x)
    return val


_cdf_lock = threading.Lock()


@lru_cache(maxsize=64)
def _cdf_table(x: float) -> tuple[np.ndarray, np.ndarray]:
    """Nonzero-law CDF tabulated on a uniform grid in the angle variable."""
    theta = np.linspace(0.0, math.pi, CDF_GRID)
    a, b = mp_edges(x)
    h = (b - a) / 2
    lam = a + h * (1 - np.cos(theta))
    with np.errstate(invalid="ignore", divide="ignore"):
        dens = np.where(lam > 0, h * h * np.sin(theta) ** 2 / (2 * math.pi * lam), 0.0)
    if a == 0.0:
        dens[0] = h / math.pi  # limit as t -> 0 when the lower edge sits at zero
    cdf = integrate.cumulative_simpson(dens, x=theta, initial=0.0)
    cdf /= cdf[-1]
    return lam, cdf


def mp_cdf(x: float, lam) -> np.ndarray:
    """CDF of the nonzero-eigenvalue law at ``lam`` (vectorized)."""
    with _cdf_lock:
        grid, cdf = _cdf_table(float(x))
    return np.interp(np.asarray(lam, dtype=float), grid, cdf, left=0.0, right=1.0)


def mp_sample(x: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draws from the nonzero-eigenvalue law."""
    with _cdf_lock:
        grid, cdf = _cdf_table(float(x))
    return np.interp(rng.random(n), cdf, grid)


def ks_distance(samples, x: float) -> float:
    """Sup distance between pooled nonzero eigenvalues and the MP nonzero law.

    ``samples`` may be SpectralSample objects or a flat array of values.
    """
    if len(samples) and isinstance(samples[0], SpectralSample):
        if x < 1:
            vals = np.concatenate([s.nonzero for s in samples])
        else:
            vals = np.concatenate([s.eigenvalues for s in samples])
    else:
        vals = np.asarray(samples, dtype=float)
    if vals.size == 0:
        raise DomainError("empty nonzero spectrum")
    if vals.size < 10:
        warnings.warn(f"KS distance from only {vals.size} eigenvalue(s) is degenerate", RuntimeWarning, stacklevel=2)
    v = np.sort(vals)
    n = v.size
    f = mp_cdf(x, v)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


@dataclass(frozen=True)
class ExtremeStats:
    lambda_max_mean: float
    lambda_max_std: float
    lambda_min_mean: float
    lambda_min_std: float
    lambda_max_values: tuple = field(repr=False, default=())
    lambda_min_values: tuple = field(repr=False, default=())


def _std(v) -> float:
    v = np.asarray(v, dtype=float)
    return float(np.std(v, ddof=1)) if v.size > 1 else 0.0


def smallest_eigenvalue(sample: SpectralSample) -> float:
    if sample.spec.x < 1:
        nz = sample.nonzero
        return float(nz[-1]) if nz.size else 0.0
    return float(sample.eigenvalues[-1])


def extreme_stats(samples) -> ExtremeStats:
    if not samples:
        raise DomainError("no samples")
    hi = [s.lambda_max for s in samples]
    lo = [smallest_eigenvalue(s) for s in samples]
    return ExtremeStats(float(np.mean(hi)), _std(hi), float(np.mean(lo)), _std(lo), tuple(hi), tuple(lo))


def concentration_experiment(kind, x: float, d_list, k: int, trials: int,
                             master_seed: int = 0, threads: int | None = None) -> list[tuple[int, int, float]]:
    """Rows ``(d, p, std(lambda_max))`` at ``p = round(x d^k)``."""
    if trials < 2:
        raise DomainError("need at least 2 trials to estimate a standard deviation")
    rows = []
    for d in d_list:
        p = max(1, round(x * d ** k))
        spec = EnsembleSpec(EnsembleKind(kind), p, d, k, master_seed)
        samples = run_trials(spec, trials, threads)
        rows.append((d, p, _std([s.lambda_max for s in samples])))
    return rows


# ---------------------------------------------------------------------------
# output


def fmt_real(v: float) -> str:
    return "%.17g" % v


def write_eigen_csv(path, samples) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("trial,index,eigenvalue\n")
        for s in samples:
            for i, v in enumerate(s.eigenvalues):
                fh.write(f"{s.trial_index},{i},{fmt_real(float(v))}\n")


def stats_record(spec: EnsembleSpec, samples, max_m: int = 4) -> dict:
    ext = extreme_stats(samples)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            ks = ks_distance(samples, spec.x)
    except DomainError:
        ks = None
    moments = []
    for m in range(1, max_m + 1):
        mean, se = empirical_moment(samples, m)
        moments.append({"m": m, "mean": mean, "std_error": se})
    return {
        "spec": spec.to_dict(),
        "trials": len(samples),
        "lambda_max": {"mean": ext.lambda_max_mean, "std": ext.lambda_max_std},
        "lambda_min": {"mean": ext.lambda_min_mean, "std": ext.lambda_min_std},
        "ks": ks,
        "moments": moments,
    }
