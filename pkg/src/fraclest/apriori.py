"""A priori evaluation: correlations, exponent sweeps, PDFs, scatter samples.

Truth is the row divergence of the exact residual stress extracted from an
unfiltered snapshot; models are the fractional closure and the Smagorinsky
baseline evaluated on the same filtered field.  The correlation uses mean-
removed fields; the regression coefficient is the least-squares slope with
the model as regressor, ``R = <truth' model'> / <model'^2>``, so ``R ~ 1``
means the model also matches magnitudes.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import (DegenerateCorrelationError, DegenerateTruthError,
                     ParameterError)
from .filtering import BoxFilterSpec, true_sgs_divergence, true_sgs_stress
from .fractional import FsgsParams, equivalent_sgs_stress, fsgs_divergence
from .grid import ScalarField, SymmetricTensorField, VectorField
from .smagorinsky import SmagorinskyParams, smagorinsky_divergence, smagorinsky_stress

STRESS_LABELS = ("11", "12", "13", "22", "23", "33")


@dataclass(frozen=True)
class CorrelationResult:
    """Per-direction and per-stress-component agreement with the truth."""

    rho: tuple[float, float, float]
    reg: tuple[float, float, float]
    rho_ij: dict[str, float]
    n_samples: int


@dataclass(frozen=True)
class AlphaSweepResult:
    alphas: tuple[float, ...]
    results: tuple[CorrelationResult, ...]
    alpha_opt: float
    selection_note: str

    @property
    def opt_index(self) -> int:
        return self.alphas.index(self.alpha_opt)


@dataclass(frozen=True)
class PdfHistogram:
    """Standardized histograms of truth and model over +-8 truth-sigma."""

    bin_edges: np.ndarray
    density_truth: np.ndarray
    density_model: np.ndarray
    outside_truth: float
    outside_model: float
    standardization: tuple[float, float]  # truth (mean, std)

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


def _as_array(f) -> np.ndarray:
    if isinstance(f, ScalarField):
        return f.to_physical().data
    return np.asarray(f, dtype=np.float64)


def correlation(a, b) -> tuple[float, float]:
    """Correlation and regression of truth ``a`` against model ``b``."""
    aa, bb = _as_array(a).ravel(), _as_array(b).ravel()
    if aa.shape != bb.shape:
        raise ParameterError("correlated fields must have identical shape")
    ap = aa - np.mean(aa)
    bp = bb - np.mean(bb)
    var_a = float(np.mean(ap * ap))
    var_b = float(np.mean(bp * bp))
    for var, raw, name in ((var_a, aa, "first"), (var_b, bb, "second")):
        rms = float(np.sqrt(np.mean(raw * raw)))
        if np.sqrt(var) <= 1e-13 * rms or var == 0.0:
            raise DegenerateCorrelationError(f"{name} field has zero variance")
    cov = float(np.mean(ap * bp))
    return cov / np.sqrt(var_a * var_b), cov / var_b


def _stress_correlations(tau_true: SymmetricTensorField,
                         tau_model: SymmetricTensorField) -> dict[str, float]:
    out = {}
    for label, ct, cm in zip(STRESS_LABELS, tau_true.components, tau_model.components):
        out[label] = correlation(ct, cm)[0]
    return out


def _directional(truth: VectorField, model: VectorField):
    rho, reg = [], []
    for i in range(3):
        r, s = correlation(truth.components[i], model.components[i])
        rho.append(r)
        reg.append(s)
    return tuple(rho), tuple(reg)


def _evaluate_fsgs_against(truth: VectorField, tau_true: SymmetricTensorField,
                           vbar: VectorField, params: FsgsParams) -> CorrelationResult:
    model = fsgs_divergence(vbar, params)
    rho, reg = _directional(truth, model)
    tau_model = equivalent_sgs_stress(vbar, params.alpha)
    return CorrelationResult(rho=rho, reg=reg,
                             rho_ij=_stress_correlations(tau_true, tau_model),
                             n_samples=vbar.grid.n ** 3)


def _truth_fields(v_dns: VectorField, l_delta: float):
    if l_delta == 0:
        raise DegenerateTruthError("filter ratio 0 leaves no residual stress "
                                   "to correlate against")
    pair = true_sgs_stress(v_dns, BoxFilterSpec(l_delta))
    return pair.filtered, pair.residual_stress, true_sgs_divergence(pair)


def evaluate_fsgs(v_dns: VectorField, l_delta: float,
                  params: FsgsParams) -> CorrelationResult:
    """Full fractional-closure evaluation of one snapshot at one exponent."""
    vbar, tau_true, truth = _truth_fields(v_dns, l_delta)
    return _evaluate_fsgs_against(truth, tau_true, vbar, params)


def evaluate_smagorinsky(v_dns: VectorField, l_delta: float,
                         params: SmagorinskyParams) -> CorrelationResult:
    """Same pipeline with the eddy-viscosity baseline as the model."""
    vbar, tau_true, truth = _truth_fields(v_dns, l_delta)
    model = smagorinsky_divergence(vbar, params)
    rho, reg = _directional(truth, model)
    tau_model = smagorinsky_stress(vbar, params)
    return CorrelationResult(rho=rho, reg=reg,
                             rho_ij=_stress_correlations(tau_true, tau_model),
                             n_samples=vbar.grid.n ** 3)


def _validate_alpha_grid(alpha_grid) -> tuple[float, ...]:
    alphas = tuple(float(a) for a in alpha_grid)
    if not alphas:
        raise ParameterError("alpha grid is empty")
    if any(not 0.0 < a < 1.0 for a in alphas):
        raise ParameterError("alpha grid must lie strictly inside (0, 1)")
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ParameterError("alpha grid must be strictly ascending")
    return alphas


def _select_alpha_opt(alphas, results, r_tol: float):
    """Largest rho_1 subject to |R_1 - 1| <= r_tol, ties toward larger alpha."""
    admissible = [i for i, res in enumerate(results)
                  if abs(res.reg[0] - 1.0) <= r_tol]
    if admissible:
        note = f"argmax rho_1 over alphas with |R_1 - 1| <= {r_tol}"
        pool = admissible
    else:
        note = (f"no alpha satisfied |R_1 - 1| <= {r_tol}; "
                "fell back to unconstrained argmax of rho_1")
        pool = range(len(alphas))
    best = None
    for i in pool:
        if best is None or results[i].rho[0] >= results[best].rho[0]:
            best = i
    return alphas[best], note


def sweep_alpha(v_dns: VectorField, l_delta: float, alpha_grid,
                params_base: FsgsParams, r_tol: float = 0.25,
                threads: int = 1) -> AlphaSweepResult:
    """Evaluate the closure over an exponent grid and pick the optimum."""
    alphas = _validate_alpha_grid(alpha_grid)
    vbar, tau_true, truth = _truth_fields(v_dns, l_delta)
    return sweep_alpha_against(truth, tau_true, vbar, alphas, params_base,
                               r_tol=r_tol, threads=threads)


def sweep_alpha_against(truth: VectorField, tau_true: SymmetricTensorField,
                        vbar: VectorField, alpha_grid, params_base: FsgsParams,
                        r_tol: float = 0.25, threads: int = 1) -> AlphaSweepResult:
    """Sweep against caller-supplied truth fields (manufactured or filtered)."""
    alphas = _validate_alpha_grid(alpha_grid)

    def one(a: float) -> CorrelationResult:
        return _evaluate_fsgs_against(truth, tau_true, vbar,
                                      replace(params_base, alpha=a))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = tuple(pool.map(one, alphas))
    else:
        results = tuple(one(a) for a in alphas)
    alpha_opt, note = _select_alpha_opt(alphas, results, r_tol)
    return AlphaSweepResult(alphas=alphas, results=results,
                            alpha_opt=alpha_opt, selection_note=note)


def pdf_compare(truth, model, n_bins: int = 100) -> PdfHistogram:
    """Histograms of truth and model standardized by the truth's statistics."""
    t = _as_array(truth).ravel()
    m = _as_array(model).ravel()
    mean, std = float(np.mean(t)), float(np.std(t))
    if std == 0.0 or float(np.std(m)) == 0.0:
        raise DegenerateCorrelationError("PDF comparison needs nonconstant fields")
    edges = np.linspace(-8.0, 8.0, n_bins + 1)
    bw = edges[1] - edges[0]

    def hist(x):
        z = (x - mean) / std
        inside = z[(z >= edges[0]) & (z <= edges[-1])]
        counts, _ = np.histogram(inside, bins=edges)
        density = counts / (inside.size * bw) if inside.size else counts * 0.0
        return density, 1.0 - inside.size / z.size

    density_t, out_t = hist(t)
    density_m, out_m = hist(m)
    return PdfHistogram(bin_edges=edges, density_truth=density_t,
                        density_model=density_m, outside_truth=out_t,
                        outside_model=out_m, standardization=(mean, std))


@dataclass(frozen=True)
class ScatterSample:
    """Seeded uniform subsample of (truth, model) point pairs."""

    truth: np.ndarray
    model: np.ndarray
    note: str


def scatter_export(truth, model, n_points: int, seed: int) -> ScatterSample:
    t = _as_array(truth).ravel()
    m = _as_array(model).ravel()
    note = ""
    if n_points > t.size:
        note = f"requested {n_points} points, clipped to field size {t.size}"
        n_points = t.size
    rng = np.random.Generator(np.random.Philox(seed))
    idx = rng.choice(t.size, size=n_points, replace=False)
    return ScatterSample(truth=t[idx], model=m[idx], note=note)
