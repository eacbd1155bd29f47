//! Smooth graph signals obtained by spectral filtering of white noise.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LaplacianMatrix;
use crate::seed;

/// Eigenvalues with magnitude below this are treated as exact zeros.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-10;

/// Full eigendecomposition of a Laplacian, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct GraphSpectrum {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl GraphSpectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// Orthonormal eigenvectors, one per column, in eigenvalue order.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn nodes(&self) -> usize {
        self.values.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Number of zero eigenvalues, i.e. connected components.
    pub fn zero_modes(&self) -> usize {
        self.values.iter().filter(|&&l| l == 0.0).count()
    }

    /// Dense `h(L) = U diag(h(lambda)) U^T`.
    pub fn filter_matrix(&self, h: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let u = &self.vectors;
        let mut scaled = u.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= h(self.values[k]);
        }
        scaled * u.transpose()
    }

    /// Applies `h(L)` to every column of `x`.
    pub fn filter_columns(&self, h: impl Fn(f64) -> f64, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.nrows() != self.nodes() {
            return Err(Error::DimensionMismatch {
                expected: self.nodes(),
                actual: x.nrows(),
            });
        }
        let mut coeffs = self.vectors.tr_mul(x);
        for (k, mut row) in coeffs.row_iter_mut().enumerate() {
            row *= h(self.values[k]);
        }
        Ok(&self.vectors * coeffs)
    }
}

pub fn spectrum(l: &LaplacianMatrix) -> GraphSpectrum {
    let eig = SymmetricEigen::new(l.matrix().clone());
    let m = l.nodes();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order
        .iter()
        .map(|&k| {
            let v = eig.eigenvalues[k];
            if v.abs() < ZERO_EIGENVALUE_TOL {
                0.0
            } else {
                v
            }
        })
        .collect();
    let vectors = DMatrix::from_fn(m, m, |i, c| eig.eigenvectors[(i, order[c])]);
    GraphSpectrum { values, vectors }
}

/// Rescales `L` so that its largest eigenvalue is 1.
pub fn normalize_laplacian_scale(l: &LaplacianMatrix) -> Result<LaplacianMatrix> {
    let lmax = l
        .matrix()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(0.0, f64::max);
    if lmax <= 0.0 {
        return Err(Error::validation("cannot normalize a zero Laplacian"));
    }
    Ok(LaplacianMatrix::from_matrix_unchecked(l.matrix() / lmax))
}

/// Low-pass graph filter `h(lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FilterConfig", into = "FilterConfig")]
pub enum FilterSpec {
    /// `1 / (1 + alpha lambda)`
    Tikhonov { alpha: f64 },
    /// `lambda^(-1/2)` away from zero, 0 on the null space.
    Generative,
    /// `exp(-t lambda)`
    Heat { t: f64 },
}

impl FilterSpec {
    pub const DEFAULT_TIKHONOV_ALPHA: f64 = 10.0;
    pub const DEFAULT_HEAT_T: f64 = 10.0;

    pub fn tikhonov() -> Self {
        FilterSpec::Tikhonov {
            alpha: Self::DEFAULT_TIKHONOV_ALPHA,
        }
    }

    pub fn heat() -> Self {
        FilterSpec::Heat {
            t: Self::DEFAULT_HEAT_T,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FilterSpec::Tikhonov { alpha } if !(alpha > 0.0 && alpha.is_finite()) => {
                Err(Error::validation(format!("Tikhonov alpha must be positive, got {alpha}")))
            }
            FilterSpec::Heat { t } if !(t > 0.0 && t.is_finite()) => {
                Err(Error::validation(format!("heat time must be positive, got {t}")))
            }
            _ => Ok(()),
        }
    }

    pub fn response(&self, lambda: f64) -> f64 {
        match *self {
            FilterSpec::Tikhonov { alpha } => 1.0 / (1.0 + alpha * lambda),
            FilterSpec::Generative => {
                if lambda.abs() < ZERO_EIGENVALUE_TOL {
                    0.0
                } else {
                    1.0 / lambda.sqrt()
                }
            }
            FilterSpec::Heat { t } => (-t * lambda).exp(),
        }
    }

    /// Short lowercase name used in configs and result tables.
    pub fn name(&self) -> &'static str {
        match self {
            FilterSpec::Tikhonov { .. } => "tikhonov",
            FilterSpec::Generative => "generative",
            FilterSpec::Heat { .. } => "heat",
        }
    }
}

#[derive(Serialize, Deserialize)]
struct FilterConfig {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    param: Option<f64>,
}

impl TryFrom<FilterConfig> for FilterSpec {
    type Error = String;

    fn try_from(c: FilterConfig) -> std::result::Result<Self, String> {
        let spec = match c.kind.as_str() {
            "tikhonov" => FilterSpec::Tikhonov {
                alpha: c.param.unwrap_or(FilterSpec::DEFAULT_TIKHONOV_ALPHA),
            },
            "generative" => FilterSpec::Generative,
            "heat" => FilterSpec::Heat {
                t: c.param.unwrap_or(FilterSpec::DEFAULT_HEAT_T),
            },
            other => return Err(format!("unknown filter kind {other:?}")),
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

impl From<FilterSpec> for FilterConfig {
    fn from(f: FilterSpec) -> Self {
        let param = match f {
            FilterSpec::Tikhonov { alpha } => Some(alpha),
            FilterSpec::Generative => None,
            FilterSpec::Heat { t } => Some(t),
        };
        FilterConfig {
            kind: f.name().to_string(),
            param,
        }
    }
}

pub fn filter_signal(spectrum: &GraphSpectrum, filter: &FilterSpec, x0: &[f64]) -> Result<Vec<f64>> {
    filter.validate()?;
    let x = DMatrix::from_column_slice(x0.len(), 1, x0);
    let y = spectrum.filter_columns(|l| filter.response(l), &x)?;
    Ok(y.as_slice().to_vec())
}

/// `n` standard-normal columns, column `j` drawn from its own sub-stream of `seed`.
pub fn white_noise(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(m, n);
    for (j, mut col) in x.column_iter_mut().enumerate() {
        let mut rng = seed::rng(seed::derive(seed, &[seed::stream::SIGNAL, j as u64]));
        for v in col.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
    }
    x
}

/// `n` smooth signals (columns) on the graph of `spectrum`, with an arbitrary filter.
pub fn generate_smooth_matrix_with(
    spectrum: &GraphSpectrum,
    h: impl Fn(f64) -> f64,
    n: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    if n < 1 {
        return Err(Error::validation("signal count must be at least 1"));
    }
    let x0 = white_noise(spectrum.nodes(), n, seed);
    spectrum.filter_columns(h, &x0)
}

pub fn generate_smooth_matrix(
    spectrum: &GraphSpectrum,
    filter: &FilterSpec,
    n: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    filter.validate()?;
    generate_smooth_matrix_with(spectrum, |l| filter.response(l), n, seed)
}

/// Adds i.i.d. Gaussian noise rescaled to `||E||_F = ratio ||X||_F`.
pub fn add_noise(x: &DMatrix<f64>, ratio: f64, seed: u64) -> Result<DMatrix<f64>> {
    if !(ratio >= 0.0 && ratio.is_finite()) {
        return Err(Error::validation(format!("noise ratio must be >= 0, got {ratio}")));
    }
    let xnorm = x.norm();
    if ratio == 0.0 || xnorm == 0.0 {
        return Ok(x.clone());
    }
    let mut rng = seed::rng(seed::derive(seed, &[seed::stream::NOISE]));
    let e = DMatrix::from_fn(x.nrows(), x.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let enorm = e.norm();
    Ok(x + e * (ratio * xnorm / enorm))
}
