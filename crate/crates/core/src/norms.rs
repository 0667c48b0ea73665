//! Homogeneous norms and seminorms of sampled functions.
//!
//! Double integrals are Riemann sums over the lattice with the singular
//! offset integral truncated to `spacing <= |h| <= box/2`. Every result
//! carries the cutoffs it used, so two sides of an inequality can be
//! checked against the same truncation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::corpus::{lp_norm_values, SampledFunction};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::lpdecomp::{FilterBank, MollifierFamily};
use crate::reduce::{pairwise_sum, par_map, par_max};
use crate::spectral;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Sobolev,
    SobolevDirectional,
    Holder,
    Besov,
    BesovSupMollifier,
    Bmo,
    Lp,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    /// Smoothness `α` or `s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<f64>,
    #[serde(default, with = "crate::exponent::opt_ext_f64", skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, with = "crate::exponent::opt_ext_f64", skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

/// Cutoffs and diagnostics of one evaluation. Fields that do not apply to
/// a norm kind stay `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub grid: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_min: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_max: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_max: Option<f64>,
    /// Energy share outside the retained bands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropped_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_subtracted: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    /// Number of offsets, scales or cubes visited.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

impl Truncation {
    fn on(grid: &Grid) -> Self {
        Truncation {
            grid: grid.fingerprint(),
            ..Default::default()
        }
    }

    fn offsets(grid: &Grid) -> Self {
        Truncation {
            h_min: Some(grid.spacing()),
            h_max: Some(grid.box_length() / 2.0),
            ..Truncation::on(grid)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub kind: NormKind,
    pub params: NormParams,
    pub truncation: Truncation,
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!("integrability exponent must lie in [1, inf], got {p}")));
    }
    Ok(())
}

fn check_fraction(alpha: f64, what: &str) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("{what} requires smoothness in (0,1), got {alpha}")));
    }
    Ok(())
}

/// `‖f‖_{L^p}` as a [`NormResult`].
pub fn lp(f: &SampledFunction, p: f64) -> Result<NormResult> {
    check_p(p)?;
    Ok(NormResult {
        value: lp_norm_values(f.values(), f.grid().cell_volume(), p)?,
        kind: NormKind::Lp,
        params: NormParams {
            p: Some(p),
            ..Default::default()
        },
        truncation: Truncation::on(f.grid()),
    })
}

/// Offsets of the truncated `h` integral: `1 <= |k| <= n/2` cells. In 1D
/// both `±n/2` appear, so the symmetric interval `[-L/2, L/2]` is covered.
fn sobolev_offsets(grid: &Grid) -> Vec<[i64; 2]> {
    grid.offsets_within((grid.n_per_axis() / 2) as f64)
}

fn offset_length(grid: &Grid, k: [i64; 2]) -> f64 {
    ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt() * grid.spacing()
}

/// `p = 2` through the circular autocorrelation `R`:
/// `Σ_x |f(x+k) - f(x)|² = 2(R(0) - R(k))`, the same lattice sum in
/// `O(N log N)`.
fn seminorm_power_p2(grid: &Grid, values: &[f64], offs: &[[i64; 2]], weights: &[f64]) -> f64 {
    let power: Vec<Complex64> = spectral::forward(grid, values)
        .iter()
        .map(|c| Complex64::new(c.norm_sqr(), 0.0))
        .collect();
    let r = spectral::inverse_real(grid, &power);
    let terms: Vec<f64> = offs
        .iter()
        .zip(weights)
        .map(|(&k, w)| (2.0 * (r[0] - r[grid.shifted(0, k)])).max(0.0) * w)
        .collect();
    pairwise_sum(&terms) * grid.cell_volume() * grid.cell_volume()
}

fn seminorm_power(grid: &Grid, values: &[f64], alpha: f64, p: f64) -> f64 {
    let offs = sobolev_offsets(grid);
    let dim = grid.dim() as f64;
    let weights: Vec<f64> = offs.iter().map(|&k| offset_length(grid, k).powf(-(dim + alpha * p))).collect();
    if p == 2.0 {
        return seminorm_power_p2(grid, values, &offs, &weights);
    }
    let per_site = par_map(grid.len(), |x| {
        let fx = values[x];
        let terms: Vec<f64> = offs
            .iter()
            .zip(&weights)
            .map(|(&k, w)| (values[grid.shifted(x, k)] - fx).abs().powf(p) * w)
            .collect();
        pairwise_sum(&terms)
    });
    pairwise_sum(&per_site) * grid.cell_volume() * grid.cell_volume()
}

/// Gagliardo seminorm `‖f‖_{Ẇ^{α,p}}`, `α ∈ (0,1)`, `p < ∞`.
pub fn sobolev_seminorm(f: &SampledFunction, alpha: f64, p: f64) -> Result<NormResult> {
    check_fraction(alpha, "sobolev_seminorm")?;
    check_p(p)?;
    if p.is_infinite() {
        return Err(Error::InvalidArgument("p = inf is the Hölder seminorm; use holder_seminorm".into()));
    }
    let grid = f.grid();
    Ok(NormResult {
        value: seminorm_power(grid, f.values(), alpha, p).powf(1.0 / p),
        kind: NormKind::Sobolev,
        params: NormParams {
            smoothness: Some(alpha),
            p: Some(p),
            q: None,
        },
        truncation: Truncation {
            samples: Some(sobolev_offsets(grid).len()),
            ..Truncation::offsets(grid)
        },
    })
}

fn holder_of_values(grid: &Grid, values: &[f64], alpha: f64) -> f64 {
    let offs = sobolev_offsets(grid);
    let weights: Vec<f64> = offs.iter().map(|&k| offset_length(grid, k).powf(-alpha)).collect();
    par_max(grid.len(), |x| {
        let fx = values[x];
        offs.iter()
            .zip(&weights)
            .map(|(&k, w)| (values[grid.shifted(x, k)] - fx).abs() * w)
            .fold(0.0, f64::max)
    })
}

/// `‖f‖_{Ċ^α}` as the largest difference quotient over lattice pairs.
pub fn holder_seminorm(f: &SampledFunction, alpha: f64) -> Result<NormResult> {
    check_fraction(alpha, "holder_seminorm")?;
    let grid = f.grid();
    Ok(NormResult {
        value: holder_of_values(grid, f.values(), alpha),
        kind: NormKind::Holder,
        params: NormParams {
            smoothness: Some(alpha),
            p: Some(f64::INFINITY),
            q: None,
        },
        truncation: Truncation::offsets(grid),
    })
}

/// `‖f‖_{Ẇ^{α,p}}` for any `α >= 0`.
///
/// Integer `α = m` gives `‖|D^m f|‖_p` with the pointwise Euclidean
/// magnitude over `|γ| = m`. Otherwise the fractional seminorm of order
/// `α - m` is taken per component `D^γ f` and the components are joined in
/// `ℓ²`. `p = ∞` uses the Hölder form.
pub fn sobolev_norm_general(f: &SampledFunction, alpha: f64, p: f64) -> Result<NormResult> {
    check_p(p)?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("smoothness must be >= 0, got {alpha}")));
    }
    let m = alpha.floor();
    let frac = alpha - m;
    let m = m as usize;
    let grid = *f.grid();
    if frac == 0.0 {
        let mag = spectral::derivative_magnitude(f, m)?;
        let mut r = lp(&mag, p)?;
        r.params.smoothness = Some(alpha);
        if m > 0 {
            r.kind = NormKind::Sobolev;
            r.truncation.method = Some(format!("spectral derivative of order {m}"));
        }
        return Ok(r);
    }
    let comps = spectral::derivative_components(f, m)?;
    let parts: Vec<f64> = comps
        .iter()
        .map(|c| {
            if p.is_infinite() {
                holder_of_values(&grid, c.values(), frac)
            } else {
                seminorm_power(&grid, c.values(), frac, p).powf(1.0 / p)
            }
        })
        .collect();
    let value = parts.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(NormResult {
        value,
        kind: if p.is_infinite() { NormKind::Holder } else { NormKind::Sobolev },
        params: NormParams {
            smoothness: Some(alpha),
            p: Some(p),
            q: None,
        },
        truncation: Truncation {
            method: (m > 0).then(|| format!("spectral derivative of order {m}, l2 over components")),
            samples: Some(sobolev_offsets(&grid).len()),
            ..Truncation::offsets(&grid)
        },
    })
}

/// Mean handling for Besov-type norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MeanConvention {
    /// Work modulo constants: the mean is removed.
    #[default]
    Subtract,
    /// Keep the mean and charge it to the lowest band.
    Raw,
}

/// Per-band `‖φ_j * f‖_p`, ordered by `j`. Under [`MeanConvention::Raw`]
/// the constant mode is added to band `j_min`, where it would sit if the
/// lowest band extended to zero frequency.
pub fn band_norms(f: &SampledFunction, p: f64, bank: &FilterBank, mean: MeanConvention) -> Result<Vec<f64>> {
    check_p(p)?;
    let mut bands = bank.decompose(f)?;
    if mean == MeanConvention::Raw {
        let m = f.mean();
        bands[0].iter_mut().for_each(|v| *v += m);
    }
    let cell = f.grid().cell_volume();
    bands.iter().map(|b| lp_norm_values(b, cell, p)).collect()
}

/// `ℓ^q` join of `2^{js}` times the band norms.
pub fn besov_from_bands(norms: &[f64], j_min: i32, s: f64, q: f64) -> f64 {
    let weighted = norms.iter().enumerate().map(|(i, n)| (s * (j_min + i as i32) as f64).exp2() * n);
    if q.is_infinite() {
        weighted.fold(0.0, f64::max)
    } else {
        let terms: Vec<f64> = weighted.map(|v| v.powf(q)).collect();
        pairwise_sum(&terms).powf(1.0 / q)
    }
}

/// `‖f‖_{Ḃ^s_{p,q}}` over the bank's bands, mean removed.
pub fn besov_norm(f: &SampledFunction, s: f64, p: f64, q: f64, bank: &FilterBank) -> Result<NormResult> {
    besov_norm_with(f, s, p, q, bank, MeanConvention::Subtract)
}

pub fn besov_norm_with(
    f: &SampledFunction,
    s: f64,
    p: f64,
    q: f64,
    bank: &FilterBank,
    mean: MeanConvention,
) -> Result<NormResult> {
    check_p(q)?;
    if !s.is_finite() {
        return Err(Error::InvalidArgument(format!("smoothness must be finite, got {s}")));
    }
    let norms = band_norms(f, p, bank, mean)?;
    Ok(NormResult {
        value: besov_from_bands(&norms, bank.j_min(), s, q),
        kind: NormKind::Besov,
        params: NormParams {
            smoothness: Some(s),
            p: Some(p),
            q: Some(q),
        },
        truncation: Truncation {
            j_min: Some(bank.j_min()),
            j_max: Some(bank.j_max()),
            dropped_fraction: Some(bank.dropped_fraction(f)?),
            mean_subtracted: Some(mean == MeanConvention::Subtract),
            ..Truncation::on(f.grid())
        },
    })
}

/// `sup_ε ε^{-s} ‖φ_ε * f‖_∞` over the family's scales.
pub fn besov_sup_mollifier(f: &SampledFunction, s: f64, family: &MollifierFamily) -> Result<NormResult> {
    besov_sup_mollifier_with(f, s, family, MeanConvention::Subtract)
}

pub fn besov_sup_mollifier_with(
    f: &SampledFunction,
    s: f64,
    family: &MollifierFamily,
    mean: MeanConvention,
) -> Result<NormResult> {
    let k = family.moment_order();
    if !(s < k as f64) {
        return Err(Error::MomentOrderTooLow { s, k });
    }
    let centered;
    let g = if mean == MeanConvention::Subtract {
        let m = f.mean();
        centered = f.map(f.label().to_string(), |v| v - m)?;
        &centered
    } else {
        f
    };
    let sups = family.sup_profile(g)?;
    let eps = family.epsilons();
    let value = sups.iter().zip(eps).map(|(n, e)| e.powf(-s) * n).fold(0.0, f64::max);
    Ok(NormResult {
        value,
        kind: NormKind::BesovSupMollifier,
        params: NormParams {
            smoothness: Some(s),
            p: Some(f64::INFINITY),
            q: Some(f64::INFINITY),
        },
        truncation: Truncation {
            eps_min: eps.last().copied(),
            eps_max: eps.first().copied(),
            mean_subtracted: Some(mean == MeanConvention::Subtract),
            method: Some(format!("mollifier with {k} vanishing moments")),
            samples: Some(eps.len()),
            ..Truncation::on(f.grid())
        },
    })
}

/// Mean oscillation over dyadic cubes of side `n/2^i` cells,
/// `i = 1..log2(n)-2`, anchored every half side with periodic wrap.
pub fn bmo_norm(f: &SampledFunction) -> Result<NormResult> {
    let grid = f.grid();
    let n = grid.n_per_axis();
    let levels = n.trailing_zeros() as usize - 2;
    let vals = f.values();
    let mut best = 0.0f64;
    let mut cubes = 0usize;
    for i in 1..=levels {
        let side = n >> i;
        let step = side / 2;
        let anchors: Vec<usize> = (0..n).step_by(step).collect();
        let corners: Vec<[usize; 2]> = if grid.dim() == 1 {
            anchors.iter().map(|&a| [a, 0]).collect()
        } else {
            anchors.iter().flat_map(|&a| anchors.iter().map(move |&b| [a, b])).collect()
        };
        cubes += corners.len();
        let osc = par_max(corners.len(), |c| {
            let [a, b] = corners[c];
            let idx: Vec<usize> = if grid.dim() == 1 {
                (0..side).map(|t| (a + t) % n).collect()
            } else {
                (0..side)
                    .flat_map(|s| (0..side).map(move |t| ((a + s) % n) * n + (b + t) % n))
                    .collect()
            };
            let inside: Vec<f64> = idx.iter().map(|&x| vals[x]).collect();
            let mean = pairwise_sum(&inside) / inside.len() as f64;
            let dev: Vec<f64> = inside.iter().map(|v| (v - mean).abs()).collect();
            pairwise_sum(&dev) / inside.len() as f64
        });
        best = best.max(osc);
    }
    Ok(NormResult {
        value: best,
        kind: NormKind::Bmo,
        params: NormParams::default(),
        truncation: Truncation {
            h_min: Some((n >> levels) as f64 * grid.spacing()),
            h_max: Some(grid.box_length() / 2.0),
            method: Some("dyadic cubes anchored on the half-side lattice".into()),
            samples: Some(cubes),
            ..Truncation::on(grid)
        },
    })
}

/// Ratio of consecutive `t` nodes in the directional integral.
pub const DIRECTIONAL_RATIO_LOG2: f64 = 1.0 / 8.0;

fn axis_shift(grid: &Grid, values: &[f64], axis: usize, t: f64) -> Vec<f64> {
    let cells = t / grid.spacing();
    let lo = cells.floor();
    let theta = cells - lo;
    let lo = lo as i64;
    let mut off = [0i64; 2];
    (0..grid.len())
        .map(|x| {
            off[axis] = lo;
            let a = values[grid.shifted(x, off)];
            if theta < 1e-12 {
                a
            } else {
                off[axis] = lo + 1;
                (1.0 - theta) * a + theta * values[grid.shifted(x, off)]
            }
        })
        .collect()
}

/// `(Σ_k ∫ ‖Δ_{t e_k} f‖_p^p dt / t^{1+sp})^{1/p}` with `t` on the geometric
/// grid `spacing·2^{i/8} <= box/2`.
pub fn directional_difference_seminorm(f: &SampledFunction, s: f64, p: f64) -> Result<NormResult> {
    check_fraction(s, "directional_difference_seminorm")?;
    check_p(p)?;
    if p.is_infinite() {
        return Err(Error::InvalidArgument("directional seminorm needs finite p".into()));
    }
    let grid = *f.grid();
    let h = grid.spacing();
    let top = grid.box_length() / 2.0;
    let dlog = DIRECTIONAL_RATIO_LOG2 * std::f64::consts::LN_2;
    let ts: Vec<f64> = (0..)
        .map(|i| h * (i as f64 * DIRECTIONAL_RATIO_LOG2).exp2())
        .take_while(|t| *t <= top * (1.0 + 1e-12))
        .collect();
    let cell = grid.cell_volume();
    let mut terms = Vec::with_capacity(ts.len() * grid.dim());
    for axis in 0..grid.dim() {
        for &t in &ts {
            let shifted = axis_shift(&grid, f.values(), axis, t);
            let diff: Vec<f64> = shifted.iter().zip(f.values()).map(|(a, b)| (a - b).abs().powf(p)).collect();
            terms.push(pairwise_sum(&diff) * cell * dlog * t.powf(-s * p));
        }
    }
    Ok(NormResult {
        value: pairwise_sum(&terms).powf(1.0 / p),
        kind: NormKind::SobolevDirectional,
        params: NormParams {
            smoothness: Some(s),
            p: Some(p),
            q: None,
        },
        truncation: Truncation {
            method: Some("geometric t-grid ratio 2^(1/8); grid rolls, linear interpolation off-lattice".into()),
            samples: Some(ts.len()),
            ..Truncation::offsets(&grid)
        },
    })
}
