//! Discrete Fourier transforms on the periodic grid and spectral
//! differentiation.
//!
//! Transforms are unnormalized forward and `1/N`-normalized inverse, so a
//! bin of the forward transform divided by `N` is the coefficient of the
//! corresponding lattice mode. Plans are cached per thread.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use crate::corpus::SampledFunction;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Share of the spectrum treated as the tail by the band-limit check.
pub const TAIL_BAND: f64 = 0.1;
/// Maximal tail energy fraction a function may carry to be differentiated.
pub const TAIL_TOLERANCE: f64 = 1e-8;

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache
            .entry((n, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    })
}

fn transform(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let n = grid.n_per_axis();
    let fft = plan(n, inverse);
    if grid.dim() == 1 {
        fft.process(data);
    } else {
        // rows are contiguous along axis 1
        fft.process(data);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for b in 0..n {
            for a in 0..n {
                col[a] = data[a * n + b];
            }
            fft.process(&mut col);
            for a in 0..n {
                data[a * n + b] = col[a];
            }
        }
    }
    if inverse {
        let scale = 1.0 / grid.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }
}

pub fn forward(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(grid, &mut data, false);
    data
}

/// Inverse transform, keeping the real part.
pub fn inverse_real(grid: &Grid, spectrum: &[Complex64]) -> Vec<f64> {
    let mut data = spectrum.to_vec();
    transform(grid, &mut data, true);
    data.into_iter().map(|c| c.re).collect()
}

/// Applies a real transfer function bin by bin.
pub fn apply_transfer(grid: &Grid, spectrum: &[Complex64], transfer: &[f64]) -> Vec<f64> {
    let filtered: Vec<Complex64> = spectrum.iter().zip(transfer).map(|(c, t)| c * t).collect();
    inverse_real(grid, &filtered)
}

/// Energy fraction of bins whose largest axis mode exceeds `(1 - TAIL_BAND)`
/// of the Nyquist mode.
pub fn tail_fraction(grid: &Grid, spectrum: &[Complex64]) -> f64 {
    let cut = (1.0 - TAIL_BAND) * (grid.n_per_axis() / 2) as f64;
    let mut total = Vec::with_capacity(spectrum.len());
    let mut tail = Vec::new();
    for (flat, c) in spectrum.iter().enumerate() {
        let e = c.norm_sqr();
        total.push(e);
        let [a, b] = grid.unflatten(flat);
        let m = grid.mode(a).unsigned_abs().max(if grid.dim() == 2 { grid.mode(b).unsigned_abs() } else { 0 });
        if m as f64 > cut {
            tail.push(e);
        }
    }
    let total = crate::reduce::pairwise_sum(&total);
    if total == 0.0 {
        0.0
    } else {
        crate::reduce::pairwise_sum(&tail) / total
    }
}

/// Fails with `not-band-limited` when the spectral tail is too heavy.
pub fn check_band_limited(f: &SampledFunction) -> Result<()> {
    let spec = forward(f.grid(), f.values());
    let t = tail_fraction(f.grid(), &spec);
    if t >= TAIL_TOLERANCE {
        Err(Error::NotBandLimited { tail_fraction: t })
    } else {
        Ok(())
    }
}

/// `D^γ f` for a multi-index `γ = [γ_0, γ_1]` by multiplying the spectrum
/// with `(iξ)^γ`. Odd orders zero the Nyquist bin along the affected axis.
pub fn spectral_derivative(f: &SampledFunction, gamma: [usize; 2]) -> Result<SampledFunction> {
    let grid = *f.grid();
    if grid.dim() == 1 && gamma[1] != 0 {
        return Err(Error::InvalidArgument("second multi-index component on a 1D grid".into()));
    }
    if gamma == [0, 0] {
        return Ok(f.clone());
    }
    let spec = forward(&grid, f.values());
    let tail = tail_fraction(&grid, &spec);
    if tail >= TAIL_TOLERANCE {
        return Err(Error::NotBandLimited { tail_fraction: tail });
    }
    let values = derivative_from_spectrum(&grid, &spec, gamma);
    SampledFunction::new(grid, values, format!("D{:?}{}", gamma, f.label()), None)
}

pub(crate) fn derivative_from_spectrum(grid: &Grid, spec: &[Complex64], gamma: [usize; 2]) -> Vec<f64> {
    let half = grid.n_per_axis() / 2;
    let out: Vec<Complex64> = spec
        .iter()
        .enumerate()
        .map(|(flat, c)| {
            let [a, b] = grid.unflatten(flat);
            let [x, y] = grid.frequency(flat);
            let odd_hit = (gamma[0] % 2 == 1 && a == half) || (grid.dim() == 2 && gamma[1] % 2 == 1 && b == half);
            if odd_hit {
                return Complex64::new(0.0, 0.0);
            }
            let factor = Complex64::new(0.0, x).powu(gamma[0] as u32) * Complex64::new(0.0, y).powu(gamma[1] as u32);
            c * factor
        })
        .collect();
    inverse_real(grid, &out)
}

/// Multi-indices of order `m` in the grid dimension.
pub fn multi_indices(dim: usize, m: usize) -> Vec<[usize; 2]> {
    if dim == 1 {
        vec![[m, 0]]
    } else {
        (0..=m).rev().map(|a| [a, m - a]).collect()
    }
}

/// All components `D^γ f`, `|γ| = m`.
pub fn derivative_components(f: &SampledFunction, m: usize) -> Result<Vec<SampledFunction>> {
    if m == 0 {
        return Ok(vec![f.clone()]);
    }
    check_band_limited(f)?;
    let grid = *f.grid();
    let spec = forward(&grid, f.values());
    multi_indices(grid.dim(), m)
        .into_iter()
        .map(|g| {
            let v = derivative_from_spectrum(&grid, &spec, g);
            SampledFunction::new(grid, v, format!("D{:?}{}", g, f.label()), None)
        })
        .collect()
}

/// Pointwise Euclidean magnitude `|D^m f|` over all `|γ| = m`.
pub fn derivative_magnitude(f: &SampledFunction, m: usize) -> Result<SampledFunction> {
    let comps = derivative_components(f, m)?;
    let n = f.grid().len();
    let values = (0..n)
        .map(|i| comps.iter().map(|c| c.values()[i].powi(2)).sum::<f64>().sqrt())
        .collect();
    SampledFunction::new(*f.grid(), values, format!("|D^{m}|{}", f.label()), None)
}
