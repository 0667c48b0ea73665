//! Dyadic frequency decomposition and compactly supported mollifiers.

use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;

use crate::corpus::SampledFunction;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::reduce::pairwise_sum;
use crate::spectral;

/// Smooth bump on `(1/2, 2)`.
pub fn rho(r: f64) -> f64 {
    if r <= 0.5 || r >= 2.0 {
        0.0
    } else {
        (-1.0 / ((r - 0.5) * (2.0 - r))).exp()
    }
}

/// Radial profile `ρ(r) / Σ_k ρ(2^-k r)`; the sum has at most two live
/// terms on the support of `ρ`.
pub fn profile(r: f64) -> f64 {
    let num = rho(r);
    if num == 0.0 {
        return 0.0;
    }
    let den: f64 = (-2..=2).map(|k| rho(r * 2f64.powi(-k))).sum();
    num / den
}

/// Littlewood-Paley transfer functions on the frequency lattice of a grid.
#[derive(Clone, Debug)]
pub struct FilterBank {
    grid: Grid,
    j_min: i32,
    j_max: i32,
    transfer: Vec<Vec<f64>>,
    partition_residual: f64,
    coverage: Vec<f64>,
}

pub fn build_filter_bank(grid: Grid) -> Result<FilterBank> {
    FilterBank::new(grid)
}

impl FilterBank {
    pub fn new(grid: Grid) -> Result<Self> {
        let norms: Vec<f64> = (0..grid.len()).map(|i| grid.frequency_norm(i)).collect();
        let xi_min = grid.fundamental();
        // smallest j whose open annulus (2^{j-1}, 2^{j+1}) holds a lattice point
        let mut j_min = xi_min.log2().floor() as i32 + 1;
        while 2f64.powi(j_min) > xi_min {
            j_min -= 1;
        }
        while 2f64.powi(j_min + 1) <= xi_min {
            j_min += 1;
        }
        let j_max = grid.nyquist().log2().floor() as i32;
        if j_max - j_min < 3 {
            return Err(Error::GridTooCoarse { bands: j_max - j_min });
        }
        let transfer: Vec<Vec<f64>> = (j_min..=j_max)
            .map(|j| {
                let s = 2f64.powi(-j);
                norms.iter().map(|&r| profile(r * s)).collect()
            })
            .collect();
        let coverage: Vec<f64> = (0..grid.len())
            .map(|i| transfer.iter().map(|t| t[i]).sum())
            .collect();
        let lo = 2f64.powi(j_min);
        let hi = 2f64.powi(j_max);
        let partition_residual = norms
            .iter()
            .zip(&coverage)
            .filter(|(r, _)| **r >= lo && **r <= hi)
            .map(|(_, c)| (c - 1.0).abs())
            .fold(0.0, f64::max);
        Ok(FilterBank { grid, j_min, j_max, transfer, partition_residual, coverage })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn bands(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn partition_residual(&self) -> f64 {
        self.partition_residual
    }

    pub fn transfer(&self, j: i32) -> Result<&[f64]> {
        self.check_band(j)?;
        Ok(&self.transfer[(j - self.j_min) as usize])
    }

    /// `Σ_j φ̂_j` at each bin.
    pub fn coverage(&self) -> &[f64] {
        &self.coverage
    }

    fn check_band(&self, j: i32) -> Result<()> {
        if j < self.j_min || j > self.j_max {
            return Err(Error::BandOutOfRange { j, j_min: self.j_min, j_max: self.j_max });
        }
        Ok(())
    }

    fn check_grid(&self, f: &SampledFunction) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(Error::InvalidArgument("function and filter bank live on different grids".into()));
        }
        Ok(())
    }

    /// Every band of `f` from one forward transform, ordered by `j`.
    pub fn decompose(&self, f: &SampledFunction) -> Result<Vec<Vec<f64>>> {
        self.check_grid(f)?;
        let spec = spectral::forward(&self.grid, f.values());
        Ok(self.transfer.iter().map(|t| spectral::apply_transfer(&self.grid, &spec, t)).collect())
    }

    /// Energy share of `f` (excluding the mean) that no band covers.
    pub fn dropped_fraction(&self, f: &SampledFunction) -> Result<f64> {
        self.check_grid(f)?;
        let spec = spectral::forward(&self.grid, f.values());
        Ok(dropped_fraction(&spec, &self.coverage))
    }

    /// Writes `j,k0,k1,frequency,value` rows for every nonzero transfer entry.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["j", "k0", "k1", "frequency", "value"])?;
        for (idx, t) in self.transfer.iter().enumerate() {
            let j = self.j_min + idx as i32;
            for (flat, v) in t.iter().enumerate() {
                if *v == 0.0 {
                    continue;
                }
                let [a, b] = self.grid.unflatten(flat);
                let k1 = if self.grid.dim() == 2 { self.grid.mode(b) } else { 0 };
                w.serialize((j, self.grid.mode(a), k1, self.grid.frequency_norm(flat), v))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn dropped_fraction(spec: &[Complex64], coverage: &[f64]) -> f64 {
    let total: Vec<f64> = spec.iter().skip(1).map(|c| c.norm_sqr()).collect();
    let lost: Vec<f64> = spec
        .iter()
        .zip(coverage)
        .skip(1)
        .map(|(c, s)| c.norm_sqr() * (1.0 - s).powi(2))
        .collect();
    let t = pairwise_sum(&total);
    if t == 0.0 {
        0.0
    } else {
        pairwise_sum(&lost) / t
    }
}

/// `φ_j * f` for one band.
pub fn band(f: &SampledFunction, j: i32, bank: &FilterBank) -> Result<SampledFunction> {
    bank.check_band(j)?;
    bank.check_grid(f)?;
    let spec = spectral::forward(bank.grid(), f.values());
    let v = spectral::apply_transfer(bank.grid(), &spec, bank.transfer(j)?);
    SampledFunction::new(*f.grid(), v, format!("band{j}({})", f.label()), None)
}

/// Radius of the bump the mother mollifier is built from.
const BUMP_RADIUS: f64 = 0.75;
/// Smallest admissible mollifier support, in grid cells.
pub const MIN_EPSILON_CELLS: f64 = 8.0;

/// Compactly supported kernels `φ_ε(x) = ε^-dim φ(x/ε)` with `k` vanishing
/// moments, sampled on one grid.
#[derive(Clone, Debug, Serialize)]
pub struct MollifierFamily {
    mother: SampledFunction,
    moment_order: usize,
    epsilons: Vec<f64>,
    annulus_floor: f64,
    #[serde(skip)]
    grid: Grid,
    #[serde(skip)]
    transfers: Vec<Vec<Complex64>>,
    #[serde(skip)]
    kernels: Vec<Vec<f64>>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn bump(r: f64) -> f64 {
    let t = r / BUMP_RADIUS;
    if t >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Unnormalized mother: k-th centered difference of the bump along each
/// axis (summed over axes in 2D), step `1/(2k)`, support radius 1.
fn mother_value(p: [f64; 2], k: usize, dim: usize) -> f64 {
    let b = 1.0 / (2 * k) as f64;
    let mut total = 0.0;
    for axis in 0..dim {
        for i in 0..=k {
            let shift = (k as f64 / 2.0 - i as f64) * b;
            let mut q = p;
            q[axis] += shift;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * binomial(k, i) * bump(q[0].hypot(q[1]));
        }
    }
    total
}

/// Builds the family on `grid`: `k` vanishing moments and `count` scales
/// doubling from the smallest admissible one.
///
/// The smallest scale is the first `4k·spacing·2^m` covering at least
/// [`MIN_EPSILON_CELLS`] cells; that keeps every difference shift on whole
/// cells so discrete moments vanish up to rounding.
pub fn build_mollifiers(grid: Grid, k: usize, count: usize) -> Result<MollifierFamily> {
    if k == 0 {
        return Err(Error::InvalidArgument("moment order k must be >= 1".into()));
    }
    if count < 4 {
        return Err(Error::InvalidArgument("at least four scales are required".into()));
    }
    let h = grid.spacing();
    let mut eps_min = 4.0 * k as f64 * h;
    while eps_min < MIN_EPSILON_CELLS * h {
        eps_min *= 2.0;
    }
    let eps_max = eps_min * 2f64.powi(count as i32 - 1);
    if eps_max > grid.box_length() / 2.0 {
        return Err(Error::EpsilonUnderResolved(format!(
            "{count} scales from {eps_min} do not fit the box (largest {eps_max} > {})",
            grid.box_length() / 2.0
        )));
    }
    let dim = grid.dim();
    let raw = |eps: f64| -> Vec<f64> {
        let scale = eps.powi(-(dim as i32));
        (0..grid.len())
            .map(|i| {
                let [x, y] = grid.point(i);
                scale * mother_value([x / eps, y / eps], k, dim)
            })
            .collect()
    };
    let l1_of = |v: &[f64]| pairwise_sum(&v.iter().map(|x| x.abs()).collect::<Vec<_>>()) * grid.cell_volume();
    let base = raw(eps_min);
    if !(l1_of(&base) > 0.0) {
        return Err(Error::DegenerateMollifier("mother vanishes on the grid".into()));
    }
    let mut epsilons = Vec::with_capacity(count);
    let mut transfers = Vec::with_capacity(count);
    let mut kernels = Vec::with_capacity(count);
    let mut floor = f64::INFINITY;
    let mut any_annulus = false;
    for i in (0..count).rev() {
        let eps = eps_min * 2f64.powi(i as i32);
        // each scale carries unit L1 mass on the lattice
        let unscaled = raw(eps);
        let norm = 1.0 / l1_of(&unscaled);
        let samples: Vec<f64> = unscaled.into_iter().map(|v| v * norm).collect();
        let t = kernel_transfer(&grid, &samples);
        for (flat, c) in t.iter().enumerate() {
            let r = grid.frequency_norm(flat);
            if r >= 0.5 / eps && r <= 2.0 / eps {
                any_annulus = true;
                floor = floor.min(c.norm());
            }
        }
        epsilons.push(eps);
        transfers.push(t);
        kernels.push(samples);
    }
    if !any_annulus {
        return Err(Error::DegenerateMollifier("no lattice frequency in any required annulus".into()));
    }
    if !(floor > 0.0) || floor < 1e-300 {
        return Err(Error::DegenerateMollifier(format!("transform vanishes on the annulus (min {floor:e})")));
    }
    let mother_grid = Grid::new(dim, grid.n_per_axis(), grid.box_length() / eps_min)?;
    let norm = 1.0 / l1_of(&base);
    let mother_values: Vec<f64> = base.iter().map(|v| v * norm * eps_min.powi(dim as i32)).collect();
    let mother = SampledFunction::new(mother_grid, mother_values, format!("mollifier_k{k}"), Some(1.0))?;
    Ok(MollifierFamily { mother, moment_order: k, epsilons, annulus_floor: floor, grid, transfers, kernels })
}

/// Transform of a centered kernel, times the cell volume, so that
/// multiplying by it realizes the Riemann-sum convolution.
fn kernel_transfer(grid: &Grid, samples: &[f64]) -> Vec<Complex64> {
    let n = grid.n_per_axis();
    let half = n / 2;
    let wrapped: Vec<f64> = (0..grid.len())
        .map(|flat| {
            let [a, b] = grid.unflatten(flat);
            let a2 = (a + half) % n;
            let b2 = if grid.dim() == 2 { (b + half) % n } else { 0 };
            samples[grid.flatten([a2, b2])]
        })
        .collect();
    let cell = grid.cell_volume();
    spectral::forward(grid, &wrapped).into_iter().map(|c| c * cell).collect()
}

impl MollifierFamily {
    pub fn mother(&self) -> &SampledFunction {
        &self.mother
    }

    pub fn moment_order(&self) -> usize {
        self.moment_order
    }

    /// Scales, largest first.
    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn annulus_floor(&self) -> f64 {
        self.annulus_floor
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn index_of(&self, eps: f64) -> Result<usize> {
        self.epsilons
            .iter()
            .position(|e| (e - eps).abs() <= 1e-12 * e)
            .ok_or(Error::InvalidEpsilon(eps))
    }

    /// Samples of `φ_ε` on the family grid.
    pub fn kernel(&self, eps: f64) -> Result<&[f64]> {
        Ok(&self.kernels[self.index_of(eps)?])
    }

    /// `φ_ε * f` as a circular Riemann-sum convolution.
    pub fn mollify(&self, f: &SampledFunction, eps: f64) -> Result<SampledFunction> {
        let i = self.index_of(eps)?;
        if *f.grid() != self.grid {
            return Err(Error::InvalidArgument("function and mollifier family live on different grids".into()));
        }
        let spec = spectral::forward(&self.grid, f.values());
        let prod: Vec<Complex64> = spec.iter().zip(&self.transfers[i]).map(|(a, b)| a * b).collect();
        let v = spectral::inverse_real(&self.grid, &prod);
        SampledFunction::new(self.grid, v, format!("moll{eps}({})", f.label()), None)
    }

    /// `‖φ_ε * f‖_∞` for every scale, largest scale first.
    pub fn sup_profile(&self, f: &SampledFunction) -> Result<Vec<f64>> {
        if *f.grid() != self.grid {
            return Err(Error::InvalidArgument("function and mollifier family live on different grids".into()));
        }
        let spec = spectral::forward(&self.grid, f.values());
        Ok(self
            .transfers
            .iter()
            .map(|t| {
                let prod: Vec<Complex64> = spec.iter().zip(t).map(|(a, b)| a * b).collect();
                spectral::inverse_real(&self.grid, &prod).iter().fold(0.0f64, |m, v| m.max(v.abs()))
            })
            .collect())
    }
}

pub fn mollify(f: &SampledFunction, eps: f64, family: &MollifierFamily) -> Result<SampledFunction> {
    family.mollify(f, eps)
}

/// Largest `|∫ x^γ φ|` over `|γ| < k` for the family's mother.
pub fn verify_moments(family: &MollifierFamily) -> f64 {
    max_moment(family.mother(), family.moment_order())
}

/// Largest `|∫ x^γ φ|` over `|γ| < k` by direct quadrature.
pub fn max_moment(phi: &SampledFunction, k: usize) -> f64 {
    let g = phi.grid();
    let mut worst = 0.0f64;
    for order in 0..k {
        for gamma in spectral::multi_indices(g.dim(), order) {
            let terms: Vec<f64> = (0..g.len())
                .map(|i| {
                    let [x, y] = g.point(i);
                    x.powi(gamma[0] as i32) * y.powi(gamma[1] as i32) * phi.values()[i]
                })
                .collect();
            worst = worst.max((pairwise_sum(&terms) * g.cell_volume()).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{lp_norm, GeneratorSpec, generate};
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    fn reference() -> Grid {
        make_grid(1, 256, 16.0).unwrap()
    }

    fn mode(g: Grid, m: f64) -> SampledFunction {
        let w = 2.0 * PI * m / g.box_length();
        SampledFunction::from_fn(g, "mode", |p| (w * p[0]).cos()).unwrap()
    }

    #[test]
    fn band_range_on_reference_grid() {
        // lattice frequencies 2πm/16, m = 1..128: the lowest annulus holding
        // one is (1/8, 1/2) (m = 1 at 0.393); π/spacing = 50.27 gives j_max = 5
        let bank = build_filter_bank(reference()).unwrap();
        assert_eq!((bank.j_min(), bank.j_max()), (-2, 5));
        assert!(bank.j_max() - bank.j_min() >= 5);
        assert!(bank.partition_residual() <= 1e-12);
    }

    #[test]
    fn coarse_grid_rejected() {
        let err = build_filter_bank(make_grid(1, 8, 1.0).unwrap()).unwrap_err();
        assert_eq!(err.code(), "grid-too-coarse");
    }

    #[test]
    fn partition_on_other_grids() {
        for g in [make_grid(1, 64, 3.0).unwrap(), make_grid(2, 32, 8.0).unwrap(), make_grid(1, 2048, 16.0).unwrap()] {
            let bank = build_filter_bank(g).unwrap();
            assert!(bank.partition_residual() <= 1e-12);
            for j in bank.bands() {
                for (flat, v) in bank.transfer(j).unwrap().iter().enumerate() {
                    let r = g.frequency_norm(flat);
                    if *v != 0.0 {
                        assert!(r > 2f64.powi(j - 1) && r < 2f64.powi(j + 1));
                    }
                }
            }
        }
    }

    #[test]
    fn single_mode_diagonal_action() {
        let g = reference();
        let bank = build_filter_bank(g).unwrap();
        let f = mode(g, 10.0); // ξ = 3.927, between 2^1 and 2^2
        let xi = 2.0 * PI * 10.0 / 16.0;
        for j in bank.bands() {
            let b = band(&f, j, &bank).unwrap();
            let factor = profile(xi * 2f64.powi(-j));
            for (x, y) in b.values().iter().zip(f.values()) {
                assert!((x - factor * y).abs() < 1e-12);
            }
            if factor == 0.0 {
                assert!(b.sup_norm() <= 1e-12);
            }
        }
        assert_eq!(band(&f, 9, &bank).unwrap_err().code(), "band-out-of-range");
    }

    #[test]
    fn bands_sum_to_mean_free_part() {
        let g = reference();
        let bank = build_filter_bank(g).unwrap();
        let f = generate(&GeneratorSpec::random_trig(3, 1.0, 20), g).unwrap().add(&SampledFunction::constant(g, 0.7)).unwrap();
        let bands = bank.decompose(&f).unwrap();
        let mean = f.mean();
        for i in 0..g.len() {
            let s: f64 = bands.iter().map(|b| b[i]).sum();
            assert!((s - (f.values()[i] - mean)).abs() <= 1e-10 * f.sup_norm());
        }
    }

    #[test]
    fn separated_bands_are_orthogonal() {
        let g = reference();
        let bank = build_filter_bank(g).unwrap();
        let f = generate(&GeneratorSpec::gaussian(0.0, 0.5), g).unwrap();
        for j in bank.bands() {
            let bj = band(&f, j, &bank).unwrap();
            for l in bank.bands().filter(|l| (l - j).abs() >= 2) {
                assert!(band(&bj, l, &bank).unwrap().sup_norm() <= 1e-12 * f.sup_norm());
            }
        }
    }

    #[test]
    fn parseval_bound() {
        let g = reference();
        let bank = build_filter_bank(g).unwrap();
        let f = generate(&GeneratorSpec::random_trig(5, 1.0, 40), g).unwrap();
        let total: f64 = bank
            .decompose(&f)
            .unwrap()
            .iter()
            .map(|b| b.iter().map(|v| v * v).sum::<f64>())
            .sum();
        let own: f64 = f.values().iter().map(|v| (v - f.mean()).powi(2)).sum();
        assert!(total <= (1.0 + 1e-6) * own);
    }

    #[test]
    fn filter_csv_has_header_and_rows() {
        let bank = build_filter_bank(make_grid(1, 64, 8.0).unwrap()).unwrap();
        let mut buf = Vec::new();
        bank.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("j,k0,k1,frequency,value\n"));
        assert!(text.lines().count() > 10);
    }

    #[test]
    fn reference_family_scales() {
        let fam = build_mollifiers(reference(), 2, 4).unwrap();
        assert_eq!(fam.epsilons(), &[4.0, 2.0, 1.0, 0.5]);
        assert!(fam.epsilons().iter().all(|e| *e >= 8.0 * 0.0625));
        assert!(fam.annulus_floor() > 0.0);
        let l1 = lp_norm(fam.mother(), 1.0).unwrap();
        assert!(verify_moments(&fam) <= 1e-10 * l1);
        assert_eq!(fam.mother().effective_support_radius(), Some(1.0));
    }

    #[test]
    fn first_order_kernel_has_zero_integral() {
        let fam = build_mollifiers(reference(), 1, 4).unwrap();
        let m = fam.mother();
        let integral: f64 = m.values().iter().sum::<f64>() * m.grid().cell_volume();
        assert!(integral.abs() < 1e-12);
    }

    #[test]
    fn third_order_moments_by_quadrature() {
        let fam = build_mollifiers(reference(), 3, 4).unwrap();
        let m = fam.mother();
        let l1 = lp_norm(m, 1.0).unwrap();
        for order in 0..3 {
            let mom: f64 = (0..m.grid().len()).map(|i| m.grid().coord(i).powi(order) * m.values()[i]).sum::<f64>()
                * m.grid().spacing();
            assert!(mom.abs() <= 1e-10 * l1, "order {order}: {mom}");
        }
    }

    #[test]
    fn corrupted_mother_fails_moment_check() {
        let fam = build_mollifiers(reference(), 2, 4).unwrap();
        let bad = fam.mother().map("bad", |v| v + 0.1).unwrap();
        assert!(max_moment(&bad, 2) > 1e-3);
    }

    #[test]
    fn kernel_support_and_l1_are_scale_free() {
        let fam = build_mollifiers(reference(), 2, 4).unwrap();
        let g = reference();
        for &eps in fam.epsilons() {
            let k = fam.kernel(eps).unwrap();
            let l1: f64 = k.iter().map(|v| v.abs()).sum::<f64>() * g.spacing();
            assert!((l1 - 1.0).abs() < 1e-12, "eps {eps}: {l1}");
            for (i, v) in k.iter().enumerate() {
                if g.coord(i).abs() > eps {
                    assert_eq!(*v, 0.0);
                }
            }
        }
    }

    #[test]
    fn constants_are_annihilated_and_linearity() {
        let g = reference();
        let fam = build_mollifiers(g, 2, 4).unwrap();
        let c = SampledFunction::constant(g, 3.0);
        for &eps in fam.epsilons() {
            assert!(fam.mollify(&c, eps).unwrap().sup_norm() <= 1e-10 * 3.0);
        }
        let f = generate(&GeneratorSpec::gaussian(0.0, 1.0), g).unwrap();
        let h = generate(&GeneratorSpec::wavepacket(0.5, 0.8, 6.0), g).unwrap();
        let combo = f.scaled(2.0).add(&h.scaled(-0.5)).unwrap();
        let lhs = fam.mollify(&combo, 1.0).unwrap();
        let a = fam.mollify(&f, 1.0).unwrap();
        let b = fam.mollify(&h, 1.0).unwrap();
        for i in 0..g.len() {
            assert!((lhs.values()[i] - (2.0 * a.values()[i] - 0.5 * b.values()[i])).abs() < 1e-12);
        }
        assert_eq!(fam.mollify(&f, 0.75).unwrap_err().code(), "invalid-epsilon");
    }

    #[test]
    fn slow_mode_decays_quadratically() {
        // box 64 puts the lowest mode far inside the small-εξ regime
        let g = make_grid(1, 1024, 64.0).unwrap();
        let fam = build_mollifiers(g, 2, 4).unwrap();
        let f = mode(g, 1.0);
        let sups = fam.sup_profile(&f).unwrap();
        let xs: Vec<f64> = fam.epsilons().iter().map(|e| e.log2()).collect();
        let ys: Vec<f64> = sups.iter().map(|s| s.log2()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!((slope - 2.0).abs() <= 0.1, "slope {slope}");
    }

    #[test]
    fn mollifier_on_two_dimensional_grid() {
        let g = make_grid(2, 128, 16.0).unwrap();
        let fam = build_mollifiers(g, 2, 4).unwrap();
        let l1 = lp_norm(fam.mother(), 1.0).unwrap();
        assert!(verify_moments(&fam) <= 1e-10 * l1);
        assert!(fam.annulus_floor() > 0.0);
    }

    #[test]
    fn argument_checks() {
        assert!(build_mollifiers(reference(), 0, 4).is_err());
        assert!(build_mollifiers(reference(), 2, 3).is_err());
        assert_eq!(build_mollifiers(reference(), 2, 6).unwrap_err().code(), "epsilon-under-resolved");
    }
}
