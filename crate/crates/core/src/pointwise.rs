//! Maximal function, the difference functional `G_{α,p}`, and pointwise
//! interpolation bounds evaluated as fields on the grid.
//!
//! Balls are lattice balls `{y : |y| <= r}` including the centre. Radii run
//! over the dyadic set `spacing·2^i <= box/2`, which also serves as the
//! scale set for every supremum.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::SampledFunction;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::lpdecomp::FilterBank;
use crate::norms::besov_norm;
use crate::reduce::{pairwise_sum, par_map};
use crate::spectral;

/// Relative floor below which the right-hand side is not divided by.
pub const RHS_GUARD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Maximal,
    GFunctional,
    BoundLhs,
    BoundRhs,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Ball radii in physical units.
    pub radii: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointwiseField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub kind: FieldKind,
    pub params: FieldParams,
}

impl PointwiseField {
    pub fn max(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(*v))
    }

    /// `‖field‖_{L^p}` with the grid's cell volume.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        crate::corpus::lp_norm_values(&self.values, self.grid.cell_volume(), p)
    }

    /// Writes `x,value` (1D) or `x,y,value` (2D) rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.grid.dim() == 1 {
            w.write_record(["x", "value"])?;
            for (i, v) in self.values.iter().enumerate() {
                w.serialize((self.grid.point(i)[0], v))?;
            }
        } else {
            w.write_record(["x", "y", "value"])?;
            for (i, v) in self.values.iter().enumerate() {
                let [x, y] = self.grid.point(i);
                w.serialize((x, y, v))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Dyadic radii in cells, `2^i <= n/2`.
pub fn dyadic_radii(grid: &Grid) -> Vec<usize> {
    let half = grid.n_per_axis() / 2;
    (0..).map(|i| 1usize << i).take_while(|r| *r <= half).collect()
}

/// Offsets with `1 <= |y| <= n/2` cells sorted by length, then
/// lexicographically, paired with their squared length.
fn sorted_offsets(grid: &Grid) -> Vec<([i64; 2], i64)> {
    let mut offs: Vec<([i64; 2], i64)> = grid
        .offsets_within((grid.n_per_axis() / 2) as f64)
        .into_iter()
        .map(|k| (k, k[0] * k[0] + k[1] * k[1]))
        .collect();
    offs.sort_by_key(|&(k, r2)| (r2, k));
    offs
}

/// For each site, averages of `term(x, y)` over the balls of every radius
/// in `radii_cells` (ascending). The centre contributes `term(x, 0)`.
fn ball_averages<F>(grid: &Grid, radii_cells: &[usize], term: F) -> Vec<Vec<f64>>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let offs = sorted_offsets(grid);
    (0..radii_cells.len())
        .map(|ri| {
            par_map(grid.len(), |x| {
                let r2 = (radii_cells[ri] * radii_cells[ri]) as i64;
                let mut sum = term(x, x);
                let mut count = 1usize;
                for &(k, _) in offs.iter().take_while(|(_, l)| *l <= r2) {
                    sum += term(x, grid.shifted(x, k));
                    count += 1;
                }
                sum / count as f64
            })
        })
        .collect()
}

fn radii_physical(grid: &Grid, cells: &[usize]) -> Vec<f64> {
    cells.iter().map(|&r| r as f64 * grid.spacing()).collect()
}

/// `M f(x)`: largest ball average of `|f|` over the dyadic radii.
pub fn maximal_function(f: &SampledFunction) -> PointwiseField {
    maximal_of_values(f.grid(), f.values())
}

fn maximal_of_values(grid: &Grid, values: &[f64]) -> PointwiseField {
    let radii = dyadic_radii(grid);
    let avgs = ball_averages(grid, &radii, |_, y| values[y].abs());
    let out = (0..grid.len()).map(|x| avgs.iter().map(|a| a[x]).fold(0.0, f64::max)).collect();
    PointwiseField {
        grid: *grid,
        values: out,
        kind: FieldKind::Maximal,
        params: FieldParams {
            radii: radii_physical(grid, &radii),
            ..Default::default()
        },
    }
}

/// Smallest-radius ball average of `|f|`.
pub fn smallest_ball_average(f: &SampledFunction) -> Vec<f64> {
    let v = f.values();
    ball_averages(f.grid(), &[1], |_, y| v[y].abs()).remove(0)
}

/// `G_{α,p} f(x) = sup_ε (avg_{B(0,ε)} |f(x) - f(x-y)|^p / ε^{αp})^{1/p}`.
pub fn g_functional(f: &SampledFunction, alpha: f64, p: f64) -> Result<PointwiseField> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("G functional needs alpha in (0,1], got {alpha}")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("G functional needs p in [1,inf), got {p}")));
    }
    let grid = f.grid();
    let v = f.values();
    let radii = dyadic_radii(grid);
    let avgs = ball_averages(grid, &radii, |x, y| (v[x] - v[y]).abs().powf(p));
    let scale: Vec<f64> = radii.iter().map(|&r| (r as f64 * grid.spacing()).powf(-alpha * p)).collect();
    let out = (0..grid.len())
        .map(|x| {
            avgs.iter()
                .zip(&scale)
                .map(|(a, s)| a[x] * s)
                .fold(0.0, f64::max)
                .powf(1.0 / p)
        })
        .collect();
    Ok(PointwiseField {
        grid: *grid,
        values: out,
        kind: FieldKind::GFunctional,
        params: FieldParams {
            alpha: Some(alpha),
            p: Some(p),
            radii: radii_physical(grid, &radii),
        },
    })
}

/// `∫ (avg_{B(0,2|z|)} |f(x) - f(x+y)|)^{p1} dz / |z|^{n+α1 p1}` over
/// `spacing <= |z| <= box/4`, so every ball fits in half the box.
pub fn averaged_difference_integral(f: &SampledFunction, alpha1: f64, p1: f64) -> PointwiseField {
    let grid = *f.grid();
    let v = f.values();
    let n = grid.n_per_axis() as f64;
    let offs = sorted_offsets(&grid);
    let mut z_sorted: Vec<([i64; 2], i64)> = grid
        .offsets_within(n / 4.0)
        .into_iter()
        .map(|k| (k, k[0] * k[0] + k[1] * k[1]))
        .collect();
    z_sorted.sort_by_key(|&(k, r2)| (r2, k));
    let dim = grid.dim() as f64;
    let h = grid.spacing();
    let weights: Vec<f64> = z_sorted
        .iter()
        .map(|&(_, r2)| ((r2 as f64).sqrt() * h).powf(-(dim + alpha1 * p1)) * grid.cell_volume())
        .collect();
    let values = par_map(grid.len(), |x| {
        let fx = v[x];
        let mut sum = 0.0;
        let mut count = 1usize;
        let mut next = 0usize;
        let mut terms = Vec::with_capacity(z_sorted.len());
        for (&(_, r2), w) in z_sorted.iter().zip(&weights) {
            // ball radius 2|z| in cells, compared squared
            let lim = 4 * r2;
            while next < offs.len() && offs[next].1 <= lim {
                sum += (fx - v[grid.shifted(x, offs[next].0)]).abs();
                count += 1;
                next += 1;
            }
            terms.push((sum / count as f64).powf(p1) * w);
        }
        pairwise_sum(&terms)
    });
    PointwiseField {
        grid,
        values,
        kind: FieldKind::BoundLhs,
        params: FieldParams {
            alpha: Some(alpha1),
            p: Some(p1),
            radii: vec![h, grid.box_length() / 4.0],
        },
    }
}

/// Selects one pointwise estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundId {
    /// `|f| ≲ ‖f‖_{Ḃ^{-s}}^{α/(s+α)} G_{α,p}^{s/(s+α)}`
    #[serde(rename = "eq1.1")]
    Eq1_1,
    /// `|f| ≲ ‖f‖_{Ḃ^{-s}}^{1/(s+1)} M(|Df|)^{s/(s+1)}`
    #[serde(rename = "eq1.1b")]
    Eq1_1b,
    /// averaged difference integral `≲ M(f)^{(α2-α1)p1/α2} G_{α2,p}^{α1 p1/α2}`
    #[serde(rename = "eq1.13")]
    Eq1_13,
    /// averaged difference integral `≲ M(f)^{(1-α1)p1} M(|Df|)^{α1 p1}`
    #[serde(rename = "eq1.23")]
    Eq1_23,
    /// averaged difference integral `≲ G_{α0,p0}^{θ p1} G_{α2,p2}^{(1-θ)p1}`
    #[serde(rename = "eq2.5a")]
    Eq2_5a,
    /// averaged difference integral `≲ G_{α0,p0}^{θ p1} M(|Df|)^{(1-θ)p1}`
    #[serde(rename = "eq2.5")]
    Eq2_5,
}

impl BoundId {
    pub const ALL: [BoundId; 6] = [
        BoundId::Eq1_1,
        BoundId::Eq1_1b,
        BoundId::Eq1_13,
        BoundId::Eq1_23,
        BoundId::Eq2_5a,
        BoundId::Eq2_5,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundId::Eq1_1 => "eq1.1",
            BoundId::Eq1_1b => "eq1.1b",
            BoundId::Eq1_13 => "eq1.13",
            BoundId::Eq1_23 => "eq1.23",
            BoundId::Eq2_5a => "eq2.5a",
            BoundId::Eq2_5 => "eq2.5",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        BoundId::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown bound id '{s}'")))
    }

    /// Reference parameters used by studies and calibration.
    pub fn default_params(&self) -> BoundParams {
        let mut b = BoundParams::default();
        match self {
            BoundId::Eq1_1 => {
                b.s = Some(1.0);
                b.alpha = Some(0.5);
                b.p = Some(2.0);
            }
            BoundId::Eq1_1b => b.s = Some(1.0),
            BoundId::Eq1_13 => {
                b.alpha1 = Some(0.25);
                b.alpha2 = Some(0.75);
                b.p1 = Some(2.0);
                b.p = Some(1.0);
            }
            BoundId::Eq1_23 => {
                b.alpha1 = Some(0.5);
                b.p1 = Some(2.0);
            }
            BoundId::Eq2_5a => {
                b.alpha0 = Some(0.2);
                b.alpha1 = Some(0.5);
                b.alpha2 = Some(0.8);
                b.p0 = Some(2.0);
                b.p2 = Some(2.0);
                b.p1 = Some(2.0);
            }
            BoundId::Eq2_5 => {
                b.alpha0 = Some(0.2);
                b.alpha1 = Some(0.5);
                b.p0 = Some(2.0);
                b.p2 = Some(2.0);
                b.p1 = Some(2.0);
            }
        }
        b
    }
}

/// Exponents of a pointwise bound. Each bound reads the fields it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
}

fn need(v: Option<f64>, name: &str) -> Result<f64> {
    v.ok_or_else(|| Error::MissingExponent(name.into()))
}

fn require(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::ExponentMismatch(what.into()))
    }
}

/// `1/p1 = θ/p0 + (1-θ)/p2` to rounding.
fn check_holder_mix(theta: f64, p0: f64, p1: f64, p2: f64) -> Result<()> {
    let want = theta / p0 + (1.0 - theta) / p2;
    require(
        (1.0 / p1 - want).abs() <= 1e-12 * want.abs().max(1.0),
        &format!("1/p1 = {} but theta/p0 + (1-theta)/p2 = {want}", 1.0 / p1),
    )
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundCheck {
    pub bound: BoundId,
    pub params: BoundParams,
    pub lhs: PointwiseField,
    pub rhs: PointwiseField,
    /// `max lhs/rhs` over guarded sites; 0 when nothing passes the guard.
    pub empirical_c: f64,
    pub excluded_points: usize,
}

/// Largest guarded ratio and the number of excluded sites.
pub fn guarded_ratio(lhs: &[f64], rhs: &[f64]) -> (f64, usize) {
    let top = rhs.iter().fold(0.0f64, |m, v| m.max(*v));
    if top == 0.0 {
        return (0.0, rhs.len());
    }
    let floor = RHS_GUARD * top;
    let mut c = 0.0f64;
    let mut excluded = 0;
    for (l, r) in lhs.iter().zip(rhs) {
        if *r > floor {
            c = c.max(l / r);
        } else {
            excluded += 1;
        }
    }
    (c, excluded)
}

fn grad_maximal(f: &SampledFunction) -> Result<PointwiseField> {
    let d = spectral::derivative_magnitude(f, 1)?;
    Ok(maximal_function(&d))
}

fn product(grid: &Grid, parts: &[(&[f64], f64)], params: FieldParams) -> PointwiseField {
    let values = (0..grid.len())
        .map(|i| parts.iter().map(|(v, e)| v[i].powf(*e)).product())
        .collect();
    PointwiseField {
        grid: *grid,
        values,
        kind: FieldKind::BoundRhs,
        params,
    }
}

/// Evaluates both sides of `bound` on `f` and the empirical constant.
pub fn pointwise_bound_check(
    f: &SampledFunction,
    bound: BoundId,
    params: &BoundParams,
    bank: &FilterBank,
) -> Result<BoundCheck> {
    let grid = *f.grid();
    let rp = FieldParams::default();
    let (lhs, rhs) = match bound {
        BoundId::Eq1_1 | BoundId::Eq1_1b => {
            let s = need(params.s, "s")?;
            require(s > 0.0, "s must be positive")?;
            let (alpha, g) = if bound == BoundId::Eq1_1 {
                let a = need(params.alpha, "alpha")?;
                let p = need(params.p, "p")?;
                require(a > 0.0 && a < 1.0, "alpha must lie in (0,1)")?;
                (a, g_functional(f, a, p)?)
            } else {
                (1.0, grad_maximal(f)?)
            };
            let b = besov_norm(f, -s, f64::INFINITY, f64::INFINITY, bank)?.value;
            let lhs = PointwiseField {
                grid,
                values: f.values().iter().map(|v| v.abs()).collect(),
                kind: FieldKind::BoundLhs,
                params: FieldParams::default(),
            };
            let e = s / (s + alpha);
            let rhs = PointwiseField {
                grid,
                values: g.values.iter().map(|v| b.powf(1.0 - e) * v.powf(e)).collect(),
                kind: FieldKind::BoundRhs,
                params: FieldParams { radii: g.params.radii.clone(), ..g.params.clone() },
            };
            (lhs, rhs)
        }
        BoundId::Eq1_13 => {
            let a1 = need(params.alpha1, "alpha1")?;
            let a2 = need(params.alpha2, "alpha2")?;
            let p1 = need(params.p1, "p1")?;
            let p = params.p.unwrap_or(1.0);
            require(0.0 < a1 && a1 < a2 && a2 < 1.0, "needs 0 < alpha1 < alpha2 < 1")?;
            let m = maximal_function(f);
            let g = g_functional(f, a2, p)?;
            let rhs = product(&grid, &[(&m.values, (a2 - a1) * p1 / a2), (&g.values, a1 * p1 / a2)], rp);
            (averaged_difference_integral(f, a1, p1), rhs)
        }
        BoundId::Eq1_23 => {
            let a1 = need(params.alpha1, "alpha1")?;
            let p1 = need(params.p1, "p1")?;
            require(0.0 < a1 && a1 < 1.0, "needs 0 < alpha1 < 1")?;
            let m = maximal_function(f);
            let md = grad_maximal(f)?;
            let rhs = product(&grid, &[(&m.values, (1.0 - a1) * p1), (&md.values, a1 * p1)], rp);
            (averaged_difference_integral(f, a1, p1), rhs)
        }
        BoundId::Eq2_5a | BoundId::Eq2_5 => {
            let a0 = need(params.alpha0, "alpha0")?;
            let a1 = need(params.alpha1, "alpha1")?;
            let p0 = need(params.p0, "p0")?;
            let p1 = need(params.p1, "p1")?;
            let p2 = need(params.p2, "p2")?;
            let a2 = if bound == BoundId::Eq2_5 {
                require(params.alpha2.is_none_or(|a| a == 1.0), "alpha2 is 1 for this bound")?;
                1.0
            } else {
                need(params.alpha2, "alpha2")?
            };
            require(0.0 < a0 && a0 < a1 && a1 < a2 && a2 <= 1.0, "needs 0 < alpha0 < alpha1 < alpha2 <= 1")?;
            if bound == BoundId::Eq2_5a {
                require(a2 < 1.0, "alpha2 < 1 for this bound")?;
            }
            require(a0 - 1.0 / p0 < a2 - 1.0 / p2, "needs alpha0 - 1/p0 < alpha2 - 1/p2")?;
            let theta = (a2 - a1) / (a2 - a0);
            check_holder_mix(theta, p0, p1, p2)?;
            let g0 = g_functional(f, a0, p0)?;
            let top = if bound == BoundId::Eq2_5a {
                g_functional(f, a2, p2)?
            } else {
                grad_maximal(f)?
            };
            let rhs = product(&grid, &[(&g0.values, theta * p1), (&top.values, (1.0 - theta) * p1)], rp);
            (averaged_difference_integral(f, a1, p1), rhs)
        }
    };
    let (empirical_c, excluded_points) = guarded_ratio(&lhs.values, &rhs.values);
    Ok(BoundCheck {
        bound,
        params: params.clone(),
        lhs,
        rhs,
        empirical_c,
        excluded_points,
    })
}

/// `min_t t^{(α2-α1)p1} G^{p1} + t^{-α1 p1} M^{p1}` over `t` in the dyadic
/// radius set, per site.
pub fn two_term_minimum(m: &PointwiseField, g: &PointwiseField, alpha1: f64, alpha2: f64, p1: f64) -> PointwiseField {
    let ts = &m.params.radii;
    let values = m
        .values
        .iter()
        .zip(&g.values)
        .map(|(mv, gv)| {
            ts.iter()
                .map(|t| t.powf((alpha2 - alpha1) * p1) * gv.powf(p1) + t.powf(-alpha1 * p1) * mv.powf(p1))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    PointwiseField {
        grid: m.grid,
        values,
        kind: FieldKind::BoundRhs,
        params: m.params.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{dilate, generate, GeneratorSpec};
    use crate::grid::make_grid;
    use proptest::prelude::*;

    fn ref_grid() -> Grid {
        make_grid(1, 256, 16.0).unwrap()
    }

    fn gauss() -> SampledFunction {
        generate(&GeneratorSpec::gaussian(0.0, 1.0), ref_grid()).unwrap()
    }

    // Ball averages by a plain loop over all sites.
    fn naive_ball_avg(v: &[f64], x: usize, r: i64) -> f64 {
        let n = v.len() as i64;
        let mut s = 0.0;
        for k in -r..=r {
            s += v[((x as i64 + k).rem_euclid(n)) as usize].abs();
        }
        s / (2 * r + 1) as f64
    }

    #[test]
    fn maximal_of_constant_is_constant() {
        let c = SampledFunction::constant(ref_grid(), -2.5);
        let m = maximal_function(&c);
        assert!(m.values.iter().all(|v| (v - 2.5).abs() < 1e-14));
        assert_eq!(m.params.radii.first(), Some(&0.0625));
        assert_eq!(m.params.radii.last(), Some(&8.0));
    }

    #[test]
    fn maximal_matches_naive_and_dominates_smallest_ball() {
        let f = gauss();
        let m = maximal_function(&f);
        let small = smallest_ball_average(&f);
        for x in [0usize, 17, 128, 200, 255] {
            let want = [1i64, 2, 4, 8, 16, 32, 64, 128]
                .iter()
                .map(|&r| naive_ball_avg(f.values(), x, r))
                .fold(0.0, f64::max);
            assert!((m.values[x] - want).abs() < 1e-13);
        }
        for (a, b) in m.values.iter().zip(&small) {
            assert!(a >= b);
        }
        assert!(m.max() <= f.sup_norm());
    }

    #[test]
    fn maximal_l2_bounded() {
        let f = gauss();
        let m = maximal_function(&f);
        let r = m.lp_norm(2.0).unwrap() / crate::corpus::lp_norm(&f, 2.0).unwrap();
        assert!(r >= 1.0 && r <= 10.0, "{r}");
    }

    #[test]
    fn g_functional_by_hand() {
        let g = make_grid(1, 16, 16.0).unwrap();
        let f = SampledFunction::new(g, (0..16).map(|i| if i == 8 { 1.0 } else { 0.0 }).collect(), "spike", None).unwrap();
        // at the spike every neighbour differs by 1; radius 1 ball has 3 sites
        let gf = g_functional(&f, 0.5, 2.0).unwrap();
        let want = (2.0f64 / 3.0).sqrt();
        assert!((gf.values[8] - want).abs() < 1e-14);
        // next to the spike the radius-1 ball holds one differing site
        assert!((gf.values[9] - (1.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn g_of_constant_vanishes_and_jensen_holds() {
        let c = SampledFunction::constant(ref_grid(), 4.0);
        assert!(g_functional(&c, 0.5, 2.0).unwrap().values.iter().all(|v| *v == 0.0));
        let f = gauss();
        let g1 = g_functional(&f, 0.5, 1.0).unwrap();
        let g2 = g_functional(&f, 0.5, 2.0).unwrap();
        for (a, b) in g1.values.iter().zip(&g2.values) {
            assert!(*a <= b * (1.0 + 1e-12));
        }
        assert!(g_functional(&f, 0.0, 2.0).is_err());
        assert!(g_functional(&f, 0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn g_lp_norm_bounded_by_seminorm() {
        let f = gauss();
        let g = g_functional(&f, 0.5, 2.0).unwrap();
        let s = crate::norms::sobolev_seminorm(&f, 0.5, 2.0).unwrap().value;
        let r = g.lp_norm(2.0).unwrap() / s;
        assert!(r > 0.0 && r < 10.0, "{r}");
    }

    #[test]
    fn averaged_difference_integral_matches_naive() {
        let g = make_grid(1, 32, 8.0).unwrap();
        let f = generate(&GeneratorSpec::gaussian(0.0, 0.5), g).unwrap();
        let v = f.values();
        let (a1, p1) = (0.3, 2.0);
        let lhs = averaged_difference_integral(&f, a1, p1);
        let h = g.spacing();
        for x in [0usize, 10, 16, 25] {
            let mut s = 0.0;
            for z in -8i64..=8 {
                if z == 0 {
                    continue;
                }
                let r = 2 * z.abs();
                let mut acc = 0.0;
                for y in -r..=r {
                    acc += (v[x] - v[((x as i64 + y).rem_euclid(32)) as usize]).abs();
                }
                let avg = acc / (2 * r + 1) as f64;
                s += avg.powf(p1) / ((z.abs() as f64) * h).powf(1.0 + a1 * p1) * h;
            }
            assert!((lhs.values[x] - s).abs() <= 1e-12 * s, "{x}: {} {s}", lhs.values[x]);
        }
    }

    #[test]
    fn zero_function_gives_zero_constant() {
        let g = ref_grid();
        let bank = FilterBank::new(g).unwrap();
        let z = SampledFunction::zeros(g);
        for b in BoundId::ALL {
            let r = pointwise_bound_check(&z, b, &b.default_params(), &bank).unwrap();
            assert_eq!(r.empirical_c, 0.0, "{}", b.as_str());
            assert!(r.lhs.values.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn mismatched_exponents_are_rejected() {
        let g = ref_grid();
        let bank = FilterBank::new(g).unwrap();
        let f = gauss();
        let mut p = BoundId::Eq2_5a.default_params();
        p.p1 = Some(3.0);
        let e = pointwise_bound_check(&f, BoundId::Eq2_5a, &p, &bank).unwrap_err();
        assert_eq!(e.code(), "exponent-mismatch");
        let mut q = BoundId::Eq1_13.default_params();
        q.alpha1 = Some(0.9);
        assert_eq!(pointwise_bound_check(&f, BoundId::Eq1_13, &q, &bank).unwrap_err().code(), "exponent-mismatch");
        let mut m = BoundId::Eq1_1.default_params();
        m.s = None;
        assert_eq!(pointwise_bound_check(&f, BoundId::Eq1_1, &m, &bank).unwrap_err().code(), "missing-exponent");
    }

    #[test]
    fn eq1_1_constant_is_dilation_stable() {
        let g = make_grid(1, 512, 32.0).unwrap();
        let bank = FilterBank::new(g).unwrap();
        let f = generate(&GeneratorSpec::gaussian(0.0, 2.0), g).unwrap();
        let f2 = dilate(&f, 2.0).unwrap();
        let p = BoundId::Eq1_1.default_params();
        let c1 = pointwise_bound_check(&f, BoundId::Eq1_1, &p, &bank).unwrap().empirical_c;
        let c2 = pointwise_bound_check(&f2, BoundId::Eq1_1, &p, &bank).unwrap().empirical_c;
        assert!(c1.is_finite() && c1 > 0.0);
        assert!((c2 / c1 - 1.0).abs() < 0.15, "{c1} {c2}");
    }

    #[test]
    fn two_term_minimum_dominates_the_integral() {
        let f = gauss();
        let (a1, a2, p1) = (0.25, 0.75, 2.0);
        let lhs = averaged_difference_integral(&f, a1, p1);
        let m = maximal_function(&f);
        let g = g_functional(&f, a2, 1.0).unwrap();
        let rhs = two_term_minimum(&m, &g, a1, a2, p1);
        let (c, _) = guarded_ratio(&lhs.values, &rhs.values);
        assert!(c > 0.0 && c < 100.0, "{c}");
    }

    #[test]
    fn csv_rows() {
        let g = make_grid(2, 8, 1.0).unwrap();
        let f = SampledFunction::constant(g, 1.0);
        let m = maximal_function(&f);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("x,y,value\n"));
        assert_eq!(s.lines().count(), 65);
    }

    #[test]
    fn bound_ids_round_trip() {
        for b in BoundId::ALL {
            assert_eq!(BoundId::parse(b.as_str()).unwrap(), b);
            let j = serde_json::to_string(&b).unwrap();
            assert_eq!(j, format!("\"{}\"", b.as_str()));
        }
        assert!(BoundId::parse("eq9").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(6))]

        #[test]
        fn constants_are_scale_free(c in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0], which in 0usize..6) {
            let g = make_grid(1, 128, 16.0).unwrap();
            let bank = FilterBank::new(g).unwrap();
            let f = generate(&GeneratorSpec::wavepacket(0.0, 1.0, 3.0), g).unwrap();
            let b = BoundId::ALL[which];
            let p = b.default_params();
            let c1 = pointwise_bound_check(&f, b, &p, &bank).unwrap().empirical_c;
            let c2 = pointwise_bound_check(&f.scaled(c), b, &p, &bank).unwrap().empirical_c;
            prop_assert!((c1 - c2).abs() <= 1e-10 * c1);
        }
    }
}
