//! Structural checks: the exact per-band Hölder step, norm equivalences,
//! the lifting bound, the embedding chain and the two-scale mollifier bound.

use serde::{Deserialize, Serialize};

use crate::corpus::SampledFunction;
use crate::error::{Error, Result};
use crate::lpdecomp::{FilterBank, MollifierFamily};
use crate::norms::{besov_norm, besov_sup_mollifier, bmo_norm, directional_difference_seminorm, sobolev_seminorm};
use crate::reduce::pairwise_sum;
use crate::spectral::{multi_indices, spectral_derivative};

/// Relative slack allowed before a band counts as violating.
pub const BAND_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub j: i32,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandHolderReport {
    pub rows: Vec<BandRow>,
    /// `max_j (lhs - rhs) / rhs`, clamped below at 0.
    pub max_violation: f64,
    /// Bands whose excess exceeds [`BAND_TOLERANCE`].
    pub violations: usize,
    pub b0: f64,
}

fn power_sum(v: &[f64], p: f64, cell: f64) -> f64 {
    let terms: Vec<f64> = v.iter().map(|x| x.abs().powf(p)).collect();
    pairwise_sum(&terms) * cell
}

/// Per band `j`: `2^{jα1p1}‖b_j‖_{p1}^{p1} <= 2^{jα2p2}‖b_j‖_{p2}^{p2}·‖f‖_{Ḃ⁰}^{p1-p2}`.
pub fn band_holder_check(
    f: &SampledFunction,
    alpha1: f64,
    p1: f64,
    alpha2: f64,
    p2: f64,
    bank: &FilterBank,
) -> Result<BandHolderReport> {
    let w1 = alpha1 * p1;
    let w2 = alpha2 * p2;
    if !p1.is_finite() || !p2.is_finite() || (w1 - w2).abs() > 1e-12 * w1.abs().max(w2.abs()).max(1.0) {
        return Err(Error::ExponentMismatch(format!(
            "band Hölder step needs alpha1 p1 = alpha2 p2 with finite p, got {w1} and {w2}"
        )));
    }
    if p1 < p2 || p2 < 1.0 {
        return Err(Error::ExponentMismatch(format!("band Hölder step needs p1 >= p2 >= 1, got {p1}, {p2}")));
    }
    let bands = bank.decompose(f)?;
    let cell = f.grid().cell_volume();
    let b0 = bands
        .iter()
        .flat_map(|b| b.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let lift = b0.powf(p1 - p2);
    let mut rows = Vec::with_capacity(bands.len());
    let mut max_violation = 0.0f64;
    let mut violations = 0;
    for (b, j) in bands.iter().zip(bank.bands()) {
        let lhs = (w1 * j as f64).exp2() * power_sum(b, p1, cell);
        let rhs = (w2 * j as f64).exp2() * power_sum(b, p2, cell) * lift;
        let excess = if lhs > rhs {
            if rhs > 0.0 {
                (lhs - rhs) / rhs
            } else {
                f64::INFINITY
            }
        } else {
            0.0
        };
        if excess > BAND_TOLERANCE {
            violations += 1;
        }
        max_violation = max_violation.max(excess);
        rows.push(BandRow { j, lhs, rhs });
    }
    Ok(BandHolderReport {
        rows,
        max_violation,
        violations,
        b0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRatios {
    pub sobolev_over_besov: f64,
    pub directional_over_besov: f64,
    /// Every norm vanishes; both ratios are reported as 0.
    pub degenerate: bool,
}

/// Double-integral and directional seminorms against `Ḃ^s_{p,p}`.
pub fn equivalence_check(f: &SampledFunction, s: f64, p: f64, bank: &FilterBank) -> Result<EquivalenceRatios> {
    let w = sobolev_seminorm(f, s, p)?.value;
    let d = directional_difference_seminorm(f, s, p)?.value;
    let b = besov_norm(f, s, p, p, bank)?.value;
    if b == 0.0 {
        return Ok(EquivalenceRatios {
            sobolev_over_besov: 0.0,
            directional_over_besov: 0.0,
            degenerate: true,
        });
    }
    Ok(EquivalenceRatios {
        sobolev_over_besov: w / b,
        directional_over_besov: d / b,
        degenerate: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftingRatio {
    pub gamma: [usize; 2],
    /// `‖D^γ f‖_{Ḃ^{s-m}} / ‖f‖_{Ḃ^s}`; 0 when `f` has no oscillation.
    pub ratio: f64,
}

/// `‖D^γ f‖_{Ḃ^{s-|γ|}_{∞,∞}} / ‖f‖_{Ḃ^s_{∞,∞}}` for every `|γ| = m`.
pub fn lifting_check(f: &SampledFunction, s: f64, m: usize, bank: &FilterBank) -> Result<Vec<LiftingRatio>> {
    let base = besov_norm(f, s, f64::INFINITY, f64::INFINITY, bank)?.value;
    multi_indices(f.grid().dim(), m)
        .into_iter()
        .map(|gamma| {
            let d = spectral_derivative(f, gamma)?;
            let top = besov_norm(&d, s - m as f64, f64::INFINITY, f64::INFINITY, bank)?.value;
            Ok(LiftingRatio {
                gamma,
                ratio: if base > 0.0 { top / base } else { 0.0 },
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRatios {
    pub b0_over_bmo: f64,
    pub bmo_over_linf: f64,
    pub degenerate: bool,
}

/// `‖f‖_{Ḃ⁰}/‖f‖_{BMO}` and `‖f‖_{BMO}/‖f‖_∞`.
pub fn embedding_chain_check(f: &SampledFunction, bank: &FilterBank) -> Result<EmbeddingRatios> {
    let b0 = besov_norm(f, 0.0, f64::INFINITY, f64::INFINITY, bank)?.value;
    let bmo = bmo_norm(f)?.value;
    let sup = f.sup_norm();
    let degenerate = bmo == 0.0 || sup == 0.0;
    Ok(EmbeddingRatios {
        b0_over_bmo: if bmo > 0.0 { b0 / bmo } else { 0.0 },
        bmo_over_linf: if sup > 0.0 { bmo / sup } else { 0.0 },
        degenerate,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoScaleReport {
    pub max_ratio: f64,
    /// `(ε, δ)` at the maximum.
    pub worst: Option<(f64, f64)>,
    pub pairs: usize,
}

/// `ε^{-α1}‖φ_ε*f‖_∞` against `δ^{α2-α1}‖f‖_{Ḃ^{α2}} + δ^{-(α1+σ)}‖f‖_{Ḃ^{-σ}}`
/// over all pairs of family scales. Both Besov norms use the same family,
/// so the ratio never exceeds 1.
pub fn two_scale_bound_check(
    f: &SampledFunction,
    alpha1: f64,
    alpha2: f64,
    sigma: f64,
    family: &MollifierFamily,
) -> Result<TwoScaleReport> {
    if !(alpha1 < alpha2) || !(sigma >= 0.0) {
        return Err(Error::ConditionViolated(format!(
            "two-scale bound needs alpha1 < alpha2 and sigma >= 0, got {alpha1}, {alpha2}, {sigma}"
        )));
    }
    let top = besov_sup_mollifier(f, alpha2, family)?.value;
    let low = besov_sup_mollifier(f, -sigma, family)?.value;
    let m = f.mean();
    let centered = f.map(f.label().to_string(), |v| v - m)?;
    let sups = family.sup_profile(&centered)?;
    let eps = family.epsilons();
    let mut report = TwoScaleReport {
        max_ratio: 0.0,
        worst: None,
        pairs: 0,
    };
    for (&e, &sup) in eps.iter().zip(&sups) {
        let lhs = e.powf(-alpha1) * sup;
        for &d in eps {
            report.pairs += 1;
            let rhs = d.powf(alpha2 - alpha1) * top + d.powf(-(alpha1 + sigma)) * low;
            let r = if rhs > 0.0 { lhs / rhs } else { 0.0 };
            if r > report.max_ratio {
                report.max_ratio = r;
                report.worst = Some((e, d));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate, reference_corpus, GeneratorSpec};
    use crate::grid::make_grid;
    use crate::lpdecomp::build_mollifiers;
    use std::f64::consts::PI;

    #[test]
    fn band_holder_holds_on_corpus() {
        let c = reference_corpus();
        let bank = FilterBank::new(c.grid).unwrap();
        for f in c.sample().unwrap() {
            for (p1, p2) in [(2.0, 1.0), (4.0, 1.0), (4.0, 2.0)] {
                for a2 in [0.6, 1.0] {
                    let r = band_holder_check(&f, a2 * p2 / p1, p1, a2, p2, &bank).unwrap();
                    assert_eq!(r.violations, 0, "{} {p1} {p2} {a2}: {}", f.label(), r.max_violation);
                }
            }
        }
    }

    #[test]
    fn band_holder_single_mode_closed_form() {
        // cos(ξx) seen by band j with gain a_j: Σ|g|^4 h = 3L/8 a_j^4 and
        // Σ|g|^2 h = L/2 a_j^2, so lhs/rhs = (3/4)(a_j/b0)^2
        let g = make_grid(1, 256, 16.0).unwrap();
        let bank = FilterBank::new(g).unwrap();
        let xi = 2.0 * PI * 8.0 / 16.0;
        let f = SampledFunction::from_fn(g, "mode", |p| (xi * p[0]).cos()).unwrap();
        let r = band_holder_check(&f, 0.5, 4.0, 1.0, 2.0, &bank).unwrap();
        let b0 = bank.bands().map(|j| bank.transfer(j).unwrap()[8]).fold(0.0, f64::max);
        assert!((r.b0 - b0).abs() < 1e-12);
        let mut active = 0;
        for row in &r.rows {
            let a = bank.transfer(row.j).unwrap()[8];
            if a < 1e-6 {
                continue;
            }
            active += 1;
            assert!((row.lhs / row.rhs - 0.75 * (a / b0).powi(2)).abs() < 1e-10, "{row:?}");
            let want = 3.0 * 16.0 / 8.0 * a.powi(4) * (2.0 * row.j as f64).exp2();
            assert!((row.lhs / want - 1.0).abs() < 1e-10);
        }
        assert!(active >= 1);
    }

    #[test]
    fn band_holder_rejects_mismatch() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let bank = FilterBank::new(g).unwrap();
        let f = SampledFunction::zeros(g);
        assert_eq!(band_holder_check(&f, 0.5, 4.0, 1.0, 1.0, &bank).unwrap_err().code(), "exponent-mismatch");
        assert_eq!(band_holder_check(&f, 1.0, 1.0, 0.5, 2.0, &bank).unwrap_err().code(), "exponent-mismatch");
        let r = band_holder_check(&f, 0.5, 4.0, 1.0, 2.0, &bank).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.rows.iter().all(|row| row.lhs == 0.0 && row.rhs == 0.0));
    }

    #[test]
    fn equivalence_is_scale_free_and_degenerate_on_constants() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let bank = FilterBank::new(g).unwrap();
        let f = generate(&GeneratorSpec::gaussian(0.0, 1.0), g).unwrap();
        let a = equivalence_check(&f, 0.5, 2.0, &bank).unwrap();
        let b = equivalence_check(&f.scaled(7.0), 0.5, 2.0, &bank).unwrap();
        assert!((a.sobolev_over_besov / b.sobolev_over_besov - 1.0).abs() < 1e-10);
        assert!((a.directional_over_besov / b.directional_over_besov - 1.0).abs() < 1e-10);
        assert!(a.sobolev_over_besov > 0.1 && a.sobolev_over_besov < 10.0);
        let c = equivalence_check(&SampledFunction::constant(g, 2.0), 0.5, 2.0, &bank).unwrap();
        assert!(c.degenerate);
    }

    #[test]
    fn lifting_single_mode_bounded() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let bank = FilterBank::new(g).unwrap();
        for m in [3.0, 8.0, 20.0] {
            let xi = 2.0 * PI * m / 16.0;
            let f = SampledFunction::from_fn(g, "mode", |p| (xi * p[0]).sin()).unwrap();
            let r = lifting_check(&f, 1.0, 1, &bank).unwrap();
            assert_eq!(r.len(), 1);
            assert!(r[0].ratio > 0.25 && r[0].ratio <= 4.0, "{m}: {}", r[0].ratio);
        }
        let z = lifting_check(&SampledFunction::zeros(g), 1.0, 1, &bank).unwrap();
        assert_eq!(z[0].ratio, 0.0);
    }

    #[test]
    fn embedding_chain_on_step() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let bank = FilterBank::new(g).unwrap();
        let f = generate(&GeneratorSpec::smoothed_step(0.0, 2.0, 1.0), g).unwrap();
        let r = embedding_chain_check(&f, &bank).unwrap();
        assert!(!r.degenerate);
        assert!(r.bmo_over_linf <= 2.0 && r.bmo_over_linf > 0.0);
        assert!(r.b0_over_bmo.is_finite() && r.b0_over_bmo > 0.0);
        let r3 = embedding_chain_check(&f.scaled(3.0), &bank).unwrap();
        assert!((r3.b0_over_bmo / r.b0_over_bmo - 1.0).abs() < 1e-10);
        assert!((r3.bmo_over_linf / r.bmo_over_linf - 1.0).abs() < 1e-10);
        assert!(embedding_chain_check(&SampledFunction::constant(g, 1.0), &bank).unwrap().degenerate);
    }

    #[test]
    fn two_scale_never_exceeds_one() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let fam = build_mollifiers(g, 2, 5).unwrap();
        let f = generate(&GeneratorSpec::wavepacket(0.0, 1.0, 4.0), g).unwrap();
        let r = two_scale_bound_check(&f, 0.3, 0.8, 0.5, &fam).unwrap();
        assert_eq!(r.pairs, 25);
        assert!(r.max_ratio > 0.0 && r.max_ratio <= 1.0 + 1e-12);
        let r3 = two_scale_bound_check(&f.scaled(3.0), 0.3, 0.8, 0.5, &fam).unwrap();
        assert!((r3.max_ratio / r.max_ratio - 1.0).abs() < 1e-10);
        let c = two_scale_bound_check(&SampledFunction::constant(g, 4.0), 0.3, 0.8, 0.5, &fam).unwrap();
        assert_eq!(c.max_ratio, 0.0);
        assert!(two_scale_bound_check(&f, 0.8, 0.3, 0.5, &fam).is_err());
    }
}
