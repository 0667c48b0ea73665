//! Experiments built on the catalog: scaling fits, constant scans, ratio
//! extremization over parametric families and the blow-up probe.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{dilate, generate, GeneratorSpec, SampledFunction};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::inequalities::{evaluate, CaseId, EvalContext, InequalityCase};
use crate::norms::{
    besov_norm, besov_sup_mollifier, bmo_norm, directional_difference_seminorm, holder_seminorm, lp,
    sobolev_norm_general, sobolev_seminorm, NormResult,
};
use crate::rng::SplitMix64;
use crate::spectral::check_band_limited;

pub const SCHEMA_VERSION: u32 = 1;
/// Allowed gap between fitted and predicted scaling slope.
pub const SLOPE_TOLERANCE: f64 = 0.05;
/// Growth factor a blow-up sweep must reach.
pub const BLOWUP_FACTOR: f64 = 10.0;
/// Widest `max/median` spread a constant scan accepts.
pub const SCAN_SPREAD: f64 = 10.0;
pub use crate::calibration::SLACK;
pub const MIN_SCAN_FUNCTIONS: usize = 5;
/// Extremization trajectories within this `max/min` count as flat.
pub const FLAT_SPREAD: f64 = 1.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Scaling,
    ConstantScan,
    Extremize,
    Blowup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub parameter: f64,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub schema_version: u32,
    pub study_kind: StudyKind,
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub series: Vec<SeriesPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<Fit>,
    pub verdict: Verdict,
    /// Why the verdict was reached, e.g. `"flat"` or the failing rule.
    pub reason: String,
    pub thresholds: BTreeMap<String, f64>,
}

impl StudyReport {
    fn new(kind: StudyKind) -> Self {
        StudyReport {
            schema_version: SCHEMA_VERSION,
            study_kind: kind,
            inputs: BTreeMap::new(),
            series: Vec::new(),
            fit: None,
            verdict: Verdict::Inconclusive,
            reason: String::new(),
            thresholds: BTreeMap::new(),
        }
    }

    fn input(mut self, key: &str, value: impl Serialize) -> Self {
        self.inputs.insert(key.into(), serde_json::to_value(value).expect("inputs serialize"));
        self
    }

    fn threshold(mut self, key: &str, value: f64) -> Self {
        self.thresholds.insert(key.into(), value);
        self
    }

    fn verdict(mut self, v: Verdict, reason: impl Into<String>) -> Self {
        self.verdict = v;
        self.reason = reason.into();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// A single norm with its parameters, as named on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpec {
    Lp { p: f64 },
    /// Double-integral seminorm, `0 < s < 1`.
    Sobolev { s: f64, p: f64 },
    /// Any order: `L^p`, `‖D^m f‖_p`, fractional or Hölder.
    SobolevGeneral { s: f64, p: f64 },
    Directional { s: f64, p: f64 },
    Holder { s: f64 },
    Besov { s: f64, p: f64, q: f64 },
    BesovMollifier { s: f64 },
    Bmo,
}

impl NormSpec {
    pub fn compute(&self, f: &SampledFunction, ctx: &EvalContext) -> Result<NormResult> {
        match *self {
            NormSpec::Lp { p } => lp(f, p),
            NormSpec::Sobolev { s, p } => sobolev_seminorm(f, s, p),
            NormSpec::SobolevGeneral { s, p } => sobolev_norm_general(f, s, p),
            NormSpec::Directional { s, p } => directional_difference_seminorm(f, s, p),
            NormSpec::Holder { s } => holder_seminorm(f, s),
            NormSpec::Besov { s, p, q } => besov_norm(f, s, p, q, &ctx.bank),
            NormSpec::BesovMollifier { s } => besov_sup_mollifier(f, s, &ctx.family),
            NormSpec::Bmo => bmo_norm(f),
        }
    }

    /// `s - dim/p`: the exponent of `λ` in `N(f(λ·)) = λ^{…} N(f)`.
    pub fn predicted_slope(&self, dim: usize) -> f64 {
        let d = dim as f64;
        match *self {
            NormSpec::Lp { p } => -d / p,
            NormSpec::Sobolev { s, p }
            | NormSpec::SobolevGeneral { s, p }
            | NormSpec::Directional { s, p }
            | NormSpec::Besov { s, p, .. } => s - d / p,
            NormSpec::Holder { s } | NormSpec::BesovMollifier { s } => s,
            NormSpec::Bmo => 0.0,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            NormSpec::Lp { p } => format!("L^{p}"),
            NormSpec::Sobolev { s, p } => format!("W^{{{s},{p}}}"),
            NormSpec::SobolevGeneral { s, p } => format!("W^{{{s},{p}}} general"),
            NormSpec::Directional { s, p } => format!("W^{{{s},{p}}} directional"),
            NormSpec::Holder { s } => format!("C^{s}"),
            NormSpec::Besov { s, p, q } => format!("B^{s}_{{{p},{q}}}"),
            NormSpec::BesovMollifier { s } => format!("B^{s} mollifier"),
            NormSpec::Bmo => "BMO".into(),
        }
    }
}

/// Least-squares line through `(x, y)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Fit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Fit {
        slope,
        intercept,
        residual,
    }
}

pub const DEFAULT_LAMBDAS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

/// Fits `log2 N(f(λ·))` against `log2 λ` and compares with `s - dim/p`.
pub fn scaling_sweep(f: &SampledFunction, norm: NormSpec, lambdas: &[f64], ctx: &EvalContext) -> Result<StudyReport> {
    if lambdas.len() < 2 {
        return Err(Error::InvalidArgument("a scaling sweep needs at least two dilations".into()));
    }
    let dilated: Vec<SampledFunction> = lambdas
        .iter()
        .map(|&l| {
            let g = dilate(f, l).map_err(|e| Error::UnresolvableAtScale(format!("lambda {l}: {e}")))?;
            check_band_limited(&g).map_err(|e| Error::UnresolvableAtScale(format!("lambda {l}: {e}")))?;
            Ok(g)
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = dilated
        .par_iter()
        .map(|g| norm.compute(g, ctx).map(|r| r.value))
        .collect::<Result<_>>()?;
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::UnresolvableAtScale(format!("{} vanishes along the sweep", norm.label())));
    }
    let xs: Vec<f64> = lambdas.iter().map(|l| l.log2()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.log2()).collect();
    let fit = fit_line(&xs, &ys);
    let predicted = norm.predicted_slope(f.grid().dim());
    let gap = (fit.slope - predicted).abs();
    let mut rep = StudyReport::new(StudyKind::Scaling)
        .input("function", f.label())
        .input("norm", norm)
        .input("grid", f.grid().fingerprint())
        .threshold("predicted_slope", predicted)
        .threshold("slope_tolerance", SLOPE_TOLERANCE);
    rep.series = lambdas
        .iter()
        .zip(&values)
        .map(|(l, v)| SeriesPoint {
            parameter: *l,
            value: *v,
            label: None,
        })
        .collect();
    rep.fit = Some(fit);
    Ok(if gap <= SLOPE_TOLERANCE {
        rep.verdict(Verdict::Pass, format!("slope {:.4} within {SLOPE_TOLERANCE} of {predicted}", fit.slope))
    } else {
        rep.verdict(Verdict::Fail, format!("slope {:.4} misses {predicted} by {gap:.4}", fit.slope))
    })
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Ratios of `case` over `functions`; per-function errors are recorded in
/// the series label and skipped. `frozen` is the calibrated maximum.
pub fn constant_scan(
    case: &InequalityCase,
    functions: &[SampledFunction],
    ctx: &EvalContext,
    frozen: Option<f64>,
) -> StudyReport {
    let results: Vec<(String, Result<f64>)> = if case.violated.is_empty() {
        functions
            .par_iter()
            .map(|f| (f.label().to_string(), evaluate(case, f, ctx).map(|r| r.ratio)))
            .collect()
    } else {
        Vec::new()
    };
    let labels: Vec<&str> = functions.iter().map(|f| f.label()).collect();
    constant_scan_from(case, &labels, results, frozen)
}

/// [`constant_scan`] over ratios already computed, in corpus order.
pub fn constant_scan_from(
    case: &InequalityCase,
    labels: &[&str],
    results: Vec<(String, Result<f64>)>,
    frozen: Option<f64>,
) -> StudyReport {
    let mut rep = StudyReport::new(StudyKind::ConstantScan)
        .input("case_id", case.id)
        .input("exponents", &case.exponents)
        .input("functions", labels)
        .threshold("max_over_median", SCAN_SPREAD)
        .threshold("min_functions", MIN_SCAN_FUNCTIONS as f64);
    if let Some(b) = frozen {
        rep = rep.threshold("frozen_max", b).threshold("slack", SLACK);
    }
    if !case.violated.is_empty() {
        return rep.verdict(Verdict::Fail, format!("condition-violated: {}", case.violated.join("; ")));
    }
    let mut ok = Vec::new();
    for (i, (label, r)) in results.into_iter().enumerate() {
        match r {
            Ok(v) => {
                ok.push(v);
                rep.series.push(SeriesPoint {
                    parameter: i as f64,
                    value: v,
                    label: Some(label),
                });
            }
            Err(e) => rep.series.push(SeriesPoint {
                parameter: i as f64,
                value: f64::NAN,
                label: Some(format!("{label}: {}", e.code())),
            }),
        }
    }
    if ok.len() < MIN_SCAN_FUNCTIONS {
        return rep.verdict(
            Verdict::Inconclusive,
            format!("{} usable functions, need {MIN_SCAN_FUNCTIONS}", ok.len()),
        );
    }
    let max = ok.iter().cloned().fold(0.0, f64::max);
    let med = median(&ok);
    if !(max <= SCAN_SPREAD * med) {
        return rep.verdict(Verdict::Fail, format!("max/median = {:.3} exceeds {SCAN_SPREAD}", max / med));
    }
    if let Some(b) = frozen {
        if max > b * SLACK {
            return rep.verdict(Verdict::Fail, format!("max {max:.6} above frozen {b:.6} x {SLACK}"));
        }
    }
    rep.verdict(Verdict::Pass, format!("max {max:.6}, max/median {:.3}", max / med))
}

/// One free real parameter of a generator, addressed by its field name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeParam {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

/// A generator with 1 to 3 free parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParametricFamily {
    pub base: GeneratorSpec,
    pub free: Vec<FreeParam>,
}

impl ParametricFamily {
    pub fn new(base: GeneratorSpec, free: Vec<FreeParam>) -> Result<Self> {
        if free.is_empty() || free.len() > 3 {
            return Err(Error::InvalidArgument("a family needs 1 to 3 free parameters".into()));
        }
        let fam = ParametricFamily { base, free };
        for p in &fam.free {
            if !(p.lo < p.hi) {
                return Err(Error::InvalidArgument(format!("empty range for {}", p.name)));
            }
        }
        let mid: Vec<f64> = fam.free.iter().map(|p| 0.5 * (p.lo + p.hi)).collect();
        fam.spec(&mid)?;
        Ok(fam)
    }

    /// The generator with the free fields set to `x`.
    pub fn spec(&self, x: &[f64]) -> Result<GeneratorSpec> {
        let mut v = serde_json::to_value(&self.base)?;
        for (p, val) in self.free.iter().zip(x) {
            let slot = v["params"]
                .get_mut(&p.name)
                .ok_or_else(|| Error::InvalidArgument(format!("{} has no parameter '{}'", self.base.kind(), p.name)))?;
            *slot = serde_json::json!(val);
        }
        Ok(serde_json::from_value(v)?)
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Coordinate-wise golden-section ascent of the ratio over the family.
/// `budget` counts ratio evaluations; `seed` fixes the starting point.
pub fn extremize_ratio(
    case: &InequalityCase,
    family: &ParametricFamily,
    budget: usize,
    seed: u64,
    ctx: &EvalContext,
    frozen: Option<f64>,
) -> Result<StudyReport> {
    let grid = *ctx.grid();
    let mut rep = StudyReport::new(StudyKind::Extremize)
        .input("case_id", case.id)
        .input("family", family)
        .input("budget", budget)
        .input("seed", seed)
        .threshold("flat_spread", FLAT_SPREAD);
    if let Some(b) = frozen {
        rep = rep.threshold("frozen_max", b).threshold("slack", SLACK);
    }
    if budget == 0 {
        return Ok(rep.verdict(Verdict::Inconclusive, "zero budget"));
    }
    let mut rng = SplitMix64::new(seed);
    let mut x: Vec<f64> = family
        .free
        .iter()
        .map(|p| p.lo + (0.25 + 0.5 * rng.next_f64()) * (p.hi - p.lo))
        .collect();
    let mut used = 0usize;
    let mut all = Vec::new();
    let mut ratio_at = |x: &[f64], used: &mut usize, rep: &mut StudyReport| -> Result<f64> {
        *used += 1;
        let f = generate(&family.spec(x)?, grid)?;
        let r = evaluate(case, &f, ctx)?.ratio;
        all.push(r);
        let best = rep.series.last().map_or(r, |p| p.value.max(r));
        rep.series.push(SeriesPoint {
            parameter: *used as f64,
            value: best,
            label: Some(format!("{x:?} -> {r}")),
        });
        Ok(r)
    };
    let mut best = ratio_at(&x, &mut used, &mut rep)?;
    let start = best;
    let per_line = 8usize;
    'outer: while used < budget {
        for (d, p) in family.free.iter().enumerate() {
            let (mut a, mut b) = (p.lo, p.hi);
            let mut c = b - INV_PHI * (b - a);
            let mut e = a + INV_PHI * (b - a);
            let mut probe = |v: f64, used: &mut usize, rep: &mut StudyReport| -> Result<f64> {
                let mut y = x.clone();
                y[d] = v;
                ratio_at(&y, used, rep)
            };
            if used + 2 > budget {
                break 'outer;
            }
            let mut fc = probe(c, &mut used, &mut rep)?;
            let mut fe = probe(e, &mut used, &mut rep)?;
            for _ in 0..per_line {
                if used >= budget {
                    break;
                }
                if fc > fe {
                    b = e;
                    e = c;
                    fe = fc;
                    c = b - INV_PHI * (b - a);
                    fc = probe(c, &mut used, &mut rep)?;
                } else {
                    a = c;
                    c = e;
                    fc = fe;
                    e = a + INV_PHI * (b - a);
                    fe = probe(e, &mut used, &mut rep)?;
                }
            }
            let (v, fv) = if fc > fe { (c, fc) } else { (e, fe) };
            if fv > best {
                best = fv;
                x[d] = v;
            }
        }
        if family.free.len() == 1 {
            break;
        }
    }
    let lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = all.iter().cloned().fold(0.0, f64::max);
    rep = rep.input("best_parameters", &x).input("best_ratio", best);
    if all.len() > 1 && hi <= FLAT_SPREAD * lo {
        return Ok(rep.verdict(Verdict::Pass, "flat"));
    }
    if best <= start && all.len() > 1 && hi <= start {
        return Ok(rep.verdict(Verdict::Inconclusive, "budget exhausted without improvement"));
    }
    Ok(match frozen {
        Some(b) if best <= b * SLACK => rep.verdict(Verdict::Pass, format!("max {best:.6} within frozen {b:.6} x {SLACK}")),
        Some(b) => rep.verdict(Verdict::Fail, format!("max {best:.6} above frozen {b:.6} x {SLACK}")),
        None => rep.verdict(Verdict::Inconclusive, "no frozen bound to compare against"),
    })
}

/// Smallest transition width, in cells, a blow-up sweep may use.
pub const MIN_WIDTH_CELLS: f64 = 8.0;

/// Sharpening family: smoothed steps of fixed plateau with shrinking
/// transition widths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSweep {
    pub center: f64,
    pub half_length: f64,
    pub widths: Vec<f64>,
}

impl StepSweep {
    /// `w = (box/4)·2^{-k}`, `k = 2..=5`.
    pub fn default_for(grid: &Grid) -> Self {
        let q = grid.box_length() / 4.0;
        StepSweep {
            center: 0.0,
            half_length: q * 0.75,
            widths: (2..=5).map(|k| q / (1u32 << k) as f64).collect(),
        }
    }
}

/// Ratio of `case` along the sweep, without any precondition on the case.
pub fn sweep_ratios(case: &InequalityCase, sweep: &StepSweep, ctx: &EvalContext) -> Result<Vec<f64>> {
    let grid = *ctx.grid();
    if sweep.widths.len() < 4 {
        return Err(Error::InvalidArgument("a sharpening sweep needs at least four widths".into()));
    }
    for &w in &sweep.widths {
        if w < MIN_WIDTH_CELLS * grid.spacing() * (1.0 - 1e-12) {
            return Err(Error::UnresolvableAtScale(format!(
                "transition width {w} is below {MIN_WIDTH_CELLS} cells of {}",
                grid.spacing()
            )));
        }
    }
    sweep
        .widths
        .par_iter()
        .map(|&w| {
            let f = generate(&GeneratorSpec::smoothed_step(sweep.center, sweep.half_length, w), grid)?;
            Ok(evaluate(case, &f, ctx)?.ratio)
        })
        .collect()
}

/// Pass iff the ratio grows strictly along the sweep by [`BLOWUP_FACTOR`].
pub fn blowup_verdict(ratios: &[f64]) -> (Verdict, String) {
    let first = ratios[0];
    let last = *ratios.last().expect("nonempty");
    let spread = ratios.iter().cloned().fold(0.0, f64::max) - ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread <= 1e-9 * first.abs() {
        return (Verdict::Inconclusive, "no sharpening: ratio constant along the sweep".into());
    }
    let monotone = ratios.windows(2).all(|w| w[1] > w[0]);
    let growth = last / first;
    if monotone && growth >= BLOWUP_FACTOR {
        (Verdict::Pass, format!("monotone growth x{growth:.3}"))
    } else if monotone {
        (Verdict::Fail, format!("monotone but only x{growth:.3} < {BLOWUP_FACTOR}"))
    } else {
        (Verdict::Fail, format!("not monotone, total x{growth:.3}"))
    }
}

/// Demonstrates failure of an inequality outside its admissible regime.
/// The case must violate one of its side conditions.
pub fn blowup_probe(case: &InequalityCase, sweep: &StepSweep, ctx: &EvalContext) -> Result<StudyReport> {
    if case.violated.is_empty() {
        return Err(Error::ConditionViolationRequired(format!(
            "case {} satisfies every side condition",
            case.id
        )));
    }
    let ratios = sweep_ratios(case, sweep, ctx)?;
    Ok(blowup_report(case, sweep, &ratios, ctx))
}

fn blowup_report(case: &InequalityCase, sweep: &StepSweep, ratios: &[f64], ctx: &EvalContext) -> StudyReport {
    let (v, why) = blowup_verdict(ratios);
    let mut rep = StudyReport::new(StudyKind::Blowup)
        .input("case_id", case.id)
        .input("exponents", &case.exponents)
        .input("violated", &case.violated)
        .input("sweep", sweep)
        .input("grid", ctx.grid().fingerprint())
        .threshold("growth_factor", BLOWUP_FACTOR)
        .threshold("min_width_cells", MIN_WIDTH_CELLS);
    rep.series = sweep
        .widths
        .iter()
        .zip(ratios)
        .map(|(w, r)| SeriesPoint {
            parameter: *w,
            value: *r,
            label: None,
        })
        .collect();
    rep.verdict(v, why)
}

/// `‖f‖_{Ẇ^{1/2,2}}` against `‖f‖_∞^{1/2}‖Df‖_{L¹}^{1/2}`: the interpolation
/// triple `(α0, p0) = (0, ∞)`, `(α2, p2) = (1, 1)`, `θ = 1/2`, completed
/// without enforcing side conditions.
pub fn forbidden_case() -> InequalityCase {
    use crate::inequalities::{complete_exponents, Ext, ExponentSet, Var};
    let given = ExponentSet::new()
        .with(Var::Alpha0, Ext::int(0))
        .and_then(|s| s.with(Var::P0, Ext::Inf))
        .and_then(|s| s.with(Var::Alpha2, Ext::int(1)))
        .and_then(|s| s.with(Var::P2, Ext::int(1)))
        .and_then(|s| s.with(Var::Theta, Ext::ratio(1, 2)))
        .expect("forbidden exponents are well formed");
    complete_exponents(CaseId::Lem3_5, &given).expect("forbidden case completes")
}

/// Blow-up sweeps of every reference catalog case; none may pass.
pub fn false_blowup_scan(sweep: &StepSweep, ctx: &EvalContext) -> Result<Vec<StudyReport>> {
    CaseId::ALL
        .iter()
        .map(|&id| {
            let case = InequalityCase::reference(id);
            let ratios = sweep_ratios(&case, sweep, ctx)?;
            Ok(blowup_report(&case, sweep, &ratios, ctx))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::reference_corpus;
    use crate::grid::make_grid;

    #[test]
    fn predicted_slopes_hand_table() {
        let t = [
            (NormSpec::Lp { p: 2.0 }, 1, -0.5),
            (NormSpec::Lp { p: 2.0 }, 2, -1.0),
            (NormSpec::Sobolev { s: 0.5, p: 2.0 }, 1, 0.0),
            (NormSpec::Sobolev { s: 0.5, p: 2.0 }, 2, -0.5),
            (NormSpec::Holder { s: 0.3 }, 1, 0.3),
            (NormSpec::Holder { s: 0.3 }, 2, 0.3),
            (NormSpec::Besov { s: -1.0, p: f64::INFINITY, q: f64::INFINITY }, 1, -1.0),
            (NormSpec::Besov { s: -1.0, p: f64::INFINITY, q: f64::INFINITY }, 2, -1.0),
            (NormSpec::Besov { s: 0.5, p: 2.0, q: 2.0 }, 1, 0.0),
            (NormSpec::SobolevGeneral { s: 1.0, p: 1.0 }, 1, 0.0),
            (NormSpec::SobolevGeneral { s: 1.0, p: 1.0 }, 2, -1.0),
            (NormSpec::Bmo, 2, 0.0),
        ];
        for (n, d, want) in t {
            assert_eq!(n.predicted_slope(d), want, "{n:?} dim {d}");
        }
    }

    #[test]
    fn fit_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let f = fit_line(&xs, &ys);
        assert!((f.slope + 0.5).abs() < 1e-14 && (f.intercept - 2.0).abs() < 1e-14 && f.residual < 1e-14);
    }

    #[test]
    fn l2_scaling_slope() {
        let g = make_grid(1, 2048, 16.0).unwrap();
        let ctx = EvalContext::new(g).unwrap();
        let f = generate(&GeneratorSpec::gaussian(0.0, 1.0), g).unwrap();
        let r = scaling_sweep(&f, NormSpec::Lp { p: 2.0 }, &DEFAULT_LAMBDAS, &ctx).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.fit.unwrap().slope + 0.5).abs() < 0.01);
    }

    #[test]
    fn unresolved_sweep_is_an_error() {
        let g = make_grid(1, 64, 16.0).unwrap();
        let ctx = EvalContext::new(make_grid(1, 256, 16.0).unwrap()).unwrap();
        let f = generate(&GeneratorSpec::gaussian(0.0, 1.0), g).unwrap();
        let e = scaling_sweep(&f, NormSpec::Lp { p: 2.0 }, &[1.0, 64.0], &ctx).unwrap_err();
        assert_eq!(e.code(), "unresolvable-at-scale");
    }

    #[test]
    fn scan_rules() {
        let c = reference_corpus();
        let ctx = EvalContext::new(c.grid).unwrap();
        let fs = c.sample().unwrap();
        let case = InequalityCase::reference(CaseId::Thm1_2);
        let one = constant_scan(&case, &fs[..1], &ctx, None);
        assert_eq!(one.verdict, Verdict::Inconclusive);
        let all = constant_scan(&case, &fs, &ctx, None);
        assert_eq!(all.verdict, Verdict::Pass, "{}", all.reason);
        assert_eq!(all.series.len(), 10);
        let tight = constant_scan(&case, &fs, &ctx, Some(1e-6));
        assert_eq!(tight.verdict, Verdict::Fail);
        let bad = constant_scan(&forbidden_case(), &fs, &ctx, None);
        assert_eq!(bad.verdict, Verdict::Fail);
        assert!(bad.reason.starts_with("condition-violated"));
    }

    #[test]
    fn family_sets_named_fields() {
        let fam = ParametricFamily::new(
            GeneratorSpec::wavepacket(0.0, 1.0, 4.0),
            vec![FreeParam {
                name: "frequency".into(),
                lo: 1.0,
                hi: 6.0,
            }],
        )
        .unwrap();
        assert_eq!(fam.spec(&[2.5]).unwrap(), GeneratorSpec::wavepacket(0.0, 1.0, 2.5));
        let bad = ParametricFamily::new(
            GeneratorSpec::gaussian(0.0, 1.0),
            vec![FreeParam {
                name: "frequency".into(),
                lo: 1.0,
                hi: 2.0,
            }],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn extremize_flat_deterministic_and_zero_budget() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let ctx = EvalContext::new(g).unwrap();
        let case = InequalityCase::reference(CaseId::Thm1_2);
        let fam = ParametricFamily::new(
            GeneratorSpec::gaussian(0.0, 1.0),
            vec![FreeParam {
                name: "width".into(),
                lo: 0.6,
                hi: 1.2,
            }],
        )
        .unwrap();
        let a = extremize_ratio(&case, &fam, 12, 3, &ctx, None).unwrap();
        assert_eq!(a.verdict, Verdict::Pass);
        assert_eq!(a.reason, "flat");
        let b = extremize_ratio(&case, &fam, 12, 3, &ctx, None).unwrap();
        assert_eq!(a, b);
        assert!(a.series.windows(2).all(|w| w[1].value >= w[0].value));
        let z = extremize_ratio(&case, &fam, 0, 3, &ctx, None).unwrap();
        assert_eq!(z.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn blowup_rules() {
        assert_eq!(blowup_verdict(&[1.0, 2.0, 5.0, 11.0]).0, Verdict::Pass);
        assert_eq!(blowup_verdict(&[1.0, 2.0, 5.0, 9.0]).0, Verdict::Fail);
        assert_eq!(blowup_verdict(&[1.0, 20.0, 5.0, 30.0]).0, Verdict::Fail);
        assert_eq!(blowup_verdict(&[2.0, 2.0, 2.0, 2.0]).0, Verdict::Inconclusive);
        let g = make_grid(1, 256, 16.0).unwrap();
        let ctx = EvalContext::new(g).unwrap();
        let sweep = StepSweep::default_for(&g);
        let e = blowup_probe(&InequalityCase::reference(CaseId::Thm1_2), &sweep, &ctx).unwrap_err();
        assert_eq!(e.code(), "condition-violated-required");
        let e = blowup_probe(&forbidden_case(), &sweep, &ctx).unwrap_err();
        assert_eq!(e.code(), "unresolvable-at-scale");
    }

    #[test]
    fn forbidden_case_shape() {
        let c = forbidden_case();
        assert!(!c.violated.is_empty());
        let r = c.recipe();
        assert_eq!(r.lhs.label(), "W^{1/2,2}");
        let labels: Vec<String> = r.rhs.iter().map(|(f, _)| f.label()).collect();
        assert_eq!(labels, ["L^inf", "D^1 L^1"]);
    }
}
