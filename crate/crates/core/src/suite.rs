//! The default verification suite shared by `calibrate`, `verify` and the
//! acceptance tests.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{Constants, Interval};
use crate::corpus::{generate, CorpusFile, GeneratorSpec, SampledFunction};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::inequalities::{
    band_holder_check, embedding_chain_check, equivalence_check, lifting_check, two_scale_bound_check, CaseId,
    EvalContext, Evaluator, InequalityCase, RatioRecord,
};
use crate::norms::{besov_norm, besov_sup_mollifier, lp, sobolev_seminorm};
use crate::pointwise::{g_functional, maximal_function, pointwise_bound_check, BoundId};
use crate::studies::{
    blowup_probe, constant_scan_from, false_blowup_scan, forbidden_case, scaling_sweep, NormSpec, StepSweep,
    StudyReport, Verdict, DEFAULT_LAMBDAS,
};

pub const SCHEMA_VERSION: u32 = 1;

/// `(p1, p2)` pairs of the band Hölder grid; `α1 = α2 p2 / p1`.
pub const BAND_HOLDER_P: [(f64, f64); 3] = [(2.0, 1.0), (4.0, 1.0), (4.0, 2.0)];
pub const BAND_HOLDER_ALPHA2: [f64; 2] = [0.6, 1.0];
pub const EQUIVALENCE_S: [f64; 3] = [0.3, 0.5, 0.7];
pub const EQUIVALENCE_P: [f64; 2] = [1.0, 2.0];
pub const PEETRE_S: [f64; 3] = [-0.5, 0.0, 0.5];
/// `(α1, α2, σ)` of the two-scale mollifier bound.
pub const TWO_SCALE: (f64, f64, f64) = (0.3, 0.8, 0.5);

pub fn equivalence_key(route: &str, s: f64, p: f64) -> String {
    format!("equivalence.{route}.s{s}.p{p}")
}

pub fn peetre_key(s: f64) -> String {
    format!("peetre.s{s}")
}

pub fn pointwise_key(b: BoundId) -> String {
    format!("pointwise.{}", b.as_str())
}

/// One line of `verdicts.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub verdict: Verdict,
    pub reason: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, verdict: Verdict, reason: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.into(),
            verdict,
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub schema_version: u32,
    pub grid_fingerprint: String,
    pub checks: Vec<CheckOutcome>,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
}

impl Verdicts {
    pub fn new(grid_fingerprint: String, checks: Vec<CheckOutcome>) -> Self {
        let count = |v| checks.iter().filter(|c| c.verdict == v).count();
        Verdicts {
            schema_version: SCHEMA_VERSION,
            grid_fingerprint,
            passed: count(Verdict::Pass),
            failed: count(Verdict::Fail),
            inconclusive: count(Verdict::Inconclusive),
            checks,
        }
    }

    pub fn all_ok(&self) -> bool {
        self.failed == 0
    }
}

pub struct SuiteOutcome {
    pub records: Vec<RatioRecord>,
    pub reports: Vec<(String, StudyReport)>,
    pub verdicts: Verdicts,
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    pub scaling: bool,
    pub blowup: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            scaling: true,
            blowup: true,
        }
    }
}

/// One scaling combination: a function on a grid and a norm.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingCombo {
    pub spec: GeneratorSpec,
    pub grid: Grid,
    pub norm: NormSpec,
}

/// Twelve norm/dimension pairs; 1D on `grid(1,2048,16)`, 2D on `grid(2,256,16)`.
pub fn default_scaling_combos() -> Vec<ScalingCombo> {
    let inf = f64::INFINITY;
    let g1 = Grid::new(1, 2048, 16.0).expect("valid grid");
    let g2 = Grid::new(2, 256, 16.0).expect("valid grid");
    let gauss = GeneratorSpec::gaussian(0.0, 1.0);
    let packet = GeneratorSpec::wavepacket(0.0, 1.0, 3.0);
    let mut v = Vec::new();
    for norm in [
        NormSpec::Lp { p: 2.0 },
        NormSpec::Sobolev { s: 0.5, p: 2.0 },
        NormSpec::Holder { s: 0.3 },
        NormSpec::Besov { s: -1.0, p: inf, q: inf },
        NormSpec::SobolevGeneral { s: 1.0, p: 1.0 },
        NormSpec::Directional { s: 0.5, p: 2.0 },
        NormSpec::Bmo,
    ] {
        v.push(ScalingCombo {
            spec: gauss.clone(),
            grid: g1,
            norm,
        });
    }
    // band truncation at the low end biases Ḃ^s_{2,2} of a gaussian
    v.push(ScalingCombo {
        spec: packet,
        grid: g1,
        norm: NormSpec::Besov { s: 0.5, p: 2.0, q: 2.0 },
    });
    for norm in [
        NormSpec::Lp { p: 2.0 },
        NormSpec::Sobolev { s: 0.5, p: 2.0 },
        NormSpec::Besov { s: -1.0, p: inf, q: inf },
        NormSpec::SobolevGeneral { s: 1.0, p: 2.0 },
    ] {
        v.push(ScalingCombo {
            spec: gauss.clone(),
            grid: g2,
            norm,
        });
    }
    v
}

/// Grid of the blow-up sweep: fine enough for widths down to `box/128`.
pub fn blowup_grid() -> Grid {
    Grid::new(1, 1024, 16.0).expect("valid grid")
}

/// The corpus, its samples and the shared bank and mollifier family.
pub struct Suite {
    pub corpus: CorpusFile,
    pub functions: Vec<SampledFunction>,
    pub ctx: EvalContext,
}

impl Suite {
    pub fn new(corpus: CorpusFile) -> Result<Self> {
        let functions = corpus.sample()?;
        let ctx = EvalContext::new(corpus.grid)?;
        Ok(Suite { corpus, functions, ctx })
    }

    pub fn fingerprint(&self) -> String {
        self.corpus.grid.fingerprint()
    }

    fn labels(&self) -> Vec<&str> {
        self.functions.iter().map(|f| f.label()).collect()
    }

    /// Every reference case on every function, case-major.
    pub fn case_results(&self) -> Vec<(CaseId, Vec<Result<RatioRecord>>)> {
        let cases: Vec<InequalityCase> = CaseId::ALL.iter().map(|&id| InequalityCase::reference(id)).collect();
        let per_fn: Vec<Vec<Result<RatioRecord>>> = self
            .functions
            .par_iter()
            .map(|f| {
                let mut ev = Evaluator::new(&self.ctx, f);
                cases.iter().map(|c| ev.evaluate(c)).collect()
            })
            .collect();
        let mut cols: Vec<Vec<Result<RatioRecord>>> = cases.iter().map(|_| Vec::new()).collect();
        for row in per_fn {
            for (col, r) in cols.iter_mut().zip(row) {
                col.push(r);
            }
        }
        cases.iter().map(|c| c.id).zip(cols).collect()
    }

    fn kinds(&self, kinds: &[&str]) -> Vec<&SampledFunction> {
        self.corpus
            .functions
            .iter()
            .zip(&self.functions)
            .filter(|(e, _)| kinds.contains(&e.spec.kind()))
            .map(|(_, f)| f)
            .collect()
    }

    /// Every frozen structural quantity, keyed as in `constants.json`.
    pub fn structural_values(&self) -> Result<BTreeMap<String, Vec<(String, f64)>>> {
        let bank = &self.ctx.bank;
        let fs = &self.functions;
        let all: Vec<&SampledFunction> = fs.iter().collect();
        let tag = |set: &[&SampledFunction], v: Vec<f64>| -> Vec<(String, f64)> {
            set.iter().map(|f| f.label().to_string()).zip(v).collect()
        };
        let mut out: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
        for &s in &EQUIVALENCE_S {
            for &p in &EQUIVALENCE_P {
                let r: Vec<_> = fs.par_iter().map(|f| equivalence_check(f, s, p, bank)).collect::<Result<_>>()?;
                out.insert(
                    equivalence_key("sobolev", s, p),
                    tag(&all, r.iter().map(|x| x.sobolev_over_besov).collect()),
                );
                out.insert(
                    equivalence_key("directional", s, p),
                    tag(&all, r.iter().map(|x| x.directional_over_besov).collect()),
                );
            }
        }
        let smooth = self.kinds(&["gaussian", "wavepacket"]);
        for &s in &PEETRE_S {
            let v = smooth
                .iter()
                .map(|f| {
                    let m = besov_sup_mollifier(f, s, &self.ctx.family)?.value;
                    let b = besov_norm(f, s, f64::INFINITY, f64::INFINITY, bank)?.value;
                    Ok(m / b)
                })
                .collect::<Result<_>>()?;
            out.insert(peetre_key(s), tag(&smooth, v));
        }
        let emb: Vec<_> = fs.iter().map(|f| embedding_chain_check(f, bank)).collect::<Result<_>>()?;
        out.insert("embedding.b0_over_bmo".into(), tag(&all, emb.iter().map(|e| e.b0_over_bmo).collect()));
        out.insert("embedding.bmo_over_linf".into(), tag(&all, emb.iter().map(|e| e.bmo_over_linf).collect()));
        let mut lift = Vec::new();
        for f in fs {
            for r in lifting_check(f, 1.0, 1, bank)? {
                lift.push((format!("{}{:?}", f.label(), r.gamma), r.ratio));
            }
        }
        out.insert("lifting.s1.m1".into(), lift);
        let (a1, a2, sigma) = TWO_SCALE;
        let two = fs
            .iter()
            .map(|f| Ok(two_scale_bound_check(f, a1, a2, sigma, &self.ctx.family)?.max_ratio))
            .collect::<Result<_>>()?;
        out.insert("two_scale".into(), tag(&all, two));
        for b in BoundId::ALL {
            let v = fs
                .par_iter()
                .map(|f| Ok(pointwise_bound_check(f, b, &b.default_params(), bank)?.empirical_c))
                .collect::<Result<_>>()?;
            out.insert(pointwise_key(b), tag(&all, v));
        }
        let maximal = fs
            .iter()
            .map(|f| Ok(maximal_function(f).lp_norm(2.0)? / lp(f, 2.0)?.value))
            .collect::<Result<_>>()?;
        out.insert("maximal.l2".into(), tag(&all, maximal));
        let gauss = self.kinds(&["gaussian"]);
        let g = gauss
            .iter()
            .map(|f| Ok(g_functional(f, 0.5, 2.0)?.lp_norm(2.0)? / sobolev_seminorm(f, 0.5, 2.0)?.value))
            .collect::<Result<_>>()?;
        out.insert("g_functional.a0.5.p2".into(), tag(&gauss, g));
        Ok(out)
    }

    /// Measures every frozen quantity and returns the constants to ship.
    pub fn calibrate(&self) -> Result<Constants> {
        let fp = self.fingerprint();
        let mut c = Constants::default();
        for (id, results) in self.case_results() {
            let ratios: Vec<f64> = results
                .into_iter()
                .map(|r| r.map(|r| r.ratio))
                .collect::<Result<_>>()
                .map_err(|e| e.in_factor(format!("case {id}")))?;
            c.insert(id.as_str(), interval(&ratios, &fp, id.as_str())?);
        }
        for (k, v) in self.structural_values()? {
            let values: Vec<f64> = v.iter().map(|(_, x)| *x).collect();
            let iv = interval(&values, &fp, &k)?;
            c.insert(k, iv);
        }
        Ok(c)
    }

    /// Runs the default suite against `constants`.
    pub fn verify(&self, constants: &Constants, opts: SuiteOptions) -> Result<SuiteOutcome> {
        let fp = self.fingerprint();
        for id in CaseId::ALL {
            constants.get(id.as_str(), &fp)?;
        }
        let mut checks = Vec::new();
        let mut records = Vec::new();
        let mut reports = Vec::new();
        let labels = self.labels();
        for (id, results) in self.case_results() {
            let frozen = constants.get(id.as_str(), &fp)?;
            let mut ratios: Vec<(String, Result<f64>)> = Vec::with_capacity(results.len());
            for (r, l) in results.into_iter().zip(&labels) {
                ratios.push((l.to_string(), r.map(|rec| {
                    let v = rec.ratio;
                    records.push(rec);
                    v
                })));
            }
            let below: Vec<String> = ratios
                .iter()
                .filter_map(|(l, r)| r.as_ref().ok().filter(|v| !frozen.admits(**v)).map(|v| format!("{l}={v:.4}")))
                .collect();
            let case = InequalityCase::reference(id);
            let rep = constant_scan_from(&case, &labels, ratios, Some(frozen.max_ratio));
            let outcome = if rep.verdict == Verdict::Pass && !below.is_empty() {
                CheckOutcome::new(format!("case.{id}"), Verdict::Fail, format!("outside frozen interval: {}", below.join(", ")))
            } else {
                CheckOutcome::new(format!("case.{id}"), rep.verdict, rep.reason.clone())
            };
            checks.push(outcome);
            reports.push((format!("scan_{id}"), rep));
        }
        checks.push(self.band_holder_outcome()?);
        for (k, values) in self.structural_values()? {
            let iv = constants.get(&k, &fp)?;
            let out: Vec<String> = values
                .iter()
                .filter(|(_, v)| v.is_finite() && !iv.admits(*v))
                .map(|(l, v)| format!("{l}={v:.4}"))
                .collect();
            checks.push(if out.is_empty() {
                CheckOutcome::new(k, Verdict::Pass, format!("within [{:.4}, {:.4}] x slack", iv.min_ratio, iv.max_ratio))
            } else {
                CheckOutcome::new(k, Verdict::Fail, format!("outside frozen interval: {}", out.join(", ")))
            });
        }
        if opts.scaling {
            for (i, combo) in default_scaling_combos().into_iter().enumerate() {
                let name = format!("scaling.{}d.{}", combo.grid.dim(), combo.norm.label());
                let ctx = EvalContext::new(combo.grid)?;
                let f = generate(&combo.spec, combo.grid)?;
                match scaling_sweep(&f, combo.norm, &DEFAULT_LAMBDAS, &ctx) {
                    Ok(rep) => {
                        checks.push(CheckOutcome::new(&name, rep.verdict, rep.reason.clone()));
                        reports.push((format!("scaling_{i:02}"), rep));
                    }
                    Err(e) => checks.push(CheckOutcome::new(&name, Verdict::Fail, e.to_string())),
                }
            }
        }
        if opts.blowup {
            let g = blowup_grid();
            let ctx = EvalContext::new(g)?;
            let sweep = StepSweep::default_for(&g);
            let rep = blowup_probe(&forbidden_case(), &sweep, &ctx)?;
            checks.push(CheckOutcome::new("blowup.forbidden", rep.verdict, rep.reason.clone()));
            reports.push(("blowup_forbidden".into(), rep));
            let false_hits: Vec<String> = false_blowup_scan(&sweep, &ctx)?
                .into_iter()
                .filter(|r| r.verdict == Verdict::Pass)
                .map(|r| r.inputs["case_id"].to_string())
                .collect();
            checks.push(if false_hits.is_empty() {
                CheckOutcome::new("blowup.no_false_positive", Verdict::Pass, "no admissible case blows up")
            } else {
                CheckOutcome::new("blowup.no_false_positive", Verdict::Fail, false_hits.join(", "))
            });
        }
        Ok(SuiteOutcome {
            records,
            reports,
            verdicts: Verdicts::new(fp, checks),
        })
    }

    pub fn band_holder_outcome(&self) -> Result<CheckOutcome> {
        let mut worst = 0.0f64;
        let mut violations = 0;
        for f in &self.functions {
            for &(p1, p2) in &BAND_HOLDER_P {
                for &a2 in &BAND_HOLDER_ALPHA2 {
                    let r = band_holder_check(f, a2 * p2 / p1, p1, a2, p2, &self.ctx.bank)?;
                    violations += r.violations;
                    worst = worst.max(r.max_violation);
                }
            }
        }
        Ok(CheckOutcome::new(
            "band_holder",
            if violations == 0 { Verdict::Pass } else { Verdict::Fail },
            format!("{violations} violations, max relative excess {worst:e}"),
        ))
    }
}

fn interval(values: &[f64], fp: &str, key: &str) -> Result<Interval> {
    Interval::of(values, fp).ok_or_else(|| Error::InvalidArgument(format!("no finite measurement for '{key}'")))
}
