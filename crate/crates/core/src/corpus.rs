//! Sampled functions, the analytic generators behind the test corpus, and
//! dilation families.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::reduce::pairwise_sum;
use crate::rng::SplitMix64;

/// `sqrt(2 ln 1e10)` padded: a unit Gaussian is below `1e-10` beyond this.
const GAUSS_RADIUS: f64 = 6.8;
/// Beyond `a + 2.5 w` the erf plateau is below `1e-12`.
const STEP_TAIL: f64 = 2.5;

/// Analytic generator for one corpus member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// `exp(-|x-c|^2 / (2 w^2))`.
    Gaussian {
        center: f64,
        #[serde(default)]
        center_y: f64,
        width: f64,
    },
    /// `exp(1 - 1/(1 - r^2))` with `r = |x-c|/w`, zero for `r >= 1`.
    Bump {
        center: f64,
        #[serde(default)]
        center_y: f64,
        width: f64,
    },
    /// Gaussian envelope times `cos(frequency * (x_0 - c))`.
    Wavepacket {
        center: f64,
        #[serde(default)]
        center_y: f64,
        width: f64,
        frequency: f64,
    },
    /// Finite trigonometric sum, coefficient of mode `m` scaled by `|m|^-decay`.
    RandomTrig { seed: u64, decay: f64, modes: usize },
    /// Sign-like profile: `erf(2u/w)` across the center times an erf plateau
    /// of half-length `a`, with `u = x_0 - c`.
    SmoothedStep {
        center: f64,
        #[serde(default)]
        center_y: f64,
        half_length: f64,
        transition: f64,
    },
}

impl GeneratorSpec {
    pub fn gaussian(center: f64, width: f64) -> Self {
        GeneratorSpec::Gaussian { center, center_y: 0.0, width }
    }

    pub fn bump(center: f64, width: f64) -> Self {
        GeneratorSpec::Bump { center, center_y: 0.0, width }
    }

    pub fn wavepacket(center: f64, width: f64, frequency: f64) -> Self {
        GeneratorSpec::Wavepacket { center, center_y: 0.0, width, frequency }
    }

    pub fn random_trig(seed: u64, decay: f64, modes: usize) -> Self {
        GeneratorSpec::RandomTrig { seed, decay, modes }
    }

    pub fn smoothed_step(center: f64, half_length: f64, transition: f64) -> Self {
        GeneratorSpec::SmoothedStep { center, center_y: 0.0, half_length, transition }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GeneratorSpec::Gaussian { .. } => "gaussian",
            GeneratorSpec::Bump { .. } => "bump",
            GeneratorSpec::Wavepacket { .. } => "wavepacket",
            GeneratorSpec::RandomTrig { .. } => "random_trig",
            GeneratorSpec::SmoothedStep { .. } => "smoothed_step",
        }
    }

    fn center(&self) -> f64 {
        match *self {
            GeneratorSpec::Gaussian { center, center_y, .. }
            | GeneratorSpec::Bump { center, center_y, .. }
            | GeneratorSpec::Wavepacket { center, center_y, .. }
            | GeneratorSpec::SmoothedStep { center, center_y, .. } => center.hypot(center_y),
            GeneratorSpec::RandomTrig { .. } => 0.0,
        }
    }

    /// Support radius of the undilated profile, `None` for periodic members.
    pub fn support_radius(&self) -> Option<f64> {
        let c = self.center();
        match *self {
            GeneratorSpec::Gaussian { width, .. } | GeneratorSpec::Wavepacket { width, .. } => {
                Some(c + GAUSS_RADIUS * width)
            }
            GeneratorSpec::Bump { width, .. } => Some(c + width),
            GeneratorSpec::SmoothedStep { half_length, transition, .. } => {
                Some(c + half_length + STEP_TAIL * transition)
            }
            GeneratorSpec::RandomTrig { .. } => None,
        }
    }

    fn validate(&self, grid: &Grid, dilation: f64) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        match *self {
            GeneratorSpec::Gaussian { width, .. } | GeneratorSpec::Bump { width, .. } => {
                positive("width", width)?
            }
            GeneratorSpec::Wavepacket { width, frequency, .. } => {
                positive("width", width)?;
                if !(frequency >= 0.0) || frequency * dilation >= grid.nyquist() {
                    return Err(Error::InvalidArgument(format!(
                        "frequency {} must lie in [0, nyquist {})",
                        frequency * dilation,
                        grid.nyquist()
                    )));
                }
            }
            GeneratorSpec::RandomTrig { decay, modes, .. } => {
                if !(decay >= 0.0) || modes == 0 {
                    return Err(Error::InvalidArgument("random_trig needs decay >= 0 and modes >= 1".into()));
                }
                let top = modes as f64 * dilation;
                if top >= (grid.n_per_axis() / 2) as f64 {
                    return Err(Error::InvalidArgument(format!(
                        "random_trig top mode {top} at or above nyquist mode {}",
                        grid.n_per_axis() / 2
                    )));
                }
            }
            GeneratorSpec::SmoothedStep { half_length, transition, .. } => {
                positive("half_length", half_length)?;
                positive("transition", transition)?;
            }
        }
        if let Some(r) = self.support_radius() {
            let r = r / dilation;
            let limit = grid.box_length() / 2.0;
            if r > limit {
                return Err(Error::SupportOverflow { radius: r, limit });
            }
        }
        Ok(())
    }

    /// Evaluates the undilated profile at a point.
    fn eval(&self, p: [f64; 2], box_length: f64, trig: &[TrigMode]) -> f64 {
        match *self {
            GeneratorSpec::Gaussian { center, center_y, width } => {
                let r2 = (p[0] - center).powi(2) + (p[1] - center_y).powi(2);
                (-r2 / (2.0 * width * width)).exp()
            }
            GeneratorSpec::Bump { center, center_y, width } => {
                let r = (p[0] - center).hypot(p[1] - center_y) / width;
                if r < 1.0 {
                    (1.0 - 1.0 / (1.0 - r * r)).exp()
                } else {
                    0.0
                }
            }
            GeneratorSpec::Wavepacket { center, center_y, width, frequency } => {
                let r2 = (p[0] - center).powi(2) + (p[1] - center_y).powi(2);
                (-r2 / (2.0 * width * width)).exp() * (frequency * (p[0] - center)).cos()
            }
            GeneratorSpec::RandomTrig { .. } => {
                let w = 2.0 * PI / box_length;
                trig.iter()
                    .map(|m| {
                        let phase = w * (m.k[0] * p[0] + m.k[1] * p[1]);
                        m.a * phase.cos() + m.b * phase.sin()
                    })
                    .sum()
            }
            GeneratorSpec::SmoothedStep { center, center_y, half_length, transition } => {
                let u = p[0] - center;
                let r = u.hypot(p[1] - center_y);
                let sign = libm::erf(2.0 * u / transition);
                let plateau = 0.5 * libm::erfc(2.0 * (r - half_length) / transition);
                sign * plateau
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct TrigMode {
    k: [f64; 2],
    a: f64,
    b: f64,
}

/// Mode table for `random_trig`: coefficients drawn in a fixed order from
/// SplitMix64, `a` then `b` per mode. In 1D modes run `m = 1..=M`; in 2D
/// over the half plane `m2 = 0..=M` (outer), `m1 = -M..=M` (inner), keeping
/// `m2 > 0` or `m2 == 0 && m1 > 0`.
fn trig_modes(seed: u64, decay: f64, modes: usize, dim: usize) -> Vec<TrigMode> {
    let mut rng = SplitMix64::new(seed);
    let m = modes as i64;
    let mut out = Vec::new();
    let mut push = |k1: i64, k2: i64, rng: &mut SplitMix64| {
        let norm = ((k1 * k1 + k2 * k2) as f64).sqrt();
        let scale = norm.powf(-decay);
        let a = rng.next_signed() * scale;
        let b = rng.next_signed() * scale;
        out.push(TrigMode { k: [k1 as f64, k2 as f64], a, b });
    };
    if dim == 1 {
        for k in 1..=m {
            push(k, 0, &mut rng);
        }
    } else {
        for k2 in 0..=m {
            for k1 in -m..=m {
                if k2 > 0 || k1 > 0 {
                    push(k1, k2, &mut rng);
                }
            }
        }
    }
    out
}

/// Provenance that lets a sampled function be regenerated at another scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub spec: GeneratorSpec,
    pub dilation: f64,
    pub amplitude: f64,
}

/// Real samples of a function on a periodic grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<f64>,
    label: String,
    effective_support_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<Source>,
}

impl SampledFunction {
    /// Wraps raw samples, checking finiteness and the declared support.
    pub fn new(grid: Grid, values: Vec<f64>, label: impl Into<String>, support: Option<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite sample at index {bad}")));
        }
        if let Some(r) = support {
            if !(r > 0.0) {
                return Err(Error::InvalidArgument("support radius must be positive".into()));
            }
            let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (i, v) in values.iter().enumerate() {
                let [x, y] = grid.point(i);
                if x.hypot(y) > r && v.abs() >= 1e-10 * peak && peak > 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "value {v:e} at |x|={} outside declared support radius {r}",
                        x.hypot(y)
                    )));
                }
            }
        }
        Ok(SampledFunction {
            grid,
            values,
            label: label.into(),
            effective_support_radius: support,
            source: None,
        })
    }

    /// Samples a closure at every grid point.
    pub fn from_fn(grid: Grid, label: impl Into<String>, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        SampledFunction::new(grid, values, label, None)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        SampledFunction {
            grid,
            values: vec![c; grid.len()],
            label: format!("const({c})"),
            effective_support_radius: None,
            source: None,
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn effective_support_radius(&self) -> Option<f64> {
        self.effective_support_radius
    }

    pub fn source(&self) -> Option<&Source> {
        self.source.as_ref()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `c * f`, keeping provenance so dilation still regenerates exactly.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out.label = format!("{}*{c}", self.label);
        if c == 0.0 {
            out.effective_support_radius = None;
        }
        if let Some(src) = out.source.as_mut() {
            src.amplitude *= c;
        }
        out
    }

    /// Pointwise sum; provenance is dropped.
    pub fn add(&self, other: &SampledFunction) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument("grids differ".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        let support = match (self.effective_support_radius, other.effective_support_radius) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        SampledFunction::new(self.grid, values, format!("{}+{}", self.label, other.label), support)
    }

    /// Replaces the samples, keeping grid and label; support and provenance are dropped.
    pub fn map(&self, label: impl Into<String>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        SampledFunction::new(self.grid, values, label, None)
    }

    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }
}

fn sample_spec(spec: &GeneratorSpec, grid: Grid, dilation: f64, amplitude: f64, label: String) -> Result<SampledFunction> {
    spec.validate(&grid, dilation)?;
    let trig = match *spec {
        GeneratorSpec::RandomTrig { seed, decay, modes } => trig_modes(seed, decay, modes, grid.dim()),
        _ => Vec::new(),
    };
    let values: Vec<f64> = (0..grid.len())
        .map(|i| {
            let [x, y] = grid.point(i);
            amplitude * spec.eval([dilation * x, dilation * y], grid.box_length(), &trig)
        })
        .collect();
    let support = if amplitude == 0.0 {
        None
    } else {
        spec.support_radius().map(|r| r / dilation)
    };
    let mut f = SampledFunction::new(grid, values, label, support)?;
    f.source = Some(Source { spec: spec.clone(), dilation, amplitude });
    Ok(f)
}

/// Samples a generator on the grid. Deterministic in `(spec, grid)`.
pub fn generate(spec: &GeneratorSpec, grid: Grid) -> Result<SampledFunction> {
    sample_spec(spec, grid, 1.0, 1.0, spec.kind().to_string())
}

/// `generate` with an explicit label.
pub fn generate_labeled(spec: &GeneratorSpec, grid: Grid, label: &str) -> Result<SampledFunction> {
    sample_spec(spec, grid, 1.0, 1.0, label.to_string())
}

fn power_of_two_exponent(lambda: f64) -> Option<i32> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return None;
    }
    let e = lambda.log2().round();
    (2f64.powi(e as i32) == lambda).then_some(e as i32)
}

/// `f_λ(x) = f(λx)` on the same grid.
///
/// Functions with analytic provenance are regenerated exactly. Otherwise
/// only `λ >= 1` is possible, by index-stride resampling; samples whose
/// preimage leaves the box are zeroed when a support radius is declared.
pub fn dilate(f: &SampledFunction, lambda: f64) -> Result<SampledFunction> {
    let e = power_of_two_exponent(lambda).ok_or(Error::UnsupportedDilation(lambda))?;
    if e == 0 {
        return Ok(f.clone());
    }
    let label = format!("{}@x{lambda}", f.label);
    if let Some(src) = &f.source {
        return sample_spec(&src.spec, f.grid, src.dilation * lambda, src.amplitude, label);
    }
    if let Some(r) = f.effective_support_radius {
        let limit = f.grid.box_length() / 2.0;
        if r / lambda > limit {
            return Err(Error::SupportOverflow { radius: r / lambda, limit });
        }
    }
    if e < 0 {
        return Err(Error::InvalidArgument(
            "contraction of the argument needs an analytic source".into(),
        ));
    }
    let g = f.grid;
    let n = g.n_per_axis() as i64;
    let half = n / 2;
    let step = lambda as i64;
    let map_axis = |i: usize| -> (usize, bool) {
        let t = step * (i as i64 - half);
        ((t + half).rem_euclid(n) as usize, t.abs() < half)
    };
    let values = (0..g.len())
        .map(|flat| {
            let [a, b] = g.unflatten(flat);
            let (a2, ina) = map_axis(a);
            let (b2, inb) = if g.dim() == 2 { map_axis(b) } else { (0, true) };
            let inside = ina && inb;
            if f.effective_support_radius.is_some() && !inside {
                0.0
            } else {
                f.values[g.flatten([a2, b2])]
            }
        })
        .collect();
    let support = f.effective_support_radius.map(|r| r / lambda);
    SampledFunction::new(g, values, label, support)
}

/// Riemann-sum `L^p` norm; `p = ∞` gives the max.
pub fn lp_norm(f: &SampledFunction, p: f64) -> Result<f64> {
    lp_norm_values(f.values(), f.grid().cell_volume(), p)
}

pub(crate) fn lp_norm_values(values: &[f64], cell: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p must be in [1, inf], got {p}")));
    }
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    let terms: Vec<f64> = values.iter().map(|v| v.abs().powf(p)).collect();
    Ok((pairwise_sum(&terms) * cell).powf(1.0 / p))
}

/// One member of a corpus file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    #[serde(flatten)]
    pub spec: GeneratorSpec,
    pub label: String,
}

/// On-disk corpus: `{"schema_version", "grid", "functions": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusFile {
    pub schema_version: u32,
    pub grid: Grid,
    pub functions: Vec<CorpusEntry>,
}

impl CorpusFile {
    pub fn new(grid: Grid, functions: Vec<CorpusEntry>) -> Self {
        CorpusFile { schema_version: 1, grid, functions }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: CorpusFile = serde_json::from_str(s)?;
        if c.schema_version != 1 {
            return Err(Error::InvalidArgument(format!(
                "unsupported corpus schema_version {}",
                c.schema_version
            )));
        }
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("corpus serializes")
    }

    /// Samples every member.
    pub fn sample(&self) -> Result<Vec<SampledFunction>> {
        self.functions
            .iter()
            .map(|e| generate_labeled(&e.spec, self.grid, &e.label))
            .collect()
    }

    pub fn get(&self, label: &str) -> Result<SampledFunction> {
        let e = self
            .functions
            .iter()
            .find(|e| e.label == label)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown function label '{label}'")))?;
        generate_labeled(&e.spec, self.grid, &e.label)
    }
}

/// The ten-member reference corpus on `grid(1, 256, 16)`: two each of
/// gaussian, bump, wavepacket, random_trig and smoothed_step.
pub fn reference_corpus() -> CorpusFile {
    let grid = Grid::new(1, 256, 16.0).expect("reference grid is valid");
    let e = |spec: GeneratorSpec, label: &str| CorpusEntry { spec, label: label.to_string() };
    CorpusFile::new(
        grid,
        vec![
            e(GeneratorSpec::gaussian(0.0, 1.0), "gauss_w1"),
            e(GeneratorSpec::gaussian(0.5, 0.7), "gauss_w07"),
            e(GeneratorSpec::bump(0.0, 4.0), "bump_w4"),
            e(GeneratorSpec::bump(-0.5, 5.0), "bump_w5"),
            e(GeneratorSpec::wavepacket(0.0, 1.0, 4.0), "packet_f4"),
            e(GeneratorSpec::wavepacket(0.5, 0.8, 6.0), "packet_f6"),
            e(GeneratorSpec::random_trig(7, 2.0, 12), "trig_s7"),
            e(GeneratorSpec::random_trig(11, 1.5, 12), "trig_s11"),
            e(GeneratorSpec::smoothed_step(0.0, 2.0, 1.0), "step_w1"),
            e(GeneratorSpec::smoothed_step(0.0, 3.0, 0.5), "step_w05"),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use proptest::prelude::*;

    fn g256() -> Grid {
        make_grid(1, 256, 16.0).unwrap()
    }

    #[test]
    fn gaussian_closed_form() {
        let g = g256();
        let f = generate(&GeneratorSpec::gaussian(0.0, 1.0), g).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            let x = g.coord(i);
            assert!((v - (-x * x / 2.0).exp()).abs() < 1e-15);
        }
        assert_eq!(f.values()[128], 1.0);
        assert_eq!(f.sup_norm(), 1.0);
        assert!(f.effective_support_radius().is_some());
    }

    #[test]
    fn wavepacket_is_one_at_origin() {
        let f = generate(&GeneratorSpec::wavepacket(0.0, 1.0, 2.0 * PI), g256()).unwrap();
        assert_eq!(f.values()[128], 1.0);
        let x = g256().coord(140);
        assert!((f.values()[140] - (-x * x / 2.0).exp() * (2.0 * PI * x).cos()).abs() < 1e-15);
    }

    #[test]
    fn random_trig_is_bit_reproducible() {
        let spec = GeneratorSpec::random_trig(7, 2.0, 12);
        let a = generate(&spec, g256()).unwrap();
        let b = generate(&spec, g256()).unwrap();
        assert_eq!(a.values(), b.values());
        assert!(a.effective_support_radius().is_none());
        let c = generate(&GeneratorSpec::random_trig(8, 2.0, 12), g256()).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn random_trig_mean_is_zero() {
        let f = generate(&GeneratorSpec::random_trig(3, 1.0, 10), g256()).unwrap();
        assert!(f.mean().abs() < 1e-14);
    }

    #[test]
    fn support_overflow_and_nyquist() {
        let g = g256();
        let err = generate(&GeneratorSpec::gaussian(0.0, 2.0), g).unwrap_err();
        assert_eq!(err.code(), "support-overflow");
        assert!(generate(&GeneratorSpec::wavepacket(0.0, 1.0, 60.0), g).is_err());
        assert!(generate(&GeneratorSpec::gaussian(0.0, -1.0), g).is_err());
        assert!(generate(&GeneratorSpec::smoothed_step(0.0, 2.0, 0.0), g).is_err());
    }

    #[test]
    fn dilation_identity_closed_form_and_semigroup() {
        let g = g256();
        let f = generate(&GeneratorSpec::gaussian(0.0, 1.0), g).unwrap();
        assert_eq!(dilate(&f, 1.0).unwrap().values(), f.values());
        let f2 = dilate(&f, 2.0).unwrap();
        let half = generate(&GeneratorSpec::gaussian(0.0, 0.5), g).unwrap();
        for (a, b) in f2.values().iter().zip(half.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let f22 = dilate(&f2, 2.0).unwrap();
        let f4 = dilate(&f, 4.0).unwrap();
        for (a, b) in f22.values().iter().zip(f4.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dilation_errors() {
        let f = generate(&GeneratorSpec::gaussian(0.0, 1.0), g256()).unwrap();
        assert_eq!(dilate(&f, 3.0).unwrap_err().code(), "unsupported-dilation");
        assert_eq!(dilate(&f, 0.5).unwrap_err().code(), "support-overflow");
        let narrow = generate(&GeneratorSpec::gaussian(0.0, 0.5), g256()).unwrap();
        assert!(dilate(&narrow, 0.5).is_ok());
    }

    #[test]
    fn stride_dilation_matches_regeneration() {
        let g = g256();
        let f = generate(&GeneratorSpec::bump(0.0, 3.0), g).unwrap();
        let raw = SampledFunction::new(g, f.values().to_vec(), "raw", f.effective_support_radius()).unwrap();
        let a = dilate(&raw, 2.0).unwrap();
        let b = dilate(&f, 2.0).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-14);
        }
        let t = generate(&GeneratorSpec::random_trig(5, 1.0, 8), g).unwrap();
        let traw = SampledFunction::new(g, t.values().to_vec(), "traw", None).unwrap();
        let a = dilate(&traw, 4.0).unwrap();
        let b = dilate(&t, 4.0).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn lp_examples() {
        let g = g256();
        let one = SampledFunction::constant(g, 1.0);
        assert!((lp_norm(&one, 2.0).unwrap() - 4.0).abs() < 1e-14);
        let zero = SampledFunction::zeros(g);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(lp_norm(&zero, p).unwrap(), 0.0);
        }
        let unit = make_grid(1, 64, 1.0).unwrap();
        let c = SampledFunction::from_fn(unit, "cos", |p| (2.0 * PI * p[0]).cos()).unwrap();
        assert!((lp_norm(&c, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
        assert_eq!(lp_norm(&c, 0.5).unwrap_err().code(), "invalid-argument");
    }

    #[test]
    fn declared_support_is_checked() {
        let g = make_grid(1, 16, 16.0).unwrap();
        let vals = vec![1.0; 16];
        assert!(SampledFunction::new(g, vals, "wide", Some(2.0)).is_err());
        let mut bad = vec![0.0; 16];
        bad[3] = f64::NAN;
        assert!(SampledFunction::new(g, bad, "nan", None).is_err());
    }

    #[test]
    fn smoothed_step_is_sign_like() {
        let g = g256();
        let f = generate(&GeneratorSpec::smoothed_step(0.0, 3.0, 0.5), g).unwrap();
        let at = |x: f64| f.values()[((x / g.spacing()).round() as i64 + 128) as usize];
        assert!((at(1.5) - 1.0).abs() < 1e-9);
        assert!((at(-1.5) + 1.0).abs() < 1e-9);
        assert_eq!(at(0.0), 0.0);
        assert!(at(6.0).abs() < 1e-12);
    }

    #[test]
    fn two_dimensional_members() {
        let g = make_grid(2, 32, 8.0).unwrap();
        for spec in [
            GeneratorSpec::gaussian(0.0, 0.5),
            GeneratorSpec::bump(0.5, 2.0),
            GeneratorSpec::wavepacket(0.0, 0.5, 3.0),
            GeneratorSpec::random_trig(1, 1.0, 4),
            GeneratorSpec::smoothed_step(0.0, 1.5, 0.5),
        ] {
            let f = generate(&spec, g).unwrap();
            assert_eq!(f.values().len(), 1024);
        }
        let t = generate(&GeneratorSpec::random_trig(1, 1.0, 4), g).unwrap();
        assert!(t.mean().abs() < 1e-13);
    }

    #[test]
    fn corpus_json_shape() {
        let c = reference_corpus();
        let v: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["grid"]["n_per_axis"], 256);
        assert_eq!(v["functions"][0]["kind"], "gaussian");
        assert_eq!(v["functions"][0]["params"]["width"], 1.0);
        assert_eq!(v["functions"][0]["label"], "gauss_w1");
        let back = CorpusFile::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.sample().unwrap().len(), 10);
        assert!(back.get("nope").is_err());
    }

    proptest! {
        #[test]
        fn lp_is_absolutely_homogeneous(c in -50.0f64..50.0, p in 1.0f64..6.0, w in 0.3f64..1.0) {
            let f = generate(&GeneratorSpec::wavepacket(0.0, w, 3.0), g256()).unwrap();
            let base = lp_norm(&f, p).unwrap();
            let scaled = lp_norm(&f.scaled(c), p).unwrap();
            prop_assert!((scaled - c.abs() * base).abs() <= 1e-12 * c.abs() * base + 1e-300);
            let sup = lp_norm(&f.scaled(c), f64::INFINITY).unwrap();
            prop_assert!((sup - c.abs() * f.sup_norm()).abs() <= 1e-12 * c.abs());
        }

        #[test]
        fn discrete_holder_monotonicity(p2 in 1.0f64..4.0, extra in 0.0f64..4.0, seed in 0u64..50) {
            let p1 = p2 + extra;
            let f = generate(&GeneratorSpec::random_trig(seed, 1.0, 10), g256()).unwrap();
            let s = |p: f64| f.values().iter().map(|v| v.abs().powf(p)).sum::<f64>();
            let lhs = s(p1);
            let rhs = s(p2) * f.sup_norm().powf(p1 - p2);
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }

        #[test]
        fn dilation_scales_lp(p in 1.0f64..5.0) {
            let f = generate(&GeneratorSpec::gaussian(0.0, 1.0), g256()).unwrap();
            let f2 = dilate(&f, 2.0).unwrap();
            let ratio = lp_norm(&f2, p).unwrap() / lp_norm(&f, p).unwrap();
            prop_assert!((ratio / 2f64.powf(-1.0 / p) - 1.0).abs() < 1e-10);
        }
    }
}
