//! Catalog of interpolation inequalities and their numerical evaluation.
//!
//! Each case is a set of exponent relations, side conditions and a recipe
//! naming the norm on the left and the weighted product of norms on the
//! right. [`evaluate`] computes every factor on one function and records
//! the ratio `lhs / rhs`.

pub mod algebra;
pub mod structural;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::corpus::SampledFunction;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::lpdecomp::{build_mollifiers, FilterBank, MollifierFamily};
use crate::norms::{besov_norm, besov_sup_mollifier, sobolev_norm_general, NormKind, NormResult};

pub use algebra::{parse_q, q, Ext, ExponentSet, Var, Q};
use algebra::{check_conditions, check_ranges, solve, Condition, Relation};
pub use structural::{
    band_holder_check, embedding_chain_check, equivalence_check, lifting_check, two_scale_bound_check, BandHolderReport,
    EmbeddingRatios, EquivalenceRatios, TwoScaleReport,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CaseId {
    #[serde(rename = "thm1_2")]
    Thm1_2,
    #[serde(rename = "thm1_3")]
    Thm1_3,
    #[serde(rename = "lem3_2")]
    Lem3_2,
    #[serde(rename = "lem3_5")]
    Lem3_5,
    #[serde(rename = "eq1_1a")]
    Eq1_1a,
    #[serde(rename = "eq1_21")]
    Eq1_21,
    #[serde(rename = "eq1_0")]
    Eq1_0,
    #[serde(rename = "eq2_m3")]
    Eq2M3,
    #[serde(rename = "eq2_m2")]
    Eq2M2,
    #[serde(rename = "eq2_m4")]
    Eq2M4,
    #[serde(rename = "eq2_0a")]
    Eq2_0a,
    #[serde(rename = "eq2_0b")]
    Eq2_0b,
    #[serde(rename = "eq2_3")]
    Eq2_3,
    #[serde(rename = "gn_classic")]
    GnClassic,
}

impl CaseId {
    pub const ALL: [CaseId; 14] = [
        CaseId::Thm1_2,
        CaseId::Thm1_3,
        CaseId::Lem3_2,
        CaseId::Lem3_5,
        CaseId::Eq1_1a,
        CaseId::Eq1_21,
        CaseId::Eq1_0,
        CaseId::Eq2M3,
        CaseId::Eq2M2,
        CaseId::Eq2M4,
        CaseId::Eq2_0a,
        CaseId::Eq2_0b,
        CaseId::Eq2_3,
        CaseId::GnClassic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::Thm1_2 => "thm1_2",
            CaseId::Thm1_3 => "thm1_3",
            CaseId::Lem3_2 => "lem3_2",
            CaseId::Lem3_5 => "lem3_5",
            CaseId::Eq1_1a => "eq1_1a",
            CaseId::Eq1_21 => "eq1_21",
            CaseId::Eq1_0 => "eq1_0",
            CaseId::Eq2M3 => "eq2_m3",
            CaseId::Eq2M2 => "eq2_m2",
            CaseId::Eq2M4 => "eq2_m4",
            CaseId::Eq2_0a => "eq2_0a",
            CaseId::Eq2_0b => "eq2_0b",
            CaseId::Eq2_3 => "eq2_3",
            CaseId::GnClassic => "gn_classic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown case id '{s}'")))
    }

    fn def(self) -> &'static CaseDef {
        CATALOG.iter().find(|d| d.id == self).expect("every case has a definition")
    }

    /// Exponents the case needs once derivation is complete.
    pub fn required(self) -> &'static [Var] {
        self.def().required
    }

    /// The reference exponent choice, given in its minimal determining form.
    pub fn reference_given(self) -> ExponentSet {
        let mut s = ExponentSet::new();
        for &(v, ref e) in self.def().reference {
            s.set(v, Ext::parse(e).expect("reference exponents parse")).expect("reference exponents valid");
        }
        s
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A norm appearing in an inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormRecipe {
    /// `Ẇ^{α,p}` in the general sense: `L^p` at `α = 0`, `‖D^m f‖_p` at
    /// integer `α`, Hölder at `p = ∞`. Holds `u = 1/p`.
    Sobolev { alpha: Q, u: Q },
    /// `Ḃ^s_{∞,∞}` on the filter bank.
    Besov { s: Q },
    /// `Ḃ^s_{∞,∞}` through the mollifier supremum.
    BesovMollifier { s: Q },
}

fn fmt_q(v: Q) -> String {
    Ext::Fin(v).to_string()
}

fn fmt_u(u: Q) -> String {
    if u.is_zero() {
        "inf".into()
    } else {
        fmt_q(u.recip())
    }
}

impl NormRecipe {
    /// Scaling dimension `s - n/p`: the norm of `f(λ·)` is `λ^{dim}` times
    /// the norm of `f`.
    pub fn dimension(&self, n: i64) -> Q {
        match *self {
            NormRecipe::Sobolev { alpha, u } => alpha - Q::from_integer(n) * u,
            NormRecipe::Besov { s } | NormRecipe::BesovMollifier { s } => s,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            NormRecipe::Sobolev { alpha, u } => {
                if alpha.is_zero() {
                    format!("L^{}", fmt_u(u))
                } else if alpha.is_integer() {
                    format!("D^{} L^{}", alpha.numer(), fmt_u(u))
                } else if u.is_zero() {
                    format!("C^{}", fmt_q(alpha))
                } else {
                    format!("W^{{{},{}}}", fmt_q(alpha), fmt_u(u))
                }
            }
            NormRecipe::Besov { s } => format!("B^{{{}}}_{{inf,inf}}", fmt_q(s)),
            NormRecipe::BesovMollifier { s } => format!("B^{{{}}}_mollifier", fmt_q(s)),
        }
    }

    fn compute(&self, f: &SampledFunction, ctx: &EvalContext) -> Result<NormResult> {
        let to = |v: Q| *v.numer() as f64 / *v.denom() as f64;
        match *self {
            NormRecipe::Sobolev { alpha, u } => {
                let p = if u.is_zero() { f64::INFINITY } else { to(u.recip()) };
                sobolev_norm_general(f, to(alpha), p)
            }
            NormRecipe::Besov { s } => besov_norm(f, to(s), f64::INFINITY, f64::INFINITY, &ctx.bank),
            NormRecipe::BesovMollifier { s } => besov_sup_mollifier(f, to(s), &ctx.family),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recipe {
    pub lhs: NormRecipe,
    pub rhs: Vec<(NormRecipe, Q)>,
}

impl Recipe {
    pub fn uses_mollifier(&self) -> bool {
        std::iter::once(&self.lhs)
            .chain(self.rhs.iter().map(|(r, _)| r))
            .any(|r| matches!(r, NormRecipe::BesovMollifier { .. }))
    }
}

struct CaseDef {
    id: CaseId,
    /// Stored values fixed by the case itself.
    presets: &'static [(Var, (i64, i64))],
    required: &'static [Var],
    relations: &'static [Relation],
    conditions: &'static [Condition],
    recipe: fn(&dyn Fn(Var) -> Q) -> Recipe,
    reference: &'static [(Var, &'static str)],
}

use Var::*;

fn one() -> Q {
    Q::one()
}

fn sob(alpha: Q, u: Q) -> NormRecipe {
    NormRecipe::Sobolev { alpha, u }
}

fn bes(s: Q) -> NormRecipe {
    NormRecipe::Besov { s }
}

const R_THM1_2: Relation = Relation {
    name: "p1 = p2 (alpha2+sigma)/(alpha1+sigma)",
    vars: &[P1, P2, Alpha1, Alpha2, Sigma],
    f: |g| g(P1) * (g(Alpha2) + g(Sigma)) - g(P2) * (g(Alpha1) + g(Sigma)),
};

const R_THM1_3: Relation = Relation {
    name: "p1 = alpha2 p2 / alpha1",
    vars: &[P1, P2, Alpha1, Alpha2],
    f: |g| g(Alpha1) * g(P2) - g(Alpha2) * g(P1),
};

const R_MIX_R: Relation = Relation {
    name: "1/p1 = (1/r)(1 - alpha1/alpha2) + (1/p2)(alpha1/alpha2)",
    vars: &[P1, P2, R, Alpha1, Alpha2],
    f: |g| g(Alpha2) * g(P1) - g(R) * (g(Alpha2) - g(Alpha1)) - g(P2) * g(Alpha1),
};

const R_THETA: Relation = Relation {
    name: "theta = (alpha2 - alpha1)/(alpha2 - alpha0)",
    vars: &[Theta, Alpha0, Alpha1, Alpha2],
    f: |g| g(Theta) * (g(Alpha2) - g(Alpha0)) - (g(Alpha2) - g(Alpha1)),
};

const R_THETA_P: Relation = Relation {
    name: "1/p1 = theta/p0 + (1-theta)/p2",
    vars: &[P1, P0, P2, Theta],
    f: |g| g(P1) - g(Theta) * g(P0) - (Q::one() - g(Theta)) * g(P2),
};

const R_EQ1_1A: Relation = Relation {
    name: "p1 = p2 (s+1)/s",
    vars: &[P1, P2, S],
    f: |g| g(P1) * (g(S) + Q::one()) - g(P2) * g(S),
};

const fn cond(name: &'static str, holds: fn(algebra::Get) -> bool) -> Condition {
    Condition { name, holds }
}

fn pos(v: Q) -> bool {
    v.is_positive()
}

const C_SIGMA: Condition = cond("sigma > 0", |g| pos(g(Sigma)));
const C_R_GT_1: Condition = cond("r > 1", |g| g(R) < Q::one());
const C_R_FIN: Condition = cond("r < inf", |g| pos(g(R)));
const C_A1_FRAC: Condition = cond("0 < alpha1 < 1", |g| pos(g(Alpha1)) && g(Alpha1) < Q::one());
const C_A1_A2_FRAC: Condition = cond("0 < alpha1 < alpha2 < 1", |g| {
    pos(g(Alpha1)) && g(Alpha1) < g(Alpha2) && g(Alpha2) < Q::one()
});
const C_HIGH_A2: Condition = cond("0 < alpha1 < 1 <= alpha2", |g| {
    pos(g(Alpha1)) && g(Alpha1) < Q::one() && g(Alpha2) >= Q::one()
});

static CATALOG: [CaseDef; 14] = [
    CaseDef {
        id: CaseId::Thm1_2,
        presets: &[],
        required: &[Alpha1, Alpha2, Sigma, P1, P2],
        relations: &[R_THM1_2],
        conditions: &[
            C_SIGMA,
            cond("0 <= alpha1 < alpha2", |g| !g(Alpha1).is_negative() && g(Alpha1) < g(Alpha2)),
            cond("p2 (alpha2 + sigma) > 1", |g| g(Alpha2) + g(Sigma) > g(P2)),
        ],
        recipe: |g| Recipe {
            lhs: sob(g(Alpha1), g(P1)),
            rhs: vec![
                (bes(-g(Sigma)), (g(Alpha2) - g(Alpha1)) / (g(Alpha2) + g(Sigma))),
                (sob(g(Alpha2), g(P2)), (g(Alpha1) + g(Sigma)) / (g(Alpha2) + g(Sigma))),
            ],
        },
        reference: &[(Alpha1, "1/4"), (Alpha2, "3/4"), (Sigma, "1"), (P2, "2")],
    },
    CaseDef {
        id: CaseId::Thm1_3,
        presets: &[],
        required: &[Alpha1, Alpha2, P1, P2],
        relations: &[R_THM1_3],
        conditions: &[
            cond("0 < alpha1 < alpha2", |g| pos(g(Alpha1)) && g(Alpha1) < g(Alpha2)),
            cond("alpha2 p2 > 1", |g| g(Alpha2) > g(P2)),
        ],
        recipe: |g| Recipe {
            lhs: sob(g(Alpha1), g(P1)),
            rhs: vec![
                (bes(Q::zero()), (g(Alpha2) - g(Alpha1)) / g(Alpha2)),
                (sob(g(Alpha2), g(P2)), g(Alpha1) / g(Alpha2)),
            ],
        },
        reference: &[(Alpha1, "1/2"), (Alpha2, "1"), (P2, "2")],
    },
    CaseDef {
        id: CaseId::Lem3_2,
        presets: &[],
        required: &[Alpha1, Alpha2, P1, P2, R],
        relations: &[R_MIX_R],
        conditions: &[
            C_A1_A2_FRAC,
            C_R_GT_1,
            cond("p1, p2 < inf", |g| pos(g(P1)) && pos(g(P2))),
        ],
        recipe: |g| Recipe {
            lhs: sob(g(Alpha1), g(P1)),
            rhs: vec![
                (sob(Q::zero(), g(R)), one() - g(Alpha1) / g(Alpha2)),
                (sob(g(Alpha2), g(P2)), g(Alpha1) / g(Alpha2)),
            ],
        },
        reference: &[(Alpha1, "3/10"), (Alpha2, "3/5"), (P2, "2"), (R, "4")],
    },
    CaseDef {
        id: CaseId::Lem3_5,
        presets: &[],
        required: &[Alpha0, Alpha1, Alpha2, Theta, P0, P1, P2],
        relations: &[R_THETA, R_THETA_P],
        conditions: &[
            cond("0 < alpha0 < alpha1 < alpha2 <= 1", |g| {
                pos(g(Alpha0)) && g(Alpha0) < g(Alpha1) && g(Alpha1) < g(Alpha2) && g(Alpha2) <= Q::one()
            }),
            cond("alpha0 - 1/p0 < alpha2 - 1/p2", |g| g(Alpha0) - g(P0) < g(Alpha2) - g(P2)),
        ],
        recipe: |g| Recipe {
            lhs: sob(g(Alpha1), g(P1)),
            rhs: vec![
                (sob(g(Alpha0), g(P0)), g(Theta)),
                (sob(g(Alpha2), g(P2)), one() - g(Theta)),
            ],
        },
        reference: &[(Alpha0, "1/5"), (Alpha1, "1/2"), (Alpha2, "1"), (P0, "2"), (P2, "2")],
    },
    CaseDef {
        id: CaseId::Eq1_1a,
        presets: &[],
        required: &[S, P1, P2],
        relations: &[R_EQ1_1A],
        conditions: &[cond("s > 0", |g| pos(g(S)))],
        // the gradient factor carries s/(s+1) so that both sides balance
        recipe: |g| Recipe {
            lhs: sob(Q::zero(), g(P1)),
            rhs: vec![
                (bes(-g(S)), one() / (g(S) + one())),
                (sob(one(), g(P2)), g(S) / (g(S) + one())),
            ],
        },
        reference: &[(S, "1"), (P2, "2")],
    },
    CaseDef {
        id: CaseId::Eq1_21,
        presets: &[(Alpha2, (1, 1))],
        required: &[Alpha1, P1, P2, R],
        relations: &[R_MIX_R],
        conditions: &[C_A1_FRAC, C_R_GT_1, C_R_FIN],
        recipe: |g| Recipe {
            lhs: sob(g(Alpha1), g(P1)),
            rhs: vec![
                (sob(Q::zero(), g(R)), one() - g(Alpha1)),
                (sob(one(), g(P2)), g(Alpha1)),
            ],
        },
        reference: &[(Alpha1, "1/2"), (R, "4"), (P2, "2")],
    },
    CaseDef {
        id: CaseId::Eq1_0,
        presets: &[(P1, (0, 1)), (P2, (0, 1))],
        required: &[Alpha1, Alpha2, Sigma],
        relations: &[],
        conditions: &[C_A1_A2_FRAC, C_SIGMA],
        recipe: |g| Recipe {
            lhs: sob(g(Alpha1), Q::zero()),
            rhs: vec![
                (bes(-g(Sigma)), (g(Alpha2) - g(Alpha1)) / (g(Alpha2) + g(Sigma))),
                (sob(g(Alpha2), Q::zero()), (g(Alpha1) + g(Sigma)) / (g(Alpha2) + g(Sigma))),
            ],
        },
        reference: &[(Alpha1, "3/10"), (Alpha2, "7/10"), (Sigma, "1/2")],
    },
    CaseDef {
        id: CaseId::Eq2M3,
        presets: &[(Alpha1, (0, 1)), (P1, (0, 1))],
        required: &[Alpha2, Sigma],
        relations: &[],
        conditions: &[cond("0 < alpha2 < 1", |g| pos(g(Alpha2)) && g(Alpha2) < Q::one()), C_SIGMA],
        recipe: |g| Recipe {
            lhs: sob(Q::zero(), Q::zero()),
            rhs: vec![
                (bes(-g(Sigma)), g(Alpha2) / (g(Alpha2) + g(Sigma))),
                (bes(g(Alpha2)), g(Sigma) / (g(Alpha2) + g(Sigma))),
            ],
        },
        reference: &[(Alpha2, "1/2"), (Sigma, "1/2")],
    },
    CaseDef {
        id: CaseId::Eq2M2,
        presets: &[(Sigma, (0, 1))],
        required: &[Alpha1, Alpha2],
        relations: &[],
        conditions: &[C_A1_A2_FRAC],
        recipe: |g| Recipe {
            lhs: bes(g(Alpha1)),
            rhs: vec![
                (bes(Q::zero()), (g(Alpha2) - g(Alpha1)) / g(Alpha2)),
                (bes(g(Alpha2)), g(Alpha1) / g(Alpha2)),
            ],
        },
        reference: &[(Alpha1, "3/10"), (Alpha2, "7/10")],
    },
    CaseDef {
        id: CaseId::Eq2M4,
        presets: &[(Alpha2, (1, 1)), (P2, (0, 1))],
        required: &[Alpha1, Sigma],
        relations: &[],
        conditions: &[C_A1_FRAC, C_SIGMA],
        recipe: |g| Recipe {
            lhs: bes(g(Alpha1)),
            rhs: vec![
                (bes(-g(Sigma)), (one() - g(Alpha1)) / (one() + g(Sigma))),
                (sob(one(), Q::zero()), (g(Alpha1) + g(Sigma)) / (one() + g(Sigma))),
            ],
        },
        reference: &[(Alpha1, "1/2"), (Sigma, "1/2")],
    },
    CaseDef {
        id: CaseId::Eq2_0a,
        presets: &[(P1, (0, 1)), (P2, (0, 1))],
        required: &[Alpha1, Alpha2],
        relations: &[],
        conditions: &[C_HIGH_A2, cond("alpha2 integer", |g| g(Alpha2).is_integer())],
        recipe: |g| Recipe {
            lhs: sob(g(Alpha1), Q::zero()),
            rhs: vec![
                (NormRecipe::BesovMollifier { s: Q::zero() }, one() - g(Alpha1) / g(Alpha2)),
                (sob(g(Alpha2), Q::zero()), g(Alpha1) / g(Alpha2)),
            ],
        },
        reference: &[(Alpha1, "1/2"), (Alpha2, "1")],
    },
    CaseDef {
        id: CaseId::Eq2_0b,
        presets: &[(P1, (0, 1)), (P2, (0, 1))],
        required: &[Alpha1, Alpha2],
        relations: &[],
        conditions: &[C_HIGH_A2, cond("alpha2 not integer", |g| !g(Alpha2).is_integer())],
        recipe: |g| Recipe {
            lhs: sob(g(Alpha1), Q::zero()),
            rhs: vec![
                (NormRecipe::BesovMollifier { s: Q::zero() }, one() - g(Alpha1) / g(Alpha2)),
                (sob(g(Alpha2), Q::zero()), g(Alpha1) / g(Alpha2)),
            ],
        },
        reference: &[(Alpha1, "1/2"), (Alpha2, "3/2")],
    },
    CaseDef {
        id: CaseId::Eq2_3,
        presets: &[(Alpha2, (1, 1))],
        required: &[Alpha1, P1, P2],
        relations: &[R_THM1_3],
        conditions: &[C_A1_FRAC, cond("p2 > 1", |g| g(P2) < Q::one())],
        recipe: |g| Recipe {
            lhs: sob(g(Alpha1), g(P1)),
            rhs: vec![(bes(Q::zero()), one() - g(Alpha1)), (sob(one(), g(P2)), g(Alpha1))],
        },
        reference: &[(Alpha1, "1/2"), (P2, "2")],
    },
    CaseDef {
        id: CaseId::GnClassic,
        presets: &[],
        required: &[Alpha1, Alpha2, P1, P2, R],
        relations: &[R_MIX_R],
        conditions: &[cond("0 <= alpha1 < alpha2", |g| {
            !g(Alpha1).is_negative() && g(Alpha1) < g(Alpha2)
        })],
        recipe: |g| Recipe {
            lhs: sob(g(Alpha1), g(P1)),
            rhs: vec![
                (sob(Q::zero(), g(R)), one() - g(Alpha1) / g(Alpha2)),
                (sob(g(Alpha2), g(P2)), g(Alpha1) / g(Alpha2)),
            ],
        },
        reference: &[(Alpha1, "1/2"), (Alpha2, "1"), (R, "2"), (P2, "2")],
    },
];

/// An inequality with a complete exponent assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct InequalityCase {
    pub id: CaseId,
    pub exponents: ExponentSet,
    /// Side conditions that fail; empty for every case built by [`derive_exponents`].
    pub violated: Vec<&'static str>,
}

impl InequalityCase {
    /// The case at its reference exponents.
    pub fn reference(id: CaseId) -> Self {
        derive_exponents(id, &id.reference_given()).expect("reference exponents satisfy their case")
    }

    pub fn recipe(&self) -> Recipe {
        let get = |v: Var| self.exponents.raw(v).unwrap_or_else(Q::zero);
        (self.id.def().recipe)(&get)
    }
}

/// Completes `given` without enforcing side conditions. Relations, value
/// ranges and the scaling balance are still enforced; failing conditions
/// are listed in the result.
pub fn complete_exponents(id: CaseId, given: &ExponentSet) -> Result<InequalityCase> {
    let def = id.def();
    let mut set = given.clone();
    for &(v, (n, d)) in def.presets {
        let want = q(n, d);
        match set.raw(v) {
            Some(have) if have != want => {
                let shown = ExponentSet::new();
                let _ = shown;
                return Err(Error::ExponentMismatch(format!(
                    "{} is fixed by case {}, got {}",
                    v.name(),
                    id,
                    given.get(v).map(|e| e.to_string()).unwrap_or_default()
                )));
            }
            _ => {
                let mut tmp = ExponentSet::new();
                if v.is_integrability() {
                    tmp.set(v, if want.is_zero() { Ext::Inf } else { Ext::Fin(want.recip()) })?;
                } else {
                    tmp.set(v, Ext::Fin(want))?;
                }
                set.set(v, tmp.get(v).expect("just set"))?;
            }
        }
    }
    solve(&mut set, def.relations)?;
    let missing: Vec<&str> = def.required.iter().filter(|v| !set.contains(**v)).map(|v| v.name()).collect();
    if !missing.is_empty() {
        return Err(Error::MissingExponent(format!("case {id} cannot determine {}", missing.join(", "))));
    }
    check_ranges(&set)?;
    let case = InequalityCase {
        id,
        violated: check_conditions(&set, def.conditions),
        exponents: set,
    };
    check_balance(&case)?;
    Ok(case)
}

/// Completes `given` for case `id` and enforces every side condition.
pub fn derive_exponents(id: CaseId, given: &ExponentSet) -> Result<InequalityCase> {
    let case = complete_exponents(id, given)?;
    if let Some(first) = case.violated.first() {
        return Err(Error::ConditionViolated(format!("case {id}: {first}")));
    }
    Ok(case)
}

/// Powers sum to one and both sides carry the same scaling dimension in
/// every dimension `n = 1, 2, 3`.
pub fn check_balance(case: &InequalityCase) -> Result<()> {
    let r = case.recipe();
    let total: Q = r.rhs.iter().map(|(_, e)| *e).sum();
    if total != Q::one() {
        return Err(Error::ExponentMismatch(format!("case {}: powers sum to {total}", case.id)));
    }
    for n in 1..=3 {
        let left = r.lhs.dimension(n);
        let right: Q = r.rhs.iter().map(|(f, e)| f.dimension(n) * *e).sum();
        if left != right {
            return Err(Error::ExponentMismatch(format!(
                "case {}: scaling dimension {left} on the left, {right} on the right (n = {n})",
                case.id
            )));
        }
    }
    Ok(())
}

/// Filter bank and mollifier family shared by every evaluation on a grid.
#[derive(Clone, Debug)]
pub struct EvalContext {
    pub bank: FilterBank,
    pub family: MollifierFamily,
}

/// Vanishing moments of the family used for mollifier-route norms.
pub const MOLLIFIER_MOMENTS: usize = 2;

impl EvalContext {
    /// Bank plus the largest mollifier family that fits on `grid`.
    pub fn new(grid: Grid) -> Result<Self> {
        let bank = FilterBank::new(grid)?;
        let mut last = None;
        for count in (4..=16).rev() {
            match build_mollifiers(grid, MOLLIFIER_MOMENTS, count) {
                Ok(family) => return Ok(EvalContext { bank, family }),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    pub fn grid(&self) -> &Grid {
        self.bank.grid()
    }

    /// The family resolves `f` when `ε ↦ ‖φ_ε*(f - mean)‖_∞` peaks above the
    /// smallest scale; otherwise the sup runs off the end of the family.
    pub fn mollifier_resolves(&self, f: &SampledFunction) -> Result<bool> {
        let m = f.mean();
        let sups = self.family.sup_profile(&f.map(f.label().to_string(), |v| v - m)?)?;
        let last = sups.len() - 1;
        Ok(sups[..last].iter().any(|v| *v > sups[last]))
    }

    /// Every factor of `case` is resolved for `f`.
    pub fn resolves(&self, case: &InequalityCase, f: &SampledFunction) -> Result<bool> {
        if case.recipe().uses_mollifier() {
            self.mollifier_resolves(f)
        } else {
            Ok(true)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorRecord {
    pub label: String,
    pub kind: NormKind,
    pub value: f64,
    /// Exponent on the right-hand side; 1 for the left-hand side.
    pub power: f64,
    pub power_exact: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Ok,
    /// Both sides vanish; the ratio is recorded as 0.
    ZeroFunction,
    /// The right side vanishes while the left does not; ratio recorded as 0.
    DegenerateRhs,
}

/// Cutoffs shared by the factors of one record.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
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
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropped_fraction: Option<f64>,
}

impl GridMeta {
    fn absorb(&mut self, r: &NormResult) {
        let t = &r.truncation;
        self.grid = t.grid.clone();
        self.h_min = self.h_min.or(t.h_min);
        self.h_max = self.h_max.or(t.h_max);
        self.j_min = self.j_min.or(t.j_min);
        self.j_max = self.j_max.or(t.j_max);
        self.eps_min = self.eps_min.or(t.eps_min);
        self.eps_max = self.eps_max.or(t.eps_max);
        if let Some(d) = t.dropped_fraction {
            self.dropped_fraction = Some(self.dropped_fraction.map_or(d, |o: f64| o.max(d)));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub schema_version: u32,
    pub case_id: CaseId,
    pub function_label: String,
    pub exponents: ExponentSet,
    pub lhs_factor: FactorRecord,
    pub lhs: f64,
    pub rhs_factors: Vec<FactorRecord>,
    pub rhs: f64,
    pub ratio: f64,
    pub status: RecordStatus,
    /// Mean handling of every Besov factor.
    pub mean_convention: String,
    pub grid_meta: GridMeta,
}

/// Memoizes norm values of one function across cases.
pub struct Evaluator<'a> {
    ctx: &'a EvalContext,
    f: &'a SampledFunction,
    cache: HashMap<NormRecipe, NormResult>,
}

impl<'a> Evaluator<'a> {
    pub fn new(ctx: &'a EvalContext, f: &'a SampledFunction) -> Self {
        Evaluator {
            ctx,
            f,
            cache: HashMap::new(),
        }
    }

    pub fn norm(&mut self, r: NormRecipe) -> Result<NormResult> {
        if let Some(v) = self.cache.get(&r) {
            return Ok(v.clone());
        }
        let v = r.compute(self.f, self.ctx).map_err(|e| e.in_factor(r.label()))?;
        self.cache.insert(r, v.clone());
        Ok(v)
    }

    pub fn evaluate(&mut self, case: &InequalityCase) -> Result<RatioRecord> {
        let recipe = case.recipe();
        let mut meta = GridMeta::default();
        let l = self.norm(recipe.lhs)?;
        meta.absorb(&l);
        let lhs_factor = FactorRecord {
            label: recipe.lhs.label(),
            kind: l.kind,
            value: l.value,
            power: 1.0,
            power_exact: "1".into(),
        };
        let mut rhs_factors = Vec::with_capacity(recipe.rhs.len());
        let mut rhs = 1.0;
        for (r, e) in &recipe.rhs {
            let v = self.norm(*r)?;
            meta.absorb(&v);
            let power = *e.numer() as f64 / *e.denom() as f64;
            rhs *= v.value.powf(power);
            rhs_factors.push(FactorRecord {
                label: r.label(),
                kind: v.kind,
                value: v.value,
                power,
                power_exact: fmt_q(*e),
            });
        }
        let lhs = l.value;
        let (ratio, status) = if rhs > 0.0 {
            (lhs / rhs, RecordStatus::Ok)
        } else if lhs > 0.0 {
            (0.0, RecordStatus::DegenerateRhs)
        } else {
            (0.0, RecordStatus::ZeroFunction)
        };
        Ok(RatioRecord {
            schema_version: SCHEMA_VERSION,
            case_id: case.id,
            function_label: self.f.label().to_string(),
            exponents: case.exponents.clone(),
            lhs_factor,
            lhs,
            rhs_factors,
            rhs,
            ratio,
            status,
            mean_convention: "subtract".into(),
            grid_meta: meta,
        })
    }
}

/// Evaluates one case on one function.
pub fn evaluate(case: &InequalityCase, f: &SampledFunction, ctx: &EvalContext) -> Result<RatioRecord> {
    Evaluator::new(ctx, f).evaluate(case)
}

/// Exact exponent sets keyed by name, for reports.
pub fn exponent_table(case: &InequalityCase) -> BTreeMap<String, String> {
    case.exponents.to_map()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate, reference_corpus, GeneratorSpec};
    use crate::grid::make_grid;

    fn given(pairs: &[(Var, &str)]) -> ExponentSet {
        let mut s = ExponentSet::new();
        for (v, e) in pairs {
            s.set(*v, Ext::parse(e).unwrap()).unwrap();
        }
        s
    }

    #[test]
    fn ids_round_trip() {
        for id in CaseId::ALL {
            assert_eq!(CaseId::parse(id.as_str()).unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{}\"", id.as_str()));
        }
        assert!(CaseId::parse("thm9").is_err());
    }

    #[test]
    fn reference_exponents() {
        let p1 = |id| InequalityCase::reference(id).exponents.get(P1);
        assert_eq!(p1(CaseId::Thm1_2), Some(Ext::ratio(14, 5)));
        assert_eq!(p1(CaseId::Thm1_3), Some(Ext::int(4)));
        assert_eq!(p1(CaseId::Lem3_2), Some(Ext::ratio(8, 3)));
        assert_eq!(p1(CaseId::Lem3_5), Some(Ext::int(2)));
        assert_eq!(InequalityCase::reference(CaseId::Lem3_5).exponents.get(Theta), Some(Ext::ratio(5, 8)));
        assert_eq!(p1(CaseId::Eq1_1a), Some(Ext::int(4)));
        assert_eq!(p1(CaseId::Eq1_21), Some(Ext::ratio(8, 3)));
        assert_eq!(p1(CaseId::Eq2_3), Some(Ext::int(4)));
        assert_eq!(p1(CaseId::GnClassic), Some(Ext::int(2)));
        assert_eq!(p1(CaseId::Eq1_0), Some(Ext::Inf));
    }

    #[test]
    fn remark_special_case_of_first_theorem() {
        // alpha1 = 0, alpha2 = 1, sigma = s gives p1 = p2 (s+1)/s
        for (s, p2, want) in [("1", "2", Ext::int(4)), ("1/2", "3", Ext::int(9)), ("2", "1", Ext::ratio(3, 2))] {
            let c = derive_exponents(
                CaseId::Thm1_2,
                &given(&[(Alpha1, "0"), (Alpha2, "1"), (Sigma, s), (P2, p2)]),
            )
            .unwrap();
            assert_eq!(c.exponents.get(P1), Some(want));
        }
    }

    #[test]
    fn any_determining_subset_gives_the_same_set() {
        for id in CaseId::ALL {
            let full = InequalityCase::reference(id).exponents;
            let vars: Vec<Var> = full.vars().collect();
            for drop in &vars {
                let mut g = ExponentSet::new();
                for v in &vars {
                    if v != drop {
                        g.set(*v, full.get(*v).unwrap()).unwrap();
                    }
                }
                if let Ok(c) = derive_exponents(id, &g) {
                    assert_eq!(c.exponents, full, "{id} without {}", drop.name());
                }
            }
        }
    }

    #[test]
    fn errors_name_their_cause() {
        let e = derive_exponents(CaseId::Thm1_2, &given(&[(Alpha1, "1/4"), (Alpha2, "3/4")])).unwrap_err();
        assert_eq!(e.code(), "missing-exponent");
        let e = derive_exponents(
            CaseId::Thm1_3,
            &given(&[(Alpha1, "1/2"), (Alpha2, "1/2"), (P2, "2")]),
        )
        .unwrap_err();
        assert_eq!(e.code(), "condition-violated");
        assert!(e.to_string().contains("0 < alpha1 < alpha2"));
        let e = derive_exponents(CaseId::Thm1_3, &given(&[(Alpha1, "1/4"), (Alpha2, "1/2"), (P2, "3/2")])).unwrap_err();
        assert!(e.to_string().contains("alpha2 p2 > 1"), "{e}");
        let e = derive_exponents(
            CaseId::Thm1_3,
            &given(&[(Alpha1, "1/2"), (Alpha2, "1"), (P2, "2"), (P1, "3")]),
        )
        .unwrap_err();
        assert_eq!(e.code(), "exponent-mismatch");
        let e = derive_exponents(CaseId::Eq2M2, &given(&[(Alpha1, "1/4"), (Alpha2, "1/2"), (Sigma, "1")])).unwrap_err();
        assert_eq!(e.code(), "exponent-mismatch");
    }

    #[test]
    fn forbidden_triple_completes_but_violates() {
        let c = complete_exponents(
            CaseId::Lem3_5,
            &given(&[(Alpha0, "0"), (P0, "inf"), (Alpha2, "1"), (P2, "1"), (Theta, "1/2")]),
        )
        .unwrap();
        assert_eq!(c.exponents.get(Alpha1), Some(Ext::ratio(1, 2)));
        assert_eq!(c.exponents.get(P1), Some(Ext::int(2)));
        assert!(c.violated.contains(&"alpha0 - 1/p0 < alpha2 - 1/p2"));
        assert!(derive_exponents(c.id, &c.exponents).is_err());
    }

    #[test]
    fn derived_p_below_one_is_rejected() {
        // alpha1 outside [alpha0, alpha2] pushes theta past 1 and 1/p1 above 1
        let e = complete_exponents(
            CaseId::Lem3_5,
            &given(&[(Alpha0, "1/5"), (Alpha1, "1/10"), (Alpha2, "3/5"), (P0, "1"), (P2, "2")]),
        )
        .unwrap_err();
        assert_eq!(e.code(), "condition-violated");
        assert!(e.to_string().contains("p1"), "{e}");
    }

    #[test]
    fn zero_function_is_degenerate_not_an_error() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let ctx = EvalContext::new(g).unwrap();
        let z = SampledFunction::zeros(g);
        for id in CaseId::ALL {
            let r = evaluate(&InequalityCase::reference(id), &z, &ctx).unwrap();
            assert_eq!(r.lhs, 0.0);
            assert_eq!(r.rhs, 0.0);
            assert_eq!(r.ratio, 0.0);
            assert_eq!(r.status, RecordStatus::ZeroFunction);
        }
    }

    #[test]
    fn record_product_and_homogeneity() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let ctx = EvalContext::new(g).unwrap();
        let f = generate(&GeneratorSpec::gaussian(0.0, 1.0), g).unwrap();
        let f5 = f.scaled(5.0);
        for id in CaseId::ALL {
            let case = InequalityCase::reference(id);
            let r = evaluate(&case, &f, &ctx).unwrap();
            let prod: f64 = r.rhs_factors.iter().map(|x| x.value.powf(x.power)).product();
            assert!((prod - r.rhs).abs() <= 1e-12 * r.rhs);
            assert!(r.ratio.is_finite() && r.ratio > 0.0, "{id}");
            let r5 = evaluate(&case, &f5, &ctx).unwrap();
            assert!((r5.ratio / r.ratio - 1.0).abs() < 1e-10, "{id}");
        }
    }

    #[test]
    fn thm1_3_band_across_corpus() {
        let corpus = reference_corpus();
        let ctx = EvalContext::new(corpus.grid).unwrap();
        let case = InequalityCase::reference(CaseId::Thm1_3);
        let ratios: Vec<f64> = corpus
            .sample()
            .unwrap()
            .iter()
            .map(|f| evaluate(&case, f, &ctx).unwrap().ratio)
            .collect();
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi / lo <= 20.0, "{ratios:?}");
    }

    #[test]
    fn record_json_shape() {
        let g = make_grid(1, 256, 16.0).unwrap();
        let ctx = EvalContext::new(g).unwrap();
        let f = generate(&GeneratorSpec::gaussian(0.0, 1.0), g).unwrap();
        let r = evaluate(&InequalityCase::reference(CaseId::Thm1_2), &f, &ctx).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["case_id"], "thm1_2");
        assert_eq!(v["exponents"]["p1"], "14/5");
        assert_eq!(v["rhs_factors"][0]["label"], "B^{-1}_{inf,inf}");
        assert_eq!(v["rhs_factors"][0]["power_exact"], "2/7");
        assert_eq!(v["mean_convention"], "subtract");
        let back: RatioRecord = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
