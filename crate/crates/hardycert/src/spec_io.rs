//! JSON problem descriptions and machine-readable reports.
//!
//! Extended reals are serialized as plain numbers with `+inf` spelled as the
//! string `"inf"`; an absent `hi` (JSON `null`) on a piece means the piece
//! extends to infinity. All report maps are emitted in key order, so output
//! bytes are a pure function of the input.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::criteria::{CriteriaReport, ProblemInstance, Regime};
use crate::discretization::CoveringSequence;
use crate::ext::INF;
use crate::oracle::{Exactness, GridSpec, OracleBudget, OracleResult};
use crate::weightfn::{PiecewisePowerWeight, Role};
use crate::{Error, Result};

/// One serialized piece `coeff * x^exponent` on `(lo, hi]`; `hi = null`
/// means unbounded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PieceSpec {
    pub lo: f64,
    pub hi: Option<f64>,
    pub coeff: f64,
    pub exponent: f64,
}

/// Optional oracle budget overrides in a spec file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BudgetSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Optional covering-sequence index range in a spec file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveringSpec {
    pub k_min: i32,
    pub k_max: i32,
}

/// A full problem description as read from a spec file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub q: f64,
    pub r: f64,
    pub u: Vec<PieceSpec>,
    pub v: Vec<PieceSpec>,
    pub w: Vec<PieceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<BudgetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covering: Option<CoveringSpec>,
}

pub fn pieces_to_weight(pieces: &[PieceSpec], role: Role) -> Result<PiecewisePowerWeight> {
    if pieces.is_empty() {
        return Err(Error::Domain("empty pieces list".into()));
    }
    let mut expect_lo = 0.0;
    let mut parts = Vec::with_capacity(pieces.len());
    for (i, p) in pieces.iter().enumerate() {
        if (p.lo - expect_lo).abs() > 1e-12 * expect_lo.max(1.0) {
            return Err(Error::Domain(format!(
                "piece {i}: lo = {} does not continue from {}",
                p.lo, expect_lo
            )));
        }
        let hi = p.hi.unwrap_or(INF);
        parts.push((hi, p.coeff, p.exponent));
        expect_lo = hi;
    }
    PiecewisePowerWeight::from_parts(&parts, role)
}

pub fn weight_to_pieces(f: &PiecewisePowerWeight) -> Vec<PieceSpec> {
    f.pieces()
        .iter()
        .map(|p| PieceSpec {
            lo: p.lo,
            hi: if p.hi.is_finite() { Some(p.hi) } else { None },
            coeff: p.coeff,
            exponent: p.exponent,
        })
        .collect()
}

impl InstanceSpec {
    pub fn to_problem(&self) -> Result<ProblemInstance> {
        ProblemInstance::new(
            pieces_to_weight(&self.u, Role::Weight)?,
            pieces_to_weight(&self.v, Role::Weight)?,
            pieces_to_weight(&self.w, Role::Weight)?,
            self.q,
            self.r,
        )
    }

    pub fn from_problem(p: &ProblemInstance) -> Self {
        InstanceSpec {
            q: p.exps.q,
            r: p.exps.r,
            u: weight_to_pieces(&p.u),
            v: weight_to_pieces(&p.v),
            w: weight_to_pieces(&p.w),
            oracle: None,
            covering: None,
        }
    }

    /// Spec-level budget overrides merged onto the defaults.
    pub fn budget(&self) -> OracleBudget {
        let mut b = OracleBudget::default();
        if let Some(o) = &self.oracle {
            let mut grid = GridSpec::default();
            if let Some(x) = o.grid_lo {
                grid.lo = x;
            }
            if let Some(x) = o.grid_hi {
                grid.hi = x;
            }
            if let Some(x) = o.grid_n {
                grid.n = x;
            }
            b.grid = grid;
            if let Some(x) = o.atoms {
                b.n_atoms = x;
            }
            if let Some(x) = o.iters {
                b.iters = x;
            }
            if let Some(x) = o.restarts {
                b.restarts = x;
            }
            if let Some(x) = o.seed {
                b.seed = x;
            }
        }
        b
    }
}

/// Extended real to JSON: finite numbers stay numbers, `+inf` becomes `"inf"`.
pub fn ext_num(v: f64) -> Value {
    if v.is_infinite() {
        Value::String("inf".into())
    } else {
        json!(v)
    }
}

pub fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::RGe1 => "r_ge_1",
        Regime::RLt1 => "r_lt_1",
    }
}

pub fn criteria_report_json(rep: &CriteriaReport) -> Value {
    let values: serde_json::Map<String, Value> = rep
        .values
        .iter()
        .map(|(k, &v)| (k.clone(), ext_num(v)))
        .collect();
    let finite: serde_json::Map<String, Value> = rep
        .finite
        .iter()
        .map(|(k, &v)| (k.clone(), json!(v)))
        .collect();
    json!({
        "regime": regime_name(rep.regime),
        "values": values,
        "finite": finite,
        "aggregate": ext_num(rep.aggregate),
        "quadrature_error": ext_num(rep.quadrature_error),
    })
}

pub fn oracle_result_json(res: &OracleResult) -> Value {
    let atoms: Vec<Value> = res
        .witness
        .atoms()
        .iter()
        .map(|&(y, m)| json!({"position": y, "mass": m}))
        .collect();
    json!({
        "best_ratio": ext_num(res.best_ratio),
        "witness": atoms,
        "exactness": match res.exactness {
            Exactness::ExactConvex => "exact_convex",
            Exactness::LowerBound => "lower_bound",
        },
        "grid": {"lo": res.grid_spec.lo, "hi": res.grid_spec.hi, "n": res.grid_spec.n},
        "seed": res.seed,
        "iterations": res.iterations,
    })
}

pub fn partition_json(cov: &CoveringSequence, u: &PiecewisePowerWeight) -> Value {
    let points: Vec<Value> = cov
        .points()
        .iter()
        .map(|(&k, &x)| {
            let cum = if x.is_finite() {
                ext_num(u.integrate(0.0, x).unwrap_or(INF))
            } else {
                ext_num(u.total_mass())
            };
            json!({"k": k, "x": ext_num(x), "cumulative": cum})
        })
        .collect();
    json!({
        "points": points,
        "total_mass": ext_num(cov.total_mass),
        "M": cov.m_index,
        "truncated": cov.truncated,
    })
}

/// Which of the four `(q, r)` quadrants to generate in a verify sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeSpec {
    #[serde(rename = "q_lt1_r_lt1")]
    QLt1RLt1,
    #[serde(rename = "q_lt1_r_ge1")]
    QLt1RGe1,
    #[serde(rename = "q_ge1_r_lt1")]
    QGe1RLt1,
    #[serde(rename = "q_ge1_r_ge1")]
    QGe1RGe1,
}

impl RegimeSpec {
    pub const ALL: [RegimeSpec; 4] = [
        RegimeSpec::QLt1RLt1,
        RegimeSpec::QLt1RGe1,
        RegimeSpec::QGe1RLt1,
        RegimeSpec::QGe1RGe1,
    ];

    pub fn q_ge1(self) -> bool {
        matches!(self, RegimeSpec::QGe1RLt1 | RegimeSpec::QGe1RGe1)
    }

    pub fn r_ge1(self) -> bool {
        matches!(self, RegimeSpec::QLt1RGe1 | RegimeSpec::QGe1RGe1)
    }
}

fn default_count() -> usize {
    50
}

fn default_upper_band() -> f64 {
    3.0
}

fn default_lower_band() -> f64 {
    6.0
}

/// Configuration of a verification sweep; bands are log2 bounds on the
/// oracle/criteria ratio.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyConfig {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regimes: Option<Vec<RegimeSpec>>,
    #[serde(default = "default_upper_band")]
    pub upper_band: f64,
    #[serde(default = "default_lower_band")]
    pub lower_band: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            count: default_count(),
            seed: 0,
            regimes: None,
            upper_band: default_upper_band(),
            lower_band: default_lower_band(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ext::rel_close;

    const CANONICAL: &str = r#"{
        "q": 1.0, "r": 1.0,
        "u": [{"lo": 0.0, "hi": null, "coeff": 1.0, "exponent": 0.0}],
        "v": [{"lo": 0.0, "hi": null, "coeff": 1.0, "exponent": 2.0}],
        "w": [{"lo": 0.0, "hi": null, "coeff": 1.0, "exponent": 0.0}]
    }"#;

    #[test]
    fn parse_and_build() {
        let spec: InstanceSpec = serde_json::from_str(CANONICAL).unwrap();
        let p = spec.to_problem().unwrap();
        assert_eq!(p.exps.q, 1.0);
        assert!(rel_close(p.v.eval(2.0).unwrap(), 4.0, 1e-12));
        let round = InstanceSpec::from_problem(&p);
        let p2 = round.to_problem().unwrap();
        assert_eq!(p.v.pieces(), p2.v.pieces());
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec: InstanceSpec = serde_json::from_str(CANONICAL).unwrap();
        spec.u.clear();
        assert!(spec.to_problem().is_err());
        let mut spec: InstanceSpec = serde_json::from_str(CANONICAL).unwrap();
        spec.u[0].coeff = -1.0;
        assert!(spec.to_problem().is_err());
        let mut spec: InstanceSpec = serde_json::from_str(CANONICAL).unwrap();
        spec.u[0].lo = 0.5; // gap at the origin
        assert!(spec.to_problem().is_err());
    }

    #[test]
    fn budget_overrides() {
        let spec: InstanceSpec = serde_json::from_str(
            r#"{
            "q": 1.0, "r": 1.0,
            "u": [{"lo": 0.0, "hi": null, "coeff": 1.0, "exponent": 0.0}],
            "v": [{"lo": 0.0, "hi": null, "coeff": 1.0, "exponent": 2.0}],
            "w": [{"lo": 0.0, "hi": null, "coeff": 1.0, "exponent": 0.0}],
            "oracle": {"atoms": 4, "seed": 9}
        }"#,
        )
        .unwrap();
        let b = spec.budget();
        assert_eq!(b.n_atoms, 4);
        assert_eq!(b.seed, 9);
        assert_eq!(b.iters, OracleBudget::default().iters);
    }

    #[test]
    fn inf_serialization() {
        assert_eq!(ext_num(INF), Value::String("inf".into()));
        assert_eq!(ext_num(1.5), json!(1.5));
    }

    #[test]
    fn verify_config_defaults() {
        let cfg: VerifyConfig = serde_json::from_str(r#"{"count": 3}"#).unwrap();
        assert_eq!(cfg.count, 3);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.upper_band, 3.0);
        assert_eq!(cfg.lower_band, 6.0);
    }
}
