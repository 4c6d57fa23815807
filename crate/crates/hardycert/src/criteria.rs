//! The criterion functionals deciding the iterated inequality, and their
//! aggregation into a best-constant estimate.
//!
//! All inner integrals of the weights and all `sigma = 1/v_up` factors are
//! exact (piecewise power algebra); outer `dt`-integrals use the adaptive
//! quadrature engine and suprema the sup-engine from [`crate::quad`].

use std::collections::BTreeMap;

use crate::discretization::{covering_sequence, discrete_block_A};
use crate::ext::{xinv, xmul, xpow, INF};
use crate::quad::QuadEngine;
use crate::weightfn::{EnvelopeDirection, PiecewisePowerWeight, Role};
use crate::{Error, Result};

/// The exponent pair `(q, r)` with the derived `r'` and `rho`.
///
/// `r' = r/(1-r)` is defined only for `r < 1`; `1/rho = (1/r - 1)_+`, so
/// `rho = r'` for `r < 1` and `rho = inf` otherwise.
#[derive(Debug, Clone, Copy)]
pub struct Exponents {
    pub q: f64,
    pub r: f64,
    pub rprime: Option<f64>,
    pub rho: f64,
}

impl Exponents {
    pub fn new(q: f64, r: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) || !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!(
                "exponents must be positive finite, got q={q}, r={r}"
            )));
        }
        let rprime = if r < 1.0 { Some(r / (1.0 - r)) } else { None };
        Ok(Exponents {
            q,
            r,
            rprime,
            rho: rprime.unwrap_or(INF),
        })
    }
}

/// Which side of the `r = 1` dichotomy an instance falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Regime {
    #[serde(rename = "r_lt_1")]
    RLt1,
    #[serde(rename = "r_ge_1")]
    RGe1,
}

/// One inequality-checking problem: weights `u`, `v`, `w`, exponents, and
/// the cached non-decreasing envelope of `v` (everything downstream reads
/// `v` only through `sigma = 1/v_up`).
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub u: PiecewisePowerWeight,
    pub v: PiecewisePowerWeight,
    pub w: PiecewisePowerWeight,
    pub exps: Exponents,
    pub v_up: PiecewisePowerWeight,
}

impl ProblemInstance {
    pub fn new(
        u: PiecewisePowerWeight,
        v: PiecewisePowerWeight,
        w: PiecewisePowerWeight,
        q: f64,
        r: f64,
    ) -> Result<Self> {
        for (name, f) in [("u", &u), ("v", &v), ("w", &w)] {
            if f.role() != Role::Weight {
                return Err(Error::InvalidWeight(format!("{name} must have role weight")));
            }
        }
        let exps = Exponents::new(q, r)?;
        let v_up = v.envelope(EnvelopeDirection::Up);
        Ok(ProblemInstance { u, v, w, exps, v_up })
    }

    pub fn regime(&self) -> Regime {
        if self.exps.r < 1.0 {
            Regime::RLt1
        } else {
            Regime::RGe1
        }
    }

    /// `sigma(s) = esup_{s <= tau} v(tau)^-1 = 1/v_up(s)`, `+inf` where the
    /// envelope vanishes.
    pub fn sigma(&self, s: f64) -> f64 {
        xinv(self.v_up.eval(s).unwrap_or(0.0))
    }

    /// Change of variables `x -> 1/x` applied to all three weights.
    /// Involutive on pieces; fails if a transformed weight loses the finite
    /// head-integral property.
    pub fn dualize(&self) -> Result<ProblemInstance> {
        let du = self.u.dualize();
        let dv = self.v.dualize();
        let dw = self.w.dualize();
        for (name, f) in [("u", &du), ("v", &dv), ("w", &dw)] {
            if f.role() != Role::Weight {
                return Err(Error::InvalidWeight(format!(
                    "dual of {name} is not a weight (tail of the original is not integrable)"
                )));
            }
        }
        ProblemInstance::new(du, dv, dw, self.exps.q, self.exps.r)
    }
}

/// All computed functionals with finiteness flags and the aggregate.
#[derive(Debug, Clone)]
pub struct CriteriaReport {
    pub regime: Regime,
    pub values: BTreeMap<String, f64>,
    pub finite: BTreeMap<String, bool>,
    /// Sum of the main triple (`F1+F2+F3` or `G1+G2+G3`).
    pub aggregate: f64,
    pub quadrature_error: f64,
}

fn outer_cuts(p: &ProblemInstance) -> Vec<f64> {
    let mut cuts = p.u.breakpoints();
    cuts.extend(p.w.breakpoints());
    cuts.extend(p.v_up.breakpoints());
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    cuts
}

/// `int_0^t u(x) (int_x^t w)^p dx`, outer quadrature with exact inner
/// integrals.
fn inner_kernel_integral(
    eng: &QuadEngine,
    u: &PiecewisePowerWeight,
    w: &PiecewisePowerWeight,
    t: f64,
    p: f64,
    cuts: &[f64],
) -> f64 {
    eng.integrate(
        |x| {
            if x >= t {
                return 0.0;
            }
            xmul(
                u.eval(x).unwrap_or(0.0),
                xpow(w.integrate(x, t).unwrap_or(INF), p),
            )
        },
        0.0,
        t,
        cuts,
    )
}

/// `esup_{s >= t} (int_t^s w)^{pw} * sigma(s)^{ps}`.
fn tail_sup(
    eng: &QuadEngine,
    p: &ProblemInstance,
    t: f64,
    pw: f64,
    ps: f64,
    cuts: &[f64],
) -> f64 {
    eng.sup(
        |s| {
            if s < t {
                return 0.0;
            }
            xmul(
                xpow(p.w.integrate(t, s).unwrap_or(INF), pw),
                xpow(p.sigma(s), ps),
            )
        },
        t,
        INF,
        cuts,
    )
}

/// The `r >= 1` triple of supremal criteria.
#[allow(non_snake_case)]
pub fn compute_G(p: &ProblemInstance, eng: &QuadEngine) -> Result<(f64, f64, f64)> {
    let ex = p.exps;
    if ex.r < 1.0 {
        return Err(Error::Regime(format!("compute_G requires r >= 1, got r={}", ex.r)));
    }
    let cuts = outer_cuts(p);
    let (q, r) = (ex.q, ex.r);

    let g1 = eng.sup(
        |t| {
            xmul(
                xpow(inner_kernel_integral(eng, &p.u, &p.w, t, r / q, &cuts), 1.0 / r),
                p.sigma(t),
            )
        },
        0.0,
        INF,
        &cuts,
    );

    let g2 = eng.sup(
        |t| {
            xmul(
                xpow(p.u.integrate(0.0, t).unwrap_or(INF), 1.0 / r),
                tail_sup(eng, p, t, 1.0 / q, 1.0, &cuts),
            )
        },
        0.0,
        INF,
        &cuts,
    );

    let sig_q_w = p.v_up.pow_mul(-q, &p.w);
    let g3 = eng.sup(
        |t| {
            xmul(
                xpow(p.u.integrate(0.0, t).unwrap_or(INF), 1.0 / r),
                xpow(sig_q_w.integrate(t, INF).unwrap_or(INF), 1.0 / q),
            )
        },
        0.0,
        INF,
        &cuts,
    );

    Ok((g1, g2, g3))
}

/// The `r < 1` triple, with every exponent placement as displayed (the mixed
/// `r/q` versus `r'` powers inside the second functional included).
#[allow(non_snake_case)]
pub fn compute_F(p: &ProblemInstance, eng: &QuadEngine) -> Result<(f64, f64, f64)> {
    let ex = p.exps;
    let rp = match ex.rprime {
        Some(rp) => rp,
        None => {
            return Err(Error::Regime(format!(
                "compute_F requires r < 1, got r={}",
                ex.r
            )))
        }
    };
    let cuts = outer_cuts(p);
    let (q, r) = (ex.q, ex.r);

    let f1 = xpow(
        eng.integrate(
            |t| {
                xmul(
                    xmul(
                        xpow(p.u.integrate(0.0, t).unwrap_or(INF), rp),
                        p.u.eval(t).unwrap_or(0.0),
                    ),
                    tail_sup(eng, p, t, rp / q, rp, &cuts),
                )
            },
            0.0,
            INF,
            &cuts,
        ),
        1.0 / rp,
    );

    let f2 = xpow(
        eng.integrate(
            |t| {
                xmul(
                    xmul(
                        xpow(inner_kernel_integral(eng, &p.u, &p.w, t, r / q, &cuts), rp),
                        p.u.eval(t).unwrap_or(0.0),
                    ),
                    tail_sup(eng, p, t, r / q, rp, &cuts),
                )
            },
            0.0,
            INF,
            &cuts,
        ),
        1.0 / rp,
    );

    let sig_q_w = p.v_up.pow_mul(-q, &p.w);
    let f3 = xpow(
        eng.integrate(
            |t| {
                xmul(
                    xmul(
                        xpow(p.u.integrate(0.0, t).unwrap_or(INF), rp),
                        xpow(sig_q_w.integrate(t, INF).unwrap_or(INF), rp / q),
                    ),
                    p.u.eval(t).unwrap_or(0.0),
                )
            },
            0.0,
            INF,
            &cuts,
        ),
        1.0 / rp,
    );

    Ok((f1, f2, f3))
}

/// The two supremal/integral criteria for the reduced supremal inequality:
/// `(D1, D2)` when `r >= 1`, `(E1, E2)` when `r < 1`. The `v(s)^-1` esups
/// are computed through `v_up`, which has the identical value.
pub fn supremal_criteria(p: &ProblemInstance, eng: &QuadEngine) -> Result<(f64, f64)> {
    let ex = p.exps;
    let cuts = outer_cuts(p);
    let (q, r) = (ex.q, ex.r);
    if r >= 1.0 {
        let d1 = eng.sup(
            |t| {
                xmul(
                    xpow(inner_kernel_integral(eng, &p.u, &p.w, t, r / q, &cuts), 1.0 / r),
                    p.sigma(t),
                )
            },
            0.0,
            INF,
            &cuts,
        );
        let d2 = eng.sup(
            |t| {
                xmul(
                    xpow(p.u.integrate(0.0, t).unwrap_or(INF), 1.0 / r),
                    tail_sup(eng, p, t, 1.0 / q, 1.0, &cuts),
                )
            },
            0.0,
            INF,
            &cuts,
        );
        Ok((d1, d2))
    } else {
        let rp = ex.rprime.unwrap();
        let e1 = xpow(
            eng.integrate(
                |t| {
                    xmul(
                        xmul(
                            xpow(p.u.integrate(0.0, t).unwrap_or(INF), rp),
                            p.u.eval(t).unwrap_or(0.0),
                        ),
                        tail_sup(eng, p, t, rp / q, rp, &cuts),
                    )
                },
                0.0,
                INF,
                &cuts,
            ),
            1.0 / rp,
        );
        let e2 = xpow(
            eng.integrate(
                |t| {
                    xmul(
                        xmul(
                            xpow(inner_kernel_integral(eng, &p.u, &p.w, t, r / q, &cuts), rp),
                            p.u.eval(t).unwrap_or(0.0),
                        ),
                        tail_sup(eng, p, t, r / q, rp, &cuts),
                    )
                },
                0.0,
                INF,
                &cuts,
            ),
            1.0 / rp,
        );
        Ok((e1, e2))
    }
}

/// Criteria for the Volterra-kernel inequality with kernel
/// `k(x, y) = int_x^y kernel_base`: `(O1, O2)` when `exponent >= 1`,
/// `(K1, K2)` when `exponent < 1`. The kernel is quasi-additive with
/// constant 1 by construction; a non-integrable kernel head is rejected.
pub fn kernel_criteria(
    outer_weight: &PiecewisePowerWeight,
    v: &PiecewisePowerWeight,
    exponent: f64,
    kernel_base: &PiecewisePowerWeight,
    eng: &QuadEngine,
) -> Result<(f64, f64)> {
    if !(exponent > 0.0 && exponent.is_finite()) {
        return Err(Error::Domain(format!("exponent must be positive, got {exponent}")));
    }
    let head = kernel_base.integrate(0.0, 1.0)?;
    if !head.is_finite() || head <= 0.0 {
        return Err(Error::Precondition(
            "kernel base must have a positive finite head integral (k(0, y) in (0, inf))".into(),
        ));
    }
    let v_up = v.envelope(EnvelopeDirection::Up);
    let sigma = |s: f64| xinv(v_up.eval(s).unwrap_or(0.0));
    let mut cuts = outer_weight.breakpoints();
    cuts.extend(kernel_base.breakpoints());
    cuts.extend(v_up.breakpoints());
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let e = exponent;

    let kernel_sup = |t: f64, pk: f64, ps: f64| {
        eng.sup(
            |s| {
                if s < t {
                    return 0.0;
                }
                xmul(
                    xpow(kernel_base.integrate(t, s).unwrap_or(INF), pk),
                    xpow(sigma(s), ps),
                )
            },
            t,
            INF,
            &cuts,
        )
    };

    if e >= 1.0 {
        let o1 = eng.sup(
            |t| {
                xmul(
                    xpow(
                        inner_kernel_integral(eng, outer_weight, kernel_base, t, e, &cuts),
                        1.0 / e,
                    ),
                    sigma(t),
                )
            },
            0.0,
            INF,
            &cuts,
        );
        let o2 = eng.sup(
            |t| {
                xmul(
                    xpow(outer_weight.integrate(0.0, t).unwrap_or(INF), 1.0 / e),
                    kernel_sup(t, 1.0, 1.0),
                )
            },
            0.0,
            INF,
            &cuts,
        );
        Ok((o1, o2))
    } else {
        let qp = e / (1.0 - e);
        let k1 = xpow(
            eng.integrate(
                |t| {
                    xmul(
                        xmul(
                            xpow(outer_weight.integrate(0.0, t).unwrap_or(INF), qp),
                            outer_weight.eval(t).unwrap_or(0.0),
                        ),
                        kernel_sup(t, qp, qp),
                    )
                },
                0.0,
                INF,
                &cuts,
            ),
            1.0 / qp,
        );
        // K2 pairs k^e (not k^q') with sigma^q' inside the esup, exactly as
        // displayed in the source criterion.
        let k2 = xpow(
            eng.integrate(
                |t| {
                    xmul(
                        xmul(
                            xpow(
                                inner_kernel_integral(eng, outer_weight, kernel_base, t, e, &cuts),
                                qp,
                            ),
                            outer_weight.eval(t).unwrap_or(0.0),
                        ),
                        kernel_sup(t, e, qp),
                    )
                },
                0.0,
                INF,
                &cuts,
            ),
            1.0 / qp,
        );
        Ok((k1, k2))
    }
}

/// The continuous tail criterion for the discrete block inequality with a
/// non-decreasing weight `v_mono`: integral form (exponent `r'`) when
/// `r < 1`, sup form when `r >= 1`.
#[allow(non_snake_case)]
pub fn tail_criterion_B(
    p: &ProblemInstance,
    v_mono: &PiecewisePowerWeight,
    eng: &QuadEngine,
) -> Result<f64> {
    require_non_decreasing(v_mono)?;
    let ex = p.exps;
    let (q, r) = (ex.q, ex.r);
    let prod = v_mono.pow_mul(-q, &p.w);
    let mut cuts = outer_cuts(p);
    cuts.extend(v_mono.breakpoints());
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();

    if r >= 1.0 {
        Ok(eng.sup(
            |t| {
                xmul(
                    xpow(p.u.integrate(0.0, t).unwrap_or(INF), 1.0 / r),
                    xpow(prod.integrate(t, INF).unwrap_or(INF), 1.0 / q),
                )
            },
            0.0,
            INF,
            &cuts,
        ))
    } else {
        let rp = ex.rprime.unwrap();
        Ok(xpow(
            eng.integrate(
                |t| {
                    xmul(
                        xmul(
                            xpow(p.u.integrate(0.0, t).unwrap_or(INF), rp),
                            xpow(prod.integrate(t, INF).unwrap_or(INF), rp / q),
                        ),
                        p.u.eval(t).unwrap_or(0.0),
                    )
                },
                0.0,
                INF,
                &cuts,
            ),
            1.0 / rp,
        ))
    }
}

pub(crate) fn require_non_decreasing(f: &PiecewisePowerWeight) -> Result<()> {
    let pieces = f.pieces();
    for (i, p) in pieces.iter().enumerate() {
        if p.coeff > 0.0 && p.exponent < 0.0 {
            return Err(Error::Precondition(format!(
                "piece {i} is decreasing; a non-decreasing function is required"
            )));
        }
    }
    for w in pieces.windows(2) {
        let left = if w[0].coeff == 0.0 {
            0.0
        } else {
            w[0].coeff * w[0].hi.powf(w[0].exponent)
        };
        let right = if w[1].coeff == 0.0 {
            0.0
        } else {
            w[1].coeff * w[1].lo.powf(w[1].exponent)
        };
        if left > right * (1.0 + 1e-12) {
            return Err(Error::Precondition(
                "downward jump at a breakpoint; a non-decreasing function is required".into(),
            ));
        }
    }
    Ok(())
}

/// Full dispatch: the regime triple, the supremal pair, the discrete `A` and
/// tail `B` criteria (both through `v_up`), and the kernel cross-check pair
/// when `q = 1`. The aggregate is the triple sum.
pub fn criteria_constant(p: &ProblemInstance, eng: &QuadEngine) -> Result<CriteriaReport> {
    let mut values = BTreeMap::new();
    let regime = p.regime();

    match regime {
        Regime::RGe1 => {
            let (g1, g2, g3) = compute_G(p, eng)?;
            values.insert("G1".to_string(), g1);
            values.insert("G2".to_string(), g2);
            values.insert("G3".to_string(), g3);
            let (d1, d2) = supremal_criteria(p, eng)?;
            values.insert("D1".to_string(), d1);
            values.insert("D2".to_string(), d2);
        }
        Regime::RLt1 => {
            let (f1, f2, f3) = compute_F(p, eng)?;
            values.insert("F1".to_string(), f1);
            values.insert("F2".to_string(), f2);
            values.insert("F3".to_string(), f3);
            let (e1, e2) = supremal_criteria(p, eng)?;
            values.insert("E1".to_string(), e1);
            values.insert("E2".to_string(), e2);
        }
    }

    let cov = covering_sequence(&p.u, -40, 40)?;
    let a = discrete_block_A(p, &cov, &p.v_up)?;
    values.insert("A".to_string(), a);
    let b = tail_criterion_B(p, &p.v_up, eng)?;
    values.insert("B".to_string(), b);

    if p.exps.q == 1.0 {
        let (c1, c2) = kernel_criteria(&p.u, &p.v, p.exps.r, &p.w, eng)?;
        match regime {
            Regime::RGe1 => {
                values.insert("O1".to_string(), c1);
                values.insert("O2".to_string(), c2);
            }
            Regime::RLt1 => {
                values.insert("K1".to_string(), c1);
                values.insert("K2".to_string(), c2);
            }
        }
    }

    let triple = match regime {
        Regime::RGe1 => ["G1", "G2", "G3"],
        Regime::RLt1 => ["F1", "F2", "F3"],
    };
    let aggregate: f64 = triple.iter().map(|k| values[*k]).sum();

    let finite = values
        .iter()
        .map(|(k, v)| (k.clone(), v.is_finite()))
        .collect();

    Ok(CriteriaReport {
        regime,
        values,
        finite,
        aggregate,
        quadrature_error: eng.max_rel_err(),
    })
}

/// Sum of the kernel pair, for the `q = 1` cross-check.
pub fn kernel_sum(p: &ProblemInstance, eng: &QuadEngine) -> Result<f64> {
    let (a, b) = kernel_criteria(&p.u, &p.v, p.exps.r, &p.w, eng)?;
    Ok(a + b)
}
