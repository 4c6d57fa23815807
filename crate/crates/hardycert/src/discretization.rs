//! Dyadic discretization machinery: covering sequences `int_0^{x_k} u = 2^k`,
//! the discrete block criterion `A`, the two-term block decomposition of the
//! left-hand side, geometric-sequence equivalences, and `l^rho` embedding
//! norms.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::criteria::{require_non_decreasing, ProblemInstance};
use crate::ext::{xmul, xpow, INF};
use crate::oracle::{lhs_eval_supremal, AtomicFunction};
use crate::quad::QuadEngine;
use crate::weightfn::PiecewisePowerWeight;
use crate::{Error, Result};

/// Partition points of `(0, inf)` with `int_0^{x_k} u = 2^k`.
#[derive(Debug, Clone)]
pub struct CoveringSequence {
    points: BTreeMap<i32, f64>,
    pub total_mass: f64,
    /// Defined for finite mass: `2^M <= int u < 2^{M+1}` (exact powers of two
    /// assign `M = log2(mass) - 1` so that `x_{M+1} = inf` solves exactly).
    pub m_index: Option<i32>,
    /// True when the requested range was clipped before the mass ran out.
    pub truncated: bool,
}

impl CoveringSequence {
    pub fn points(&self) -> &BTreeMap<i32, f64> {
        &self.points
    }

    pub fn x(&self, k: i32) -> Option<f64> {
        self.points.get(&k).copied()
    }

    /// Largest relative error of `int_0^{x_k} u` against `2^k` over the
    /// stored finite points.
    pub fn max_cumulative_error(&self, u: &PiecewisePowerWeight) -> f64 {
        let mut worst = 0.0f64;
        for (&k, &x) in &self.points {
            if !x.is_finite() {
                continue;
            }
            let target = 2f64.powi(k);
            let got = u.integrate(0.0, x).unwrap_or(INF);
            worst = worst.max((got - target).abs() / target);
        }
        worst
    }
}

/// Builds the covering sequence for indices `[k_min, k_max]`, clipped to the
/// mass-determined top index `M` when `u` is integrable; then `x_{M+1} = inf`
/// is appended.
pub fn covering_sequence(
    u: &PiecewisePowerWeight,
    k_min: i32,
    k_max: i32,
) -> Result<CoveringSequence> {
    if k_min > k_max {
        return Err(Error::Domain(format!("k_min = {k_min} > k_max = {k_max}")));
    }
    let mass = u.total_mass();
    let mut points = BTreeMap::new();
    let (top, m_index) = if mass.is_finite() {
        let mut m = mass.log2().floor() as i32;
        if 2f64.powi(m) >= mass {
            m -= 1;
        }
        (k_max.min(m), Some(m))
    } else {
        (k_max, None)
    };
    for k in k_min..=top {
        points.insert(k, u.invert_cumulative(2f64.powi(k))?);
    }
    if let Some(m) = m_index {
        if top == m {
            points.insert(m + 1, INF);
        }
    }
    let truncated = match m_index {
        Some(m) => k_max < m,
        None => true,
    };
    Ok(CoveringSequence {
        points,
        total_mass: mass,
        m_index,
        truncated,
    })
}

/// The discrete criterion `A`: the `l^rho` norm over stored blocks of
/// `2^{k/r} (int_{x_k}^{x_{k+1}} v_mono^{-q} w)^{1/q}`, with `l^inf` when
/// `r >= 1`. Block integrals are exact.
#[allow(non_snake_case)]
pub fn discrete_block_A(
    p: &ProblemInstance,
    cov: &CoveringSequence,
    v_mono: &PiecewisePowerWeight,
) -> Result<f64> {
    require_non_decreasing(v_mono)?;
    let (q, r) = (p.exps.q, p.exps.r);
    let prod = v_mono.pow_mul(-q, &p.w);
    let mut terms: Vec<(i32, f64)> = Vec::new();
    for (&k, &xk) in cov.points() {
        let Some(&xk1) = cov.points().get(&(k + 1)) else {
            continue;
        };
        if xk >= xk1 {
            continue;
        }
        let block = prod.integrate(xk, xk1).unwrap_or(INF);
        terms.push((k, xmul(2f64.powi(k).powf(1.0 / r), xpow(block, 1.0 / q))));
    }
    if r >= 1.0 {
        Ok(terms.iter().fold(0.0f64, |acc, &(_, t)| acc.max(t)))
    } else {
        let rho = p.exps.rho;
        let sum: f64 = terms.iter().map(|&(_, t)| xpow(t, rho)).sum();
        Ok(xpow(sum, 1.0 / rho))
    }
}

/// Two-term equivalent of the left-hand side on an atomic `h`: the dyadic
/// block term (inner integrals exact) and the supremal tail term.
pub fn block_decompose_lhs(
    p: &ProblemInstance,
    cov: &CoveringSequence,
    h: &AtomicFunction,
    eng: &QuadEngine,
) -> Result<(f64, f64)> {
    let (q, r) = (p.exps.q, p.exps.r);
    let mut sum = 0.0f64;
    for (&k, &xk) in cov.points() {
        let Some(&xk1) = cov.points().get(&(k + 1)) else {
            continue;
        };
        if xk >= xk1 {
            continue;
        }
        // atoms inside (x_k, x_{k+1}] with suffix masses truncated at x_{k+1}
        let atoms: Vec<(f64, f64)> = h
            .atoms()
            .iter()
            .copied()
            .filter(|&(y, _)| y > xk && y <= xk1)
            .collect();
        if atoms.is_empty() {
            continue;
        }
        let mut suffix = vec![0.0; atoms.len()];
        let mut acc = 0.0;
        for (j, &(_, m)) in atoms.iter().enumerate().rev() {
            acc += m;
            suffix[j] = acc;
        }
        let mut inner = 0.0;
        let mut seg_lo = xk;
        for (j, &(y, _)) in atoms.iter().enumerate() {
            inner += xmul(suffix[j].powf(q), p.w.integrate(seg_lo, y).unwrap_or(INF));
            seg_lo = y;
        }
        let term = xmul(2f64.powi(k).powf(1.0 / r), xpow(inner, 1.0 / q));
        sum += xpow(term, r);
    }
    let block_term = xpow(sum, 1.0 / r);
    let tail_term = lhs_eval_supremal(p, h, eng);
    Ok((block_term, tail_term))
}

/// A finite positive sequence indexed by a contiguous integer range.
#[derive(Debug, Clone)]
pub struct WeightedSequence {
    lo: i64,
    values: Vec<f64>,
}

impl WeightedSequence {
    /// Entries must be finite and non-negative (operations that need strict
    /// positivity check it themselves).
    pub fn new(lo: i64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("empty sequence".into()));
        }
        for &v in &values {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("invalid sequence entry {v}")));
            }
        }
        Ok(WeightedSequence { lo, values })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Norm mode for [`geom_equivalence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeomMode {
    Sum,
    Sup,
}

fn lq_norm(terms: &[f64], qexp: f64) -> f64 {
    if qexp.is_infinite() {
        terms.iter().fold(0.0f64, |a, &b| a.max(b))
    } else {
        xpow(terms.iter().map(|&t| xpow(t, qexp)).sum(), 1.0 / qexp)
    }
}

/// Both sides of the geometric-sequence equivalence: with `tau`
/// geometrically increasing (`tau_k >= alpha tau_{k-1}`, `alpha > 1`), the
/// `l^qexp` norm of `tau_k * (inner_k a)` with inner cumulative sums
/// (`Sum`) or tail sups (`Sup`) is comparable to the norm of `tau_k a_k`.
/// Returns `(lhs, rhs)`.
pub fn geom_equivalence(
    tau: &WeightedSequence,
    a: &WeightedSequence,
    qexp: f64,
    mode: GeomMode,
) -> Result<(f64, f64)> {
    if tau.len() != a.len() || tau.lo() != a.lo() {
        return Err(Error::Domain("tau and a must share their index set".into()));
    }
    if !(qexp > 0.0) {
        return Err(Error::Domain(format!("qexp must be positive, got {qexp}")));
    }
    let tv = tau.values();
    for &t in tv {
        if !(t > 0.0) {
            return Err(Error::Precondition("tau entries must be positive".into()));
        }
    }
    let mut alpha = INF;
    for w in tv.windows(2) {
        alpha = alpha.min(w[1] / w[0]);
    }
    if tv.len() > 1 && !(alpha > 1.0) {
        return Err(Error::Precondition(format!(
            "tau is not geometrically increasing (best alpha = {alpha})"
        )));
    }
    let av = a.values();
    let n = av.len();
    let mut inner = vec![0.0f64; n];
    match mode {
        GeomMode::Sum => {
            let mut acc = 0.0;
            for k in (0..n).rev() {
                acc += av[k];
                inner[k] = acc;
            }
        }
        GeomMode::Sup => {
            let mut acc = 0.0f64;
            for k in (0..n).rev() {
                acc = acc.max(av[k]);
                inner[k] = acc;
            }
        }
    }
    let lhs_terms: Vec<f64> = (0..n).map(|k| tv[k] * inner[k]).collect();
    let rhs_terms: Vec<f64> = (0..n).map(|k| tv[k] * av[k]).collect();
    Ok((lq_norm(&lhs_terms, qexp), lq_norm(&rhs_terms, qexp)))
}

/// The `l^rho` embedding norm `||{w_k / v_k}||_{l^rho}` with
/// `1/rho = (1/r - 1)_+`, and a brute-force lower bound on the embedding
/// constant `sup_a ||a w||_{l^r} / ||a v||_{l^1}` from the analytic extremal
/// plus seeded random trials. Hölder gives `bruteforce_lower <= rho_norm`
/// exactly; the extremal attains it.
pub fn embedding_rho(
    v: &WeightedSequence,
    w: &WeightedSequence,
    r: f64,
) -> Result<(f64, f64)> {
    if v.len() != w.len() || v.lo() != w.lo() {
        return Err(Error::Domain("v and w must share their index set".into()));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("r must be positive finite, got {r}")));
    }
    let vv = v.values();
    let wv = w.values();
    for &x in vv {
        if !(x > 0.0) {
            return Err(Error::Precondition("v entries must be positive".into()));
        }
    }
    let n = vv.len();
    let ratios: Vec<f64> = (0..n).map(|k| wv[k] / vv[k]).collect();

    let rho_norm = if r >= 1.0 {
        ratios.iter().fold(0.0f64, |a, &b| a.max(b))
    } else {
        let rho = r / (1.0 - r);
        xpow(ratios.iter().map(|&c| xpow(c, rho)).sum(), 1.0 / rho)
    };

    let ratio_of = |a: &[f64]| -> f64 {
        let num = xpow(
            (0..n).map(|k| xpow(a[k] * wv[k], r)).sum::<f64>(),
            1.0 / r,
        );
        let den: f64 = (0..n).map(|k| a[k] * vv[k]).sum();
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    };

    let mut lower = 0.0f64;
    // analytic extremal: a_k ~ (w_k/v_k)^rho / v_k for r < 1, best single
    // index for r >= 1
    if r < 1.0 {
        let rho = r / (1.0 - r);
        let a: Vec<f64> = (0..n).map(|k| xpow(ratios[k], rho) / vv[k]).collect();
        if a.iter().any(|&x| x > 0.0) {
            lower = lower.max(ratio_of(&a));
        }
    }
    for k in 0..n {
        let mut a = vec![0.0; n];
        a[k] = 1.0;
        lower = lower.max(ratio_of(&a));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x48435254);
    for _ in 0..1000 {
        let a: Vec<f64> = (0..n)
            .map(|_| {
                let t: f64 = rng.gen_range(-4.0f64..4.0);
                10f64.powf(t)
            })
            .collect();
        lower = lower.max(ratio_of(&a));
    }
    Ok((rho_norm, lower))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ext::rel_close;
    use crate::weightfn::Role;

    fn canonical() -> ProblemInstance {
        ProblemInstance::new(
            PiecewisePowerWeight::constant(1.0),
            PiecewisePowerWeight::power(1.0, 2.0),
            PiecewisePowerWeight::constant(1.0),
            1.0,
            1.0,
        )
        .unwrap()
    }

    fn mass_three_u() -> PiecewisePowerWeight {
        PiecewisePowerWeight::from_parts(&[(1.0, 1.0, 0.0), (INF, 2.0, -2.0)], Role::Weight)
            .unwrap()
    }

    #[test]
    fn covering_constant_u() {
        let u = PiecewisePowerWeight::constant(1.0);
        let cov = covering_sequence(&u, -2, 2).unwrap();
        for k in -2..=2 {
            assert!(rel_close(cov.x(k).unwrap(), 2f64.powi(k), 1e-12));
        }
        assert!(cov.m_index.is_none());
        assert!(cov.truncated);
        assert!(cov.max_cumulative_error(&u) <= 1e-10);
    }

    #[test]
    fn covering_finite_mass() {
        let u = mass_three_u();
        assert!(rel_close(u.total_mass(), 3.0, 1e-12));
        let cov = covering_sequence(&u, -1, 40).unwrap();
        assert_eq!(cov.m_index, Some(1));
        assert!(rel_close(cov.x(-1).unwrap(), 0.5, 1e-12));
        assert!(rel_close(cov.x(0).unwrap(), 1.0, 1e-12));
        assert!(rel_close(cov.x(1).unwrap(), 2.0, 1e-12));
        assert_eq!(cov.x(2), Some(INF));
        assert!(!cov.truncated);
        assert!(cov.max_cumulative_error(&u) <= 1e-10);
    }

    #[test]
    fn covering_exact_power_of_two_mass() {
        // mass exactly 2: M drops to 0 so x_{M+1} = inf solves exactly
        let u = PiecewisePowerWeight::from_parts(&[(1.0, 1.0, 0.0), (INF, 1.0, -2.0)], Role::Weight)
            .unwrap();
        assert!(rel_close(u.total_mass(), 2.0, 1e-12));
        let cov = covering_sequence(&u, -3, 10).unwrap();
        assert_eq!(cov.m_index, Some(0));
        assert_eq!(cov.x(1), Some(INF));
        assert!(covering_sequence(&u, 3, 1).is_err());
    }

    #[test]
    fn block_a_canonical() {
        // every block contributes 2^k * int_{2^k}^{2^{k+1}} s^-2 ds = 1/2
        let p = canonical();
        let cov = covering_sequence(&p.u, -10, 10).unwrap();
        let a = discrete_block_A(&p, &cov, &p.v_up).unwrap();
        assert!(rel_close(a, 0.5, 1e-10), "A = {a}");
        // homogeneity: doubling v_mono halves A
        let v2 = PiecewisePowerWeight::power(2.0, 2.0);
        let a2 = discrete_block_A(&p, &cov, &v2).unwrap();
        assert!(rel_close(a2, 0.25, 1e-10));
        // non-monotone rejected
        let bad = PiecewisePowerWeight::power(1.0, -1.0);
        assert!(discrete_block_A(&p, &cov, &bad).is_err());
    }

    #[test]
    fn block_a_truncated_growth() {
        // v_mono = x, q = r = 1: each block term is 2^k ln 2, so the
        // truncated sup sits at the top stored block
        let p = ProblemInstance::new(
            PiecewisePowerWeight::constant(1.0),
            PiecewisePowerWeight::power(1.0, 1.0),
            PiecewisePowerWeight::constant(1.0),
            1.0,
            1.0,
        )
        .unwrap();
        let cov = covering_sequence(&p.u, 0, 5).unwrap();
        let a = discrete_block_A(&p, &cov, &p.v_up).unwrap();
        assert!(rel_close(a, 16.0 * 2f64.ln(), 1e-10), "A = {a}");
    }

    #[test]
    fn block_decompose_basics() {
        let p = canonical();
        let eng = QuadEngine::new(1e-9);
        let cov = covering_sequence(&p.u, -20, 20).unwrap();
        let (b0, t0) = block_decompose_lhs(&p, &cov, &AtomicFunction::empty(), &eng).unwrap();
        assert_eq!((b0, t0), (0.0, 0.0));
        let h = AtomicFunction::unit(1.0).unwrap();
        let (b, t) = block_decompose_lhs(&p, &cov, &h, &eng).unwrap();
        let (b2, t2) = block_decompose_lhs(&p, &cov, &h.scale(2.0), &eng).unwrap();
        assert!(rel_close(b2, 2.0 * b, 1e-12));
        assert!(rel_close(t2, 2.0 * t, 1e-12));
        // two-sided band against the exact lhs value 0.5
        let ratio = 0.5 / (b + t);
        assert!((0.125..=8.0).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn geom_equivalence_examples() {
        let tau = WeightedSequence::new(0, (0..=10).map(|k| 2f64.powi(k)).collect()).unwrap();
        let a = WeightedSequence::new(0, vec![1.0; 11]).unwrap();
        let (lhs, rhs) = geom_equivalence(&tau, &a, 1.0, GeomMode::Sum).unwrap();
        let want_lhs: f64 = (0..=10).map(|k| 2f64.powi(k) * (11 - k) as f64).sum();
        let want_rhs: f64 = (0..=10).map(|k| 2f64.powi(k)).sum();
        assert!(rel_close(lhs, want_lhs, 1e-12));
        assert!(rel_close(rhs, want_rhs, 1e-12));
        assert!(lhs / rhs <= 4.0);

        // single nonzero entry at the top: both sides equal tau_M * a_M
        let mut single = vec![0.0; 11];
        single[10] = 3.0;
        let a1 = WeightedSequence::new(0, single).unwrap();
        let (l1, r1) = geom_equivalence(&tau, &a1, INF, GeomMode::Sum).unwrap();
        assert!(rel_close(l1, 1024.0 * 3.0, 1e-12));
        assert!(rel_close(l1, r1, 1e-12));

        // zero sequence
        let z = WeightedSequence::new(0, vec![0.0; 11]).unwrap();
        assert_eq!(geom_equivalence(&tau, &z, 2.0, GeomMode::Sup).unwrap(), (0.0, 0.0));

        // non-geometric tau rejected
        let flat = WeightedSequence::new(0, vec![1.0; 11]).unwrap();
        assert!(matches!(
            geom_equivalence(&flat, &a, 1.0, GeomMode::Sum),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn embedding_examples() {
        let v = WeightedSequence::new(0, vec![1.0, 2.0, 4.0]).unwrap();
        let w = WeightedSequence::new(0, vec![3.0, 1.0, 8.0]).unwrap();
        let (norm, lower) = embedding_rho(&v, &w, 2.0).unwrap();
        assert!(rel_close(norm, 3.0, 1e-12));
        assert!(lower <= norm * (1.0 + 1e-12) && norm <= lower * (1.0 + 1e-6));

        let ones = WeightedSequence::new(0, vec![1.0, 1.0]).unwrap();
        let (norm, lower) = embedding_rho(&ones, &ones, 0.5).unwrap();
        assert!(rel_close(norm, 2.0, 1e-12));
        assert!(rel_close(lower, 2.0, 1e-9));

        let (norm, _) = embedding_rho(&v, &v, 1.0).unwrap();
        assert!(rel_close(norm, 1.0, 1e-12));
    }
}
