//! Exact algebra for piecewise power functions on `(0, inf)`.
//!
//! Every weight in this crate is a finite union of power pieces
//! `x -> coeff * x^exponent` on half-open intervals `(lo, hi]`. All inner
//! integrals, essential extrema, monotone envelopes and cumulative inversions
//! are computed in closed form, so the only numerical error downstream comes
//! from the outer quadrature and sup engines.

use crate::ext::{xmul, INF};
use crate::{Error, Result};

/// How a piecewise power function is allowed to degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Strictly positive pieces and `0 < int_0^x f < inf` for all `x`.
    Weight,
    /// Zero pieces permitted (monotone envelopes can vanish identically).
    General,
}

/// Direction of the monotone envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeDirection {
    /// Greatest non-decreasing minorant: `einf` over `[x, inf)`.
    Up,
    /// Greatest non-increasing minorant: `einf` over `(0, x]`.
    Dn,
}

/// Essential extremum mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    EssInf,
    EssSup,
}

/// One power piece `x -> coeff * x^exponent` on `(lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPiece {
    pub lo: f64,
    pub hi: f64,
    pub coeff: f64,
    pub exponent: f64,
}

impl PowerPiece {
    pub fn new(lo: f64, hi: f64, coeff: f64, exponent: f64) -> Self {
        PowerPiece {
            lo,
            hi,
            coeff,
            exponent,
        }
    }

    fn value(&self, x: f64) -> f64 {
        if self.coeff == 0.0 {
            0.0
        } else {
            self.coeff * x.powf(self.exponent)
        }
    }

    /// Right limit at `lo` (limit `x -> 0+` when `lo == 0`).
    fn limit_lo(&self) -> f64 {
        if self.coeff == 0.0 {
            return 0.0;
        }
        if self.lo == 0.0 {
            if self.exponent > 0.0 {
                0.0
            } else if self.exponent == 0.0 {
                self.coeff
            } else {
                INF
            }
        } else {
            self.value(self.lo)
        }
    }

    /// Value at `hi` (limit `x -> inf` when `hi == inf`).
    fn limit_hi(&self) -> f64 {
        if self.coeff == 0.0 {
            return 0.0;
        }
        if self.hi.is_infinite() {
            if self.exponent > 0.0 {
                INF
            } else if self.exponent == 0.0 {
                self.coeff
            } else {
                0.0
            }
        } else {
            self.value(self.hi)
        }
    }

    /// Exact `int_a^b coeff * x^exponent dx` for `lo <= a <= b <= hi`.
    fn integral(&self, a: f64, b: f64) -> f64 {
        let (c, alpha) = (self.coeff, self.exponent);
        if c == 0.0 || a == b {
            return 0.0;
        }
        let ap1 = alpha + 1.0;
        if b.is_infinite() {
            if ap1 >= 0.0 {
                return INF;
            }
            return c * a.powf(ap1) / -ap1;
        }
        if a == 0.0 {
            if ap1 <= 0.0 {
                return INF;
            }
            return c * b.powf(ap1) / ap1;
        }
        if alpha == -1.0 {
            return c * (b / a).ln();
        }
        // c * a^(alpha+1) * ((b/a)^(alpha+1) - 1) / (alpha+1), via expm1 for
        // precision when b is close to a.
        let t = (ap1 * (b / a).ln()).exp_m1();
        c * a.powf(ap1) * t / ap1
    }

    /// Solve `int_lo^x = rem` for `x` inside this piece (`0 < rem <= int_lo^hi`).
    fn invert_integral(&self, rem: f64) -> f64 {
        let (c, alpha) = (self.coeff, self.exponent);
        let ap1 = alpha + 1.0;
        if self.lo == 0.0 {
            // weight role guarantees ap1 > 0 here
            return (rem * ap1 / c).powf(1.0 / ap1);
        }
        if alpha == -1.0 {
            return self.lo * (rem / c).exp();
        }
        let z = rem * ap1 / (c * self.lo.powf(ap1));
        self.lo * ((z.ln_1p()) / ap1).exp()
    }
}

/// A positive function on `(0, inf)` given by finitely many power pieces.
///
/// Pieces are contiguous, cover `(0, inf)` exactly, and evaluation is
/// right-continuous at breakpoints: the value on `(lo, hi]` is taken from the
/// piece owning that interval.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePowerWeight {
    pieces: Vec<PowerPiece>,
    role: Role,
}

impl PiecewisePowerWeight {
    pub fn new(pieces: Vec<PowerPiece>, role: Role) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidWeight("empty piece list".into()));
        }
        if pieces[0].lo != 0.0 {
            return Err(Error::InvalidWeight("first piece must start at 0".into()));
        }
        if !pieces.last().unwrap().hi.is_infinite() {
            return Err(Error::InvalidWeight("last piece must end at inf".into()));
        }
        for (i, p) in pieces.iter().enumerate() {
            if !(p.lo < p.hi) {
                return Err(Error::InvalidWeight(format!(
                    "piece {i} has empty interval ({}, {}]",
                    p.lo, p.hi
                )));
            }
            if !p.coeff.is_finite() || p.coeff < 0.0 {
                return Err(Error::InvalidWeight(format!(
                    "piece {i} has invalid coefficient {}",
                    p.coeff
                )));
            }
            if !p.exponent.is_finite() {
                return Err(Error::InvalidWeight(format!(
                    "piece {i} has non-finite exponent"
                )));
            }
            if i > 0 && pieces[i - 1].hi != p.lo {
                return Err(Error::InvalidWeight(format!(
                    "pieces {} and {i} are not contiguous",
                    i - 1
                )));
            }
        }
        if role == Role::Weight {
            for (i, p) in pieces.iter().enumerate() {
                if p.coeff == 0.0 {
                    return Err(Error::InvalidWeight(format!(
                        "weight role requires positive coefficients (piece {i})"
                    )));
                }
            }
            if pieces[0].exponent <= -1.0 {
                return Err(Error::InvalidWeight(
                    "weight role requires first exponent > -1 (finite head integral)".into(),
                ));
            }
        }
        Ok(PiecewisePowerWeight { pieces, role })
    }

    /// The constant function `c` on `(0, inf)`.
    pub fn constant(c: f64) -> Self {
        let role = if c > 0.0 { Role::Weight } else { Role::General };
        PiecewisePowerWeight::new(vec![PowerPiece::new(0.0, INF, c, 0.0)], role).unwrap()
    }

    /// The single power `c * x^alpha` on `(0, inf)`; role weight when valid.
    pub fn power(c: f64, alpha: f64) -> Self {
        let role = if c > 0.0 && alpha > -1.0 {
            Role::Weight
        } else {
            Role::General
        };
        PiecewisePowerWeight::new(vec![PowerPiece::new(0.0, INF, c, alpha)], role).unwrap()
    }

    /// Builds a weight from `(breakpoint, coeff, exponent)` data: piece `i`
    /// runs from the previous breakpoint (0 for the first) to `breaks[i]`,
    /// with a final piece to `inf`.
    pub fn from_parts(parts: &[(f64, f64, f64)], role: Role) -> Result<Self> {
        let mut pieces = Vec::with_capacity(parts.len());
        let mut lo = 0.0;
        for &(hi, c, a) in parts {
            pieces.push(PowerPiece::new(lo, hi, c, a));
            lo = hi;
        }
        PiecewisePowerWeight::new(pieces, role)
    }

    pub fn pieces(&self) -> &[PowerPiece] {
        &self.pieces
    }

    pub fn role(&self) -> Role {
        self.role
    }

    /// Interior breakpoints (excludes 0 and inf), strictly increasing.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces[..self.pieces.len() - 1]
            .iter()
            .map(|p| p.hi)
            .collect()
    }

    fn piece_at(&self, x: f64) -> &PowerPiece {
        let i = self.pieces.partition_point(|p| p.hi < x);
        &self.pieces[i.min(self.pieces.len() - 1)]
    }

    /// Point evaluation; right-continuous at breakpoints.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("eval requires x > 0, got {x}")));
        }
        Ok(self.piece_at(x).value(x))
    }

    /// Exact `int_a^b f`; `+inf` when divergent.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        if !(a >= 0.0) || !(b >= a) {
            return Err(Error::Domain(format!(
                "integrate requires 0 <= a <= b, got ({a}, {b})"
            )));
        }
        let mut total = 0.0;
        for p in &self.pieces {
            let lo = p.lo.max(a);
            let hi = p.hi.min(b);
            if lo < hi {
                total += p.integral(lo, hi);
            }
        }
        Ok(total)
    }

    /// Total mass `int_0^inf f`.
    pub fn total_mass(&self) -> f64 {
        self.integrate(0.0, INF).unwrap()
    }

    /// Exact essential infimum/supremum over `(a, b]`, with limits at `0+`
    /// and `inf`. Each power piece is monotone, so the extremum over each
    /// piece segment is at an endpoint.
    pub fn extremum_on_interval(&self, a: f64, b: f64, mode: Extremum) -> Result<f64> {
        if !(a >= 0.0) || !(b > a) {
            return Err(Error::Domain(format!(
                "extremum requires 0 <= a < b, got ({a}, {b})"
            )));
        }
        let mut best = match mode {
            Extremum::EssInf => INF,
            Extremum::EssSup => 0.0,
        };
        for p in &self.pieces {
            let lo = p.lo.max(a);
            let hi = p.hi.min(b);
            if !(lo < hi) {
                continue;
            }
            let left = if lo == 0.0 { p.limit_lo() } else { p.value(lo) };
            let right = if hi.is_infinite() {
                p.limit_hi()
            } else {
                p.value(hi)
            };
            match mode {
                Extremum::EssInf => best = best.min(left.min(right)),
                Extremum::EssSup => best = best.max(left.max(right)),
            }
        }
        Ok(best)
    }

    /// Greatest non-decreasing (`Up`) or non-increasing (`Dn`) minorant.
    ///
    /// The result is again piecewise power (role [`Role::General`]): a
    /// backward (resp. forward) sweep caps each piece by the running future
    /// (resp. past) minimum, splitting at the closed-form crossover where
    /// `coeff * x^exponent` meets that minimum.
    pub fn envelope(&self, direction: EnvelopeDirection) -> PiecewisePowerWeight {
        match direction {
            EnvelopeDirection::Up => self.envelope_up(),
            EnvelopeDirection::Dn => self.envelope_dn(),
        }
    }

    fn envelope_up(&self) -> PiecewisePowerWeight {
        // rev[] is built right-to-left; m = einf of the envelope over (hi, inf).
        let mut rev: Vec<PowerPiece> = Vec::new();
        let mut m = INF;
        for p in self.pieces.iter().rev() {
            let (c, alpha) = (p.coeff, p.exponent);
            if c == 0.0 {
                rev.push(PowerPiece::new(p.lo, p.hi, 0.0, 0.0));
                m = 0.0;
                continue;
            }
            if alpha >= 0.0 {
                let g_lo = p.limit_lo();
                let g_hi = p.limit_hi();
                if g_lo >= m {
                    rev.push(PowerPiece::new(p.lo, p.hi, m, 0.0));
                } else if g_hi <= m {
                    rev.push(*p);
                } else {
                    // alpha > 0 here: g_lo < m < g_hi
                    let x = (m / c).powf(1.0 / alpha);
                    let x = x.clamp(p.lo, p.hi);
                    if x < p.hi {
                        rev.push(PowerPiece::new(x, p.hi, m, 0.0));
                    }
                    if p.lo < x {
                        rev.push(PowerPiece::new(p.lo, x, c, alpha));
                    }
                }
                m = m.min(g_lo);
            } else {
                // decreasing piece: einf over [x, hi] is the right endpoint value
                let val = m.min(p.limit_hi());
                rev.push(PowerPiece::new(p.lo, p.hi, val, 0.0));
                m = val;
            }
        }
        rev.reverse();
        Self::merged(rev)
    }

    fn envelope_dn(&self) -> PiecewisePowerWeight {
        let mut out: Vec<PowerPiece> = Vec::new();
        let mut m = INF; // einf of the envelope over (0, lo]
        for p in &self.pieces {
            let (c, alpha) = (p.coeff, p.exponent);
            if c == 0.0 {
                out.push(PowerPiece::new(p.lo, p.hi, 0.0, 0.0));
                m = 0.0;
                continue;
            }
            if alpha <= 0.0 {
                let g_lo = p.limit_lo();
                let g_hi = p.limit_hi();
                if g_hi >= m {
                    out.push(PowerPiece::new(p.lo, p.hi, m, 0.0));
                } else if g_lo <= m {
                    out.push(*p);
                } else {
                    // alpha < 0 here: g_hi < m < g_lo
                    let x = (m / c).powf(1.0 / alpha);
                    let x = x.clamp(p.lo, p.hi);
                    if p.lo < x {
                        out.push(PowerPiece::new(p.lo, x, m, 0.0));
                    }
                    if x < p.hi {
                        out.push(PowerPiece::new(x, p.hi, c, alpha));
                    }
                }
                m = m.min(g_hi);
            } else {
                let val = m.min(p.limit_lo());
                out.push(PowerPiece::new(p.lo, p.hi, val, 0.0));
                m = val;
            }
        }
        Self::merged(out)
    }

    fn merged(pieces: Vec<PowerPiece>) -> PiecewisePowerWeight {
        let mut merged: Vec<PowerPiece> = Vec::with_capacity(pieces.len());
        for p in pieces {
            if let Some(last) = merged.last_mut() {
                if last.coeff == p.coeff && (last.exponent == p.exponent || p.coeff == 0.0) {
                    last.hi = p.hi;
                    continue;
                }
            }
            merged.push(p);
        }
        PiecewisePowerWeight {
            pieces: merged,
            role: Role::General,
        }
    }

    /// The unique `x` with `int_0^x f = m` when `m` is below the total mass,
    /// `+inf` otherwise. Requires role weight.
    pub fn invert_cumulative(&self, m: f64) -> Result<f64> {
        if !(m > 0.0) {
            return Err(Error::Domain(format!(
                "invert_cumulative requires m > 0, got {m}"
            )));
        }
        if self.role != Role::Weight {
            return Err(Error::InvalidWeight(
                "invert_cumulative requires role weight".into(),
            ));
        }
        let mut acc = 0.0;
        for p in &self.pieces {
            let i = p.integral(p.lo, p.hi);
            if acc + i >= m && i.is_finite() {
                return Ok(p.invert_integral(m - acc).clamp(p.lo, p.hi));
            }
            if i.is_infinite() {
                // infinite mass inside this (necessarily last) piece
                return Ok(p.invert_integral(m - acc).max(p.lo));
            }
            acc += i;
        }
        Ok(INF)
    }

    /// Change of variables `x -> 1/x`: maps `f` to `x -> f(1/x) * x^-2`,
    /// again piecewise power. Involutive on pieces.
    pub fn dualize(&self) -> PiecewisePowerWeight {
        let mut pieces: Vec<PowerPiece> = self
            .pieces
            .iter()
            .rev()
            .map(|p| {
                let lo = if p.hi.is_infinite() { 0.0 } else { 1.0 / p.hi };
                let hi = if p.lo == 0.0 { INF } else { 1.0 / p.lo };
                PowerPiece::new(lo, hi, p.coeff, -p.exponent - 2.0)
            })
            .collect();
        // re-anchor endpoints so the list is exactly contiguous
        for i in 1..pieces.len() {
            pieces[i].lo = pieces[i - 1].hi;
        }
        let role = if pieces.iter().all(|p| p.coeff > 0.0) && pieces[0].exponent > -1.0 {
            Role::Weight
        } else {
            Role::General
        };
        PiecewisePowerWeight { pieces, role }
    }

    /// Exact piecewise product `self^p * other` (used for `sigma^q w` and
    /// `v^-q w`). Pieces of `self` with zero coefficient and `p < 0` make the
    /// product `+inf` there; the caller handles those regions via
    /// [`NegPowProduct::inf_hi`].
    pub fn pow_mul(&self, p: f64, other: &PiecewisePowerWeight) -> NegPowProduct {
        let mut cuts: Vec<f64> = self
            .breakpoints()
            .into_iter()
            .chain(other.breakpoints())
            .collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut pieces = Vec::with_capacity(cuts.len() + 1);
        let mut inf_hi = 0.0f64;
        let mut lo = 0.0f64;
        let mut ends = cuts;
        ends.push(INF);
        for hi in ends {
            let mid = if hi.is_infinite() {
                lo.max(1.0) * 2.0
            } else if lo == 0.0 {
                hi / 2.0
            } else {
                (lo * hi).sqrt()
            };
            let a = self.piece_at(mid);
            let b = other.piece_at(mid);
            if a.coeff == 0.0 {
                if p < 0.0 && b.coeff > 0.0 {
                    inf_hi = hi; // product is +inf on (lo, hi]
                    pieces.push(PowerPiece::new(lo, hi, 0.0, 0.0));
                } else {
                    pieces.push(PowerPiece::new(lo, hi, 0.0, 0.0));
                }
            } else {
                pieces.push(PowerPiece::new(
                    lo,
                    hi,
                    xmul(a.coeff.powf(p), b.coeff),
                    a.exponent * p + b.exponent,
                ));
            }
            lo = hi;
        }
        NegPowProduct {
            f: PiecewisePowerWeight {
                pieces,
                role: Role::General,
            },
            inf_hi,
        }
    }
}

/// A product `f^p * g` that may be identically `+inf` on an initial segment
/// `(0, inf_hi]` (where `f` vanishes and `p < 0`).
#[derive(Debug, Clone)]
pub struct NegPowProduct {
    f: PiecewisePowerWeight,
    /// Supremum of the region where the product is `+inf` (0 when none).
    pub inf_hi: f64,
}

impl NegPowProduct {
    /// Exact `int_a^b` of the product, `+inf` when `(a, b)` meets the
    /// infinite region.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        if a < self.inf_hi && a < b {
            return Ok(INF);
        }
        self.f.integrate(a, b)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if x <= self.inf_hi {
            return Ok(INF);
        }
        self.f.eval(x)
    }
}
