//! Adaptive quadrature on `(0, inf)` and a sup-engine for non-monotone
//! products.
//!
//! Integrands here are piecewise-smooth with power behavior at `0` and `inf`,
//! so everything works in log coordinates `x = e^t`: a power-law integrand
//! becomes an exponential, tails decay (or fail to decay) geometrically, and
//! the same fixed-order rule handles both endpoints.

use std::cell::Cell;

use crate::ext::INF;

/// Default relative tolerance of the outer quadrature.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Environment variable overriding the quadrature tolerance.
pub const TOL_ENV_VAR: &str = "HARDYCERT_QUAD_TOL";

// Gauss-Legendre 15-point nodes/weights on [-1, 1].
const GL_X: [f64; 15] = [
    -0.9879925180204854,
    -0.9372733924007059,
    -0.8482065834104272,
    -0.7244177313601700,
    -0.5709721726085388,
    -0.3941513470775634,
    -0.2011940939974345,
    0.0,
    0.2011940939974345,
    0.3941513470775634,
    0.5709721726085388,
    0.7244177313601700,
    0.8482065834104272,
    0.9372733924007059,
    0.9879925180204854,
];
const GL_W: [f64; 15] = [
    0.0307532419961173,
    0.0703660474881081,
    0.1071592204671719,
    0.1395706779261543,
    0.1662692058169939,
    0.1861610000155622,
    0.1984314853271116,
    0.2025782419255613,
    0.1984314853271116,
    0.1861610000155622,
    0.1662692058169939,
    0.1395706779261543,
    0.1071592204671719,
    0.0703660474881081,
    0.0307532419961173,
];

const TAIL_PANEL_WIDTH: f64 = 2.0; // in log coordinates: factor e^2 per panel
const TAIL_EPS: f64 = 1e-12;
const MAX_TAIL_PANELS: usize = 360;
const MAX_DEPTH: u32 = 28;
// Bisection budget per `integrate` call. Nested sup evaluations make deeply
// composed integrands noisy at the ~1e-9 relative level; panels stuck on that
// noise floor otherwise subdivide without bound.
const MAX_SPLITS: u32 = 20_000;

/// Quadrature/sup engine. One engine per logical computation; it accumulates
/// the worst relative error estimate seen, which ends up in the report.
pub struct QuadEngine {
    tol: f64,
    max_rel_err: Cell<f64>,
}

impl QuadEngine {
    pub fn new(tol: f64) -> Self {
        QuadEngine {
            tol,
            max_rel_err: Cell::new(0.0),
        }
    }

    /// Engine with [`DEFAULT_TOL`], overridable via `HARDYCERT_QUAD_TOL`.
    pub fn from_env() -> Self {
        let tol = std::env::var(TOL_ENV_VAR)
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|t| *t > 0.0 && *t < 0.1)
            .unwrap_or(DEFAULT_TOL);
        QuadEngine::new(tol)
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Worst relative error estimate accumulated so far.
    pub fn max_rel_err(&self) -> f64 {
        self.max_rel_err.get()
    }

    fn record_err(&self, rel: f64) {
        if rel > self.max_rel_err.get() {
            self.max_rel_err.set(rel);
        }
    }

    /// `int_a^b f(x) dx` with `0 <= a < b <= inf`. `cuts` lists abscissae
    /// where the integrand may be non-smooth (piece breakpoints, atom
    /// positions, covering points). Non-finite integrand values and
    /// non-decaying tails produce `+inf`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, cuts: &[f64]) -> f64 {
        debug_assert!(a >= 0.0 && b > a);
        let phi = |t: f64| {
            let x = t.exp();
            let v = f(x);
            let val = v * x;
            // NaN here means 0 * inf from an overflowed abscissa or an
            // undefined integrand value; both must surface as divergence
            if val.is_nan() {
                INF
            } else {
                val
            }
        };

        // interior panel boundaries in log space
        let mut ts: Vec<f64> = cuts
            .iter()
            .copied()
            .filter(|&c| c > a && c < b && c > 0.0 && c.is_finite())
            .map(f64::ln)
            .collect();
        if a > 0.0 {
            ts.push(a.ln());
        }
        if b.is_finite() {
            ts.push(b.ln());
        }
        ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        ts.dedup();
        if ts.is_empty() {
            // fully open domain with no hints: seed around x = 1
            ts = vec![-4.0, 4.0];
        } else if ts.len() == 1 {
            // widen only into open directions; never past a finite endpoint
            let t0 = ts[0];
            if a == 0.0 {
                ts.insert(0, t0 - 4.0);
            }
            if b.is_infinite() {
                ts.push(t0 + 4.0);
            }
        }
        // subdivide wide spans so the rough pass sees structure
        let mut bounds = Vec::with_capacity(ts.len() * 2);
        bounds.push(ts[0]);
        for w in ts.windows(2) {
            let span = w[1] - w[0];
            let n = (span / 4.0).ceil().max(1.0) as usize;
            for j in 1..=n {
                bounds.push(w[0] + span * j as f64 / n as f64);
            }
        }

        // rough pass for the error budget
        let mut rough = 0.0f64;
        for w in bounds.windows(2) {
            let v = gl15(&phi, w[0], w[1]);
            if v.is_infinite() {
                return INF;
            }
            rough += v;
        }
        let scale = rough.abs().max(1e-300);
        let abs_tol = self.tol * scale / bounds.len() as f64;

        let splits = Cell::new(0u32);
        let mut total = 0.0f64;
        let mut err = 0.0f64;
        for w in bounds.windows(2) {
            let (v, e) = adapt(&phi, w[0], w[1], abs_tol, 0, &splits);
            if v.is_infinite() {
                return INF;
            }
            total += v;
            err += e;
        }

        // tails
        if a == 0.0 {
            match self.tail(&phi, bounds[0], -TAIL_PANEL_WIDTH, abs_tol, &splits, &mut total, &mut err)
            {
                TailOutcome::Converged => {}
                TailOutcome::Divergent => return INF,
            }
        }
        if b.is_infinite() {
            let top = *bounds.last().unwrap();
            match self.tail(&phi, top, TAIL_PANEL_WIDTH, abs_tol, &splits, &mut total, &mut err) {
                TailOutcome::Converged => {}
                TailOutcome::Divergent => return INF,
            }
        }

        if total != 0.0 {
            self.record_err(err / total.abs());
        }
        total
    }

    fn tail<F: Fn(f64) -> f64>(
        &self,
        phi: &F,
        start: f64,
        step: f64,
        abs_tol: f64,
        splits: &Cell<u32>,
        total: &mut f64,
        err: &mut f64,
    ) -> TailOutcome {
        let mut t = start;
        let mut prev = INF;
        let mut small_streak = 0u32;
        let mut hist: Vec<f64> = Vec::new();
        for _ in 0..MAX_TAIL_PANELS {
            let (t0, t1) = if step > 0.0 { (t, t + step) } else { (t + step, t) };
            let rough = gl15(phi, t0, t1);
            if rough.is_infinite() {
                return TailOutcome::Divergent;
            }
            // panel-relative tolerance: a growing tail only needs enough
            // accuracy to certify growth, not the global budget
            let panel_tol = abs_tol.max(TAIL_EPS * rough.abs());
            let (v, e) = adapt(phi, t0, t1, panel_tol, 0, splits);
            if v.is_infinite() {
                return TailOutcome::Divergent;
            }
            *total += v;
            *err += e;
            // geometric closing: a power tail is an exponential in log
            // coordinates, so once four consecutive panels decay at a stable
            // ratio the remainder sums in closed form. This keeps slowly
            // decaying tails (exponents near the integrability boundary) from
            // marching hundreds of panels toward the certificate floor.
            hist.push(v);
            let n = hist.len();
            if n >= 5 && hist[n - 5..].iter().all(|&p| p > 0.0 && p.is_finite()) {
                let r1 = hist[n - 1] / hist[n - 2];
                let r2 = hist[n - 2] / hist[n - 3];
                let r3 = hist[n - 3] / hist[n - 4];
                let r4 = hist[n - 4] / hist[n - 5];
                let stable = (r1 - r2).abs() <= 2e-3 * r1
                    && (r2 - r3).abs() <= 2e-3 * r2
                    && (r3 - r4).abs() <= 2e-3 * r3;
                if stable && r1 < 0.995 {
                    let closing = v * r1 / (1.0 - r1);
                    *total += closing;
                    *err += 2e-3 * closing;
                    return TailOutcome::Converged;
                }
                // the growing mirror image: a stable ratio above 1 is a pure
                // power past its integrability boundary, so stop marching
                if stable && r1 > 1.02 {
                    return TailOutcome::Divergent;
                }
            }
            // geometric decay certificate: two consecutive panels below the
            // relative floor, each no bigger than the one before
            if v.abs() <= TAIL_EPS * total.abs().max(1e-300) && v.abs() <= prev {
                small_streak += 1;
                if small_streak >= 2 {
                    return TailOutcome::Converged;
                }
            } else {
                small_streak = 0;
            }
            prev = v.abs();
            t += step;
        }
        TailOutcome::Divergent
    }

    /// `sup { f(x) : x in (a, b) }` over a log grid of `cuts` plus refinement;
    /// endpoint limits probed by geometric widening, with power-law growth
    /// reported as `+inf`.
    pub fn sup<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, cuts: &[f64]) -> f64 {
        debug_assert!(a >= 0.0 && b > a);
        let g = |x: f64| {
            let v = f(x);
            if v.is_nan() {
                INF
            } else {
                v
            }
        };

        let mut anchors: Vec<f64> = cuts
            .iter()
            .copied()
            .filter(|&c| c > a && c < b && c.is_finite())
            .collect();
        if a > 0.0 {
            anchors.push(a);
        }
        if b.is_finite() {
            anchors.push(b);
        }
        anchors.sort_by(|x, y| x.partial_cmp(y).unwrap());
        anchors.dedup();

        let lo = if a > 0.0 {
            a
        } else {
            anchors.first().copied().unwrap_or(1.0).min(1.0) * 1e-6
        };
        let hi = if b.is_finite() {
            b
        } else {
            anchors.last().copied().unwrap_or(1.0).max(1.0) * 1e6
        };

        // log-spaced scan plus the anchors themselves
        const N: usize = 384;
        let mut samples: Vec<f64> = Vec::with_capacity(N + anchors.len() + 1);
        let (llo, lhi) = (lo.ln(), hi.ln());
        for i in 0..=N {
            samples.push((llo + (lhi - llo) * i as f64 / N as f64).exp());
        }
        samples.extend_from_slice(&anchors);
        samples.retain(|&x| x > a && (x <= b));

        let mut best = 0.0f64;
        let mut best_x = lo;
        for &x in &samples {
            let v = g(x);
            if v > best {
                best = v;
                best_x = x;
            }
        }
        if best.is_infinite() {
            return INF;
        }

        // widen toward inf / 0 when the domain is unbounded there
        if b.is_infinite() {
            match widen(&g, hi, 10.0, best) {
                WidenOutcome::Bounded(v) => best = best.max(v),
                WidenOutcome::Divergent => return INF,
            }
        }
        if a == 0.0 {
            match widen(&g, lo, 0.1, best) {
                WidenOutcome::Bounded(v) => best = best.max(v),
                WidenOutcome::Divergent => return INF,
            }
        }

        // golden-section refinement in log space around the best scan point
        let step = (lhi - llo) / N as f64;
        let mut la = best_x.ln() - step;
        let mut lb = best_x.ln() + step;
        if a > 0.0 {
            la = la.max(a.ln());
        }
        if b.is_finite() {
            lb = lb.min(b.ln());
        }
        const GR: f64 = 0.618_033_988_749_894_9;
        for _ in 0..72 {
            let c = lb - GR * (lb - la);
            let d = la + GR * (lb - la);
            if g(c.exp()) < g(d.exp()) {
                la = c;
            } else {
                lb = d;
            }
            if lb - la < 1e-12 {
                break;
            }
        }
        let refined = g(((la + lb) / 2.0).exp());
        best.max(refined)
    }
}

enum TailOutcome {
    Converged,
    Divergent,
}

enum WidenOutcome {
    Bounded(f64),
    Divergent,
}

/// Probe the limit of `g` as `x` marches geometrically (factor `fac`) from
/// `from`. A value that keeps growing by a fixed relative margin out to the
/// representable range is power-law growth, reported divergent; a value that
/// stalls is a finite limit.
fn widen<F: Fn(f64) -> f64>(g: &F, from: f64, fac: f64, floor: f64) -> WidenOutcome {
    let mut x = from;
    let mut prev = g(x);
    if prev.is_infinite() {
        return WidenOutcome::Divergent;
    }
    let mut best = prev.max(floor);
    let mut cliff = false;
    for _ in 0..300 {
        x *= fac;
        if !(1e-290..=1e290).contains(&x) {
            break;
        }
        let v = g(x);
        if v.is_infinite() {
            return WidenOutcome::Divergent;
        }
        if v > best {
            best = v;
        }
        if v <= prev * (1.0 + 1e-9) {
            // a collapse to exact zero after uninterrupted growth is factor
            // underflow at the f64 range limit, not a stall; fall through and
            // judge by the growth accumulated so far
            if v == 0.0 && prev > 0.0 {
                cliff = true;
                break;
            }
            return WidenOutcome::Bounded(best);
        }
        prev = v;
    }
    let margin = if cliff { 1e3 } else { 1.0 };
    if best > floor.max(1e-300) * margin {
        WidenOutcome::Divergent
    } else {
        WidenOutcome::Bounded(best)
    }
}

fn gl15<F: Fn(f64) -> f64>(phi: &F, t0: f64, t1: f64) -> f64 {
    let half = 0.5 * (t1 - t0);
    let mid = 0.5 * (t0 + t1);
    let mut acc = 0.0;
    for i in 0..15 {
        let v = phi(mid + half * GL_X[i]);
        if !v.is_finite() {
            return INF;
        }
        acc += GL_W[i] * v;
    }
    acc * half
}

fn adapt<F: Fn(f64) -> f64>(
    phi: &F,
    t0: f64,
    t1: f64,
    abs_tol: f64,
    depth: u32,
    splits: &Cell<u32>,
) -> (f64, f64) {
    let whole = gl15(phi, t0, t1);
    let mid = 0.5 * (t0 + t1);
    let left = gl15(phi, t0, mid);
    let right = gl15(phi, mid, t1);
    if whole.is_infinite() || left.is_infinite() || right.is_infinite() {
        return (INF, 0.0);
    }
    let refined = left + right;
    let err = (whole - refined).abs();
    // the relative floor keeps panels whose estimates sit on the integrand's
    // own noise floor (nested sup refinement) from recursing forever
    if err <= abs_tol
        || err <= 1e-11 * refined.abs()
        || depth >= MAX_DEPTH
        || splits.get() >= MAX_SPLITS
    {
        return (refined, err);
    }
    splits.set(splits.get() + 1);
    let (lv, le) = adapt(phi, t0, mid, abs_tol * 0.5, depth + 1, splits);
    if lv.is_infinite() {
        return (INF, 0.0);
    }
    let (rv, re) = adapt(phi, mid, t1, abs_tol * 0.5, depth + 1, splits);
    if rv.is_infinite() {
        return (INF, 0.0);
    }
    (lv + rv, le + re)
}
