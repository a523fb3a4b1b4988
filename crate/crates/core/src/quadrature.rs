//! Quadrature rules for the integrands this crate actually meets: smooth
//! factors against the `1/√((t-lo)(hi-t))` Chebyshev weight, one-sided
//! `1/√|t-e|` endpoint singularities, and principal-value Cauchy integrals
//! on band interiors.

use alloc::format;
use alloc::vec::Vec;

use crate::bandset::{BandSet, Interval};
use crate::error::{Error, Result};
#[cfg(not(feature = "std"))]
use crate::float::FloatFuncs;

/// Which endpoint of a panel carries the singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularEnd {
    Lo,
    Hi,
}

/// Orders, tolerances and refinement policy.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureSpec {
    /// Nodes per panel (≥ 4).
    pub order: usize,
    /// Two successive refinements must agree to this relative tolerance.
    pub refine_tol: f64,
    /// Hard cap on refinement rounds.
    pub max_refinements: usize,
    /// Principal-value evaluation refuses points closer than this fraction
    /// of the host band length to a band endpoint.
    pub pv_exclusion: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            order: 64,
            refine_tol: 1e-10,
            max_refinements: 12,
            pv_exclusion: 1e-6,
        }
    }
}

impl QuadratureSpec {
    pub fn with_order(order: usize) -> Self {
        QuadratureSpec { order, ..Default::default() }
    }
}

/// A ready-to-use quadrature engine: a Gauss–Legendre rule of the configured
/// order plus the refinement drivers. All methods are pure.
#[derive(Debug, Clone)]
pub struct Quadrature {
    spec: QuadratureSpec,
    gl_nodes: Vec<f64>,
    gl_weights: Vec<f64>,
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence. Adequate to machine precision for the orders used
/// here (tested against the classical 5-point values).
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi-style initial guess
        let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_with_derivative(n, 0.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

impl Quadrature {
    pub fn new(spec: QuadratureSpec) -> Result<Self> {
        if spec.order < 4 {
            return Err(Error::validation(format!(
                "quadrature order must be ≥ 4, got {}",
                spec.order
            )));
        }
        let (gl_nodes, gl_weights) = gauss_legendre(spec.order);
        Ok(Quadrature { spec, gl_nodes, gl_weights })
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    fn sample(f: &dyn Fn(f64) -> f64, t: f64) -> Result<f64> {
        let v = f(t);
        if !v.is_finite() {
            return Err(Error::numerical(format!(
                "integrand evaluated to a non-finite value at t = {t}"
            )));
        }
        Ok(v)
    }

    /// `∫_I f(t) / √((t-lo)(hi-t)) dt` by the n-point Gauss–Chebyshev rule
    /// `(π/n) Σ f(m + r cos((2k-1)π/2n))`. Exact for polynomial `f` of degree
    /// up to `2n - 1`.
    pub fn chebyshev(&self, f: &dyn Fn(f64) -> f64, iv: Interval) -> Result<f64> {
        self.chebyshev_n(f, iv, self.spec.order)
    }

    fn chebyshev_n(&self, f: &dyn Fn(f64) -> f64, iv: Interval, n: usize) -> Result<f64> {
        let m = iv.midpoint();
        let r = 0.5 * iv.length();
        let mut acc = 0.0;
        for k in 1..=n {
            let theta = (2.0 * k as f64 - 1.0) * core::f64::consts::PI / (2.0 * n as f64);
            acc += Self::sample(f, m + r * theta.cos())?;
        }
        Ok(acc * core::f64::consts::PI / n as f64)
    }

    /// Chebyshev rule with node doubling until two successive estimates agree
    /// to `refine_tol` relative to `scale_floor.max(|estimate|)`.
    pub fn chebyshev_refined(
        &self,
        f: &dyn Fn(f64) -> f64,
        iv: Interval,
        scale_floor: f64,
    ) -> Result<f64> {
        let mut n = self.spec.order;
        let mut prev = self.chebyshev_n(f, iv, n)?;
        for _ in 0..self.spec.max_refinements {
            n *= 2;
            let cur = self.chebyshev_n(f, iv, n)?;
            if (cur - prev).abs() <= self.spec.refine_tol * cur.abs().max(scale_floor) {
                return Ok(cur);
            }
            prev = cur;
        }
        Ok(prev)
    }

    /// Plain Gauss–Legendre on a panel.
    pub fn smooth(&self, f: &dyn Fn(f64) -> f64, iv: Interval) -> Result<f64> {
        let m = iv.midpoint();
        let r = 0.5 * iv.length();
        let mut acc = 0.0;
        for (x, w) in self.gl_nodes.iter().zip(&self.gl_weights) {
            acc += w * Self::sample(f, m + r * x)?;
        }
        Ok(acc * r)
    }

    /// `∫_I g(t) dt` where `g` may blow up like `1/√|t-e|` at the endpoint
    /// `e` named by `end`. Substituting `t = e ± u²` turns that into a smooth
    /// integrand `2u·g(e ± u²)`, which is integrated by Gauss–Legendre.
    pub fn endpoint_substituted(
        &self,
        g: &dyn Fn(f64) -> f64,
        iv: Interval,
        end: SingularEnd,
    ) -> Result<f64> {
        let len = iv.length();
        let umax = len.sqrt();
        let transformed = |u: f64| -> f64 {
            let t = match end {
                SingularEnd::Lo => iv.lo + u * u,
                SingularEnd::Hi => iv.hi - u * u,
            };
            2.0 * u * g(t)
        };
        self.smooth(&transformed, Interval { lo: 0.0, hi: umax })
    }

    /// [`Self::endpoint_substituted`] with dyadic panel refinement toward the
    /// singular endpoint: the panel adjacent to `e` is halved, the split-off
    /// part integrated smoothly, until two successive totals agree.
    pub fn endpoint_substituted_refined(
        &self,
        g: &dyn Fn(f64) -> f64,
        iv: Interval,
        end: SingularEnd,
    ) -> Result<f64> {
        let mut outer = 0.0; // accumulated panels away from the singularity
        let mut core_iv = iv;
        let mut prev = self.endpoint_substituted(g, core_iv, end)?;
        for _ in 0..self.spec.max_refinements {
            // halve the panel touching the singular end
            let mid = core_iv.midpoint();
            let (next_core, split_off) = match end {
                SingularEnd::Lo => (
                    Interval { lo: core_iv.lo, hi: mid },
                    Interval { lo: mid, hi: core_iv.hi },
                ),
                SingularEnd::Hi => (
                    Interval { lo: mid, hi: core_iv.hi },
                    Interval { lo: core_iv.lo, hi: mid },
                ),
            };
            // the split-off panel is clear of the singularity but its
            // integrand still varies fastest toward `e`; substitution keeps
            // the nodes biased that way at no cost
            let away_end = end;
            let split_val = self.endpoint_substituted(g, split_off, away_end)?;
            let core_val = self.endpoint_substituted(g, next_core, end)?;
            let cur = outer + split_val + core_val;
            let done = (cur - prev).abs() <= self.spec.refine_tol * cur.abs();
            outer += split_val;
            core_iv = next_core;
            prev = cur;
            if done {
                break;
            }
        }
        Ok(prev)
    }

    /// `∫_I f(t)/√|t-e| dt` with the singularity at the endpoint named by
    /// `end` and `f` finite on the half-open interval.
    ///
    /// Substituting `t = e ± u²` gives `2 ∫ f(e ± u²) du`: the square root
    /// cancels exactly, so no near-endpoint `t - e` is ever recomputed.
    pub fn one_sided(
        &self,
        f: &dyn Fn(f64) -> f64,
        iv: Interval,
        end: SingularEnd,
    ) -> Result<f64> {
        let transformed = Self::one_sided_transform(f, iv, end);
        self.smooth(&transformed, Interval { lo: 0.0, hi: iv.length().sqrt() })
    }

    /// Refined version of [`Self::one_sided`]: dyadic panels in the
    /// substituted variable, refined toward `u = 0` where the integrand's
    /// structure concentrates.
    pub fn one_sided_refined(
        &self,
        f: &dyn Fn(f64) -> f64,
        iv: Interval,
        end: SingularEnd,
    ) -> Result<f64> {
        let transformed = Self::one_sided_transform(f, iv, end);
        self.smooth_refined_toward(
            &transformed,
            Interval { lo: 0.0, hi: iv.length().sqrt() },
            SingularEnd::Lo,
        )
    }

    fn one_sided_transform<'a>(
        f: &'a dyn Fn(f64) -> f64,
        iv: Interval,
        end: SingularEnd,
    ) -> impl Fn(f64) -> f64 + 'a {
        move |u: f64| {
            let t = match end {
                SingularEnd::Lo => iv.lo + u * u,
                SingularEnd::Hi => iv.hi - u * u,
            };
            2.0 * f(t)
        }
    }

    /// Gauss–Legendre with dyadic panel refinement toward one end, for smooth
    /// integrands whose variation concentrates there.
    pub fn smooth_refined_toward(
        &self,
        f: &dyn Fn(f64) -> f64,
        iv: Interval,
        end: SingularEnd,
    ) -> Result<f64> {
        let mut outer = 0.0;
        let mut core_iv = iv;
        let mut prev = self.smooth(f, core_iv)?;
        for _ in 0..self.spec.max_refinements {
            let mid = core_iv.midpoint();
            let (next_core, split_off) = match end {
                SingularEnd::Lo => (
                    Interval { lo: core_iv.lo, hi: mid },
                    Interval { lo: mid, hi: core_iv.hi },
                ),
                SingularEnd::Hi => (
                    Interval { lo: mid, hi: core_iv.hi },
                    Interval { lo: core_iv.lo, hi: mid },
                ),
            };
            let split_val = self.smooth(f, split_off)?;
            let core_val = self.smooth(f, next_core)?;
            let cur = outer + split_val + core_val;
            let done = (cur - prev).abs() <= self.spec.refine_tol * cur.abs();
            outer += split_val;
            core_iv = next_core;
            prev = cur;
            if done {
                break;
            }
        }
        Ok(prev)
    }

    /// `∫_I g(t) dt` where `g` may carry inverse-square-root singularities at
    /// both endpoints: the panel is split at the midpoint and each half is
    /// integrated with refinement toward its outer end.
    pub fn both_ends_refined(&self, g: &dyn Fn(f64) -> f64, iv: Interval) -> Result<f64> {
        let mid = iv.midpoint();
        let left = self.endpoint_substituted_refined(
            g,
            Interval { lo: iv.lo, hi: mid },
            SingularEnd::Lo,
        )?;
        let right = self.endpoint_substituted_refined(
            g,
            Interval { lo: mid, hi: iv.hi },
            SingularEnd::Hi,
        )?;
        Ok(left + right)
    }

    /// Principal value `P.V. ∫_E w(t)/(t-x) dt` for `x` strictly inside a
    /// band.
    ///
    /// On the host band `[c, d]` the singularity is subtracted:
    ///
    /// ```text
    /// ∫_c^d (w(t)-w(x))/(t-x) dt  +  w(x)·log((d-x)/(x-c)),
    /// ```
    ///
    /// with the subtracted integral split at `x` and endpoint-substituted
    /// toward the band edges (where `w` may blow up like an inverse square
    /// root). Other bands contribute ordinary integrals.
    pub fn pv_cauchy(
        &self,
        w: &dyn Fn(f64) -> f64,
        set: &BandSet,
        x: f64,
    ) -> Result<f64> {
        let host = set.band_containing(x).ok_or_else(|| {
            Error::domain(format!("PV point {x} does not lie inside a band"))
        })?;
        let band = set.band(host);
        if !band.contains_interior(x) {
            return Err(Error::domain(format!("PV point {x} sits on a band endpoint")));
        }
        let delta_min = self.spec.pv_exclusion * band.length();
        if (x - band.lo).min(band.hi - x) < delta_min {
            return Err(Error::precision(format!(
                "PV point {x} is within {delta_min:.3e} of a band endpoint; \
                 move it at least pv_exclusion × band length away"
            )));
        }
        let wx = Self::sample(w, x)?;
        // The subtracted integrand needs resolution both at the band edges
        // (where w may blow up) and at x (where w varies and the quotient
        // cancels), so each side panel is refined toward both of its ends.
        let psi = |t: f64| {
            if t == x {
                // a node rounded onto x itself; its true value is w'(x), but
                // the adjacent weight is negligible at that distance
                return 0.0;
            }
            (w(t) - wx) / (t - x)
        };
        let left = self.both_ends_refined(&psi, Interval { lo: band.lo, hi: x })?;
        let right = self.both_ends_refined(&psi, Interval { lo: x, hi: band.hi })?;
        let mut total = left + right + wx * ((band.hi - x) / (x - band.lo)).ln();
        for (k, b) in set.bands().iter().enumerate() {
            if k == host {
                continue;
            }
            let integrand = |t: f64| w(t) / (t - x);
            total += self.both_ends_refined(&integrand, *b)?;
        }
        Ok(total)
    }
}
