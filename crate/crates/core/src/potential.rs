//! Equilibrium measure, Green's function with pole at infinity, Green
//! critical points and the Widom sum, and harmonic measure at arbitrary real
//! poles, for a [`BandSet`].
//!
//! With band endpoints `e_1 < ... < e_{2M}` and `R(t) = Π (t - e_i)`, the
//! equilibrium density of the set is `|P(t)| / (π √|R(t)|)` where `P` is the
//! monic polynomial of degree `M - 1` whose integral against `1/√R` vanishes
//! over every bounded gap. `P` has exactly one root per gap; those roots are
//! the critical points of the Green's function, and `G` itself is recovered
//! by integrating `P/√R` from a band edge.
//!
//! `P` is stored by its roots, not its coefficients: the construction
//! drivers produce bands clustered over many orders of magnitude, where any
//! fixed polynomial basis on the hull loses the gap structure to rounding.
//! Each gap condition is linear in "its" root with the others held fixed
//! (the zero is the weighted mean of `t` over the gap), so a Gauss–Seidel
//! sweep with exact per-gap updates refines all roots simultaneously. All
//! distances are accumulated in log space and evaluated in gap-centered
//! offsets, which keeps the solve accurate even when a gap is thousands of
//! times shorter than its distance to the origin.

use alloc::format;
use alloc::vec::Vec;

use crate::bandset::{mobius_invert, ArcSelection, BandSet, Interval};
use crate::error::{Error, Result};
#[cfg(not(feature = "std"))]
use crate::float::FloatFuncs;
use crate::quadrature::{Quadrature, SingularEnd};

use core::f64::consts::PI;

/// Distance from the point `anchor + off` to `p`, with the offset kept exact.
///
/// `anchor - p` is a plain subtraction (exact when the two are close, small
/// relative error when far); adding the offset afterwards avoids the loss
/// that computing `(anchor + off) - p` would suffer when `off` is tiny
/// against `anchor`.
#[inline]
pub(crate) fn dist(anchor: f64, off: f64, p: f64) -> f64 {
    (anchor - p) + off
}

/// Pole of a harmonic-measure query.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Pole {
    Infinity,
    Finite(f64),
}

/// Harmonic measure of an arc at a pole.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HarmonicMeasureResult {
    pub value: f64,
    pub pole: Pole,
    pub arc: ArcSelection,
}

/// The Widom sum `Σ G(c_j)` over the bounded gaps, with the individual terms.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WidomSum {
    pub sum: f64,
    pub terms: Vec<f64>,
}

/// Solved equilibrium data of a band set.
#[derive(Debug, Clone)]
pub struct EquilibriumData {
    set: BandSet,
    /// One root of the monic gap polynomial per bounded gap (authoritative).
    roots: Vec<f64>,
    /// Chebyshev coefficients of `P` on the hull (diagnostic; low-to-high,
    /// length `N + 1`). Empty when the hull scale makes them unrepresentable.
    cheb_coeffs: Vec<f64>,
    /// Rough condition estimate of the hull-basis moment system (pivot
    /// ratio); `inf` when that solve was skipped or failed.
    condition_estimate: f64,
    /// Relative residual of each gap condition after refinement.
    residuals: Vec<f64>,
}

impl EquilibriumData {
    pub fn set(&self) -> &BandSet {
        &self.set
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    pub fn cheb_coeffs(&self) -> &[f64] {
        &self.cheb_coeffs
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Equilibrium density `|P(t)|/(π√|R(t)|)` at a band-interior point.
    pub fn density(&self, t: f64) -> Result<f64> {
        let k = self
            .set
            .band_containing(t)
            .ok_or_else(|| Error::domain(format!("density point {t} not inside a band")))?;
        if !self.set.band(k).contains_interior(t) {
            return Err(Error::domain(format!("density point {t} on a band endpoint")));
        }
        let mut log_acc = -PI.ln();
        for &z in &self.roots {
            log_acc += (t - z).abs().ln();
        }
        for &e in &self.set.endpoints() {
            log_acc -= 0.5 * (t - e).abs().ln();
        }
        Ok(log_acc.exp())
    }

    /// log of the band-`k` smooth density factor
    /// `|P(t)| / (π √(|R(t)|/((t-c)(d-t))))` at `t = anchor + off`.
    fn log_density_smooth(&self, band: usize, anchor: f64, off: f64) -> f64 {
        let mut acc = -PI.ln();
        for &z in &self.roots {
            acc += dist(anchor, off, z).abs().ln();
        }
        for (i, bb) in self.set.bands().iter().enumerate() {
            if i == band {
                continue;
            }
            acc -= 0.5 * dist(anchor, off, bb.lo).abs().ln();
            acc -= 0.5 * dist(anchor, off, bb.hi).abs().ln();
        }
        acc
    }

    /// log of `|P(t)| / √(|R(t)|/(t-e))` at `t = e + off`, the Green
    /// integrand with the edge factor `√(t-e)` removed (it cancels against
    /// the substitution `t = e ± u²`).
    fn log_green_smooth(&self, edge: f64, off: f64) -> f64 {
        let mut acc = 0.0;
        for &z in &self.roots {
            acc += dist(edge, off, z).abs().ln();
        }
        for &e in &self.set.endpoints() {
            if e == edge {
                continue;
            }
            acc -= 0.5 * dist(edge, off, e).abs().ln();
        }
        acc
    }
}

/// Chebyshev–Gauss pair `(Σ w f(τ), Σ w τ f(τ))` for offsets `τ = r cos θ_k`
/// about a gap center, with `w = π/n`.
fn gauss_chebyshev_pair(f: &dyn Fn(f64) -> f64, r: f64, n: usize) -> (f64, f64) {
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in 1..=n {
        let theta = (2.0 * k as f64 - 1.0) * PI / (2.0 * n as f64);
        let tau = r * theta.cos();
        let v = f(tau);
        s0 += v;
        s1 += tau * v;
    }
    let w = PI / n as f64;
    (w * s0, w * s1)
}

struct GapSolver<'a> {
    set: &'a BandSet,
    order: usize,
    max_refine: usize,
    tol: f64,
}

impl GapSolver<'_> {
    /// Weighted mean offset of `t` over gap `j` against
    /// `Π_{k≠j}|t-ζ_k| / √(|R(t)|/((t-a)(b-t)))`, refined by node doubling
    /// when `refine` is set. Returns `(mean_offset, m0)`.
    fn mean_offset(&self, roots: &[f64], j: usize, refine: bool) -> Result<(f64, f64)> {
        let gap = self.set.gap(j);
        let m = gap.midpoint();
        let r = 0.5 * gap.length();
        let f = |tau: f64| -> f64 {
            let mut acc = 0.0f64;
            for (k, &z) in roots.iter().enumerate() {
                if k == j {
                    continue;
                }
                acc += dist(m, tau, z).abs().ln();
            }
            for (i, b) in self.set.bands().iter().enumerate() {
                // the gap's own two endpoints carry the Chebyshev weight
                if i != j {
                    acc -= 0.5 * dist(m, tau, b.hi).abs().ln();
                }
                if i != j + 1 {
                    acc -= 0.5 * dist(m, tau, b.lo).abs().ln();
                }
            }
            acc.exp()
        };
        let mut n = self.order;
        let (mut s0, mut s1) = gauss_chebyshev_pair(&f, r, n);
        let mut mean = s1 / s0;
        if refine {
            for _ in 0..self.max_refine {
                n *= 2;
                let (t0, t1) = gauss_chebyshev_pair(&f, r, n);
                let new_mean = t1 / t0;
                let done = (new_mean - mean).abs() <= 1e-13 * r;
                s0 = t0;
                s1 = t1;
                mean = new_mean;
                if done {
                    break;
                }
            }
        }
        let _ = s1;
        if !mean.is_finite() || !s0.is_finite() || s0 <= 0.0 {
            return Err(Error::numerical(format!(
                "degenerate gap moment on gap {j}: weight integral {s0}"
            )));
        }
        Ok((mean, s0))
    }

    /// Relative residual of the gap-`j` condition for the given roots.
    fn residual(&self, roots: &[f64], j: usize) -> f64 {
        let gap = self.set.gap(j);
        let m = gap.midpoint();
        let r = 0.5 * gap.length();
        let zoff = roots[j] - m;
        let log_f = |tau: f64| -> f64 {
            let mut acc = 0.0f64;
            for (k, &z) in roots.iter().enumerate() {
                if k == j {
                    continue;
                }
                acc += dist(m, tau, z).abs().ln();
            }
            for (i, b) in self.set.bands().iter().enumerate() {
                if i != j {
                    acc -= 0.5 * dist(m, tau, b.hi).abs().ln();
                }
                if i != j + 1 {
                    acc -= 0.5 * dist(m, tau, b.lo).abs().ln();
                }
            }
            acc
        };
        let eval = |n: usize| -> f64 {
            let mut signed = 0.0;
            let mut absolute = 0.0;
            for k in 1..=n {
                let theta = (2.0 * k as f64 - 1.0) * PI / (2.0 * n as f64);
                let tau = r * theta.cos();
                let v = (tau - zoff) * log_f(tau).exp();
                signed += v;
                absolute += v.abs();
            }
            if absolute == 0.0 {
                0.0
            } else {
                signed.abs() / absolute
            }
        };
        // long gaps need many nodes before the ratio settles
        let mut n = 4 * self.order;
        let mut prev = eval(n);
        for _ in 0..self.max_refine {
            n *= 2;
            let cur = eval(n);
            let done = (cur - prev).abs() <= 0.05 * cur + 1e-13;
            prev = cur;
            if done {
                break;
            }
        }
        prev
    }

    fn solve(&self) -> Result<Vec<f64>> {
        let n_gaps = self.set.gap_count();
        let mut roots: Vec<f64> = (0..n_gaps).map(|j| self.set.gap(j).midpoint()).collect();
        if n_gaps == 0 {
            return Ok(roots);
        }
        // coarse sweeps at the base order place the roots; refined sweeps
        // polish them (the refinement is only needed near the fixed point)
        let max_sweeps = 300;
        let mut coarse = true;
        for _ in 0..max_sweeps {
            let mut worst = 0.0f64;
            for j in 0..n_gaps {
                let gap = self.set.gap(j);
                let (mean, _) = self.mean_offset(&roots, j, !coarse)?;
                let new_root = gap.midpoint() + mean;
                let rel_move = (new_root - roots[j]).abs() / (0.5 * gap.length());
                worst = worst.max(rel_move);
                roots[j] = new_root;
            }
            if coarse {
                if worst <= 1e-11 {
                    coarse = false;
                }
                continue;
            }
            if worst <= self.tol {
                // one root per gap holds structurally: each update is a
                // weighted mean of interior nodes
                for (j, &z) in roots.iter().enumerate() {
                    let gap = self.set.gap(j);
                    if !(gap.lo < z && z < gap.hi) {
                        return Err(Error::internal(format!(
                            "root {z} escaped gap {j} = [{}, {}]",
                            gap.lo, gap.hi
                        )));
                    }
                }
                return Ok(roots);
            }
        }
        Err(Error::numerical(format!(
            "gap-root refinement did not converge in {max_sweeps} sweeps"
        )))
    }
}

/// LU with partial pivoting; returns the pivot-ratio condition estimate.
fn lu_solve(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<f64> {
    let n = b.len();
    let mut max_piv = 0.0f64;
    let mut min_piv = f64::INFINITY;
    for col in 0..n {
        let mut pivot_row = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[pivot_row][col].abs() {
                pivot_row = row;
            }
        }
        if a[pivot_row][col] == 0.0 {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let piv = a[col][col];
        max_piv = max_piv.max(piv.abs());
        min_piv = min_piv.min(piv.abs());
        for row in col + 1..n {
            let factor = a[row][col] / piv;
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        b[col] /= a[col][col];
        for row in 0..col {
            b[row] -= a[row][col] * b[col];
        }
    }
    Some(max_piv / min_piv)
}

/// Moment-system solve in the hull-scaled Chebyshev basis. Returns the
/// condition estimate; kept as a diagnostic alongside the root refinement,
/// which is what actually determines the polynomial.
fn cheb_moment_condition(set: &BandSet, quad: &Quadrature) -> f64 {
    let n = set.gap_count();
    if n == 0 {
        return 1.0;
    }
    let hull = set.hull();
    let scale = |t: f64| (2.0 * t - (hull.lo + hull.hi)) / hull.length();
    let cheb = |k: usize, s: f64| (k as f64 * s.clamp(-1.0, 1.0).acos()).cos();
    let mut matrix: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut rhs = alloc::vec![0.0f64; n];
    for j in 0..n {
        let gap = set.gap(j);
        let weight = |t: f64| -> f64 {
            let mut acc = 0.0f64;
            for (i, b) in set.bands().iter().enumerate() {
                if i != j {
                    acc -= 0.5 * (t - b.hi).abs().ln();
                }
                if i != j + 1 {
                    acc -= 0.5 * (t - b.lo).abs().ln();
                }
            }
            acc.exp()
        };
        let mut row = alloc::vec![0.0f64; n];
        let mut ok = true;
        for (k, slot) in row.iter_mut().enumerate() {
            match quad.chebyshev(&|t| cheb(k, scale(t)) * weight(t), gap) {
                Ok(v) => *slot = v,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        let lead = quad.chebyshev(&|t| cheb(n, scale(t)) * weight(t), gap);
        match (ok, lead) {
            (true, Ok(v)) => {
                rhs[j] = -v;
                matrix.push(row);
            }
            _ => return f64::INFINITY,
        }
    }
    lu_solve(&mut matrix, &mut rhs).unwrap_or(f64::INFINITY)
}

/// Chebyshev coefficients of the monic root-form polynomial on the hull, by
/// interpolation at Chebyshev nodes. Diagnostic only; empty if the values
/// overflow `f64`.
fn cheb_coeffs_from_roots(set: &BandSet, roots: &[f64]) -> Vec<f64> {
    let n = roots.len();
    let hull = set.hull();
    let m_pts = n + 1;
    let mut values = alloc::vec![0.0f64; m_pts];
    for (i, v) in values.iter_mut().enumerate() {
        let theta = (2.0 * i as f64 + 1.0) * PI / (2.0 * m_pts as f64);
        let s = theta.cos();
        let t = hull.midpoint() + 0.5 * hull.length() * s;
        let mut log_abs = 0.0f64;
        let mut sign = 1.0f64;
        for &z in roots {
            let d = t - z;
            if d == 0.0 {
                sign = 0.0;
                break;
            }
            sign *= d.signum();
            log_abs += d.abs().ln();
        }
        if sign == 0.0 {
            *v = 0.0;
        } else {
            if log_abs > 700.0 {
                return Vec::new();
            }
            *v = sign * log_abs.exp();
        }
    }
    let mut coeffs = alloc::vec![0.0f64; m_pts];
    for (k, c) in coeffs.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (i, &v) in values.iter().enumerate() {
            let theta = (2.0 * i as f64 + 1.0) * PI / (2.0 * m_pts as f64);
            acc += v * (k as f64 * theta).cos();
        }
        *c = acc * if k == 0 { 1.0 } else { 2.0 } / m_pts as f64;
    }
    coeffs
}

/// Solves for the equilibrium data of a band set.
pub fn equilibrium(set: &BandSet, quad: &Quadrature) -> Result<EquilibriumData> {
    solve_equilibrium(set, quad, true)
}

/// Root-only solve for inner loops: same roots, no moment-matrix condition
/// estimate, no residual integrals, no coefficient interpolation.
pub(crate) fn equilibrium_fast(set: &BandSet, quad: &Quadrature) -> Result<EquilibriumData> {
    solve_equilibrium(set, quad, false)
}

fn solve_equilibrium(
    set: &BandSet,
    quad: &Quadrature,
    diagnostics: bool,
) -> Result<EquilibriumData> {
    // the root tolerance follows the quadrature's refinement tolerance, so a
    // coarse spec buys a proportionally cheaper solve
    let root_tol = (quad.spec().refine_tol * 1e-3).clamp(1e-14, 1e-8);
    let solver = GapSolver {
        set,
        order: quad.spec().order,
        max_refine: quad.spec().max_refinements,
        tol: root_tol,
    };
    if !diagnostics {
        let roots = solver.solve()?;
        return Ok(EquilibriumData {
            set: set.clone(),
            roots,
            cheb_coeffs: Vec::new(),
            condition_estimate: f64::NAN,
            residuals: Vec::new(),
        });
    }
    let condition_estimate = cheb_moment_condition(set, quad);
    let roots = solver.solve().map_err(|e| match e {
        Error::Numerical(msg) => Error::numerical(format!(
            "{msg} (hull-basis moment system condition estimate: {condition_estimate:.3e})"
        )),
        other => other,
    })?;
    let residuals: Vec<f64> = (0..set.gap_count())
        .map(|j| solver.residual(&roots, j))
        .collect();
    let cheb_coeffs = cheb_coeffs_from_roots(set, &roots);
    Ok(EquilibriumData {
        set: set.clone(),
        roots,
        cheb_coeffs,
        condition_estimate,
        residuals,
    })
}

/// Integral of the equilibrium density over an arc selection.
pub fn equilibrium_mass(
    eq: &EquilibriumData,
    arc: &ArcSelection,
    quad: &Quadrature,
) -> Result<f64> {
    let set = &eq.set;
    let mut total = 0.0;
    for &(k, iv) in arc.parts() {
        let band = set.band(k);
        if iv.lo == band.lo && iv.hi == band.hi {
            // whole band: the density's edge singularities are exactly the
            // Chebyshev weight, leaving a smooth factor
            let m = band.midpoint();
            let f = |tau: f64| eq.log_density_smooth(k, m, tau).exp();
            let r = 0.5 * band.length();
            let mut n = quad.spec().order;
            let (mut s0, _) = gauss_chebyshev_pair(&f, r, n);
            for _ in 0..quad.spec().max_refinements {
                n *= 2;
                let (t0, _) = gauss_chebyshev_pair(&f, r, n);
                let done = (t0 - s0).abs() <= quad.spec().refine_tol * t0.abs();
                s0 = t0;
                if done {
                    break;
                }
            }
            total += s0;
        } else {
            // partial arc: endpoint-substituted panels from each side
            let w = |t: f64| {
                let mut acc = -PI.ln();
                for &z in eq.roots() {
                    acc += (t - z).abs().ln();
                }
                for &e in &set.endpoints() {
                    acc -= 0.5 * (t - e).abs().ln();
                }
                acc.exp()
            };
            total += quad.both_ends_refined(&w, iv)?;
        }
    }
    Ok(total)
}

/// Green's function of the complement, pole at infinity, at a real point off
/// the bands: `G(x) = |∫ P/√R dt|` from the nearest band edge to `x`.
pub fn green_value(eq: &EquilibriumData, x: f64, quad: &Quadrature) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("Green evaluation point must be finite"));
    }
    let set = &eq.set;
    if set.endpoints().contains(&x) {
        return Ok(0.0);
    }
    if set.contains(x) {
        return Err(Error::domain(format!("Green evaluation point {x} inside a band")));
    }
    let hull = set.hull();
    let edge = if x < hull.lo {
        hull.lo
    } else if x > hull.hi {
        hull.hi
    } else {
        let j = set
            .gap_containing(x)
            .ok_or_else(|| Error::internal(format!("point {x} neither in band nor gap")))?;
        let gap = set.gap(j);
        if x - gap.lo <= gap.hi - x {
            gap.lo
        } else {
            gap.hi
        }
    };
    let len = (x - edge).abs();
    let toward = 1.0f64.copysign(x - edge);
    // t = edge ± u²; the edge factor √|t - edge| = u cancels the Jacobian
    let f = |u: f64| 2.0 * eq.log_green_smooth(edge, toward * u * u).exp();
    let v = quad.smooth_refined_toward(
        &f,
        Interval { lo: 0.0, hi: len.sqrt() },
        SingularEnd::Lo,
    )?;
    Ok(v.abs())
}

/// The Widom sum: Green values at the per-gap critical points (the roots of
/// the gap polynomial), reported term by term.
pub fn widom_sum(eq: &EquilibriumData, quad: &Quadrature) -> Result<WidomSum> {
    let mut terms = Vec::with_capacity(eq.roots.len());
    for &c in &eq.roots {
        terms.push(green_value(eq, c, quad)?);
    }
    Ok(WidomSum {
        sum: terms.iter().sum(),
        terms,
    })
}

/// Harmonic measure of an arc of `E` at a pole.
///
/// For the pole at infinity this is the equilibrium mass of the arc. A
/// finite pole is sent to infinity by the self-inverse Möbius map
/// `t ↦ pole + 1/(t - pole)`, which carries the harmonic measure onto the
/// equilibrium measure of the image set.
pub fn harmonic_measure(
    set: &BandSet,
    pole: Pole,
    arc: &ArcSelection,
    quad: &Quadrature,
) -> Result<HarmonicMeasureResult> {
    let value = match pole {
        Pole::Infinity => {
            let eq = equilibrium_fast(set, quad)?;
            equilibrium_mass(&eq, arc, quad)?
        }
        Pole::Finite(p) => {
            let (image, map) = mobius_invert(set, p)?;
            let image_arc = map.map_selection(&image, arc)?;
            let eq = equilibrium_fast(&image, quad)?;
            equilibrium_mass(&eq, &image_arc, quad)?
        }
    };
    Ok(HarmonicMeasureResult {
        value,
        pole,
        arc: arc.clone(),
    })
}

/// Checks the domain-extension principle `G_{E'} ≤ G_E + 1e-9` at `x`, for
/// `E ⊂ E'` (every band of `E` covered by the bands of `E'`).
pub fn domain_monotonicity_check(
    inner: &BandSet,
    outer: &BandSet,
    x: f64,
    quad: &Quadrature,
) -> Result<bool> {
    for b in inner.bands() {
        let covered = outer.bands().iter().any(|ob| ob.contains_interval(b));
        if !covered {
            return Err(Error::validation(format!(
                "band [{}, {}] of the smaller set is not covered by the larger set",
                b.lo, b.hi
            )));
        }
    }
    let eq_inner = equilibrium(inner, quad)?;
    let eq_outer = equilibrium(outer, quad)?;
    let g_inner = green_value(&eq_inner, x, quad)?;
    let g_outer = green_value(&eq_outer, x, quad)?;
    Ok(g_outer <= g_inner + 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadratureSpec;

    fn quad() -> Quadrature {
        Quadrature::new(QuadratureSpec::default()).unwrap()
    }

    fn single_band_green(c: f64, d: f64, x: f64) -> f64 {
        // G_{[c,d]}(x) = log|s + √(s²-1)|, s the hull-scaled coordinate
        let s = (2.0 * x - (c + d)) / (d - c);
        (s.abs() + (s * s - 1.0).sqrt()).ln()
    }

    #[test]
    fn arcsine_density_single_band() {
        let e = BandSet::from_pairs(&[(-1.0, 1.0)]).unwrap();
        let eq = equilibrium(&e, &quad()).unwrap();
        assert!(eq.roots().is_empty());
        for &t in &[0.0f64, 0.3, -0.77, 0.9] {
            let want = 1.0 / (PI * (1.0 - t * t).sqrt());
            let got = eq.density(t).unwrap();
            assert!((got - want).abs() < 1e-12 * want, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn symmetric_two_band_root_at_zero() {
        let e = BandSet::from_pairs(&[(-1.0, -0.5), (0.5, 1.0)]).unwrap();
        let eq = equilibrium(&e, &quad()).unwrap();
        assert_eq!(eq.roots().len(), 1);
        assert!(eq.roots()[0].abs() < 1e-12, "{}", eq.roots()[0]);
    }

    #[test]
    fn asymmetric_two_band_root_oracle() {
        // independent oracle: brute-force scan of ζ ↦ ∫_1^2 (t-ζ)/√R dt with
        // a midpoint rule after endpoint substitution on both halves
        let e = BandSet::from_pairs(&[(0.0, 1.0), (2.0, 3.0)]).unwrap();
        let brute_condition = |zeta: f64| -> f64 {
            let integrand = |t: f64| {
                let r_abs = (t * (t - 1.0) * (t - 2.0) * (t - 3.0)).abs();
                (t - zeta) / r_abs.sqrt()
            };
            let m = 1.5;
            let mut acc = 0.0;
            let steps = 20000;
            for half in 0..2 {
                let umax = (m - 1.0f64).sqrt();
                let h = umax / steps as f64;
                for i in 0..steps {
                    let u = (i as f64 + 0.5) * h;
                    let t = if half == 0 { 1.0 + u * u } else { 2.0 - u * u };
                    acc += 2.0 * u * integrand(t) * h;
                }
            }
            acc
        };
        let (mut lo, mut hi) = (1.01, 1.99);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if brute_condition(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        // symmetry about 1.5 forces the root there; the oracle agrees
        assert!((oracle - 1.5).abs() < 1e-6, "{oracle}");
        let eq = equilibrium(&e, &quad()).unwrap();
        assert!(
            (eq.roots()[0] - oracle).abs() < 1e-8,
            "{} vs {oracle}",
            eq.roots()[0]
        );
    }

    #[test]
    fn residuals_small_after_solve() {
        let e = BandSet::from_pairs(&[(-1.0, -0.3), (-0.1, 0.2), (0.6, 1.1)]).unwrap();
        let eq = equilibrium(&e, &quad()).unwrap();
        for (j, r) in eq.residuals().iter().enumerate() {
            assert!(*r < 1e-10, "gap {j}: residual {r}");
        }
        assert!(eq.condition_estimate().is_finite());
    }

    #[test]
    fn total_mass_is_one() {
        let sets = [
            BandSet::from_pairs(&[(-1.0, 1.0)]).unwrap(),
            BandSet::from_pairs(&[(-1.0, -0.5), (0.5, 1.0)]).unwrap(),
            BandSet::from_pairs(&[(-2.0, -0.9), (-0.2, 0.35), (0.5, 0.52), (1.0, 2.5)]).unwrap(),
        ];
        let q = quad();
        for e in &sets {
            let eq = equilibrium(e, &q).unwrap();
            let mass = equilibrium_mass(&eq, &ArcSelection::whole(e), &q).unwrap();
            assert!((mass - 1.0).abs() < 1e-10, "mass {mass}");
        }
    }

    #[test]
    fn arc_masses_single_band() {
        let e = BandSet::from_pairs(&[(-1.0, 1.0)]).unwrap();
        let q = quad();
        let eq = equilibrium(&e, &q).unwrap();
        let half = ArcSelection::from_window(&e, 0.0, 1.0).unwrap();
        let v = equilibrium_mass(&eq, &half, &q).unwrap();
        assert!((v - 0.5).abs() < 1e-10, "{v}");
        let third = ArcSelection::from_window(&e, 0.5, 1.0).unwrap();
        let v = equilibrium_mass(&eq, &third, &q).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn symmetric_band_mass_is_half() {
        let e = BandSet::from_pairs(&[(-1.0, -0.5), (0.5, 1.0)]).unwrap();
        let q = quad();
        let eq = equilibrium(&e, &q).unwrap();
        let left = ArcSelection::band(&e, 0).unwrap();
        let v = equilibrium_mass(&eq, &left, &q).unwrap();
        assert!((v - 0.5).abs() < 1e-10, "{v}");
    }

    #[test]
    fn green_single_band_closed_form() {
        let e = BandSet::from_pairs(&[(-1.0, 1.0)]).unwrap();
        let q = quad();
        let eq = equilibrium(&e, &q).unwrap();
        let g = green_value(&eq, 2.0, &q).unwrap();
        let want = (2.0 + (3.0f64).sqrt()).ln();
        assert!((g - want).abs() < 1e-8, "{g} vs {want}");
        assert_eq!(green_value(&eq, 1.0, &q).unwrap(), 0.0);
        assert_eq!(green_value(&eq, -1.0, &q).unwrap(), 0.0);
        // below the hull too
        let g = green_value(&eq, -2.0, &q).unwrap();
        assert!((g - want).abs() < 1e-8, "{g}");
    }

    #[test]
    fn green_symmetrization_identity() {
        // G_{[-1,-r]∪[r,1]}(0) = ½·G_{[r²,1]}(0) via z ↦ z²
        let q = quad();
        for &r in &[0.3, 0.5, 0.7] {
            let e = BandSet::from_pairs(&[(-1.0, -r), (r, 1.0)]).unwrap();
            let eq = equilibrium(&e, &q).unwrap();
            let g = green_value(&eq, 0.0, &q).unwrap();
            let want = 0.5 * single_band_green(r * r, 1.0, 0.0);
            assert!((g - want).abs() < 1e-7 * want, "r={r}: {g} vs {want}");
        }
    }

    #[test]
    fn widom_sum_cases() {
        let q = quad();
        let e = BandSet::from_pairs(&[(-1.0, 1.0)]).unwrap();
        let eq = equilibrium(&e, &q).unwrap();
        let ws = widom_sum(&eq, &q).unwrap();
        assert_eq!(ws.terms.len(), 0);
        assert_eq!(ws.sum, 0.0);

        let e = BandSet::from_pairs(&[(-1.0, -0.5), (0.5, 1.0)]).unwrap();
        let eq = equilibrium(&e, &q).unwrap();
        let ws = widom_sum(&eq, &q).unwrap();
        assert_eq!(ws.terms.len(), 1);
        let want = 0.5 * single_band_green(0.25, 1.0, 0.0);
        assert!((ws.sum - want).abs() < 1e-7 * want, "{} vs {want}", ws.sum);

        // three symmetric bands: the two gap terms agree
        let e = BandSet::from_pairs(&[(-1.0, -0.6), (-0.2, 0.2), (0.6, 1.0)]).unwrap();
        let eq = equilibrium(&e, &q).unwrap();
        let ws = widom_sum(&eq, &q).unwrap();
        assert_eq!(ws.terms.len(), 2);
        assert!((ws.terms[0] - ws.terms[1]).abs() < 1e-10, "{:?}", ws.terms);
    }

    #[test]
    fn roots_are_green_maxima_in_gaps() {
        let q = quad();
        let e = BandSet::from_pairs(&[(-1.3, -0.4), (0.1, 0.9), (1.5, 2.0)]).unwrap();
        let eq = equilibrium(&e, &q).unwrap();
        for (j, &c) in eq.roots().iter().enumerate() {
            let h = 1e-4 * e.gap(j).length();
            let gc = green_value(&eq, c, &q).unwrap();
            let gl = green_value(&eq, c - h, &q).unwrap();
            let gr = green_value(&eq, c + h, &q).unwrap();
            assert!(gl < gc && gr < gc, "gap {j}: {gl} {gc} {gr}");
        }
    }

    #[test]
    fn harmonic_measure_whole_boundary_is_one() {
        let q = quad();
        let e = BandSet::from_pairs(&[(1.0, 2.0)]).unwrap();
        let res =
            harmonic_measure(&e, Pole::Finite(0.0), &ArcSelection::whole(&e), &q).unwrap();
        assert!((res.value - 1.0).abs() < 1e-10, "{}", res.value);
    }

    #[test]
    fn harmonic_measure_arcsine_closed_form() {
        // ω([1, 1.5], 0) for E = [1,2]: image arc [2/3, 1] in band [1/2, 1];
        // single-band arcsine mass gives (1/π)·arccos(-1/3)
        let q = quad();
        let e = BandSet::from_pairs(&[(1.0, 2.0)]).unwrap();
        let arc = ArcSelection::from_window(&e, 1.0, 1.5).unwrap();
        let res = harmonic_measure(&e, Pole::Finite(0.0), &arc, &q).unwrap();
        let want = (-1.0f64 / 3.0).acos() / PI;
        assert!((res.value - want).abs() < 1e-8, "{} vs {want}", res.value);
    }

    #[test]
    fn harmonic_measure_pole_infinity_matches_equilibrium() {
        let q = quad();
        let e = BandSet::from_pairs(&[(-1.0, 1.0)]).unwrap();
        let arc = ArcSelection::from_window(&e, 0.5, 1.0).unwrap();
        let res = harmonic_measure(&e, Pole::Infinity, &arc, &q).unwrap();
        assert!((res.value - 1.0 / 3.0).abs() < 1e-10, "{}", res.value);
    }

    #[test]
    fn harmonic_measure_rejects_pole_in_band() {
        let q = quad();
        let e = BandSet::from_pairs(&[(1.0, 2.0)]).unwrap();
        let arc = ArcSelection::whole(&e);
        assert!(harmonic_measure(&e, Pole::Finite(1.5), &arc, &q).is_err());
    }

    #[test]
    fn domain_monotonicity_examples() {
        let q = quad();
        let e = BandSet::from_pairs(&[(-1.0, 1.0)]).unwrap();
        let e_big = BandSet::from_pairs(&[(-1.0, 1.0), (2.0, 3.0)]).unwrap();
        assert!(domain_monotonicity_check(&e, &e_big, 5.0, &q).unwrap());
        assert!(domain_monotonicity_check(&e, &e, 5.0, &q).unwrap());

        let e_small = BandSet::from_pairs(&[(-1.0, 0.0)]).unwrap();
        let e_full = BandSet::from_pairs(&[(-1.0, 1.0)]).unwrap();
        assert!(domain_monotonicity_check(&e_small, &e_full, 2.0, &q).unwrap());
        // strictness via the closed forms
        let g_small = single_band_green(-1.0, 0.0, 2.0);
        let g_full = single_band_green(-1.0, 1.0, 2.0);
        assert!(g_full < g_small);

        let not_nested = BandSet::from_pairs(&[(-2.0, -1.5)]).unwrap();
        assert!(domain_monotonicity_check(&e, &not_nested, 5.0, &q).is_err());
    }

    #[test]
    fn equilibrium_density_pv_vanishes() {
        // the equilibrium potential is constant on E, so the PV Cauchy
        // transform of its density vanishes at band-interior points
        let q = quad();
        let e = BandSet::from_pairs(&[(-1.0, -0.2), (0.4, 1.3)]).unwrap();
        let eq = equilibrium(&e, &q).unwrap();
        let w = |t: f64| eq.density(t).unwrap_or(f64::NAN);
        for k in 0..e.band_count() {
            let b = e.band(k);
            for i in 0..10 {
                let margin = 1e-3 * b.length();
                let x = b.lo + margin + (b.length() - 2.0 * margin) * (i as f64 + 0.5) / 10.0;
                let v = q.pv_cauchy(&w, &e, x).unwrap();
                assert!(v.abs() < 1e-7, "x={x}: {v}");
            }
        }
    }

    #[test]
    fn extreme_scale_separation_still_solves() {
        // bands spread over nine orders of magnitude, as the construction
        // drivers produce after Möbius inversion
        let e = BandSet::from_pairs(&[
            (1.0, 2.0),
            (1.0e3, 1.1e3),
            (1.0e6, 1.003e6),
            (1.0e9, 1.0008e9),
        ])
        .unwrap();
        let q = quad();
        let eq = equilibrium(&e, &q).unwrap();
        for (j, r) in eq.residuals().iter().enumerate() {
            assert!(*r < 1e-10, "gap {j}: residual {r}");
        }
        let mass = equilibrium_mass(&eq, &ArcSelection::whole(&e), &q).unwrap();
        assert!((mass - 1.0).abs() < 1e-9, "mass {mass}");
    }
}
