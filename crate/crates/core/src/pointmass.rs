//! Inductive construction of a band set in `(0, 1]` accumulating at 0 whose
//! divisor measure (gap-high divisor, base point 0) keeps a point mass at 0,
//! while the Widom sum of the set stays summable.
//!
//! Each step hangs a new slit `[b, a]` below the current set, with `a` pushed
//! toward 0 until the `b` solving `ω([b,a], 0) ∈ [½, ½+tol]` satisfies
//! `b/a ∈ (1 - 2^{-n}, 1)`. The harmonic-measure criterion makes the Green
//! value at 0 decay geometrically (each slit absorbs at least half of the
//! harmonic measure seen from 0), while the ratio criterion keeps
//! `Σ (a_n - b_{n+1})/b_{n+1}` finite, which is exactly the point-mass
//! condition for the gap-high divisor measure.
//!
//! Differences of nearby endpoints are never formed directly: the trace
//! carries the ratio chain `ρ_n = b_{n+1}/a_n` and derives slit lengths as
//! `a_n(1 - ρ_n)`, so the series and atom bookkeeping survive the
//! super-geometric scale decay.

use alloc::vec::Vec;
use alloc::{format, vec};

use crate::bandset::{ArcSelection, BandSet, Interval};
use crate::error::{Error, Result};
#[cfg(not(feature = "std"))]
use crate::float::FloatFuncs;
use crate::potential::{self, Pole};
use crate::quadrature::Quadrature;

/// Knobs of the builder.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointmassConfig {
    /// Number of slits added below the seed (2..=10).
    pub depth: usize,
    /// The harmonic-measure criterion accepts ω in `[target, target + tol]`.
    pub omega_target: f64,
    pub omega_tol: f64,
    /// Left endpoint of the seed slit `[seed_b1, 1]`; the ω-criterion is
    /// vacuous for the first slit (its harmonic measure is 1), so the seed
    /// is a fixed choice.
    pub seed_b1: f64,
}

impl Default for PointmassConfig {
    fn default() -> Self {
        PointmassConfig {
            depth: 8,
            omega_target: 0.5,
            omega_tol: 1e-3,
            seed_b1: 0.5,
        }
    }
}

/// Hard cap: beyond ten steps the slit scales fall below what the ratio
/// representation can keep meaningful in `f64`.
pub const DEPTH_CAP: usize = 10;

/// One accepted construction step.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointmassStep {
    pub n: usize,
    /// Upper end of the new slit (`a_n`).
    pub a: f64,
    /// Lower end of the new slit (`b_{n+1}`).
    pub b: f64,
    /// Achieved harmonic measure of the new slit at the pole.
    pub omega: f64,
    /// `ρ_n = b_{n+1}/a_n`, required in `(1 - 2^{-n}, 1)`.
    pub ratio: f64,
    /// Green value at 0 of the set including the new slit.
    pub green_at_0: f64,
    /// Widom sum of the set including the new slit.
    pub widom_partial: f64,
    /// `Σ_{j≤n} (1 - ρ_j)/ρ_j`, the point-mass series in ratio form.
    pub series_partial: f64,
    /// `√(b_1/a_0)·Π_{j≤n} √ρ_j`, the closed-form atom estimate.
    pub atom_estimate: f64,
}

/// Full record of a run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointmassTrace {
    pub config: PointmassConfig,
    pub steps: Vec<PointmassStep>,
}

impl PointmassTrace {
    /// The seed set `E_1 = {[seed_b1, 1]}`.
    pub fn initial_set(&self) -> BandSet {
        BandSet::from_pairs(&[(self.config.seed_b1, 1.0)]).expect("valid seed")
    }

    /// The set after `n` steps (`E_{n+1}`), `n ≤ depth`.
    pub fn set_after_step(&self, n: usize) -> BandSet {
        let mut pairs = vec![(self.config.seed_b1, 1.0)];
        for step in self.steps.iter().take(n) {
            pairs.push((step.b, step.a));
        }
        BandSet::from_pairs(&pairs).expect("valid prefix")
    }

    pub fn final_set(&self) -> BandSet {
        self.set_after_step(self.steps.len())
    }
}

/// `ω(new slit, pole)` for the configuration `E_prev ∪ [b, a]`.
fn slit_omega(
    set_prev: &BandSet,
    b: f64,
    a: f64,
    pole: f64,
    quad: &Quadrature,
) -> Result<f64> {
    let set = set_prev.with_band(Interval::new(b, a)?)?;
    let arc = ArcSelection::from_window(&set, b, a)?;
    Ok(potential::harmonic_measure(&set, Pole::Finite(pole), &arc, quad)?.value)
}

/// Bisection record, for monotonicity checks on the search path.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FindBResult {
    pub b: f64,
    pub omega: f64,
    /// `(b, ω)` pairs probed by the bisection.
    pub path: Vec<(f64, f64)>,
}

/// Finds the lower slit end `b ∈ (pole, a_prev)` making
/// `ω([b, a_prev], pole)` land in `[target, target + tol]` over the domain
/// complementary to `E_prev ∪ [b, a_prev]`.
///
/// ω increases as `b` moves down toward the pole (the slit grows and gets
/// closer), which drives the bisection.
pub fn find_b(
    set_prev: &BandSet,
    a_prev: f64,
    pole: f64,
    target: f64,
    tol: f64,
    quad: &Quadrature,
) -> Result<FindBResult> {
    if !(target > 0.0 && target < 1.0 + tol) {
        return Err(Error::validation(format!("omega target {target} out of (0, 1)")));
    }
    if a_prev <= pole {
        return Err(Error::validation(format!(
            "slit upper end {a_prev} must lie above the pole {pole}"
        )));
    }
    if set_prev.hull().lo <= a_prev {
        return Err(Error::validation(format!(
            "slit upper end {a_prev} must lie below the existing set"
        )));
    }
    let span = a_prev - pole;
    let mut path = Vec::new();
    let mut eval = |b: f64| -> Result<f64> {
        let omega = slit_omega(set_prev, b, a_prev, pole, quad)?;
        path.push((b, omega));
        Ok(omega)
    };
    // b at the pole-adjacent floor gives the largest reachable ω
    let b_floor = pole + span * 1e-12;
    let omega_floor = eval(b_floor)?;
    if omega_floor < target {
        return Err(Error::construction(format!(
            "harmonic-measure target {target} unreachable: ω = {omega_floor} even at \
             the pole-adjacent floor b = {b_floor}"
        )));
    }
    if omega_floor <= target + tol {
        let b = b_floor;
        let omega = omega_floor;
        return Ok(FindBResult { b, omega, path });
    }
    let mut lo = b_floor; // ω(lo) > target + tol
    let mut hi = a_prev - span * 1e-12; // ω(hi) ≈ 0 < target
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let omega = eval(mid)?;
        if omega >= target && omega <= target + tol {
            return Ok(FindBResult { b: mid, omega, path });
        }
        if omega < target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::precision(format!(
        "bisection failed to land ω in [{target}, {}]",
        target + tol
    )))
}

/// Outcome of the slit-top search.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FindAResult {
    pub a: f64,
    pub b: f64,
    pub omega: f64,
    /// Rejected candidates `(a, b, ratio)` before the accepted one.
    pub rejected: Vec<(f64, f64, f64)>,
}

/// Pushes the next slit top `a ← b_n·2^{-k}` toward the pole until the `b`
/// from [`find_b`] satisfies `b/a ∈ (ratio_floor, 1)`. Termination for
/// `ratio_floor < 1` rests on the limit `b/a → 1` as `a → 0`; sixty halvings
/// is the precision budget.
pub fn find_a(
    set_prev: &BandSet,
    b_n: f64,
    ratio_floor: f64,
    omega_target: f64,
    omega_tol: f64,
    quad: &Quadrature,
) -> Result<FindAResult> {
    if ratio_floor >= 1.0 {
        return Err(Error::precision(format!(
            "ratio window ({ratio_floor}, 1) is empty"
        )));
    }
    if (set_prev.hull().lo - b_n).abs() > 1e-12 * b_n.abs() {
        return Err(Error::validation(format!(
            "b_n = {b_n} is not the lower end of the current set"
        )));
    }
    let mut rejected = Vec::new();
    for k in 1..=60 {
        let a = b_n * (0.5f64).powi(k);
        if a <= 0.0 || !a.is_finite() {
            break;
        }
        let fb = find_b(set_prev, a, 0.0, omega_target, omega_tol, quad)?;
        let ratio = fb.b / a;
        if ratio > ratio_floor && ratio < 1.0 {
            return Ok(FindAResult {
                a,
                b: fb.b,
                omega: fb.omega,
                rejected,
            });
        }
        rejected.push((a, fb.b, ratio));
    }
    Err(Error::precision(format!(
        "no slit top below b_n = {b_n} reached the ratio window ({ratio_floor}, 1) \
         within 60 halvings"
    )))
}

/// Runs the construction to the configured depth, recording per-step data.
pub fn run(config: &PointmassConfig, quad: &Quadrature) -> Result<PointmassTrace> {
    if config.depth < 2 {
        return Err(Error::validation("construction depth must be at least 2"));
    }
    if config.depth > DEPTH_CAP {
        return Err(Error::validation(format!(
            "construction depth {} exceeds the double-precision cap {DEPTH_CAP}",
            config.depth
        )));
    }
    if !(config.seed_b1 > 0.0 && config.seed_b1 < 1.0) {
        return Err(Error::validation("seed slit start must lie in (0, 1)"));
    }
    let mut set = BandSet::from_pairs(&[(config.seed_b1, 1.0)])?;
    let mut steps = Vec::with_capacity(config.depth);
    let mut series_partial = 0.0f64;
    let mut log_atom = 0.5 * config.seed_b1.ln();
    for n in 1..=config.depth {
        let ratio_floor = 1.0 - (0.5f64).powi(n as i32);
        let found = find_a(
            &set,
            set.hull().lo,
            ratio_floor,
            config.omega_target,
            config.omega_tol,
            quad,
        )?;
        set = set.with_band(Interval::new(found.b, found.a)?)?;
        let ratio = found.b / found.a;
        // slit length over distance to 0, from the ratio chain: (1-ρ)/ρ
        series_partial += (1.0 - ratio) / ratio;
        log_atom += 0.5 * ratio.ln();
        let eq = potential::equilibrium(&set, quad)?;
        let green_at_0 = potential::green_value(&eq, 0.0, quad)?;
        let widom_partial = potential::widom_sum(&eq, quad)?.sum;
        steps.push(PointmassStep {
            n,
            a: found.a,
            b: found.b,
            omega: found.omega,
            ratio,
            green_at_0,
            widom_partial,
            series_partial,
            atom_estimate: log_atom.exp(),
        });
    }
    Ok(PointmassTrace {
        config: *config,
        steps,
    })
}

/// Row of the small-`a` limit table.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LemmaRow {
    pub a: f64,
    pub b: f64,
    pub ratio: f64,
}

/// For a fixed set above the pole and a decreasing sequence of slit tops,
/// tabulates `b'(a)` from [`find_b`] and the ratios `b'/a`, which increase
/// toward 1.
pub fn verify_lemma_harmonic(
    set_fixed: &BandSet,
    a_seq: &[f64],
    quad: &Quadrature,
) -> Result<Vec<LemmaRow>> {
    let mut rows = Vec::with_capacity(a_seq.len());
    let mut prev = f64::INFINITY;
    for &a in a_seq {
        if a >= set_fixed.hull().lo {
            return Err(Error::validation(format!(
                "slit top {a} is not below the fixed set"
            )));
        }
        if a >= prev {
            return Err(Error::validation("slit tops must decrease"));
        }
        prev = a;
        let fb = find_b(set_fixed, a, 0.0, 0.5, 1e-3, quad)?;
        rows.push(LemmaRow {
            a,
            b: fb.b,
            ratio: fb.b / a,
        });
    }
    Ok(rows)
}

/// Post-run check of the two-inequality Green chain on a trace: for every
/// step `n`, with `c_n` the critical point of the deepest set's Green
/// function in the step-`n` gap,
/// `G_{E_n}(0) ≥ G_{E_n}(c_n) ≥ G_{final}(c_n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GreenChainRow {
    pub n: usize,
    pub g_n_at_0: f64,
    pub g_n_at_c: f64,
    pub g_final_at_c: f64,
}

pub fn verify_green_chain(
    trace: &PointmassTrace,
    quad: &Quadrature,
) -> Result<Vec<GreenChainRow>> {
    let depth = trace.steps.len();
    let final_set = trace.final_set();
    let final_eq = potential::equilibrium(&final_set, quad)?;
    let mut rows = Vec::with_capacity(depth);
    for n in 1..=depth {
        // ascending gap g of the final set corresponds to step depth - g
        let c_n = final_eq.roots()[depth - n];
        let set_n = trace.set_after_step(n - 1);
        let eq_n = potential::equilibrium(&set_n, quad)?;
        rows.push(GreenChainRow {
            n,
            g_n_at_0: potential::green_value(&eq_n, 0.0, quad)?,
            g_n_at_c: potential::green_value(&eq_n, c_n, quad)?,
            g_final_at_c: potential::green_value(&final_eq, c_n, quad)?,
        });
    }
    Ok(rows)
}
