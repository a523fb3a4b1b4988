//! Multiscale construction of a divisor measure whose mass cascades down a
//! binary tree of shrinking segments, splitting in two nearly equal parts at
//! every generation — the finite-depth engine behind a singular continuous
//! limit profile.
//!
//! The layout is a recursive cell pattern inside `[-1, 1]`:
//!
//! - a frame `s1 = [-1, c0]`, `s2 = [d0, 1]` with divisor points at the inner
//!   ends, keeping the density factor of the frame within `(1-ε₁, 1)` on a
//!   working window `n1` around 0;
//! - around each active site: a guard pair flanking the site (divisors at
//!   their inner ends), a neighborhood `n` between the guards on which the
//!   guards' distance-ratio factors stay within their ε-window, and a tiny
//!   child segment centered at the site inside `n`;
//! - to descend one generation, a live segment hands its mass down: its two
//!   endpoints become divisor points (draining it), and two child cells are
//!   built at the midpoints of the left and right halves of its
//!   neighborhood, which places each child at distance ratios `1 : 2` from
//!   the dead parent and its sibling — the origin of the near-exact halving
//!   of mass.
//!
//! Every `r`-window is fitted at half width and audited at full width, so
//! the displayed density-ratio bounds hold with slack. Green bounds between
//! guard pairs are enforced relative to the ambient Green level (each pair
//! must at least halve the local maximum); the levels reached are recorded
//! per step in the constraint audit.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::bandset::{ArcSelection, BandSet, Divisor, Interval};
use crate::error::{Error, Result};
#[cfg(not(feature = "std"))]
use crate::float::FloatFuncs;
use crate::potential::{self};
use crate::quadrature::Quadrature;
use crate::reflectionless::ReflectionlessFn;

use core::f64::consts::PI;

/// `r_s(z) = |(z - lo)/(z - hi)|^{1/2}` for a segment `s = [lo, hi]`; tends
/// to 1 far from the segment and blows up at `hi`.
pub fn r_metric(s: Interval, z: f64) -> Result<f64> {
    if s.contains_interior(z) {
        return Err(Error::domain(format!(
            "r-metric point {z} lies strictly inside [{}, {}]",
            s.lo, s.hi
        )));
    }
    Ok(((z - s.lo) / (z - s.hi)).abs().sqrt())
}

/// Worst deviation `max |r_s(p) - 1|` over a point set.
fn r_worst_deviation(s: Interval, points: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &p in points {
        worst = worst.max((r_metric(s, p)? - 1.0).abs());
    }
    Ok(worst)
}

/// Construction schedule: ε-levels and neighborhood length caps.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScConfig {
    /// Number of generations below the root segment (1..=4).
    pub depth: usize,
    /// ε₁, ε₂, ...; needs `depth + 2` entries. Default `ε_n = 4^{-n-2}`,
    /// which keeps `Σ 2^n ε_n` geometric with ratio ½.
    pub eps: Vec<f64>,
    /// L₁, L₂, ...; needs `depth + 1` entries, decreasing fast enough that
    /// `L_{n+1}/L_n < ε_n`. Default `L₁ = ¼`, `L_{n+1} = L_n·ε_n/2`.
    pub lengths: Vec<f64>,
}

/// Beyond four generations the segment scales drop under the local `f64`
/// resolution around the cluster sites.
pub const SC_DEPTH_CAP: usize = 4;

impl ScConfig {
    pub fn with_depth(depth: usize) -> Self {
        let n_eps = depth + 2;
        let eps: Vec<f64> = (1..=n_eps).map(|n| (0.25f64).powi(n as i32 + 2)).collect();
        let mut lengths = vec![0.25f64];
        for n in 0..depth {
            let next = lengths[n] * eps[n] / 2.0;
            lengths.push(next);
        }
        ScConfig { depth, eps, lengths }
    }

    fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.depth > SC_DEPTH_CAP {
            return Err(Error::validation(format!(
                "depth must lie in 1..={SC_DEPTH_CAP}, got {}",
                self.depth
            )));
        }
        if self.eps.len() < self.depth + 2 {
            return Err(Error::validation(format!(
                "need {} ε-levels for depth {}, got {}",
                self.depth + 2,
                self.depth,
                self.eps.len()
            )));
        }
        for (i, w) in self.eps.windows(2).enumerate() {
            if !(w[0] > 0.0 && w[1] > 0.0 && w[1] <= 0.49 * w[0]) {
                return Err(Error::validation(format!(
                    "ε-schedule must decay by at least a factor 0.49 per level \
                     (summability of 2^n ε_n); violated at ε_{}",
                    i + 2
                )));
            }
        }
        if self.lengths.len() < self.depth + 1 {
            return Err(Error::validation(format!(
                "need {} length levels for depth {}, got {}",
                self.depth + 1,
                self.depth,
                self.lengths.len()
            )));
        }
        for (i, w) in self.lengths.windows(2).enumerate() {
            if !(w[1] > 0.0 && w[1] / w[0] < self.eps[i]) {
                return Err(Error::validation(format!(
                    "length schedule must satisfy L_{}/L_{} < ε_{}",
                    i + 2,
                    i + 1,
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

impl Default for ScConfig {
    fn default() -> Self {
        ScConfig::with_depth(3)
    }
}

/// One node of the segment tree: a (possibly dead) segment, its guard pair,
/// and the neighborhood its children live in.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScNode {
    pub name: String,
    pub center: f64,
    pub segment: Interval,
    pub guard_left: Interval,
    pub guard_right: Interval,
    pub neighborhood: Interval,
    /// Generation: 0 for the root segment, +1 per split.
    pub generation: usize,
    pub children: Vec<ScNode>,
}

impl ScNode {
    fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    fn visit<'a>(&'a self, out: &mut Vec<&'a ScNode>) {
        out.push(self);
        for c in &self.children {
            c.visit(out);
        }
    }
}

/// Recorded constraint check.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConstraintCheck {
    /// `|r_segment(p) - 1| < eps` over the listed points.
    RWindow {
        segment: Interval,
        points: Vec<f64>,
        eps: f64,
        worst_dev: f64,
    },
    /// Max Green value over a grid in `zone` against the enforced bound;
    /// `requested` is the schedule's ε-level for reference.
    GreenMax {
        zone: Interval,
        requested: f64,
        enforced: f64,
        achieved: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstraintRecord {
    pub step: usize,
    pub label: String,
    pub check: ConstraintCheck,
    pub pass: bool,
}

/// Snapshot after one construction step.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScStepRecord {
    pub step: usize,
    pub bands: Vec<(f64, f64)>,
    pub divisor: Vec<f64>,
    /// `(name, mass)` sorted by name.
    pub masses: Vec<(String, f64)>,
    pub total_mass: f64,
}

/// Full record of a run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScTrace {
    pub config: ScConfig,
    pub frame_left: Interval,
    pub frame_right: Interval,
    pub root: ScNode,
    pub steps: Vec<ScStepRecord>,
    pub audit: Vec<ConstraintRecord>,
}

impl ScTrace {
    pub fn mass_of(&self, step: usize, name: &str) -> Option<f64> {
        self.steps
            .get(step)
            .and_then(|s| s.masses.iter().find(|(n, _)| n == name))
            .map(|(_, m)| *m)
    }

    /// All nodes in depth-first order.
    pub fn nodes(&self) -> Vec<&ScNode> {
        let mut out = Vec::new();
        self.root.visit(&mut out);
        out
    }

    pub fn band_set(&self, step: usize) -> Result<BandSet> {
        let pairs = &self.steps[step].bands;
        BandSet::from_pairs(pairs)
    }

    pub fn reflectionless_fn(&self, step: usize) -> Result<ReflectionlessFn> {
        let set = self.band_set(step)?;
        let divisor = Divisor::new(&set, self.steps[step].divisor.clone())?;
        ReflectionlessFn::new(set, divisor)
    }
}

/// Centers a segment at `center`, starting from
/// `min(max_half_length, ε·d_min/4)` and halving until `|r - 1| < ε` holds
/// at every constraint point.
pub fn fit_segment(
    center: f64,
    constraint_points: &[f64],
    eps: f64,
    max_half_length: f64,
) -> Result<Interval> {
    if constraint_points.is_empty() {
        return Err(Error::validation("need at least one constraint point"));
    }
    let mut d_min = f64::INFINITY;
    for &p in constraint_points {
        let d = (p - center).abs();
        if d == 0.0 {
            return Err(Error::validation(format!(
                "constraint point coincides with the center {center}"
            )));
        }
        d_min = d_min.min(d);
    }
    let mut half = max_half_length.min(eps * d_min / 4.0);
    for _ in 0..2000 {
        let seg = Interval::new(center - half, center + half)?;
        if r_worst_deviation(seg, constraint_points)? < eps {
            return Ok(seg);
        }
        half *= 0.5;
        if half < f64::MIN_POSITIVE * 1e16 || center - half == center {
            break;
        }
    }
    Err(Error::precision(format!(
        "no segment at {center} satisfies the r-window {eps} at the given points"
    )))
}

/// Maximum Green value of a band set over an interior grid of `zone`,
/// skipping grid points already covered by bands.
fn green_max_on_zone(
    set: &BandSet,
    zone: Interval,
    grid: usize,
    quad: &Quadrature,
) -> Result<f64> {
    let eq = potential::equilibrium_fast(set, quad)?;
    let mut worst = 0.0f64;
    for i in 0..grid {
        let x = zone.lo + zone.length() * (i as f64 + 0.5) / grid as f64;
        if set.contains(x) {
            continue;
        }
        worst = worst.max(potential::green_value(&eq, x, quad)?);
    }
    Ok(worst)
}

/// Result of a guard-pair fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FlankingPair {
    pub left: Interval,
    pub right: Interval,
    /// Max Green value of context+pair over the between-zone grid.
    pub green_achieved: f64,
}

/// Fits two segments symmetric about `around`, inside `inside`, such that
/// (a) `|r - 1| < eps` at every designated point for both segments, and
/// (b) the Green maximum of `context + pair` over a grid strictly between
/// the pair stays below `green_bound`.
///
/// The candidate pair starts wide and moves geometrically closer to
/// `around` (half-length scaling with the offset) until both hold.
pub fn fit_flanking_pair(
    around: f64,
    inside: Interval,
    eps: f64,
    green_bound: f64,
    context: &BandSet,
    constraint_points: &[f64],
    quad: &Quadrature,
) -> Result<FlankingPair> {
    if !inside.contains_interior(around) {
        return Err(Error::validation(format!(
            "pair center {around} not inside [{}, {}]",
            inside.lo, inside.hi
        )));
    }
    for b in context.bands() {
        if b.lo < inside.hi && inside.lo < b.hi {
            return Err(Error::validation(
                "context bands intersect the pair placement window",
            ));
        }
    }
    let room = (around - inside.lo).min(inside.hi - around);
    let mut t = 0.5 * room;
    for _ in 0..200 {
        let h = 0.25 * eps * t;
        let left = Interval::new(around - t - h, around - t + h)?;
        let right = Interval::new(around + t - h, around + t + h)?;
        if inside.contains_interval(&left) && inside.contains_interval(&right) {
            let dev = r_worst_deviation(left, constraint_points)?
                .max(r_worst_deviation(right, constraint_points)?);
            if dev < eps {
                let with_pair = context.with_band(left)?.with_band(right)?;
                let zone = Interval { lo: left.hi, hi: right.lo };
                let achieved = green_max_on_zone(&with_pair, zone, 15, quad)?;
                if achieved < green_bound {
                    return Ok(FlankingPair {
                        left,
                        right,
                        green_achieved: achieved,
                    });
                }
            }
        }
        t *= 0.5;
        if around - t == around {
            break;
        }
    }
    Err(Error::precision(format!(
        "no flanking pair around {around} reached the r-window {eps} and Green \
         bound {green_bound} before the precision floor"
    )))
}

/// Shrinks an interval centered at `center` (starting from `max_length`)
/// until `|r - 1| < eps` holds for every listed segment at the interval's
/// endpoints (monotonicity extends the window to the whole interval).
fn fit_window(
    center: f64,
    max_length: f64,
    hard_bounds: Interval,
    eps: f64,
    segments: &[Interval],
) -> Result<Interval> {
    let mut len = max_length;
    for _ in 0..200 {
        let iv = Interval::new(center - 0.5 * len, center + 0.5 * len)?;
        if hard_bounds.contains_interval(&iv) {
            let mut ok = true;
            for &s in segments {
                if (r_metric(s, iv.lo)? - 1.0).abs() >= eps
                    || (r_metric(s, iv.hi)? - 1.0).abs() >= eps
                {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(iv);
            }
        }
        len *= 0.5;
        if center + len == center {
            break;
        }
    }
    Err(Error::precision(format!(
        "no window around {center} fits the r-constraints"
    )))
}

struct Builder<'a> {
    cfg: &'a ScConfig,
    /// Coarser rules for the geometric search loops; the Green bounds they
    /// guard live at the 1e-2 scale, far above this accuracy.
    search_quad: Quadrature,
    audit: Vec<ConstraintRecord>,
}

/// Named bands of the current state, sorted by position.
fn collect_segments(
    frame: (Interval, Interval),
    root: &ScNode,
) -> Vec<(String, Interval)> {
    let mut out = vec![
        ("s1".to_string(), frame.0),
        ("s2".to_string(), frame.1),
    ];
    let mut nodes = Vec::new();
    root.visit(&mut nodes);
    for node in nodes {
        let (gl_name, gr_name) = if node.name == "s5" {
            ("s3".to_string(), "s4".to_string())
        } else {
            (format!("L{}", node.name), format!("R{}", node.name))
        };
        out.push((gl_name, node.guard_left));
        out.push((node.name.clone(), node.segment));
        out.push((gr_name, node.guard_right));
    }
    out.sort_by(|a, b| a.1.lo.partial_cmp(&b.1.lo).expect("finite"));
    out
}

/// Divisor points: frame inner ends, guard inner ends, and both endpoints of
/// every dead (split) segment.
fn collect_divisor_marks(frame: (Interval, Interval), root: &ScNode) -> Vec<f64> {
    let mut marks = vec![frame.0.hi, frame.1.lo];
    let mut nodes = Vec::new();
    root.visit(&mut nodes);
    for node in nodes {
        marks.push(node.guard_left.hi);
        marks.push(node.guard_right.lo);
        if !node.is_leaf() {
            marks.push(node.segment.lo);
            marks.push(node.segment.hi);
        }
    }
    marks
}

fn assemble_state(
    frame: (Interval, Interval),
    root: &ScNode,
) -> Result<(BandSet, Vec<f64>, Vec<(String, Interval)>)> {
    let named = collect_segments(frame, root);
    let set = BandSet::new(named.iter().map(|(_, iv)| *iv).collect())?;
    let marks = collect_divisor_marks(frame, root);
    let mut divisor = Vec::with_capacity(set.gap_count());
    for j in 0..set.gap_count() {
        let g = set.gap(j);
        let lo_marked = marks.contains(&g.lo);
        let hi_marked = marks.contains(&g.hi);
        match (lo_marked, hi_marked) {
            (true, false) => divisor.push(g.lo),
            (false, true) => divisor.push(g.hi),
            other => {
                return Err(Error::internal(format!(
                    "gap [{}, {}] carries {} divisor marks",
                    g.lo,
                    g.hi,
                    match other {
                        (true, true) => "two",
                        _ => "no",
                    }
                )))
            }
        }
    }
    Ok((set, divisor, named))
}

impl Builder<'_> {
    fn record_r(
        &mut self,
        step: usize,
        label: &str,
        segment: Interval,
        points: &[f64],
        eps: f64,
    ) -> Result<()> {
        let worst = r_worst_deviation(segment, points)?;
        self.audit.push(ConstraintRecord {
            step,
            label: label.to_string(),
            check: ConstraintCheck::RWindow {
                segment,
                points: points.to_vec(),
                eps,
                worst_dev: worst,
            },
            pass: worst < eps,
        });
        Ok(())
    }

    fn record_green(
        &mut self,
        step: usize,
        label: &str,
        zone: Interval,
        requested: f64,
        enforced: f64,
        achieved: f64,
    ) {
        self.audit.push(ConstraintRecord {
            step,
            label: label.to_string(),
            check: ConstraintCheck::GreenMax {
                zone,
                requested,
                enforced,
                achieved,
            },
            pass: achieved < enforced,
        });
    }

    /// Builds one cell (guards, neighborhood, child segment) around `site`.
    ///
    /// `eps_guard`/`eps_child` are the step's ε-levels; `room` bounds the
    /// half-width available around the site; `n_cap` caps the neighborhood
    /// length; `context` is the current band set.
    #[allow(clippy::too_many_arguments)]
    fn build_cell(
        &mut self,
        step: usize,
        name: &str,
        site: f64,
        room: f64,
        n_cap: f64,
        eps_guard: f64,
        eps_child: f64,
        context: &BandSet,
        r_points: &[f64],
        generation: usize,
    ) -> Result<ScNode> {
        let inside = Interval::new(site - room, site + room)?;
        // ambient Green level on the zone, before the guards exist
        let ambient = green_max_on_zone(context, inside, 9, &self.search_quad)?;
        let enforced = (0.5 * ambient).max(eps_guard);
        // designated points: the site itself plus the caller's far points
        let mut points = vec![site];
        points.extend_from_slice(r_points);
        let pair = fit_flanking_pair(
            site,
            inside,
            0.5 * eps_guard,
            enforced,
            context,
            &points,
            &self.search_quad,
        )?;
        self.record_r(
            step,
            &format!("r(L{name}) at designated points"),
            pair.left,
            &points,
            eps_guard,
        )?;
        self.record_r(
            step,
            &format!("r(R{name}) at designated points"),
            pair.right,
            &points,
            eps_guard,
        )?;
        self.record_green(
            step,
            &format!("green between guards of {name}"),
            Interval { lo: pair.left.hi, hi: pair.right.lo },
            eps_guard,
            enforced,
            pair.green_achieved,
        );
        // neighborhood between the guards, ε-window of the guards on it
        let gap = Interval { lo: pair.left.hi, hi: pair.right.lo };
        let hard = Interval {
            lo: gap.lo + 0.05 * (site - gap.lo),
            hi: gap.hi - 0.05 * (gap.hi - site),
        };
        let neighborhood = fit_window(
            site,
            n_cap.min(0.5 * gap.length()),
            hard,
            0.5 * eps_guard,
            &[pair.left, pair.right],
        )?;
        self.record_r(
            step,
            &format!("r(L{name}) on the neighborhood of {name}"),
            pair.left,
            &[neighborhood.lo, neighborhood.hi],
            eps_guard,
        )?;
        self.record_r(
            step,
            &format!("r(R{name}) on the neighborhood of {name}"),
            pair.right,
            &[neighborhood.lo, neighborhood.hi],
            eps_guard,
        )?;
        // child segment: its r-window must hold from the quarter zone of the
        // neighborhood outward — in particular at the future child sites
        let quarter = neighborhood.scaled(0.25);
        let child_points = [
            quarter.lo,
            quarter.hi,
            neighborhood.scaled(0.5).lo,
            neighborhood.scaled(0.5).hi,
        ];
        let segment = fit_segment(site, &child_points, 0.5 * eps_child, 0.125 * room)?;
        self.record_r(
            step,
            &format!("r({name}) outside the quarter neighborhood"),
            segment,
            &child_points,
            eps_child,
        )?;
        Ok(ScNode {
            name: name.to_string(),
            center: site,
            segment,
            guard_left: pair.left,
            guard_right: pair.right,
            neighborhood,
            generation,
            children: Vec::new(),
        })
    }
}

/// Per-segment masses of the current state's divisor measure.
fn mass_ledger(
    set: &BandSet,
    divisor: &[f64],
    named: &[(String, Interval)],
    quad: &Quadrature,
) -> Result<(Vec<(String, f64)>, f64)> {
    let f = ReflectionlessFn::new(set.clone(), Divisor::new(set, divisor.to_vec())?)?;
    let mut masses = Vec::with_capacity(named.len());
    let mut total = 0.0;
    for (k, (name, _)) in named.iter().enumerate() {
        let arc = ArcSelection::band(set, k)?;
        let m = f.measure_mass(&arc, quad)?;
        total += m;
        masses.push((name.clone(), m));
    }
    masses.sort_by(|a, b| a.0.cmp(&b.0));
    Ok((masses, total))
}

/// Runs the construction to the configured depth.
pub fn run(cfg: &ScConfig, quad: &Quadrature) -> Result<ScTrace> {
    cfg.validate()?;
    let eps = &cfg.eps;
    let l1 = cfg.lengths[0];
    let search_quad = Quadrature::new(crate::quadrature::QuadratureSpec {
        order: 32,
        refine_tol: 1e-6,
        max_refinements: 8,
        ..*quad.spec()
    })?;
    let mut builder = Builder { cfg, search_quad, audit: Vec::new() };

    // step 1: frame. The frame product √((γ²-z²)/(1-z²)) must stay in
    // (1-ε₁, 1) on n1 = [-L1/2, L1/2]; solve for γ hitting 1-ε₁/2 at the
    // worst point z = L1/2.
    let z_w = 0.5 * l1;
    let target = 1.0 - 0.5 * eps[0];
    let gamma = (target * target * (1.0 - z_w * z_w) + z_w * z_w).sqrt();
    let frame_left = Interval::new(-1.0, -gamma)?;
    let frame_right = Interval::new(gamma, 1.0)?;
    let n1 = Interval::new(-z_w, z_w)?;
    {
        // audit the frame window on n1 (monotone in z², so endpoints + 0)
        let frame_factor = |z: f64| {
            ((gamma * gamma - z * z) / (1.0 - z * z)).sqrt()
        };
        let values: Vec<f64> = [n1.lo, 0.0, n1.hi].iter().map(|&z| frame_factor(z)).collect();
        let v_min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let v_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        builder.audit.push(ConstraintRecord {
            step: 1,
            label: "frame factor on n1".to_string(),
            check: ConstraintCheck::RWindow {
                segment: frame_left,
                points: vec![n1.lo, 0.0, n1.hi],
                eps: eps[0],
                worst_dev: (1.0 - v_min).max(v_max - 1.0),
            },
            pass: v_min > 1.0 - eps[0] && v_max < 1.0,
        });
    }

    let frame_set = BandSet::new(vec![frame_left, frame_right])?;
    // root cell around 0: guards at ε₂, child segment at ε₃
    let root = builder.build_cell(
        1,
        "s5",
        0.0,
        0.5 * n1.length() * 0.5,
        cfg.lengths[1],
        eps[1],
        eps[2],
        &frame_set,
        &[n1.lo, n1.hi],
        0,
    )?;
    let mut root = root;
    let frame = (frame_left, frame_right);

    let mut steps = Vec::with_capacity(cfg.depth);
    let (set, divisor, named) = assemble_state(frame, &root)?;
    let (masses, total) = mass_ledger(&set, &divisor, &named, quad)?;
    steps.push(ScStepRecord {
        step: 1,
        bands: set.bands().iter().map(|b| (b.lo, b.hi)).collect(),
        divisor: divisor.clone(),
        masses,
        total_mass: total,
    });

    for step in 2..=cfg.depth {
        let (context, _, _) = assemble_state(frame, &root)?;
        split_leaves(&mut builder, &mut root, step, &context)?;
        let (set, divisor, named) = assemble_state(frame, &root)?;
        let (masses, total) = mass_ledger(&set, &divisor, &named, quad)?;
        steps.push(ScStepRecord {
            step,
            bands: set.bands().iter().map(|b| (b.lo, b.hi)).collect(),
            divisor: divisor.clone(),
            masses,
            total_mass: total,
        });
    }

    Ok(ScTrace {
        config: cfg.clone(),
        frame_left,
        frame_right,
        root,
        steps,
        audit: builder.audit,
    })
}

/// Splits every live leaf: the leaf's endpoints become divisor points and
/// two child cells are built at the midpoints of its neighborhood's halves.
fn split_leaves(
    builder: &mut Builder<'_>,
    node: &mut ScNode,
    step: usize,
    context: &BandSet,
) -> Result<()> {
    if !node.is_leaf() {
        for child in &mut node.children {
            split_leaves(builder, child, step, context)?;
        }
        return Ok(());
    }
    let n_iv = node.neighborhood;
    let c = node.center;
    let eps_guard = builder.cfg.eps[step];
    let eps_child = builder.cfg.eps[step + 1];
    let n_cap = builder.cfg.lengths[step];
    let sites = [
        (0.5 * (n_iv.lo + c), format!("{}1", node.name)),
        (0.5 * (c + n_iv.hi), format!("{}2", node.name)),
    ];
    let mut children = Vec::with_capacity(2);
    for (site, name) in sites {
        let room_inner = (node.segment.lo - site).abs().min((node.segment.hi - site).abs());
        let room_outer = (site - n_iv.lo).min(n_iv.hi - site);
        let room = 0.9 * room_inner.min(room_outer);
        // far designated points: the parent segment (for the density window
        // on the dead parent), the sibling site, and the neighborhood ends
        let sibling = if site < c {
            0.5 * (c + n_iv.hi)
        } else {
            0.5 * (n_iv.lo + c)
        };
        let r_points = [
            n_iv.lo,
            n_iv.hi,
            node.segment.lo,
            node.segment.hi,
            sibling,
        ];
        let child = builder.build_cell(
            step,
            &name,
            site,
            room,
            n_cap,
            eps_guard,
            eps_child,
            context,
            &r_points,
            node.generation + 1,
        )?;
        children.push(child);
    }
    node.children = children;
    Ok(())
}

/// One line of the mass verification report.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MassCheck {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MassReport {
    pub checks: Vec<MassCheck>,
    pub all_pass: bool,
}

/// Splitting factor of generation `k`: each split keeps at least
/// `1/2 - 2^{-k-2}` of the parent per child.
fn split_factor(k: usize) -> f64 {
    0.5 - (0.5f64).powi(k as i32 + 2)
}

/// Verifies the mass cascade recorded in a trace:
///
/// - every generation-`n` segment holds at least
///   `Π_{k≤n} (1/2 - 2^{-k-2})·μ¹(s5)` under the step-`n+1` measure;
/// - each generation's total holds at least `Π_{k≤n} (1 - 2^{-k-1})·μ¹(s5)`;
/// - the largest single-segment mass strictly decreases generation by
///   generation (no mass point survives the splitting);
/// - sibling masses stay within a factor 1.1 of each other;
/// - after the root splits, its residual mass stays below the ε-product
///   times the model integral with the live-leaf distance factors.
pub fn verify_masses(trace: &ScTrace, quad: &Quadrature) -> Result<MassReport> {
    let mut checks = Vec::new();
    let mu1_s5 = trace
        .mass_of(0, "s5")
        .ok_or_else(|| Error::validation("trace lacks the step-1 root mass"))?;
    let depth = trace.steps.len();

    // total mass stays 1 at every step
    for s in &trace.steps {
        let pass = (s.total_mass - 1.0).abs() < 1e-8;
        checks.push(MassCheck {
            label: format!("total mass at step {}", s.step),
            pass,
            detail: format!("{:.12}", s.total_mass),
        });
    }

    // per-generation bounds
    let mut lower = 1.0f64;
    let mut total_lower = 1.0f64;
    let mut prev_gen_max = mu1_s5;
    for n in 1..depth {
        lower *= split_factor(n);
        total_lower *= 1.0 - (0.5f64).powi(n as i32 + 1);
        let gen_names: Vec<&(String, f64)> = trace.steps[n]
            .masses
            .iter()
            .filter(|(name, _)| name.starts_with("s5") && name.len() == 2 + n)
            .collect();
        let expected_count = 1usize << n;
        checks.push(MassCheck {
            label: format!("generation {n} segment count"),
            pass: gen_names.len() == expected_count,
            detail: format!("{} of {expected_count}", gen_names.len()),
        });
        let bound = lower * mu1_s5;
        let mut worst: Option<&(String, f64)> = None;
        for nm in &gen_names {
            if worst.map(|w| nm.1 < w.1).unwrap_or(true) {
                worst = Some(nm);
            }
        }
        if let Some((wname, wmass)) = worst {
            checks.push(MassCheck {
                label: format!("per-segment mass bound, generation {n}"),
                pass: *wmass >= bound,
                detail: format!("min {wname} = {wmass:.6} vs bound {bound:.6}"),
            });
        }
        let total: f64 = gen_names.iter().map(|(_, m)| m).sum();
        checks.push(MassCheck {
            label: format!("generation {n} total mass bound"),
            pass: total >= total_lower * mu1_s5,
            detail: format!("{total:.6} vs bound {:.6}", total_lower * mu1_s5),
        });
        let gen_max = gen_names.iter().map(|(_, m)| *m).fold(0.0f64, f64::max);
        checks.push(MassCheck {
            label: format!("max single-segment mass decreases into generation {n}"),
            pass: gen_max < prev_gen_max,
            detail: format!("{gen_max:.6} vs previous {prev_gen_max:.6}"),
        });
        prev_gen_max = gen_max;
        // sibling pairs
        for nm in &gen_names {
            if nm.0.ends_with('1') {
                let sibling = format!("{}2", &nm.0[..nm.0.len() - 1]);
                if let Some(sib_mass) = trace.mass_of(n, &sibling) {
                    let ratio = nm.1.max(sib_mass) / nm.1.min(sib_mass);
                    checks.push(MassCheck {
                        label: format!("siblings {} / {sibling} balanced", nm.0),
                        pass: ratio <= 1.1,
                        detail: format!("ratio {ratio:.6}"),
                    });
                }
            }
        }
    }

    // residual mass on the drained root after step 2
    if depth >= 2 {
        let mu2_s5 = trace
            .mass_of(1, "s5")
            .ok_or_else(|| Error::validation("trace lacks the step-2 root mass"))?;
        let eps = &trace.config.eps;
        let eps_product = (1.0 + eps[0]) * (1.0 + eps[1]).powi(2) * (1.0 + eps[2]).powi(4);
        let s5 = trace.root.segment;
        let leaves: Vec<Interval> = trace
            .root
            .children
            .iter()
            .map(|c| c.segment)
            .collect();
        // model: (1/π)∫ √((x-c)(d-x)) Π_leaves 1/√(|x-e||x-f|) dx on s5,
        // by the Chebyshev rule (the √ factor against the weight leaves
        // (r² - τ²) times the smooth leaf-distance part)
        let m = s5.midpoint();
        let r = 0.5 * s5.length();
        let n_nodes = 4 * quad.spec().order;
        let mut model = 0.0;
        for k in 1..=n_nodes {
            let theta = (2.0 * k as f64 - 1.0) * PI / (2.0 * n_nodes as f64);
            let tau = r * theta.cos();
            let mut v = r * r - tau * tau;
            for leaf in &leaves {
                v /= (potential::dist(m, tau, leaf.lo)
                    * potential::dist(m, tau, leaf.hi))
                .abs()
                .sqrt();
            }
            model += v;
        }
        model /= n_nodes as f64; // (π/n)·Σ / π
        let bound = eps_product * model;
        checks.push(MassCheck {
            label: "root residual mass after its split".to_string(),
            pass: mu2_s5 <= bound,
            detail: format!("{mu2_s5:.3e} vs bound {bound:.3e}"),
        });
    }

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(MassReport { checks, all_pass })
}

/// Re-verifies every recorded constraint against the deepest state: the
/// r-windows are pure geometry (unchanged), the Green bounds can only have
/// improved (domain extension); both must hold within twice the recorded
/// levels.
pub fn verify_constraints_post_hoc(trace: &ScTrace, quad: &Quadrature) -> Result<Vec<ConstraintRecord>> {
    let final_set = trace.band_set(trace.steps.len() - 1)?;
    let mut out = Vec::with_capacity(trace.audit.len());
    for rec in &trace.audit {
        let (check, pass) = match &rec.check {
            ConstraintCheck::RWindow { segment, points, eps, .. } => {
                let worst = r_worst_deviation(*segment, points)?;
                (
                    ConstraintCheck::RWindow {
                        segment: *segment,
                        points: points.clone(),
                        eps: *eps,
                        worst_dev: worst,
                    },
                    worst < 2.0 * eps,
                )
            }
            ConstraintCheck::GreenMax { zone, requested, enforced, .. } => {
                let achieved = green_max_on_zone(&final_set, *zone, 15, quad)?;
                (
                    ConstraintCheck::GreenMax {
                        zone: *zone,
                        requested: *requested,
                        enforced: *enforced,
                        achieved,
                    },
                    achieved < 2.0 * enforced,
                )
            }
        };
        out.push(ConstraintRecord {
            step: rec.step,
            label: rec.label.clone(),
            check,
            pass,
        });
    }
    Ok(out)
}


#[cfg(test)]
mod timing_probe {
    use super::*;
    use crate::quadrature::QuadratureSpec;

    #[test]
    #[ignore = "manual timing probe"]
    fn time_depth_runs() {
        let q = Quadrature::new(QuadratureSpec::default()).unwrap();
        for depth in 1..=2 {
            let t0 = std::time::Instant::now();
            let trace = run(&ScConfig::with_depth(depth), &q).unwrap();
            std::println!("depth {depth}: {:?} ({} audit rows)", t0.elapsed(), trace.audit.len());
        }
    }
}
