//! Band sets: ordered disjoint closed intervals on the real line, their gaps,
//! divisors, Möbius inversion, and a sampled homogeneity verifier.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
#[cfg(not(feature = "std"))]
use crate::float::FloatFuncs;

/// A closed interval `[lo, hi]` with `lo < hi`, both finite.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::validation(format!(
                "interval endpoints must be finite, got [{lo}, {hi}]"
            )));
        }
        if lo >= hi {
            return Err(Error::validation(format!(
                "interval endpoints reversed or equal: [{lo}, {hi}]"
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Closed containment of a point.
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Strict (open-interval) containment of a point.
    pub fn contains_interior(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    /// Closed containment of another interval.
    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Interval with the same center and `lambda` times the length.
    pub fn scaled(&self, lambda: f64) -> Interval {
        let m = self.midpoint();
        let h = 0.5 * lambda * self.length();
        Interval { lo: m - h, hi: m + h }
    }

    /// Length of the overlap with `[a, b]`; zero if disjoint.
    pub fn clip_length(&self, a: f64, b: f64) -> f64 {
        (self.hi.min(b) - self.lo.max(a)).max(0.0)
    }
}

/// A finite union of closed, pairwise disjoint intervals ("bands"), sorted
/// ascending. The open intervals between consecutive bands are the bounded
/// gaps of the set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BandSet {
    bands: Vec<Interval>,
}

impl BandSet {
    /// Validates and sorts the given intervals into a band set.
    ///
    /// Touching bands are rejected rather than merged: the inductive
    /// constructions must never produce them, and merging would hide that.
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::validation("a band set needs at least one band"));
        }
        let mut bands = intervals;
        bands.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("finite endpoints"));
        for w in bands.windows(2) {
            if w[0].hi >= w[1].lo {
                return Err(Error::validation(format!(
                    "bands [{}, {}] and [{}, {}] overlap or touch",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        Ok(BandSet { bands })
    }

    /// Convenience constructor from `(lo, hi)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let intervals = pairs
            .iter()
            .map(|&(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        BandSet::new(intervals)
    }

    pub fn bands(&self) -> &[Interval] {
        &self.bands
    }

    pub fn band(&self, k: usize) -> Interval {
        self.bands[k]
    }

    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    /// Number of bounded gaps (`band_count - 1`).
    pub fn gap_count(&self) -> usize {
        self.bands.len() - 1
    }

    /// The `k`-th bounded gap, as the open interval between bands `k` and `k+1`.
    pub fn gap(&self, k: usize) -> Interval {
        Interval {
            lo: self.bands[k].hi,
            hi: self.bands[k + 1].lo,
        }
    }

    pub fn gaps(&self) -> Vec<Interval> {
        (0..self.gap_count()).map(|k| self.gap(k)).collect()
    }

    /// Convex hull `[min lo, max hi]`.
    pub fn hull(&self) -> Interval {
        Interval {
            lo: self.bands[0].lo,
            hi: self.bands[self.bands.len() - 1].hi,
        }
    }

    pub fn diameter(&self) -> f64 {
        self.hull().length()
    }

    /// All `2·band_count` endpoints in ascending order.
    pub fn endpoints(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.bands.len());
        for b in &self.bands {
            v.push(b.lo);
            v.push(b.hi);
        }
        v
    }

    /// Index of the band whose closed interval contains `x`, if any.
    pub fn band_containing(&self, x: f64) -> Option<usize> {
        self.bands.iter().position(|b| b.contains(x))
    }

    /// True if `x` lies in the closed set.
    pub fn contains(&self, x: f64) -> bool {
        self.band_containing(x).is_some()
    }

    /// Index of the bounded gap whose open interval contains `x`, if any.
    pub fn gap_containing(&self, x: f64) -> Option<usize> {
        (0..self.gap_count()).find(|&k| self.gap(k).contains_interior(x))
    }

    /// Total length of the bands.
    pub fn total_band_length(&self) -> f64 {
        self.bands.iter().map(|b| b.length()).sum()
    }

    /// Lebesgue measure of `E ∩ (a, b)` by exact interval clipping.
    pub fn intersection_measure(&self, a: f64, b: f64) -> f64 {
        self.bands.iter().map(|iv| iv.clip_length(a, b)).sum()
    }

    /// New band set with one extra band; fails if it overlaps an existing one.
    pub fn with_band(&self, band: Interval) -> Result<BandSet> {
        let mut bands = self.bands.clone();
        bands.push(band);
        BandSet::new(bands)
    }
}

/// One point per bounded gap, each in the closed gap. Parameterizes the
/// reflectionless function of the band set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Divisor {
    points: Vec<f64>,
}

impl Divisor {
    pub fn new(set: &BandSet, points: Vec<f64>) -> Result<Self> {
        if points.len() != set.gap_count() {
            return Err(Error::validation(format!(
                "divisor needs one point per bounded gap: got {} points for {} gaps",
                points.len(),
                set.gap_count()
            )));
        }
        for (k, &x) in points.iter().enumerate() {
            let g = set.gap(k);
            if !(g.lo <= x && x <= g.hi) {
                return Err(Error::validation(format!(
                    "divisor point {x} outside closed gap {k} = [{}, {}]",
                    g.lo, g.hi
                )));
            }
        }
        Ok(Divisor { points })
    }

    /// The choice `x_j = gap.hi` for every gap (density vanishes nowhere
    /// inside the gaps' right-adjacent bands).
    pub fn at_gap_highs(set: &BandSet) -> Self {
        Divisor {
            points: (0..set.gap_count()).map(|k| set.gap(k).hi).collect(),
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// A selection of sub-intervals of bands, the target of mass and harmonic
/// measure queries.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ArcSelection {
    parts: Vec<(usize, Interval)>,
}

impl ArcSelection {
    pub fn new(set: &BandSet, parts: Vec<(usize, Interval)>) -> Result<Self> {
        for &(k, iv) in &parts {
            if k >= set.band_count() {
                return Err(Error::validation(format!("band index {k} out of range")));
            }
            if !set.band(k).contains_interval(&iv) {
                return Err(Error::validation(format!(
                    "arc [{}, {}] not contained in band {k} = [{}, {}]",
                    iv.lo,
                    iv.hi,
                    set.band(k).lo,
                    set.band(k).hi
                )));
            }
        }
        Ok(ArcSelection { parts })
    }

    /// The whole set as a selection.
    pub fn whole(set: &BandSet) -> Self {
        ArcSelection {
            parts: set
                .bands()
                .iter()
                .copied()
                .enumerate()
                .collect(),
        }
    }

    /// Everything of `E` inside `[lo, hi]` (clipped per band).
    pub fn from_window(set: &BandSet, lo: f64, hi: f64) -> Result<Self> {
        if lo >= hi {
            return Err(Error::validation(format!("empty arc window [{lo}, {hi}]")));
        }
        let mut parts = Vec::new();
        for (k, b) in set.bands().iter().enumerate() {
            let a = b.lo.max(lo);
            let c = b.hi.min(hi);
            if a < c {
                parts.push((k, Interval { lo: a, hi: c }));
            }
        }
        if parts.is_empty() {
            return Err(Error::validation(format!(
                "arc window [{lo}, {hi}] misses the band set"
            )));
        }
        Ok(ArcSelection { parts })
    }

    /// A single whole band.
    pub fn band(set: &BandSet, k: usize) -> Result<Self> {
        if k >= set.band_count() {
            return Err(Error::validation(format!("band index {k} out of range")));
        }
        Ok(ArcSelection {
            parts: alloc::vec![(k, set.band(k))],
        })
    }

    pub fn parts(&self) -> &[(usize, Interval)] {
        &self.parts
    }

    pub fn total_length(&self) -> f64 {
        self.parts.iter().map(|(_, iv)| iv.length()).sum()
    }
}

/// Orientation-aware correspondence between a band set and its image under
/// the self-inverse Möbius map `t ↦ pole + 1/(t − pole)`.
#[derive(Debug, Clone)]
pub struct MobiusMap {
    pole: f64,
    /// `image_band_of[k]` = index in the image set of the image of band `k`.
    image_band_of: Vec<usize>,
}

impl MobiusMap {
    pub fn pole(&self) -> f64 {
        self.pole
    }

    /// Forward map of a point (also its own inverse).
    pub fn apply(&self, t: f64) -> f64 {
        self.pole + 1.0 / (t - self.pole)
    }

    /// Image band index of source band `k`.
    pub fn image_band(&self, k: usize) -> usize {
        self.image_band_of[k]
    }

    /// Maps an arc selection on the source set onto the image set.
    pub fn map_selection(
        &self,
        image: &BandSet,
        arc: &ArcSelection,
    ) -> Result<ArcSelection> {
        let mut parts = Vec::with_capacity(arc.parts().len());
        for &(k, iv) in arc.parts() {
            // The map is decreasing on each side of the pole, so endpoints swap.
            let lo = self.apply(iv.hi);
            let hi = self.apply(iv.lo);
            parts.push((self.image_band_of[k], Interval { lo, hi }));
        }
        ArcSelection::new(image, parts)
    }
}

/// Image of a band set under `t ↦ pole + 1/(t − pole)`, together with the
/// band correspondence. The map fixes the real line, is self-inverse, and
/// sends the pole to infinity, which reduces harmonic measure at a finite
/// pole to equilibrium measure of the image.
pub fn mobius_invert(set: &BandSet, pole: f64) -> Result<(BandSet, MobiusMap)> {
    if !pole.is_finite() {
        return Err(Error::domain("Möbius pole must be finite"));
    }
    if set.contains(pole) {
        return Err(Error::domain(format!("Möbius pole {pole} lies inside a band")));
    }
    let map_pt = |t: f64| pole + 1.0 / (t - pole);
    let mut images: Vec<(usize, Interval)> = Vec::with_capacity(set.band_count());
    for (k, b) in set.bands().iter().enumerate() {
        // t ↦ pole + 1/(t−pole) is decreasing on each component of ℝ∖{pole}.
        let iv = Interval::new(map_pt(b.hi), map_pt(b.lo))?;
        images.push((k, iv));
    }
    images.sort_by(|a, b| a.1.lo.partial_cmp(&b.1.lo).expect("finite endpoints"));
    let mut image_band_of = alloc::vec![0usize; set.band_count()];
    for (image_idx, (src_idx, _)) in images.iter().enumerate() {
        image_band_of[*src_idx] = image_idx;
    }
    let image = BandSet::new(images.into_iter().map(|(_, iv)| iv).collect())?;
    Ok((image, MobiusMap { pole, image_band_of }))
}

/// Outcome of the sampled homogeneity check.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HomogeneityReport {
    pub eta: f64,
    pub holds: bool,
    /// Smallest ratio `|E ∩ (x−h, x+h)| / h` found on the grid.
    pub worst_ratio: f64,
    /// Grid point attaining the worst ratio.
    pub witness_x: f64,
    pub witness_h: f64,
    /// Number of logarithmically spaced radii per center.
    pub h_samples: usize,
    /// Centers actually scanned (band endpoints and midpoints).
    pub centers: Vec<f64>,
}

/// Sampled verifier of `|E ∩ (x−h, x+h)| ≥ η·h` for all `x ∈ E`,
/// `0 < h ≤ diam E`.
///
/// Centers are the band endpoints and midpoints; radii are log-spaced from
/// `diam E` down to `1e-9·diam E`. The measure itself is exact (interval
/// clipping), so the check is conservative only through grid resolution.
pub fn is_homogeneous(set: &BandSet, eta: f64, h_samples: usize) -> Result<HomogeneityReport> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::validation(format!("eta must lie in (0, 1], got {eta}")));
    }
    if h_samples < 2 {
        return Err(Error::validation("h_samples must be at least 2"));
    }
    let diam = set.diameter();
    let mut centers = Vec::with_capacity(3 * set.band_count());
    for b in set.bands() {
        centers.push(b.lo);
        centers.push(b.midpoint());
        centers.push(b.hi);
    }
    let ratio_floor = 1e-9f64;
    let step = ratio_floor.ln() / (h_samples - 1) as f64;
    let mut worst = f64::INFINITY;
    let mut witness = (centers[0], diam);
    for &x in &centers {
        for i in 0..h_samples {
            let h = diam * (step * i as f64).exp();
            let ratio = set.intersection_measure(x - h, x + h) / h;
            if ratio < worst {
                worst = ratio;
                witness = (x, h);
            }
        }
    }
    Ok(HomogeneityReport {
        eta,
        holds: worst >= eta,
        worst_ratio: worst,
        witness_x: witness.0,
        witness_h: witness.1,
        h_samples,
        centers,
    })
}
