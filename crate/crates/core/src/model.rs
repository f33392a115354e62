//! The Gibbs segment model: reference measure data, energy, local energy and
//! the conditional intensity `tau * exp(-beta * N_x(K))`.

use std::f64::consts::PI;

use rand::Rng;

use crate::geometry::{segments_intersect, Domain, Point, Segment};
use crate::{Error, Result};

/// Reference length distribution. Both variants have closed-form moments,
/// which the bound evaluator relies on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LengthLaw {
    Fixed(f64),
    Uniform(f64, f64),
}

impl LengthLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LengthLaw::Fixed(l) => {
                if !(l.is_finite() && l > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "fixed length must be positive, got {l}"
                    )));
                }
            }
            LengthLaw::Uniform(a, b) => {
                if !(a.is_finite() && b.is_finite() && a > 0.0 && b > a) {
                    return Err(Error::InvalidParameter(format!(
                        "uniform length law needs 0 < a < b, got ({a}, {b})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Supremum of the support.
    pub fn sup(&self) -> f64 {
        match *self {
            LengthLaw::Fixed(l) => l,
            LengthLaw::Uniform(_, b) => b,
        }
    }

    /// `E_L l^alpha`, in closed form.
    pub fn moment(&self, alpha: f64) -> f64 {
        match *self {
            LengthLaw::Fixed(l) => l.powf(alpha),
            LengthLaw::Uniform(a, b) => {
                (b.powf(alpha + 1.0) - a.powf(alpha + 1.0)) / ((alpha + 1.0) * (b - a))
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            LengthLaw::Fixed(l) => l,
            LengthLaw::Uniform(a, b) => rng.gen_range(a..b),
        }
    }
}

impl std::fmt::Display for LengthLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            LengthLaw::Fixed(l) => write!(f, "fixed({l})"),
            LengthLaw::Uniform(a, b) => write!(f, "uniform({a},{b})"),
        }
    }
}

/// Model parameters: activity `tau`, inverse temperature `beta`, circumball
/// radius bound `R` and the reference length law (directions are always
/// uniform on `[0, pi)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub tau: f64,
    pub beta: f64,
    pub radius: f64,
    pub length_law: LengthLaw,
}

impl ModelParams {
    pub fn new(tau: f64, beta: f64, radius: f64, length_law: LengthLaw) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "activity tau must be positive, got {tau}"
            )));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "inverse temperature beta must be nonnegative, got {beta}"
            )));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius bound must be positive, got {radius}"
            )));
        }
        length_law.validate()?;
        if length_law.sup() > 2.0 * radius + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "length law support must lie in (0, 2R] = (0, {}], sup is {}",
                2.0 * radius,
                length_law.sup()
            )));
        }
        Ok(ModelParams {
            tau,
            beta,
            radius,
            length_law,
        })
    }

    /// Interaction range: two segments with half-length at most `R` can only
    /// intersect when their centres are within `2R`.
    pub fn interaction_range(&self) -> f64 {
        2.0 * self.radius
    }
}

/// Uniform grid over the simulation region with cell size equal to the
/// interaction range, so a 3x3 block of cells covers all possible partners.
#[derive(Debug, Clone)]
struct SpatialGrid {
    x0: f64,
    y0: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl SpatialGrid {
    fn new(lo: Point, hi: Point, cell: f64) -> Self {
        assert!(cell > 0.0);
        let nx = (((hi.x - lo.x) / cell).ceil() as usize).max(1);
        let ny = (((hi.y - lo.y) / cell).ceil() as usize).max(1);
        SpatialGrid {
            x0: lo.x,
            y0: lo.y,
            cell,
            nx,
            ny,
            cells: vec![Vec::new(); nx * ny],
        }
    }

    fn coords(&self, p: Point) -> (usize, usize) {
        let ix = (((p.x - self.x0) / self.cell).floor() as i64).clamp(0, self.nx as i64 - 1);
        let iy = (((p.y - self.y0) / self.cell).floor() as i64).clamp(0, self.ny as i64 - 1);
        (ix as usize, iy as usize)
    }

    fn insert(&mut self, p: Point, id: u32) {
        let (ix, iy) = self.coords(p);
        self.cells[iy * self.nx + ix].push(id);
    }

    fn remove(&mut self, p: Point, id: u32) {
        let (ix, iy) = self.coords(p);
        let cell = &mut self.cells[iy * self.nx + ix];
        let pos = cell
            .iter()
            .position(|&v| v == id)
            .expect("grid entry missing");
        cell.swap_remove(pos);
    }

    fn for_each_neighbor<F: FnMut(u32)>(&self, p: Point, mut f: F) {
        let (ix, iy) = self.coords(p);
        let x_lo = ix.saturating_sub(1);
        let y_lo = iy.saturating_sub(1);
        let x_hi = (ix + 1).min(self.nx - 1);
        let y_hi = (iy + 1).min(self.ny - 1);
        for cy in y_lo..=y_hi {
            for cx in x_lo..=x_hi {
                for &id in &self.cells[cy * self.nx + cx] {
                    f(id);
                }
            }
        }
    }
}

/// A finite set of segments on a simulation domain, with a spatial index for
/// neighbourhood queries. Only the owning sampler chain mutates it.
#[derive(Debug, Clone)]
pub struct Configuration {
    domain: Domain,
    segments: Vec<Segment>,
    grid: SpatialGrid,
}

impl Configuration {
    pub fn empty(domain: Domain, params: &ModelParams) -> Self {
        let (lo, hi) = domain.sim_bbox();
        Configuration {
            domain,
            segments: Vec::new(),
            grid: SpatialGrid::new(lo, hi, params.interaction_range()),
        }
    }

    pub fn from_segments(
        domain: Domain,
        params: &ModelParams,
        segments: Vec<Segment>,
    ) -> Result<Self> {
        let mut cfg = Configuration::empty(domain, params);
        for s in segments {
            if !domain.contains(s.center()) {
                return Err(Error::InvalidParameter(format!(
                    "segment centre ({}, {}) outside the simulation region",
                    s.center().x,
                    s.center().y
                )));
            }
            if s.length() > params.interaction_range() + 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "segment length {} exceeds 2R = {}",
                    s.length(),
                    params.interaction_range()
                )));
            }
            if cfg.segments.contains(&s) {
                return Err(Error::InvalidParameter(
                    "duplicate segment in configuration".into(),
                ));
            }
            cfg.insert(s);
        }
        Ok(cfg)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn insert(&mut self, s: Segment) {
        debug_assert!(self.domain.contains(s.center()));
        let id = self.segments.len() as u32;
        self.grid.insert(s.center(), id);
        self.segments.push(s);
    }

    /// Removes and returns the segment at `idx` (swap-removal; the index of
    /// the last segment changes to `idx`).
    pub fn remove(&mut self, idx: usize) -> Segment {
        let last = self.segments.len() - 1;
        self.grid.remove(self.segments[idx].center(), idx as u32);
        if idx != last {
            let moved_center = self.segments[last].center();
            self.grid.remove(moved_center, last as u32);
            self.grid.insert(moved_center, idx as u32);
        }
        self.segments.swap_remove(idx)
    }

    pub fn replace(&mut self, idx: usize, s: Segment) -> Segment {
        let old = self.segments[idx];
        self.grid.remove(old.center(), idx as u32);
        self.grid.insert(s.center(), idx as u32);
        self.segments[idx] = s;
        old
    }

    /// Number of segments of the configuration intersecting `k`
    /// (`k` itself must not be a member).
    pub fn local_energy(&self, k: &Segment) -> usize {
        let mut count = 0usize;
        self.grid.for_each_neighbor(k.center(), |id| {
            if segments_intersect(k, &self.segments[id as usize]) {
                count += 1;
            }
        });
        count
    }

    /// Number of segments intersecting `k`, skipping the member at `skip`
    /// (used when `k` is proposed as a replacement for that member).
    pub fn local_energy_skipping(&self, k: &Segment, skip: usize) -> usize {
        let mut count = 0usize;
        self.grid.for_each_neighbor(k.center(), |id| {
            if id as usize != skip && segments_intersect(k, &self.segments[id as usize]) {
                count += 1;
            }
        });
        count
    }

    /// Number of segments intersecting the member at `idx`, the member
    /// itself excluded.
    pub fn local_energy_excluding(&self, idx: usize) -> usize {
        let k = &self.segments[idx];
        let mut count = 0usize;
        self.grid.for_each_neighbor(k.center(), |id| {
            if id as usize != idx && segments_intersect(k, &self.segments[id as usize]) {
                count += 1;
            }
        });
        count
    }

    /// Total energy: the number of unordered intersecting pairs.
    pub fn energy(&self) -> u64 {
        let mut twice = 0u64;
        for idx in 0..self.segments.len() {
            twice += self.local_energy_excluding(idx) as u64;
        }
        twice / 2
    }

    /// Mean number of intersections per segment; zero for an empty
    /// configuration.
    pub fn mean_intersections(&self) -> f64 {
        if self.segments.is_empty() {
            return 0.0;
        }
        2.0 * self.energy() as f64 / self.segments.len() as f64
    }
}

/// Indicator pair potential: 1 if the segments intersect, else 0.
pub fn pair_potential(a: &Segment, b: &Segment) -> u8 {
    segments_intersect(a, b) as u8
}

/// Conditional intensity `tau * exp(-beta * N_x(k))` for `k` not in `x`.
/// Always in `(0, tau]`.
pub fn conditional_intensity(params: &ModelParams, x: &Configuration, k: &Segment) -> f64 {
    if params.beta == 0.0 {
        return params.tau;
    }
    params.tau * (-params.beta * x.local_energy(k) as f64).exp()
}

/// Conditional intensity of the member at `idx` with respect to the rest of
/// the configuration.
pub fn conditional_intensity_excluding(
    params: &ModelParams,
    x: &Configuration,
    idx: usize,
) -> f64 {
    if params.beta == 0.0 {
        return params.tau;
    }
    params.tau * (-params.beta * x.local_energy_excluding(idx) as f64).exp()
}

/// `lambda*(l, x ∪ {k}) - lambda*(l, x)` for `l` not in `x`, evaluated
/// directly from the two local energies.
pub fn intensity_difference(
    params: &ModelParams,
    x: &Configuration,
    k: &Segment,
    l: &Segment,
) -> f64 {
    let base = x.local_energy(l) as f64;
    let with_k = base + pair_potential(k, l) as f64;
    params.tau * ((-params.beta * with_k).exp() - (-params.beta * base).exp())
}

/// Draws a segment from the reference measure restricted to the simulation
/// region: centre uniform, direction uniform on `[0, pi)`, length from the
/// length law, all independent.
pub fn sample_reference_segment<R: Rng + ?Sized>(
    params: &ModelParams,
    domain: &Domain,
    rng: &mut R,
) -> Segment {
    let center = domain.sample_center(rng);
    let angle = rng.gen_range(0.0..PI);
    let length = params.length_law.sample(rng);
    Segment::new(center, angle, length)
}
