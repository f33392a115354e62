//! Window functionals and their innovations: the compensated residual
//! `sum_{K in x} f(K) - int f(K) lambda*(K, x) lambda(dK)`, with the
//! compensator integral estimated by Monte Carlo over the dilated window.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geometry::{segment_hits_window, Domain, Window};
use crate::model::{conditional_intensity, Configuration, ModelParams};
use crate::sampler::{Chain, ChainSettings};
use crate::{Error, Result};

/// The two normalized window statistics whose Gaussian approximation the
/// toolkit verifies: a hit count and a length-weighted hit count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionalKind {
    /// `phi(K) = 1{K hits W} / sqrt(tau Leb(W))`
    Count,
    /// `psi(K) = l(K) 1{K hits W} / sqrt(tau Leb(W) E_L l^2)`
    LengthWeighted,
}

impl FunctionalKind {
    pub fn id(&self) -> &'static str {
        match self {
            FunctionalKind::Count => "phi",
            FunctionalKind::LengthWeighted => "psi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Functional {
    pub kind: FunctionalKind,
    pub window: Window,
    pub tau: f64,
    /// `E_L l^2` for the length-weighted variant, fixed to 1 for the count.
    pub second_length_moment: f64,
    scale: f64,
}

impl Functional {
    pub fn new(
        kind: FunctionalKind,
        window: Window,
        tau: f64,
        length_law: &crate::model::LengthLaw,
    ) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "functional needs tau > 0, got {tau}"
            )));
        }
        let slm = match kind {
            FunctionalKind::Count => 1.0,
            FunctionalKind::LengthWeighted => length_law.moment(2.0),
        };
        let normalizer = (tau * window.area() * slm).sqrt();
        if !(normalizer.is_finite() && normalizer > 0.0) {
            return Err(Error::InvalidParameter(
                "functional normalizer must be positive".into(),
            ));
        }
        Ok(Functional {
            kind,
            window,
            tau,
            second_length_moment: slm,
            scale: 1.0 / normalizer,
        })
    }

    /// Evaluates the functional at a segment.
    pub fn evaluate(&self, k: &crate::geometry::Segment) -> f64 {
        if !segment_hits_window(k, &self.window) {
            return 0.0;
        }
        match self.kind {
            FunctionalKind::Count => self.scale,
            FunctionalKind::LengthWeighted => k.length() * self.scale,
        }
    }
}

/// One innovation draw: the point sum, the Monte Carlo compensator with its
/// standard error, and the compensated value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnovationSample {
    pub sum_part: f64,
    pub compensator: f64,
    pub compensator_se: f64,
    pub value: f64,
    pub mc_points: usize,
}

/// Monte Carlo settings for the compensator integral. Starting from
/// `initial_points`, the point count doubles until the standard error drops
/// below `se_target` (if set) or `max_points` is reached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub initial_points: usize,
    pub se_target: Option<f64>,
    pub max_points: usize,
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings {
            initial_points: 100_000,
            se_target: Some(0.005),
            max_points: 1_600_000,
        }
    }
}

struct Accumulator {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator {
            n: 0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    fn push(&mut self, v: f64) {
        self.n += 1;
        let d = v - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (v - self.mean);
    }

    /// Standard error of the mean, scaled by `factor`.
    fn se(&self, factor: f64) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        let var = self.m2 / (self.n as f64 - 1.0);
        factor * (var / self.n as f64).sqrt()
    }
}

fn check_precondition(f: &Functional, domain: &Domain, params: &ModelParams) -> Result<()> {
    if !domain.contains_dilated_window(&f.window, params.radius) {
        return Err(Error::Precondition(format!(
            "window dilated by R = {} is not contained in the simulation region \
             (margin {}); enlarge the margin",
            params.radius, domain.margin
        )));
    }
    Ok(())
}

/// Innovation of `f` on the configuration `x`.
///
/// The compensator `int f(K) lambda*(K, x) lambda(dK)` is estimated with
/// centres drawn uniformly on `W ⊕ B(0, R)` and shapes from the reference
/// law; the integrand vanishes outside that centre set because segment
/// half-lengths are at most `R`, so the estimator is unbiased.
pub fn innovation<R: Rng + ?Sized>(
    f: &Functional,
    x: &Configuration,
    params: &ModelParams,
    mc: &McSettings,
    rng: &mut R,
) -> Result<InnovationSample> {
    let samples = innovation_multi(std::slice::from_ref(f), x, params, mc, rng)?;
    Ok(samples[0])
}

/// Innovations of several functionals over one configuration, sharing the
/// Monte Carlo draws and the conditional-intensity evaluations. All
/// functionals must use the same window.
pub fn innovation_multi<R: Rng + ?Sized>(
    fs: &[Functional],
    x: &Configuration,
    params: &ModelParams,
    mc: &McSettings,
    rng: &mut R,
) -> Result<Vec<InnovationSample>> {
    assert!(!fs.is_empty());
    for f in &fs[1..] {
        if f.window != fs[0].window {
            return Err(Error::InvalidParameter(
                "innovation_multi requires a common window".into(),
            ));
        }
    }
    check_precondition(&fs[0], x.domain(), params)?;

    let sums: Vec<f64> = fs
        .iter()
        .map(|f| x.segments().iter().map(|s| f.evaluate(s)).sum())
        .collect();

    let window = &fs[0].window;
    let region_area = window.dilated_area(params.radius);
    let mut accs: Vec<Accumulator> = fs.iter().map(|_| Accumulator::new()).collect();
    let mut batch = mc.initial_points.max(2);
    loop {
        for _ in 0..batch {
            let center = window.sample_point_in_dilation(params.radius, rng);
            let angle = rng.gen_range(0.0..std::f64::consts::PI);
            let length = params.length_law.sample(rng);
            let k = crate::geometry::Segment::new(center, angle, length);
            let li = conditional_intensity(params, x, &k);
            for (f, acc) in fs.iter().zip(accs.iter_mut()) {
                acc.push(f.evaluate(&k) * li);
            }
        }
        let total = accs[0].n;
        let worst_se = accs
            .iter()
            .map(|a| a.se(region_area))
            .fold(0.0f64, f64::max);
        match mc.se_target {
            Some(target) if worst_se > target && total < mc.max_points => {
                batch = total.min(mc.max_points - total);
            }
            _ => break,
        }
    }

    Ok(fs
        .iter()
        .zip(accs.iter())
        .zip(sums.iter())
        .map(|((_, acc), &sum_part)| {
            let compensator = region_area * acc.mean;
            InnovationSample {
                sum_part,
                compensator,
                compensator_se: acc.se(region_area),
                value: sum_part - compensator,
                mc_points: acc.n,
            }
        })
        .collect())
}

/// Draws `m` innovations from `m` independent chains with derived seeds
/// `seed + i`, in parallel; the result is ordered by replicate index.
pub fn innovation_sample_set(
    f: &Functional,
    params: &ModelParams,
    domain: &Domain,
    replicates: usize,
    chain: &ChainSettings,
    mc: &McSettings,
    seed: u64,
) -> Result<Vec<f64>> {
    let sets = innovation_sample_sets(
        std::slice::from_ref(f),
        params,
        domain,
        replicates,
        chain,
        mc,
        seed,
    )?;
    Ok(sets.into_iter().next().unwrap())
}

/// Innovation samples for several functionals sharing the same replicate
/// chains. Returns one vector per functional, each ordered by replicate.
pub fn innovation_sample_sets(
    fs: &[Functional],
    params: &ModelParams,
    domain: &Domain,
    replicates: usize,
    chain: &ChainSettings,
    mc: &McSettings,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    chain.validate()?;
    check_precondition(&fs[0], domain, params)?;
    let per_replicate: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let mut ch = Chain::new(*params, *domain);
            ch.run_sweeps(chain.sweeps, &mut rng);
            let samples = innovation_multi(fs, ch.config(), params, mc, &mut rng)
                .expect("precondition checked up front");
            samples.iter().map(|s| s.value).collect()
        })
        .collect();
    let mut out = vec![Vec::with_capacity(replicates); fs.len()];
    for rep in per_replicate {
        for (j, v) in rep.into_iter().enumerate() {
            out[j].push(v);
        }
    }
    Ok(out)
}
