//! Birth-death-move Metropolis-Hastings chain targeting the finite-volume
//! Gibbs density `tau^N exp(-beta H)` relative to a unit-activity Poisson
//! reference on the padded simulation domain, plus the GNZ-equation
//! diagnostic used to certify the sampler.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geometry::{segment_hits_window, Domain, Segment, Window};
use crate::model::{
    conditional_intensity, conditional_intensity_excluding, sample_reference_segment,
    Configuration, ModelParams,
};
use crate::{Error, Result};

/// Move mix of one sweep: birth 0.35, death 0.35, move 0.30.
const BIRTH_P: f64 = 0.35;
const DEATH_P: f64 = 0.35;

/// Chain schedule. `sweeps` must exceed `burn_in`; one sweep performs
/// `max(n, 1)` proposals. `sabotage_death` makes every death proposal accept
/// unconditionally — a negative control that the GNZ diagnostic must flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainSettings {
    pub sweeps: u64,
    pub burn_in: u64,
    pub sabotage_death: bool,
}

impl Default for ChainSettings {
    fn default() -> Self {
        ChainSettings {
            sweeps: 4000,
            burn_in: 2000,
            sabotage_death: false,
        }
    }
}

impl ChainSettings {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps <= self.burn_in {
            return Err(Error::InvalidParameter(
                "sweeps must exceed burn_in".into(),
            ));
        }
        Ok(())
    }
}

/// Per-move-type proposal and acceptance counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProposalStats {
    pub birth_proposed: u64,
    pub birth_accepted: u64,
    pub death_proposed: u64,
    pub death_accepted: u64,
    pub move_proposed: u64,
    pub move_accepted: u64,
}

impl ProposalStats {
    pub fn rate(accepted: u64, proposed: u64) -> f64 {
        if proposed == 0 {
            0.0
        } else {
            accepted as f64 / proposed as f64
        }
    }

    pub fn birth_rate(&self) -> f64 {
        Self::rate(self.birth_accepted, self.birth_proposed)
    }

    pub fn death_rate(&self) -> f64 {
        Self::rate(self.death_accepted, self.death_proposed)
    }

    pub fn move_rate(&self) -> f64 {
        Self::rate(self.move_accepted, self.move_proposed)
    }
}

/// One Metropolis-Hastings chain. The configuration is owned by the chain
/// and mutated in place; replicates run as independent chains.
#[derive(Debug, Clone)]
pub struct Chain {
    params: ModelParams,
    config: Configuration,
    stats: ProposalStats,
    step_count: u64,
    sabotage_death: bool,
}

impl Chain {
    pub fn new(params: ModelParams, domain: Domain) -> Self {
        let config = Configuration::empty(domain, &params);
        Chain {
            params,
            config,
            stats: ProposalStats::default(),
            step_count: 0,
            sabotage_death: false,
        }
    }

    pub fn with_sabotaged_death(mut self, on: bool) -> Self {
        self.sabotage_death = on;
        self
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn into_config(self) -> Configuration {
        self.config
    }

    pub fn stats(&self) -> &ProposalStats {
        &self.stats
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Birth acceptance ratio for inserting `k` into the current state:
    /// `lambda*(k, x) V / (n + 1)`.
    pub fn birth_ratio(&self, k: &Segment) -> f64 {
        let v = self.config.domain().sim_area();
        conditional_intensity(&self.params, &self.config, k) * v
            / (self.config.len() as f64 + 1.0)
    }

    /// Death acceptance ratio for removing the member at `idx`:
    /// `n / (lambda*(k, x \ {k}) V)`.
    pub fn death_ratio(&self, idx: usize) -> f64 {
        let v = self.config.domain().sim_area();
        self.config.len() as f64
            / (conditional_intensity_excluding(&self.params, &self.config, idx) * v)
    }

    pub fn birth_step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.step_count += 1;
        self.stats.birth_proposed += 1;
        let k = sample_reference_segment(&self.params, self.config.domain(), rng);
        let ratio = self.birth_ratio(&k);
        if rng.gen::<f64>() < ratio {
            self.config.insert(k);
            self.stats.birth_accepted += 1;
        }
    }

    pub fn death_step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.step_count += 1;
        self.stats.death_proposed += 1;
        let n = self.config.len();
        if n == 0 {
            return;
        }
        let idx = rng.gen_range(0..n);
        let accept = if self.sabotage_death {
            true
        } else {
            rng.gen::<f64>() < self.death_ratio(idx)
        };
        if accept {
            self.config.remove(idx);
            self.stats.death_accepted += 1;
        }
    }

    pub fn move_step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.step_count += 1;
        self.stats.move_proposed += 1;
        let n = self.config.len();
        if n == 0 {
            return;
        }
        let idx = rng.gen_range(0..n);
        let candidate = sample_reference_segment(&self.params, self.config.domain(), rng);
        let ratio = if self.params.beta == 0.0 {
            1.0
        } else {
            let e_old = self.config.local_energy_excluding(idx) as f64;
            let e_new = self.config.local_energy_skipping(&candidate, idx) as f64;
            (-self.params.beta * (e_new - e_old)).exp()
        };
        if ratio >= 1.0 || rng.gen::<f64>() < ratio {
            self.config.replace(idx, candidate);
            self.stats.move_accepted += 1;
        }
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let u: f64 = rng.gen();
        if u < BIRTH_P {
            self.birth_step(rng);
        } else if u < BIRTH_P + DEATH_P {
            self.death_step(rng);
        } else {
            self.move_step(rng);
        }
    }

    /// One sweep: `max(n, 1)` proposals with `n` the count at sweep start.
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let proposals = self.config.len().max(1);
        for _ in 0..proposals {
            self.step(rng);
        }
    }

    pub fn run_sweeps<R: Rng + ?Sized>(&mut self, sweeps: u64, rng: &mut R) {
        for _ in 0..sweeps {
            self.sweep(rng);
        }
    }
}

/// Runs a fresh chain for `settings.sweeps` sweeps and returns the final
/// configuration with the proposal statistics. Deterministic given the seed.
pub fn run_chain(
    params: &ModelParams,
    domain: &Domain,
    settings: &ChainSettings,
    seed: u64,
) -> Result<(Configuration, ProposalStats)> {
    settings.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain = Chain::new(*params, *domain).with_sabotaged_death(settings.sabotage_death);
    chain.run_sweeps(settings.sweeps, &mut rng);
    let stats = *chain.stats();
    Ok((chain.into_config(), stats))
}

/// Built-in GNZ test functions, all localized to a window `W`:
/// `f1 = 1{K hits W}`, `f2 = l(K) 1{K hits W}`,
/// `f3 = 1{K hits W} N_x(K)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GnzFnKind {
    HitCount,
    LengthWeightedHit,
    HitNeighbourCount,
}

impl GnzFnKind {
    pub const ALL: [GnzFnKind; 3] = [
        GnzFnKind::HitCount,
        GnzFnKind::LengthWeightedHit,
        GnzFnKind::HitNeighbourCount,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            GnzFnKind::HitCount => "f1",
            GnzFnKind::LengthWeightedHit => "f2",
            GnzFnKind::HitNeighbourCount => "f3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnzTestFn {
    pub kind: GnzFnKind,
    pub window: Window,
}

impl GnzTestFn {
    pub fn all_for(window: Window) -> Vec<GnzTestFn> {
        GnzFnKind::ALL
            .iter()
            .map(|&kind| GnzTestFn { kind, window })
            .collect()
    }

    /// Summand `f(K, x \ {K})` for the member at `idx`.
    fn lhs_term(&self, x: &Configuration, idx: usize) -> f64 {
        let s = &x.segments()[idx];
        if !segment_hits_window(s, &self.window) {
            return 0.0;
        }
        match self.kind {
            GnzFnKind::HitCount => 1.0,
            GnzFnKind::LengthWeightedHit => s.length(),
            GnzFnKind::HitNeighbourCount => x.local_energy_excluding(idx) as f64,
        }
    }

    /// Integrand `f(K, x)` for a fresh segment `k` (without the intensity).
    fn rhs_term(&self, x: &Configuration, k: &Segment) -> f64 {
        if !segment_hits_window(k, &self.window) {
            return 0.0;
        }
        match self.kind {
            GnzFnKind::HitCount => 1.0,
            GnzFnKind::LengthWeightedHit => k.length(),
            GnzFnKind::HitNeighbourCount => x.local_energy(k) as f64,
        }
    }
}

/// Result of a GNZ balance check. The two sides are estimated over
/// independent replicate chains; the z-score combines their standard errors
/// as if independent, which is conservative because both sides share the
/// replicate configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct GnzCheckReport {
    pub f_id: &'static str,
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub rhs_se: f64,
    pub z: f64,
    pub n_samples: usize,
}

impl GnzCheckReport {
    pub fn pass(&self) -> bool {
        self.z.abs() <= 3.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnzSettings {
    pub chain: ChainSettings,
    /// Reference draws per replicate for the right-hand side integral.
    pub mc_points: usize,
}

impl Default for GnzSettings {
    fn default() -> Self {
        GnzSettings {
            chain: ChainSettings::default(),
            mc_points: 2000,
        }
    }
}

/// GNZ balance check for one test function.
pub fn gnz_check(
    params: &ModelParams,
    domain: &Domain,
    f: &GnzTestFn,
    replicates: usize,
    settings: &GnzSettings,
    seed: u64,
) -> Result<GnzCheckReport> {
    let mut reports = gnz_check_all(params, domain, std::slice::from_ref(f), replicates, settings, seed)?;
    Ok(reports.pop().unwrap())
}

/// GNZ balance checks for several test functions over a shared set of
/// replicate chains and shared reference draws.
pub fn gnz_check_all(
    params: &ModelParams,
    domain: &Domain,
    fs: &[GnzTestFn],
    replicates: usize,
    settings: &GnzSettings,
    seed: u64,
) -> Result<Vec<GnzCheckReport>> {
    settings.chain.validate()?;
    if replicates < 2 {
        return Err(Error::InvalidParameter(
            "gnz_check needs at least 2 replicates".into(),
        ));
    }
    let v = domain.sim_area();
    // per replicate: (lhs value, rhs value) for each f
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let mut chain = Chain::new(*params, *domain)
                .with_sabotaged_death(settings.chain.sabotage_death);
            chain.run_sweeps(settings.chain.sweeps, &mut rng);
            let x = chain.config();

            let mut lhs = vec![0.0f64; fs.len()];
            for idx in 0..x.len() {
                for (j, f) in fs.iter().enumerate() {
                    lhs[j] += f.lhs_term(x, idx);
                }
            }

            let mut rhs_acc = vec![0.0f64; fs.len()];
            for _ in 0..settings.mc_points {
                let k = sample_reference_segment(params, domain, &mut rng);
                let li = conditional_intensity(params, x, &k);
                for (j, f) in fs.iter().enumerate() {
                    rhs_acc[j] += f.rhs_term(x, &k) * li;
                }
            }
            let rhs: Vec<f64> = rhs_acc
                .iter()
                .map(|&a| v * a / settings.mc_points as f64)
                .collect();
            (lhs, rhs)
        })
        .collect();

    Ok(fs
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let lhs_vals: Vec<f64> = rows.iter().map(|r| r.0[j]).collect();
            let rhs_vals: Vec<f64> = rows.iter().map(|r| r.1[j]).collect();
            let (lhs, lhs_sd) = crate::stats::mean_sd(&lhs_vals);
            let (rhs, rhs_sd) = crate::stats::mean_sd(&rhs_vals);
            let m = replicates as f64;
            let lhs_se = lhs_sd / m.sqrt();
            let rhs_se = rhs_sd / m.sqrt();
            let combined = (lhs_se * lhs_se + rhs_se * rhs_se).sqrt();
            let z = if combined > 0.0 {
                (lhs - rhs) / combined
            } else if lhs == rhs {
                0.0
            } else {
                f64::INFINITY
            };
            GnzCheckReport {
                f_id: f.kind.id(),
                lhs,
                lhs_se,
                rhs,
                rhs_se,
                z,
                n_samples: replicates,
            }
        })
        .collect())
}

/// Monte Carlo estimate of the correlation function `E[lambda*(K, mu)]`,
/// averaging over replicate chains and reference segments with centres
/// uniform on the observation window. Returns `(estimate, standard error)`.
pub fn correlation_estimate(
    params: &ModelParams,
    domain: &Domain,
    replicates: usize,
    k_draws: usize,
    settings: &ChainSettings,
    seed: u64,
) -> Result<(f64, f64)> {
    settings.validate()?;
    if replicates < 2 || k_draws == 0 {
        return Err(Error::InvalidParameter(
            "correlation_estimate needs >= 2 replicates and >= 1 draw".into(),
        ));
    }
    let means: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let mut chain = Chain::new(*params, *domain);
            chain.run_sweeps(settings.sweeps, &mut rng);
            let x = chain.config();
            let mut acc = 0.0;
            for _ in 0..k_draws {
                let center = domain.window.sample_point_in_dilation(0.0, &mut rng);
                let angle = rng.gen_range(0.0..std::f64::consts::PI);
                let length = params.length_law.sample(&mut rng);
                let k = Segment::new(center, angle, length);
                acc += conditional_intensity(params, x, &k);
            }
            acc / k_draws as f64
        })
        .collect();
    let (mean, sd) = crate::stats::mean_sd(&means);
    Ok((mean, sd / (replicates as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::model::LengthLaw;

    fn params(tau: f64, beta: f64) -> ModelParams {
        ModelParams::new(tau, beta, 0.5, LengthLaw::Fixed(1.0)).unwrap()
    }

    fn square_domain(side: f64, margin: f64) -> Domain {
        Domain::new(Window::square(side).unwrap(), margin).unwrap()
    }

    #[test]
    fn settings_validation() {
        let bad = ChainSettings {
            sweeps: 100,
            burn_in: 100,
            sabotage_death: false,
        };
        assert!(bad.validate().is_err());
        assert!(ChainSettings::default().validate().is_ok());
    }

    #[test]
    fn detailed_balance_identity() {
        // birth ratio times death ratio of the inverse move is exactly 1,
        // and the birth ratio times (n+1)/V equals the Gibbs density ratio.
        let p = params(1.4, 0.9);
        let domain = square_domain(8.0, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        let mut chain = Chain::new(p, domain);
        chain.run_sweeps(60, &mut rng);
        let v = domain.sim_area();
        for _ in 0..50 {
            let k = sample_reference_segment(&p, &domain, &mut rng);
            let n = chain.config().len();
            let r_birth = chain.birth_ratio(&k);
            let h = chain.config().local_energy(&k) as f64;
            let density_ratio = p.tau * (-p.beta * h).exp();
            assert!(
                (r_birth * (n as f64 + 1.0) / v - density_ratio).abs()
                    <= 1e-12 * density_ratio.max(1.0)
            );
            // perform the insertion, then evaluate the reverse death ratio
            let mut forward = chain.clone();
            forward.config.insert(k);
            let idx = forward.config.len() - 1;
            let r_death = forward.death_ratio(idx);
            assert!(
                (r_birth * r_death - 1.0).abs() < 1e-12,
                "balance violated: {r_birth} * {r_death}"
            );
        }
    }

    #[test]
    fn acceptance_ratio_plug_ins() {
        // beta = 0, tau chosen so that lambda* V = n + 1 gives ratio 1
        let domain = square_domain(10.0, 0.0);
        let v = domain.sim_area();
        assert_eq!(v, 100.0);
        let p = params(1.0, 0.0);
        let mut chain = Chain::new(p, domain);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..99 {
            let s = sample_reference_segment(&p, &domain, &mut rng);
            chain.config.insert(s);
        }
        let k = sample_reference_segment(&p, &domain, &mut rng);
        assert!((chain.birth_ratio(&k) - 1.0).abs() < 1e-12);
        chain.config.insert(k);
        assert_eq!(chain.config().len(), 100);
        assert!((chain.death_ratio(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn death_on_empty_is_noop_and_move_preserves_count() {
        let p = params(1.0, 0.0);
        let domain = square_domain(6.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut chain = Chain::new(p, domain);
        chain.death_step(&mut rng);
        assert_eq!(chain.config().len(), 0);
        assert_eq!(chain.stats().death_proposed, 1);
        assert_eq!(chain.stats().death_accepted, 0);

        for _ in 0..25 {
            let s = sample_reference_segment(&p, &domain, &mut rng);
            chain.config.insert(s);
        }
        for _ in 0..100_000 {
            chain.move_step(&mut rng);
        }
        assert_eq!(chain.config().len(), 25);
        // beta = 0 moves always accept
        assert_eq!(chain.stats().move_proposed, chain.stats().move_accepted);
    }

    #[test]
    fn chain_is_deterministic() {
        let p = params(1.0, 0.5);
        let domain = square_domain(8.0, 2.0);
        let settings = ChainSettings {
            sweeps: 120,
            burn_in: 20,
            sabotage_death: false,
        };
        let (a, sa) = run_chain(&p, &domain, &settings, 99).unwrap();
        let (b, sb) = run_chain(&p, &domain, &settings, 99).unwrap();
        assert_eq!(a.segments(), b.segments());
        assert_eq!(sa, sb);
        let (c, _) = run_chain(&p, &domain, &settings, 100).unwrap();
        assert_ne!(a.segments(), c.segments());
    }

    #[test]
    fn poisson_count_moments_at_beta_zero() {
        // single-chain time average with batch means
        let p = params(1.0, 0.0);
        let domain = square_domain(10.0, 2.0);
        let expected = domain.sim_area(); // tau V
        let mut rng = ChaCha8Rng::seed_from_u64(314);
        let mut chain = Chain::new(p, domain);
        chain.run_sweeps(300, &mut rng);
        let (batches, per_batch) = (60usize, 60usize);
        let mut means = Vec::with_capacity(batches);
        for _ in 0..batches {
            let mut acc = 0.0;
            for _ in 0..per_batch {
                chain.sweep(&mut rng);
                acc += chain.config().len() as f64;
            }
            means.push(acc / per_batch as f64);
        }
        let (mean, sd) = crate::stats::mean_sd(&means);
        let se = sd / (batches as f64).sqrt();
        assert!(
            (mean - expected).abs() < 3.0 * se,
            "count mean {mean} vs {expected} (se {se})"
        );
    }

    #[test]
    fn poisson_dispersion_across_replicates() {
        // var/mean of the final counts over independent replicates; the
        // sampling SE of the ratio is about sqrt(2/m), so m = 4000 puts the
        // +-0.05 window at 2.2 sigma
        let p = params(1.0, 0.0);
        let domain = square_domain(20.0, 1.0);
        let settings = ChainSettings {
            sweeps: 150,
            burn_in: 0,
            sabotage_death: false,
        };
        let counts: Vec<f64> = (0..4000u64)
            .into_par_iter()
            .map(|i| {
                let (cfg, _) = run_chain(&p, &domain, &settings, 5000 + i).unwrap();
                cfg.len() as f64
            })
            .collect();
        let (mean, sd) = crate::stats::mean_sd(&counts);
        let ratio = sd * sd / mean;
        assert!(
            (0.95..=1.05).contains(&ratio),
            "dispersion ratio {ratio}, mean {mean}"
        );
        let expected = domain.sim_area();
        let se = sd / (counts.len() as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * se);
    }

    #[test]
    fn repulsion_reduces_intersections() {
        let p0 = params(1.0, 0.0);
        let p5 = params(1.0, 5.0);
        let domain = square_domain(10.0, 2.0);
        let settings = ChainSettings {
            sweeps: 400,
            burn_in: 0,
            sabotage_death: false,
        };
        let mean_crossings = |p: &ModelParams| -> f64 {
            let vals: Vec<f64> = (0..30u64)
                .into_par_iter()
                .map(|i| {
                    let (cfg, _) = run_chain(p, &domain, &settings, 900 + i).unwrap();
                    cfg.mean_intersections()
                })
                .collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        let free = mean_crossings(&p0);
        let repelled = mean_crossings(&p5);
        assert!(
            repelled < free,
            "beta=5 should repel: {repelled} vs {free}"
        );
    }

    #[test]
    fn gnz_beta_zero_closed_form() {
        let p = params(1.0, 0.0);
        let domain = square_domain(10.0, 4.0);
        let f = GnzTestFn {
            kind: GnzFnKind::HitCount,
            window: domain.window,
        };
        let settings = GnzSettings {
            chain: ChainSettings {
                sweeps: 150,
                burn_in: 50,
                sabotage_death: false,
            },
            mc_points: 1500,
        };
        let report = gnz_check(&p, &domain, &f, 250, &settings, 42).unwrap();
        assert!(report.pass(), "z = {}", report.z);
        let expected = 100.0 + 40.0 / std::f64::consts::PI;
        assert!(
            (report.lhs - expected).abs() < 4.0 * report.lhs_se,
            "lhs {} vs {expected}",
            report.lhs
        );
        assert!(
            (report.rhs - expected).abs() < 4.0 * report.rhs_se,
            "rhs {} vs {expected}",
            report.rhs
        );
    }

    #[test]
    fn gnz_interacting_case_balances() {
        let p = params(1.0, 1.0);
        let domain = square_domain(8.0, 4.0);
        let settings = GnzSettings {
            chain: ChainSettings {
                sweeps: 500,
                burn_in: 100,
                sabotage_death: false,
            },
            mc_points: 1200,
        };
        let fs = GnzTestFn::all_for(domain.window);
        let reports = gnz_check_all(&p, &domain, &fs, 180, &settings, 7).unwrap();
        for r in &reports {
            assert!(r.pass(), "{}: z = {}", r.f_id, r.z);
        }
    }

    #[test]
    fn gnz_empty_window_is_zero() {
        let p = params(1.0, 0.3);
        let domain = square_domain(6.0, 2.0);
        let far = Window::square_at(2.0, Point::new(100.0, 0.0)).unwrap();
        let f = GnzTestFn {
            kind: GnzFnKind::HitCount,
            window: far,
        };
        let settings = GnzSettings {
            chain: ChainSettings {
                sweeps: 60,
                burn_in: 10,
                sabotage_death: false,
            },
            mc_points: 300,
        };
        let report = gnz_check(&p, &domain, &f, 20, &settings, 2).unwrap();
        assert_eq!(report.lhs, 0.0);
        assert_eq!(report.rhs, 0.0);
        assert_eq!(report.z, 0.0);
        assert!(report.pass());
    }

    #[test]
    fn sabotaged_death_fails_gnz() {
        let p = params(1.0, 0.0);
        let domain = square_domain(10.0, 4.0);
        let f = GnzTestFn {
            kind: GnzFnKind::HitCount,
            window: domain.window,
        };
        let settings = GnzSettings {
            chain: ChainSettings {
                sweeps: 150,
                burn_in: 50,
                sabotage_death: true,
            },
            mc_points: 800,
        };
        let report = gnz_check(&p, &domain, &f, 120, &settings, 42).unwrap();
        assert!(!report.pass(), "sabotage undetected: z = {}", report.z);
    }

    #[test]
    fn correlation_estimate_within_bracket() {
        let p = params(1.0, 0.5);
        let domain = square_domain(10.0, 4.0);
        let settings = ChainSettings {
            sweeps: 300,
            burn_in: 100,
            sabotage_death: false,
        };
        let (est, se) = correlation_estimate(&p, &domain, 150, 80, &settings, 11).unwrap();
        // upper bound tau, coarse lower bound tau (1 - beta b), b = pi at R = 1/2
        let b = std::f64::consts::PI;
        let lower = p.tau * (1.0 - p.beta * b);
        assert!(est <= p.tau + 3.0 * se, "estimate {est} above tau");
        assert!(est >= lower - 3.0 * se);
        // at beta = 0.5 with crossings present the estimate sits strictly
        // below tau by more than noise
        assert!(est < p.tau - 3.0 * se, "no suppression visible: {est}");
    }
}
