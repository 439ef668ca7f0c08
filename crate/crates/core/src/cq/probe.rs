use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{require_polyhedral, ConeAtPoint};
use crate::cone::{dot, norm, BlockKind};
use crate::error::Result;
use crate::model::{check_len, Problem};

/// Distances above this count as escaping `K(x̄, 0)`.
pub const PROBE_TOL: f64 = 1e-6;
/// The smallest scale must keep at least this fraction of the largest
/// scale's worst distance for a violation to be reported.
const PERSISTENCE: f64 = 0.1;
const MEMBERSHIP_TOL: f64 = 1e-12;
/// Samples are shrunk to `‖w‖ ≤ W_CAP`; outer semicontinuity only concerns
/// bounded sequences, and capped distances compare across scales.
pub const W_CAP: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    /// `(δ, r)` pairs, ordered from coarse to fine.
    pub scales: Vec<(f64, f64)>,
    pub samples_per_scale: usize,
    pub mu_magnitudes: Vec<f64>,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            scales: (1..=6).map(|j| (10f64.powi(-j), 10f64.powi(-j))).collect(),
            samples_per_scale: 256,
            mu_magnitudes: vec![1.0, 10.0, 1e3, 1e6],
            seed: 42,
        }
    }
}

/// An element `w = ∇g(x)*μ` of `K(x, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationMapSample {
    pub x: Vec<f64>,
    pub r: f64,
    pub mu: Vec<f64>,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub samples_tested: usize,
    pub max_distance: f64,
    pub worst_sample: Option<PerturbationMapSample>,
    /// Worst `dist(w, K(x̄, 0))` per scale, in config order.
    pub per_scale_max: Vec<f64>,
    pub violation: bool,
}

/// Returns the sample when `μ ∈ Θ₊` and `|⟨μ, g(x)⟩| ≤ r` (up to 1e−12).
pub fn perturbation_sample(problem: &Problem, x: &[f64], r: f64, mu: &[f64]) -> Result<Option<PerturbationMapSample>> {
    check_len("mu", mu, problem.p())?;
    let ev = problem.evaluate(x)?;
    let scale = norm(mu).max(1.0);
    if !problem.cone().polar_contains(mu, MEMBERSHIP_TOL * scale)? {
        return Ok(None);
    }
    let c = dot(mu, &ev.g).abs();
    if c > r + MEMBERSHIP_TOL * scale.max(r) {
        return Ok(None);
    }
    Ok(Some(PerturbationMapSample {
        x: x.to_vec(),
        r,
        mu: mu.to_vec(),
        w: ev.adjoint(mu),
    }))
}

struct ScaleResult {
    max: f64,
    worst: Option<(f64, PerturbationMapSample)>,
    tested: usize,
}

fn run_scale(
    problem: &Problem,
    x_bar: &[f64],
    k0: &ConeAtPoint,
    (delta, r): (f64, f64),
    config: &ProbeConfig,
    seed: u64,
) -> Result<ScaleResult> {
    let (n, p) = (problem.n(), problem.p());
    let blocks = problem.cone().blocks();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ScaleResult {
        max: 0.0,
        worst: None,
        tested: 0,
    };
    for s in 0..config.samples_per_scale {
        // uniform in the ball B(x̄, δ)
        let dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let dn = norm(&dir);
        let radius = delta * rng.gen::<f64>().powf(1.0 / n as f64);
        let x: Vec<f64> = x_bar
            .iter()
            .zip(&dir)
            .map(|(xb, d)| xb + if dn > 0.0 { radius * d / dn } else { 0.0 })
            .collect();

        let mut mu = vec![0.0; p];
        for b in &blocks {
            for j in b.range() {
                // sparse directions reach the faces of Θ₊
                if rng.gen_bool(0.25) {
                    continue;
                }
                mu[j] = match b.kind {
                    BlockKind::Zero => rng.gen_range(-1.0..1.0),
                    _ => rng.gen_range(0.0..1.0),
                };
            }
        }
        let mn = norm(&mu);
        if mn == 0.0 {
            continue;
        }
        let mag = config.mu_magnitudes[s % config.mu_magnitudes.len()];
        mu.iter_mut().for_each(|m| *m *= mag / mn);
        let g = problem.eval_constraints(&x)?;
        let c = dot(&mu, &g).abs();
        if c > r {
            let shrink = r / c;
            mu.iter_mut().for_each(|m| *m *= shrink);
        }
        let Some(mut sample) = perturbation_sample(problem, &x, r, &mu)? else {
            continue;
        };
        let wn = norm(&sample.w);
        if wn > W_CAP {
            let f = W_CAP / wn;
            sample.mu.iter_mut().for_each(|m| *m *= f);
            sample.w.iter_mut().for_each(|w| *w *= f);
        }
        out.tested += 1;
        let d = k0.distance(&sample.w);
        if out.worst.as_ref().is_none_or(|(wd, _)| d > *wd) {
            out.max = d;
            out.worst = Some((d, sample));
        }
    }
    Ok(out)
}

/// Samples `K(x, r)` near `(x̄, 0)`, capped at `‖w‖ ≤ 1`, and measures how
/// far it escapes `K(x̄, 0)`. A falsification device: `violation = false`
/// means no escape was found, not that regularity holds.
///
/// A violation is reported when every scale has a sample farther than
/// [`PROBE_TOL`] from `K(x̄, 0)` and the worst distance does not shrink from
/// the coarsest to the finest scale.
pub fn probe_akkt_regularity(problem: &Problem, x_bar: &[f64], config: &ProbeConfig) -> Result<ProbeReport> {
    require_polyhedral(problem, "the regularity probe")?;
    if config.scales.is_empty() || config.mu_magnitudes.is_empty() {
        return Err(crate::error::Error::Usage("probe needs at least one scale and one magnitude".into()));
    }
    let k0 = ConeAtPoint::new(problem, x_bar)?;
    let results: Vec<Result<ScaleResult>> = std::thread::scope(|s| {
        let handles: Vec<_> = config
            .scales
            .iter()
            .enumerate()
            .map(|(j, &scale)| {
                let seed = config.seed.wrapping_add((j as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                let k0 = &k0;
                s.spawn(move || run_scale(problem, x_bar, k0, scale, config, seed))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("probe worker panicked")).collect()
    });
    let mut per_scale_max = Vec::with_capacity(results.len());
    let mut samples_tested = 0;
    let mut worst: Option<(f64, PerturbationMapSample)> = None;
    for r in results {
        let r = r?;
        per_scale_max.push(r.max);
        samples_tested += r.tested;
        if let Some((d, s)) = r.worst {
            if worst.as_ref().is_none_or(|(wd, _)| d > *wd) {
                worst = Some((d, s));
            }
        }
    }
    let min_scale = per_scale_max.iter().copied().fold(f64::INFINITY, f64::min);
    let first = per_scale_max[0];
    let last = *per_scale_max.last().expect("non-empty scales");
    let violation = min_scale > PROBE_TOL && last >= PERSISTENCE * first;
    let (max_distance, worst_sample) = match worst {
        Some((d, s)) => (d, Some(s)),
        None => (0.0, None),
    };
    Ok(ProbeReport {
        samples_tested,
        max_distance,
        worst_sample,
        per_scale_max,
        violation,
    })
}
