//! Synthetic multi-context accelerometer traces.
//!
//! Each user alternates attended bouts, where the signal is a per-context sum
//! of sinusoids plus Gaussian noise, with unattended bouts of near-still
//! readings inside the unattended boxes. Populations share context templates;
//! a distinctiveness knob in `[0, 1]` scales how far each user's parameters
//! move away from the template.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::UnattendedThresholds;
use crate::rng::{derive, derive_str, seeded};
use crate::trace::{AccelSample, AccelTrace};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sinusoid {
    pub freq_hz: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl Sinusoid {
    fn at(&self, t_s: f64) -> f64 {
        self.amplitude * (TAU * self.freq_hz * t_s + self.phase).sin()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextSpec {
    pub weight: f64,
    /// Per-axis offsets from the rest posture (the centre of the unattended boxes).
    pub offset: [f64; 3],
    /// Two or three components per axis.
    pub components: [Vec<Sinusoid>; 3],
    pub noise_std: f64,
    /// Probability that an attended bout of this context has the screen on.
    pub screen_on_prob: f64,
}

impl ContextSpec {
    /// Frequency of the largest-amplitude component over all axes.
    pub fn dominant_frequency(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold((0.0, -1.0), |b, s| if s.amplitude > b.1 { (s.freq_hz, s.amplitude) } else { b })
            .0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthUserSpec {
    pub user_id: String,
    pub seed: u64,
    pub contexts: Vec<ContextSpec>,
    pub unattended_fraction: f64,
    pub total_duration_ms: u64,
    pub rate_hz: f64,
}

impl SynthUserSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidSpec(m));
        if self.contexts.is_empty() {
            return bad("at least one context is required".into());
        }
        let wsum: f64 = self.contexts.iter().map(|c| c.weight).sum();
        if self.contexts.iter().any(|c| !(c.weight >= 0.0)) || (wsum - 1.0).abs() > 1e-9 {
            return bad(format!("context weights must be non-negative and sum to 1 (sum {wsum})"));
        }
        if !(0.0..1.0).contains(&self.unattended_fraction) {
            return bad(format!("unattended_fraction {} outside [0, 1)", self.unattended_fraction));
        }
        if !(4.0..=40.0).contains(&self.rate_hz) {
            return bad(format!("rate_hz {} outside [4, 40]", self.rate_hz));
        }
        if self.total_duration_ms == 0 {
            return bad("total_duration_ms must be positive".into());
        }
        for (i, c) in self.contexts.iter().enumerate() {
            if !(c.noise_std >= 0.0) || !(0.0..=1.0).contains(&c.screen_on_prob) || c.offset.iter().any(|o| !o.is_finite()) {
                return bad(format!("context {i}: noise, screen probability or offsets out of range"));
            }
            for axis in &c.components {
                if !(2..=3).contains(&axis.len()) {
                    return bad(format!("context {i}: each axis needs 2 or 3 components"));
                }
                for s in axis {
                    if !(s.freq_hz > 0.0 && s.freq_hz < self.rate_hz / 2.0) || !(s.amplitude >= 0.0) || !s.phase.is_finite() {
                        return bad(format!("context {i}: component {s:?} violates 0 < f < rate/2, amplitude >= 0"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Per-sample labels emitted alongside a synthetic trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub t_ms: u64,
    pub attended: bool,
    pub context: Option<usize>,
}

/// Time attributed to attended (or unattended) samples: each sample owns the
/// interval up to the next one.
pub fn labelled_duration_ms(truth: &[GroundTruth], attended: bool) -> u64 {
    truth.windows(2).filter(|w| w[0].attended == attended).map(|w| w[1].t_ms - w[0].t_ms).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Bout {
    len_ms: u64,
    context: Option<usize>,
    screen_on: bool,
}

const MIN_BOUT_MS: f64 = 10_000.0;
const MEAN_BOUT_MS: f64 = 60_000.0;

/// Attended time is split across contexts by weight; each context's budget is
/// cut into bouts of `10 s + Exp` length (mean 60 s). Bouts are ordered by
/// taking next the context with the most budget still unplaced, relative to its
/// share, so every context is spread over the whole trace. Unattended time is
/// divided among the gaps after each attended bout.
fn plan_bouts(spec: &SynthUserSpec, rng: &mut crate::rng::Rng) -> Vec<Bout> {
    let total = spec.total_duration_ms;
    let unattended = (spec.unattended_fraction * total as f64).round() as u64;
    let attended = total - unattended;
    let exp = Exp::new(1.0 / (MEAN_BOUT_MS - MIN_BOUT_MS)).expect("positive rate");

    let mut budgets: Vec<u64> = spec.contexts.iter().map(|c| (c.weight * attended as f64).floor() as u64).collect();
    let heaviest = (0..budgets.len()).fold(0, |b, i| if spec.contexts[i].weight > spec.contexts[b].weight { i } else { b });
    budgets[heaviest] += attended - budgets.iter().sum::<u64>();
    let mut queues: Vec<Vec<u64>> = budgets
        .iter()
        .map(|&budget| {
            let mut q = Vec::new();
            let mut acc = 0;
            while acc < budget {
                let draw: f64 = Distribution::<f64>::sample(&exp, rng);
                let l = ((MIN_BOUT_MS + draw).round() as u64).min(budget - acc);
                q.push(l);
                acc += l;
            }
            q.reverse();
            q
        })
        .collect();
    let mut remaining = budgets.clone();
    let mut order = Vec::new();
    while let Some(ctx) = (0..queues.len())
        .filter(|&c| !queues[c].is_empty())
        .map(|c| (c, remaining[c] as f64 / budgets[c] as f64 + rng.gen_range(0.0..0.05)))
        .fold(None, |b: Option<(usize, f64)>, cur| match b {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        })
        .map(|b| b.0)
    {
        let l = queues[ctx].pop().expect("non-empty queue");
        remaining[ctx] -= l;
        order.push((ctx, l));
    }

    let mut gaps = vec![0u64; order.len()];
    if unattended > 0 && !order.is_empty() {
        let w: Vec<f64> = (0..order.len()).map(|_| 0.5 + rng.gen::<f64>()).collect();
        let wsum: f64 = w.iter().sum();
        let mut given = 0;
        for (g, wi) in gaps.iter_mut().zip(&w) {
            *g = (unattended as f64 * wi / wsum).floor() as u64;
            given += *g;
        }
        *gaps.last_mut().expect("at least one attended bout") += unattended - given;
    }
    let mut bouts = Vec::with_capacity(2 * order.len() + 1);
    if order.is_empty() {
        bouts.push(Bout { len_ms: unattended, context: None, screen_on: false });
    }
    for ((ctx, l), g) in order.into_iter().zip(gaps) {
        let screen_on = rng.gen_bool(spec.contexts[ctx].screen_on_prob);
        bouts.push(Bout { len_ms: l, context: Some(ctx), screen_on });
        if g > 0 {
            bouts.push(Bout { len_ms: g, context: None, screen_on: false });
        }
    }
    bouts
}

/// Centre of each unattended box, i.e. the reading of a phone lying still.
pub fn rest_posture(th: &UnattendedThresholds) -> [f64; 3] {
    [(th.lx + th.ux) / 2.0, (th.ly + th.uy) / 2.0, (th.lz + th.uz) / 2.0]
}

/// Generates one user's trace and per-sample ground truth. Deterministic in `spec.seed`.
pub fn generate_trace(spec: &SynthUserSpec) -> Result<(AccelTrace, Vec<GroundTruth>), SynthError> {
    spec.validate()?;
    let th = UnattendedThresholds::default();
    let rest = rest_posture(&th);
    let half_width = [(th.ux - th.lx) / 2.0, (th.uy - th.ly) / 2.0, (th.uz - th.lz) / 2.0];
    let mut rng = seeded(spec.seed);
    let bouts = plan_bouts(spec, &mut rng);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mean_dt = 1000.0 / spec.rate_hz;

    let mut samples = Vec::new();
    let mut truth = Vec::new();
    let mut t: u64 = 0;
    let mut bout_end: u64 = 0;
    let mut bi = 0;
    let mut current = bouts[0];
    bout_end += current.len_ms;
    while t < spec.total_duration_ms {
        while t >= bout_end {
            bi += 1;
            current = bouts[bi];
            bout_end += current.len_ms;
        }
        let (xyz, screen_on) = match current.context {
            Some(c) => {
                let ctx = &spec.contexts[c];
                let ts = t as f64 / 1000.0;
                let mut v = [0.0; 3];
                for a in 0..3 {
                    let wave: f64 = ctx.components[a].iter().map(|s| s.at(ts)).sum();
                    v[a] = rest[a] + ctx.offset[a] + wave + ctx.noise_std * unit.sample(&mut rng);
                }
                (v, current.screen_on)
            }
            None => {
                let mut v = [0.0; 3];
                for a in 0..3 {
                    v[a] = rest[a] + half_width[a] * rng.gen_range(-0.4..0.4);
                }
                (v, false)
            }
        };
        samples.push(AccelSample::new(t, xyz[0], xyz[1], xyz[2], screen_on));
        truth.push(GroundTruth { t_ms: t, attended: current.context.is_some(), context: current.context });
        let dt = (mean_dt * rng.gen_range(0.9..1.1)).round().max(1.0) as u64;
        t += dt;
    }
    let mut trace = AccelTrace::from_samples(spec.user_id.clone(), samples).map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
    trace.nominal_rate_hz = spec.rate_hz;
    Ok((trace, truth))
}

/// Population-level knobs; [`generate_population`] uses the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PopulationParams {
    pub n_contexts: usize,
    pub attended_duration_ms: u64,
    pub unattended_fraction: f64,
    pub base_rate_hz: f64,
}

impl Default for PopulationParams {
    fn default() -> Self {
        Self { n_contexts: 3, attended_duration_ms: 3_600_000, unattended_fraction: 0.2, base_rate_hz: 20.0 }
    }
}

const BASE_NOISE: f64 = 0.03;
const MAX_SLOT_STEP_HZ: f64 = 0.5;
const SLOT_SPAN_HZ: f64 = 4.0;

fn template_contexts(n: usize, rate_hz: f64, rng: &mut crate::rng::Rng) -> Vec<ContextSpec> {
    let f_max = 0.45 * rate_hz;
    (0..n)
        .map(|c| {
            let f0 = 0.5 + 1.2 * c as f64 + rng.gen_range(0.0..0.3);
            let components = std::array::from_fn(|_| {
                let a = rng.gen_range(0.05..0.4);
                let mut v = vec![
                    Sinusoid { freq_hz: f0, amplitude: a, phase: rng.gen_range(0.0..TAU) },
                    Sinusoid { freq_hz: 1.5 * f0, amplitude: a * rng.gen_range(0.2..0.5), phase: rng.gen_range(0.0..TAU) },
                ];
                if rng.gen_bool(0.5) {
                    v.push(Sinusoid { freq_hz: 0.5 * f0, amplitude: a * rng.gen_range(0.1..0.3), phase: rng.gen_range(0.0..TAU) });
                }
                v.iter_mut().for_each(|s| s.freq_hz = s.freq_hz.min(f_max));
                v
            });
            ContextSpec {
                weight: 1.0 / n as f64,
                offset: [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(0.6..1.0)],
                components,
                noise_std: BASE_NOISE,
                screen_on_prob: rng.gen_range(0.2..0.8),
            }
        })
        .collect()
}

/// A population of `n` users whose context parameters depart from shared
/// templates in proportion to `distinctiveness`.
///
/// Dominant frequencies are shifted by `distinctiveness * step * slot` with a
/// distinct slot per user, so at full distinctiveness users sit at least
/// `step` Hz apart (step = 0.5 Hz for up to 9 users). With distinctiveness 0
/// every user gets identical contexts and rate; only seeds differ.
pub fn generate_population_with(
    n: usize,
    distinctiveness: f64,
    master_seed: u64,
    params: &PopulationParams,
) -> Result<Vec<SynthUserSpec>, SynthError> {
    if n < 2 {
        return Err(SynthError::InvalidSpec(format!("population needs at least 2 users, got {n}")));
    }
    if !(0.0..=1.0).contains(&distinctiveness) {
        return Err(SynthError::InvalidSpec(format!("distinctiveness {distinctiveness} outside [0, 1]")));
    }
    if params.n_contexts == 0 || !(0.0..1.0).contains(&params.unattended_fraction) || params.attended_duration_ms == 0 {
        return Err(SynthError::InvalidSpec("population parameters out of range".into()));
    }
    let d = distinctiveness;
    let templates = template_contexts(params.n_contexts, params.base_rate_hz * 0.8, &mut seeded(derive_str(master_seed, "templates")));
    let mut slots: Vec<usize> = (0..n).collect();
    slots.shuffle(&mut seeded(derive_str(master_seed, "slots")));
    let step = MAX_SLOT_STEP_HZ.min(SLOT_SPAN_HZ / (n - 1) as f64);
    let total = (params.attended_duration_ms as f64 / (1.0 - params.unattended_fraction)).round() as u64;
    let width = n.to_string().len().max(2);

    let specs = (0..n)
        .map(|i| {
            let mut rng = seeded(derive_str(master_seed, &format!("user/{i}")));
            let rate_hz = params.base_rate_hz + d * rng.gen_range(-4.0..4.0);
            let shift = d * step * slots[i] as f64;
            let f_max = 0.45 * rate_hz;
            let mut contexts: Vec<ContextSpec> = templates
                .iter()
                .map(|tpl| {
                    let mut c = tpl.clone();
                    c.weight *= 1.0 + d * rng.gen_range(-0.3..0.3);
                    for a in 0..3 {
                        let z = if a == 2 { 0.15 } else { 0.25 };
                        c.offset[a] += d * rng.gen_range(-z..z);
                        let scale = 1.0 + d * rng.gen_range(-0.4..0.4);
                        let base = c.components[a][0].freq_hz;
                        for s in c.components[a].iter_mut() {
                            s.freq_hz = (s.freq_hz * (base + shift) / base).min(f_max);
                            s.amplitude *= scale;
                            s.phase += d * rng.gen_range(0.0..TAU);
                        }
                    }
                    c.noise_std *= 1.0 + d * rng.gen_range(-0.3..0.3);
                    c.screen_on_prob = (c.screen_on_prob + d * rng.gen_range(-0.2..0.2)).clamp(0.0, 1.0);
                    c
                })
                .collect();
            let wsum: f64 = contexts.iter().map(|c| c.weight).sum();
            contexts.iter_mut().for_each(|c| c.weight /= wsum);
            SynthUserSpec {
                user_id: format!("user{i:0width$}"),
                seed: derive(master_seed, i as u64),
                contexts,
                unattended_fraction: params.unattended_fraction,
                total_duration_ms: total,
                rate_hz,
            }
        })
        .collect::<Vec<_>>();
    for s in &specs {
        s.validate()?;
    }
    Ok(specs)
}

pub fn generate_population(n: usize, distinctiveness: f64, master_seed: u64) -> Result<Vec<SynthUserSpec>, SynthError> {
    generate_population_with(n, distinctiveness, master_seed, &PopulationParams::default())
}

/// `t_ms,attended,context` with context `-1` for unattended samples.
pub fn format_ground_truth(truth: &[GroundTruth]) -> String {
    let mut out = String::from("t_ms,attended,context\n");
    for g in truth {
        let ctx = g.context.map_or(-1, |c| c as i64);
        let _ = writeln!(out, "{},{},{}", g.t_ms, u8::from(g.attended), ctx);
    }
    out
}

pub fn save_ground_truth(truth: &[GroundTruth], path: &Path) -> std::io::Result<()> {
    std::fs::write(path, format_ground_truth(truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::remove_unattended;

    fn still_spec() -> SynthUserSpec {
        let zero = vec![Sinusoid { freq_hz: 1.0, amplitude: 0.0, phase: 0.0 }; 2];
        SynthUserSpec {
            user_id: "still".into(),
            seed: 1,
            contexts: vec![ContextSpec {
                weight: 1.0,
                offset: [0.0; 3],
                components: [zero.clone(), zero.clone(), zero],
                noise_std: 0.0,
                screen_on_prob: 0.5,
            }],
            unattended_fraction: 0.3,
            total_duration_ms: 120_000,
            rate_hz: 20.0,
        }
    }

    fn small_population(d: f64) -> Vec<SynthUserSpec> {
        let p = PopulationParams { attended_duration_ms: 300_000, unattended_fraction: 0.5, ..Default::default() };
        generate_population_with(8, d, 17, &p).unwrap()
    }

    #[test]
    fn deterministic() {
        let spec = &small_population(0.8)[0];
        let (a, ga) = generate_trace(spec).unwrap();
        let (b, gb) = generate_trace(spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(ga, gb);
        assert_eq!(small_population(0.8), small_population(0.8));
    }

    #[test]
    fn unattended_budget() {
        let mut spec = small_population(0.8).remove(2);
        spec.unattended_fraction = 0.5;
        spec.total_duration_ms = 600_000;
        let (_, truth) = generate_trace(&spec).unwrap();
        let u = labelled_duration_ms(&truth, false);
        assert!((288_000..=312_000).contains(&u), "{u}");
    }

    #[test]
    fn motionless_context_sits_in_the_boxes() {
        let (trace, _) = generate_trace(&still_spec()).unwrap();
        let th = UnattendedThresholds::default();
        for s in trace.samples() {
            assert!(th.lx < s.x && s.x < th.ux && th.ly < s.y && s.y < th.uy && th.lz < s.z && s.z < th.uz, "{s:?}");
        }
    }

    #[test]
    fn sampling_jitter_is_bounded() {
        let spec = &small_population(0.5)[1];
        let (trace, _) = generate_trace(spec).unwrap();
        let nominal = 1000.0 / spec.rate_hz;
        for w in trace.samples().windows(2) {
            let dt = (w[1].t_ms - w[0].t_ms) as f64;
            assert!(dt >= (nominal * 0.9).floor() && dt <= (nominal * 1.1).ceil());
        }
    }

    #[test]
    fn zero_distinctiveness_shares_everything_but_seeds() {
        let pop = small_population(0.0);
        for s in &pop[1..] {
            assert_eq!(s.contexts, pop[0].contexts);
            assert_eq!(s.rate_hz, pop[0].rate_hz);
            assert_ne!(s.seed, pop[0].seed);
        }
    }

    #[test]
    fn distinct_users_have_separated_frequencies() {
        let pop = small_population(0.8);
        assert_eq!(pop.len(), 8);
        for c in 0..3 {
            for i in 0..8 {
                for j in i + 1..8 {
                    let gap = (pop[i].contexts[c].dominant_frequency() - pop[j].contexts[c].dominant_frequency()).abs();
                    assert!(gap >= 0.3, "context {c}, users {i},{j}: {gap}");
                }
            }
        }
    }

    #[test]
    fn removal_recovers_attended_time() {
        for spec in small_population(0.8).iter().take(3) {
            let (trace, truth) = generate_trace(spec).unwrap();
            let kept = remove_unattended(&trace, &UnattendedThresholds::default()).unwrap();
            let retained = kept.covered_duration_ms(1_000) as f64;
            let attended = labelled_duration_ms(&truth, true) as f64;
            assert!((retained / attended - 1.0).abs() <= 0.05, "{retained} vs {attended}");
        }
    }

    #[test]
    fn invalid_specs() {
        let mut s = still_spec();
        s.contexts[0].weight = 0.5;
        assert!(generate_trace(&s).is_err());
        let mut s = still_spec();
        s.contexts[0].components[0][0].freq_hz = 10.0;
        assert!(generate_trace(&s).is_err());
        assert!(generate_population(1, 0.5, 0).is_err());
    }

    #[test]
    fn sidecar_format() {
        let t = [GroundTruth { t_ms: 0, attended: true, context: Some(2) }, GroundTruth { t_ms: 50, attended: false, context: None }];
        assert_eq!(format_ground_truth(&t), "t_ms,attended,context\n0,1,2\n50,0,-1\n");
    }
}
