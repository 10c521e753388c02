use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eer {
    pub eer: f64,
    /// Operating threshold; may be `±inf` when no finite score balances the rates.
    pub threshold: f64,
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Equal error rate by a sweep over every distinct score plus `±inf`.
///
/// `FAR(t)` counts impostor scores `>= t`, `FRR(t)` genuine scores `< t`. The
/// threshold minimizing `|FAR - FRR|` (smallest on ties) is chosen and the EER
/// reported as the mean of the two rates there.
pub fn compute_eer(genuine: &[f64], impostor: &[f64]) -> Result<Eer, EvalError> {
    if genuine.is_empty() || impostor.is_empty() {
        return Err(EvalError::EmptyScores);
    }
    let g = sorted(genuine);
    let im = sorted(impostor);
    let (ng, ni) = (g.len() as f64, im.len() as f64);
    let mut candidates: Vec<f64> = g.iter().chain(&im).copied().collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let rates = |t: f64| -> (f64, f64) {
        let far = (im.len() - im.partition_point(|&s| s < t)) as f64 / ni;
        let frr = g.partition_point(|&s| s < t) as f64 / ng;
        (far, frr)
    };
    let mut best = Eer { eer: 0.5, threshold: f64::NEG_INFINITY };
    let mut best_gap = f64::INFINITY;
    for t in std::iter::once(f64::NEG_INFINITY).chain(candidates).chain(std::iter::once(f64::INFINITY)) {
        let (far, frr) = rates(t);
        let gap = (far - frr).abs();
        if gap < best_gap {
            best_gap = gap;
            best = Eer { eer: (far + frr) / 2.0, threshold: t };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::sigmoid;
    use proptest::prelude::*;
    use rand::Rng;

    /// Quadratic sweep straight from the definitions.
    fn oracle(g: &[f64], im: &[f64]) -> (f64, f64) {
        let mut ts = vec![f64::NEG_INFINITY, f64::INFINITY];
        ts.extend(g.iter().chain(im));
        ts.sort_by(f64::total_cmp);
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for &t in &ts {
            let far = im.iter().filter(|&&s| s >= t).count() as f64 / im.len() as f64;
            let frr = g.iter().filter(|&&s| s < t).count() as f64 / g.len() as f64;
            if (far - frr).abs() < best.0 {
                best = ((far - frr).abs(), (far + frr) / 2.0, t);
            }
        }
        (best.1, best.2)
    }

    #[test]
    fn reference_cases() {
        assert_eq!(compute_eer(&[0.9, 0.8], &[0.1, 0.2]).unwrap().eer, 0.0);
        let same = [0.3, 0.5, 0.7];
        assert_eq!(compute_eer(&same, &same).unwrap().eer, 0.5);
        let e = compute_eer(&[0.9, 0.7, 0.4], &[0.2, 0.6, 0.8]).unwrap();
        assert_eq!(e.eer, 1.0 / 3.0);
        assert_eq!(e.threshold, 0.7);
        assert_eq!(compute_eer(&[], &[0.1]).unwrap_err(), EvalError::EmptyScores);
    }

    #[test]
    fn random_scores_are_near_chance() {
        let mut rng = crate::rng::seeded(31);
        let g: Vec<f64> = (0..2000).map(|_| rng.gen()).collect();
        let im: Vec<f64> = (0..2000).map(|_| rng.gen()).collect();
        let e = compute_eer(&g, &im).unwrap().eer;
        assert!((0.48..=0.52).contains(&e), "{e}");
    }

    proptest! {
        #[test]
        fn matches_exhaustive_sweep(g in prop::collection::vec(0u8..20, 1..12), im in prop::collection::vec(0u8..20, 1..12)) {
            let g: Vec<f64> = g.into_iter().map(|v| v as f64 / 19.0).collect();
            let im: Vec<f64> = im.into_iter().map(|v| v as f64 / 19.0).collect();
            let e = compute_eer(&g, &im).unwrap();
            let (eer, t) = oracle(&g, &im);
            prop_assert_eq!(e.eer, eer);
            prop_assert_eq!(e.threshold, t);
            prop_assert!((0.0..=1.0).contains(&e.eer));
        }

        #[test]
        fn invariant_under_increasing_maps(seed in 0u64..1000) {
            let mut rng = crate::rng::seeded(seed);
            let g: Vec<f64> = (0..40).map(|_| rng.gen::<f64>()).collect();
            let im: Vec<f64> = (0..40).map(|_| rng.gen::<f64>() * 0.8).collect();
            let base = compute_eer(&g, &im).unwrap().eer;
            let map = |f: &dyn Fn(f64) -> f64| (g.iter().map(|&v| f(v)).collect::<Vec<_>>(), im.iter().map(|&v| f(v)).collect::<Vec<_>>());
            for f in [&(|v: f64| 2.0 * v) as &dyn Fn(f64) -> f64, &|v| v + 3.0, &sigmoid] {
                let (a, b) = map(f);
                prop_assert_eq!(compute_eer(&a, &b).unwrap().eer, base);
            }
        }
    }
}
