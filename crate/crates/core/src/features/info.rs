use super::descriptive::{bin_index, min_max};
use super::FeatureError;

const MI_BINS: usize = 16;

/// Plug-in mutual information in bits from a 16×16 joint histogram, each series
/// binned over its own range.
pub fn mutual_information(a: &[f64], b: &[f64]) -> Result<f64, FeatureError> {
    if a.len() != b.len() {
        return Err(FeatureError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let (amin, amax) = min_max(a);
    let (bmin, bmax) = min_max(b);
    let mut joint = [[0usize; MI_BINS]; MI_BINS];
    let mut pa = [0usize; MI_BINS];
    let mut pb = [0usize; MI_BINS];
    for (&u, &v) in a.iter().zip(b) {
        let i = bin_index(u, amin, amax, MI_BINS);
        let j = bin_index(v, bmin, bmax, MI_BINS);
        joint[i][j] += 1;
        pa[i] += 1;
        pb[j] += 1;
    }
    let n = a.len() as f64;
    let mut mi = 0.0;
    for i in 0..MI_BINS {
        for j in 0..MI_BINS {
            let c = joint[i][j];
            if c == 0 {
                continue;
            }
            let pij = c as f64 / n;
            mi += pij * (pij * n * n / (pa[i] as f64 * pb[j] as f64)).log2();
        }
    }
    Ok(mi.max(0.0))
}

/// Pearson correlation; 0 when either series has zero variance.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    let ma = a[..n].iter().sum::<f64>() / n as f64;
    let mb = b[..n].iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a[..n].iter().zip(&b[..n]) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa > 0.0 && sbb > 0.0 {
        (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn identical_uniform_series_carry_four_bits() {
        let a: Vec<f64> = (0..160).map(|i| f64::from(i % 16)).collect();
        assert!((mutual_information(&a, &a).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn constant_series_has_no_information() {
        let a = vec![3.0; 20];
        let b: Vec<f64> = (0..20).map(f64::from).collect();
        assert_eq!(mutual_information(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn length_mismatch() {
        assert_eq!(mutual_information(&[1.0; 8], &[1.0; 9]).unwrap_err(), FeatureError::LengthMismatch(8, 9));
    }

    #[test]
    fn independent_noise_has_little_information() {
        let mut rng = crate::rng::seeded(31);
        let a: Vec<f64> = (0..1000).map(|_| rng.sample(StandardNormal)).collect();
        let b: Vec<f64> = (0..1000).map(|_| rng.sample(StandardNormal)).collect();
        let mi = mutual_information(&a, &b).unwrap();
        // Independent route: entropies from the marginal and joint histograms.
        let h = |counts: &[usize]| -> f64 {
            counts.iter().filter(|&&c| c > 0).map(|&c| c as f64 / 1000.0).map(|p| -p * p.log2()).sum()
        };
        let bin = |v: f64| (v * 16.0).floor().min(15.0) as usize;
        let (amin, amax) = min_max(&a);
        let (bmin, bmax) = min_max(&b);
        let ra: Vec<usize> = a.iter().map(|v| bin((v - amin) / (amax - amin))).collect();
        let rb: Vec<usize> = b.iter().map(|v| bin((v - bmin) / (bmax - bmin))).collect();
        let mut ca = vec![0; 16];
        let mut cb = vec![0; 16];
        let mut cj = vec![0; 256];
        for (i, j) in ra.iter().zip(&rb) {
            ca[*i] += 1;
            cb[*j] += 1;
            cj[i * 16 + j] += 1;
        }
        let oracle = h(&ca) + h(&cb) - h(&cj);
        assert!((mi - oracle).abs() < 1e-9);
        assert!(mi <= 0.15, "{mi}");
    }

    #[test]
    fn correlation_cases() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((correlation(&a, &a) - 1.0).abs() < 1e-15);
        assert!((correlation(&a, &[4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
        assert_eq!(correlation(&a, &[1.0; 4]), 0.0);
    }
}
