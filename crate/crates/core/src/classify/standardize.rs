use serde::{Deserialize, Serialize};

use super::ClassifyError;
use crate::ingest::PixelSample;

/// Per-band z-score parameters estimated on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn band_count(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, bands: &[f64]) -> Result<Vec<f64>, ClassifyError> {
        if bands.len() != self.means.len() {
            return Err(ClassifyError::BandMismatch {
                expected: self.means.len(),
                got: bands.len(),
            });
        }
        Ok(bands
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(x, (m, s))| (x - m) / s)
            .collect())
    }
}

/// Mean and population standard deviation of every band.
pub fn fit_standardizer(samples: &[&PixelSample]) -> Result<Standardizer, ClassifyError> {
    if samples.len() < 2 {
        return Err(ClassifyError::TooFew {
            need: 2,
            got: samples.len(),
        });
    }
    let k = samples[0].bands.len();
    let n = samples.len() as f64;
    let mut means = vec![0.0; k];
    for s in samples {
        if s.bands.len() != k {
            return Err(ClassifyError::BandMismatch {
                expected: k,
                got: s.bands.len(),
            });
        }
        for (m, x) in means.iter_mut().zip(&s.bands) {
            *m += x;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut vars = vec![0.0; k];
    for s in samples {
        for ((v, x), m) in vars.iter_mut().zip(&s.bands).zip(&means) {
            *v += (x - m) * (x - m);
        }
    }
    let mut stds = Vec::with_capacity(k);
    for (band, v) in vars.into_iter().enumerate() {
        let sd = (v / n).sqrt();
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(ClassifyError::ZeroVariance { band });
        }
        stds.push(sd);
    }
    Ok(Standardizer { means, stds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Label;
    use chrono::NaiveDate;
    use rand::{Rng, SeedableRng};

    fn sample(bands: Vec<f64>) -> PixelSample {
        PixelSample {
            lake_id: "l".into(),
            date: NaiveDate::from_ymd_opt(2010, 1, 1).unwrap(),
            pixel_id: 0,
            cloudy: false,
            label: Label::Frozen,
            bands,
        }
    }

    #[test]
    fn two_samples() {
        let a = sample(vec![0.0]);
        let b = sample(vec![2.0]);
        let s = fit_standardizer(&[&a, &b]).unwrap();
        assert_eq!(s.means, vec![1.0]);
        assert_eq!(s.stds, vec![1.0]);
    }

    #[test]
    fn identical_samples_fail_on_first_band() {
        let a = sample(vec![3.0, 1.0]);
        let b = sample(vec![3.0, 2.0]);
        match fit_standardizer(&[&a, &a.clone()]) {
            Err(ClassifyError::ZeroVariance { band: 0 }) => {}
            other => panic!("{other:?}"),
        }
        match fit_standardizer(&[&a, &sample(vec![4.0, 1.0])]) {
            Err(ClassifyError::ZeroVariance { band: 1 }) => {}
            other => panic!("{other:?}"),
        }
        assert!(fit_standardizer(&[&b]).is_err());
    }

    #[test]
    fn matches_two_pass_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let samples: Vec<_> = (0..1000)
            .map(|_| sample((0..4).map(|k| rng.random_range(-1.0..1.0) * (k + 1) as f64 + k as f64).collect()))
            .collect();
        let refs: Vec<_> = samples.iter().collect();
        let s = fit_standardizer(&refs).unwrap();
        for k in 0..4 {
            let col: Vec<f64> = samples.iter().map(|x| x.bands[k]).collect();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / col.len() as f64;
            assert!((s.means[k] - mean).abs() < 1e-9);
            assert!((s.stds[k] - var.sqrt()).abs() < 1e-9);
        }
    }
}
