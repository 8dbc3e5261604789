use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::{ClimateError, Metric};
use crate::phenology::PhenologyRecord;

pub const TREND_HEADER: &str = "lake_id,event,slope_d_per_a,intercept,n_winters";

/// Centred, normalised correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, ClimateError> {
    if x.len() != y.len() {
        return Err(ClimateError::Length(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(ClimateError::TooShort(x.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(ClimateError::Constant);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub n: usize,
}

/// Ordinary least squares of value against winter start year.
pub fn linear_trend(points: &[(i32, f64)]) -> Result<LinearFit, ClimateError> {
    if points.len() < 2 {
        return Err(ClimateError::TooShort(points.len()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(x, y) in points {
        let dx = x as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        return Err(ClimateError::SingleYear);
    }
    let slope = sxy / sxx;
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        n: points.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendResult {
    pub lake_id: String,
    pub event: Metric,
    pub slope_d_per_a: f64,
    pub intercept: f64,
    pub n_winters: usize,
}

/// Trends of every metric for every lake; metrics with fewer than two
/// winters are left out.
pub fn lake_trends(records: &[PhenologyRecord]) -> Vec<TrendResult> {
    let mut by_lake: BTreeMap<&str, Vec<&PhenologyRecord>> = BTreeMap::new();
    for r in records {
        by_lake.entry(&r.lake_id).or_default().push(r);
    }
    let mut out = Vec::new();
    for (lake, recs) in by_lake {
        for m in Metric::ALL {
            let pts: Vec<(i32, f64)> = recs
                .iter()
                .filter_map(|r| m.value(r).map(|v| (r.season.start_year(), v)))
                .collect();
            if let Ok(fit) = linear_trend(&pts) {
                out.push(TrendResult {
                    lake_id: lake.to_string(),
                    event: m,
                    slope_d_per_a: fit.slope,
                    intercept: fit.intercept,
                    n_winters: fit.n,
                });
            }
        }
    }
    out
}

pub fn write_trends<W: Write>(mut w: W, rows: &[TrendResult]) -> std::io::Result<()> {
    writeln!(w, "{TREND_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.lake_id, r.event, r.slope_d_per_a, r.intercept, r.n_winters
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pearson_closed_form() {
        let x = [1.0, 2.0, 4.0, 7.0];
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        let y: Vec<f64> = x.iter().map(|v| -2.0 * v + 3.0).collect();
        assert!((pearson(&x, &y).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&x, &[5.0; 4]), Err(ClimateError::Constant));
        assert_eq!(pearson(&x, &x[..3]), Err(ClimateError::Length(4, 3)));
        assert_eq!(pearson(&[1.0], &[1.0]), Err(ClimateError::TooShort(1)));
    }

    #[test]
    fn trend_closed_form() {
        let pts: Vec<_> = (2000..2020).map(|y| (y, 100.0 + (y - 2000) as f64)).collect();
        assert!((linear_trend(&pts).unwrap().slope - 1.0).abs() < 1e-9);
        let two = linear_trend(&[(2000, 100.0), (2010, 90.0)]).unwrap();
        assert!((two.slope + 1.0).abs() < 1e-12);
        assert!((two.intercept - 2100.0).abs() < 1e-9);
        assert_eq!(linear_trend(&[(2000, 1.0)]), Err(ClimateError::TooShort(1)));
        assert_eq!(linear_trend(&[(2000, 1.0), (2000, 2.0)]), Err(ClimateError::SingleYear));
    }

    proptest! {
        #[test]
        fn pearson_affine_invariance(
            x in proptest::collection::vec(-50.0f64..50.0, 3..30),
            noise in proptest::collection::vec(-50.0f64..50.0, 30),
            a in 0.1f64..10.0, b in -100.0f64..100.0,
        ) {
            let y: Vec<f64> = x.iter().zip(&noise).map(|(u, v)| u + v).collect();
            let Ok(r) = pearson(&x, &y) else { return Ok(()); };
            prop_assert!((-1.0..=1.0).contains(&r));
            let xs: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let r2 = pearson(&xs, &y).unwrap();
            prop_assert!((r - r2).abs() < 1e-9);
            let neg: Vec<f64> = y.iter().map(|v| -v).collect();
            prop_assert!((pearson(&x, &neg).unwrap() + r).abs() < 1e-12);
        }

        #[test]
        fn ols_matches_normal_equations(ys in proptest::collection::vec(0.0f64..300.0, 2..25), y0 in 1980i32..2010) {
            let pts: Vec<(i32, f64)> = ys.iter().enumerate().map(|(i, &v)| (y0 + 2 * i as i32, v)).collect();
            let fit = linear_trend(&pts).unwrap();
            // Uncentred textbook formula on years counted from 1980.
            let n = pts.len() as f64;
            let (sx, sy, sxx, sxy) = pts.iter().fold((0.0, 0.0, 0.0, 0.0), |acc, &(x, y)| {
                let x = (x - 1980) as f64;
                (acc.0 + x, acc.1 + y, acc.2 + x * x, acc.3 + x * y)
            });
            let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            prop_assert!((fit.slope - slope).abs() < 1e-9);
            let resid_sum: f64 = pts.iter().map(|&(x, y)| y - fit.intercept - fit.slope * x as f64).sum();
            prop_assert!(resid_sum.abs() < 1e-6);
        }
    }
}
