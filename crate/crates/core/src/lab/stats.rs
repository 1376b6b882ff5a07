use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lab::landing::LandingPoint;

/// Scatter of a landing series. Standard deviations are population values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyStats {
    pub n: usize,
    pub mean_x: f64,
    pub mean_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    /// √(σx² + σy²)
    pub sigma_norm: f64,
    /// π·σx·σy
    pub area_sigma: f64,
}

impl AccuracyStats {
    /// Builds the derived fields from the two standard deviations.
    pub fn from_sigmas(n: usize, mean: (f64, f64), sigma_x: f64, sigma_y: f64) -> Self {
        Self {
            n,
            mean_x: mean.0,
            mean_y: mean.1,
            sigma_x,
            sigma_y,
            sigma_norm: sigma_x.hypot(sigma_y),
            area_sigma: std::f64::consts::PI * sigma_x * sigma_y,
        }
    }

    /// Mean of the two axis deviations.
    pub fn sigma_avg(&self) -> f64 {
        0.5 * (self.sigma_x + self.sigma_y)
    }
}

fn mean_sd(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    let var = v.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Statistics of planar points.
pub fn stats_from_points(points: &[(f64, f64)]) -> Result<AccuracyStats> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 landing points, got {}",
            points.len()
        )));
    }
    let (mx, sx) = mean_sd(points.iter().map(|p| p.0));
    let (my, sy) = mean_sd(points.iter().map(|p| p.1));
    Ok(AccuracyStats::from_sigmas(points.len(), (mx, my), sx, sy))
}

/// Statistics of the valid landings in `landings`.
pub fn compute_stats(landings: &[LandingPoint]) -> Result<AccuracyStats> {
    let pts: Vec<(f64, f64)> = landings
        .iter()
        .filter(|l| l.valid)
        .map(|l| (l.x, l.y))
        .collect();
    stats_from_points(&pts)
}

/// Percentile bootstrap interval of a statistic of one sample.
pub fn bootstrap_ci<R: Rng + ?Sized>(
    points: &[(f64, f64)],
    statistic: impl Fn(&[(f64, f64)]) -> f64,
    resamples: usize,
    level: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if points.len() < 2 || resamples == 0 {
        return Err(Error::InsufficientData("bootstrap needs data".into()));
    }
    let mut buf = vec![(0.0, 0.0); points.len()];
    let mut values: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = points[rng.gen_range(0..points.len())];
            }
            statistic(&buf)
        })
        .collect();
    Ok(percentile_interval(&mut values, level))
}

/// Percentile bootstrap interval of `statistic(a) − statistic(b)`.
pub fn bootstrap_diff_ci<R: Rng + ?Sized>(
    a: &[(f64, f64)],
    b: &[(f64, f64)],
    statistic: impl Fn(&[(f64, f64)]) -> f64,
    resamples: usize,
    level: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if a.len() < 2 || b.len() < 2 || resamples == 0 {
        return Err(Error::InsufficientData("bootstrap needs data".into()));
    }
    let mut ba = vec![(0.0, 0.0); a.len()];
    let mut bb = vec![(0.0, 0.0); b.len()];
    let mut values: Vec<f64> = (0..resamples)
        .map(|_| {
            for x in ba.iter_mut() {
                *x = a[rng.gen_range(0..a.len())];
            }
            for x in bb.iter_mut() {
                *x = b[rng.gen_range(0..b.len())];
            }
            statistic(&ba) - statistic(&bb)
        })
        .collect();
    Ok(percentile_interval(&mut values, level))
}

fn percentile_interval(values: &mut [f64], level: f64) -> (f64, f64) {
    values.sort_by(f64::total_cmp);
    let alpha = (1.0 - level).clamp(0.0, 1.0) / 2.0;
    let idx = |q: f64| ((q * (values.len() - 1) as f64).round() as usize).min(values.len() - 1);
    (values[idx(alpha)], values[idx(1.0 - alpha)])
}

/// σ_avg of planar points; 0 for fewer than two.
pub fn sigma_avg_of(points: &[(f64, f64)]) -> f64 {
    stats_from_points(points).map_or(0.0, |s| s.sigma_avg())
}

#[derive(Serialize, Deserialize)]
struct StatsRow {
    series: String,
    n: usize,
    mean_x: f64,
    mean_y: f64,
    sigma_x: f64,
    sigma_y: f64,
    sigma_norm: f64,
    area_sigma: f64,
}

/// Writes `series,n,mean_x,mean_y,sigma_x,sigma_y,sigma_norm,area_sigma`.
pub fn write_stats_csv<W: Write>(out: W, rows: &[(String, AccuracyStats)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (series, s) in rows {
        w.serialize(StatsRow {
            series: series.clone(),
            n: s.n,
            mean_x: s.mean_x,
            mean_y: s.mean_y,
            sigma_x: s.sigma_x,
            sigma_y: s.sigma_y,
            sigma_norm: s.sigma_norm,
            area_sigma: s.area_sigma,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_stats_csv<R: Read>(input: R) -> Result<Vec<(String, AccuracyStats)>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<StatsRow>()
        .map(|row| {
            let row = row?;
            Ok((
                row.series,
                AccuracyStats {
                    n: row.n,
                    mean_x: row.mean_x,
                    mean_y: row.mean_y,
                    sigma_x: row.sigma_x,
                    sigma_y: row.sigma_y,
                    sigma_norm: row.sigma_norm,
                    area_sigma: row.area_sigma,
                },
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_points_have_zero_spread() {
        let s = stats_from_points(&[(1.0, 2.0); 5]).unwrap();
        assert_eq!((s.sigma_x, s.sigma_y, s.sigma_norm, s.area_sigma), (0.0, 0.0, 0.0, 0.0));
        assert_eq!((s.mean_x, s.mean_y), (1.0, 2.0));
    }

    #[test]
    fn population_deviation() {
        let s = stats_from_points(&[(0.0, 0.0), (2.0, 0.0)]).unwrap();
        assert_eq!(s.sigma_x, 1.0);
        assert!(stats_from_points(&[(0.0, 0.0)]).is_err());
    }

    #[test]
    fn invalid_landings_are_ignored() {
        let l = |x: f64, valid| LandingPoint {
            x,
            y: 0.0,
            t_land: 0.0,
            valid,
        };
        let s = compute_stats(&[l(0.0, true), l(2.0, true), l(100.0, false)]).unwrap();
        assert_eq!(s.n, 2);
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            ("a".to_string(), stats_from_points(&[(0.0, 1.0), (1.0, 3.0)]).unwrap()),
            ("b".to_string(), AccuracyStats::from_sigmas(3, (1.0, 2.0), 0.5, 0.25)),
        ];
        let mut buf = Vec::new();
        write_stats_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("series,n,mean_x,mean_y,sigma_x,sigma_y,sigma_norm,area_sigma\n"));
        assert_eq!(read_stats_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn bootstrap_interval_contains_estimate() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<(f64, f64)> = (0..50)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5)))
            .collect();
        let (lo, hi) = bootstrap_ci(&pts, sigma_avg_of, 500, 0.95, &mut rng).unwrap();
        let est = sigma_avg_of(&pts);
        assert!(lo < est && est < hi);
        let (dlo, dhi) = bootstrap_diff_ci(&pts, &pts, sigma_avg_of, 500, 0.95, &mut rng).unwrap();
        assert!(dlo < 0.0 && dhi > 0.0);
    }

    proptest! {
        #[test]
        fn invariants_and_translation(
            pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..40),
            dx in -5.0f64..5.0, dy in -5.0f64..5.0
        ) {
            let s = stats_from_points(&pts).unwrap();
            prop_assert!((s.sigma_norm - (s.sigma_x.powi(2) + s.sigma_y.powi(2)).sqrt()).abs() < 1e-12);
            prop_assert!((s.area_sigma - std::f64::consts::PI * s.sigma_x * s.sigma_y).abs() < 1e-12);
            let moved: Vec<_> = pts.iter().map(|p| (p.0 + dx, p.1 + dy)).collect();
            let m = stats_from_points(&moved).unwrap();
            prop_assert!((m.sigma_x - s.sigma_x).abs() < 1e-9);
            prop_assert!((m.sigma_y - s.sigma_y).abs() < 1e-9);
            prop_assert!((m.area_sigma - s.area_sigma).abs() < 1e-9);
            prop_assert!((m.mean_x - s.mean_x - dx).abs() < 1e-9);
            prop_assert!((m.mean_y - s.mean_y - dy).abs() < 1e-9);
        }
    }
}
