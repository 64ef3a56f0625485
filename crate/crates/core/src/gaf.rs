//! Gramian Angular Field encoding and the channel × day activity image.
//!
//! A series is min-max scaled into `[-1, 1]`, mapped to polar angles
//! `phi = arccos(x)` and turned into the Gram matrix `G[j,k] = cos(phi_j + phi_k)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::features::DailySeries;

/// Values allowed this far outside `[-1, 1]` are clamped instead of rejected.
pub const DOMAIN_TOLERANCE: f64 = 1e-12;
pub const IMAGE_CHANNELS: usize = 13;
pub const IMAGE_DAYS: usize = 56;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSeries {
    pub values: Vec<f64>,
    pub source_min: f64,
    pub source_max: f64,
    /// Set when the source range was zero and every value was mapped to 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarSeries {
    pub angles: Vec<f64>,
    /// `i / N` with 1-based `i`.
    pub radii: Vec<f64>,
}

/// Square Gram matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GafMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl GafMatrix {
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.data[j * self.n + k]
    }
}

pub fn normalize(series: &[f64]) -> Result<NormalizedSeries> {
    if series.is_empty() {
        return Err(Error::Length("cannot normalize an empty series".into()));
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation("series contains non-finite values".into()));
    }
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    let max = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if range == 0.0 {
        return Ok(NormalizedSeries {
            values: alloc::vec![0.0; series.len()],
            source_min: min,
            source_max: max,
            degenerate: true,
        });
    }
    let values = series.iter().map(|x| ((x - max) + (x - min)) / range).collect();
    Ok(NormalizedSeries { values, source_min: min, source_max: max, degenerate: false })
}

pub fn to_polar(series: &NormalizedSeries) -> Result<PolarSeries> {
    let n = series.values.len();
    let mut angles = Vec::with_capacity(n);
    for (i, &x) in series.values.iter().enumerate() {
        if !(-1.0 - DOMAIN_TOLERANCE..=1.0 + DOMAIN_TOLERANCE).contains(&x) {
            return Err(Error::Domain(format!("value {x} at position {i} lies outside [-1, 1]")));
        }
        angles.push(libm::acos(x.clamp(-1.0, 1.0)));
    }
    let radii = (1..=n).map(|i| i as f64 / n as f64).collect();
    Ok(PolarSeries { angles, radii })
}

pub fn gram_matrix(polar: &PolarSeries) -> GafMatrix {
    let n = polar.angles.len();
    let mut data = alloc::vec![0.0; n * n];
    for j in 0..n {
        for k in j..n {
            let v = libm::cos(polar.angles[j] + polar.angles[k]);
            data[j * n + k] = v;
            data[k * n + j] = v;
        }
    }
    GafMatrix { n, data }
}

pub fn gaf_encode(series: &[f64]) -> Result<GafMatrix> {
    Ok(gram_matrix(&to_polar(&normalize(series)?)?))
}

/// Channel-per-row, day-per-column image with each row scaled to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityImage {
    pub rows: usize,
    pub cols: usize,
    pub channels: Vec<String>,
    pub data: Vec<f64>,
    pub diagnostics: Vec<String>,
}

/// Stacks the selected daily channels into a `channels.len() × days` image
/// using the most recent `days` days. Shorter windows are left-padded with
/// zeros.
pub fn stack_image(series: &DailySeries, channels: &[String], days: usize) -> Result<ActivityImage> {
    if channels.len() != IMAGE_CHANNELS {
        return Err(Error::Config(format!(
            "activity image needs exactly {IMAGE_CHANNELS} channels, got {}",
            channels.len()
        )));
    }
    let mut diagnostics = Vec::new();
    let n = series.n_days();
    if n < days {
        diagnostics.push(format!("window has {n} days; padded {} leading zero days", days - n));
    }
    let mut data = Vec::with_capacity(channels.len() * days);
    for name in channels {
        let values = series.channel(name).ok_or_else(|| Error::Config(format!("unknown daily channel {name:?}")))?;
        let mut row = alloc::vec![0.0; days.saturating_sub(n)];
        row.extend_from_slice(&values[n.saturating_sub(days)..]);
        data.extend(normalize(&row)?.values);
    }
    Ok(ActivityImage { rows: channels.len(), cols: days, channels: channels.to_vec(), data, diagnostics })
}

/// The `IMAGE_CHANNELS` daily channels with the highest pooled variance over
/// all given series. Ties break by channel name.
pub fn highest_variance_channels(series: &[DailySeries]) -> Vec<String> {
    let mut acc: BTreeMap<&str, (f64, f64, f64)> = BTreeMap::new();
    for s in series {
        for (name, values) in s.channels.iter().zip(&s.values) {
            let e = acc.entry(name.as_str()).or_insert((0.0, 0.0, 0.0));
            for v in values {
                e.0 += 1.0;
                e.1 += v;
                e.2 += v * v;
            }
        }
    }
    let mut ranked: Vec<(&str, f64)> = acc
        .into_iter()
        .map(|(name, (n, s, ss))| (name, if n > 0.0 { ss / n - (s / n) * (s / n) } else { 0.0 }))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
    ranked.into_iter().take(IMAGE_CHANNELS).map(|(n, _)| String::from(n)).collect()
}
