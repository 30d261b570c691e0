//! Event catalogs: ingestion, filtering, tie smoothing and ordered samples.

use std::collections::{HashMap, HashSet};
use std::io::Read;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Default half width of the uniform jitter applied to tied magnitudes.
pub const DEFAULT_TIE_HALF_WIDTH: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeismicEvent {
    pub timestamp: NaiveDateTime,
    pub latitude: f64,
    pub longitude: f64,
    pub depth: Option<f64>,
    pub magnitude: f64,
    pub label: Option<String>,
}

impl SeismicEvent {
    pub fn new(timestamp: NaiveDateTime, latitude: f64, longitude: f64, magnitude: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(Error::domain(format!("latitude {latitude} outside [-90, 90]")));
        }
        if !(-180.0..=180.0).contains(&longitude) {
            return Err(Error::domain(format!("longitude {longitude} outside [-180, 180]")));
        }
        if !magnitude.is_finite() {
            return Err(Error::domain("magnitude must be finite"));
        }
        Ok(Self {
            timestamp,
            latitude,
            longitude,
            depth: None,
            magnitude,
            label: None,
        })
    }
}

pub type Catalog = Vec<SeismicEvent>;

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Maps header names of a delimiter-separated file onto event fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnSchema {
    pub date: String,
    /// Separate time-of-day column, if the date column carries only the day.
    pub time: Option<String>,
    /// chrono format string for the date column; ISO-8601 and common
    /// day-month-year layouts are tried when absent.
    pub date_format: Option<String>,
    pub latitude: String,
    pub longitude: String,
    pub magnitude: String,
    pub depth: Option<String>,
    pub label: Option<String>,
}

impl ColumnSchema {
    /// Minimal `date,lat,lon,mag` layout.
    pub fn simple() -> Self {
        Self {
            date: "date".into(),
            time: None,
            date_format: None,
            latitude: "lat".into(),
            longitude: "lon".into(),
            magnitude: "mag".into(),
            depth: None,
            label: None,
        }
    }

    /// Layout of the KNMI induced-seismicity catalog export.
    pub fn knmi() -> Self {
        Self {
            date: "YYMMDD".into(),
            time: Some("TIME".into()),
            date_format: Some("%Y%m%d".into()),
            latitude: "LAT".into(),
            longitude: "LON".into(),
            magnitude: "MAG".into(),
            depth: Some("DEPTH".into()),
            label: Some("LOCATION".into()),
        }
    }

    /// Resolve a preset name (`simple`, `knmi`) or an explicit mapping of the
    /// form `date=COL,lat=COL,lon=COL,mag=COL[,time=COL][,depth=COL][,label=COL][,date_format=FMT]`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        match spec.trim() {
            "simple" => return Ok(Self::simple()),
            "knmi" => return Ok(Self::knmi()),
            _ => {}
        }
        let mut schema = Self::simple();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Schema(format!("expected key=column, got `{part}`")))?;
            let value = value.trim().to_string();
            match key.trim() {
                "date" => schema.date = value,
                "time" => schema.time = Some(value),
                "date_format" => schema.date_format = Some(value),
                "lat" | "latitude" => schema.latitude = value,
                "lon" | "longitude" => schema.longitude = value,
                "mag" | "magnitude" => schema.magnitude = value,
                "depth" => schema.depth = Some(value),
                "label" => schema.label = Some(value),
                other => return Err(Error::Schema(format!("unknown schema key `{other}`"))),
            }
        }
        Ok(schema)
    }
}

fn detect_delimiter(text: &str) -> u8 {
    let header = text.lines().next().unwrap_or("");
    if header.matches(';').count() > header.matches(',').count() {
        b';'
    } else {
        b','
    }
}

const DATETIME_FORMATS: &[&str] = &[
    "%Y-%m-%dT%H:%M:%S%.f",
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%dT%H:%M:%SZ",
    "%Y-%m-%dT%H:%M",
    "%d-%m-%Y %H:%M:%S%.f",
    "%d/%m/%Y %H:%M:%S%.f",
];
const DATE_FORMATS: &[&str] = &["%Y-%m-%d", "%d-%m-%Y", "%d/%m/%Y", "%Y%m%d"];
const TIME_FORMATS: &[&str] = &["%H:%M:%S%.f", "%H:%M:%S", "%H:%M", "%H%M%S%.f"];

fn parse_date_time(date: &str, time: Option<&str>, format: Option<&str>) -> Option<NaiveDateTime> {
    let date = date.trim();
    let base = if let Some(fmt) = format {
        NaiveDateTime::parse_from_str(date, fmt).ok().or_else(|| {
            NaiveDate::parse_from_str(date, fmt)
                .ok()
                .map(|d| d.and_time(NaiveTime::MIN))
        })?
    } else {
        DATETIME_FORMATS
            .iter()
            .find_map(|f| NaiveDateTime::parse_from_str(date, f).ok())
            .or_else(|| {
                DATE_FORMATS
                    .iter()
                    .find_map(|f| NaiveDate::parse_from_str(date, f).ok())
                    .map(|d| d.and_time(NaiveTime::MIN))
            })?
    };
    match time.map(str::trim).filter(|t| !t.is_empty()) {
        None => Some(base),
        Some(t) => {
            let tod = TIME_FORMATS.iter().find_map(|f| NaiveTime::parse_from_str(t, f).ok())?;
            Some(base.date().and_time(tod))
        }
    }
}

/// Parse a delimiter-separated catalog (comma or semicolon, detected from the
/// header row). Events are returned in file order.
///
/// Errors name the 1-based line number of the offending row.
pub fn parse_catalog<R: Read>(mut source: R, schema: &ColumnSchema) -> Result<Catalog> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let delimiter = detect_delimiter(&text);
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());

    let headers = reader.headers()?.clone();
    let index_of = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim_end_matches('.') == name.trim_end_matches('.'))
            .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))
    };
    let optional = |name: &Option<String>| -> Result<Option<usize>> { name.as_deref().map(index_of).transpose() };

    let date_idx = index_of(&schema.date)?;
    let lat_idx = index_of(&schema.latitude)?;
    let lon_idx = index_of(&schema.longitude)?;
    let mag_idx = index_of(&schema.magnitude)?;
    let time_idx = optional(&schema.time)?;
    let depth_idx = optional(&schema.depth)?;
    let label_idx = optional(&schema.label)?;

    let mut events = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let field = |idx: usize, what: &str| -> Result<&str> {
            record.get(idx).ok_or_else(|| Error::Row {
                line,
                message: format!("missing {what} field"),
            })
        };
        let number = |idx: usize, what: &str| -> Result<f64> {
            let raw = field(idx, what)?;
            raw.parse::<f64>().map_err(|_| Error::Row {
                line,
                message: format!("bad {what} `{raw}`"),
            })
        };

        let date_raw = field(date_idx, "date")?;
        let time_raw = time_idx.map(|i| field(i, "time")).transpose()?;
        let timestamp =
            parse_date_time(date_raw, time_raw, schema.date_format.as_deref()).ok_or_else(|| Error::Row {
                line,
                message: format!("bad date `{date_raw}`"),
            })?;
        let mut event = SeismicEvent::new(
            timestamp,
            number(lat_idx, "latitude")?,
            number(lon_idx, "longitude")?,
            number(mag_idx, "magnitude")?,
        )
        .map_err(|e| Error::Row {
            line,
            message: e.to_string(),
        })?;
        if let Some(i) = depth_idx {
            let raw = field(i, "depth")?;
            if !raw.is_empty() {
                event.depth = Some(number(i, "depth")?);
            }
        }
        if let Some(i) = label_idx {
            event.label = Some(field(i, "label")?.to_string()).filter(|s| !s.is_empty());
        }
        events.push(event);
    }
    Ok(events)
}

// ---------------------------------------------------------------------------
// Filtering
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundingBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl BoundingBox {
    /// Any two opposite corners.
    pub fn from_corners(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> Result<Self> {
        let b = Self {
            lat_min: lat1.min(lat2),
            lat_max: lat1.max(lat2),
            lon_min: lon1.min(lon2),
            lon_max: lon1.max(lon2),
        };
        if b.lat_min >= b.lat_max || b.lon_min >= b.lon_max {
            return Err(Error::invalid("bounding box must have positive extent"));
        }
        Ok(b)
    }

    /// Rectangle 53.1-53.5 N, 6.5-7.0 E around the Groningen gas field.
    pub fn groningen() -> Self {
        Self {
            lat_min: 53.1,
            lat_max: 53.5,
            lon_min: 6.5,
            lon_max: 7.0,
        }
    }

    /// Closed-interval containment.
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.lat_min..=self.lat_max).contains(&lat) && (self.lon_min..=self.lon_max).contains(&lon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogFilter {
    pub bbox: BoundingBox,
    pub magnitude_min: f64,
    /// Inclusive range.
    pub date_range: Option<(NaiveDateTime, NaiveDateTime)>,
}

impl CatalogFilter {
    pub fn new(bbox: BoundingBox, magnitude_min: f64) -> Self {
        Self {
            bbox,
            magnitude_min,
            date_range: None,
        }
    }

    pub fn with_date_range(mut self, start: NaiveDateTime, end: NaiveDateTime) -> Result<Self> {
        if start > end {
            return Err(Error::invalid("date range start after end"));
        }
        self.date_range = Some((start, end));
        Ok(self)
    }

    pub fn accepts(&self, event: &SeismicEvent) -> bool {
        self.bbox.contains(event.latitude, event.longitude)
            && event.magnitude >= self.magnitude_min
            && self
                .date_range
                .is_none_or(|(start, end)| (start..=end).contains(&event.timestamp))
    }
}

/// Parse `START..END` or `START,END` (dates or date-times). A bare end date
/// covers the whole day.
pub fn parse_date_range(text: &str) -> Result<(NaiveDateTime, NaiveDateTime)> {
    let (a, b) = text
        .split_once("..")
        .or_else(|| text.split_once(','))
        .ok_or_else(|| Error::invalid(format!("date range `{text}` must be START..END")))?;
    let start = parse_date_time(a, None, None).ok_or_else(|| Error::invalid(format!("bad date `{a}`")))?;
    let end = parse_date_time(b, None, None).ok_or_else(|| Error::invalid(format!("bad date `{b}`")))?;
    let end = if end.time() == NaiveTime::MIN && !b.contains(':') {
        end.date().and_hms_opt(23, 59, 59).unwrap_or(end)
    } else {
        end
    };
    if start > end {
        return Err(Error::invalid("date range start after end"));
    }
    Ok((start, end))
}

pub fn filter_events(catalog: &[SeismicEvent], filter: &CatalogFilter) -> Catalog {
    catalog.iter().filter(|e| filter.accepts(e)).cloned().collect()
}

// ---------------------------------------------------------------------------
// Tie smoothing and samples
// ---------------------------------------------------------------------------

fn value_key(x: f64) -> u64 {
    // -0.0 and 0.0 are the same recorded magnitude.
    (x + 0.0).to_bits()
}

/// Jitter every magnitude that occurs more than once by an independent
/// Uniform(-half_width, half_width) draw. Singletons are returned unchanged,
/// output order follows input order, and the output has no duplicates.
pub fn smooth_ties(magnitudes: &[f64], half_width: f64, seed: u64) -> Result<Vec<f64>> {
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::invalid("tie half width must be positive"));
    }
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for &m in magnitudes {
        *counts.entry(value_key(m)).or_default() += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken: HashSet<u64> = magnitudes
        .iter()
        .filter(|&&m| counts[&value_key(m)] == 1)
        .map(|&m| value_key(m))
        .collect();

    let mut out = Vec::with_capacity(magnitudes.len());
    for &m in magnitudes {
        if counts[&value_key(m)] == 1 {
            out.push(m);
            continue;
        }
        loop {
            let candidate = m + rng.random_range(-half_width..half_width);
            if taken.insert(value_key(candidate)) {
                out.push(candidate);
                break;
            }
        }
    }
    Ok(out)
}

/// Completeness-filtered, strictly ascending magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MagnitudeSample {
    values: Vec<f64>,
    t_m: f64,
    smoothing_seed: Option<u64>,
}

impl MagnitudeSample {
    /// Sort `values` and validate the sample invariants: non-empty, finite,
    /// strictly ascending after sorting, and every value at least `t_m`.
    pub fn new(mut values: Vec<f64>, t_m: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample(format!("no magnitudes at or above {t_m}")));
        }
        if !t_m.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("magnitudes and threshold must be finite"));
        }
        values.sort_by(f64::total_cmp);
        if values[0] < t_m {
            return Err(Error::domain(format!("value {} below threshold {t_m}", values[0])));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("sample contains tied values; smooth ties first"));
        }
        Ok(Self {
            values,
            t_m,
            smoothing_seed: None,
        })
    }

    /// Ascending order statistics `M_{1,n} <= ... <= M_{n,n}`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn t_m(&self) -> f64 {
        self.t_m
    }

    pub fn smoothing_seed(&self) -> Option<u64> {
        self.smoothing_seed
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `M_{n-i,n}`: `from_top(0)` is the maximum, `from_top(k)` the
    /// `(k+1)`-th largest value.
    pub fn from_top(&self, i: usize) -> f64 {
        self.values[self.values.len() - 1 - i]
    }

    pub fn mean(&self) -> f64 {
        crate::numeric::neumaier_sum(self.values.iter().copied()) / self.n() as f64
    }

    /// The same sample shifted by `c`, threshold included.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v + c).collect(), self.t_m + c)
    }

    /// Energies `E_{i,n}` in ascending order.
    pub fn energies(&self) -> Vec<f64> {
        self.values.iter().map(|&m| magnitude_to_energy(m)).collect()
    }
}

/// Smooth ties, drop values below `t_m` and order the rest.
pub fn build_sample(catalog: &[SeismicEvent], t_m: f64, half_width: f64, seed: u64) -> Result<MagnitudeSample> {
    if catalog.is_empty() {
        return Err(Error::EmptySample("catalog is empty".into()));
    }
    // tied values are interchangeable, so sorting first makes the jitter
    // independent of the row order of the catalog
    let mut raw: Vec<f64> = catalog.iter().map(|e| e.magnitude).collect();
    raw.sort_by(f64::total_cmp);
    let smoothed = smooth_ties(&raw, half_width, seed)?;
    let kept: Vec<f64> = smoothed.into_iter().filter(|&m| m >= t_m).collect();
    let mut sample = MagnitudeSample::new(kept, t_m)?;
    sample.smoothing_seed = Some(seed);
    Ok(sample)
}

// ---------------------------------------------------------------------------
// Magnitude and energy
// ---------------------------------------------------------------------------

/// Released energy in megajoules, `E = 2 * 10^(1.5 (M - 1))`.
pub fn magnitude_to_energy(m: f64) -> f64 {
    2.0 * 10f64.powf(1.5 * (m - 1.0))
}

/// Local magnitude for an energy in megajoules; inverse of [`magnitude_to_energy`].
pub fn energy_to_magnitude(e: f64) -> Result<f64> {
    if !(e > 0.0) {
        return Err(Error::domain(format!("energy must be positive, got {e}")));
    }
    Ok((e / 2.0).log10() / 1.5 + 1.0)
}
