//! Application-aware task analyzer: the per-scenario table mapping a
//! compression level to expected classification accuracy and payload size.
//!
//! Level 1 is the highest quality (largest payload); level 100 is the most
//! aggressive compression. Tables are kept exactly as measured: accuracy is
//! not forced to be monotone, and inverse queries scan every level.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::keyed_uniform;

pub const MIN_LEVEL: u8 = 1;
pub const MAX_LEVEL: u8 = 100;
pub const LEVEL_COUNT: usize = MAX_LEVEL as usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct Level(u8);

impl Level {
    pub const BEST: Level = Level(MIN_LEVEL);
    pub const MEDIUM: Level = Level(50);
    pub const LOWEST: Level = Level(MAX_LEVEL);

    pub fn new(l: i64) -> Result<Self> {
        if (MIN_LEVEL as i64..=MAX_LEVEL as i64).contains(&l) {
            Ok(Level(l as u8))
        } else {
            Err(Error::LevelOutOfRange(l))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn all() -> impl DoubleEndedIterator<Item = Level> {
        (MIN_LEVEL..=MAX_LEVEL).map(Level)
    }

    fn index(self) -> usize {
        (self.0 - MIN_LEVEL) as usize
    }
}

impl TryFrom<i64> for Level {
    type Error = Error;
    fn try_from(v: i64) -> Result<Self> {
        Level::new(v)
    }
}

impl From<Level> for u8 {
    fn from(l: Level) -> u8 {
        l.0
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Expected accuracy in `[0, 1]` and mean payload size in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quality {
    pub accuracy: f64,
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityProfile {
    table: BTreeMap<String, Vec<Quality>>,
}

impl QualityProfile {
    /// Builds a profile from complete per-scenario tables (100 entries each,
    /// level 1 first).
    pub fn from_tables(tables: BTreeMap<String, Vec<Quality>>) -> Result<Self> {
        for (s, rows) in &tables {
            if rows.len() != LEVEL_COUNT {
                return Err(Error::InvalidProfile(format!(
                    "scenario `{s}` has {} levels, expected {LEVEL_COUNT}",
                    rows.len()
                )));
            }
            for (i, q) in rows.iter().enumerate() {
                check_quality(q).map_err(|m| {
                    Error::InvalidProfile(format!("scenario `{s}` level {}: {m}", i + 1))
                })?;
            }
            if rows[LEVEL_COUNT - 1].size > rows[0].size {
                return Err(Error::InvalidProfile(format!(
                    "scenario `{s}`: size at level 100 exceeds size at level 1"
                )));
            }
        }
        Ok(Self { table: tables })
    }

    pub fn scenarios(&self) -> impl Iterator<Item = &str> {
        self.table.keys().map(String::as_str)
    }

    pub fn has_scenario(&self, s: &str) -> bool {
        self.table.contains_key(s)
    }

    fn rows(&self, s: &str) -> Result<&[Quality]> {
        self.table
            .get(s)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }

    pub fn query(&self, s: &str, l: Level) -> Result<Quality> {
        Ok(self.rows(s)?[l.index()])
    }

    /// `query` with a raw integer level.
    pub fn query_raw(&self, s: &str, l: i64) -> Result<Quality> {
        self.query(s, Level::new(l)?)
    }

    /// Highest-quality entry of a scenario.
    pub fn best(&self, s: &str) -> Result<Quality> {
        self.query(s, Level::BEST)
    }

    /// Highest accuracy reachable at any level.
    pub fn peak_accuracy(&self, s: &str) -> Result<f64> {
        Ok(self.rows(s)?.iter().map(|q| q.accuracy).fold(0.0, f64::max))
    }

    /// Among levels accepted by `fits`, the most accurate one; ties go to the
    /// lower level.
    pub fn max_accuracy_level_where(
        &self,
        s: &str,
        mut fits: impl FnMut(Quality) -> bool,
    ) -> Result<Option<Level>> {
        let rows = self.rows(s)?;
        let mut best: Option<(Level, f64)> = None;
        for l in Level::all() {
            let q = rows[l.index()];
            if fits(q) && best.is_none_or(|(_, a)| q.accuracy > a) {
                best = Some((l, q.accuracy));
            }
        }
        Ok(best.map(|(l, _)| l))
    }

    /// Most accurate level whose payload fits in `budget` bytes.
    pub fn max_level_within_size(&self, s: &str, budget: f64) -> Result<Option<Level>> {
        self.max_accuracy_level_where(s, |q| q.size <= budget)
    }

    /// Levels not dominated in (higher accuracy, smaller size), one level per
    /// distinct pair, ordered by decreasing accuracy.
    pub fn pareto_levels(&self, s: &str) -> Result<Vec<Level>> {
        let rows = self.rows(s)?;
        let mut levels: Vec<Level> = Level::all().collect();
        levels.sort_by(|a, b| {
            let (qa, qb) = (rows[a.index()], rows[b.index()]);
            qb.accuracy
                .total_cmp(&qa.accuracy)
                .then(qa.size.total_cmp(&qb.size))
                .then(a.cmp(b))
        });
        let mut out = Vec::new();
        let mut smallest = f64::INFINITY;
        for l in levels {
            let q = rows[l.index()];
            if q.size < smallest {
                smallest = q.size;
                out.push(l);
            }
        }
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(file)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["scenario", "level", "accuracy", "size_bytes"])?;
        for (s, rows) in &self.table {
            for (i, q) in rows.iter().enumerate() {
                out.write_record([
                    s.clone(),
                    (i + 1).to_string(),
                    q.accuracy.to_string(),
                    q.size.to_string(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(file)
    }

    /// Reads a profile CSV. Lines starting with `#` are comments. Levels may
    /// be sparse; missing ones are filled by linear interpolation between the
    /// nearest measured levels.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            scenario: String,
            level: i64,
            accuracy: f64,
            size_bytes: f64,
        }
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(r);
        let headers = reader.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["scenario", "level", "accuracy", "size_bytes"] {
            return Err(Error::ProfileParse {
                line: 1,
                message: format!("unexpected header {:?}", headers),
            });
        }
        let mut measured: BTreeMap<String, BTreeMap<Level, Quality>> = BTreeMap::new();
        for rec in reader.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let parse_err = |message: String| Error::ProfileParse { line, message };
            let row: Row = rec
                .deserialize(Some(&headers))
                .map_err(|e| parse_err(e.to_string()))?;
            let level = Level::new(row.level).map_err(|e| parse_err(e.to_string()))?;
            let q = Quality {
                accuracy: row.accuracy,
                size: row.size_bytes,
            };
            check_quality(&q).map_err(parse_err)?;
            if measured
                .entry(row.scenario.clone())
                .or_default()
                .insert(level, q)
                .is_some()
            {
                return Err(parse_err(format!(
                    "duplicate row for scenario `{}` level {}",
                    row.scenario, level
                )));
            }
        }
        let tables = measured
            .into_iter()
            .map(|(s, m)| (s, fill_levels(&m)))
            .collect();
        Self::from_tables(tables)
    }
}

fn check_quality(q: &Quality) -> std::result::Result<(), String> {
    if !(0.0..=1.0).contains(&q.accuracy) {
        return Err(format!("accuracy {} outside [0, 1]", q.accuracy));
    }
    if !(q.size > 0.0 && q.size.is_finite()) {
        return Err(format!("size {} must be positive", q.size));
    }
    Ok(())
}

/// Completes a sparse level table: linear interpolation between the two
/// nearest measured levels, constant extrapolation beyond the ends.
pub fn fill_levels(measured: &BTreeMap<Level, Quality>) -> Vec<Quality> {
    assert!(!measured.is_empty());
    Level::all()
        .map(|l| {
            if let Some(q) = measured.get(&l) {
                return *q;
            }
            let below = measured.range(..l).next_back();
            let above = measured.range(l..).next();
            match (below, above) {
                (Some((&lo, qlo)), Some((&hi, qhi))) => {
                    let t = (l.get() - lo.get()) as f64 / (hi.get() - lo.get()) as f64;
                    Quality {
                        accuracy: qlo.accuracy + (qhi.accuracy - qlo.accuracy) * t,
                        size: qlo.size + (qhi.size - qlo.size) * t,
                    }
                }
                (Some((_, q)), None) | (None, Some((_, q))) => *q,
                (None, None) => unreachable!(),
            }
        })
        .collect()
}

/// Codec and classifier hooks used when profiling a dataset.
pub trait SamplePredicate {
    type Sample;
    type Label: PartialEq;

    /// Compressed payload of `sample` at `level`; deterministic.
    fn compress(&self, sample: &Self::Sample, level: Level) -> Vec<u8>;

    fn classify(&self, payload: &[u8]) -> Self::Label;
}

#[derive(Debug, Clone)]
pub struct LabeledSample<S, L> {
    pub sample: S,
    pub label: L,
    pub scenario: String,
}

/// Samples grouped under a declared set of scenario labels.
#[derive(Debug, Clone)]
pub struct ProfilingSet<S, L> {
    pub scenarios: Vec<String>,
    pub samples: Vec<LabeledSample<S, L>>,
}

/// Measures accuracy and mean payload size for every scenario at each of
/// `levels`, then interpolates the remaining levels.
pub fn build_profile<H: SamplePredicate>(
    data: &ProfilingSet<H::Sample, H::Label>,
    hooks: &H,
    levels: &[Level],
) -> Result<QualityProfile> {
    if data.samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if levels.is_empty() {
        return Err(Error::InvalidParameter("no levels to measure".into()));
    }
    let levels: BTreeSet<Level> = levels.iter().copied().collect();
    let mut tables = BTreeMap::new();
    for scenario in &data.scenarios {
        let samples: Vec<_> = data
            .samples
            .iter()
            .filter(|s| &s.scenario == scenario)
            .collect();
        if samples.is_empty() {
            return Err(Error::EmptyScenario(scenario.clone()));
        }
        let mut measured = BTreeMap::new();
        for &l in &levels {
            let mut correct = 0usize;
            let mut bytes = 0.0;
            for s in &samples {
                let payload = hooks.compress(&s.sample, l);
                bytes += payload.len() as f64;
                if hooks.classify(&payload) == s.label {
                    correct += 1;
                }
            }
            let n = samples.len() as f64;
            measured.insert(
                l,
                Quality {
                    accuracy: correct as f64 / n,
                    size: bytes / n,
                },
            );
        }
        tables.insert(scenario.clone(), fill_levels(&measured));
    }
    QualityProfile::from_tables(tables)
}

/// Stand-in sample for [`TableHook`]: only an id and its true label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSample {
    pub id: u64,
    pub label: u32,
}

/// Table-backed hooks: payload length follows the profile's size and the
/// classifier is right with the profile's accuracy, decided by a keyed draw
/// on (sample, level). Real JPEG/DNN hooks implement [`SamplePredicate`]
/// the same way.
#[derive(Debug, Clone)]
pub struct TableHook {
    pub profile: QualityProfile,
    pub scenario: String,
    pub seed: u64,
}

impl SamplePredicate for TableHook {
    type Sample = SyntheticSample;
    type Label = u32;

    fn compress(&self, sample: &SyntheticSample, level: Level) -> Vec<u8> {
        let q = self
            .profile
            .query(&self.scenario, level)
            .expect("TableHook scenario must exist in its profile");
        let len = (q.size.round() as usize).max(13);
        let mut payload = vec![0u8; len];
        payload[..8].copy_from_slice(&sample.id.to_le_bytes());
        payload[8..12].copy_from_slice(&sample.label.to_le_bytes());
        payload[12] = level.get();
        payload
    }

    fn classify(&self, payload: &[u8]) -> u32 {
        let id = u64::from_le_bytes(payload[..8].try_into().unwrap());
        let label = u32::from_le_bytes(payload[8..12].try_into().unwrap());
        let level = Level(payload[12]);
        let acc = self.profile.query(&self.scenario, level).unwrap().accuracy;
        if keyed_uniform(self.seed, &[id, level.get() as u64]) < acc {
            label
        } else {
            label.wrapping_add(1)
        }
    }
}

const FIXTURE_CSV: &str = include_str!("../../../data/profiles/fixture.csv");

/// The shipped six-scenario profile (Maritime, SaR, Wildlife, Tools, Pets,
/// Urban).
pub fn fixture_profile() -> QualityProfile {
    QualityProfile::read_csv(FIXTURE_CSV.as_bytes()).expect("shipped fixture profile parses")
}
