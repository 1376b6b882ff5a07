use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::LauncherState;
use crate::Vec3;

/// One tracked ball position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "SampleRecord", into = "SampleRecord")]
pub struct BallSample {
    /// s
    pub t: f64,
    /// m, table frame
    pub position: Vec3,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleRecord {
    t: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl From<SampleRecord> for BallSample {
    fn from(r: SampleRecord) -> Self {
        BallSample::new(r.t, Vec3::new(r.x, r.y, r.z))
    }
}

impl From<BallSample> for SampleRecord {
    fn from(s: BallSample) -> Self {
        SampleRecord {
            t: s.t,
            x: s.position.x,
            y: s.position.y,
            z: s.position.z,
        }
    }
}

impl BallSample {
    pub fn new(t: f64, position: Vec3) -> Self {
        Self { t, position }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.position.iter().all(|c| c.is_finite())
    }
}

/// Time-ordered ball samples of one launch plus the controls that produced
/// them.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: String,
    samples: Vec<BallSample>,
    pub control: Option<LauncherState>,
    /// Launcher pivot distance before the table edge (m).
    pub distance_m: f64,
}

#[derive(Serialize, Deserialize)]
struct Header {
    id: String,
    #[serde(default)]
    launcher_state: Option<LauncherState>,
    #[serde(default = "default_distance")]
    distance_m: f64,
}

fn default_distance() -> f64 {
    0.8
}

impl Trajectory {
    /// Checks that samples are finite and strictly increasing in time.
    pub fn new(
        id: impl Into<String>,
        samples: Vec<BallSample>,
        control: Option<LauncherState>,
        distance_m: f64,
    ) -> Result<Self> {
        let id = id.into();
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidTrajectory(format!(
                "{id}: sample {i} is not finite"
            )));
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(Error::InvalidTrajectory(format!(
                "{id}: time not strictly increasing at sample {}",
                i + 1
            )));
        }
        Ok(Self {
            id,
            samples,
            control,
            distance_m,
        })
    }

    pub fn samples(&self) -> &[BallSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Same trajectory with a subset of its samples (order is preserved, so
    /// the time invariant still holds).
    pub fn with_samples_where(&self, mut keep: impl FnMut(usize, &BallSample) -> bool) -> Self {
        Self {
            id: self.id.clone(),
            samples: self
                .samples
                .iter()
                .enumerate()
                .filter(|(i, s)| keep(*i, s))
                .map(|(_, s)| *s)
                .collect(),
            control: self.control,
            distance_m: self.distance_m,
        }
    }

    /// Shifts every sample by `offset`.
    pub fn translated(&self, offset: Vec3) -> Self {
        let mut t = self.clone();
        for s in &mut t.samples {
            s.position += offset;
        }
        t
    }

    /// Writes the header line and one record per sample.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        let header = Header {
            id: self.id.clone(),
            launcher_state: self.control,
            distance_m: self.distance_m,
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        for s in &self.samples {
            serde_json::to_writer(&mut out, s)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save_jsonl(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_jsonl(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Reads a `t,x,y,z` CSV with header.
    pub fn read_csv<R: std::io::Read>(
        reader: R,
        id: impl Into<String>,
        distance_m: f64,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let samples = rdr
            .deserialize::<SampleRecord>()
            .map(|r| r.map(BallSample::from).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        Self::new(id, samples, None, distance_m)
    }
}

/// Reads a JSON-lines archive: every header line starts a trajectory and is
/// followed by its sample records.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<Trajectory>> {
    let mut out = Vec::new();
    let mut current: Option<(Header, Vec<BallSample>)> = None;
    let finish = |cur: Option<(Header, Vec<BallSample>)>, out: &mut Vec<Trajectory>| {
        if let Some((h, s)) = cur {
            out.push(Trajectory::new(h.id, s, h.launcher_state, h.distance_m)?);
        }
        Ok::<_, Error>(())
    };
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        if value.get("id").is_some() {
            finish(current.take(), &mut out)?;
            let h: Header = serde_json::from_value(value)
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            current = Some((h, Vec::new()));
        } else {
            let s: BallSample = serde_json::from_value(value)
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            match &mut current {
                Some((_, samples)) => samples.push(s),
                None => {
                    return Err(Error::Parse(format!(
                        "line {}: sample before any header",
                        lineno + 1
                    )))
                }
            }
        }
    }
    finish(current, &mut out)?;
    Ok(out)
}

/// Loads trajectories from a `.jsonl`/`.json` archive or a `.csv` file.
pub fn load_trajectories(path: &Path) -> Result<Vec<Trajectory>> {
    let file = std::fs::File::open(path)?;
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    if ext == "csv" {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(vec![Trajectory::read_csv(file, id, default_distance())?])
    } else {
        read_jsonl(std::io::BufReader::new(file))
    }
}

/// Loads every trajectory file in a directory, in file-name order.
pub fn load_dir(dir: &Path) -> Result<Vec<Trajectory>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("jsonl") | Some("csv")
            )
        })
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        out.extend(load_trajectories(&p)?);
    }
    Ok(out)
}
