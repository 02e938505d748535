use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PointConfig, PointId};
use crate::model::JumpKind;
use crate::simulate::{JumpEvent, PathSample, Trajectory};

pub const TRAJECTORY_FORMAT: &str = "bdmove-trajectory";
pub const TRAJECTORY_VERSION: u32 = 1;

/// One line of a trajectory file.
///
/// A file is a header, the initial configuration, then for each segment its
/// path samples followed by the jump closing it, and finally the
/// configuration at the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase", deny_unknown_fields)]
pub enum Record {
    Header {
        format: String,
        version: u32,
        model: String,
        horizon: f64,
        seed: u64,
        n_jumps: usize,
        n_samples: usize,
        /// Free-form provenance (command line, config file...).
        #[serde(default)]
        meta: BTreeMap<String, String>,
    },
    Initial {
        config: PointConfig,
    },
    Sample {
        segment: usize,
        time: f64,
        config: PointConfig,
    },
    Jump {
        index: usize,
        time: f64,
        kind: JumpKind,
        changed_point: PointId,
        pre_config: PointConfig,
        post_config: PointConfig,
    },
    Final {
        config: PointConfig,
    },
}

pub fn write_trajectory(tr: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    write_trajectory_with_meta(tr, &BTreeMap::new(), path)
}

pub fn write_trajectory_with_meta(tr: &Trajectory, meta: &BTreeMap<String, String>, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_trajectory_to(tr, meta, std::io::BufWriter::new(file))
}

pub fn write_trajectory_to<W: Write>(tr: &Trajectory, meta: &BTreeMap<String, String>, mut w: W) -> Result<()> {
    tr.check()?;
    let mut put = |r: &Record| -> Result<()> {
        serde_json::to_writer(&mut w, r).map_err(|e| Error::Format(e.to_string()))?;
        w.write_all(b"\n")?;
        Ok(())
    };
    put(&Record::Header {
        format: TRAJECTORY_FORMAT.into(),
        version: TRAJECTORY_VERSION,
        model: tr.model.clone(),
        horizon: tr.horizon,
        seed: tr.seed,
        n_jumps: tr.n_jumps(),
        n_samples: tr.path_sample_count(),
        meta: meta.clone(),
    })?;
    put(&Record::Initial {
        config: tr.initial_config.clone(),
    })?;
    for (j, seg) in tr.segments.iter().enumerate() {
        for s in seg {
            put(&Record::Sample {
                segment: j,
                time: s.time,
                config: s.config.clone(),
            })?;
        }
        if let Some(e) = tr.jumps.get(j) {
            put(&Record::Jump {
                index: j,
                time: e.time,
                kind: e.kind,
                changed_point: e.changed_point,
                pre_config: e.pre_config.clone(),
                post_config: e.post_config.clone(),
            })?;
        }
    }
    put(&Record::Final {
        config: tr.final_config.clone(),
    })?;
    w.flush()?;
    Ok(())
}

pub fn read_trajectory(path: impl AsRef<Path>) -> Result<Trajectory> {
    Ok(read_trajectory_with_meta(path)?.0)
}

pub fn read_trajectory_with_meta(path: impl AsRef<Path>) -> Result<(Trajectory, BTreeMap<String, String>)> {
    let path = path.as_ref();
    read_trajectory_from(std::fs::File::open(path)?, path)
}

/// Reads a trajectory; `src` only labels error messages.
pub fn read_trajectory_from<R: Read>(reader: R, src: &Path) -> Result<(Trajectory, BTreeMap<String, String>)> {
    let bad = |line: usize, message: String| Error::Parse {
        path: src.to_path_buf(),
        line,
        message,
    };
    let mut lines = BufReader::new(reader).lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| -> Result<(usize, Record)> {
        loop {
            let Some((n, line)) = lines.next() else {
                return Err(Error::Format(format!("{}: truncated file, expected {what}", src.display())));
            };
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let r: Record = serde_json::from_str(&line).map_err(|e| bad(n, e.to_string()))?;
            return Ok((n, r));
        }
    };

    let (n, header) = next("a header record")?;
    let Record::Header {
        format,
        version,
        model,
        horizon,
        seed,
        n_jumps,
        n_samples,
        meta,
    } = header
    else {
        return Err(bad(n, "first record must be the header".into()));
    };
    if format != TRAJECTORY_FORMAT {
        return Err(bad(n, format!("not a trajectory file (format `{format}`)")));
    }
    if version != TRAJECTORY_VERSION {
        return Err(bad(
            n,
            format!("incompatible trajectory format version {version}, this build reads version {TRAJECTORY_VERSION}"),
        ));
    }

    let (n, r) = next("the initial configuration")?;
    let Record::Initial { config: initial_config } = r else {
        return Err(bad(n, "second record must be the initial configuration".into()));
    };
    check_config(&initial_config).map_err(|m| bad(n, m))?;

    let mut jumps = Vec::with_capacity(n_jumps);
    let mut segments = vec![Vec::new()];
    let mut samples = 0;
    let final_config = loop {
        let (n, r) = next("more records")?;
        match r {
            Record::Sample { segment, time, config } => {
                if segment != jumps.len() {
                    return Err(bad(n, format!("sample of segment {segment} found in segment {}", jumps.len())));
                }
                check_config(&config).map_err(|m| bad(n, m))?;
                segments.last_mut().expect("segments never empty").push(PathSample { time, config });
                samples += 1;
            }
            Record::Jump {
                index,
                time,
                kind,
                changed_point,
                pre_config,
                post_config,
            } => {
                if index != jumps.len() {
                    return Err(bad(n, format!("jump {index} found where jump {} was expected", jumps.len())));
                }
                check_config(&pre_config).map_err(|m| bad(n, m))?;
                check_config(&post_config).map_err(|m| bad(n, m))?;
                jumps.push(JumpEvent {
                    time,
                    kind,
                    pre_config,
                    post_config,
                    changed_point,
                });
                segments.push(Vec::new());
            }
            Record::Final { config } => {
                check_config(&config).map_err(|m| bad(n, m))?;
                break config;
            }
            _ => return Err(bad(n, "unexpected header or initial record".into())),
        }
    };
    for (n, line) in lines {
        if !line?.trim().is_empty() {
            return Err(bad(n, "record after the final configuration".into()));
        }
    }
    if jumps.len() != n_jumps || samples != n_samples {
        return Err(Error::Format(format!(
            "{}: header announces {n_jumps} jumps and {n_samples} samples, found {} and {samples}",
            src.display(),
            jumps.len()
        )));
    }
    let tr = Trajectory {
        model,
        horizon,
        seed,
        initial_config,
        jumps,
        segments,
        final_config,
    };
    tr.check()?;
    Ok((tr, meta))
}

fn check_config(c: &PointConfig) -> std::result::Result<(), String> {
    if c.dim() == 0 || c.coords().len() != c.dim() * c.ids().len() {
        return Err("configuration has inconsistent dimension, coordinates and ids".into());
    }
    if c.coords().iter().any(|v| !v.is_finite()) {
        return Err("configuration has non-finite coordinates".into());
    }
    Ok(())
}
