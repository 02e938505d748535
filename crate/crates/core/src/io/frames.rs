use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{PointConfig, PointId};
use crate::simulate::FrameSequence;

/// How frame files are interpreted.
#[derive(Debug, Clone, PartialEq)]
pub struct FramesOptions {
    /// Time step used when the file has no `time` column.
    pub frame_dt: f64,
}

impl Default for FramesOptions {
    fn default() -> Self {
        FramesOptions { frame_dt: 1.0 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Columns {
    frame: usize,
    time: Option<usize>,
    track: Option<usize>,
    x: usize,
    y: usize,
}

impl Columns {
    fn locate(headers: &csv::StringRecord, src: &Path) -> Result<Self> {
        let find = |name: &str| headers.iter().position(|h| h.trim() == name);
        let need = |name: &str| {
            find(name).ok_or_else(|| Error::Parse {
                path: src.to_path_buf(),
                line: 1,
                message: format!("missing column `{name}` (expected frame[,time][,track_id],x,y)"),
            })
        };
        let known = ["frame", "time", "track_id", "x", "y"];
        if let Some(h) = headers.iter().find(|h| !known.contains(&h.trim())) {
            return Err(Error::Parse {
                path: src.to_path_buf(),
                line: 1,
                message: format!("unknown column `{h}`"),
            });
        }
        Ok(Columns {
            frame: need("frame")?,
            time: find("time"),
            track: find("track_id"),
            x: need("x")?,
            y: need("y")?,
        })
    }
}

struct Frame {
    time: Option<f64>,
    config: PointConfig,
    seen: HashSet<PointId>,
}

/// Reads a frames file: one row per detection with columns
/// `frame, [time], [track_id], x, y`.
///
/// Frame indices must be contiguous from 0 and appear in nondecreasing
/// order. A row with blank `x` and `y` declares a frame without detections.
/// Without a `time` column frame `k` is observed at `k * frame_dt`; without
/// a `track_id` column the sequence is untracked.
pub fn read_frames(path: impl AsRef<Path>, opts: &FramesOptions) -> Result<FrameSequence> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_frames_from(file, path, opts)
}

/// [`read_frames`] from any reader; `src` only labels error messages.
pub fn read_frames_from<R: Read>(reader: R, src: &Path, opts: &FramesOptions) -> Result<FrameSequence> {
    if !(opts.frame_dt > 0.0 && opts.frame_dt.is_finite()) {
        return Err(Error::config(format!("frame_dt must be positive, got {}", opts.frame_dt)));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(e, src))?.clone();
    let cols = Columns::locate(&headers, src)?;
    let tracked = cols.track.is_some();

    let mut frames: Vec<Frame> = Vec::new();
    let mut rec = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut rec) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(csv_error(e, src)),
        }
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |message: String| Error::Parse {
            path: src.to_path_buf(),
            line,
            message,
        };
        let field = |i: usize| rec.get(i).unwrap_or("");

        let k: usize = field(cols.frame)
            .parse()
            .map_err(|_| bad(format!("frame index `{}` is not a nonnegative integer", field(cols.frame))))?;
        if k + 1 < frames.len() {
            return Err(bad(format!("frame {k} appears after frame {}", frames.len() - 1)));
        }
        if k > frames.len() {
            return Err(bad(format!(
                "frames are not contiguous: frame {k} follows frame {}",
                frames.len() as i64 - 1
            )));
        }
        let time = match cols.time {
            Some(c) => Some(parse_real(field(c), "time").map_err(&bad)?),
            None => None,
        };
        if k == frames.len() {
            frames.push(Frame {
                time,
                config: PointConfig::empty(2),
                seen: HashSet::new(),
            });
        }
        let fr = &mut frames[k];
        if fr.time != time {
            return Err(bad(format!("frame {k} has inconsistent times")));
        }

        let (xs, ys) = (field(cols.x), field(cols.y));
        if xs.is_empty() && ys.is_empty() {
            if cols.track.is_some_and(|c| !field(c).is_empty()) {
                return Err(bad("track_id given on a row without coordinates".into()));
            }
            continue;
        }
        let x = parse_real(xs, "x").map_err(&bad)?;
        let y = parse_real(ys, "y").map_err(&bad)?;
        let id = match cols.track {
            Some(c) => {
                let s = field(c);
                let id: PointId = s
                    .parse()
                    .map_err(|_| bad(format!("track_id `{s}` is not a nonnegative integer")))?;
                if !fr.seen.insert(id) {
                    return Err(bad(format!("duplicate track_id {id} in frame {k}")));
                }
                id
            }
            None => fr.config.len() as PointId,
        };
        fr.config.push(&[x, y], id);
    }
    if frames.is_empty() {
        return Err(Error::Parse {
            path: src.to_path_buf(),
            line: 1,
            message: "no frames".into(),
        });
    }
    let times = frames
        .iter()
        .enumerate()
        .map(|(k, f)| f.time.unwrap_or(k as f64 * opts.frame_dt))
        .collect();
    let configs = frames.into_iter().map(|f| f.config).collect();
    FrameSequence::new(times, configs, tracked)
}

fn parse_real(s: &str, what: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("{what} `{s}` is not a finite number")),
    }
}

fn csv_error(e: csv::Error, src: &Path) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        path: src.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

/// Writes frames in the format read by [`read_frames`], with a `time`
/// column, and a `track_id` column when the sequence is tracked.
/// Only planar configurations can be written.
pub fn write_frames(fs: &FrameSequence, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_frames_to(fs, std::io::BufWriter::new(file))
}

pub fn write_frames_to<W: Write>(fs: &FrameSequence, mut w: W) -> Result<()> {
    if fs.configs.iter().any(|c| c.dim() != 2) {
        return Err(Error::domain("frames files hold planar configurations only"));
    }
    if fs.tracked {
        writeln!(w, "frame,time,track_id,x,y")?;
    } else {
        writeln!(w, "frame,time,x,y")?;
    }
    for (k, (t, c)) in fs.times.iter().zip(&fs.configs).enumerate() {
        if c.is_empty() {
            if fs.tracked {
                writeln!(w, "{k},{t:?},,,")?;
            } else {
                writeln!(w, "{k},{t:?},,")?;
            }
            continue;
        }
        for (i, p) in c.points().enumerate() {
            if fs.tracked {
                writeln!(w, "{k},{t:?},{},{:?},{:?}", c.id(i), p[0], p[1])?;
            } else {
                writeln!(w, "{k},{t:?},{:?},{:?}", p[0], p[1])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
