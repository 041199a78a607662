//! Text format for one realization.
//!
//! ```text
//! # tesslab-cells 1
//! # model plt
//! # la 1
//! # law isotropic
//! # window -100 -100 100 100
//! # seed 7
//! # rep 0
//! 0,4,x1,y1,x2,y2,x3,y3,x4,y4
//! ```
//!
//! Records are `cell_id,k,x1,y1,...,xk,yk`. Coordinates use the shortest
//! decimal that parses back to the same `f64`, so reading a written file
//! reproduces every cell bit for bit.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use tesslab_core::{ConvexPolygon, DirectionLaw, Model, Point2, RectWindow};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "tesslab-cells";

#[derive(Debug, Clone, PartialEq)]
pub struct CellsHeader {
    pub version: u32,
    pub model: Model,
    pub la: f64,
    pub law: DirectionLaw,
    pub window: RectWindow,
    pub seed: u64,
    pub rep: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellsFile {
    pub header: CellsHeader,
    pub cells: Vec<ConvexPolygon>,
}

impl CellsFile {
    pub fn to_text(&self) -> String {
        let h = &self.header;
        let w = &h.window;
        let mut s = String::new();
        let _ = writeln!(s, "# {MAGIC} {}", h.version);
        let _ = writeln!(s, "# model {}", h.model);
        let _ = writeln!(s, "# la {}", h.la);
        let _ = writeln!(s, "# law {}", h.law);
        let _ = writeln!(s, "# window {} {} {} {}", w.x0, w.y0, w.x1, w.y1);
        let _ = writeln!(s, "# seed {}", h.seed);
        let _ = writeln!(s, "# rep {}", h.rep);
        for (id, c) in self.cells.iter().enumerate() {
            let _ = write!(s, "{id},{}", c.len());
            for v in c.vertices() {
                let _ = write!(s, ",{},{}", v.x, v.y);
            }
            s.push('\n');
        }
        s
    }

    pub fn parse<R: BufRead>(input: R) -> Result<Self> {
        let mut fields: Vec<(String, String)> = Vec::new();
        let mut cells = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            let at = || format!("line {}", i + 1);
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest.trim().split_once(' ').unwrap_or((rest.trim(), ""));
                fields.push((k.to_string(), v.trim().to_string()));
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            ensure!(parts.len() >= 2, "{}: truncated record", at());
            let id: usize = parts[0].parse().with_context(at)?;
            ensure!(id == cells.len(), "{}: cell id {id} out of sequence", at());
            let k: usize = parts[1].parse().with_context(at)?;
            ensure!(k >= 3, "{}: a cell needs at least 3 corners, got {k}", at());
            ensure!(
                parts.len() == 2 + 2 * k,
                "{}: expected {k} coordinate pairs",
                at()
            );
            let xs: Vec<f64> = parts[2..]
                .iter()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .with_context(at)?;
            let vs = xs.chunks(2).map(|p| Point2::new(p[0], p[1])).collect();
            let poly = ConvexPolygon::new(vs).with_context(at)?;
            ensure!(poly.len() == k, "{}: cell is not in normal form", at());
            cells.push(poly);
        }
        let get = |key: &str| {
            fields
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| anyhow!("missing header field {key:?}"))
        };
        let version: u32 = get(MAGIC)
            .map_err(|_| anyhow!("not a cells file (no {MAGIC} line)"))?
            .parse()?;
        if version != FORMAT_VERSION {
            bail!("unsupported cells file version {version}");
        }
        let win: Vec<f64> = get("window")?
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()?;
        ensure!(win.len() == 4, "window needs 4 values");
        let header = CellsHeader {
            version,
            model: get("model")?.parse()?,
            la: get("la")?.parse()?,
            law: get("law")?.parse()?,
            window: RectWindow::new(win[0], win[1], win[2], win[3])?,
            seed: get("seed")?.parse()?,
            rep: get("rep")?.parse()?,
        };
        Ok(CellsFile { header, cells })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        Self::parse(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
    }
}

/// Writes `content` to `path` through a temporary file in the same
/// directory, so a failed run leaves no partial file behind.
pub fn write_atomic(path: &Path, content: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(content)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
