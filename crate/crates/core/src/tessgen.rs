//! Realizations of Poisson line and STIT tessellations in a rectangular window.
//!
//! Both models are driven by the same line measure: for a direction law `R`,
//! the measure of lines hitting a convex cell `c` is
//! `Λ(c) = ∫ width(c, φ) R(dφ)` (the perimeter over π when isotropic). A PLT of
//! intensity `γ` throws a Poisson number of lines with mean `γ Λ`; a STIT cell
//! lives for an `Exp(Λ(c))` time before being cut by a line drawn from the same
//! measure restricted to `c`. With this normalisation `γ` and the STIT time `t`
//! both equal the edge length density.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Line, Point2, RectWindow, Split};

/// Degenerate splits tolerated per realization before it is abandoned.
pub const MAX_DEGENERATE_SPLITS: usize = 10;
/// Maximum STIT division depth.
pub const MAX_DIVISION_DEPTH: usize = 1_000_000;

/// Seeded random stream; `(seed, stream_id)` fully determines the output.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Directional distribution of line normals on `[0, π)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DirectionLaw {
    Isotropic,
    /// `(phi, weight)` atoms; weights sum to one.
    Discrete(Vec<(f64, f64)>),
}

impl DirectionLaw {
    /// Validates and normalises a discrete law.
    pub fn discrete(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms
            .iter()
            .any(|&(phi, w)| !phi.is_finite() || !(w > 0.0) || !w.is_finite())
        {
            return Err(Error::InvalidParameter(
                "direction atoms need finite angles and positive weights".into(),
            ));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "direction weights sum to {total}, not 1"
            )));
        }
        let atoms: Vec<(f64, f64)> = atoms
            .into_iter()
            .map(|(phi, w)| (Line::new(0.0, phi).phi, w / total))
            .collect();
        let distinct = atoms
            .iter()
            .any(|a| (a.0 - atoms[0].0).abs() > 1e-12 && (PI - (a.0 - atoms[0].0).abs()) > 1e-12);
        if !distinct {
            return Err(Error::InvalidParameter(
                "direction law must have at least two distinct directions".into(),
            ));
        }
        Ok(DirectionLaw::Discrete(atoms))
    }

    /// Draws a normal angle from the law itself.
    pub fn sample_phi<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DirectionLaw::Isotropic => rng.random_range(0.0..PI),
            DirectionLaw::Discrete(atoms) => {
                let u: f64 = rng.random();
                pick(atoms.iter().map(|a| (a.0, a.1)), u)
            }
        }
    }
}

/// Atom whose cumulative weight first exceeds `u` times the total.
fn pick(atoms: impl Iterator<Item = (f64, f64)> + Clone, u: f64) -> f64 {
    let total: f64 = atoms.clone().map(|a| a.1).sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last = 0.0;
    for (phi, w) in atoms {
        acc += w;
        last = phi;
        if target < acc {
            return phi;
        }
    }
    last
}

impl fmt::Display for DirectionLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DirectionLaw::Isotropic => write!(f, "isotropic"),
            DirectionLaw::Discrete(atoms) => {
                write!(f, "atoms:")?;
                for (i, (phi, w)) in atoms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{phi}:{w}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for DirectionLaw {
    type Err = Error;

    /// `isotropic` or `atoms:phi1:w1,phi2:w2,...`
    fn from_str(s: &str) -> Result<Self> {
        if s == "isotropic" {
            return Ok(DirectionLaw::Isotropic);
        }
        let body = s
            .strip_prefix("atoms:")
            .ok_or_else(|| Error::InvalidParameter(format!("unknown direction law {s:?}")))?;
        let mut atoms = Vec::new();
        for item in body.split(',') {
            let (phi, w) = item
                .split_once(':')
                .ok_or_else(|| Error::InvalidParameter(format!("bad atom {item:?}")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad number {v:?}")))
            };
            atoms.push((parse(phi)?, parse(w)?));
        }
        DirectionLaw::discrete(atoms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    Plt,
    Stit,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Plt => "plt",
            Model::Stit => "stit",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plt" => Ok(Model::Plt),
            "stit" => Ok(Model::Stit),
            _ => Err(Error::InvalidParameter(format!("unknown model {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PltParams {
    pub gamma: f64,
    pub law: DirectionLaw,
    pub window: RectWindow,
}

impl PltParams {
    pub fn new(gamma: f64, law: DirectionLaw, window: RectWindow) -> Result<Self> {
        check_density("gamma", gamma)?;
        Ok(PltParams { gamma, law, window })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StitParams {
    pub t: f64,
    pub law: DirectionLaw,
    pub window: RectWindow,
}

impl StitParams {
    pub fn new(t: f64, law: DirectionLaw, window: RectWindow) -> Result<Self> {
        check_density("t", t)?;
        Ok(StitParams { t, law, window })
    }
}

fn check_density(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite and positive, got {v}"
        )))
    }
}

/// Cells of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Tessellation {
    pub cells: Vec<ConvexPolygon>,
    /// Splits rejected as numerically degenerate (skipped or resampled).
    pub degenerate_splits: usize,
}

impl Tessellation {
    /// Interior edge length per unit area of a tiling of `window`.
    ///
    /// Interior edges lie on two cell boundaries and the window boundary on
    /// one, so the summed perimeters are `2 L + perimeter(W)`.
    pub fn edge_length_density(&self, window: &RectWindow) -> f64 {
        let total: f64 = self.cells.iter().map(|c| c.perimeter()).sum();
        (total - window.perimeter()) / (2.0 * window.area())
    }
}

/// Lines of a Poisson line process that hit the disc circumscribing the window.
pub fn sample_poisson_lines(params: &PltParams, rng: &mut RngStream) -> Vec<Line> {
    let r0 = params.window.circumradius();
    let centre = params.window.centre();
    let mean = params.gamma * 2.0 * r0;
    let count = Poisson::new(mean)
        .map(|d| d.sample(rng) as usize)
        .unwrap_or(0);
    (0..count)
        .map(|_| {
            let phi = params.law.sample_phi(rng);
            let offset = rng.random_range(-r0..r0);
            Line::new(centre.dot(Point2::unit(phi)) + offset, phi)
        })
        .collect()
}

/// Cuts the window by every line in turn.
///
/// A split that would produce a sliver is skipped for that cell and counted.
pub fn build_plt(lines: &[Line], window: &RectWindow) -> Result<Tessellation> {
    let mut cells = vec![window.to_polygon()];
    let mut degenerate = 0;
    for line in lines {
        let n = line.normal();
        let existing = cells.len();
        for i in 0..existing {
            if !straddles(&cells[i], n, line.p) {
                continue;
            }
            match cells[i].split(line) {
                Ok(Split::Parts(a, b)) => {
                    cells[i] = a;
                    cells.push(b);
                }
                Ok(Split::Miss) => {}
                Err(Error::DegenerateGeometry(_)) => {
                    degenerate += 1;
                    if degenerate > MAX_DEGENERATE_SPLITS {
                        return Err(Error::TooManyDegenerateSplits(degenerate));
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(Tessellation {
        cells,
        degenerate_splits: degenerate,
    })
}

// cheap pre-filter before the allocating split
#[inline]
fn straddles(cell: &ConvexPolygon, normal: Point2, p: f64) -> bool {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in cell.vertices() {
        let d = v.dot(normal) - p;
        lo = lo.min(d);
        hi = hi.max(d);
    }
    lo < 0.0 && hi > 0.0
}

/// Poisson line tessellation of the window.
pub fn simulate_plt(params: &PltParams, rng: &mut RngStream) -> Result<Tessellation> {
    let lines = sample_poisson_lines(params, rng);
    build_plt(&lines, &params.window)
}

/// Total measure of lines hitting `cell` under the law.
pub fn cell_hitting_rate(cell: &ConvexPolygon, law: &DirectionLaw) -> f64 {
    match law {
        DirectionLaw::Isotropic => cell.perimeter() / PI,
        DirectionLaw::Discrete(atoms) => atoms
            .iter()
            .map(|&(phi, w)| w * cell.support_width(phi))
            .sum(),
    }
}

/// A line hitting the interior of `cell`, drawn from the line measure
/// restricted to lines meeting the cell.
pub fn sample_dividing_line<R: Rng + ?Sized>(
    cell: &ConvexPolygon,
    law: &DirectionLaw,
    rng: &mut R,
) -> Line {
    loop {
        let phi = match law {
            DirectionLaw::Isotropic => {
                // width is at least half the diameter, so acceptance >= 1/2
                let diam = cell.diameter();
                loop {
                    let phi = rng.random_range(0.0..PI);
                    if rng.random::<f64>() * diam <= cell.support_width(phi) {
                        break phi;
                    }
                }
            }
            DirectionLaw::Discrete(atoms) => {
                let u: f64 = rng.random();
                pick(
                    atoms
                        .iter()
                        .map(|&(phi, w)| (phi, w * cell.support_width(phi))),
                    u,
                )
            }
        };
        let (lo, hi) = cell.projection_interval(phi);
        let line = Line::new(lo + rng.random::<f64>() * (hi - lo), phi);
        if cell.is_hit_by(&line) {
            return line;
        }
    }
}

/// STIT tessellation of the window at time `t` by recursive cell division.
pub fn stit_construct(params: &StitParams, rng: &mut RngStream) -> Result<Tessellation> {
    let mut done = Vec::new();
    let mut stack = vec![(params.window.to_polygon(), params.t, 0usize)];
    let mut degenerate = 0;
    while let Some((cell, remaining, depth)) = stack.pop() {
        let rate = cell_hitting_rate(&cell, &params.law);
        let lifetime = Exp::new(rate)
            .map_err(|_| Error::InvalidParameter(format!("bad hitting rate {rate}")))?
            .sample(rng);
        if lifetime > remaining {
            done.push(cell);
            continue;
        }
        if depth >= MAX_DIVISION_DEPTH {
            return Err(Error::DepthLimitExceeded(MAX_DIVISION_DEPTH));
        }
        let left = remaining - lifetime;
        loop {
            let line = sample_dividing_line(&cell, &params.law, rng);
            match cell.split(&line) {
                Ok(Split::Parts(a, b)) => {
                    stack.push((b, left, depth + 1));
                    stack.push((a, left, depth + 1));
                    break;
                }
                Ok(Split::Miss) | Err(Error::DegenerateGeometry(_)) => {
                    degenerate += 1;
                    if degenerate > MAX_DEGENERATE_SPLITS {
                        return Err(Error::TooManyDegenerateSplits(degenerate));
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(Tessellation {
        cells: done,
        degenerate_splits: degenerate,
    })
}

/// One realization of either model with edge length density `la`.
pub fn simulate(
    model: Model,
    la: f64,
    law: &DirectionLaw,
    window: &RectWindow,
    rng: &mut RngStream,
) -> Result<Tessellation> {
    match model {
        Model::Plt => simulate_plt(&PltParams::new(la, law.clone(), *window)?, rng),
        Model::Stit => stit_construct(&StitParams::new(la, law.clone(), *window)?, rng),
    }
}
