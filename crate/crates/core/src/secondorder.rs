//! Second-order statistics of the point process of cell centres: Ripley's
//! K, the pair-correlation function and the mark-correlation function, all
//! with translation edge correction on a rectangular window.
//!
//! Every estimator is a ratio of pair sums. [`SecondOrderAccumulator`]
//! keeps numerators and denominators separately so that replications pool
//! by ratio of sums; the single-pattern functions are thin wrappers.

use std::f64::consts::PI;
use std::io::{self, BufRead, Write};

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::complex::TessellationComplex;
use crate::error::{Error, Result};
use crate::geometry::{Point2, RectWindow};

/// Number of points of the default `r` grid.
pub const R_GRID_POINTS: usize = 512;

/// Bandwidth constant `c` in `h = c / sqrt(λ)`.
pub const STOYAN_CONSTANT: f64 = 0.15;

#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    points: Vec<Point2>,
    window: RectWindow,
}

impl PointPattern {
    pub fn new(points: Vec<Point2>, window: RectWindow) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !window.contains(**p)) {
            return Err(Error::InvalidParameter(format!(
                "point ({}, {}) outside the window",
                p.x, p.y
            )));
        }
        Ok(PointPattern { points, window })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn window(&self) -> &RectWindow {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `n / |W|`
    pub fn intensity(&self) -> f64 {
        self.points.len() as f64 / self.window.area()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marks {
    pub area: f64,
    pub perimeter: f64,
    pub corners: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkSelector {
    Area,
    Perimeter,
    Corners,
}

impl MarkSelector {
    pub const ALL: [MarkSelector; 3] = [
        MarkSelector::Area,
        MarkSelector::Perimeter,
        MarkSelector::Corners,
    ];

    #[inline]
    pub fn of(self, m: &Marks) -> f64 {
        match self {
            MarkSelector::Area => m.area,
            MarkSelector::Perimeter => m.perimeter,
            MarkSelector::Corners => m.corners as f64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MarkSelector::Area => "area",
            MarkSelector::Perimeter => "perimeter",
            MarkSelector::Corners => "corners",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkedPointPattern {
    pattern: PointPattern,
    marks: Vec<Marks>,
}

impl MarkedPointPattern {
    pub fn new(pattern: PointPattern, marks: Vec<Marks>) -> Result<Self> {
        if marks.len() != pattern.len() {
            return Err(Error::InvalidParameter(format!(
                "{} marks for {} points",
                marks.len(),
                pattern.len()
            )));
        }
        if let Some(m) = marks
            .iter()
            .find(|m| !(m.area >= 0.0 && m.perimeter >= 0.0 && m.corners >= 3))
        {
            return Err(Error::InvalidParameter(format!("invalid marks {m:?}")));
        }
        Ok(MarkedPointPattern { pattern, marks })
    }

    pub fn pattern(&self) -> &PointPattern {
        &self.pattern
    }

    pub fn marks(&self) -> &[Marks] {
        &self.marks
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }
}

/// Epanechnikov kernel `(3/(4h)) max(0, 1 − (u/h)²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    h: f64,
}

impl KernelSpec {
    pub fn epanechnikov(h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {h}"
            )));
        }
        Ok(KernelSpec { h })
    }

    #[inline]
    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        let t = u / self.h;
        if t.abs() >= 1.0 {
            0.0
        } else {
            0.75 / self.h * (1.0 - t * t)
        }
    }
}

/// `h = 0.15 / sqrt(λ)`.
pub fn stoyan_bandwidth(intensity: f64) -> Result<KernelSpec> {
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "intensity must be positive, got {intensity}"
        )));
    }
    KernelSpec::epanechnikov(STOYAN_CONSTANT / intensity.sqrt())
}

/// `n` equally spaced values on `[0, r_max]`.
pub fn uniform_r_grid(r_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(r_max > 0.0 && r_max.is_finite()) || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "r grid needs r_max > 0 and at least 2 points, got {r_max} and {n}"
        )));
    }
    let step = r_max / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i + 1 == n { r_max } else { i as f64 * step })
        .collect())
}

/// Default grid: 512 points on `[0, shorter side / 4]`.
pub fn default_r_grid(window: &RectWindow) -> Vec<f64> {
    let r_max = 0.25 * window.width().min(window.height());
    uniform_r_grid(r_max, R_GRID_POINTS).expect("windows have positive sides")
}

/// `|W ∩ (W + h)| = (width − |dx|)(height − |dy|)`.
pub fn translation_weight(window: &RectWindow, dx: f64, dy: f64) -> Result<f64> {
    let (a, b) = (window.width() - dx.abs(), window.height() - dy.abs());
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::ZeroOverlap(dx, dy));
    }
    Ok(a * b)
}

/// Centres of gravity in `sub` with the cell marks.
pub fn extract_centres(
    complex: &TessellationComplex,
    sub: &RectWindow,
) -> Result<MarkedPointPattern> {
    if !complex.window().contains_window(sub) {
        return Err(Error::InvalidParameter(
            "sub-window is not contained in the window".into(),
        ));
    }
    let mut points = Vec::new();
    let mut marks = Vec::new();
    for (id, cell) in complex.cells().iter().enumerate() {
        let c = cell.centroid();
        if sub.contains(c) {
            points.push(c);
            marks.push(Marks {
                area: cell.area(),
                perimeter: cell.perimeter(),
                corners: complex.cell_topology(id)?.corners,
            });
        }
    }
    MarkedPointPattern::new(PointPattern::new(points, *sub)?, marks)
}

/// Homogeneous Poisson pattern.
pub fn simulate_csr<R: Rng + ?Sized>(
    intensity: f64,
    window: &RectWindow,
    rng: &mut R,
) -> Result<PointPattern> {
    let mean = intensity * window.area();
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "intensity must be positive, got {intensity}"
        )));
    }
    let n = Poisson::new(mean)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?
        .sample(rng) as usize;
    let points = (0..n)
        .map(|_| {
            Point2::new(
                rng.random_range(window.x0..window.x1),
                rng.random_range(window.y0..window.y1),
            )
        })
        .collect();
    PointPattern::new(points, *window)
}

/// One estimated curve on the `r` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveEstimate {
    pub r: Vec<f64>,
    /// `None` where the estimator is undefined.
    pub values: Vec<Option<f64>>,
    /// Ordered pairs contributing at each `r`.
    pub n_pairs: Vec<u64>,
    /// Points over all pooled patterns.
    pub n_used: usize,
    pub bandwidth: Option<f64>,
}

impl CurveEstimate {
    /// Kernel estimates at `r < h` lose kernel mass below zero.
    pub fn is_boundary_biased(&self, i: usize) -> bool {
        self.bandwidth.is_some_and(|h| self.r[i] < h)
    }

    /// Value at the grid point nearest to `r`.
    pub fn at(&self, r: f64) -> Option<f64> {
        let i = self
            .r
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - r).abs().total_cmp(&(b.1 - r).abs()))?
            .0;
        self.values[i]
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "r,value,n_pairs")?;
        for ((r, v), n) in self.r.iter().zip(&self.values).zip(&self.n_pairs) {
            match v {
                Some(v) => writeln!(out, "{r},{v},{n}")?,
                None => writeln!(out, "{r},,{n}")?,
            }
        }
        Ok(())
    }
}

/// Pooled pair sums of K, g and k_mm over any number of patterns.
///
/// Patterns merge by adding sums, so pooling is independent of how the
/// patterns were grouped; the order of additions is fixed by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderAccumulator {
    r: Vec<f64>,
    kernel: KernelSpec,
    n_used: usize,
    /// `Σ λ̂²`
    lambda2: f64,
    /// `Σ_{x≠y} 1(d = first grid index ≥ d) w`, cumulated at the end.
    k_hist: Vec<f64>,
    k_pairs_hist: Vec<u64>,
    /// `Σ_{x≠y} k_h(r − d) w`
    kern: Vec<f64>,
    kern_pairs: Vec<u64>,
    /// `Σ_{x≠y} m(x) m(y) k_h(r − d) w`
    mark_num: [Vec<f64>; 3],
    /// `Σ μ̂² Σ_{x≠y} k_h(r − d) w`
    mark_den: [Vec<f64>; 3],
}

impl SecondOrderAccumulator {
    pub fn new(r: Vec<f64>, kernel: KernelSpec) -> Result<Self> {
        let uniform = r.len() >= 2 && r[0] == 0.0 && r.windows(2).all(|w| w[1] > w[0]);
        if !uniform {
            return Err(Error::InvalidParameter(
                "r grid must start at 0 and increase".into(),
            ));
        }
        let n = r.len();
        Ok(SecondOrderAccumulator {
            r,
            kernel,
            n_used: 0,
            lambda2: 0.0,
            k_hist: vec![0.0; n],
            k_pairs_hist: vec![0; n],
            kern: vec![0.0; n],
            kern_pairs: vec![0; n],
            mark_num: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            mark_den: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        })
    }

    pub fn r_grid(&self) -> &[f64] {
        &self.r
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn add_marked(&mut self, p: &MarkedPointPattern) -> Result<()> {
        self.add(p.pattern(), Some(p.marks()))
    }

    pub fn add_pattern(&mut self, p: &PointPattern) -> Result<()> {
        self.add(p, None)
    }

    fn add(&mut self, p: &PointPattern, marks: Option<&[Marks]>) -> Result<()> {
        let n = p.len();
        if n < 2 {
            return Err(Error::InsufficientPoints(n));
        }
        let window = p.window();
        // a canonical order makes the sums independent of the input order
        let mut order: Vec<usize> = (0..n).collect();
        let key = |i: usize| {
            let m = marks.map(|ms| ms[i]);
            (p.points()[i], m)
        };
        order.sort_by(|&a, &b| {
            let ((pa, ma), (pb, mb)) = (key(a), key(b));
            pa.x.total_cmp(&pb.x)
                .then(pa.y.total_cmp(&pb.y))
                .then_with(|| match (ma, mb) {
                    (Some(ma), Some(mb)) => ma
                        .area
                        .total_cmp(&mb.area)
                        .then(ma.perimeter.total_cmp(&mb.perimeter))
                        .then(ma.corners.cmp(&mb.corners)),
                    _ => std::cmp::Ordering::Equal,
                })
        });
        let pts: Vec<Point2> = order.iter().map(|&i| p.points()[i]).collect();
        let mk: Option<Vec<[f64; 3]>> = marks.map(|ms| {
            order
                .iter()
                .map(|&i| MarkSelector::ALL.map(|s| s.of(&ms[i])))
                .collect()
        });

        let mut mean = [0.0; 3];
        if let Some(mk) = &mk {
            for m in mk {
                for s in 0..3 {
                    mean[s] += m[s];
                }
            }
            for v in &mut mean {
                *v /= n as f64;
            }
            if let Some(s) = MarkSelector::ALL.iter().find(|s| mean[**s as usize] <= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "mean {} mark is zero",
                    s.name()
                )));
            }
        }

        let m = self.r.len();
        let r_max = self.r[m - 1];
        let step = r_max / (m - 1) as f64;
        let h = self.kernel.bandwidth();
        let reach = r_max + h;
        let mut kern = vec![0.0; m];
        let mut k_hist = vec![0.0; m];
        let mut mark_num = [vec![0.0; m], vec![0.0; m], vec![0.0; m]];

        for i in 0..n {
            let a = pts[i];
            for j in i + 1..n {
                let b = pts[j];
                let dx = b.x - a.x;
                if dx > reach {
                    break;
                }
                let dy = b.y - a.y;
                let d = dx.hypot(dy);
                if d > reach {
                    continue;
                }
                // each unordered pair stands for two ordered pairs
                let w = 2.0 / translation_weight(window, dx, dy)?;
                if d <= r_max {
                    let mut k = ((d / step).ceil() as usize).min(m - 1);
                    while k > 0 && self.r[k - 1] >= d {
                        k -= 1;
                    }
                    while self.r[k] < d {
                        k += 1;
                    }
                    k_hist[k] += w;
                    self.k_pairs_hist[k] += 2;
                }
                let lo = ((d - h) / step).floor().max(0.0) as usize;
                let hi = (((d + h) / step).ceil() as usize).min(m - 1);
                let prod = mk.as_ref().map(|mk| {
                    let (u, v) = (mk[i], mk[j]);
                    [u[0] * v[0], u[1] * v[1], u[2] * v[2]]
                });
                for k in lo..=hi {
                    let kv = self.kernel.eval(self.r[k] - d);
                    if kv == 0.0 {
                        continue;
                    }
                    let kw = kv * w;
                    kern[k] += kw;
                    self.kern_pairs[k] += 2;
                    if let Some(prod) = prod {
                        for s in 0..3 {
                            mark_num[s][k] += prod[s] * kw;
                        }
                    }
                }
            }
        }

        let area = window.area();
        self.lambda2 += (n * (n - 1)) as f64 / (area * area);
        self.n_used += n;
        for k in 0..m {
            self.kern[k] += kern[k];
            self.k_hist[k] += k_hist[k];
        }
        if mk.is_some() {
            for s in 0..3 {
                let mu2 = mean[s] * mean[s];
                for k in 0..m {
                    self.mark_num[s][k] += mark_num[s][k];
                    self.mark_den[s][k] += mu2 * kern[k];
                }
            }
        }
        Ok(())
    }

    /// Adds another accumulator on the same grid and kernel.
    pub fn merge(&mut self, o: &SecondOrderAccumulator) -> Result<()> {
        if self.r != o.r || self.kernel != o.kernel {
            return Err(Error::InvalidParameter(
                "accumulators differ in grid or bandwidth".into(),
            ));
        }
        self.n_used += o.n_used;
        self.lambda2 += o.lambda2;
        let add = |a: &mut Vec<f64>, b: &Vec<f64>| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.k_hist, &o.k_hist);
        add(&mut self.kern, &o.kern);
        for s in 0..3 {
            add(&mut self.mark_num[s], &o.mark_num[s]);
            add(&mut self.mark_den[s], &o.mark_den[s]);
        }
        for (a, b) in self.k_pairs_hist.iter_mut().zip(&o.k_pairs_hist) {
            *a += b;
        }
        for (a, b) in self.kern_pairs.iter_mut().zip(&o.kern_pairs) {
            *a += b;
        }
        Ok(())
    }

    fn check_nonempty(&self) -> Result<()> {
        if self.n_used < 2 || self.lambda2 == 0.0 {
            return Err(Error::InsufficientPoints(self.n_used));
        }
        Ok(())
    }

    /// `K̂(r) = Σ 1(d ≤ r) w / Σ λ̂²`
    pub fn k_function(&self) -> Result<CurveEstimate> {
        self.check_nonempty()?;
        let mut acc = 0.0;
        let mut pairs = 0;
        let mut values = Vec::with_capacity(self.r.len());
        let mut n_pairs = Vec::with_capacity(self.r.len());
        for k in 0..self.r.len() {
            acc += self.k_hist[k];
            pairs += self.k_pairs_hist[k];
            values.push(Some(acc / self.lambda2));
            n_pairs.push(pairs);
        }
        Ok(CurveEstimate {
            r: self.r.clone(),
            values,
            n_pairs,
            n_used: self.n_used,
            bandwidth: None,
        })
    }

    /// `ĝ(r) = Σ k_h(r − d) w / (2πr Σ λ̂²)`, undefined at `r = 0`.
    pub fn pcf(&self) -> Result<CurveEstimate> {
        self.check_nonempty()?;
        let values = self
            .r
            .iter()
            .zip(&self.kern)
            .map(|(&r, &s)| (r > 0.0).then(|| s / (2.0 * PI * r * self.lambda2)))
            .collect();
        Ok(CurveEstimate {
            r: self.r.clone(),
            values,
            n_pairs: self.kern_pairs.clone(),
            n_used: self.n_used,
            bandwidth: Some(self.kernel.bandwidth()),
        })
    }

    /// `k̂_mm(r) = Σ m m k_h w / Σ μ̂² k_h w`, undefined where no pair is
    /// within one bandwidth of `r`.
    pub fn kmm(&self, sel: MarkSelector) -> Result<CurveEstimate> {
        self.check_nonempty()?;
        let s = sel as usize;
        let values = self.mark_num[s]
            .iter()
            .zip(&self.mark_den[s])
            .map(|(&n, &d)| (d > 0.0).then(|| n / d))
            .collect();
        Ok(CurveEstimate {
            r: self.r.clone(),
            values,
            n_pairs: self.kern_pairs.clone(),
            n_used: self.n_used,
            bandwidth: Some(self.kernel.bandwidth()),
        })
    }
}

/// Bandwidth-free kernel placeholder for K-only accumulation.
fn k_only_kernel(r: &[f64]) -> Result<KernelSpec> {
    let step = r.get(1).copied().unwrap_or(1.0);
    KernelSpec::epanechnikov(step.max(f64::MIN_POSITIVE))
}

#[allow(non_snake_case)]
pub fn estimate_K(p: &PointPattern, r: &[f64]) -> Result<CurveEstimate> {
    let mut acc = SecondOrderAccumulator::new(r.to_vec(), k_only_kernel(r)?)?;
    acc.add_pattern(p)?;
    acc.k_function()
}

pub fn estimate_pcf(p: &PointPattern, r: &[f64], k: KernelSpec) -> Result<CurveEstimate> {
    let mut acc = SecondOrderAccumulator::new(r.to_vec(), k)?;
    acc.add_pattern(p)?;
    acc.pcf()
}

pub fn estimate_kmm(
    p: &MarkedPointPattern,
    sel: MarkSelector,
    r: &[f64],
    k: KernelSpec,
) -> Result<CurveEstimate> {
    let mut acc = SecondOrderAccumulator::new(r.to_vec(), k)?;
    acc.add_marked(p)?;
    acc.kmm(sel)
}

/// Writes `x,y,area,perimeter,corners`.
pub fn write_pattern_csv<W: Write>(mut out: W, p: &MarkedPointPattern) -> io::Result<()> {
    writeln!(out, "x,y,area,perimeter,corners")?;
    for (z, m) in p.pattern().points().iter().zip(p.marks()) {
        writeln!(
            out,
            "{},{},{},{},{}",
            z.x, z.y, m.area, m.perimeter, m.corners
        )?;
    }
    Ok(())
}

/// Reads the format of [`write_pattern_csv`] for a known window.
pub fn read_pattern_csv<R: BufRead>(input: R, window: RectWindow) -> Result<MarkedPointPattern> {
    let bad =
        |line: usize, what: &str| Error::InvalidParameter(format!("pattern line {line}: {what}"));
    let mut lines = input.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "x,y,area,perimeter,corners" => {}
        _ => return Err(bad(1, "expected header x,y,area,perimeter,corners")),
    }
    let mut points = Vec::new();
    let mut marks = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| bad(i + 2, &e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 5 {
            return Err(bad(i + 2, "expected 5 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 2, "not a number"));
        points.push(Point2::new(num(f[0])?, num(f[1])?));
        marks.push(Marks {
            area: num(f[2])?,
            perimeter: num(f[3])?,
            corners: f[4]
                .parse()
                .map_err(|_| bad(i + 2, "corners not a count"))?,
        });
    }
    MarkedPointPattern::new(PointPattern::new(points, window)?, marks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_complex;
    use crate::tessgen::RngStream;
    use proptest::prelude::*;

    fn unit() -> RectWindow {
        RectWindow::square(0.0, 1.0).unwrap()
    }

    fn marked(points: Vec<Point2>, w: RectWindow, seed: u64) -> MarkedPointPattern {
        let mut rng = RngStream::new(seed, 99);
        let marks = points
            .iter()
            .map(|_| Marks {
                area: rng.random_range(0.1..3.0),
                perimeter: rng.random_range(1.0..8.0),
                corners: rng.random_range(3..9),
            })
            .collect();
        MarkedPointPattern::new(PointPattern::new(points, w).unwrap(), marks).unwrap()
    }

    fn csr(seed: u64, intensity: f64, w: &RectWindow) -> PointPattern {
        simulate_csr(intensity, w, &mut RngStream::new(seed, 0)).unwrap()
    }

    #[test]
    fn translation_weight_closed_form() {
        assert_eq!(translation_weight(&unit(), 0.0, 0.0).unwrap(), 1.0);
        assert_eq!(translation_weight(&unit(), 0.5, 0.0).unwrap(), 0.5);
        assert_eq!(translation_weight(&unit(), -0.5, 0.0).unwrap(), 0.5);
        let w = RectWindow::new(0.0, 0.0, 2.0, 1.0).unwrap();
        assert_eq!(translation_weight(&w, 1.0, 0.5).unwrap(), 0.5);
        assert_eq!(
            translation_weight(&w, 2.0, 0.0),
            Err(Error::ZeroOverlap(2.0, 0.0))
        );
        assert!(translation_weight(&w, 0.0, -1.5).is_err());
    }

    #[test]
    fn kernel_integrates_to_one() {
        let k = KernelSpec::epanechnikov(0.3).unwrap();
        let n = 100_000;
        let du = 0.6 / n as f64;
        let s: f64 = (0..n)
            .map(|i| k.eval(-0.3 + (i as f64 + 0.5) * du) * du)
            .sum();
        assert!((s - 1.0).abs() < 1e-9);
        assert_eq!(k.eval(0.3), 0.0);
        assert_eq!(k.eval(0.0), 0.75 / 0.3);
        assert!(KernelSpec::epanechnikov(0.0).is_err());
        assert!(stoyan_bandwidth(-1.0).is_err());
        assert!((stoyan_bandwidth(1.0 / PI).unwrap().bandwidth() - 0.15 * PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn grid_layout() {
        let r = default_r_grid(&RectWindow::new(-50.0, -30.0, 50.0, 30.0).unwrap());
        assert_eq!(r.len(), 512);
        assert_eq!(r[0], 0.0);
        assert_eq!(r[511], 15.0);
        let d = r[1] - r[0];
        assert!(r.windows(2).all(|w| ((w[1] - w[0]) - d).abs() < 1e-12));
        assert!(uniform_r_grid(1.0, 1).is_err());
    }

    #[test]
    fn too_few_points() {
        let p = PointPattern::new(vec![Point2::new(0.5, 0.5)], unit()).unwrap();
        let r = default_r_grid(&unit());
        assert_eq!(estimate_K(&p, &r), Err(Error::InsufficientPoints(1)));
        let k = KernelSpec::epanechnikov(0.05).unwrap();
        assert_eq!(estimate_pcf(&p, &r, k), Err(Error::InsufficientPoints(1)));
        assert!(PointPattern::new(vec![Point2::new(1.5, 0.5)], unit()).is_err());
    }

    #[test]
    fn k_of_two_points_jumps_at_their_distance() {
        let p =
            PointPattern::new(vec![Point2::new(0.2, 0.5), Point2::new(0.5, 0.5)], unit()).unwrap();
        let r = uniform_r_grid(0.5, 501).unwrap();
        let k = estimate_K(&p, &r).unwrap();
        // λ̂² = 2, two ordered pairs of weight 1/(0.7·1)
        let jump = 2.0 / 0.7 / 2.0;
        for (i, &ri) in r.iter().enumerate() {
            let v = k.values[i].unwrap();
            if ri < 0.3 - 1e-9 {
                assert_eq!(v, 0.0, "r = {ri}");
            } else if ri > 0.3 + 1e-9 {
                assert!((v - jump).abs() < 1e-12, "r = {ri}");
                assert_eq!(k.n_pairs[i], 2);
            }
        }
    }

    #[test]
    fn k_of_a_regular_grid_vanishes_below_the_spacing() {
        let pts = (0..100)
            .map(|i| Point2::new(0.05 + 0.1 * (i % 10) as f64, 0.05 + 0.1 * (i / 10) as f64))
            .collect();
        let p = PointPattern::new(pts, unit()).unwrap();
        let r = default_r_grid(&unit());
        let k = estimate_K(&p, &r).unwrap();
        for (i, &ri) in r.iter().enumerate() {
            if ri < 0.1 - 1e-9 {
                assert_eq!(k.values[i], Some(0.0));
            }
        }
        assert!(k.at(0.11).unwrap() > 0.0);
    }

    #[test]
    fn constant_marks_give_one() {
        let w = RectWindow::square(0.0, 10.0).unwrap();
        let p = csr(3, 5.0, &w);
        let marks = vec![
            Marks {
                area: 2.5,
                perimeter: 7.0,
                corners: 5
            };
            p.len()
        ];
        let mp = MarkedPointPattern::new(p, marks).unwrap();
        let r = default_r_grid(&w);
        let k = stoyan_bandwidth(5.0).unwrap();
        for sel in MarkSelector::ALL {
            let c = estimate_kmm(&mp, sel, &r, k).unwrap();
            for v in c.values.iter().flatten() {
                assert!((v - 1.0).abs() < 1e-12);
            }
            assert!(c.values.iter().any(|v| v.is_some()));
        }
    }

    #[test]
    fn kmm_missing_without_pairs() {
        let p =
            PointPattern::new(vec![Point2::new(0.1, 0.1), Point2::new(0.9, 0.9)], unit()).unwrap();
        let mp = MarkedPointPattern::new(
            p,
            vec![
                Marks {
                    area: 1.0,
                    perimeter: 4.0,
                    corners: 4
                };
                2
            ],
        )
        .unwrap();
        let r = default_r_grid(&unit());
        let c = estimate_kmm(
            &mp,
            MarkSelector::Area,
            &r,
            KernelSpec::epanechnikov(0.02).unwrap(),
        )
        .unwrap();
        assert!(c.values.iter().all(|v| v.is_none()));
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("r,value,n_pairs"));
        assert_eq!(text.lines().nth(1), Some("0,,0"));
    }

    #[test]
    fn pattern_csv_round_trip() {
        let w = RectWindow::square(-3.0, 3.0).unwrap();
        let p = marked(csr(5, 2.0, &w).points().to_vec(), w, 5);
        let mut buf = Vec::new();
        write_pattern_csv(&mut buf, &p).unwrap();
        let q = read_pattern_csv(&buf[..], w).unwrap();
        assert_eq!(p, q);
        assert!(read_pattern_csv(&b"x,y\n"[..], w).is_err());
    }

    #[test]
    fn extract_centres_of_a_grid() {
        let cells = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
            .iter()
            .map(|&(x, y)| {
                RectWindow::new(x, y, x + 1.0, y + 1.0)
                    .unwrap()
                    .to_polygon()
            })
            .collect();
        let w = RectWindow::square(0.0, 2.0).unwrap();
        let c = build_complex(cells, &w).unwrap();
        let p = extract_centres(&c, &w).unwrap();
        let mut pts: Vec<(f64, f64)> = p.pattern().points().iter().map(|z| (z.x, z.y)).collect();
        pts.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
        assert_eq!(pts, vec![(0.5, 0.5), (1.5, 0.5), (0.5, 1.5), (1.5, 1.5)]);
        assert!(p.marks().iter().all(|m| m.corners == 4 && m.area == 1.0));
        let sub = RectWindow::square(0.0, 1.0).unwrap();
        assert_eq!(extract_centres(&c, &sub).unwrap().len(), 1);
        assert!(extract_centres(&c, &RectWindow::square(-1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn merge_equals_joint_accumulation() {
        let w = RectWindow::square(0.0, 10.0).unwrap();
        let r = default_r_grid(&w);
        let k = stoyan_bandwidth(3.0).unwrap();
        let (a, b) = (
            marked(csr(1, 3.0, &w).points().to_vec(), w, 1),
            marked(csr(2, 3.0, &w).points().to_vec(), w, 2),
        );
        let mut joint = SecondOrderAccumulator::new(r.clone(), k).unwrap();
        joint.add_marked(&a).unwrap();
        joint.add_marked(&b).unwrap();
        let (mut x, mut y) = (
            SecondOrderAccumulator::new(r.clone(), k).unwrap(),
            SecondOrderAccumulator::new(r, k).unwrap(),
        );
        x.add_marked(&a).unwrap();
        y.add_marked(&b).unwrap();
        x.merge(&y).unwrap();
        assert_eq!(x, joint);
    }

    fn close(a: &CurveEstimate, b: &CurveEstimate, tol: f64) {
        assert_eq!(a.values.len(), b.values.len());
        for (u, v) in a.values.iter().zip(&b.values) {
            match (u, v) {
                (Some(u), Some(v)) => {
                    assert!((u - v).abs() <= tol * u.abs().max(1.0), "{u} vs {v}")
                }
                (None, None) => {}
                _ => panic!("definedness differs"),
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn estimators_are_permutation_invariant(seed in 0u64..1000, shift in 0usize..200) {
            let w = RectWindow::square(0.0, 6.0).unwrap();
            let p = marked(csr(seed, 4.0, &w).points().to_vec(), w, seed);
            prop_assume!(p.len() >= 2);
            let n = p.len();
            let idx: Vec<usize> = (0..n).map(|i| (i * 7 + shift) % n).collect();
            let mut seen = idx.clone();
            seen.sort();
            seen.dedup();
            prop_assume!(seen.len() == n);
            let q = MarkedPointPattern::new(
                PointPattern::new(idx.iter().map(|&i| p.pattern().points()[i]).collect(), w).unwrap(),
                idx.iter().map(|&i| p.marks()[i]).collect(),
            ).unwrap();
            let r = default_r_grid(&w);
            let k = stoyan_bandwidth(4.0).unwrap();
            let mut a = SecondOrderAccumulator::new(r.clone(), k).unwrap();
            let mut b = SecondOrderAccumulator::new(r, k).unwrap();
            a.add_marked(&p).unwrap();
            b.add_marked(&q).unwrap();
            prop_assert_eq!(a.pcf().unwrap(), b.pcf().unwrap());
            prop_assert_eq!(a.k_function().unwrap(), b.k_function().unwrap());
            for s in MarkSelector::ALL {
                prop_assert_eq!(a.kmm(s).unwrap(), b.kmm(s).unwrap());
            }
        }

        #[test]
        fn estimators_are_translation_covariant(seed in 0u64..1000, dx in -50.0f64..50.0, dy in -50.0f64..50.0) {
            let w = RectWindow::square(0.0, 6.0).unwrap();
            let p = marked(csr(seed, 4.0, &w).points().to_vec(), w, seed);
            prop_assume!(p.len() >= 2);
            let tw = w.translate(dx, dy);
            let moved: Vec<Point2> = p.pattern().points().iter().map(|z| Point2::new(z.x + dx, z.y + dy)).collect();
            prop_assume!(moved.iter().all(|z| tw.contains(*z)));
            let q = MarkedPointPattern::new(PointPattern::new(moved, tw).unwrap(), p.marks().to_vec()).unwrap();
            let r = default_r_grid(&w);
            let k = stoyan_bandwidth(4.0).unwrap();
            let mut a = SecondOrderAccumulator::new(r.clone(), k).unwrap();
            let mut b = SecondOrderAccumulator::new(r, k).unwrap();
            a.add_marked(&p).unwrap();
            b.add_marked(&q).unwrap();
            close(&a.pcf().unwrap(), &b.pcf().unwrap(), 1e-12);
            close(&a.k_function().unwrap(), &b.k_function().unwrap(), 1e-12);
            for s in MarkSelector::ALL {
                close(&a.kmm(s).unwrap(), &b.kmm(s).unwrap(), 1e-12);
            }
        }

        #[test]
        fn kmm_is_scale_free_in_the_marks(seed in 0u64..1000, c in 0.01f64..100.0) {
            let w = RectWindow::square(0.0, 6.0).unwrap();
            let p = marked(csr(seed, 4.0, &w).points().to_vec(), w, seed);
            prop_assume!(p.len() >= 2);
            let scaled: Vec<Marks> = p.marks().iter().map(|m| Marks { area: c * m.area, perimeter: c * m.perimeter, corners: m.corners }).collect();
            let q = MarkedPointPattern::new(p.pattern().clone(), scaled).unwrap();
            let r = default_r_grid(&w);
            let k = stoyan_bandwidth(4.0).unwrap();
            for s in [MarkSelector::Area, MarkSelector::Perimeter] {
                close(&estimate_kmm(&p, s, &r, k).unwrap(), &estimate_kmm(&q, s, &r, k).unwrap(), 1e-12);
            }
        }
    }
}
