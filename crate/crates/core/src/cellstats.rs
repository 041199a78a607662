//! Typical-cell and first-neighbourhood statistics under minus sampling.
//!
//! For an eligible cell `x` with neighbours `N(x)` (one entry per shared
//! 1-plate) and a cell characteristic `f`:
//!
//! * sum statistic: mean over `x` of `Σ_{c∈N(x)} f(c)`,
//! * bar mean: mean over `x` of `(1/#N(x)) Σ f(c)`,
//! * tilde mean: `Σ_x Σ_c f(c) / Σ_x #N(x)`.
//!
//! Each eligible cell carries the minus-sampling weight `|W| / |W ⊖ K|`,
//! where `K` is the bounding box of the cell and its neighbours relative to
//! the cell. On a rectangle this is the reciprocal fraction of translates of
//! the neighbourhood that stay inside the window, which removes the bias
//! against large neighbourhoods. Replications are pooled by adding
//! per-replication weighted sums, and standard errors come from a
//! delete-one-replication jackknife.

use std::f64::consts::PI;
use std::io::{self, Write};
use std::ops::{AddAssign, Sub};

use crate::complex::TessellationComplex;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::stats::{jackknife, Estimate};

#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub id: usize,
    pub area: f64,
    pub perimeter: f64,
    pub corners: usize,
    pub n0: usize,
    pub n1: usize,
    /// `(neighbour id, shared plate id)`, one per shared 1-plate.
    pub neighbors: Vec<(usize, usize)>,
    pub distinct_neighbors: usize,
    pub touches_boundary: bool,
    /// Neither the cell nor any neighbour touches the window boundary.
    pub eligible: bool,
    /// Minus-sampling weight, zero unless eligible.
    pub weight: f64,
}

/// Cell characteristics summed over neighbourhoods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Characteristic {
    Corners,
    Area,
    Perimeter,
}

impl Characteristic {
    pub const ALL: [Characteristic; 3] = [
        Characteristic::Corners,
        Characteristic::Area,
        Characteristic::Perimeter,
    ];

    #[inline]
    fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn of(self, r: &CellRecord) -> f64 {
        match self {
            Characteristic::Corners => r.corners as f64,
            Characteristic::Area => r.area,
            Characteristic::Perimeter => r.perimeter,
        }
    }

    /// Row label stem used in tables (`C0`, `V2`, `V1`).
    pub fn symbol(self) -> &'static str {
        match self {
            Characteristic::Corners => "C0",
            Characteristic::Area => "V2",
            Characteristic::Perimeter => "V1",
        }
    }
}

/// Vertex or edge count weighting of the typical cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    N0,
    N1,
}

/// Records for every cell of the complex, eligibility by minus sampling.
pub fn minus_sample(complex: &TessellationComplex) -> Vec<CellRecord> {
    let n = complex.cells().len();
    let mut records: Vec<CellRecord> = (0..n)
        .map(|id| {
            let topo = complex
                .cell_topology(id)
                .expect("ids come from the complex itself");
            let cell = &complex.cells()[id];
            CellRecord {
                id,
                area: cell.area(),
                perimeter: cell.perimeter(),
                corners: topo.corners,
                n0: topo.n0,
                n1: topo.n1,
                neighbors: complex.adjacency(id).to_vec(),
                distinct_neighbors: topo.neighbor_distinct_count,
                touches_boundary: topo.touches_boundary,
                eligible: false,
                weight: 0.0,
            }
        })
        .collect();
    let bboxes: Vec<[f64; 4]> = complex.cells().iter().map(|c| bbox(c.vertices())).collect();
    let w = complex.window();
    for id in 0..n {
        let ok = !records[id].touches_boundary
            && records[id]
                .neighbors
                .iter()
                .all(|&(j, _)| !records[j].touches_boundary);
        if !ok {
            continue;
        }
        let mut b = bboxes[id];
        for &(j, _) in &records[id].neighbors {
            let o = bboxes[j];
            b = [
                b[0].min(o[0]),
                b[1].min(o[1]),
                b[2].max(o[2]),
                b[3].max(o[3]),
            ];
        }
        let free = (w.width() - (b[2] - b[0])) * (w.height() - (b[3] - b[1]));
        records[id].eligible = true;
        records[id].weight = w.area() / free;
    }
    records
}

fn bbox(vs: &[Point2]) -> [f64; 4] {
    let mut b = [
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    ];
    for v in vs {
        b = [b[0].min(v.x), b[1].min(v.y), b[2].max(v.x), b[3].max(v.y)];
    }
    b
}

/// Additive sufficient statistics of one replication's eligible cells.
///
/// Every field except `count` is a sum of per-cell terms times the
/// minus-sampling weight; `cells` is the total weight.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeighborhoodSums {
    pub count: f64,
    pub cells: f64,
    pub neighbors: f64,
    pub distinct: f64,
    pub n0: f64,
    pub n1: f64,
    /// `Σ_x Σ_{c∈N(x)} f(c)`
    pub neighbor_sum: [f64; 3],
    /// `Σ_x (1/#N(x)) Σ_c f(c)`
    pub neighbor_mean: [f64; 3],
    /// `Σ_x f(x)`
    pub own: [f64; 3],
    pub n0_own: [f64; 3],
    pub n1_own: [f64; 3],
    /// `Σ_x area(x) Σ_c perimeter(c)`
    pub area_times_perimeter_sum: f64,
    /// `Σ_x perimeter(x) Σ_c area(c)`
    pub perimeter_times_area_sum: f64,
}

impl NeighborhoodSums {
    pub fn from_records(records: &[CellRecord]) -> Self {
        let mut s = NeighborhoodSums::default();
        for r in records.iter().filter(|r| r.eligible) {
            let k = r.neighbors.len() as f64;
            let w = r.weight;
            s.count += 1.0;
            s.cells += w;
            s.neighbors += w * k;
            s.distinct += w * r.distinct_neighbors as f64;
            s.n0 += w * r.n0 as f64;
            s.n1 += w * r.n1 as f64;
            let mut around = [0.0; 3];
            for &(j, _) in &r.neighbors {
                for f in Characteristic::ALL {
                    around[f.index()] += f.of(&records[j]);
                }
            }
            for f in Characteristic::ALL {
                let i = f.index();
                let own = w * f.of(r);
                s.neighbor_sum[i] += w * around[i];
                if k > 0.0 {
                    s.neighbor_mean[i] += w * around[i] / k;
                }
                s.own[i] += own;
                s.n0_own[i] += r.n0 as f64 * own;
                s.n1_own[i] += r.n1 as f64 * own;
            }
            s.area_times_perimeter_sum += w * r.area * around[Characteristic::Perimeter.index()];
            s.perimeter_times_area_sum += w * r.perimeter * around[Characteristic::Area.index()];
        }
        s
    }
}

impl AddAssign for NeighborhoodSums {
    fn add_assign(&mut self, o: Self) {
        self.count += o.count;
        self.cells += o.cells;
        self.neighbors += o.neighbors;
        self.distinct += o.distinct;
        self.n0 += o.n0;
        self.n1 += o.n1;
        for i in 0..3 {
            self.neighbor_sum[i] += o.neighbor_sum[i];
            self.neighbor_mean[i] += o.neighbor_mean[i];
            self.own[i] += o.own[i];
            self.n0_own[i] += o.n0_own[i];
            self.n1_own[i] += o.n1_own[i];
        }
        self.area_times_perimeter_sum += o.area_times_perimeter_sum;
        self.perimeter_times_area_sum += o.perimeter_times_area_sum;
    }
}

impl Sub for NeighborhoodSums {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let d = |a: [f64; 3], b: [f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
        NeighborhoodSums {
            count: self.count - o.count,
            cells: self.cells - o.cells,
            neighbors: self.neighbors - o.neighbors,
            distinct: self.distinct - o.distinct,
            n0: self.n0 - o.n0,
            n1: self.n1 - o.n1,
            neighbor_sum: d(self.neighbor_sum, o.neighbor_sum),
            neighbor_mean: d(self.neighbor_mean, o.neighbor_mean),
            own: d(self.own, o.own),
            n0_own: d(self.n0_own, o.n0_own),
            n1_own: d(self.n1_own, o.n1_own),
            area_times_perimeter_sum: self.area_times_perimeter_sum - o.area_times_perimeter_sum,
            perimeter_times_area_sum: self.perimeter_times_area_sum - o.perimeter_times_area_sum,
        }
    }
}

/// Both sides of an estimated identity and their difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub difference: Estimate,
}

impl IdentityCheck {
    fn new(
        parts: &[NeighborhoodSums],
        lhs: impl Fn(&NeighborhoodSums) -> f64,
        rhs: impl Fn(&NeighborhoodSums) -> f64,
    ) -> Self {
        IdentityCheck {
            lhs: jackknife(parts, &lhs),
            rhs: jackknife(parts, &rhs),
            difference: jackknife(parts, |s| lhs(s) - rhs(s)),
        }
    }

    /// `|lhs − rhs|` within `k` jackknife standard errors of the difference.
    pub fn holds_within(&self, k: f64) -> bool {
        self.difference.value.abs() <= k * self.difference.se
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodSummary {
    pub label: String,
    pub replications: usize,
    /// Eligible cells pooled over replications.
    pub n: usize,
    pub sum: [Estimate; 3],
    pub bar: [Estimate; 3],
    pub tilde: [Estimate; 3],
    pub mean_neighbors: Estimate,
    pub mean_distinct_neighbors: Estimate,
    pub parts: Vec<NeighborhoodSums>,
}

fn per_cell(v: f64, s: &NeighborhoodSums) -> f64 {
    v / s.cells
}

impl NeighborhoodSummary {
    pub fn from_parts(label: impl Into<String>, parts: Vec<NeighborhoodSums>) -> Result<Self> {
        let total_cells: f64 = parts.iter().map(|p| p.count).sum();
        if total_cells < 1.0 {
            return Err(Error::EmptySample);
        }
        let by_f = |g: &dyn Fn(&NeighborhoodSums, usize) -> f64| {
            Characteristic::ALL.map(|f| jackknife(&parts, |s| g(s, f.index())))
        };
        Ok(NeighborhoodSummary {
            label: label.into(),
            replications: parts.len(),
            n: total_cells as usize,
            sum: by_f(&|s, i| per_cell(s.neighbor_sum[i], s)),
            bar: by_f(&|s, i| per_cell(s.neighbor_mean[i], s)),
            tilde: by_f(&|s, i| s.neighbor_sum[i] / s.neighbors),
            mean_neighbors: jackknife(&parts, |s| per_cell(s.neighbors, s)),
            mean_distinct_neighbors: jackknife(&parts, |s| per_cell(s.distinct, s)),
            parts,
        })
    }

    pub fn sum_of(&self, f: Characteristic) -> Estimate {
        self.sum[f.index()]
    }

    pub fn bar_of(&self, f: Characteristic) -> Estimate {
        self.bar[f.index()]
    }

    pub fn tilde_of(&self, f: Characteristic) -> Estimate {
        self.tilde[f.index()]
    }

    /// `E[w f] / E[w]` over eligible cells for the three characteristics.
    pub fn weighted_means(&self, w: Weight) -> [Estimate; 3] {
        Characteristic::ALL.map(|f| {
            let i = f.index();
            match w {
                Weight::N0 => jackknife(&self.parts, |s| s.n0_own[i] / s.n0),
                Weight::N1 => jackknife(&self.parts, |s| s.n1_own[i] / s.n1),
            }
        })
    }

    pub fn typical_means(&self) -> TypicalCellMeans {
        let p = &self.parts;
        TypicalCellMeans {
            corners: jackknife(p, |s| per_cell(s.own[0], s)),
            area: jackknife(p, |s| per_cell(s.own[1], s)),
            perimeter: jackknife(p, |s| per_cell(s.own[2], s)),
            n0: jackknife(p, |s| per_cell(s.n0, s)),
            n1: jackknife(p, |s| per_cell(s.n1, s)),
            neighbors: self.mean_neighbors,
        }
    }

    /// Sum statistic against mean n1 times the n1-weighted typical mean.
    pub fn neighbor_sum_identity(&self, f: Characteristic) -> IdentityCheck {
        let i = f.index();
        IdentityCheck::new(
            &self.parts,
            |s| per_cell(s.neighbor_sum[i], s),
            |s| per_cell(s.n1, s) * (s.n1_own[i] / s.n1),
        )
    }

    /// Corner sum against mean neighbour count times the n0-weighted mean
    /// corner count.
    pub fn corner_sum_identity(&self) -> IdentityCheck {
        IdentityCheck::new(
            &self.parts,
            |s| per_cell(s.neighbor_sum[0], s),
            |s| per_cell(s.neighbors, s) * (s.n0_own[0] / s.n0),
        )
    }

    /// `E[area(x) Σ perimeter(c)]` against `E[perimeter(x) Σ area(c)]`.
    pub fn exchange_identity(&self) -> IdentityCheck {
        IdentityCheck::new(
            &self.parts,
            |s| per_cell(s.area_times_perimeter_sum, s),
            |s| per_cell(s.perimeter_times_area_sum, s),
        )
    }
}

/// Neighbourhood summary pooled over replications (one record list each).
pub fn neighborhood_summary(
    label: &str,
    replications: &[Vec<CellRecord>],
) -> Result<NeighborhoodSummary> {
    let parts = replications
        .iter()
        .map(|r| NeighborhoodSums::from_records(r))
        .collect();
    NeighborhoodSummary::from_parts(label, parts)
}

/// Weighted typical-cell means of corners, area and perimeter.
pub fn weighted_typical_means(
    replications: &[Vec<CellRecord>],
    w: Weight,
) -> Result<[Estimate; 3]> {
    Ok(neighborhood_summary("", replications)?.weighted_means(w))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalCellMeans {
    pub area: Estimate,
    pub perimeter: Estimate,
    pub corners: Estimate,
    pub n0: Estimate,
    pub n1: Estimate,
    pub neighbors: Estimate,
}

pub fn typical_cell_means(replications: &[Vec<CellRecord>]) -> Result<TypicalCellMeans> {
    Ok(neighborhood_summary("", replications)?.typical_means())
}

/// Closed-form neighbourhood sums of the isotropic Poisson line tessellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoreticalPltValues {
    pub la: f64,
    /// `N0 = N1 = C0` sum over the neighbours.
    pub n0_22: f64,
    pub v2_22: f64,
    pub v1_22: f64,
    pub tilde_n0: f64,
    pub tilde_v2: f64,
    pub tilde_v1: f64,
}

/// Mean number of neighbours of the typical PLT cell.
pub const PLT_MEAN_NEIGHBORS: f64 = 4.0;

pub fn plt_theoretical(la: f64) -> Result<TheoreticalPltValues> {
    if !(la > 0.0 && la.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "L_A must be positive, got {la}"
        )));
    }
    // areas of the associated zonoid and its polar body, isotropic case
    let zonoid = la * la / PI;
    let polar = PI.powi(3) / (la * la);
    let n0_22 = 0.5 * zonoid * polar + 12.0;
    let v2_22 = 0.5 * polar;
    let v1_22 = 0.5 * la * polar + 4.0 * la / zonoid;
    Ok(TheoreticalPltValues {
        la,
        n0_22,
        v2_22,
        v1_22,
        tilde_n0: n0_22 / PLT_MEAN_NEIGHBORS,
        tilde_v2: v2_22 / PLT_MEAN_NEIGHBORS,
        tilde_v1: v1_22 / PLT_MEAN_NEIGHBORS,
    })
}

/// Writes the neighbourhood table: one row per statistic, one column pair
/// (value, standard error) per model plus the PLT closed forms.
pub fn write_table_csv<W: Write>(
    mut out: W,
    stit: Option<&NeighborhoodSummary>,
    plt: Option<&NeighborhoodSummary>,
    theory: &TheoreticalPltValues,
) -> io::Result<()> {
    writeln!(out, "statistic,STIT,STIT_se,PLT,PLT_se,PLT_theoretic")?;
    let cell = |e: Option<Estimate>| match e {
        Some(e) => format!("{},{}", e.value, fmt_se(e.se)),
        None => ",".to_string(),
    };
    let theory_sum = [theory.n0_22, theory.v2_22, theory.v1_22];
    let theory_tilde = [theory.tilde_n0, theory.tilde_v2, theory.tilde_v1];
    for f in Characteristic::ALL {
        let i = f.index();
        let rows: [(
            String,
            Box<dyn Fn(&NeighborhoodSummary) -> Estimate>,
            Option<f64>,
        ); 3] = [
            (
                format!("{}_22", f.symbol()),
                Box::new(move |s| s.sum[i]),
                Some(theory_sum[i]),
            ),
            (
                format!("bar_{}", f.symbol()),
                Box::new(move |s| s.bar[i]),
                None,
            ),
            (
                format!("tilde_{}", f.symbol()),
                Box::new(move |s| s.tilde[i]),
                Some(theory_tilde[i]),
            ),
        ];
        for (name, get, th) in rows {
            writeln!(
                out,
                "{name},{},{},{}",
                cell(stit.map(&get)),
                cell(plt.map(&get)),
                th.map(|v| v.to_string()).unwrap_or_default()
            )?;
        }
    }
    let extra: [(
        &str,
        Box<dyn Fn(&NeighborhoodSummary) -> Estimate>,
        Option<f64>,
    ); 6] = [
        (
            "mean_neighbors",
            Box::new(|s| s.mean_neighbors),
            Some(PLT_MEAN_NEIGHBORS),
        ),
        (
            "mean_distinct_neighbors",
            Box::new(|s| s.mean_distinct_neighbors),
            Some(PLT_MEAN_NEIGHBORS),
        ),
        (
            "mean_n0",
            Box::new(|s| s.typical_means().n0),
            Some(PLT_MEAN_NEIGHBORS),
        ),
        (
            "mean_corners",
            Box::new(|s| s.typical_means().corners),
            Some(PLT_MEAN_NEIGHBORS),
        ),
        (
            "mean_area",
            Box::new(|s| s.typical_means().area),
            Some(PI / (theory.la * theory.la)),
        ),
        (
            "mean_perimeter",
            Box::new(|s| s.typical_means().perimeter),
            Some(2.0 * PI / theory.la),
        ),
    ];
    for (name, get, th) in extra {
        writeln!(
            out,
            "{name},{},{},{}",
            cell(stit.map(&get)),
            cell(plt.map(&get)),
            th.map(|v| v.to_string()).unwrap_or_default()
        )?;
    }
    let count =
        |s: Option<&NeighborhoodSummary>| s.map(|s| format!("{},", s.n)).unwrap_or(",".into());
    writeln!(out, "n_cells,{},{},", count(stit), count(plt))?;
    let reps = |s: Option<&NeighborhoodSummary>| {
        s.map(|s| format!("{},", s.replications))
            .unwrap_or(",".into())
    };
    writeln!(out, "replications,{},{},", reps(stit), reps(plt))?;
    Ok(())
}

fn fmt_se(se: f64) -> String {
    if se.is_finite() {
        se.to_string()
    } else {
        String::new()
    }
}
