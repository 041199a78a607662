//! Subcommand implementations. Every command computes all of its outputs
//! before writing any file, and each file is written atomically.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use tesslab_core::cellstats::{
    self, Characteristic, IdentityCheck, NeighborhoodSummary, NeighborhoodSums,
    TheoreticalPltValues,
};
use tesslab_core::complex::{build_complex, build_complex_with, TessellationComplex, Tolerances};
use tesslab_core::geometry::Split;
use tesslab_core::secondorder::{
    default_r_grid, extract_centres, simulate_csr, stoyan_bandwidth, CurveEstimate, MarkSelector,
    MarkedPointPattern, PointPattern, SecondOrderAccumulator,
};
use tesslab_core::{
    tessgen, ConvexPolygon, DirectionLaw, Line, Model, Point2, RectWindow, RngStream, Tessellation,
};

use crate::cellsfile::{write_atomic, CellsFile, CellsHeader, FORMAT_VERSION};
use crate::config::RunConfig;

/// Base seed of one model's replication streams.
///
/// The models get distinct streams so that a `both` run does not feed the
/// same random numbers into PLT and STIT.
pub fn model_seed(seed: u64, model: Model) -> u64 {
    let salt = match model {
        Model::Plt => 0x9E37_79B9_7F4A_7C15,
        Model::Stit => 0xC2B2_AE3D_27D4_EB4F,
    };
    seed ^ salt
}

const CSR_SALT: u64 = 0x1656_67B1_9E37_79F9;

pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .context("building the thread pool")
}

/// Maps `f` over replications in parallel; results keep replication order.
fn per_rep<T: Send>(cfg: &RunConfig, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    let pool = thread_pool(cfg.threads)?;
    pool.install(|| (0..cfg.reps).into_par_iter().map(&f).collect())
}

pub fn simulate_rep(cfg: &RunConfig, model: Model, rep: usize) -> Result<Tessellation> {
    let mut rng = RngStream::new(model_seed(cfg.seed, model), rep as u64);
    Ok(tessgen::simulate(
        model,
        cfg.la,
        &cfg.law,
        &cfg.window,
        &mut rng,
    )?)
}

fn header(cfg: &RunConfig, model: Model, rep: usize) -> CellsHeader {
    CellsHeader {
        version: FORMAT_VERSION,
        model,
        la: cfg.la,
        law: cfg.law.clone(),
        window: cfg.window,
        seed: cfg.seed,
        rep,
    }
}

pub fn cells_file_name(model: Model, rep: usize) -> String {
    format!("cells_{model}_{rep:04}.csv")
}

/// One cells file per model and replication; returns the written paths.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let mut outputs = Vec::new();
    for model in cfg.model.models() {
        let files = per_rep(cfg, |rep| {
            let t = simulate_rep(cfg, model, rep)?;
            Ok(CellsFile {
                header: header(cfg, model, rep),
                cells: t.cells,
            })
        })?;
        let mean = files.iter().map(|f| f.cells.len()).sum::<usize>() as f64 / files.len() as f64;
        eprintln!(
            "{model}: {} replications, {mean:.1} cells on average",
            files.len()
        );
        outputs.extend(
            files
                .into_iter()
                .map(|f| (cells_file_name(model, f.header.rep), f.to_text())),
        );
    }
    write_outputs(&cfg.out, outputs)
}

fn write_outputs(dir: &Path, outputs: Vec<(String, String)>) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut paths = Vec::new();
    for (name, text) in outputs {
        let p = dir.join(name);
        write_atomic(&p, text.as_bytes())?;
        paths.push(p);
    }
    Ok(paths)
}

/// Neighbourhood sums of one realization.
pub fn neighborhood_sums(
    cells: Vec<ConvexPolygon>,
    window: &RectWindow,
) -> Result<NeighborhoodSums> {
    let c = build_complex(cells, window)?;
    Ok(NeighborhoodSums::from_records(&cellstats::minus_sample(&c)))
}

#[derive(Debug, Clone)]
pub struct NeighborReport {
    pub la: f64,
    pub summaries: Vec<(Model, NeighborhoodSummary)>,
    pub theory: TheoreticalPltValues,
}

impl NeighborReport {
    pub fn get(&self, model: Model) -> Option<&NeighborhoodSummary> {
        self.summaries
            .iter()
            .find(|(m, _)| *m == model)
            .map(|(_, s)| s)
    }

    pub fn table_csv(&self) -> String {
        let mut buf = Vec::new();
        cellstats::write_table_csv(
            &mut buf,
            self.get(Model::Stit),
            self.get(Model::Plt),
            &self.theory,
        )
        .expect("writing to memory");
        String::from_utf8(buf).expect("csv is ASCII")
    }

    pub fn identities(&self) -> Vec<(Model, &'static str, &'static str, IdentityCheck)> {
        let mut out = Vec::new();
        for (m, s) in &self.summaries {
            for f in Characteristic::ALL {
                out.push((*m, "neighbor_sum", f.symbol(), s.neighbor_sum_identity(f)));
            }
            out.push((*m, "corner_sum", "C0", s.corner_sum_identity()));
            out.push((*m, "exchange", "V2xV1", s.exchange_identity()));
        }
        out
    }

    pub fn identities_csv(&self) -> String {
        let mut s = String::from(
            "model,identity,characteristic,lhs,lhs_se,rhs,rhs_se,difference,difference_se,within_3se\n",
        );
        for (m, name, f, c) in self.identities() {
            let _ = writeln!(
                s,
                "{m},{name},{f},{},{},{},{},{},{},{}",
                c.lhs.value,
                c.lhs.se,
                c.rhs.value,
                c.rhs.se,
                c.difference.value,
                c.difference.se,
                c.holds_within(3.0)
            );
        }
        s
    }

    /// Rounded human-readable view.
    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        for (m, sum) in &self.summaries {
            let _ = writeln!(
                s,
                "{m}: {} cells from {} replications",
                sum.n, sum.replications
            );
            for f in Characteristic::ALL {
                let (a, b, c) = (sum.sum_of(f), sum.bar_of(f), sum.tilde_of(f));
                let _ = writeln!(
                    s,
                    "  {}_22 {:.4} ({:.4})  bar {:.4} ({:.4})  tilde {:.4} ({:.4})",
                    f.symbol(),
                    a.value,
                    a.se,
                    b.value,
                    b.se,
                    c.value,
                    c.se
                );
            }
            let _ = writeln!(
                s,
                "  mean neighbours {:.4} ({:.4})",
                sum.mean_neighbors.value, sum.mean_neighbors.se
            );
        }
        s
    }
}

/// Neighbourhood statistics from simulated realizations.
pub fn neighbor_report(cfg: &RunConfig) -> Result<NeighborReport> {
    cfg.validate()?;
    let mut summaries = Vec::new();
    for model in cfg.model.models() {
        let parts = per_rep(cfg, |rep| {
            neighborhood_sums(simulate_rep(cfg, model, rep)?.cells, &cfg.window)
        })?;
        summaries.push((model, NeighborhoodSummary::from_parts(model.name(), parts)?));
    }
    Ok(NeighborReport {
        la: cfg.la,
        summaries,
        theory: cellstats::plt_theoretical(cfg.la)?,
    })
}

/// Neighbourhood statistics from cells files, grouped by model.
pub fn neighbor_report_from_files(
    files: &[PathBuf],
    threads: Option<usize>,
) -> Result<NeighborReport> {
    ensure!(!files.is_empty(), "no input files");
    let pool = thread_pool(threads)?;
    let parts: Vec<(Model, f64, NeighborhoodSums)> = pool.install(|| {
        files
            .par_iter()
            .map(|p| {
                let f = CellsFile::read(p)?;
                let s = neighborhood_sums(f.cells, &f.header.window)?;
                Ok((f.header.model, f.header.la, s))
            })
            .collect::<Result<_>>()
    })?;
    let mut summaries = Vec::new();
    let mut la = None;
    for model in [Model::Plt, Model::Stit] {
        let mine: Vec<&(Model, f64, NeighborhoodSums)> =
            parts.iter().filter(|p| p.0 == model).collect();
        if mine.is_empty() {
            continue;
        }
        let l = mine[0].1;
        ensure!(
            mine.iter().all(|p| p.1 == l),
            "{model} files disagree on L_A"
        );
        la.get_or_insert(l);
        let sums = mine.iter().map(|p| p.2).collect();
        summaries.push((model, NeighborhoodSummary::from_parts(model.name(), sums)?));
    }
    let la = la.expect("at least one file");
    Ok(NeighborReport {
        la,
        summaries,
        theory: cellstats::plt_theoretical(la)?,
    })
}

pub fn cmd_neighbor_stats(cfg: &RunConfig, inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let report = if inputs.is_empty() {
        neighbor_report(cfg)?
    } else {
        neighbor_report_from_files(inputs, cfg.threads)?
    };
    print!("{}", report.summary_text());
    write_outputs(
        &cfg.out,
        vec![
            ("table2.csv".into(), report.table_csv()),
            ("identities.csv".into(), report.identities_csv()),
        ],
    )
}

/// Pooled second-order sums with the bandwidth from the pooled intensity.
pub fn pool_second_order(
    patterns: &[MarkedPointPattern],
    r: &[f64],
    threads: Option<usize>,
) -> Result<SecondOrderAccumulator> {
    let n: usize = patterns.iter().map(|p| p.len()).sum();
    let area: f64 = patterns.iter().map(|p| p.pattern().window().area()).sum();
    let kernel = stoyan_bandwidth(n as f64 / area)?;
    let pool = thread_pool(threads)?;
    let accs: Vec<SecondOrderAccumulator> = pool.install(|| {
        patterns
            .par_iter()
            .map(|p| {
                let mut a = SecondOrderAccumulator::new(r.to_vec(), kernel)?;
                a.add_marked(p)?;
                Ok(a)
            })
            .collect::<Result<_>>()
    })?;
    let mut total = SecondOrderAccumulator::new(r.to_vec(), kernel)?;
    for a in &accs {
        total.merge(a)?;
    }
    Ok(total)
}

/// Same as [`pool_second_order`] for unmarked patterns.
pub fn pool_unmarked(
    patterns: &[PointPattern],
    r: &[f64],
    threads: Option<usize>,
) -> Result<SecondOrderAccumulator> {
    let n: usize = patterns.iter().map(|p| p.len()).sum();
    let area: f64 = patterns.iter().map(|p| p.window().area()).sum();
    let kernel = stoyan_bandwidth(n as f64 / area)?;
    let pool = thread_pool(threads)?;
    let accs: Vec<SecondOrderAccumulator> = pool.install(|| {
        patterns
            .par_iter()
            .map(|p| {
                let mut a = SecondOrderAccumulator::new(r.to_vec(), kernel)?;
                a.add_pattern(p)?;
                Ok(a)
            })
            .collect::<Result<_>>()
    })?;
    let mut total = SecondOrderAccumulator::new(r.to_vec(), kernel)?;
    for a in &accs {
        total.merge(a)?;
    }
    Ok(total)
}

pub fn centre_patterns(
    cfg: &RunConfig,
    model: Model,
    sub: &RectWindow,
) -> Result<Vec<MarkedPointPattern>> {
    per_rep(cfg, |rep| {
        let c = build_complex(simulate_rep(cfg, model, rep)?.cells, &cfg.window)?;
        Ok(extract_centres(&c, sub)?)
    })
}

pub fn csr_patterns(cfg: &RunConfig, intensity: f64) -> Result<Vec<PointPattern>> {
    per_rep(cfg, |rep| {
        let mut rng = RngStream::new(cfg.seed ^ CSR_SALT, rep as u64);
        Ok(simulate_csr(intensity, &cfg.window, &mut rng)?)
    })
}

fn curve_text(c: &CurveEstimate) -> String {
    let mut buf = Vec::new();
    c.write_csv(&mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is ASCII")
}

/// Curves per model: `(file stem, curve)`.
pub fn second_order_curves(
    acc: &SecondOrderAccumulator,
    tag: &str,
    marked: bool,
) -> Result<Vec<(String, CurveEstimate)>> {
    let mut out = vec![
        (format!("K_{tag}"), acc.k_function()?),
        (format!("g_{tag}"), acc.pcf()?),
    ];
    if marked {
        for s in MarkSelector::ALL {
            out.push((format!("kmm_{}_{tag}", s.name()), acc.kmm(s)?));
        }
    }
    Ok(out)
}

pub fn cmd_second_order(
    cfg: &RunConfig,
    selftest_csr: bool,
    inputs: &[PathBuf],
) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let mut curves = Vec::new();
    if selftest_csr {
        let intensity = cfg.la * cfg.la / PI;
        let r = default_r_grid(&cfg.window);
        let acc = pool_unmarked(&csr_patterns(cfg, intensity)?, &r, cfg.threads)?;
        curves.extend(second_order_curves(&acc, "csr", false)?);
    } else {
        let sub = cfg
            .sub_window
            .context("second-order statistics need a sub-window")?;
        if let Some(m) = cfg.margin() {
            if m < 10.0 / cfg.la {
                eprintln!(
                    "warning: sub-window margin {m} is below 10/L_A = {}; cells crossing the window edge may bias the marks",
                    10.0 / cfg.la
                );
            }
        }
        let r = default_r_grid(&sub);
        let mut by_model: Vec<(Model, Vec<MarkedPointPattern>)> = Vec::new();
        if inputs.is_empty() {
            for model in cfg.model.models() {
                by_model.push((model, centre_patterns(cfg, model, &sub)?));
            }
        } else {
            let pool = thread_pool(cfg.threads)?;
            let loaded: Vec<(Model, MarkedPointPattern)> = pool.install(|| {
                inputs
                    .par_iter()
                    .map(|p| {
                        let f = CellsFile::read(p)?;
                        let c = build_complex(f.cells, &f.header.window)?;
                        Ok((f.header.model, extract_centres(&c, &sub)?))
                    })
                    .collect::<Result<_>>()
            })?;
            for model in [Model::Plt, Model::Stit] {
                let ps: Vec<MarkedPointPattern> = loaded
                    .iter()
                    .filter(|(m, _)| *m == model)
                    .map(|(_, p)| p.clone())
                    .collect();
                if !ps.is_empty() {
                    by_model.push((model, ps));
                }
            }
        }
        for (model, patterns) in &by_model {
            let acc = pool_second_order(patterns, &r, cfg.threads)?;
            eprintln!(
                "{model}: {} centres in {} patterns, bandwidth {:.4}",
                patterns.iter().map(|p| p.len()).sum::<usize>(),
                patterns.len(),
                acc.kernel().bandwidth()
            );
            curves.extend(second_order_curves(&acc, model.name(), true)?);
        }
    }
    write_outputs(
        &cfg.out,
        curves
            .iter()
            .map(|(name, c)| (format!("{name}.csv"), curve_text(c)))
            .collect(),
    )
}

pub fn table1_text(la: f64) -> Result<String> {
    let t = cellstats::plt_theoretical(la)?;
    let mut s = String::new();
    let _ = writeln!(s, "L_A {la}");
    for (name, v) in [
        ("N0_22", t.n0_22),
        ("V2_22", t.v2_22),
        ("V1_22", t.v1_22),
        ("tilde_N0", t.tilde_n0),
        ("tilde_V2", t.tilde_v2),
        ("tilde_V1", t.tilde_v1),
    ] {
        let _ = writeln!(s, "{name} {v:.5}");
    }
    Ok(s)
}

pub fn table1_csv(la: f64) -> Result<String> {
    let t = cellstats::plt_theoretical(la)?;
    Ok(format!(
        "statistic,value\nN0_22,{}\nV2_22,{}\nV1_22,{}\ntilde_N0,{}\ntilde_V2,{}\ntilde_V1,{}\n",
        t.n0_22, t.v2_22, t.v1_22, t.tilde_n0, t.tilde_v2, t.tilde_v1
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, outcome: Result<String>) -> Self {
        match outcome {
            Ok(detail) => Check {
                name: name.into(),
                passed: true,
                detail,
            },
            Err(e) => Check {
                name: name.into(),
                passed: false,
                detail: format!("{e:#}"),
            },
        }
    }
}

fn small_complexes(model: Model, tol: Tolerances, reps: usize) -> Result<Vec<TessellationComplex>> {
    let window = RectWindow::square(-25.0, 25.0)?;
    (0..reps)
        .map(|rep| {
            let mut rng = RngStream::new(model_seed(20_240, model), rep as u64);
            let t = tessgen::simulate(model, 1.0, &DirectionLaw::Isotropic, &window, &mut rng)?;
            Ok(build_complex_with(t.cells, &window, tol)?)
        })
        .collect()
}

fn check_geometry() -> Result<String> {
    let sq = RectWindow::square(0.0, 1.0)?.to_polygon();
    ensure!(
        sq.area() == 1.0 && sq.perimeter() == 4.0,
        "unit square measures"
    );
    ensure!(
        sq.centroid() == Point2::new(0.5, 0.5),
        "unit square centroid"
    );
    let tri = ConvexPolygon::new(vec![
        Point2::new(0.0, 0.0),
        Point2::new(3.0, 0.0),
        Point2::new(0.0, 3.0),
    ])?;
    ensure!(
        (tri.centroid().dist(Point2::new(1.0, 1.0))) < 1e-15,
        "triangle centroid"
    );
    let mut rng = RngStream::new(5, 5);
    let law = DirectionLaw::Isotropic;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let line: Line = tessgen::sample_dividing_line(&sq, &law, &mut rng);
        if let Split::Parts(a, b) = sq.split(&line)? {
            worst = worst.max((a.area() + b.area() - 1.0).abs());
        }
    }
    ensure!(worst < 1e-12, "split loses area {worst}");
    Ok(format!("split area error {worst:.1e}"))
}

fn check_euler(model: Model, tol: Tolerances) -> Result<String> {
    let mut detail = Vec::new();
    for c in small_complexes(model, tol, 3)? {
        let (v, e, f) = c.interior_counts();
        let chi = v as i64 - e as i64 + f as i64;
        ensure!(chi == 1, "V - E + F = {chi} (V {v}, E {e}, F {f})");
        detail.push(f.to_string());
    }
    Ok(format!(
        "V - E + F = 1 on windows with {} cells",
        detail.join(", ")
    ))
}

fn check_vertices(model: Model, tol: Tolerances) -> Result<String> {
    let want = match model {
        Model::Plt => (4, 2),
        Model::Stit => (3, 1),
    };
    let mut count = 0;
    for c in small_complexes(model, tol, 3)? {
        for (&k, &n) in &c.vertex_structure() {
            ensure!(
                k == want,
                "{n} interior vertices with (degree, collinear pairs) = {k:?}"
            );
            count += n;
        }
    }
    Ok(format!(
        "{count} interior vertices, all with (degree, collinear pairs) = {want:?}"
    ))
}

fn check_identities() -> Result<String> {
    let cfg = RunConfig {
        model: crate::config::ModelChoice::Both,
        la: 1.0,
        law: DirectionLaw::Isotropic,
        window: RectWindow::square(-40.0, 40.0)?,
        sub_window: None,
        reps: 16,
        seed: 20_240,
        threads: None,
        out: PathBuf::new(),
    };
    let report = neighbor_report(&cfg)?;
    let ids = report.identities();
    let mut worst: f64 = 0.0;
    for (m, name, f, c) in &ids {
        let z = c.difference.value.abs() / c.difference.se;
        ensure!(
            c.holds_within(3.0),
            "{m} {name} {f}: difference {} with se {}",
            c.difference.value,
            c.difference.se
        );
        worst = worst.max(z);
    }
    Ok(format!(
        "{} identities within 3 standard errors (largest {worst:.2})",
        ids.len()
    ))
}

fn check_table1() -> Result<String> {
    let t = cellstats::plt_theoretical(1.0)?;
    ensure!((t.n0_22 - (PI * PI / 2.0 + 12.0)).abs() < 1e-12, "N0_22");
    ensure!((t.v2_22 - PI.powi(3) / 2.0).abs() < 1e-12, "V2_22");
    ensure!(
        (t.v1_22 - (PI.powi(3) / 2.0 + 4.0 * PI)).abs() < 1e-12,
        "V1_22"
    );
    Ok(format!("{:.5}, {:.5}, {:.5}", t.n0_22, t.v2_22, t.v1_22))
}

/// Fast invariant suite; `eps_point` overrides the vertex tolerance.
pub fn selfcheck(eps_point: Option<f64>) -> Vec<Check> {
    let mut tol = Tolerances::default();
    if let Some(e) = eps_point {
        tol.eps_point = e;
    }
    vec![
        Check::new("geometry oracles", check_geometry()),
        Check::new("table 1 closed forms", check_table1()),
        Check::new("plt euler characteristic", check_euler(Model::Plt, tol)),
        Check::new("stit euler characteristic", check_euler(Model::Stit, tol)),
        Check::new("plt vertex structure", check_vertices(Model::Plt, tol)),
        Check::new("stit vertex structure", check_vertices(Model::Stit, tol)),
        Check::new("neighbourhood identities", check_identities()),
    ]
}

pub fn cmd_selfcheck(eps_point: Option<f64>) -> Result<()> {
    if let Some(e) = eps_point {
        ensure!(e > 0.0 && e.is_finite(), "--eps-point must be positive");
    }
    let checks = selfcheck(eps_point);
    for c in &checks {
        println!(
            "[{}] {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        bail!("{failed} of {} checks failed", checks.len());
    }
    Ok(())
}
