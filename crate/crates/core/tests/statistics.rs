use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::Rng;
use tesslab_core::cellstats::{self, neighborhood_summary, CellRecord, Characteristic, Weight};
use tesslab_core::complex::build_complex;
use tesslab_core::secondorder::{
    default_r_grid, simulate_csr, stoyan_bandwidth, uniform_r_grid, MarkSelector,
    MarkedPointPattern, Marks, SecondOrderAccumulator,
};
use tesslab_core::stats::{ks_critical_value, ks_distance};
use tesslab_core::{tessgen, DirectionLaw, Model, RectWindow, RngStream};

fn records(model: Model, w: &RectWindow, seed: u64, reps: u64) -> Vec<Vec<CellRecord>> {
    (0..reps)
        .map(|i| {
            let t = tessgen::simulate(
                model,
                1.0,
                &DirectionLaw::Isotropic,
                w,
                &mut RngStream::new(seed, i),
            )
            .unwrap();
            cellstats::minus_sample(&build_complex(t.cells, w).unwrap())
        })
        .collect()
}

#[test]
fn typical_cell_means_at_unit_density() {
    let w = RectWindow::square(-60.0, 60.0).unwrap();
    for (model, neighbours) in [(Model::Plt, 4.0), (Model::Stit, 6.0)] {
        let recs = records(model, &w, 71, 12);
        let m = cellstats::typical_cell_means(&recs).unwrap();
        assert!(
            m.corners.within(4.0, 3.0),
            "{model} corners {:?}",
            m.corners
        );
        assert!(m.n0.within(neighbours, 3.0), "{model} n0 {:?}", m.n0);
        assert!(
            m.neighbors.within(neighbours, 3.0),
            "{model} neighbours {:?}",
            m.neighbors
        );
        assert!(
            (m.area.value - PI).abs() <= 3.0 * m.area.se,
            "{model} area {:?}",
            m.area
        );
        assert!(
            (m.perimeter.value - 2.0 * PI).abs() <= 3.0 * m.perimeter.se,
            "{model} perimeter {:?}",
            m.perimeter
        );
    }
}

#[test]
fn summary_identities_and_ordering() {
    let w = RectWindow::square(-60.0, 60.0).unwrap();
    for model in [Model::Plt, Model::Stit] {
        let s = neighborhood_summary(model.name(), &records(model, &w, 72, 12)).unwrap();
        for f in Characteristic::ALL {
            let ratio = s.sum_of(f).value / s.mean_neighbors.value;
            assert!((s.tilde_of(f).value - ratio).abs() <= 1e-12 * ratio);
            assert!(s.bar_of(f).value > s.tilde_of(f).value, "{model} {f:?}");
            assert!(
                s.neighbor_sum_identity(f).holds_within(3.0),
                "{model} {f:?}"
            );
        }
        assert!(s.corner_sum_identity().holds_within(3.0), "{model}");
        assert!(s.exchange_identity().holds_within(3.0), "{model}");
    }
}

#[test]
fn plt_weighted_means_match_closed_forms() {
    let w = RectWindow::square(-80.0, 80.0).unwrap();
    let recs = records(Model::Plt, &w, 73, 16);
    let t = cellstats::plt_theoretical(1.0).unwrap();
    let m = cellstats::weighted_typical_means(&recs, Weight::N0).unwrap();
    assert!(
        m[0].within(t.tilde_n0, 3.0),
        "corners {:?} vs {}",
        m[0],
        t.tilde_n0
    );
    assert!(
        m[1].within(t.tilde_v2, 3.0),
        "area {:?} vs {}",
        m[1],
        t.tilde_v2
    );
    assert!(
        m[2].within(t.tilde_v1, 3.0),
        "perimeter {:?} vs {}",
        m[2],
        t.tilde_v1
    );
}

#[test]
fn typical_cell_distributions_coincide() {
    let w = RectWindow::square(-100.0, 100.0).unwrap();
    let reps = 40;
    let mut samples = Vec::new();
    for model in [Model::Plt, Model::Stit] {
        let mut areas = Vec::new();
        let mut perimeters = Vec::new();
        for (i, r) in records(model, &w, 74, reps).iter().enumerate() {
            let eligible: Vec<&CellRecord> = r.iter().filter(|c| c.eligible).collect();
            let mut rng = RngStream::new(75, i as u64);
            for k in sample(&mut rng, eligible.len(), 250) {
                areas.push(eligible[k].area);
                perimeters.push(eligible[k].perimeter);
            }
        }
        samples.push((areas, perimeters));
    }
    let crit = ks_critical_value(10_000, 10_000, 0.01);
    let d_area = ks_distance(&samples[0].0, &samples[1].0);
    let d_per = ks_distance(&samples[0].1, &samples[1].1);
    assert!(d_area < crit, "area KS {d_area} vs {crit}");
    assert!(d_per < crit, "perimeter KS {d_per} vs {crit}");
}

#[test]
fn csr_pair_correlation_is_one() {
    let w = RectWindow::square(-50.0, 50.0).unwrap();
    let r = default_r_grid(&w);
    let k = stoyan_bandwidth(0.3).unwrap();
    let mut acc = SecondOrderAccumulator::new(r.clone(), k).unwrap();
    for i in 0..100 {
        acc.add_pattern(&simulate_csr(0.3, &w, &mut RngStream::new(81, i)).unwrap())
            .unwrap();
    }
    let g = acc.pcf().unwrap();
    let r_max = r[r.len() - 1];
    for (i, &ri) in r.iter().enumerate() {
        if ri >= k.bandwidth() && ri <= r_max / 2.0 {
            let v = g.values[i].unwrap();
            assert!((v - 1.0).abs() <= 0.05, "g({ri}) = {v}");
        }
    }
    // pcf and K agree through K(r) = ∫ 2πs g(s) ds
    let kf = acc.k_function().unwrap();
    let mut integral = 0.0;
    for i in 1..r.len() {
        let f = |j: usize| 2.0 * PI * r[j] * g.values[j].unwrap_or(0.0);
        integral += 0.5 * (f(i - 1) + f(i)) * (r[i] - r[i - 1]);
        if r[i] >= 5.0 * k.bandwidth() && r[i] <= r_max / 2.0 {
            let kv = kf.values[i].unwrap();
            assert!(
                (integral / kv - 1.0).abs() <= 0.02,
                "r {}: {integral} vs {kv}",
                r[i]
            );
        }
    }
}

#[test]
fn csr_k_function_within_envelopes() {
    let w = RectWindow::square(0.0, 1.0).unwrap();
    let r = default_r_grid(&w);
    let k = stoyan_bandwidth(100.0).unwrap();
    let curves: Vec<Vec<f64>> = (0..100)
        .map(|i| {
            let mut acc = SecondOrderAccumulator::new(r.clone(), k).unwrap();
            acc.add_pattern(&simulate_csr(100.0, &w, &mut RngStream::new(82, i)).unwrap())
                .unwrap();
            acc.k_function()
                .unwrap()
                .values
                .into_iter()
                .map(Option::unwrap)
                .collect()
        })
        .collect();
    // below r = 0.01 a pattern holds fewer than one close pair on average
    for (j, &rj) in r.iter().enumerate().filter(|(_, &rj)| rj >= 0.01) {
        let vals: Vec<f64> = curves.iter().map(|c| c[j]).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let theory = PI * rj * rj;
        assert!(
            lo <= theory && theory <= hi,
            "r {rj}: πr² = {theory} outside [{lo}, {hi}]"
        );
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 99.0).sqrt();
        assert!(
            (mean - theory).abs() <= 3.0 * sd / 10.0 + 1e-12,
            "r {rj}: mean {mean} vs {theory}"
        );
    }
}

#[test]
fn independent_marks_give_flat_mark_correlation() {
    let w = RectWindow::square(-50.0, 50.0).unwrap();
    let r = uniform_r_grid(10.0, 101).unwrap();
    let k = stoyan_bandwidth(0.3).unwrap();
    let mut acc = SecondOrderAccumulator::new(r.clone(), k).unwrap();
    for i in 0..100 {
        let mut rng = RngStream::new(83, i);
        let p = simulate_csr(0.3, &w, &mut rng).unwrap();
        let marks = (0..p.len())
            .map(|_| Marks {
                area: rng.random_range(0.0..6.0),
                perimeter: rng.random_range(3.0..9.0),
                corners: rng.random_range(3..10),
            })
            .collect();
        acc.add_marked(&MarkedPointPattern::new(p, marks).unwrap())
            .unwrap();
    }
    for s in MarkSelector::ALL {
        let c = acc.kmm(s).unwrap();
        for (i, &ri) in r.iter().enumerate() {
            if ri >= 0.5 {
                let v = c.values[i].unwrap();
                assert!((v - 1.0).abs() <= 0.05, "{} k_mm({ri}) = {v}", s.name());
            }
        }
    }
}
