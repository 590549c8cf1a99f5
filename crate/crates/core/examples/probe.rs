use std::time::Instant;

use revlab_core::bounds::GoodPair;
use revlab_core::continuity::{prohorov, DiscreteMeasureKD};
use revlab_core::optrev::{monrev_lp, rev_lp, srev, FiniteJoint};
use revlab_core::{Dist1D, RevOptions};

fn main() {
    let opts = RevOptions::default();
    for n in [8usize, 10, 12] {
        let d = Dist1D::equal_revenue(1.0, 10.0).unwrap().discretize(n).unwrap();
        let j = FiniteJoint::product(&d, &d).unwrap();
        let t = Instant::now();
        let v = rev_lp(&j, &opts).unwrap().value;
        println!("rev_lp er {n}x{n}: {:?} value {v:.6}", t.elapsed());
    }
    for n in [10usize, 12] {
        let d = Dist1D::uniform(0.0, 1.0).unwrap().discretize(n).unwrap();
        let j = FiniteJoint::product(&d, &d).unwrap();
        let t = Instant::now();
        let v = rev_lp(&j, &opts).unwrap().value;
        println!("rev_lp uniform {n}x{n}: {:?} value {v:.6}", t.elapsed());
        let t = Instant::now();
        let m = monrev_lp(&j, &opts).unwrap().value;
        println!("monrev_lp uniform {n}x{n}: {:?} value {m:.6}", t.elapsed());
    }
    let d = Dist1D::equal_revenue(1.0, 50.0).unwrap().discretize(10_000).unwrap();
    let t = Instant::now();
    let m = d.myerson_optimal();
    println!("myerson 10k atoms: {:?} rev {:.6}", t.elapsed(), m.revenue);

    let pair = GoodPair::new(
        Dist1D::uniform(0.0, 1.0).unwrap(),
        Dist1D::exponential(1.0).unwrap(),
    )
    .unwrap();
    let t = Instant::now();
    let s = pair.sup_i(0.5, 1.0, 256).unwrap();
    println!("sup_i 256: {:?} value {:.6}", t.elapsed(), s.value);

    let grid = |k: u64| -> DiscreteMeasureKD {
        let pts: Vec<Vec<f64>> =
            (0..25).map(|i| vec![(i % 5) as f64 * 0.3 + 0.01 * k as f64, (i / 5) as f64 * 0.3]).collect();
        let probs = vec![0.04; 25];
        DiscreteMeasureKD::new(pts, probs).unwrap()
    };
    let (x, y) = (grid(0), grid(7));
    let t = Instant::now();
    let p = prohorov(&x, &y).unwrap();
    println!("prohorov 25x25: {:?} distance {:.6}", t.elapsed(), p.distance);

    let d = Dist1D::equal_revenue(1.0, 10.0).unwrap().discretize(12).unwrap();
    let j = FiniteJoint::product(&d, &d).unwrap();
    let t = Instant::now();
    let s = srev(&j).unwrap();
    println!("srev 12x12: {:?} value {:.6}", t.elapsed(), s.value);
}
