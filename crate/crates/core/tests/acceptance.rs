//! End-to-end acceptance suite. Prints one pass/fail line per criterion and
//! fails if any criterion fails.

use std::f64::consts::TAU;
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::Rng;

use salem_core::cantor::{
    ancestor_ratio, construct, deviation_x, level_measure, verify_measure, CantorMeasure,
    ConstructionParams,
};
use salem_core::dimension::{
    energy_direct, energy_fourier, fourier_dim_estimate, hausdorff_dim_estimate, integer_grid,
    uniform_interval_hat, EnergySpec,
};
use salem_core::fourier::{circle_sigma_hat, fourier_grid, fourier_product, weighted_circle_product_hat};
use salem_core::measure::fourier_atoms;
use salem_core::rng::{derive_key, stream};
use salem_core::sumset::{cone_fixture, cover_schedule, theorem_pipeline, PipelineConfig, PipelineMode, Shape, SumsetSpec};
use salem_core::{AtomMeasure, GridMeasure};

const SEED: u64 = 42;
const WINDOW: (f64, f64) = (16.0, 4096.0);

struct Outcome {
    id: usize,
    pass: bool,
    detail: String,
    /// Deterministic numerical output compared across runs.
    artifact: String,
}

fn outcome(id: usize, pass: bool, detail: String, artifact: String) -> Outcome {
    Outcome {
        id,
        pass,
        detail,
        artifact,
    }
}

fn half_params(seed: u64) -> ConstructionParams {
    ConstructionParams::new(0.5, 4, 9, seed).unwrap().with_k_max(4096)
}

fn construction(seed: u64) -> (Outcome, CantorMeasure) {
    let p = half_params(seed);
    assert!(p.branch.iter().all(|&n| n == 4) && p.keep.iter().all(|&t| t == 2));
    let start = Instant::now();
    let cm = construct(&p, None).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    // 60 s at 8 cores, scaled to the cores present
    let budget = 60.0 * (8.0 / cores as f64).max(1.0);
    let attempts: Vec<u32> = cm.certificates().iter().map(|c| c.attempts).collect();
    let max_retries = attempts.iter().map(|a| a - 1).max().unwrap();
    let pass = max_retries <= 10 && secs <= budget;
    let o = outcome(
        1,
        pass,
        format!("attempts per level {attempts:?}, {secs:.1} s (budget {budget:.0} s on {cores} cores)"),
        cm.to_json(),
    );
    (o, cm)
}

fn certificates(cm: &CantorMeasure) -> Outcome {
    let rep = verify_measure(cm).unwrap();
    outcome(
        2,
        rep.violations == 0,
        format!("{} levels rechecked, {} violations", rep.levels.len(), rep.violations),
        serde_json::to_string(&rep).unwrap(),
    )
}

fn telescoping(cm: &CantorMeasure) -> Outcome {
    let p = cm.params();
    let mut rng = stream(derive_key(SEED, &[3]), 0);
    let mut worst = 0.0f64;
    for j in 0..cm.depth() {
        let offsets = cm.offsets(j).unwrap();
        let sets = &cm.levels()[j].digit_sets;
        let (a, b) = (level_measure(cm, j).unwrap(), level_measure(cm, j + 1).unwrap());
        for _ in 0..100 {
            let xi = p.d0 * rng.gen_range(1..=p.k_max) as f64;
            let dev = deviation_x(j, &offsets, sets, xi, p).unwrap();
            let diff = (fourier_grid(&b, xi) - fourier_grid(&a, xi)).norm();
            worst = worst.max((dev - diff).abs());
        }
    }
    outcome(3, worst <= 1e-10, format!("max discrepancy {worst:.2e}"), format!("{worst:e}"))
}

fn interval_masses(cm: &CantorMeasure) -> Outcome {
    let mut checked = 0usize;
    let mut bad = 0usize;
    for j in 0..=cm.depth() {
        let want = BigRational::new(BigInt::from(1), BigInt::from(cm.params().count(j)));
        for m in cm.offsets(j).unwrap() {
            let (mass, _) = ancestor_ratio(cm, j, m).unwrap();
            checked += 1;
            if mass != want {
                bad += 1;
            }
        }
    }
    outcome(4, bad == 0, format!("{checked} ancestor cells, {bad} mismatches"), format!("{checked} {bad}"))
}

fn fourier_estimate(hat: impl Fn(f64) -> Complex64 + Sync, zeta0: Option<f64>) -> f64 {
    let grid = integer_grid(WINDOW.0 as u64, WINDOW.1 as u64);
    fourier_dim_estimate(hat, &grid, WINDOW, zeta0, 1).unwrap().0
}

fn dimensions(cm: &CantorMeasure) -> Outcome {
    let dh = hausdorff_dim_estimate(cm).unwrap();
    let mu = level_measure(cm, cm.depth()).unwrap();
    let df = fourier_estimate(|xi| fourier_grid(&mu, xi), Some(cm.params().zeta0));
    let pass = (dh - 0.5).abs() <= 0.05 && (df - 0.5).abs() <= 0.15;
    outcome(5, pass, format!("hausdorff {dh:.4}, fourier {df:.4}"), format!("{dh:e} {df:e}"))
}

fn product_measure_check(seed: u64) -> Outcome {
    let nu = GridMeasure::self_similar(3, &[0, 2], 8).unwrap().discretize();
    let cm = construct(&half_params(seed), Some(&nu)).unwrap();
    let mu = level_measure(&cm, cm.depth()).unwrap();
    let z = Some(cm.params().zeta0);
    let plain = fourier_estimate(|xi| fourier_grid(&mu, xi), z);
    let prod = fourier_estimate(|xi| fourier_product(&mu, &nu, xi), z);
    let alone = fourier_estimate(|xi| fourier_atoms(&nu, xi), None);
    let pass = prod >= plain - 0.1 && alone <= 0.05;
    outcome(
        6,
        pass,
        format!("product {prod:.4}, plain {plain:.4}, nu alone {alone:.4}"),
        format!("{} {prod:e} {plain:e} {alone:e}", cm.to_json()),
    )
}

fn energies() -> Outcome {
    let n = 1usize << 12;
    let pts: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let m = AtomMeasure::uniform(&pts, 1.0).unwrap();
    let mut worst = 0.0f64;
    let mut art = String::new();
    for s in [0.3, 0.5, 0.7] {
        let spec = EnergySpec::new(s, 1, 1e4).with_mollify(1.0 / n as f64);
        let d = energy_direct(&m, &spec).unwrap().value;
        let f = energy_fourier(|xi: f64| uniform_interval_hat(0.0, 1.0, xi), &spec).unwrap().value;
        worst = worst.max((f / d - 1.0).abs());
        art += &format!("{d:e} {f:e} ");
    }
    let n = 1usize << 14;
    let pts: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let m = AtomMeasure::uniform(&pts, 1.0).unwrap();
    let half = energy_direct(&m, &EnergySpec::new(0.5, 1, 1.0).with_mollify(1.0 / n as f64)).unwrap().value;
    let pass = worst < 0.05 && (half - 8.0 / 3.0).abs() < 1e-3;
    outcome(
        7,
        pass,
        format!("max relative gap {worst:.4}, I_1/2 = {half:.6}"),
        art + &format!("{half:e}"),
    )
}

fn circle() -> Outcome {
    let radii = AtomMeasure::from_pairs([(1.0, 0.5), (2.0, 0.5)]).unwrap();
    let bound = 2.0 * radii.atoms().iter().map(|a| a.weight * a.position.sqrt()).sum::<f64>() + 0.1;
    let mut c = 0.0f64;
    let mut peak = 0.0f64;
    for i in 0..32 {
        let rho = 8.0 * 128f64.powf(i as f64 / 31.0);
        let lead = 2.0 / rho.sqrt() * (TAU * (rho - 0.125)).cos();
        c = c.max((circle_sigma_hat(rho) - lead).abs() * rho.powf(1.5));
        let v = weighted_circle_product_hat(&radii, [rho * 0.6, rho * 0.8]).unwrap();
        peak = peak.max(rho.sqrt() * v.norm());
    }
    outcome(
        8,
        c < 5.0 && peak <= bound,
        format!("fitted C {c:.4}, max |xi|^(1/2)|transform| {peak:.4} vs bound {bound:.4}"),
        format!("{c:e} {peak:e}"),
    )
}

fn positive_sumset(seed: u64) -> (Outcome, f64) {
    let p = ConstructionParams::new(0.6, 4, 8, seed).unwrap().with_k_max(4096);
    let cm = construct(&p, None).unwrap();
    let r = Shape::Grid {
        grid: level_measure(&cm, 8).unwrap(),
    };
    let y = Shape::Atoms {
        measure: AtomMeasure::dirac(1.0, 1.0).unwrap(),
    };
    let z = Shape::Net {
        lo: 0.0,
        hi: 1.0,
        count: 4096,
    };
    let mut cfg = PipelineConfig::new(PipelineMode::Lebesgue);
    cfg.cover_floor = 0.5;
    let rep = theorem_pipeline(&r, &y, &z, 1, &cfg).unwrap();
    let l2 = rep.l2.as_ref().unwrap();
    let cover = rep.cover.as_ref().unwrap();
    let pass = l2.rate < 0.7 && cover.stabilized;
    let o = outcome(
        9,
        pass,
        format!(
            "increment rate {:.3} per doubling, cover {:.4} .. {:.4}, max change {:.4}",
            l2.rate,
            cover.values[0],
            cover.values.last().unwrap(),
            cover.changes.iter().copied().fold(0.0, f64::max)
        ),
        serde_json::to_string(&rep).unwrap(),
    );
    (o, cover.loglog_slope)
}

fn cone(positive_slope: f64) -> Outcome {
    let (r, y, z) = cone_fixture(6).unwrap();
    let sets = SumsetSpec::new(r, y, z, 0.0, 2);
    let deltas: Vec<f64> = (6..=12).map(|k| 2f64.powi(-k)).collect();
    let sched = cover_schedule(&sets, &deltas, 0.0).unwrap();
    let slope = sched.loglog_slope;
    let pass = (slope - 0.5).abs() <= 0.15 && positive_slope.abs() < 0.1 && !sched.stabilized;
    outcome(
        10,
        pass,
        format!("cone slope {slope:.4}, positive-case slope {positive_slope:.4}"),
        serde_json::to_string(&sched).unwrap(),
    )
}

fn weak_convergence(cm: &CantorMeasure) -> Outcome {
    let ts: Vec<f64> = (0..10_000).map(|i| 1.0 + i as f64 / 9_999.0).collect();
    let mut worst_ratio = 0.0f64;
    for j in 0..cm.depth() {
        let (a, b) = (level_measure(cm, j).unwrap(), level_measure(cm, j + 1).unwrap());
        let gap = ts.iter().map(|&t| (b.cdf(t) - a.cdf(t)).abs()).fold(0.0, f64::max);
        worst_ratio = worst_ratio.max(gap * cm.params().count(j) as f64 / 2.0);
    }
    outcome(
        11,
        worst_ratio <= 1.0,
        format!("max gap / (2/T_j) = {worst_ratio:.4}"),
        format!("{worst_ratio:e}"),
    )
}

fn run_all(seed: u64) -> Vec<Outcome> {
    let (c1, cm) = construction(seed);
    let c2 = certificates(&cm);
    let c3 = telescoping(&cm);
    let c4 = interval_masses(&cm);
    let c5 = dimensions(&cm);
    let c6 = product_measure_check(seed);
    let c7 = energies();
    let c8 = circle();
    let (c9, slope9) = positive_sumset(seed);
    let c10 = cone(slope9);
    let c11 = weak_convergence(&cm);
    vec![c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11]
}

#[test]
fn acceptance_criteria() {
    let first = run_all(SEED);
    let second = run_all(SEED);
    let same = first.iter().zip(&second).all(|(a, b)| a.artifact == b.artifact);
    let differing: Vec<usize> = first
        .iter()
        .zip(&second)
        .filter(|(a, b)| a.artifact != b.artifact)
        .map(|(a, _)| a.id)
        .collect();
    let mut results: Vec<(usize, bool, String)> = first.into_iter().map(|o| (o.id, o.pass, o.detail)).collect();
    results.push((
        12,
        same,
        format!("two seeded runs of criteria 1-10 byte-identical; differing: {differing:?}"),
    ));
    for (id, pass, detail) in &results {
        println!("criterion {id:>2}: {} ({detail})", if *pass { "PASS" } else { "FAIL" });
    }
    let failed: Vec<usize> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
