//! Bootstrap error of a nonlinear statistic (a ratio of means).
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rand_xoshiro::Xoshiro256PlusPlus;
use rcim::analysis::bootstrap;

fn main() -> rcim::Result<()> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
    let num = Normal::new(2.0, 0.5).expect("valid normal");
    let den = Normal::new(4.0, 0.5).expect("valid normal");
    let data: Vec<(f64, f64)> = (0..64).map(|_| (num.sample(&mut rng), den.sample(&mut rng))).collect();
    let ratio = |d: &[(f64, f64)]| {
        let (a, b) = d.iter().fold((0.0, 0.0), |(x, y), (u, v)| (x + u, y + v));
        a / b
    };
    let est = bootstrap(&data, ratio, 1000, &mut rng)?;
    println!("ratio = {:.4} ± {:.4} (plain {:.4})", est.value, est.error, ratio(&data));
    Ok(())
}
