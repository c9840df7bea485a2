//! Checks the success-probability bounds and the free-energy bound on small
//! codes across a grid of error rates.
use rcim::oracle::{default_lemma_grid, lemma_check, SmallCSSCode, ToyCode, EXACT_TOLERANCE};

fn main() -> rcim::Result<()> {
    for toy in [ToyCode::Repetition(3), ToyCode::Toric(2), ToyCode::Toric(3)] {
        let code = SmallCSSCode::new(toy.to_string(), toy.build()?)?;
        let r = lemma_check(&code, &default_lemma_grid(), EXACT_TOLERANCE)?;
        println!("{} (|H1| = {}): pass = {}", r.code, r.homology_order, r.pass);
        for pt in &r.points {
            println!("  p={:.2} success={:.5} overlap={:.5} lower={:.5}", pt.p, pt.success, pt.overlap, pt.lower);
        }
    }
    Ok(())
}
