//! Nishimori temperatures along the disorder axis and the Kramers-Wannier
//! dual map that pairs the clean 4-body and 6-body models.
use rcim::analysis::{dual_temperature, nishimori_temperature, self_dual_temperature};

fn main() -> rcim::Result<()> {
    for p in [0.01, 0.02, 0.033, 0.05, 0.1, 0.2] {
        println!("p = {p:<6} T_N = {:.4}", nishimori_temperature(p)?);
    }
    println!("self-dual temperature {:.6}", self_dual_temperature());
    for t in [8.16, 8.77, 1.0] {
        println!("dual({t}) = {:.4}", dual_temperature(t)?);
    }
    Ok(())
}
