//! Free energy of the two metastable branches of a clean model by
//! thermodynamic integration of the Metropolis energy.
//!
//! The disordered branch integrates `βf` upward from `β = 0`, where
//! `βf = -ln 2`. The ordered branch starts from the all-up ground state at
//! `β_top` and integrates downward. Where the two `f(T)` curves cross is the
//! equilibrium transition of a first-order model; how far the ordered branch
//! survives above that point is its superheating range.
//!
//! ```text
//! cargo run --release --example first_order_branches -- [kind] [L] [T_low] [T_high] [T_top] [sweeps]
//! ```
//!
//! Defaults: `four-body 6 7.6 9.0 6.0 400`.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rcim::mc::metropolis_sweep;
use rcim::models::{CouplingModel, ModelInstance, ModelKind, SpinState};

const STEPS: usize = 200;
const PRINT_EVERY: usize = 10;

struct Args {
    kind: ModelKind,
    linear_size: usize,
    t_low: f64,
    t_high: f64,
    t_top: f64,
    sweeps: usize,
}

fn arg<T: std::str::FromStr>(args: &[String], i: usize, default: T) -> T {
    args.get(i).and_then(|a| a.parse().ok()).unwrap_or(default)
}

fn parse_args() -> rcim::Result<Args> {
    let a: Vec<String> = std::env::args().skip(1).collect();
    let kind = match a.first() {
        Some(k) => k.parse()?,
        None => ModelKind::FourBodyVertex,
    };
    Ok(Args {
        kind,
        linear_size: arg(&a, 1, 6),
        t_low: arg(&a, 2, 7.6),
        t_high: arg(&a, 3, 9.0),
        t_top: arg(&a, 4, 6.0),
        sweeps: arg(&a, 5, 400),
    })
}

/// Mean energy per spin at `beta` after a short burn-in.
fn energy_at(
    m: &CouplingModel,
    s: &mut SpinState,
    beta: f64,
    sweeps: usize,
    rng: &mut Xoshiro256PlusPlus,
) -> rcim::Result<f64> {
    for _ in 0..sweeps / 4 {
        metropolis_sweep(m, s, 1.0 / beta, rng)?;
    }
    let mut acc = 0.0;
    for _ in 0..sweeps {
        acc += metropolis_sweep(m, s, 1.0 / beta, rng)? as f64;
    }
    Ok(acc / sweeps as f64 / m.num_spins() as f64)
}

/// Trapezoid integration of `d(βf)/dβ = e` along `betas`, starting from
/// `(beta0, bf0, e0)`. Returns `(T, f, e)` per step.
fn integrate(
    m: &CouplingModel,
    s: &mut SpinState,
    betas: impl Iterator<Item = f64>,
    (mut prev_b, mut bf, mut prev_e): (f64, f64, f64),
    sweeps: usize,
    rng: &mut Xoshiro256PlusPlus,
) -> rcim::Result<Vec<(f64, f64, f64)>> {
    let mut out = Vec::new();
    for b in betas {
        let e = energy_at(m, s, b, sweeps, rng)?;
        bf += 0.5 * (e + prev_e) * (b - prev_b);
        prev_e = e;
        prev_b = b;
        out.push((1.0 / b, bf / b, e));
    }
    Ok(out)
}

fn main() -> rcim::Result<()> {
    let args = parse_args()?;
    let inst = ModelInstance::build(args.kind, args.linear_size, 0.0, 1)?;
    let m = &inst.model;
    let n = m.num_spins();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
    let (b_low, b_high, b_top) = (1.0 / args.t_high, 1.0 / args.t_low, 1.0 / args.t_top);

    let mut s = SpinState::random(n, &mut rng);
    let up = (1..=STEPS).map(|k| b_high * k as f64 / STEPS as f64);
    let disordered = integrate(m, &mut s, up, (0.0, -(2f64.ln()), 0.0), args.sweeps, &mut rng)?;

    // Ground-state entropy per spin is negligible, so βf ≈ β e0 at β_top.
    let mut s = SpinState::all_up(n);
    let e0 = m.energy(&s)? as f64 / n as f64;
    let down = (1..=STEPS).map(|k| b_top - (b_top - b_low) * k as f64 / STEPS as f64);
    let ordered = integrate(m, &mut s, down, (b_top, b_top * e0, e0), args.sweeps, &mut rng)?;

    println!("{} L = {}", args.kind.name(), args.linear_size);
    println!("{:>10} {:>8} {:>10} {:>8}", "branch", "T", "f", "e");
    let window = |t: f64| t >= args.t_low && t <= args.t_high;
    for (t, f, e) in disordered.iter().rev().filter(|r| window(r.0)).step_by(PRINT_EVERY) {
        println!("{:>10} {t:>8.4} {f:>10.5} {e:>8.4}", "disordered");
    }
    for (t, f, e) in ordered.iter().filter(|r| window(r.0)).step_by(PRINT_EVERY) {
        println!("{:>10} {t:>8.4} {f:>10.5} {e:>8.4}", "ordered");
    }
    Ok(())
}
