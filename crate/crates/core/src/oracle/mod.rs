//! Exact small-instance computations: partition functions, class
//! probabilities, optimal decoding, free-energy costs and the decoding
//! lemma, all by exhaustive enumeration.

mod code;
mod crosscheck;
mod partition;
pub mod toy;

pub use code::{log_error_probability, ErrorClass, SmallCSSCode, MAX_CLASSES};
pub use crosscheck::{
    distribution_check, ground_state_check, local_generators, thermal_check, DistributionCheck,
    GroundStateCheck,
    ThermalCheck,
};
pub use partition::{
    exact_partition, log_sum_exp, state_distribution, ExactSpectrum, ExactThermal,
    MAX_ENUMERATION_BITS,
};
pub use toy::ToyCode;

use crate::analysis::{nishimori_beta, Estimate};
use crate::error::{Error, Result};
use crate::gf2::Gf2Vec;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

/// Tolerance for "holds exactly" comparisons on probabilities.
pub const EXACT_TOLERANCE: f64 = 1e-12;

/// Outcome of maximum-likelihood decoding of one syndrome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decoding {
    pub syndrome: Gf2Vec,
    /// Lowest-weight member of the chosen class.
    pub representative: Gf2Vec,
    pub class_index: usize,
    pub probability: f64,
    /// Representatives of other classes whose probability equals the
    /// maximum to relative `EXACT_TOLERANCE`.
    pub ties: Vec<Gf2Vec>,
}

impl Decoding {
    pub fn is_tie(&self) -> bool {
        !self.ties.is_empty()
    }
}

/// Most probable class consistent with `syndrome`. Among tied classes the
/// one whose representative is lightest (then smallest as a bit pattern)
/// wins.
pub fn optimal_decode(code: &SmallCSSCode, syndrome: &Gf2Vec, p: f64) -> Result<Decoding> {
    let lp = code.log_class_probabilities(p)?;
    decode_with(code, syndrome, &lp)
}

fn decode_with(code: &SmallCSSCode, syndrome: &Gf2Vec, lp: &[f64]) -> Result<Decoding> {
    let members = code.sectors().get(syndrome).ok_or_else(|| {
        Error::InvalidParameter("syndrome is not in the image of d1".into())
    })?;
    let best = members.iter().map(|&k| lp[k]).fold(f64::NEG_INFINITY, f64::max);
    let tied_with_best = |k: usize| {
        lp[k] == best || (best.is_finite() && (lp[k] - best).abs() <= EXACT_TOLERANCE)
    };
    let mut tied: Vec<usize> = members.iter().copied().filter(|&k| tied_with_best(k)).collect();
    let rep_key = |k: &usize| {
        let r = &code.classes()[*k].representative;
        (r.weight(), r.clone())
    };
    tied.sort_by_key(rep_key);
    let chosen = tied[0];
    Ok(Decoding {
        syndrome: syndrome.clone(),
        representative: code.classes()[chosen].representative.clone(),
        class_index: chosen,
        probability: best.exp(),
        ties: tied[1..]
            .iter()
            .map(|&k| code.classes()[k].representative.clone())
            .collect(),
    })
}

/// `Pr(succ) = sum over syndromes of Pr(decoded class)`.
pub fn success_probability(code: &SmallCSSCode, p: f64) -> Result<f64> {
    let lp = code.log_class_probabilities(p)?;
    Ok(code
        .sectors()
        .values()
        .map(|m| m.iter().map(|&k| lp[k]).fold(f64::NEG_INFINITY, f64::max).exp())
        .sum())
}

/// `Delta_lambda(eps) = -log Z_{eps+lambda}(beta) + log Z_eps(beta)`.
pub fn free_energy_cost(code: &SmallCSSCode, error: &Gf2Vec, lambda: &Gf2Vec, beta: f64) -> Result<f64> {
    code.check_logical(lambda)?;
    Ok(code.log_partition(error, beta)? - code.log_partition(&error.xor(lambda), beta)?)
}

/// `<Delta_lambda>` averaged exactly over `Pr(eps)` at error rate `p`,
/// using that `Z_eps` depends only on the class of `eps`.
pub fn average_free_energy_cost(code: &SmallCSSCode, lambda: &Gf2Vec, p: f64, beta: f64) -> Result<f64> {
    code.check_logical(lambda)?;
    let lp = code.log_class_probabilities(p)?;
    let shift = code.class_index(lambda)?;
    let log_z: Vec<f64> = code
        .classes()
        .iter()
        .map(|c| code.log_partition(&c.representative, beta))
        .collect::<Result<_>>()?;
    Ok((0..lp.len())
        .filter(|&k| lp[k] > f64::NEG_INFINITY)
        .map(|k| lp[k].exp() * (log_z[k] - log_z[k ^ shift]))
        .sum())
}

/// Monte Carlo estimate of `<Delta_lambda>` from errors drawn at rate `p`.
pub fn sampled_free_energy_cost(
    code: &SmallCSSCode,
    lambda: &Gf2Vec,
    p: f64,
    beta: f64,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    code.check_logical(lambda)?;
    if samples < 2 {
        return Err(Error::InsufficientData("need at least two error samples".into()));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let n = code.num_qubits();
    let values: Vec<f64> = (0..samples)
        .map(|_| {
            let e = Gf2Vec::from_indices(n, (0..n).filter(|_| rng.gen::<f64>() < p).collect::<Vec<_>>());
            free_energy_cost(code, &e, lambda, beta)
        })
        .collect::<Result<_>>()?;
    let mean = values.iter().sum::<f64>() / samples as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
    Ok(Estimate::new(mean, (var / samples as f64).sqrt()))
}

/// `<Delta_lambda>` on the Nishimori line, where it reduces to
/// `sum_c Pr(c) log(Pr(c) / Pr(c + lambda))`.
pub fn nishimori_free_energy_cost(code: &SmallCSSCode, lambda: &Gf2Vec, p: f64) -> Result<f64> {
    code.check_logical(lambda)?;
    let lp = code.log_class_probabilities(p)?;
    let shift = code.class_index(lambda)?;
    Ok((0..lp.len())
        .filter(|&k| lp[k] > f64::NEG_INFINITY)
        .map(|k| lp[k].exp() * (lp[k] - lp[k ^ shift]))
        .sum())
}

/// One side-by-side evaluation of the class-probability / partition
/// function identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCase {
    pub p: f64,
    pub error: Gf2Vec,
    /// `log sum_{w in C2} Pr(eps + d2 w)`.
    pub log_stabilizer_sum: f64,
    /// `|B1| log(1-p) - beta |B1| + log Z_eps(beta)` at `beta = beta(p)`.
    pub log_partition_side: f64,
    /// `log Pr(class of eps) + log |ker d2|`, from the class table.
    pub log_class_side: f64,
    pub relative_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub code: String,
    pub cases: Vec<IdentityCase>,
    pub max_relative_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn identity_case(code: &SmallCSSCode, error: &Gf2Vec, p: f64) -> Result<IdentityCase> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "identity needs 0 < p < 1/2 for a finite positive beta, got {p}"
        )));
    }
    let n = code.num_qubits() as f64;
    let beta = nishimori_beta(p)?;
    let lhs = code.log_stabilizer_sum(error, p)?;
    let rhs = n * (1.0 - p).ln() - beta * n + code.log_partition(error, beta)?;
    let via_class = code.class_probability(error, p)?.ln()
        + code.gauge_multiplicity_log2() as f64 * 2f64.ln();
    let dev = (lhs - rhs).exp_m1().abs().max((via_class - rhs).exp_m1().abs());
    Ok(IdentityCase {
        p,
        error: error.clone(),
        log_stabilizer_sum: lhs,
        log_partition_side: rhs,
        log_class_side: via_class,
        relative_deviation: dev,
    })
}

/// Checks the identity on `cases` random `(eps, p)` pairs, `p` uniform in
/// `[0.01, 0.49]` and `eps` drawn at rate `p`.
pub fn identity_suite(code: &SmallCSSCode, cases: usize, seed: u64, tolerance: f64) -> Result<IdentityReport> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let n = code.num_qubits();
    let mut out = Vec::with_capacity(cases);
    for _ in 0..cases {
        let p = rng.gen_range(0.01..0.49);
        let e = Gf2Vec::from_indices(n, (0..n).filter(|_| rng.gen::<f64>() < p).collect::<Vec<_>>());
        out.push(identity_case(code, &e, p)?);
    }
    let max_dev = out.iter().map(|c| c.relative_deviation).fold(0.0, f64::max);
    Ok(IdentityReport {
        code: code.name().to_string(),
        cases: out,
        max_relative_deviation: max_dev,
        tolerance,
        pass: max_dev < tolerance,
    })
}

/// Both sandwich inequalities and the free-energy lower bound at one `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaPoint {
    pub p: f64,
    pub success: f64,
    /// `sum_c Pr(c)^2 / sum_{l'} Pr(c + l')`.
    pub overlap: f64,
    /// `2 Pr(succ) - 1`.
    pub lower: f64,
    /// `Pr(succ) - overlap`, nonnegative when the first inequality holds.
    pub upper_slack: f64,
    /// `overlap - (2 Pr(succ) - 1)`.
    pub lower_slack: f64,
    /// Smallest `<Delta_lambda> - bound` over nontrivial `lambda`.
    pub free_energy_slack: Option<f64>,
    /// `<Delta_lambda>` and its bound for each nontrivial homology element.
    pub free_energy: Vec<(f64, f64)>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub code: String,
    pub homology_order: usize,
    pub tolerance: f64,
    pub points: Vec<LemmaPoint>,
    pub pass: bool,
    /// The lemma bounds the threshold from above by the Nishimori
    /// crossing; it does not identify the two.
    pub note: String,
}

pub fn lemma_point(code: &SmallCSSCode, p: f64, tolerance: f64) -> Result<LemmaPoint> {
    let lp = code.log_class_probabilities(p)?;
    let pr: Vec<f64> = lp.iter().map(|l| l.exp()).collect();
    let mut success = 0.0;
    let mut overlap = 0.0;
    for members in code.sectors().values() {
        let total: f64 = members.iter().map(|&k| pr[k]).sum();
        if total <= 0.0 {
            continue;
        }
        success += members.iter().map(|&k| pr[k]).fold(0.0, f64::max);
        overlap += members.iter().map(|&k| pr[k] * pr[k]).sum::<f64>() / total;
    }
    let lower = 2.0 * success - 1.0;
    let upper_slack = success - overlap;
    let lower_slack = overlap - lower;

    let mut free_energy = Vec::new();
    if p > 0.0 && p < 1.0 {
        let h1 = code.homology_order() as f64;
        for lambda in code.homology_elements().iter().skip(1) {
            let shift = code.class_index(lambda)?;
            let avg = nishimori_free_energy_cost(code, lambda, p)?;
            let mut cross = 0.0;
            for members in code.sectors().values() {
                let total: f64 = members.iter().map(|&k| pr[k]).sum();
                cross += members.iter().map(|&k| pr[k] * pr[k ^ shift]).sum::<f64>() / total;
            }
            free_energy.push((avg, (1.0 - h1) - cross.ln()));
        }
    }
    let free_energy_slack = free_energy
        .iter()
        .map(|(a, b)| a - b)
        .reduce(f64::min);
    let pass = upper_slack >= -tolerance
        && lower_slack >= -tolerance
        && free_energy_slack.is_none_or(|s| s >= -tolerance);
    Ok(LemmaPoint {
        p,
        success,
        overlap,
        lower,
        upper_slack,
        lower_slack,
        free_energy_slack,
        free_energy,
        pass,
    })
}

pub fn lemma_check(code: &SmallCSSCode, grid: &[f64], tolerance: f64) -> Result<LemmaReport> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty p grid".into()));
    }
    let points: Vec<LemmaPoint> = grid
        .iter()
        .map(|&p| lemma_point(code, p, tolerance))
        .collect::<Result<_>>()?;
    Ok(LemmaReport {
        code: code.name().to_string(),
        homology_order: code.homology_order(),
        tolerance,
        pass: points.iter().all(|pt| pt.pass),
        points,
        note: "Pr(succ) -> 1 implies a diverging free-energy cost on the Nishimori line, so the \
               threshold satisfies p_c <= p_N; the two are reported separately"
            .into(),
    })
}

/// `p = 0.05, 0.10, ..., 0.45`.
pub fn default_lemma_grid() -> Vec<f64> {
    (1..=9).map(|k| 0.05 * k as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn code(c: ToyCode) -> SmallCSSCode {
        SmallCSSCode::new(c.to_string(), c.build().unwrap()).unwrap()
    }

    #[test]
    fn repetition_success_is_majority_vote() {
        let c = code(ToyCode::Repetition(3));
        let s = success_probability(&c, 0.1).unwrap();
        assert_relative_eq!(s, 1.0 - (3.0 * 0.01 * 0.9 + 0.001), max_relative = 1e-14);
        assert_relative_eq!(success_probability(&c, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn uniform_errors_split_evenly_over_homology() {
        for t in [ToyCode::Repetition(3), ToyCode::Toric(2)] {
            let c = code(t);
            let s = success_probability(&c, 0.5).unwrap();
            assert_relative_eq!(s, 1.0 / c.homology_order() as f64, max_relative = 1e-13);
        }
    }

    #[test]
    fn decoding_examples() {
        let c = code(ToyCode::Repetition(3));
        let zero = Gf2Vec::zeros(2);
        let d = optimal_decode(&c, &zero, 0.1).unwrap();
        assert!(d.representative.is_zero());
        assert!(!d.is_tie());

        // A flip on bit 0 fires only the first check.
        let s = Gf2Vec::from_indices(2, [0]);
        let d = optimal_decode(&c, &s, 0.1).unwrap();
        assert_eq!(d.representative, Gf2Vec::from_indices(3, [0]));
        assert_relative_eq!(d.probability, 0.1 * 0.81, max_relative = 1e-14);

        let d = optimal_decode(&c, &s, 0.5).unwrap();
        assert!(d.is_tie());
        assert_eq!(d.ties.len(), 1);
    }

    #[test]
    fn infeasible_syndrome_is_rejected() {
        // The toric syndrome always has even weight.
        let c = code(ToyCode::Toric(2));
        let s = Gf2Vec::from_indices(4, [0]);
        assert!(optimal_decode(&c, &s, 0.1).is_err());
    }

    #[test]
    fn free_energy_cost_guards_and_limits() {
        let c = code(ToyCode::Toric(2));
        let e = Gf2Vec::from_indices(8, [1]);
        assert!(free_energy_cost(&c, &e, &Gf2Vec::zeros(8), 1.0).is_err());
        let lambda = c.homology_basis()[0].clone();
        assert_eq!(free_energy_cost(&c, &e, &lambda, 0.0).unwrap(), 0.0);
        let fwd = free_energy_cost(&c, &e, &lambda, 0.8).unwrap();
        let back = free_energy_cost(&c, &e.xor(&lambda), &lambda, 0.8).unwrap();
        assert_relative_eq!(fwd, -back, max_relative = 1e-12);
    }

    #[test]
    fn nishimori_cost_matches_partition_functions() {
        let c = code(ToyCode::Toric(2));
        let lambda = c.homology_basis()[0].clone();
        for p in [0.05, 0.2] {
            let beta = nishimori_beta(p).unwrap();
            let a = average_free_energy_cost(&c, &lambda, p, beta).unwrap();
            let b = nishimori_free_energy_cost(&c, &lambda, p).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn sampled_cost_agrees_with_exact() {
        let c = code(ToyCode::Toric(2));
        let lambda = c.homology_basis()[0].clone();
        let beta = nishimori_beta(0.1).unwrap();
        let exact = average_free_energy_cost(&c, &lambda, 0.1, beta).unwrap();
        let est = sampled_free_energy_cost(&c, &lambda, 0.1, beta, 2000, 3).unwrap();
        assert!((est.value - exact).abs() < 4.0 * est.error, "{est:?} vs {exact}");
    }

    #[test]
    fn free_energy_cost_grows_as_noise_drops() {
        let c = code(ToyCode::Toric(3));
        let lambda = c.homology_basis()[0].clone();
        let grid = [0.45, 0.35, 0.25, 0.15, 0.05];
        let costs: Vec<f64> = grid
            .iter()
            .map(|&p| nishimori_free_energy_cost(&c, &lambda, p).unwrap())
            .collect();
        assert!(costs.windows(2).all(|w| w[1] > w[0]), "{costs:?}");
    }

    #[test]
    fn lemma_holds_on_repetition_code() {
        let c = code(ToyCode::Repetition(3));
        let r = lemma_check(&c, &default_lemma_grid(), EXACT_TOLERANCE).unwrap();
        assert!(r.pass);
        assert_eq!(r.points.len(), 9);
        let tiny = lemma_point(&c, 1e-6, EXACT_TOLERANCE).unwrap();
        assert!((tiny.overlap - 1.0).abs() < 1e-10);
        let half = lemma_point(&c, 0.5, EXACT_TOLERANCE).unwrap();
        assert_relative_eq!(half.overlap, 0.5, max_relative = 1e-14);
        assert!(half.lower.abs() < 1e-14);
    }

    #[test]
    fn identity_holds_on_two_tetrahedra() {
        let c = code(ToyCode::TwoTetrahedra);
        let r = identity_suite(&c, 20, 11, 1e-10).unwrap();
        assert!(r.pass, "{}", r.max_relative_deviation);
    }

    #[test]
    fn reports_serialize() {
        let c = code(ToyCode::Repetition(3));
        let r = lemma_check(&c, &[0.1], EXACT_TOLERANCE).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: LemmaReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
