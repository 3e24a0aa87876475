//! Shared helpers for the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use srm_ltrc::pl::{LtrcObservation, LtrcSample};
use srm_ltrc::rng::SimRng;

/// Literal risk-set count `#{j : t_j <= z <= y_j}`.
pub fn brute_risk_count(obs: &[LtrcObservation], z: f64) -> usize {
    obs.iter().filter(|o| o.t <= z && z <= o.y).count()
}

/// Product-limit value at `x`, evaluated term by term in exact arithmetic.
pub fn brute_pl(obs: &[LtrcObservation], x: f64) -> BigRational {
    let y_max = obs.iter().map(|o| o.y).fold(f64::NEG_INFINITY, f64::max);
    if x >= y_max {
        return BigRational::one();
    }
    let mut prod = BigRational::one();
    for o in obs.iter().filter(|o| o.delta && o.y <= x) {
        let r = BigInt::from(brute_risk_count(obs, o.y));
        if r.is_zero() {
            continue;
        }
        prod *= BigRational::new(r.clone() - 1, r);
    }
    BigRational::one() - prod
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite rational")
}

/// Random LTRC sample on a coarse grid so ties occur.
pub fn random_ltrc(rng: &mut SimRng, n: usize) -> LtrcSample {
    let obs = (0..n)
        .map(|_| {
            let t = rng.random_range(0..20) as f64 * 0.5;
            let y = t + rng.random_range(0..20) as f64 * 0.5;
            LtrcObservation::new(y, t, rng.random_bool(0.7)).unwrap()
        })
        .collect();
    LtrcSample::new(obs).unwrap()
}

/// Complete-data sample of `n` exponential draws; distinct with probability one.
pub fn random_complete(rng: &mut SimRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln() * 10.0).collect()
}
