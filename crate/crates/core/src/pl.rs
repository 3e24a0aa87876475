//! Product-limit estimation of a distribution function from left-truncated,
//! right-censored observations.
//!
//! An observation `(y, t, delta)` is recorded only when `t <= y`; `y` is the
//! possibly censored loss and `delta` is `true` when `y` is the actual loss.
//! The fitted distribution is
//!
//! ```text
//! F(x) = 1 - prod_{y_i <= x} [(n C_n(y_i) - 1) / (n C_n(y_i))]^{delta_i}   for x < y_(n)
//! F(x) = 1                                                                for x >= y_(n)
//! ```
//!
//! with `n C_n(z) = #{i : t_i <= z <= y_i}` the risk set at `z`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SrmError};

/// Samples above this size accumulate the survival product in log space.
pub const LOG_SPACE_THRESHOLD: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LtrcObservation {
    pub y: f64,
    pub t: f64,
    pub delta: bool,
}

impl LtrcObservation {
    /// Checked constructor. `t` may be `-inf` (no truncation).
    pub fn new(y: f64, t: f64, delta: bool) -> Result<Self> {
        if !y.is_finite() || t.is_nan() || t == f64::INFINITY {
            return Err(SrmError::Domain(format!("invalid observation y={y}, t={t}")));
        }
        if t > y {
            return Err(SrmError::Domain(format!("truncation value {t} exceeds observed value {y}")));
        }
        Ok(Self { y, t, delta })
    }

    pub fn uncensored(y: f64, t: f64) -> Result<Self> {
        Self::new(y, t, true)
    }
}

/// A nonempty LTRC sample with a cached sorted view.
#[derive(Debug, Clone, PartialEq)]
pub struct LtrcSample {
    obs: Vec<LtrcObservation>,
    /// Indices ordered by `y`, uncensored before censored at equal `y`.
    order: Vec<usize>,
    sorted_t: Vec<f64>,
    sorted_y: Vec<f64>,
}

impl LtrcSample {
    pub fn new(obs: Vec<LtrcObservation>) -> Result<Self> {
        if obs.is_empty() {
            return Err(SrmError::Usage("empty sample".into()));
        }
        for o in &obs {
            LtrcObservation::new(o.y, o.t, o.delta)?;
        }
        let mut order: Vec<usize> = (0..obs.len()).collect();
        order.sort_by(|&a, &b| {
            obs[a].y.total_cmp(&obs[b].y).then_with(|| obs[b].delta.cmp(&obs[a].delta)).then_with(|| a.cmp(&b))
        });
        let mut sorted_t: Vec<f64> = obs.iter().map(|o| o.t).collect();
        sorted_t.sort_by(f64::total_cmp);
        let sorted_y: Vec<f64> = order.iter().map(|&i| obs[i].y).collect();
        Ok(Self { obs, order, sorted_t, sorted_y })
    }

    /// Complete data: no truncation, no censoring.
    pub fn from_complete(values: &[f64]) -> Result<Self> {
        let obs =
            values.iter().map(|&y| LtrcObservation::new(y, f64::NEG_INFINITY, true)).collect::<Result<Vec<_>>>()?;
        Self::new(obs)
    }

    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    pub fn observations(&self) -> &[LtrcObservation] {
        &self.obs
    }

    pub fn sorted_indices(&self) -> &[usize] {
        &self.order
    }

    /// Observed values in ascending order.
    pub fn sorted_y(&self) -> &[f64] {
        &self.sorted_y
    }

    pub fn max_y(&self) -> f64 {
        *self.sorted_y.last().unwrap()
    }

    pub fn censored_count(&self) -> usize {
        self.obs.iter().filter(|o| !o.delta).count()
    }

    /// Exact risk-set size `#{i : t_i <= z <= y_i}`.
    pub fn risk_set_count(&self, z: f64) -> usize {
        // every t_i <= y_i, so the y_i < z members all have t_i <= z
        let entered = self.sorted_t.partition_point(|&t| t <= z);
        let exited = self.sorted_y.partition_point(|&y| y < z);
        entered - exited
    }

    /// `C_n(z)`.
    pub fn risk_set_fraction(&self, z: f64) -> f64 {
        self.risk_set_count(z) as f64 / self.len() as f64
    }

    /// `W_n*(y) = n^{-1} #{i : y_i <= y, delta_i = 1}`.
    pub fn uncensored_subdist(&self, y: f64) -> f64 {
        let count = self.obs.iter().filter(|o| o.delta && o.y <= y).count();
        count as f64 / self.len() as f64
    }

    /// Sample with every value mapped through `x -> scale * x + shift`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(SrmError::Domain(format!("scale must be positive, got {scale}")));
        }
        let obs = self
            .obs
            .iter()
            .map(|o| LtrcObservation { y: scale * o.y + shift, t: scale * o.t + shift, delta: o.delta })
            .collect();
        Self::new(obs)
    }

    /// Sample made of the observations at `indices` (with repetition).
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().map(|&i| self.obs[i]).collect())
    }
}

/// Right-continuous nondecreasing step function with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDistribution {
    knots: Vec<f64>,
    values: Vec<f64>,
    left_value: f64,
    /// Zero factors met strictly below the largest observation.
    zero_factors: usize,
}

impl StepDistribution {
    pub fn from_parts(knots: Vec<f64>, values: Vec<f64>, left_value: f64) -> Result<Self> {
        if knots.is_empty() || knots.len() != values.len() {
            return Err(SrmError::Domain("knots and values must be nonempty and of equal length".into()));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(SrmError::Domain("knots must be strictly increasing".into()));
        }
        let mut prev = left_value;
        for &v in &values {
            if !(0.0..=1.0).contains(&v) || v < prev {
                return Err(SrmError::Domain("values must be nondecreasing within [0, 1]".into()));
            }
            prev = v;
        }
        if *values.last().unwrap() != 1.0 {
            return Err(SrmError::Domain("final value must be 1".into()));
        }
        Ok(Self { knots, values, left_value, zero_factors: 0 })
    }

    /// Empirical distribution of `values`.
    pub fn ecdf(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(SrmError::Usage("empty sample".into()));
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let mut knots = Vec::new();
        let mut vals = Vec::new();
        for (i, &x) in v.iter().enumerate() {
            if i + 1 < n && v[i + 1] == x {
                continue;
            }
            knots.push(x);
            vals.push((i + 1) as f64 / n as f64);
        }
        Self::from_parts(knots, vals, 0.0)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_value(&self) -> f64 {
        self.left_value
    }

    pub fn zero_factors(&self) -> usize {
        self.zero_factors
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.knots.partition_point(|&k| k <= x) {
            0 => self.left_value,
            i => self.values[i - 1],
        }
    }

    /// Probability mass at each knot.
    pub fn jumps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mut prev = self.left_value;
        self.knots.iter().zip(&self.values).map(move |(&k, &v)| {
            let jump = v - prev;
            prev = v;
            (k, jump)
        })
    }

    /// `knot,value` rows with a header.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("knot,value\n");
        for (k, v) in self.knots.iter().zip(&self.values) {
            s.push_str(&format!("{k},{v}\n"));
        }
        s
    }
}

/// Survival product accumulator: exact reduced fraction while it fits in
/// `u128`, then floating point.
#[derive(Debug, Clone, Copy)]
enum Survival {
    Exact { num: u128, den: u128 },
    Float(f64),
    Log(f64),
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Survival {
    fn start(n: usize) -> Self {
        if n > LOG_SPACE_THRESHOLD {
            Survival::Log(0.0)
        } else {
            Survival::Exact { num: 1, den: 1 }
        }
    }

    /// Multiplies by `((r - 1) / r)^times` for `r >= 2`.
    fn apply(self, r: u128, times: usize) -> Self {
        let mut s = self;
        for _ in 0..times {
            s = match s {
                Survival::Exact { num, den } => match (num.checked_mul(r - 1), den.checked_mul(r)) {
                    (Some(a), Some(b)) => {
                        let g = gcd(a, b);
                        Survival::Exact { num: a / g, den: b / g }
                    }
                    _ => Survival::Float(num as f64 / den as f64 * ((r - 1) as f64 / r as f64)),
                },
                Survival::Float(v) => Survival::Float(v * ((r - 1) as f64 / r as f64)),
                Survival::Log(l) => Survival::Log(l + (-1.0 / r as f64).ln_1p()),
            };
        }
        s
    }

    fn distribution_value(self) -> f64 {
        match self {
            Survival::Exact { num, den } => ratio_to_f64(den - num, den),
            Survival::Float(v) => 1.0 - v,
            Survival::Log(l) => -l.exp_m1(),
        }
    }
}

/// Correctly rounded `a / b` for `a <= b`.
fn ratio_to_f64(a: u128, b: u128) -> f64 {
    const EXACT: u128 = 1 << 53;
    if a == 0 || (b <= EXACT) {
        return a as f64 / b as f64;
    }
    // Binary long division; `2r >= b` is tested as `r >= b - r` to stay in range.
    let mut r = a;
    let mut exp = 0i32;
    while r < b - r {
        r <<= 1;
        exp -= 1;
    }
    let mut q = 0u64;
    for _ in 0..64 {
        let bit = r >= b - r;
        r = if bit { r - (b - r) } else { r << 1 };
        q = (q << 1) | u64::from(bit);
    }
    // Bit 0 is far below the rounding position, so it can carry the sticky bit.
    q |= u64::from(r != 0);
    q as f64 * 2f64.powi(exp - 64)
}

/// Fits the product-limit distribution in one sorted sweep.
///
/// Tied uncensored values each contribute their own factor. A risk set of
/// size one at an uncensored value below the maximum sends the fit to 1 from
/// that point on; such events are counted in [`StepDistribution::zero_factors`].
pub fn fit_pl(sample: &LtrcSample) -> StepDistribution {
    let n = sample.len();
    let ys = sample.sorted_y();
    let obs = sample.observations();
    let order = sample.sorted_indices();
    let y_max = sample.max_y();

    let mut knots = Vec::new();
    let mut values = Vec::new();
    let mut survival = Survival::start(n);
    let mut absorbed = false;
    let mut zero_factors = 0;

    let mut i = 0;
    while i < n {
        let z = ys[i];
        let mut j = i;
        let mut events = 0;
        while j < n && ys[j] == z {
            if obs[order[j]].delta {
                events += 1;
            }
            j += 1;
        }
        if z == y_max {
            knots.push(z);
            values.push(1.0);
            break;
        }
        if events > 0 {
            let r = sample.risk_set_count(z);
            if r == 1 {
                zero_factors += 1;
                absorbed = true;
            } else if !absorbed {
                survival = survival.apply(r as u128, events);
            }
            knots.push(z);
            values.push(if absorbed { 1.0 } else { survival.distribution_value() });
        }
        i = j;
    }

    StepDistribution { knots, values, left_value: 0.0, zero_factors }
}

/// Left-continuous step quantile function on `(0, 1]`:
/// `q(p) = segment_values[j]` for `breakpoints[j] < p <= breakpoints[j + 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileFunction {
    breakpoints: Vec<f64>,
    segment_values: Vec<f64>,
}

impl QuantileFunction {
    pub fn from_parts(breakpoints: Vec<f64>, segment_values: Vec<f64>) -> Result<Self> {
        if segment_values.is_empty() || breakpoints.len() != segment_values.len() + 1 {
            return Err(SrmError::Domain("need one more breakpoint than segment values".into()));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(SrmError::Domain("breakpoints must run from 0 to 1".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(SrmError::Domain("breakpoints must be strictly increasing".into()));
        }
        if segment_values.windows(2).any(|w| w[0] > w[1]) || segment_values.iter().any(|v| !v.is_finite()) {
            return Err(SrmError::Domain("segment values must be finite and nondecreasing".into()));
        }
        Ok(Self { breakpoints, segment_values })
    }

    /// Constant quantile function.
    pub fn constant(c: f64) -> Self {
        Self { breakpoints: vec![0.0, 1.0], segment_values: vec![c] }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn segment_values(&self) -> &[f64] {
        &self.segment_values
    }

    /// Segments as `(lower, upper, value)`.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints.windows(2).zip(&self.segment_values).map(|(w, &v)| (w[0], w[1], v))
    }

    /// `q(p)`; `p <= 0` returns the first segment value.
    pub fn eval(&self, p: f64) -> f64 {
        let j = self.breakpoints[1..].partition_point(|&b| b < p);
        self.segment_values[j.min(self.segment_values.len() - 1)]
    }

    /// Applies `x -> scale * x + shift` to the values (`scale > 0`).
    pub fn affine(&self, scale: f64, shift: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            segment_values: self.segment_values.iter().map(|v| scale * v + shift).collect(),
        }
    }
}

/// Generalized inverse `q(p) = inf{x : F(x) >= p}` of a step distribution.
pub fn pl_quantile(dist: &StepDistribution) -> Result<QuantileFunction> {
    if dist.left_value() != 0.0 {
        return Err(SrmError::Domain("distribution has mass below its first knot".into()));
    }
    let mut breakpoints = vec![0.0];
    let mut segment_values = Vec::new();
    let mut last = 0.0;
    for (&k, &v) in dist.knots().iter().zip(dist.values()) {
        if v > last {
            breakpoints.push(v);
            segment_values.push(k);
            last = v;
        }
    }
    QuantileFunction::from_parts(breakpoints, segment_values)
}
