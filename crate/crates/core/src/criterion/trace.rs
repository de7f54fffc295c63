//! Executable traces of the Y iteration and of the θ choices behind the two theorem criteria.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{check_q, Q_MAX, Q_MIN};

type Rational = Rational64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub beta: f64,
    pub q: f64,
    pub m: f64,
    /// θ = 1/(2β).
    pub theta: f64,
    /// (2β)^{6/(q−1)} M^{2/(q−1)}.
    pub increment: f64,
    /// γ = 2(2β)^{6/(q−1)}.
    pub gamma: f64,
    /// Fixed point γ M^{2/(q−1)}.
    pub limit: f64,
    pub sequence: Vec<f64>,
    /// Y_{k+1} − (Y_k/2 + increment), round-off only.
    pub residuals: Vec<f64>,
    /// |Y_k − limit|.
    pub errors: Vec<f64>,
}

fn precondition(msg: String) -> Error {
    Error::Precondition(msg)
}

/// Y_{k+1} = Y_k/2 + (2β)^{6/(q−1)} M^{2/(q−1)}.
pub fn iterate_y(beta: f64, q: f64, m: f64, y0: f64, steps: usize) -> Result<IterationTrace> {
    if !(beta >= 2.0) {
        return Err(precondition(format!("beta = {beta} < 2")));
    }
    check_q(q)?;
    if !(m > 1.0 && m.is_finite()) {
        return Err(precondition(format!("M = {m} must exceed 1")));
    }
    if !y0.is_finite() {
        return Err(Error::NonFinite("Y0".into()));
    }
    let theta = 1.0 / (2.0 * beta);
    let base = (2.0 * beta).powf(6.0 / (q - 1.0));
    let increment = base * m.powf(2.0 / (q - 1.0));
    let gamma = 2.0 * base;
    let limit = 2.0 * increment;
    let mut sequence = Vec::with_capacity(steps + 1);
    sequence.push(y0);
    for k in 0..steps {
        sequence.push(0.5 * sequence[k] + increment);
    }
    let residuals = sequence.windows(2).map(|w| w[1] - (0.5 * w[0] + increment)).collect();
    let errors = sequence.iter().map(|y| (y - limit).abs()).collect();
    Ok(IterationTrace { beta, q, m, theta, increment, gamma, limit, sequence, residuals, errors })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub label: String,
    pub value: f64,
}

fn step(label: &str, value: f64) -> ChainStep {
    ChainStep { label: label.into(), value }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem1Branch {
    /// m > 0: θ = (M^{−q/(q−1)} m)^{1/5}.
    #[serde(rename = "positive")]
    Positive,
    /// m = 0: θ only has to make the first term small.
    #[serde(rename = "trivial")]
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Trace {
    pub m_bar: f64,
    pub m: f64,
    pub q: f64,
    pub beta: f64,
    pub branch: Theorem1Branch,
    pub theta: f64,
    /// ε = M^{(5−q)/(q−1)} m.
    pub epsilon: f64,
    /// βθ³M^{3/(q−1)}.
    pub first_term: f64,
    /// βθ^{−2}M^{(3−q)/(q−1)}E_q(r_n), evaluated at E_q(r_n) = m.
    pub second_term: f64,
    /// βε^{3/5}(1 + m^{−1}E_q(r_n)) at E_q(r_n) = m.
    pub intermediate_bound: f64,
    /// 3βε^{3/5}, valid once E_q(r_n) ≤ 2m.
    pub final_bound: f64,
    pub chain: Vec<ChainStep>,
}

/// First-term target of the trivial branch.
pub const TRIVIAL_BRANCH_TARGET: f64 = 1e-3;

/// Bound chain behind the theorem1 criterion for M = Ē_q, m = E̲_q.
pub fn theorem1_trace(m_bar: f64, m: f64, q: f64, beta: f64) -> Result<Theorem1Trace> {
    check_q(q)?;
    if !(m_bar > 1.0 && m_bar.is_finite()) {
        return Err(precondition(format!("M = {m_bar} must exceed 1")));
    }
    if !(0.0 <= m && m <= m_bar) {
        return Err(precondition(format!("m = {m} must lie in [0, M]")));
    }
    if !(beta > 0.0) {
        return Err(precondition(format!("beta = {beta} must be positive")));
    }
    let a3 = m_bar.powf(3.0 / (q - 1.0));
    let a2 = m_bar.powf((3.0 - q) / (q - 1.0));
    let epsilon = m_bar.powf((5.0 - q) / (q - 1.0)) * m;
    if m == 0.0 {
        let theta = (TRIVIAL_BRANCH_TARGET / (beta * a3)).cbrt().min(1.0);
        let first = beta * theta.powi(3) * a3;
        let chain = vec![
            step("theta", theta),
            step("beta theta^3 M^(3/(q-1))", first),
            step("beta theta^-2 M^((3-q)/(q-1)) E_q(r_n) as E_q(r_n) -> 0", 0.0),
            step("C(theta r_n) bound in the limit", first),
        ];
        return Ok(Theorem1Trace {
            m_bar,
            m,
            q,
            beta,
            branch: Theorem1Branch::Trivial,
            theta,
            epsilon: 0.0,
            first_term: first,
            second_term: 0.0,
            intermediate_bound: first,
            final_bound: first,
            chain,
        });
    }
    let theta = (m_bar.powf(-q / (q - 1.0)) * m).powf(0.2);
    let first = beta * theta.powi(3) * a3;
    let second = beta * theta.powi(-2) * a2 * m;
    let e35 = epsilon.powf(0.6);
    let intermediate = beta * e35 * 2.0;
    let final_bound = 3.0 * beta * e35;
    let chain = vec![
        step("theta", theta),
        step("epsilon = M^((5-q)/(q-1)) m", epsilon),
        step("beta theta^3 M^(3/(q-1))", first),
        step("beta theta^-2 M^((3-q)/(q-1)) E_q(r_n) at E_q(r_n) = m", second),
        step("sum of the two terms", first + second),
        step("beta epsilon^(3/5) (1 + E_q(r_n)/m)", intermediate),
        step("3 beta epsilon^(3/5)", final_bound),
    ];
    Ok(Theorem1Trace {
        m_bar,
        m,
        q,
        beta,
        branch: Theorem1Branch::Positive,
        theta,
        epsilon,
        first_term: first,
        second_term: second,
        intermediate_bound: intermediate,
        final_bound,
        chain,
    })
}

/// Exponents (of M, of m) of one power product.
pub type Exponents = (Rational, Rational);

/// The two terms of the theorem1 chain after substituting θ = (M^{−q/(q−1)} m)^{1/5}, as
/// exponents of M and m (the second term's m exponent excludes the factor E_q), together with
/// the exponents of ε^{3/5} and ε^{3/5}m^{−1} for ε = M^{(5−q)/(q−1)} m.
pub fn theorem1_exponents(q: Rational) -> Result<[(Exponents, Exponents); 2]> {
    let one = Rational::from_integer(1);
    let (lo, hi) = (Rational::new(9, 5), Rational::from_integer(2));
    if q < lo || q > hi {
        return Err(Error::InvalidParameter(format!("q = {q} outside [{Q_MIN}, {Q_MAX}]")));
    }
    let qm1 = q - one;
    let theta = (-q / qm1 * Rational::new(1, 5), Rational::new(1, 5));
    let first = (theta.0 * 3 + Rational::from_integer(3) / qm1, theta.1 * 3);
    let second = (theta.0 * -2 + (Rational::from_integer(3) - q) / qm1, theta.1 * -2);
    let eps = ((Rational::from_integer(5) - q) / qm1, one);
    let e35 = (eps.0 * Rational::new(3, 5), eps.1 * Rational::new(3, 5));
    Ok([(first, e35), (second, (e35.0, e35.1 - one))])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Trace {
    pub m_bar: f64,
    pub m: f64,
    pub epsilon: f64,
    pub beta: f64,
    /// θ = ε^{1/2}/M.
    pub theta: f64,
    pub monomials: Vec<ChainStep>,
    pub sum: f64,
    /// β × sum.
    pub bound: f64,
    /// β(ε^{3/2} + 3ε + ε^{1/2}), the envelope of the five monomials under Mm < ε.
    pub envelope: f64,
    pub sqrt_epsilon: f64,
    /// Every monomial is at most ε^{1/2}.
    pub each_below_sqrt_epsilon: bool,
    pub dominant: String,
}

/// Monomials of the final theorem2 estimate with θ = ε^{1/2}/M.
pub fn theorem2_trace(m_bar: f64, m: f64, epsilon: f64, beta: f64) -> Result<Theorem2Trace> {
    if !(m_bar >= 1.0 && m_bar.is_finite()) {
        return Err(precondition(format!("M = {m_bar} must be at least 1")));
    }
    if !(m >= 0.0) {
        return Err(precondition(format!("m = {m} must be non-negative")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0 / 16.0) {
        return Err(precondition(format!("epsilon = {epsilon} must lie in (0, 1/16)")));
    }
    if !(m_bar * m < epsilon) {
        return Err(precondition(format!("M m = {} must be below epsilon = {epsilon}", m_bar * m)));
    }
    if !(beta > 0.0) {
        return Err(precondition(format!("beta = {beta} must be positive")));
    }
    let theta = epsilon.sqrt() / m_bar;
    let monomials = vec![
        step("theta M^2 m", theta * m_bar * m_bar * m),
        step("theta^2 M^2", theta * theta * m_bar * m_bar),
        step("theta^-1 m", m / theta),
        step("theta^-2 m^2", m * m / (theta * theta)),
        step("theta^-2 M^-2 epsilon^2", epsilon * epsilon / (theta * theta * m_bar * m_bar)),
    ];
    let sum: f64 = monomials.iter().map(|s| s.value).sum();
    let sq = epsilon.sqrt();
    let dominant = monomials.iter().max_by(|a, b| a.value.total_cmp(&b.value)).map(|s| s.label.clone()).unwrap_or_default();
    Ok(Theorem2Trace {
        m_bar,
        m,
        epsilon,
        beta,
        theta,
        each_below_sqrt_epsilon: monomials.iter().all(|s| s.value <= sq * (1.0 + 1e-12)),
        monomials,
        sum,
        bound: beta * sum,
        envelope: beta * (epsilon.powf(1.5) + 3.0 * epsilon + sq),
        sqrt_epsilon: sq,
        dominant,
    })
}
