//! Regularity verdicts from the tail surrogates. Every criterion is a sufficient condition, so the
//! outcome is either "regular" or "not-implied".

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::criterion::sweep::{estimate_limits_e2, ScaleLimits, ScaleSweep};
use crate::error::{invalid, Error, Result};
use crate::functionals::{check_q, Q_MAX};

/// Toolkit screening threshold; the criteria only assert that some ε exists.
pub const DEFAULT_EPSILON: f64 = 0.05;
/// Default cap M for the Seregin-type criterion.
pub const DEFAULT_M_CAP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CriterionId {
    #[serde(rename = "theorem1")]
    Theorem1,
    #[serde(rename = "theorem2")]
    Theorem2,
    #[serde(rename = "ckn")]
    Ckn,
    #[serde(rename = "seregin")]
    Seregin,
}

impl CriterionId {
    pub const ALL: [CriterionId; 4] = [CriterionId::Theorem1, CriterionId::Theorem2, CriterionId::Ckn, CriterionId::Seregin];

    pub fn name(self) -> &'static str {
        match self {
            CriterionId::Theorem1 => "theorem1",
            CriterionId::Theorem2 => "theorem2",
            CriterionId::Ckn => "ckn",
            CriterionId::Seregin => "seregin",
        }
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CriterionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        CriterionId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .map_or_else(|| invalid(format!("unknown criterion '{s}'")), Ok)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    #[serde(rename = "regular")]
    Regular,
    #[serde(rename = "not-implied")]
    NotImplied,
}

impl Decision {
    fn from_bool(regular: bool) -> Self {
        if regular {
            Decision::Regular
        } else {
            Decision::NotImplied
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Decision::Regular => "regular",
            Decision::NotImplied => "not-implied",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub criterion: CriterionId,
    pub epsilon: f64,
    pub decision: Decision,
    pub e_bar: f64,
    pub e_under: f64,
    /// The quantity compared against `threshold`.
    pub product: f64,
    pub threshold: f64,
    pub witness: Vec<(String, f64)>,
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return invalid(format!("epsilon must be positive (got {eps})"));
    }
    Ok(())
}

/// Ē_q^{(5−q)/(q−1)} E̲_q < ε, for 9/5 ≤ q < 2 and zero force.
pub fn theorem1_verdict(limits: &ScaleLimits, q: f64, epsilon: f64) -> Result<CriterionVerdict> {
    check_q(q)?;
    check_epsilon(epsilon)?;
    if q >= Q_MAX - 1e-12 {
        return Err(Error::InvalidParameter("q = 2 is covered by theorem2_verdict".into()));
    }
    let exponent = (5.0 - q) / (q - 1.0);
    let product = if limits.e_under == 0.0 { 0.0 } else { limits.e_bar.powf(exponent) * limits.e_under };
    Ok(CriterionVerdict {
        criterion: CriterionId::Theorem1,
        epsilon,
        decision: Decision::from_bool(product < epsilon),
        e_bar: limits.e_bar,
        e_under: limits.e_under,
        product,
        threshold: epsilon,
        witness: vec![("q".into(), q), ("exponent".into(), exponent)],
    })
}

/// Ē E̲ < ε; the witness also carries the equivalent threshold ε/M with M = Ē.
pub fn theorem2_verdict(limits: &ScaleLimits, epsilon: f64) -> Result<CriterionVerdict> {
    check_epsilon(epsilon)?;
    let product = limits.e_bar * limits.e_under;
    let regular = product < epsilon;
    let mut witness = vec![];
    if limits.e_bar > 0.0 {
        let eps_over_m = epsilon / limits.e_bar;
        witness.push(("epsilon_over_M".into(), eps_over_m));
        witness.push(("threshold_form_regular".into(), f64::from(u8::from(limits.e_under < eps_over_m))));
    }
    Ok(CriterionVerdict {
        criterion: CriterionId::Theorem2,
        epsilon,
        decision: Decision::from_bool(regular),
        e_bar: limits.e_bar,
        e_under: limits.e_under,
        product,
        threshold: epsilon,
        witness,
    })
}

/// lim sup E < ε, evaluated on the tail maximum of E = E_2.
pub fn ckn_verdict(sweep: &ScaleSweep, epsilon: f64) -> Result<CriterionVerdict> {
    ckn_verdict_with_tail(sweep, epsilon, None)
}

pub fn ckn_verdict_with_tail(sweep: &ScaleSweep, epsilon: f64, tail: Option<usize>) -> Result<CriterionVerdict> {
    check_epsilon(epsilon)?;
    let limits = estimate_limits_e2(sweep, tail)?;
    Ok(CriterionVerdict {
        criterion: CriterionId::Ckn,
        epsilon,
        decision: Decision::from_bool(limits.e_bar < epsilon),
        e_bar: limits.e_bar,
        e_under: limits.e_under,
        product: limits.e_bar,
        threshold: epsilon,
        witness: vec![("tail_length".into(), limits.tail_length as f64)],
    })
}

/// ε(M) = ε/M.
pub fn epsilon_over_m(epsilon: f64) -> impl Fn(f64) -> f64 {
    move |m| epsilon / m
}

/// Ē ≤ M_cap and E̲ < ε(M_cap).
pub fn seregin_verdict(limits: &ScaleLimits, m_cap: f64, epsilon_of_m: impl Fn(f64) -> f64) -> Result<CriterionVerdict> {
    if !(m_cap > 0.0) {
        return invalid(format!("M cap must be positive (got {m_cap})"));
    }
    let threshold = epsilon_of_m(m_cap);
    check_epsilon(threshold)?;
    let regular = limits.e_bar <= m_cap && limits.e_under < threshold;
    Ok(CriterionVerdict {
        criterion: CriterionId::Seregin,
        epsilon: threshold * m_cap,
        decision: Decision::from_bool(regular),
        e_bar: limits.e_bar,
        e_under: limits.e_under,
        product: limits.e_under,
        threshold,
        witness: vec![("M_cap".into(), m_cap)],
    })
}

/// Rows (M, ε/M) of the quantitative threshold curve.
pub fn epsilon_curve(epsilon: f64, ms: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_epsilon(epsilon)?;
    ms.iter()
        .map(|&m| {
            if !(m > 0.0) {
                return invalid(format!("M must be positive (got {m})"));
            }
            Ok((m, epsilon / m))
        })
        .collect()
}
