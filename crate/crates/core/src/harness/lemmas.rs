//! One checker per inequality: lhs, named rhs terms and their ratio.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::functionals::{check_k, CylinderValues, Functionals};
use crate::harness::exponents::{alpha, beta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LemmaId {
    #[serde(rename = "energy")]
    EnergyBalance,
    #[serde(rename = "L31")]
    LocalEnergyI,
    #[serde(rename = "L32")]
    LocalEnergyII,
    #[serde(rename = "L41")]
    PressureI,
    #[serde(rename = "L44")]
    PressureII,
    /// C(θr) against θ³A^{3/2} + θ^{−2}C̃.
    #[serde(rename = "L51a")]
    CSplitA,
    /// C(θr) against θC + θ^{−2}C̃.
    #[serde(rename = "L51b")]
    CSplitB,
    #[serde(rename = "L52")]
    InterpI,
    #[serde(rename = "L53")]
    XDecay,
    #[serde(rename = "L54")]
    InterpII,
    #[serde(rename = "L55")]
    C23Bound,
}

impl LemmaId {
    /// Every lemma inequality, with both forms of the C split.
    pub const LEMMAS: [LemmaId; 10] = [
        LemmaId::LocalEnergyI,
        LemmaId::LocalEnergyII,
        LemmaId::PressureI,
        LemmaId::PressureII,
        LemmaId::CSplitA,
        LemmaId::CSplitB,
        LemmaId::InterpI,
        LemmaId::XDecay,
        LemmaId::InterpII,
        LemmaId::C23Bound,
    ];

    pub fn code(self) -> &'static str {
        match self {
            LemmaId::EnergyBalance => "energy",
            LemmaId::LocalEnergyI => "L31",
            LemmaId::LocalEnergyII => "L32",
            LemmaId::PressureI => "L41",
            LemmaId::PressureII => "L44",
            LemmaId::CSplitA => "L51a",
            LemmaId::CSplitB => "L51b",
            LemmaId::InterpI => "L52",
            LemmaId::XDecay => "L53",
            LemmaId::InterpII => "L54",
            LemmaId::C23Bound => "L55",
        }
    }

    /// Lemma number without the form suffix.
    pub fn lemma(self) -> &'static str {
        match self {
            LemmaId::EnergyBalance => self.code(),
            _ => &self.code()[..3],
        }
    }

    pub fn uses_theta(self) -> bool {
        matches!(
            self,
            LemmaId::PressureI
                | LemmaId::PressureII
                | LemmaId::CSplitA
                | LemmaId::CSplitB
                | LemmaId::XDecay
                | LemmaId::InterpII
        )
    }

    pub fn uses_qk(self) -> bool {
        matches!(self, LemmaId::InterpI | LemmaId::XDecay)
    }

    pub fn needs_pressure(self) -> bool {
        matches!(
            self,
            LemmaId::EnergyBalance
                | LemmaId::LocalEnergyI
                | LemmaId::LocalEnergyII
                | LemmaId::PressureI
                | LemmaId::PressureII
                | LemmaId::XDecay
        )
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for LemmaId {
    type Err = Error;

    /// Accepts the codes and, for the C split, the bare "L51" (first form).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let all = [LemmaId::EnergyBalance].into_iter().chain(LemmaId::LEMMAS);
        for id in all {
            if id.code().eq_ignore_ascii_case(s) {
                return Ok(id);
            }
        }
        if s.eq_ignore_ascii_case("L51") {
            return Ok(LemmaId::CSplitA);
        }
        invalid(format!("unknown lemma id '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub x: [f64; 3],
    pub t: f64,
    pub r: f64,
    pub theta: Option<f64>,
    pub q: Option<f64>,
    pub k: Option<f64>,
}

/// A named rhs term with its degree under v ↦ αv, p ↦ α²p, f ↦ α²f
/// (None when the term is not a monomial in α).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
    pub degree: Option<f64>,
}

impl Term {
    pub fn new(name: impl Into<String>, value: f64, degree: Option<f64>) -> Self {
        Self { name: name.into(), value, degree }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lemma: LemmaId,
    pub config: CheckConfig,
    pub lhs: f64,
    pub lhs_degree: Option<f64>,
    pub rhs_terms: Vec<Term>,
    pub rhs: f64,
    /// lhs / rhs; None for a degenerate (rhs ≤ abs_tol) instance.
    pub ratio: Option<f64>,
    pub degenerate: bool,
    pub abs_tol: f64,
    /// Functional values the terms were built from.
    pub components: Vec<(String, f64)>,
    /// Whether the ratio is within the supplied constant bound; None until a bound is applied.
    pub pass: Option<bool>,
}

impl InequalityCheck {
    fn assemble(
        lemma: LemmaId,
        config: CheckConfig,
        lhs: f64,
        lhs_degree: Option<f64>,
        rhs_terms: Vec<Term>,
        components: Vec<(String, f64)>,
        scale: f64,
    ) -> Result<Self> {
        let rhs: f64 = rhs_terms.iter().map(|t| t.value).sum();
        if !lhs.is_finite() || !rhs.is_finite() {
            return Err(Error::NonFinite(format!("{lemma}: lhs {lhs}, rhs {rhs}")));
        }
        let abs_tol = 1e-12 * scale.powi(3);
        let degenerate = rhs <= abs_tol;
        if degenerate && lhs.abs() > abs_tol {
            return Err(Error::DegenerateViolation { check: lemma.code().to_string(), lhs, tol: abs_tol });
        }
        let (ratio, pass) = if degenerate { (None, Some(true)) } else { (Some(lhs / rhs), None) };
        Ok(Self { lemma, config, lhs, lhs_degree, rhs_terms, rhs, ratio, degenerate, abs_tol, components, pass })
    }

    pub(crate) fn balance(
        config: CheckConfig,
        lhs: f64,
        rhs_terms: Vec<Term>,
        components: Vec<(String, f64)>,
        scale: f64,
    ) -> Result<Self> {
        let rhs: f64 = rhs_terms.iter().map(|t| t.value).sum();
        let abs_tol = 1e-12 * scale.powi(3);
        if lhs.abs() <= abs_tol && rhs.abs() <= abs_tol {
            return Ok(Self {
                lemma: LemmaId::EnergyBalance,
                config,
                lhs,
                lhs_degree: None,
                rhs_terms,
                rhs,
                ratio: None,
                degenerate: true,
                abs_tol,
                components,
                pass: Some(true),
            });
        }
        Self::assemble(LemmaId::EnergyBalance, config, lhs, None, rhs_terms, components, scale)
    }

    /// |lhs − rhs| / |lhs|, zero when both sides vanish.
    pub fn relative_residual(&self) -> f64 {
        let d = (self.lhs - self.rhs).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.lhs.abs().max(self.rhs.abs())
        }
    }

    /// Marks the check against a constant bound.
    pub fn apply_bound(&mut self, bound: f64) {
        self.pass = Some(match self.ratio {
            Some(r) => r.is_finite() && r <= bound,
            None => true,
        });
    }

    pub fn component(&self, name: &str) -> Option<f64> {
        self.components.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

/// Runs the inequality checkers on one flow. Radii other than r are derived from r and θ.
pub struct Checker<'e, 'a> {
    ev: &'e Functionals<'a>,
    scale: f64,
}

fn need(v: Option<f64>) -> Result<f64> {
    v.ok_or(Error::PressureRequired)
}

fn theta_in(theta: f64, lo_open: f64, hi: f64, hi_inclusive: bool, what: &str) -> Result<()> {
    let ok = theta > lo_open && if hi_inclusive { theta <= hi } else { theta < hi };
    if !ok {
        return invalid(format!("{what}: theta = {theta} outside its admissible range"));
    }
    Ok(())
}

impl<'e, 'a> Checker<'e, 'a> {
    pub fn new(ev: &'e Functionals<'a>) -> Self {
        Self { ev, scale: ev.flow().max_speed() }
    }

    pub fn functionals(&self) -> &Functionals<'a> {
        self.ev
    }

    fn values(&self, x: [f64; 3], t: f64, r: f64) -> Result<std::sync::Arc<CylinderValues>> {
        let cyl = self.ev.cylinder(x, t, r)?;
        self.ev.values(&cyl)
    }

    fn radius(r: f64) -> Result<()> {
        if !(r > 0.0 && r <= 1.0) {
            return invalid(format!("r = {r} outside (0, 1]"));
        }
        Ok(())
    }

    fn config(x: [f64; 3], t: f64, r: f64) -> CheckConfig {
        CheckConfig { x, t, r, theta: None, q: None, k: None }
    }

    fn done(
        &self,
        lemma: LemmaId,
        config: CheckConfig,
        lhs: (f64, Option<f64>),
        terms: Vec<Term>,
        components: Vec<(&str, f64)>,
    ) -> Result<InequalityCheck> {
        let components = components.into_iter().map(|(n, v)| (n.to_string(), v)).collect();
        InequalityCheck::assemble(lemma, config, lhs.0, lhs.1, terms, components, self.scale)
    }

    /// A(r) + E(r) against C(2r)^{2/3} + C(2r) + C(2r)^{1/3}D(2r)^{2/3}.
    pub fn local_energy_i(&self, x: [f64; 3], t: f64, r: f64) -> Result<InequalityCheck> {
        Self::radius(r)?;
        let v1 = self.values(x, t, r)?;
        let v2 = self.values(x, t, 2.0 * r)?;
        let d2 = need(v2.d)?;
        let (a, e, c2) = (v1.a, v1.e(), v2.c);
        let terms = vec![
            Term::new("C(2r)^(2/3)", c2.powf(2.0 / 3.0), Some(2.0)),
            Term::new("C(2r)", c2, Some(3.0)),
            Term::new("C(2r)^(1/3) D(2r)^(2/3)", c2.cbrt() * d2.powf(2.0 / 3.0), Some(3.0)),
        ];
        let comps = vec![("A(r)", a), ("E(r)", e), ("C(2r)", c2), ("D(2r)", d2)];
        self.done(LemmaId::LocalEnergyI, Self::config(x, t, r), (a + e, Some(2.0)), terms, comps)
    }

    /// A(r) + E(r) against (1 + E(2r))G(2r) + P(2r), plus F(2r) when a force is present.
    pub fn local_energy_ii(&self, x: [f64; 3], t: f64, r: f64) -> Result<InequalityCheck> {
        Self::radius(r)?;
        let v1 = self.values(x, t, r)?;
        let v2 = self.values(x, t, 2.0 * r)?;
        let p2 = need(v2.p)?;
        let (a, e, e2, g2, f2) = (v1.a, v1.e(), v2.e(), v2.g, v2.f);
        let mut terms =
            vec![Term::new("(1+E(2r)) G(2r)", (1.0 + e2) * g2, None), Term::new("P(2r)", p2, Some(4.0))];
        if !v2.force_absent {
            terms.push(Term::new("F(2r)", f2, Some(4.0)));
        }
        let comps = vec![("A(r)", a), ("E(r)", e), ("E(2r)", e2), ("G(2r)", g2), ("P(2r)", p2), ("F(2r)", f2)];
        self.done(LemmaId::LocalEnergyII, Self::config(x, t, r), (a + e, Some(2.0)), terms, comps)
    }

    /// D(θr) against θD(r) + θ^{−2}C̃(r), 0 < θ < 1/4.
    pub fn pressure_i(&self, x: [f64; 3], t: f64, r: f64, theta: f64) -> Result<InequalityCheck> {
        Self::radius(r)?;
        theta_in(theta, 0.0, 0.25, false, "L41")?;
        let vs = self.values(x, t, theta * r)?;
        let v1 = self.values(x, t, r)?;
        let (ds, d1, ct) = (need(vs.d)?, need(v1.d)?, v1.c_tilde);
        let terms =
            vec![Term::new("theta D(r)", theta * d1, Some(3.0)), Term::new("theta^-2 C~(r)", ct / (theta * theta), Some(3.0))];
        let comps = vec![("D(theta r)", ds), ("D(r)", d1), ("C~(r)", ct)];
        let cfg = CheckConfig { theta: Some(theta), ..Self::config(x, t, r) };
        self.done(LemmaId::PressureI, cfg, (ds, Some(3.0)), terms, comps)
    }

    /// P(2θr) against θ²P(r) + θ^{−2}E(r)² + θ^{−2}F(r), 0 < θ ≤ 1/4.
    pub fn pressure_ii(&self, x: [f64; 3], t: f64, r: f64, theta: f64) -> Result<InequalityCheck> {
        Self::radius(r)?;
        theta_in(theta, 0.0, 0.25, true, "L44")?;
        let vs = self.values(x, t, 2.0 * theta * r)?;
        let v1 = self.values(x, t, r)?;
        let (ps, p1, e, f) = (need(vs.p)?, need(v1.p)?, v1.e(), v1.f);
        let it2 = 1.0 / (theta * theta);
        let mut terms =
            vec![Term::new("theta^2 P(r)", theta * theta * p1, Some(4.0)), Term::new("theta^-2 E(r)^2", it2 * e * e, Some(4.0))];
        if !v1.force_absent {
            terms.push(Term::new("theta^-2 F(r)", it2 * f, Some(4.0)));
        }
        let comps = vec![("P(2 theta r)", ps), ("P(r)", p1), ("E(r)", e), ("F(r)", f)];
        let cfg = CheckConfig { theta: Some(theta), ..Self::config(x, t, r) };
        self.done(LemmaId::PressureII, cfg, (ps, Some(4.0)), terms, comps)
    }

    /// Both forms: C(θr) against θ³A(r)^{3/2} + θ^{−2}C̃(r), and against θC(r) + θ^{−2}C̃(r).
    pub fn c_split(&self, x: [f64; 3], t: f64, r: f64, theta: f64) -> Result<[InequalityCheck; 2]> {
        Self::radius(r)?;
        theta_in(theta, 0.0, 1.0, true, "L51")?;
        let vs = self.values(x, t, theta * r)?;
        let v1 = self.values(x, t, r)?;
        let (cs, a, c, ct) = (vs.c, v1.a, v1.c, v1.c_tilde);
        let tail = Term::new("theta^-2 C~(r)", ct / (theta * theta), Some(3.0));
        let cfg = CheckConfig { theta: Some(theta), ..Self::config(x, t, r) };
        let comps = vec![("C(theta r)", cs), ("A(r)", a), ("C(r)", c), ("C~(r)", ct)];
        let first = self.done(
            LemmaId::CSplitA,
            cfg,
            (cs, Some(3.0)),
            vec![Term::new("theta^3 A(r)^(3/2)", theta.powi(3) * a.powf(1.5), Some(3.0)), tail.clone()],
            comps.clone(),
        )?;
        let second = self.done(
            LemmaId::CSplitB,
            cfg,
            (cs, Some(3.0)),
            vec![Term::new("theta C(r)", theta * c, Some(3.0)), tail],
            comps,
        )?;
        Ok([first, second])
    }

    /// C̃(r) against A(r)^α E_q(r)^β.
    pub fn interp_i(&self, x: [f64; 3], t: f64, r: f64, q: f64, k: f64) -> Result<InequalityCheck> {
        Self::radius(r)?;
        check_k(q, k)?;
        let cyl = self.ev.cylinder(x, t, r)?;
        let v = self.ev.values(&cyl)?;
        let eq = self.ev.eq(&cyl, q)?;
        let (al, be) = (alpha(q, k), beta(q, k));
        let terms = vec![Term::new("A(r)^alpha E_q(r)^beta", v.a.powf(al) * eq.powf(be), Some(2.0 * al + q * be))];
        let comps = vec![("C~(r)", v.c_tilde), ("A(r)", v.a), ("E_q(r)", eq), ("alpha", al), ("beta", be)];
        let cfg = CheckConfig { q: Some(q), k: Some(k), ..Self::config(x, t, r) };
        self.done(LemmaId::InterpI, cfg, (v.c_tilde, Some(3.0)), terms, comps)
    }

    /// X(θr) against θX(r) + θ^{−2}A(r)^α E_q(r)^β with X = C + D.
    pub fn x_decay(&self, x: [f64; 3], t: f64, r: f64, theta: f64, q: f64, k: f64) -> Result<InequalityCheck> {
        Self::radius(r)?;
        theta_in(theta, 0.0, 1.0, true, "L53")?;
        check_k(q, k)?;
        let vs = self.values(x, t, theta * r)?;
        let cyl = self.ev.cylinder(x, t, r)?;
        let v1 = self.ev.values(&cyl)?;
        let eq = self.ev.eq(&cyl, q)?;
        let xs = vs.c + need(vs.d)?;
        let x1 = v1.c + need(v1.d)?;
        let (al, be) = (alpha(q, k), beta(q, k));
        let terms = vec![
            Term::new("theta X(r)", theta * x1, Some(3.0)),
            Term::new("theta^-2 A(r)^alpha E_q(r)^beta", v1.a.powf(al) * eq.powf(be) / (theta * theta), Some(2.0 * al + q * be)),
        ];
        let comps = vec![("X(theta r)", xs), ("X(r)", x1), ("A(r)", v1.a), ("E_q(r)", eq), ("alpha", al), ("beta", be)];
        let cfg = CheckConfig { theta: Some(theta), q: Some(q), k: Some(k), ..Self::config(x, t, r) };
        self.done(LemmaId::XDecay, cfg, (xs, Some(3.0)), terms, comps)
    }

    /// G(θr) against θ^{−1}E(r) + θ²A(r).
    pub fn interp_ii(&self, x: [f64; 3], t: f64, r: f64, theta: f64) -> Result<InequalityCheck> {
        Self::radius(r)?;
        theta_in(theta, 0.0, 1.0, true, "L54")?;
        let vs = self.values(x, t, theta * r)?;
        let v1 = self.values(x, t, r)?;
        let terms = vec![
            Term::new("theta^-1 E(r)", v1.e() / theta, Some(2.0)),
            Term::new("theta^2 A(r)", theta * theta * v1.a, Some(2.0)),
        ];
        let comps = vec![("G(theta r)", vs.g), ("E(r)", v1.e()), ("A(r)", v1.a)];
        let cfg = CheckConfig { theta: Some(theta), ..Self::config(x, t, r) };
        self.done(LemmaId::InterpII, cfg, (vs.g, Some(2.0)), terms, comps)
    }

    /// C(r)^{2/3} against A(r) + E(r).
    pub fn c23_bound(&self, x: [f64; 3], t: f64, r: f64) -> Result<InequalityCheck> {
        Self::radius(r)?;
        let v = self.values(x, t, r)?;
        let terms = vec![Term::new("A(r)", v.a, Some(2.0)), Term::new("E(r)", v.e(), Some(2.0))];
        let comps = vec![("C(r)", v.c), ("A(r)", v.a), ("E(r)", v.e())];
        self.done(LemmaId::C23Bound, Self::config(x, t, r), (v.c.powf(2.0 / 3.0), Some(2.0)), terms, comps)
    }

    /// Dispatch by id; the C split returns the requested form.
    pub fn check(&self, lemma: LemmaId, cfg: &CheckConfig) -> Result<InequalityCheck> {
        let (x, t, r) = (cfg.x, cfg.t, cfg.r);
        let theta = || cfg.theta.ok_or_else(|| Error::InvalidParameter(format!("{lemma} needs theta")));
        let qk = || match (cfg.q, cfg.k) {
            (Some(q), Some(k)) => Ok((q, k)),
            _ => Err(Error::InvalidParameter(format!("{lemma} needs q and k"))),
        };
        match lemma {
            LemmaId::EnergyBalance => invalid("the energy balance is checked by check_energy_balance"),
            LemmaId::LocalEnergyI => self.local_energy_i(x, t, r),
            LemmaId::LocalEnergyII => self.local_energy_ii(x, t, r),
            LemmaId::PressureI => self.pressure_i(x, t, r, theta()?),
            LemmaId::PressureII => self.pressure_ii(x, t, r, theta()?),
            LemmaId::CSplitA => Ok(self.c_split(x, t, r, theta()?)?[0].clone()),
            LemmaId::CSplitB => Ok(self.c_split(x, t, r, theta()?)?[1].clone()),
            LemmaId::InterpI => {
                let (q, k) = qk()?;
                self.interp_i(x, t, r, q, k)
            }
            LemmaId::XDecay => {
                let (q, k) = qk()?;
                self.x_decay(x, t, r, theta()?, q, k)
            }
            LemmaId::InterpII => self.interp_ii(x, t, r, theta()?),
            LemmaId::C23Bound => self.c23_bound(x, t, r),
        }
    }
}
