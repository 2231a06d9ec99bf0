//! Polynomial vector fields over named species.
//!
//! A [`PolyOde`] is a list of species together with one polynomial right-hand
//! side per species. Coefficients are plain `f64`s; every monomial is a product
//! of species raised to small positive integer powers. This is exactly the form
//! that mass-action kinetics produces, so it is the common currency between the
//! system builders, the integrator and the reaction-network compiler.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest exponent a single species may carry inside one monomial.
pub const MAX_EXPONENT: u32 = 8;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("invalid species name {0:?} (expected [A-Za-z][A-Za-z0-9_]*)")]
    InvalidSpeciesName(String),
    #[error("species {0:?} listed more than once")]
    DuplicateSpecies(String),
    #[error("unknown species {0:?}")]
    UnknownSpecies(String),
    #[error("exponent {exponent} of species {species:?} exceeds the bound {MAX_EXPONENT}")]
    ExponentTooLarge { species: String, exponent: u32 },
    #[error("non-finite coefficient {coeff} in equation for {species:?}")]
    NonFiniteCoefficient { species: String, coeff: f64 },
    #[error("state has {found} entries but the system has {expected} species")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("species {0:?} has a right-hand side in both composed systems")]
    ConflictingDefinition(String),
    #[error("species {0:?} is not closed under the requested restriction")]
    NotClosed(String),
    #[error("malformed system JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// A validated species (or concentration variable) name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Species(String);

impl Species {
    pub fn new(name: impl Into<String>) -> Result<Self, PolyError> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(Species(name))
        } else {
            Err(PolyError::InvalidSpeciesName(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Product of species powers. The empty monomial is the constant `1`.
///
/// Monomials order by total degree first; within one degree the monomial with
/// the larger exponent on the alphabetically earliest differing species comes
/// first (`x^2 < x*y < y^2`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(BTreeMap<Species, u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(BTreeMap::new())
    }

    /// Builds a monomial from `(species, exponent)` pairs. Zero exponents are
    /// dropped and repeated species multiply.
    pub fn new<'a, I>(factors: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (&'a str, u32)>,
    {
        let mut map = BTreeMap::new();
        for (name, exp) in factors {
            if exp == 0 {
                continue;
            }
            *map.entry(Species::new(name)?).or_insert(0) += exp;
        }
        let m = Monomial(map);
        m.check_bounds()?;
        Ok(m)
    }

    /// Single species to the first power.
    pub fn var(name: &str) -> Result<Self, PolyError> {
        Self::new([(name, 1)])
    }

    fn check_bounds(&self) -> Result<(), PolyError> {
        match self.0.iter().find(|(_, &e)| e > MAX_EXPONENT) {
            Some((s, &e)) => Err(PolyError::ExponentTooLarge {
                species: s.to_string(),
                exponent: e,
            }),
            None => Ok(()),
        }
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, name: &str) -> u32 {
        self.0.iter().find(|(s, _)| s.as_str() == name).map_or(0, |(_, &e)| e)
    }

    pub fn factors(&self) -> impl Iterator<Item = (&Species, u32)> {
        self.0.iter().map(|(s, &e)| (s, e))
    }

    pub fn times(&self, other: &Monomial) -> Result<Monomial, PolyError> {
        let mut map = self.0.clone();
        for (s, &e) in &other.0 {
            *map.entry(s.clone()).or_insert(0) += e;
        }
        let m = Monomial(map);
        m.check_bounds()?;
        Ok(m)
    }

    /// Removes one unit of `name`; `None` when the species is absent.
    pub fn without_one(&self, name: &str) -> Option<Monomial> {
        let mut map = self.0.clone();
        let key = map.keys().find(|s| s.as_str() == name)?.clone();
        let e = map.get_mut(&key)?;
        *e -= 1;
        if *e == 0 {
            map.remove(&key);
        }
        Some(Monomial(map))
    }

    /// Renames every species through `f`.
    pub fn rename<F>(&self, mut f: F) -> Result<Monomial, PolyError>
    where
        F: FnMut(&str) -> String,
    {
        let mut map = BTreeMap::new();
        for (s, &e) in &self.0 {
            *map.entry(Species::new(f(s.as_str()))?).or_insert(0) += e;
        }
        Ok(Monomial(map))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let names: BTreeSet<&Species> = self.0.keys().chain(other.0.keys()).collect();
            for s in names {
                let a = self.0.get(s).copied().unwrap_or(0);
                let b = other.0.get(s).copied().unwrap_or(0);
                if a != b {
                    return b.cmp(&a);
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let mut first = true;
        for (s, &e) in &self.0 {
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub monomial: Monomial,
}

impl Term {
    pub fn new(coeff: f64, monomial: Monomial) -> Self {
        Term { coeff, monomial }
    }
}

/// A term whose negative coefficient cannot be realized by a mass-action
/// reaction: the target species does not occur in the monomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub species: Species,
    pub monomial: Monomial,
    pub coeff: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "term ({})*{} in d{}/dt does not contain {}",
            self.coeff, self.monomial, self.species, self.species
        )
    }
}

/// Polynomial ODE system `d(species_i)/dt = sum_j coeff_ij * monomial_ij`.
///
/// Species without terms have a zero right-hand side. They are how a system
/// refers to signals that another system defines (see [`PolyOde::compose`]).
#[derive(Debug, Clone, PartialEq)]
pub struct PolyOde {
    species: Vec<Species>,
    equations: Vec<Vec<Term>>,
}

impl PolyOde {
    pub fn empty() -> Self {
        PolyOde {
            species: Vec::new(),
            equations: Vec::new(),
        }
    }

    pub fn builder() -> PolyOdeBuilder {
        PolyOdeBuilder::default()
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn species_names(&self) -> Vec<String> {
        self.species.iter().map(|s| s.to_string()).collect()
    }

    pub fn dim(&self) -> usize {
        self.species.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s.as_str() == name)
    }

    /// Terms of the equation for species `i`.
    pub fn terms(&self, i: usize) -> &[Term] {
        &self.equations[i]
    }

    pub fn equation(&self, name: &str) -> Option<&[Term]> {
        self.index_of(name).map(|i| self.terms(i))
    }

    pub fn term_count(&self) -> usize {
        self.equations.iter().map(Vec::len).sum()
    }

    /// Coefficient of `monomial` in the equation for `species` (canonical
    /// systems hold at most one such term; otherwise the sum is returned).
    pub fn coefficient(&self, species: &str, monomial: &Monomial) -> f64 {
        self.equation(species)
            .map(|terms| terms.iter().filter(|t| &t.monomial == monomial).map(|t| t.coeff).sum())
            .unwrap_or(0.0)
    }

    /// Evaluates the vector field at `state` (one entry per species, in order).
    pub fn eval(&self, state: &[f64]) -> Result<Vec<f64>, PolyError> {
        let field = self.vector_field();
        if state.len() != field.dim() {
            return Err(PolyError::DimensionMismatch {
                expected: field.dim(),
                found: state.len(),
            });
        }
        let mut out = vec![0.0; field.dim()];
        field.eval_into(state, &mut out);
        Ok(out)
    }

    /// Index-based form used in inner loops.
    pub fn vector_field(&self) -> VectorField {
        let index: HashMap<&str, usize> = self.species.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let equations = self
            .equations
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|t| IndexedTerm {
                        coeff: t.coeff,
                        factors: t.monomial.factors().map(|(s, e)| (index[s.as_str()], e)).collect(),
                    })
                    .collect()
            })
            .collect();
        VectorField { equations }
    }

    /// Merges like terms, drops zero coefficients and sorts each equation by
    /// monomial order. Idempotent.
    pub fn canonicalize(&self) -> PolyOde {
        let equations = self
            .equations
            .iter()
            .map(|terms| {
                let mut merged: BTreeMap<&Monomial, f64> = BTreeMap::new();
                for t in terms {
                    *merged.entry(&t.monomial).or_insert(0.0) += t.coeff;
                }
                merged
                    .into_iter()
                    .filter(|&(_, c)| c != 0.0)
                    .map(|(m, c)| Term::new(c, m.clone()))
                    .collect()
            })
            .collect();
        PolyOde {
            species: self.species.clone(),
            equations,
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.equations.iter().all(|terms| {
            terms.iter().all(|t| t.coeff != 0.0) && terms.windows(2).all(|w| w[0].monomial < w[1].monomial)
        })
    }

    /// Every negative term whose monomial does not contain its own species.
    /// An empty result means the system is mass-action realizable.
    pub fn check_realizability(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (s, terms) in self.species.iter().zip(&self.equations) {
            for t in terms {
                if t.coeff < 0.0 && t.monomial.exponent(s.as_str()) == 0 {
                    out.push(Violation {
                        species: s.clone(),
                        monomial: t.monomial.clone(),
                        coeff: t.coeff,
                    });
                }
            }
        }
        out
    }

    /// Union of two systems. Species keep `self`'s order followed by new ones
    /// from `other`. A species may carry terms in at most one operand.
    pub fn compose(&self, other: &PolyOde) -> Result<PolyOde, PolyError> {
        let mut species = self.species.clone();
        let mut equations = self.equations.clone();
        for (s, terms) in other.species.iter().zip(&other.equations) {
            match species.iter().position(|x| x == s) {
                Some(i) => {
                    if !equations[i].is_empty() && !terms.is_empty() {
                        return Err(PolyError::ConflictingDefinition(s.to_string()));
                    }
                    equations[i].extend(terms.iter().cloned());
                }
                None => {
                    species.push(s.clone());
                    equations.push(terms.clone());
                }
            }
        }
        Ok(PolyOde { species, equations }.canonicalize())
    }

    /// Sub-system on `names`. Fails unless every monomial in those equations
    /// only involves species from `names`.
    pub fn restrict(&self, names: &[&str]) -> Result<PolyOde, PolyError> {
        let mut b = PolyOde::builder();
        for &n in names {
            b = b.species(n);
        }
        for &n in names {
            let i = self
                .index_of(n)
                .ok_or_else(|| PolyError::UnknownSpecies(n.to_string()))?;
            for t in &self.equations[i] {
                if let Some((s, _)) = t.monomial.factors().find(|(s, _)| !names.contains(&s.as_str())) {
                    return Err(PolyError::NotClosed(s.to_string()));
                }
                b = b.term(n, t.coeff, t.monomial.clone());
            }
        }
        b.build()
    }

    pub fn from_json(text: &str) -> Result<PolyOde, PolyError> {
        let raw: RawPolyOde = serde_json::from_str(text)?;
        raw.into_system()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RawPolyOde::from(self)).expect("system JSON is always serializable")
    }
}

impl fmt::Display for PolyOde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, terms) in self.species.iter().zip(&self.equations) {
            write!(f, "d{s}/dt =")?;
            if terms.is_empty() {
                write!(f, " 0")?;
            }
            for (k, t) in terms.iter().enumerate() {
                let sign = if t.coeff < 0.0 {
                    "-"
                } else if k == 0 {
                    ""
                } else {
                    "+"
                };
                write!(f, " {sign}{}*{}", t.coeff.abs(), t.monomial)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Incremental construction of a [`PolyOde`]. Errors surface in [`build`].
///
/// [`build`]: PolyOdeBuilder::build
#[derive(Debug, Default)]
pub struct PolyOdeBuilder {
    species: Vec<String>,
    terms: Vec<(String, f64, Monomial)>,
}

impl PolyOdeBuilder {
    pub fn species(mut self, name: &str) -> Self {
        self.species.push(name.to_string());
        self
    }

    pub fn term(mut self, target: &str, coeff: f64, monomial: Monomial) -> Self {
        self.terms.push((target.to_string(), coeff, monomial));
        self
    }

    /// Builds the system without canonicalizing it.
    pub fn build_raw(self) -> Result<PolyOde, PolyError> {
        let mut species = Vec::with_capacity(self.species.len());
        for name in self.species {
            let s = Species::new(name)?;
            if species.contains(&s) {
                return Err(PolyError::DuplicateSpecies(s.0));
            }
            species.push(s);
        }
        let mut equations = vec![Vec::new(); species.len()];
        for (target, coeff, monomial) in self.terms {
            let i = species
                .iter()
                .position(|s| s.as_str() == target)
                .ok_or_else(|| PolyError::UnknownSpecies(target.clone()))?;
            if !coeff.is_finite() {
                return Err(PolyError::NonFiniteCoefficient { species: target, coeff });
            }
            if let Some((s, _)) = monomial.factors().find(|(s, _)| !species.contains(s)) {
                return Err(PolyError::UnknownSpecies(s.to_string()));
            }
            equations[i].push(Term::new(coeff, monomial));
        }
        Ok(PolyOde { species, equations })
    }

    pub fn build(self) -> Result<PolyOde, PolyError> {
        Ok(self.build_raw()?.canonicalize())
    }
}

#[derive(Debug, Clone)]
struct IndexedTerm {
    coeff: f64,
    factors: Vec<(usize, u32)>,
}

/// A [`PolyOde`] resolved to species indices, with an exact Jacobian.
#[derive(Debug, Clone)]
pub struct VectorField {
    equations: Vec<Vec<IndexedTerm>>,
}

impl VectorField {
    pub fn dim(&self) -> usize {
        self.equations.len()
    }

    pub fn eval_into(&self, state: &[f64], out: &mut [f64]) {
        for (o, terms) in out.iter_mut().zip(&self.equations) {
            *o = terms
                .iter()
                .map(|t| t.coeff * t.factors.iter().map(|&(i, e)| state[i].powi(e as i32)).product::<f64>())
                .sum();
        }
    }

    /// Writes `d rate_row / d state_col` into `jac` (row-major, `dim * dim`).
    pub fn jacobian_into(&self, state: &[f64], jac: &mut [f64]) {
        let n = self.dim();
        jac.iter_mut().for_each(|v| *v = 0.0);
        for (row, terms) in self.equations.iter().enumerate() {
            for t in terms {
                for (k, &(col, e)) in t.factors.iter().enumerate() {
                    let mut d = t.coeff * f64::from(e) * state[col].powi(e as i32 - 1);
                    for (j, &(other, oe)) in t.factors.iter().enumerate() {
                        if j != k {
                            d *= state[other].powi(oe as i32);
                        }
                    }
                    jac[row * n + col] += d;
                }
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawTerm {
    coeff: f64,
    #[serde(default)]
    monomial: IndexMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct RawPolyOde {
    species: Vec<String>,
    #[serde(default)]
    equations: IndexMap<String, Vec<RawTerm>>,
}

impl From<&PolyOde> for RawPolyOde {
    fn from(sys: &PolyOde) -> Self {
        let equations = sys
            .species
            .iter()
            .zip(&sys.equations)
            .map(|(s, terms)| {
                let raw = terms
                    .iter()
                    .map(|t| RawTerm {
                        coeff: t.coeff,
                        monomial: t.monomial.factors().map(|(s, e)| (s.to_string(), e)).collect(),
                    })
                    .collect();
                (s.to_string(), raw)
            })
            .collect();
        RawPolyOde {
            species: sys.species_names(),
            equations,
        }
    }
}

impl RawPolyOde {
    fn into_system(self) -> Result<PolyOde, PolyError> {
        let mut b = PolyOde::builder();
        for s in &self.species {
            b = b.species(s);
        }
        for (target, terms) in self.equations {
            for t in terms {
                let m = Monomial::new(t.monomial.iter().map(|(s, &e)| (s.as_str(), e)))?;
                b = b.term(&target, t.coeff, m);
            }
        }
        b.build_raw()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(f: &[(&str, u32)]) -> Monomial {
        Monomial::new(f.iter().copied()).unwrap()
    }

    /// The xy part of the core oscillator written term by term, unsimplified.
    fn sigma_xy(eta1: f64, eps: f64, rho: f64) -> PolyOde {
        let k = eta1 / eps;
        PolyOde::builder()
            .species("x")
            .species("y")
            .term("x", -k, m(&[("x", 4)]))
            .term("x", 6.0 * k, m(&[("x", 3)]))
            .term("x", -9.0 * k, m(&[("x", 2)]))
            .term("x", 5.0 * k, m(&[("x", 1)]))
            .term("x", -k, m(&[("x", 1), ("y", 1)]))
            .term("y", eta1, m(&[("x", 1), ("y", 1)]))
            .term("y", -eta1 * rho, m(&[("y", 1)]))
            .build()
            .unwrap()
    }

    #[test]
    fn linear_term_evaluates() {
        let sys = PolyOde::builder()
            .species("x")
            .term("x", 5.0, m(&[("x", 1)]))
            .build()
            .unwrap();
        assert_eq!(sys.eval(&[1.0]).unwrap(), vec![5.0]);
    }

    #[test]
    fn core_xy_at_unit_point() {
        let sys = sigma_xy(0.1, 0.001, 2.1);
        let rates = sys.eval(&[1.0, 1.0]).unwrap();
        assert!(rates[0].abs() < 1e-12);
        approx::assert_abs_diff_eq!(rates[1], -0.11, epsilon = 1e-12);
    }

    #[test]
    fn empty_system_has_empty_rates() {
        assert!(PolyOde::empty().eval(&[]).unwrap().is_empty());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let sys = sigma_xy(0.1, 0.001, 2.1);
        match sys.eval(&[1.0]) {
            Err(PolyError::DimensionMismatch { expected: 2, found: 1 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn canonicalize_merges_and_cancels() {
        let merged = PolyOde::builder()
            .species("x")
            .term("x", 3.0, m(&[("x", 1)]))
            .term("x", 2.0, m(&[("x", 1)]))
            .build()
            .unwrap();
        assert_eq!(merged.terms(0), &[Term::new(5.0, m(&[("x", 1)]))]);

        let cancelled = PolyOde::builder()
            .species("x")
            .species("y")
            .term("x", 1.0, m(&[("x", 1)]))
            .term("x", -1.0, m(&[("x", 1)]))
            .build()
            .unwrap();
        assert!(cancelled.terms(0).is_empty());
    }

    #[test]
    fn monomial_order_is_graded_lex() {
        let mut ms = [
            m(&[("y", 2)]),
            m(&[("x", 1), ("y", 1)]),
            m(&[]),
            m(&[("x", 2)]),
            m(&[("y", 1)]),
        ];
        ms.sort();
        let shown: Vec<String> = ms.iter().map(|m| m.to_string()).collect();
        assert_eq!(shown, ["1", "y", "x^2", "x*y", "y^2"]);
    }

    #[test]
    fn exponent_bound_is_enforced() {
        assert!(matches!(
            Monomial::new([("x", 9)]),
            Err(PolyError::ExponentTooLarge { exponent: 9, .. })
        ));
        assert!(m(&[("x", 5)]).times(&m(&[("x", 4)])).is_err());
    }

    #[test]
    fn bad_names_are_rejected() {
        for bad in ["", "1x", "x-y", "_a"] {
            assert!(Species::new(bad).is_err(), "{bad}");
        }
        let dup = PolyOde::builder().species("x").species("x").build();
        assert!(matches!(dup, Err(PolyError::DuplicateSpecies(_))));
        let unknown = PolyOde::builder().species("x").term("x", 1.0, m(&[("q", 1)])).build();
        assert!(matches!(unknown, Err(PolyError::UnknownSpecies(_))));
    }

    #[test]
    fn realizability_flags_foreign_negative_terms() {
        let sys = PolyOde::builder()
            .species("x")
            .species("y")
            .term("x", 1.0, m(&[("x", 1)]))
            .term("x", -1.0, m(&[("y", 1)]))
            .build()
            .unwrap();
        let v = sys.check_realizability();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].species.as_str(), "x");
        assert_eq!(v[0].monomial, m(&[("y", 1)]));
        assert_eq!(v[0].coeff, -1.0);

        let inflow = PolyOde::builder()
            .species("u")
            .term("u", 2.0, Monomial::one())
            .term("u", -1.0, m(&[("u", 1)]))
            .build()
            .unwrap();
        assert!(inflow.check_realizability().is_empty());
        assert!(sigma_xy(0.1, 0.001, 2.1).check_realizability().is_empty());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let sys = sigma_xy(0.1, 0.001, 2.1);
        let field = sys.vector_field();
        let p = [1.7, 2.3];
        let mut jac = [0.0; 4];
        field.jacobian_into(&p, &mut jac);
        let h = 1e-6;
        for col in 0..2 {
            let mut hi = p;
            let mut lo = p;
            hi[col] += h;
            lo[col] -= h;
            let fh = sys.eval(&hi).unwrap();
            let fl = sys.eval(&lo).unwrap();
            for row in 0..2 {
                let fd = (fh[row] - fl[row]) / (2.0 * h);
                approx::assert_relative_eq!(jac[row * 2 + col], fd, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn compose_and_restrict() {
        let a = sigma_xy(0.1, 0.001, 2.1);
        let b = PolyOde::builder()
            .species("z")
            .species("x")
            .term("z", 1.0, m(&[("x", 1)]))
            .build()
            .unwrap();
        let ab = a.compose(&b).unwrap();
        assert_eq!(ab.species_names(), ["x", "y", "z"]);
        assert!(a.compose(&a).is_err());
        assert_eq!(ab.restrict(&["x", "y"]).unwrap(), a);
        assert!(matches!(ab.restrict(&["z"]), Err(PolyError::NotClosed(_))));
    }

    #[test]
    fn json_round_trip_preserves_system() {
        let sys = sigma_xy(0.1, 0.001, 2.1);
        let text = sys.to_json();
        assert!(text.contains("\"equations\""));
        assert_eq!(PolyOde::from_json(&text).unwrap(), sys);
    }

    #[test]
    fn json_accepts_documented_layout() {
        let text = r#"{ "species": ["x", "y"],
                        "equations": { "x": [ {"coeff": 1.0, "monomial": {"x": 1}},
                                              {"coeff": -1.0, "monomial": {"y": 1}} ] } }"#;
        let sys = PolyOde::from_json(text).unwrap();
        assert_eq!(sys.term_count(), 2);
        assert_eq!(sys.check_realizability().len(), 1);
    }
}
