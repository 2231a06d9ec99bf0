//! Mass-action chemical reaction networks.
//!
//! Species in a network are written with a capital first letter (`X`, `U1`)
//! and their concentrations with the lowercase counterpart (`x`, `u1`). The
//! mapping between the two swaps the case of the first character, so it is a
//! bijection on identifiers and [`Crn::to_ode`] / [`crate::compiler::compile`]
//! round-trip exactly.
//!
//! Text format, one reaction per line:
//!
//! ```text
//! # comment
//! 2X ->{900} X
//! 0 ->{20} U
//! X + Y ->{0.1} X + 2Y
//! ```

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::polyode::{is_identifier, Monomial, PolyOde, Species};

/// Bound on the total stoichiometry of one side of a reaction.
pub const MAX_SIDE_STOICHIOMETRY: u32 = 8;

/// Swaps the case of the first character: `x1` <-> `X1`.
pub fn swap_initial_case(name: &str) -> String {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => c.to_ascii_uppercase().to_string() + chars.as_str(),
        Some(c) => c.to_ascii_lowercase().to_string() + chars.as_str(),
        None => String::new(),
    }
}

/// A multiset of species, one side of a reaction.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Complex(BTreeMap<String, u32>);

impl Complex {
    pub fn empty() -> Self {
        Complex(BTreeMap::new())
    }

    pub fn new<'a, I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, u32)>,
    {
        let mut map = BTreeMap::new();
        for (s, n) in terms {
            if n > 0 {
                *map.entry(s.to_string()).or_insert(0) += n;
            }
        }
        Complex(map)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self, species: &str) -> u32 {
        self.0.get(species).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(s, &n)| (s.as_str(), n))
    }

    /// Reactant complex of a mass-action monomial (`x^2*y` -> `2X + Y`).
    pub fn from_monomial(m: &Monomial) -> Self {
        Complex(m.factors().map(|(s, e)| (swap_initial_case(s.as_str()), e)).collect())
    }

    pub fn to_monomial(&self) -> Monomial {
        Monomial::new(self.0.iter().map(|(s, &n)| (s.as_str(), n)))
            .and_then(|m| m.rename(swap_initial_case))
            .expect("complex species names are identifiers")
    }

    pub(crate) fn add(&self, species: &str, delta: i64) -> Complex {
        let mut map = self.0.clone();
        let n = map.get(species).copied().unwrap_or(0) as i64 + delta;
        if n > 0 {
            map.insert(species.to_string(), n as u32);
        } else {
            map.remove(species);
        }
        Complex(map)
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (s, &n) in &self.0 {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if n == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{n}{s}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub reactants: Complex,
    pub products: Complex,
    pub rate: f64,
}

impl Reaction {
    pub fn new(reactants: Complex, products: Complex, rate: f64) -> Self {
        Reaction {
            reactants,
            products,
            rate,
        }
    }

    /// Net change `b - a` of one species.
    pub fn net_change(&self, species: &str) -> i64 {
        self.products.count(species) as i64 - self.reactants.count(species) as i64
    }

    fn species(&self) -> impl Iterator<Item = &str> {
        self.reactants.iter().chain(self.products.iter()).map(|(s, _)| s)
    }
}

impl fmt::Display for Reaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ->{{{}}} {}", self.reactants, self.rate, self.products)
    }
}

/// Problems reported by [`Crn::validate`]. Reaction indices are 0-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CrnIssue {
    #[error("reaction {reaction}: species {species:?} is not declared")]
    UnknownSpecies { reaction: usize, species: String },
    #[error("species name {0:?} is not a valid identifier")]
    InvalidName(String),
    #[error("reaction {reaction}: non-positive rate {rate}")]
    NonPositiveRate { reaction: usize, rate: f64 },
    #[error("reaction {reaction}: reactants and products are identical")]
    NetZero { reaction: usize },
    #[error("reaction {reaction}: side stoichiometry {total} exceeds {MAX_SIDE_STOICHIOMETRY}")]
    StoichiometryBound { reaction: usize, total: u32 },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: expected {expected}, found {found:?}")]
pub struct ParseError {
    pub line: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Crn {
    pub species: Vec<String>,
    pub reactions: Vec<Reaction>,
}

impl Crn {
    pub fn new(species: Vec<String>, reactions: Vec<Reaction>) -> Self {
        Crn { species, reactions }
    }

    /// Network whose species list is the order of first appearance.
    pub fn from_reactions(reactions: Vec<Reaction>) -> Self {
        let mut species: Vec<String> = Vec::new();
        for r in &reactions {
            for s in r.species() {
                if !species.iter().any(|x| x == s) {
                    species.push(s.to_string());
                }
            }
        }
        Crn { species, reactions }
    }

    pub fn validate(&self) -> Result<(), Vec<CrnIssue>> {
        let mut issues = Vec::new();
        for s in &self.species {
            if !is_identifier(s) {
                issues.push(CrnIssue::InvalidName(s.clone()));
            }
        }
        for (i, r) in self.reactions.iter().enumerate() {
            for s in r.species() {
                if !self.species.iter().any(|x| x == s) {
                    issues.push(CrnIssue::UnknownSpecies {
                        reaction: i,
                        species: s.to_string(),
                    });
                }
            }
            if !(r.rate > 0.0) || !r.rate.is_finite() {
                issues.push(CrnIssue::NonPositiveRate {
                    reaction: i,
                    rate: r.rate,
                });
            }
            if r.reactants == r.products {
                issues.push(CrnIssue::NetZero { reaction: i });
            }
            for side in [&r.reactants, &r.products] {
                if side.total() > MAX_SIDE_STOICHIOMETRY {
                    issues.push(CrnIssue::StoichiometryBound {
                        reaction: i,
                        total: side.total(),
                    });
                }
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(issues)
        }
    }

    /// Mass-action ODE `dx/dt = Gamma * v(x)`, canonicalized.
    pub fn to_ode(&self) -> PolyOde {
        let mut b = PolyOde::builder();
        for s in &self.species {
            b = b.species(&swap_initial_case(s));
        }
        for r in &self.reactions {
            let rate_monomial = r.reactants.to_monomial();
            for s in &self.species {
                let delta = r.net_change(s);
                if delta != 0 {
                    b = b.term(&swap_initial_case(s), delta as f64 * r.rate, rate_monomial.clone());
                }
            }
        }
        b.build().expect("validated network induces a well-formed system")
    }

    /// Reactions with duplicates merged, sorted; for multiset comparison.
    pub fn canonical_reactions(&self) -> Vec<Reaction> {
        let mut merged: BTreeMap<(&Complex, &Complex), f64> = BTreeMap::new();
        for r in &self.reactions {
            *merged.entry((&r.reactants, &r.products)).or_insert(0.0) += r.rate;
        }
        merged
            .into_iter()
            .map(|((a, b), k)| Reaction::new(a.clone(), b.clone(), k))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Crn, ParseError> {
        let mut reactions = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            reactions.push(parse_reaction(line, k + 1)?);
        }
        Ok(Crn::from_reactions(reactions))
    }

    pub fn format(&self) -> String {
        self.reactions.iter().map(|r| format!("{r}\n")).collect()
    }
}

fn parse_reaction(line: &str, lineno: usize) -> Result<Reaction, ParseError> {
    let err = |expected: &str, found: &str| ParseError {
        line: lineno,
        expected: expected.to_string(),
        found: found.to_string(),
    };
    let (lhs, rest) = line.split_once("->{").ok_or_else(|| err("'->{<rate>}' arrow", line))?;
    let (rate_text, rhs) = rest.split_once('}').ok_or_else(|| err("'}' closing the rate", rest))?;
    let rate: f64 = rate_text
        .trim()
        .parse()
        .ok()
        .filter(|r: &f64| r.is_finite())
        .ok_or_else(|| err("decimal rate constant", rate_text.trim()))?;
    let reactants = parse_side(lhs.trim(), lineno)?;
    let products = parse_side(rhs.trim(), lineno)?;
    Ok(Reaction::new(reactants, products, rate))
}

fn parse_side(side: &str, lineno: usize) -> Result<Complex, ParseError> {
    let err = |expected: &str, found: &str| ParseError {
        line: lineno,
        expected: expected.to_string(),
        found: found.to_string(),
    };
    if side == "0" {
        return Ok(Complex::empty());
    }
    if side.is_empty() {
        return Err(err("'0' or species terms", side));
    }
    let mut terms = Vec::new();
    for term in side.split('+') {
        let term = term.trim();
        let digits = term.chars().take_while(char::is_ascii_digit).count();
        let (count, name) = term.split_at(digits);
        let name = name.trim();
        let count: u32 = if count.is_empty() {
            1
        } else {
            count
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| err("positive stoichiometric coefficient", count))?
        };
        if !is_identifier(name) {
            return Err(err("species name", term));
        }
        terms.push((name, count));
    }
    Ok(Complex::new(terms))
}

impl fmt::Display for Crn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format())
    }
}

/// Concentration-variable name for a network species.
pub fn concentration_name(species: &str) -> Result<Species, crate::polyode::PolyError> {
    Species::new(swap_initial_case(species))
}
