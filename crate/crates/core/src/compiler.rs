//! Polynomial ODE -> mass-action CRN translation.
//!
//! Each canonical term `c * m` in `dx_i/dt` becomes one reaction whose
//! reactant complex is `m`. A positive term produces one extra `X_i`, a
//! negative one consumes one `X_i` (which the reactants must therefore
//! contain). Every reaction moves exactly one species by exactly one unit, so
//! the induced mass-action ODE is the input system again.

use std::fmt;

use thiserror::Error;

use crate::crn::{swap_initial_case, Complex, Crn, Reaction};
use crate::polyode::{Monomial, PolyOde, Violation};

#[derive(Debug, Error)]
pub struct CompileError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for CompileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "system is not mass-action realizable:")?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

pub fn compile(sys: &PolyOde) -> Result<Crn, CompileError> {
    let sys = sys.canonicalize();
    let violations = sys.check_realizability();
    if !violations.is_empty() {
        return Err(CompileError { violations });
    }
    let species: Vec<String> = sys.species().iter().map(|s| swap_initial_case(s.as_str())).collect();
    let mut reactions = Vec::with_capacity(sys.term_count());
    for (i, target) in species.iter().enumerate() {
        for t in sys.terms(i) {
            let reactants = Complex::from_monomial(&t.monomial);
            let (products, rate) = if t.coeff > 0.0 {
                (reactants.add(target, 1), t.coeff)
            } else {
                (reactants.add(target, -1), -t.coeff)
            };
            reactions.push(Reaction::new(reactants, products, rate));
        }
    }
    Ok(Crn::new(species, reactions))
}

/// One coefficient that differs between a system and its compiled-and-back
/// image.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub species: String,
    pub monomial: Monomial,
    pub original: f64,
    pub roundtrip: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripReport {
    pub reactions: usize,
    pub terms: usize,
    pub mismatches: Vec<Mismatch>,
}

impl RoundtripReport {
    pub fn is_exact(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compiles `sys`, maps the network back through mass action and diffs the
/// two canonical forms coefficient by coefficient. Coefficients agreeing to
/// `rel_tol` (relative to the larger magnitude) count as equal.
pub fn roundtrip_check(sys: &PolyOde, rel_tol: f64) -> Result<RoundtripReport, CompileError> {
    let original = sys.canonicalize();
    let crn = compile(&original)?;
    let back = crn.to_ode().canonicalize();
    let mut mismatches = Vec::new();
    let mut record = |species: &str, m: &Monomial, a: f64, b: f64| {
        if (a - b).abs() > rel_tol * a.abs().max(b.abs()) {
            mismatches.push(Mismatch {
                species: species.to_string(),
                monomial: m.clone(),
                original: a,
                roundtrip: b,
            });
        }
    };
    for s in original.species() {
        let name = s.as_str();
        let ours = original.equation(name).unwrap_or(&[]);
        let theirs = back.equation(name).unwrap_or(&[]);
        for t in ours {
            record(name, &t.monomial, t.coeff, back.coefficient(name, &t.monomial));
        }
        for t in theirs.iter().filter(|t| !ours.iter().any(|o| o.monomial == t.monomial)) {
            record(name, &t.monomial, 0.0, t.coeff);
        }
    }
    for s in back
        .species()
        .iter()
        .filter(|s| original.index_of(s.as_str()).is_none())
    {
        for t in back.equation(s.as_str()).unwrap_or(&[]) {
            record(s.as_str(), &t.monomial, 0.0, t.coeff);
        }
    }
    Ok(RoundtripReport {
        reactions: crn.reactions.len(),
        terms: original.term_count(),
        mismatches,
    })
}
