#![allow(dead_code)]

use chemclock::{Monomial, PolyOde};
use proptest::prelude::*;

pub const NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

/// Exponent vector with total degree at most 4.
fn exponents(n: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..=4, n).prop_filter("degree <= 4", |e| e.iter().sum::<u32>() <= 4)
}

fn coefficient() -> impl Strategy<Value = f64> {
    (prop::bool::ANY, -3.0f64..3.0).prop_map(|(neg, e)| if neg { -(10f64.powf(e)) } else { 10f64.powf(e) })
}

fn monomial(names: &[&str], exps: &[u32]) -> Monomial {
    Monomial::new(names.iter().copied().zip(exps.iter().copied())).unwrap()
}

/// Random systems over up to 6 species, degree at most 4. A negative term
/// whose monomial lacks its own species is repaired by multiplying that
/// species in (or by flipping the sign when the degree budget is spent).
pub fn realizable_system() -> impl Strategy<Value = PolyOde> {
    (1usize..=6)
        .prop_flat_map(|n| {
            let term = (0..n, exponents(n), coefficient());
            (Just(n), prop::collection::vec(term, 0..=12))
        })
        .prop_map(|(n, terms)| {
            let names = &NAMES[..n];
            let mut b = PolyOde::builder();
            for name in names {
                b = b.species(name);
            }
            for (target, mut exps, mut coeff) in terms {
                if coeff < 0.0 && exps[target] == 0 {
                    if exps.iter().sum::<u32>() < 4 {
                        exps[target] = 1;
                    } else {
                        coeff = -coeff;
                    }
                }
                b = b.term(names[target], coeff, monomial(names, &exps));
            }
            b.build().unwrap()
        })
}

/// Random systems with no realizability repair.
pub fn any_system() -> impl Strategy<Value = PolyOde> {
    (1usize..=4)
        .prop_flat_map(|n| {
            let term = (0..n, exponents(n), coefficient());
            (Just(n), prop::collection::vec(term, 0..=10))
        })
        .prop_map(|(n, terms)| {
            let names = &NAMES[..n];
            let mut b = PolyOde::builder();
            for name in names {
                b = b.species(name);
            }
            for (target, exps, coeff) in terms {
                b = b.term(names[target], coeff, monomial(names, &exps));
            }
            b.build_raw().unwrap()
        })
}

pub fn state(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..2.0, n)
}

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn composite_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels.is_multiple_of(2));
    let h = (b - a) / panels as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for k in 1..panels {
        let v = f(a + k as f64 * h);
        if k % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b))
}

/// Reference network for the default parameters. The X + Y reaction
/// with rate eta1 keeps its catalytic X on the product side.
pub const REFERENCE_CRN: &str = "\
4X ->{100} 3X
3X ->{600} 4X
2X ->{900} X
X ->{500} 2X
X + Y ->{100} Y
X + Y ->{0.1} X + 2Y
Y ->{0.21} 0
0 ->{20} U
U ->{10} 0
U + V ->{50000} V
X ->{10} V + X
V ->{10} 0
U + V ->{50000} U
";
