//! Planar vector fields built from monomial terms `c * x^ea * y^eb`.
//!
//! Exponents are exact rationals; evaluation on the open positive quadrant
//! uses integer powers where possible and `exp(e * ln x)` otherwise.

use num_rational::Rational64;
use thiserror::Error;

use crate::network::rational_to_f64;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("evaluation point ({0}, {1}) is outside the open positive quadrant")]
    OutsideQuadrant(f64, f64),
}

/// One monomial term `coeff * x^ea * y^eb`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub ea: Rational64,
    pub eb: Rational64,
}

impl Term {
    pub fn new(coeff: f64, ea: Rational64, eb: Rational64) -> Self {
        Term { coeff, ea, eb }
    }
}

/// Exact dyadic conversion of a finite double to a rational, when its
/// reduced form fits in `i64`. Exponents supplied as floats (family
/// parameters, scan grids) round-trip exactly through this.
pub fn rational_from_f64(x: f64) -> Option<Rational64> {
    if !x.is_finite() {
        return None;
    }
    let mut num = x;
    let mut den: i64 = 1;
    while num.fract() != 0.0 && den < (1i64 << 58) {
        num *= 2.0;
        den <<= 1;
    }
    if num.fract() != 0.0 || num.abs() >= (1i64 << 62) as f64 {
        return None;
    }
    Some(Rational64::new(num as i64, den))
}

/// `x^e` for rational `e` and `x > 0`.
pub fn pow_rat(x: f64, e: Rational64) -> f64 {
    if *e.denom() == 1 {
        let n = *e.numer();
        if n.unsigned_abs() <= 64 {
            return x.powi(n as i32);
        }
    }
    (rational_to_f64(e) * x.ln()).exp()
}

/// A planar field `(f, g)` given by monomial term lists for each component.
///
/// Construction merges terms with identical exponent pairs, drops zero
/// coefficients and sorts by exponents, so structurally equal fields compare
/// equal and all downstream output is deterministic.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    x_terms: Vec<Term>,
    y_terms: Vec<Term>,
}

fn normalize(mut terms: Vec<Term>) -> Vec<Term> {
    terms.sort_by_key(|t| (t.ea, t.eb));
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        match out.last_mut() {
            Some(last) if last.ea == t.ea && last.eb == t.eb => last.coeff += t.coeff,
            _ => out.push(t),
        }
    }
    out.retain(|t| t.coeff != 0.0);
    out
}

impl VectorField {
    pub fn new(x_terms: Vec<Term>, y_terms: Vec<Term>) -> Self {
        VectorField {
            x_terms: normalize(x_terms),
            y_terms: normalize(y_terms),
        }
    }

    pub fn x_terms(&self) -> &[Term] {
        &self.x_terms
    }

    pub fn y_terms(&self) -> &[Term] {
        &self.y_terms
    }

    /// Evaluate `(f, g)` at a point of the open positive quadrant.
    pub fn evaluate(&self, x: f64, y: f64) -> Result<(f64, f64), FieldError> {
        if !(x > 0.0 && y > 0.0) {
            return Err(FieldError::OutsideQuadrant(x, y));
        }
        Ok((
            eval_terms(&self.x_terms, x, y),
            eval_terms(&self.y_terms, x, y),
        ))
    }

    /// Evaluation without the quadrant check, for integrator internals that
    /// already guard positivity.
    pub(crate) fn eval_unchecked(&self, x: f64, y: f64) -> (f64, f64) {
        (
            eval_terms(&self.x_terms, x, y),
            eval_terms(&self.y_terms, x, y),
        )
    }

    /// The field with both components multiplied by a constant (a time
    /// rescaling when the constant is positive).
    pub fn scaled(&self, c: f64) -> VectorField {
        let scale = |ts: &[Term]| {
            ts.iter()
                .map(|t| Term::new(c * t.coeff, t.ea, t.eb))
                .collect()
        };
        VectorField::new(scale(&self.x_terms), scale(&self.y_terms))
    }

    /// Magnitude scale of the field at a point: sum of absolute term values.
    /// Used to express residual tolerances relative to the monomial sizes.
    pub fn magnitude(&self, x: f64, y: f64) -> f64 {
        let mag = |ts: &[Term]| -> f64 {
            ts.iter()
                .map(|t| (t.coeff * pow_rat(x, t.ea) * pow_rat(y, t.eb)).abs())
                .sum()
        };
        mag(&self.x_terms).max(mag(&self.y_terms))
    }
}

pub(crate) fn eval_terms(terms: &[Term], x: f64, y: f64) -> f64 {
    terms
        .iter()
        .map(|t| t.coeff * pow_rat(x, t.ea) * pow_rat(y, t.eb))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_network;
    use num_rational::Rational64;

    fn rat(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn quadrangle_field_matches_hand_expansion() {
        // Y -> X -> X+2Y -> 3Y -> Y with unit rates:
        // xdot = y - x y^2, ydot = -y + 2x + x y^2 - 2 y^3
        let net = parse_network("0 1 -> 1 0 @ 1\n1 0 -> 1 2 @ 1\n1 2 -> 0 3 @ 1\n0 3 -> 0 1 @ 1")
            .unwrap();
        let vf = net.vector_field();
        let expect = VectorField::new(
            vec![
                Term::new(1.0, rat(0, 1), rat(1, 1)),
                Term::new(-1.0, rat(1, 1), rat(2, 1)),
            ],
            vec![
                Term::new(-1.0, rat(0, 1), rat(1, 1)),
                Term::new(2.0, rat(1, 1), rat(0, 1)),
                Term::new(1.0, rat(1, 1), rat(2, 1)),
                Term::new(-2.0, rat(0, 1), rat(3, 1)),
            ],
        );
        assert_eq!(vf, expect);
        let (f, g) = vf.evaluate(1.0, 1.0).unwrap();
        assert_eq!((f, g), (0.0, 0.0));
    }

    #[test]
    fn zigzag_field_and_equilibrium() {
        let net = crate::families::zigzag_network(1.0);
        let vf = net.vector_field();
        // xdot = y^3 - 3 x y^2 + 2y, ydot = -y^3 + x y^2 at kappa = 1
        let (f, g) = vf.evaluate(1.0, 1.0).unwrap();
        assert!(f.abs() < 1e-15 && g.abs() < 1e-15);
        let (f, g) = vf.evaluate(2.0, 0.5).unwrap();
        let expect_f = 0.125 - 3.0 * 2.0 * 0.25 + 2.0 * 0.5;
        let expect_g = -0.125 + 2.0 * 0.25;
        assert!((f - expect_f).abs() < 1e-15);
        assert!((g - expect_g).abs() < 1e-15);
    }

    #[test]
    fn empty_field_evaluates_to_zero() {
        let vf = VectorField::new(vec![], vec![]);
        assert_eq!(vf.evaluate(3.0, 4.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn rejects_boundary_points() {
        let vf = VectorField::new(vec![Term::new(1.0, rat(1, 2), rat(0, 1))], vec![]);
        assert!(vf.evaluate(0.0, 1.0).is_err());
        assert!(vf.evaluate(1.0, -1.0).is_err());
    }

    #[test]
    fn merges_like_monomials() {
        let vf = VectorField::new(
            vec![
                Term::new(2.0, rat(1, 2), rat(-1, 3)),
                Term::new(3.0, rat(1, 2), rat(-1, 3)),
                Term::new(1.0, rat(0, 1), rat(0, 1)),
                Term::new(-1.0, rat(0, 1), rat(0, 1)),
            ],
            vec![],
        );
        assert_eq!(vf.x_terms().len(), 1);
        assert_eq!(vf.x_terms()[0].coeff, 5.0);
    }

    #[test]
    fn pow_rat_integer_and_fractional() {
        assert_eq!(pow_rat(3.0, rat(2, 1)), 9.0);
        assert_eq!(pow_rat(2.0, rat(-3, 1)), 0.125);
        assert!((pow_rat(4.0, rat(1, 2)) - 2.0).abs() < 1e-15);
        assert!((pow_rat(8.0, rat(-1, 3)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn merged_field_evaluates_like_raw_terms() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..100 {
            // Build terms with deliberate duplicate exponent pairs.
            let mut raw = Vec::new();
            for _ in 0..4 {
                let ea = rat(rng.gen_range(-3..=3), rng.gen_range(1..=2));
                let eb = rat(rng.gen_range(-3..=3), rng.gen_range(1..=2));
                for _ in 0..rng.gen_range(1..=3) {
                    raw.push(Term::new(rng.gen_range(-2.0..2.0), ea, eb));
                }
            }
            let merged = VectorField::new(raw.clone(), vec![]);
            let (x, y) = (rng.gen_range(0.4..2.5), rng.gen_range(0.4..2.5));
            let direct: f64 = raw
                .iter()
                .map(|t| t.coeff * pow_rat(x, t.ea) * pow_rat(y, t.eb))
                .sum();
            let (f, _) = merged.evaluate(x, y).unwrap();
            let scale: f64 = raw
                .iter()
                .map(|t| (t.coeff * pow_rat(x, t.ea) * pow_rat(y, t.eb)).abs())
                .sum();
            assert!(
                (f - direct).abs() <= 1e-14 * scale.max(1.0),
                "{f} vs {direct}"
            );
        }
    }

    #[test]
    fn translated_network_field_is_monomial_multiple() {
        let net = parse_network("0 1 -> 1 0 @ 1\n1 0 -> 1 2 @ 1\n1 2 -> 0 3 @ 1\n0 3 -> 0 1 @ 1")
            .unwrap();
        let shifted = net.translate(rat(1, 2), rat(-1, 3));
        let (x, y) = (1.7, 0.9);
        let (f0, g0) = net.vector_field().evaluate(x, y).unwrap();
        let (f1, g1) = shifted.vector_field().evaluate(x, y).unwrap();
        let m = pow_rat(x, rat(1, 2)) * pow_rat(y, rat(-1, 3));
        assert!((f1 - m * f0).abs() <= 1e-12 * f0.abs().max(1.0));
        assert!((g1 - m * g0).abs() <= 1e-12 * g0.abs().max(1.0));
    }
}
