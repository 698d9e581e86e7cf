//! Global tests: the monomial Bendixson-Dulac search for quadrangles,
//! reversibility detection, reversible-center conditions for the symmetric
//! three-reaction family and the quadratic Lienard center identity.

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::equilibrium::{QuadrangleTemplate, ScaledSystem, ThreeReactionTemplate};
use crate::field::{pow_rat, VectorField};
use crate::network::rational_to_f64;

#[derive(Debug, Error)]
pub enum GlobalError {
    #[error("network does not match the expected template: {0}")]
    TemplateMismatch(String),
    #[error("degenerate exponent pattern: {0}")]
    Degenerate(String),
}

/// One side's feasible interval for a Dulac exponent: the intersection of
/// the per-term constraints. `None` bounds are unbounded ends.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExponentInterval {
    pub lo: Option<Rational64>,
    pub hi: Option<Rational64>,
}

impl ExponentInterval {
    fn full() -> Self {
        ExponentInterval { lo: None, hi: None }
    }

    fn clamp_lo(&mut self, v: Rational64) {
        match self.lo {
            Some(cur) if cur >= v => {}
            _ => self.lo = Some(v),
        }
    }

    fn clamp_hi(&mut self, v: Rational64) {
        match self.hi {
            Some(cur) if cur <= v => {}
            _ => self.hi = Some(v),
        }
    }

    fn is_empty(&self) -> bool {
        matches!((self.lo, self.hi), (Some(lo), Some(hi)) if lo > hi)
    }

    /// A deterministic interior-leaning witness: the midpoint of a bounded
    /// interval, one unit inside a half-bounded one, zero on the whole line.
    fn witness(&self) -> Rational64 {
        match (self.lo, self.hi) {
            (Some(lo), Some(hi)) => (lo + hi) / Rational64::from_integer(2),
            (Some(lo), None) => lo + Rational64::from_integer(1),
            (None, Some(hi)) => hi - Rational64::from_integer(1),
            (None, None) => Rational64::zero(),
        }
    }
}

/// Result of the monomial Dulac search `h = x^{-alpha} y^{-beta}`.
#[derive(Clone, Debug)]
pub struct DulacResult {
    pub found: bool,
    pub alpha: Option<Rational64>,
    pub beta: Option<Rational64>,
    pub alpha_interval: Option<ExponentInterval>,
    pub beta_interval: Option<ExponentInterval>,
}

/// Per-term feasible interval on one coordinate: the constraint
/// `(alpha - e_i)(e_i - e_{i+1}) <= 0` for the cyclic exponent list `e`.
fn side_interval(e: &[Rational64; 4]) -> ExponentInterval {
    let mut interval = ExponentInterval::full();
    for i in 0..4 {
        let diff = e[i] - e[(i + 1) % 4];
        if diff.is_positive() {
            interval.clamp_hi(e[i]); // need alpha <= e_i
        } else if diff.is_negative() {
            interval.clamp_lo(e[i]); // need alpha >= e_i
        }
        // diff == 0: the term vanishes for every alpha.
    }
    interval
}

/// Search for Dulac exponents on a directed four-cycle.
///
/// The divergence of `(h f, h g)` with `h = x^{-alpha} y^{-beta}` splits into
/// one monomial per reaction and coordinate with coefficient
/// `(alpha - a_i)(a_i - a_{i+1}) kappa_i` (and the beta analogue). The
/// per-term sign constraints are interval constraints on `alpha` and `beta`;
/// a witness is an interior point with at least one strictly negative term.
/// Monomial collisions across terms are summed before the sign test.
pub fn dulac_search(quad: &QuadrangleTemplate) -> Result<DulacResult, GlobalError> {
    let p = &quad.complexes;
    let a = [p[0].a, p[1].a, p[2].a, p[3].a];
    let b = [p[0].b, p[1].b, p[2].b, p[3].b];
    let a_const = a.iter().all(|v| *v == a[0]);
    let b_const = b.iter().all(|v| *v == b[0]);
    if a_const && b_const {
        return Err(GlobalError::Degenerate(
            "all complexes share both coordinates".into(),
        ));
    }
    let alpha_interval = side_interval(&a);
    let beta_interval = side_interval(&b);
    if alpha_interval.is_empty() || beta_interval.is_empty() {
        return Ok(DulacResult {
            found: false,
            alpha: None,
            beta: None,
            alpha_interval: Some(alpha_interval),
            beta_interval: Some(beta_interval),
        });
    }
    let alpha = alpha_interval.witness();
    let beta = beta_interval.witness();
    // Sign test at the witness, with monomial collisions merged. The sign of
    // each term is rate-independent (kappa > 0), and nonpositive factors sum
    // to nonpositive coefficients, so checking the factors suffices.
    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    struct Key(Rational64, Rational64);
    let mut groups: Vec<(Key, Rational64, bool)> = Vec::new();
    let mut push =
        |key: Key, factor: Rational64| match groups.iter_mut().find(|(k, _, _)| *k == key) {
            Some((_, acc, _)) => *acc += factor,
            None => groups.push((key, factor, false)),
        };
    for i in 0..4 {
        let fac_a = (alpha - a[i]) * (a[i] - a[(i + 1) % 4]);
        push(Key(a[i] - Rational64::from_integer(1), b[i]), fac_a);
        let fac_b = (beta - b[i]) * (b[i] - b[(i + 1) % 4]);
        push(Key(a[i], b[i] - Rational64::from_integer(1)), fac_b);
    }
    let sound = groups.iter().all(|(_, acc, _)| !acc.is_positive());
    let strict = groups.iter().any(|(_, acc, _)| acc.is_negative());
    let found = sound && strict;
    Ok(DulacResult {
        found,
        alpha: found.then_some(alpha),
        beta: found.then_some(beta),
        alpha_interval: Some(alpha_interval),
        beta_interval: Some(beta_interval),
    })
}

/// Evaluate `div(h f, h g) / h` at a point for given Dulac exponents; used to
/// corroborate a witness numerically.
pub fn dulac_divergence(
    quad: &QuadrangleTemplate,
    alpha: Rational64,
    beta: Rational64,
    x: f64,
    y: f64,
) -> f64 {
    let p = &quad.complexes;
    let mut acc = 0.0;
    for i in 0..4 {
        let (ai, bi) = (p[i].a, p[i].b);
        let (aj, bj) = (p[(i + 1) % 4].a, p[(i + 1) % 4].b);
        let fac_a = rational_to_f64((alpha - ai) * (ai - aj));
        let fac_b = rational_to_f64((beta - bi) * (bi - bj));
        let kappa = quad.kappa[i];
        acc += fac_a * kappa * pow_rat(x, ai - Rational64::from_integer(1)) * pow_rat(y, bi);
        acc += fac_b * kappa * pow_rat(x, ai) * pow_rat(y, bi - Rational64::from_integer(1));
    }
    acc
}

/// The ordering-pattern test: global stability is guaranteed when both the
/// horizontal and the vertical projections avoid the crossing pattern
/// `e_i < e_{i+3} < e_{i+1} < e_{i+2}` (indices cyclic, `i` at the minimum).
/// Implies `dulac_search` finds a witness.
pub fn dulac_geometric(quad: &QuadrangleTemplate) -> bool {
    let p = &quad.complexes;
    let pattern = |e: [Rational64; 4]| -> bool {
        (0..4).any(|i| {
            let (e0, e1, e2, e3) = (e[i], e[(i + 1) % 4], e[(i + 2) % 4], e[(i + 3) % 4]);
            e.iter().all(|v| *v >= e0) && e0 < e3 && e3 < e1 && e1 < e2
        })
    };
    let a = [p[0].a, p[1].a, p[2].a, p[3].a];
    let b = [p[0].b, p[1].b, p[2].b, p[3].b];
    !pattern(a) && !pattern(b)
}

/// True iff the field satisfies `g(x, y) = -f(y, x)`: every x-term
/// `(c, e1, e2)` pairs with a y-term `(-c, e2, e1)` and vice versa. Such
/// fields are symmetric under reflection across the diagonal with time
/// reversed, so a linear center at a symmetric equilibrium is a true center.
pub fn field_is_reversible(vf: &VectorField) -> bool {
    let xs = vf.x_terms();
    let ys = vf.y_terms();
    if xs.len() != ys.len() {
        return false;
    }
    xs.iter().all(|t| {
        ys.iter().any(|u| {
            u.ea == t.eb && u.eb == t.ea && (u.coeff + t.coeff).abs() <= 1e-12 * t.coeff.abs()
        })
    }) && ys.iter().all(|u| {
        xs.iter().any(|t| {
            t.ea == u.eb && t.eb == u.ea && (t.coeff + u.coeff).abs() <= 1e-12 * u.coeff.abs()
        })
    })
}

/// Reversibility of a scaled system's field.
pub fn reversibility_check(scaled: &ScaledSystem) -> bool {
    field_is_reversible(&scaled.field)
}

/// Center conditions for the symmetric three-reaction template with sources
/// `(0,0), (p,q), (q,p)`:
/// `c1 = -K d1`, `c2 kb2 = -K d3 kb3`, `c3 kb3 = -K d2 kb2`, together with
/// `(1/lambda) K (p^2 - q^2) > 0`. When satisfied the scaled field is
/// reversible and `(1,1)` is a center.
pub fn reversible_center_conditions(
    scaled: &ScaledSystem,
    template: &ThreeReactionTemplate,
) -> Result<bool, GlobalError> {
    let s = &template.sources;
    if !s[0].a.is_zero() || !s[0].b.is_zero() || s[1].a != s[2].b || s[1].b != s[2].a {
        return Err(GlobalError::TemplateMismatch(
            "sources must be (0,0), (p,q), (q,p)".into(),
        ));
    }
    let p = rational_to_f64(s[1].a);
    let q = rational_to_f64(s[1].b);
    let lambda = scaled
        .lambda
        .ok_or_else(|| GlobalError::TemplateMismatch("scaled system has no lambda".into()))?;
    if scaled.kbar.len() != 3 {
        return Err(GlobalError::TemplateMismatch(
            "expected three rate constants".into(),
        ));
    }
    let k = scaled.k;
    let [(c1, d1), (c2, d2), (c3, d3)] = template
        .vectors
        .map(|(c, d)| (rational_to_f64(c), rational_to_f64(d)));
    let kb = &scaled.kbar;
    let close = |u: f64, v: f64| (u - v).abs() <= 1e-12 * u.abs().max(v.abs()).max(1.0);
    let conditions = close(c1, -k * d1)
        && close(c2 * kb[1], -k * d3 * kb[2])
        && close(c3 * kb[2], -k * d2 * kb[1]);
    let positivity = k * (p * p - q * q) / lambda > 0.0;
    Ok(conditions && positivity)
}

/// Outcome of the quadratic Lienard center test for the template with
/// sources `(1,0), (0,-1/2), (0,-2)`.
#[derive(Clone, Copy, Debug)]
pub struct LienardCheck {
    pub satisfied: bool,
    /// The three products that must coincide: `c1 kb1`, `K d2 kb2`,
    /// `4 K d3 kb3`.
    pub c1k1: f64,
    pub kd2k2: f64,
    pub four_kd3k3: f64,
    /// Coefficients of `Phi(z) = alpha z^2 + beta z` when satisfied.
    pub phi_alpha: f64,
    pub phi_beta: f64,
}

/// Check the Lienard center condition `c1 kb1 = K d2 kb2 = 4 K d3 kb3 != 0`
/// and report the quadratic `Phi` coefficients.
pub fn lienard_center_check(
    scaled: &ScaledSystem,
    template: &ThreeReactionTemplate,
) -> Result<LienardCheck, GlobalError> {
    let s = &template.sources;
    let expect = [
        (Rational64::from_integer(1), Rational64::from_integer(0)),
        (Rational64::from_integer(0), Rational64::new(-1, 2)),
        (Rational64::from_integer(0), Rational64::from_integer(-2)),
    ];
    for (src, (ea, eb)) in s.iter().zip(expect) {
        if src.a != ea || src.b != eb {
            return Err(GlobalError::TemplateMismatch(
                "sources must be (1,0), (0,-1/2), (0,-2)".into(),
            ));
        }
    }
    let lambda = scaled
        .lambda
        .ok_or_else(|| GlobalError::TemplateMismatch("scaled system has no lambda".into()))?;
    if scaled.k / lambda <= 0.0 {
        return Err(GlobalError::TemplateMismatch(
            "K / lambda must be positive".into(),
        ));
    }
    let k = scaled.k;
    let kb = &scaled.kbar;
    let [(c1, _), (_, d2), (_, d3)] = template
        .vectors
        .map(|(c, d)| (rational_to_f64(c), rational_to_f64(d)));
    let c1k1 = c1 * kb[0];
    let kd2k2 = k * d2 * kb[1];
    let four_kd3k3 = 4.0 * k * d3 * kb[2];
    let scale = c1k1.abs().max(kd2k2.abs()).max(four_kd3k3.abs());
    let satisfied = scale > 0.0
        && (c1k1 - kd2k2).abs() <= 1e-10 * scale
        && (c1k1 - four_kd3k3).abs() <= 1e-10 * scale;
    let prod = k * kb[0] * kb[1] * kb[2];
    Ok(LienardCheck {
        satisfied,
        c1k1,
        kd2k2,
        four_kd3k3,
        phi_alpha: -(lambda * lambda / 4.0) * c1k1 / (prod * prod),
        phi_beta: -(3.0 * lambda / 2.0) * c1k1 / prod,
    })
}

/// Antiderivatives entering the Lienard center identity `F = Phi o G`:
/// `F(x) = -c1 kb1 x - K d2 kb2 ((x+1)^{-1/2} - 1) - K d3 kb3 ((x+1)^{-2} - 1)`,
/// `G(x) = (K/lambda) kb1 kb2 kb3 (2 (x+1)^{1/2} + (x+1)^{-1} - 3)`.
pub fn lienard_f_g(scaled: &ScaledSystem, template: &ThreeReactionTemplate, x: f64) -> (f64, f64) {
    let k = scaled.k;
    let kb = &scaled.kbar;
    let lambda = scaled.lambda.unwrap_or(1.0);
    let [(c1, _), (_, d2), (_, d3)] = template
        .vectors
        .map(|(c, d)| (rational_to_f64(c), rational_to_f64(d)));
    let f = -c1 * kb[0] * x
        - k * d2 * kb[1] * ((x + 1.0).powf(-0.5) - 1.0)
        - k * d3 * kb[2] * ((x + 1.0).powi(-2) - 1.0);
    let g = k / lambda * kb[0] * kb[1] * kb[2] * (2.0 * (x + 1.0).sqrt() + (x + 1.0).recip() - 3.0);
    (f, g)
}

/// Largest residual `|F - (alpha G^2 + beta G)|` over `n` samples of
/// `y + 1` in `[0.2, 5]`.
pub fn lienard_residual(
    scaled: &ScaledSystem,
    template: &ThreeReactionTemplate,
    check: &LienardCheck,
    n: usize,
) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..n {
        let y1 = 0.2 + (5.0 - 0.2) * i as f64 / (n - 1) as f64;
        let x = y1 - 1.0;
        let (f, g) = lienard_f_g(scaled, template, x);
        worst = worst.max((f - (check.phi_alpha * g * g + check.phi_beta * g)).abs());
    }
    worst
}

/// How to pick rate constants so that the symmetric three-reaction network
/// has its center: `kappa1` is free and `kappa3/kappa2` is pinned unless the
/// `c2 = d3 = 0` branch makes it unconstrained.
#[derive(Clone, Copy, Debug)]
pub struct CenterRateConstraint {
    pub kappa1_free: bool,
    /// Required ratio `kappa3 / kappa2`; `None` when the `d3 = 0` branch
    /// leaves it unconstrained by this formula.
    pub ratio_k3_over_k2: Option<f64>,
}

/// Rate-constant constraint for the reversible center:
/// `kappa3/kappa2 = -(c2/d3) (-c1/d1)^{p-q-1}`.
pub fn rate_constants_for_center(
    template: &ThreeReactionTemplate,
    p: f64,
    q: f64,
) -> CenterRateConstraint {
    let [(c1, d1), (c2, _), (_, d3)] = template
        .vectors
        .map(|(c, d)| (rational_to_f64(c), rational_to_f64(d)));
    if d3 == 0.0 {
        // c2 = 0 branch: the ratio is not pinned by this formula; the
        // kbar-level conditions apply directly.
        return CenterRateConstraint {
            kappa1_free: true,
            ratio_k3_over_k2: None,
        };
    }
    CenterRateConstraint {
        kappa1_free: true,
        ratio_k3_over_k2: Some(-(c2 / d3) * (-c1 / d1).powf(p - q - 1.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{detect_quadrangle, detect_three_reactions};
    use crate::families;
    use crate::network::parse_network;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rat(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn unit_square(kappa: [f64; 4]) -> QuadrangleTemplate {
        let net = parse_network(&format!(
            "0 0 -> 1 0 @ {}\n1 0 -> 1 1 @ {}\n1 1 -> 0 1 @ {}\n0 1 -> 0 0 @ {}",
            kappa[0], kappa[1], kappa[2], kappa[3]
        ))
        .unwrap();
        detect_quadrangle(&net).unwrap()
    }

    fn parallelogram() -> QuadrangleTemplate {
        let net = parse_network("0 1 -> 1 0 @ 1\n1 0 -> 1 2 @ 1\n1 2 -> 0 3 @ 1\n0 3 -> 0 1 @ 1")
            .unwrap();
        detect_quadrangle(&net).unwrap()
    }

    fn tall_quadrangle() -> QuadrangleTemplate {
        let net = parse_network("0 1 -> 0 0 @ 1\n0 0 -> 1 2 @ 1\n1 2 -> 1 5 @ 1\n1 5 -> 0 1 @ 1")
            .unwrap();
        detect_quadrangle(&net).unwrap()
    }

    #[test]
    fn unit_square_has_witness() {
        let quad = unit_square([1.0; 4]);
        let res = dulac_search(&quad).unwrap();
        assert!(res.found);
        // Interval [0,1] x [0,1] with midpoint witness (1/2, 1/2).
        assert_eq!(res.alpha, Some(rat(1, 2)));
        assert_eq!(res.beta, Some(rat(1, 2)));
        assert!(dulac_geometric(&quad));
    }

    #[test]
    fn parallelogram_has_no_witness() {
        let quad = parallelogram();
        let res = dulac_search(&quad).unwrap();
        assert!(!res.found);
        // The beta constraints demand beta <= 1 and beta >= 2.
        let bi = res.beta_interval.unwrap();
        assert!(bi.is_empty());
        assert!(!dulac_geometric(&quad));
    }

    #[test]
    fn tall_quadrangle_has_no_witness() {
        let quad = tall_quadrangle();
        assert!(!dulac_search(&quad).unwrap().found);
        assert!(!dulac_geometric(&quad));
    }

    #[test]
    fn infeasible_horizontal_pattern() {
        // a-pattern a1 < a4 < a2 < a3 makes the alpha side infeasible.
        let net = parse_network("0 0 -> 2 0 @ 1\n2 0 -> 3 1 @ 1\n3 1 -> 1 2 @ 1\n1 2 -> 0 0 @ 1")
            .unwrap();
        let quad = detect_quadrangle(&net).unwrap();
        let res = dulac_search(&quad).unwrap();
        assert!(!res.found);
        assert!(res.alpha_interval.unwrap().is_empty());
    }

    #[test]
    fn witness_divergence_is_nonpositive_on_grid() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..20 {
            let kappa = [
                rng.gen_range(0.1..10.0),
                rng.gen_range(0.1..10.0),
                rng.gen_range(0.1..10.0),
                rng.gen_range(0.1..10.0),
            ];
            let quad = unit_square(kappa);
            let res = dulac_search(&quad).unwrap();
            assert!(res.found);
            let (alpha, beta) = (res.alpha.unwrap(), res.beta.unwrap());
            let mut strict = 0usize;
            let mut total = 0usize;
            for i in 0..100 {
                for j in 0..100 {
                    let x = 10f64.powf(-2.0 + 4.0 * i as f64 / 99.0);
                    let y = 10f64.powf(-2.0 + 4.0 * j as f64 / 99.0);
                    let div = dulac_divergence(&quad, alpha, beta, x, y);
                    assert!(div <= 1e-12 * div.abs().max(1.0), "positive at ({x},{y})");
                    total += 1;
                    if div < 0.0 {
                        strict += 1;
                    }
                }
            }
            assert!(strict * 100 >= total * 99);
        }
    }

    #[test]
    fn geometric_implies_search_on_random_quadrangles() {
        let mut rng = StdRng::seed_from_u64(5);
        let mut tested = 0;
        while tested < 1000 {
            let coord = |rng: &mut StdRng| rat(rng.gen_range(-3..=3), 1);
            let mut pts = Vec::new();
            for _ in 0..4 {
                pts.push(crate::network::Complex::new(
                    coord(&mut rng),
                    coord(&mut rng),
                ));
            }
            let mut uniq = pts.clone();
            uniq.sort();
            uniq.dedup();
            if uniq.len() != 4 {
                continue;
            }
            let reactions: Vec<_> = (0..4)
                .map(|i| crate::network::Reaction {
                    source: pts[i],
                    target: pts[(i + 1) % 4],
                    kappa: 1.0,
                })
                .collect();
            let Ok(net) = crate::network::ReactionNetwork::new(reactions) else {
                continue;
            };
            let Some(quad) = detect_quadrangle(&net) else {
                continue;
            };
            let Ok(res) = dulac_search(&quad) else {
                continue;
            };
            tested += 1;
            if dulac_geometric(&quad) {
                assert!(
                    res.found,
                    "geometric pass but no witness: {:?}",
                    quad.complexes
                );
            }
        }
    }

    #[test]
    fn reversibility_detects_symmetric_fields() {
        assert!(field_is_reversible(&families::reversible_chain_field(
            2.0, -1.0
        )));
        assert!(field_is_reversible(&families::reversible_chain_field(
            3.0, -2.0
        )));
        for f in families::reversible_three_systems(2.0, 1.0) {
            assert!(field_is_reversible(&f));
        }
        // A generic scaled system is not reversible.
        let vf = families::quadrangle_scaled_field(0.1, 26.0);
        assert!(!field_is_reversible(&vf));
    }

    #[test]
    fn reversible_center_conditions_on_network() {
        // Symmetric three-reaction network with (p, q) = (2, 1) and the
        // geometric-mean slope data; rates chosen so the equilibrium is (1,1).
        let net = parse_network("0 0 -> 1 -1 @ 3\n2 1 -> 1 3 @ 1\n1 2 -> -1 3 @ 1").unwrap();
        let eq = crate::equilibrium::solve_equilibrium(&net, &Default::default()).unwrap();
        assert!((eq.x - 1.0).abs() < 1e-10 && (eq.y - 1.0).abs() < 1e-10);
        let scaled = crate::equilibrium::scale_to_unit(&net, &eq);
        let t = detect_three_reactions(&net).unwrap();
        assert!(reversible_center_conditions(&scaled, &t).unwrap());
        assert!(reversibility_check(&scaled));

        // Perturbing one rate by 1% breaks the center conditions.
        let net2 = net.with_rate_constants(&[3.0, 1.01, 1.0]).unwrap();
        let eq2 = crate::equilibrium::solve_equilibrium(&net2, &Default::default()).unwrap();
        let scaled2 = crate::equilibrium::scale_to_unit(&net2, &eq2);
        let t2 = detect_three_reactions(&net2).unwrap();
        assert!(!reversible_center_conditions(&scaled2, &t2).unwrap());
    }

    fn lienard_example() -> (ScaledSystem, ThreeReactionTemplate) {
        // Equilibrium (5/4, 1), kbar = (5, 2, 2), K = 5/4: the scaled system
        // is xdot = 5x - 1/sqrt(y) - 4/y^2,
        // ydot = (5/4)(-5x + 4/sqrt(y) + 1/y^2).
        let net =
            parse_network("1 0 -> 2 -1 @ 4\n0 -1/2 -> -1/2 3/2 @ 2\n0 -2 -> -2 -3/2 @ 2").unwrap();
        let eq = crate::equilibrium::solve_equilibrium(&net, &Default::default()).unwrap();
        assert!((eq.x - 1.25).abs() < 1e-10 && (eq.y - 1.0).abs() < 1e-10);
        let scaled = crate::equilibrium::scale_to_unit(&net, &eq);
        assert!((scaled.k - 1.25).abs() < 1e-10);
        let t = detect_three_reactions(&net).unwrap();
        (scaled, t)
    }

    #[test]
    fn lienard_products_and_phi() {
        let (scaled, t) = lienard_example();
        let check = lienard_center_check(&scaled, &t).unwrap();
        assert!((check.c1k1 - 5.0).abs() < 1e-9);
        assert!(check.satisfied, "{check:?}");
        assert!((check.c1k1 - check.kd2k2).abs() < 1e-10 * check.c1k1.abs());
        assert!((check.c1k1 - check.four_kd3k3).abs() < 1e-10 * check.c1k1.abs());
        let residual = lienard_residual(&scaled, &t, &check, 1000);
        assert!(residual < 1e-10, "residual {residual}");
    }

    #[test]
    fn lienard_detects_broken_condition() {
        let net = parse_network("1 0 -> 2 -1 @ 4.8\n0 -1/2 -> -1/2 3/2 @ 2\n0 -2 -> -2 -3/2 @ 2")
            .unwrap();
        let eq = crate::equilibrium::solve_equilibrium(&net, &Default::default()).unwrap();
        let scaled = crate::equilibrium::scale_to_unit(&net, &eq);
        let t = detect_three_reactions(&net).unwrap();
        match lienard_center_check(&scaled, &t) {
            Ok(check) => assert!(!check.satisfied),
            Err(GlobalError::TemplateMismatch(_)) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn dulac_witness_excludes_cycles_numerically() {
        use crate::dynamics::{find_limit_cycles, CycleSearchOptions, PoincareSection};
        let mut rng = StdRng::seed_from_u64(61);
        for _ in 0..10 {
            let kappa: Vec<f64> = (0..4).map(|_| rng.gen_range(0.2..5.0)).collect();
            let net = parse_network(&format!(
                "0 0 -> 1 0 @ {}\n1 0 -> 1 1 @ {}\n1 1 -> 0 1 @ {}\n0 1 -> 0 0 @ {}",
                kappa[0], kappa[1], kappa[2], kappa[3]
            ))
            .unwrap();
            let quad = detect_quadrangle(&net).unwrap();
            assert!(dulac_search(&quad).unwrap().found);
            let eq = crate::equilibrium::solve_equilibrium(&net, &Default::default()).unwrap();
            let section = PoincareSection::horizontal((eq.x, eq.y));
            let report = find_limit_cycles(
                &net.vector_field(),
                &section,
                &CycleSearchOptions {
                    grid_n: 25,
                    ..Default::default()
                },
            );
            assert!(
                report.fixed_points.is_empty(),
                "cycle found despite Dulac witness: {:?}",
                report.fixed_points
            );
        }
    }

    #[test]
    fn reversibility_implies_reflected_trajectories() {
        use crate::dynamics::{integrate, IntegrateOptions};
        // Forward flow, then reflect across the diagonal; equals flowing
        // backward from the reflected start.
        let vf = families::reversible_chain_field(2.0, -1.0);
        assert!(field_is_reversible(&vf));
        let backward = vf.scaled(-1.0);
        let opts = IntegrateOptions {
            record: false,
            rtol: 1e-12,
            atol: 1e-14,
            ..Default::default()
        };
        for (x0, y0, t) in [(1.1, 1.0, 0.8), (0.95, 1.08, 1.3)] {
            let fwd = integrate(&vf, (x0, y0), t, &opts);
            let (_, (xf, yf)) = fwd.last();
            let bwd = integrate(&backward, (y0, x0), t, &opts);
            let (_, (xb, yb)) = bwd.last();
            assert!(
                (xb - yf).abs() < 1e-6 && (yb - xf).abs() < 1e-6,
                "forward ({xf}, {yf}) vs backward-reflected ({xb}, {yb})"
            );
        }
    }

    #[test]
    fn center_rate_constraint_branches() {
        // c1 = -d1 and p - q = 1: ratio reduces to -c2/d3.
        let t = ThreeReactionTemplate {
            sources: [
                crate::network::Complex::from_ints(0, 0),
                crate::network::Complex::from_ints(2, 1),
                crate::network::Complex::from_ints(1, 2),
            ],
            vectors: [
                (rat(1, 1), rat(-1, 1)),
                (rat(-1, 1), rat(2, 1)),
                (rat(-2, 1), rat(1, 1)),
            ],
            kappa: [1.0, 1.0, 1.0],
        };
        let c = rate_constants_for_center(&t, 2.0, 1.0);
        assert!(c.kappa1_free);
        assert!((c.ratio_k3_over_k2.unwrap() - 1.0).abs() < 1e-12);

        // d3 = 0 branch leaves the ratio unconstrained.
        let t0 = ThreeReactionTemplate {
            vectors: [
                (rat(1, 1), rat(-1, 1)),
                (rat(0, 1), rat(2, 1)),
                (rat(-2, 1), rat(0, 1)),
            ],
            ..t
        };
        assert!(rate_constants_for_center(&t0, 2.0, 1.0)
            .ratio_k3_over_k2
            .is_none());

        // p - q - 1 = 0 with c1 = -d1 again gives ratio -c2/d3 exactly.
        let c = rate_constants_for_center(&t, 3.0, 2.0);
        assert!((c.ratio_k3_over_k2.unwrap() - 1.0).abs() < 1e-12);
    }
}
