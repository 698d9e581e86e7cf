//! Positive equilibria: existence predicates, solvers and the scaling that
//! moves the equilibrium to `(1, 1)`.
//!
//! For a chain of three reactions the equilibrium system collapses to two
//! binomial equations driven by the signed areas `h1..h4`; for three separate
//! reactions the same happens with the cross products of the reaction
//! vectors. Both reduce to a 2x2 linear solve in `(log x, log y)`. Everything
//! else goes through damped Newton in logarithmic coordinates.

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::field::{pow_rat, Term, VectorField};
use crate::network::{rational_to_f64, Complex, ReactionNetwork};

#[derive(Debug, Error)]
pub enum EquilibriumError {
    #[error("no positive equilibrium: {0}")]
    NoEquilibrium(String),
    #[error("degenerate template: {0}")]
    Degenerate(String),
    #[error("network does not match the expected template: {0}")]
    TemplateMismatch(String),
    #[error("no root found within the iteration budget")]
    Budget,
}

/// Twice the signed area of the triangle `Pi Pj Pk`, exact:
/// `det(Pj - Pi, Pk - Pi)`.
pub fn signed_area(pi: Complex, pj: Complex, pk: Complex) -> Rational64 {
    let ux = pj.a - pi.a;
    let uy = pj.b - pi.b;
    let vx = pk.a - pi.a;
    let vy = pk.b - pi.b;
    ux * vy - uy * vx
}

/// The four signed areas attached to a chain `P1 -> P2 -> P3 -> P4`.
#[derive(Clone, Copy, Debug)]
pub struct SignedAreas {
    pub h1: Rational64,
    pub h2: Rational64,
    pub h3: Rational64,
    pub h4: Rational64,
}

impl SignedAreas {
    pub fn from_chain(p: &[Complex; 4]) -> SignedAreas {
        SignedAreas {
            h1: signed_area(p[1], p[3], p[2]),
            h2: signed_area(p[0], p[2], p[3]),
            h3: signed_area(p[0], p[3], p[1]),
            h4: signed_area(p[0], p[1], p[2]),
        }
    }
}

/// A three-reaction chain `P1 -> P2 -> P3 -> P4` in path order.
#[derive(Clone, Debug)]
pub struct ChainTemplate {
    pub complexes: [Complex; 4],
    pub kappa: [f64; 3],
}

/// Three separate reactions: source complexes and reaction vectors.
#[derive(Clone, Debug)]
pub struct ThreeReactionTemplate {
    pub sources: [Complex; 3],
    pub vectors: [(Rational64, Rational64); 3],
    pub kappa: [f64; 3],
}

impl ThreeReactionTemplate {
    /// Cross products `(c2 d3 - c3 d2, c3 d1 - c1 d3, c1 d2 - c2 d1)`.
    pub fn cross_products(&self) -> [Rational64; 3] {
        let [(c1, d1), (c2, d2), (c3, d3)] = self.vectors;
        [c2 * d3 - c3 * d2, c3 * d1 - c1 * d3, c1 * d2 - c2 * d1]
    }
}

/// A directed four-cycle `P1 -> P2 -> P3 -> P4 -> P1`.
#[derive(Clone, Debug)]
pub struct QuadrangleTemplate {
    pub complexes: [Complex; 4],
    pub kappa: [f64; 4],
}

/// Structural match of a network against the binomial-solvable templates.
pub fn detect_chain(net: &ReactionNetwork) -> Option<ChainTemplate> {
    let rs = net.reactions();
    if rs.len() != 3 || net.num_complexes() != 4 {
        return None;
    }
    // Path order: the unique source that is nobody's target starts the chain.
    let start = rs
        .iter()
        .find(|r| rs.iter().all(|s| s.target != r.source))?;
    let second = rs.iter().find(|r| r.source == start.target)?;
    let third = rs.iter().find(|r| r.source == second.target)?;
    if third.target == start.source {
        return None; // a cycle, not a chain
    }
    Some(ChainTemplate {
        complexes: [start.source, second.source, third.source, third.target],
        kappa: [start.kappa, second.kappa, third.kappa],
    })
}

/// Three reactions with pairwise distinct sources. The equilibrium algebra
/// only involves the source monomials and the reaction vectors, so the
/// reactions may share complexes (the sections' families do); a pure chain
/// is routed to [`detect_chain`] instead.
pub fn detect_three_reactions(net: &ReactionNetwork) -> Option<ThreeReactionTemplate> {
    let rs = net.reactions();
    if rs.len() != 3 || detect_chain(net).is_some() {
        return None;
    }
    let s = [rs[0].source, rs[1].source, rs[2].source];
    if s[0] == s[1] || s[1] == s[2] || s[0] == s[2] {
        return None;
    }
    Some(ThreeReactionTemplate {
        sources: s,
        vectors: [rs[0].vector(), rs[1].vector(), rs[2].vector()],
        kappa: [rs[0].kappa, rs[1].kappa, rs[2].kappa],
    })
}

pub fn detect_quadrangle(net: &ReactionNetwork) -> Option<QuadrangleTemplate> {
    let rs = net.reactions();
    if rs.len() != 4 || net.num_complexes() != 4 {
        return None;
    }
    // Start the cycle at the smallest complex for a deterministic labeling.
    let start = rs.iter().min_by_key(|r| r.source)?;
    let mut cycle = vec![*start];
    for _ in 0..3 {
        let last = cycle.last().unwrap();
        let next = rs.iter().find(|r| r.source == last.target)?;
        cycle.push(*next);
    }
    if cycle[3].target != cycle[0].source {
        return None;
    }
    let mut seen: Vec<Complex> = cycle.iter().map(|r| r.source).collect();
    seen.dedup();
    if seen.len() != 4 {
        return None;
    }
    Some(QuadrangleTemplate {
        complexes: [
            cycle[0].source,
            cycle[1].source,
            cycle[2].source,
            cycle[3].source,
        ],
        kappa: [
            cycle[0].kappa,
            cycle[1].kappa,
            cycle[2].kappa,
            cycle[3].kappa,
        ],
    })
}

/// Existence of a positive equilibrium for a chain: the partial sums
/// `h1`, `h1+h2`, `h1+h2+h3` must share a nonzero sign. Independent of the
/// rate constants.
pub fn chain_equilibrium_exists(chain: &ChainTemplate) -> Result<bool, EquilibriumError> {
    let h = SignedAreas::from_chain(&chain.complexes);
    if h.h4.is_zero() {
        return Err(EquilibriumError::Degenerate(
            "first three complexes are collinear".into(),
        ));
    }
    let s1 = h.h1;
    let s2 = h.h1 + h.h2;
    let s3 = h.h1 + h.h2 + h.h3;
    Ok(!s1.is_zero()
        && !s2.is_zero()
        && !s3.is_zero()
        && s1.is_positive() == s2.is_positive()
        && s2.is_positive() == s3.is_positive())
}

/// Geometric form of the chain existence test: `P1` and `P4` strictly on the
/// same side of the line `P2 P3`, and the angles at `P2` and `P3` summing to
/// less than a straight angle. Equivalent to [`chain_equilibrium_exists`].
pub fn chain_equilibrium_exists_geometric(chain: &ChainTemplate) -> Result<bool, EquilibriumError> {
    let p = &chain.complexes;
    if signed_area(p[0], p[1], p[2]).is_zero() {
        return Err(EquilibriumError::Degenerate(
            "first three complexes are collinear".into(),
        ));
    }
    let side1 = signed_area(p[1], p[2], p[0]);
    let side4 = signed_area(p[1], p[2], p[3]);
    if side1.is_zero() || side4.is_zero() || side1.is_positive() != side4.is_positive() {
        return Ok(false);
    }
    let pt = |c: Complex| (rational_to_f64(c.a), rational_to_f64(c.b));
    let angle = |at: Complex, u: Complex, v: Complex| -> f64 {
        let (ax, ay) = pt(at);
        let (ux, uy) = pt(u);
        let (vx, vy) = pt(v);
        let (e1x, e1y) = (ux - ax, uy - ay);
        let (e2x, e2y) = (vx - ax, vy - ay);
        let dot = e1x * e2x + e1y * e2y;
        let cross = e1x * e2y - e1y * e2x;
        cross.atan2(dot).abs()
    };
    let sum = angle(p[1], p[0], p[2]) + angle(p[2], p[1], p[3]);
    Ok(sum < std::f64::consts::PI)
}

/// Existence for three separate reactions: the three cross products of the
/// reaction vectors share a nonzero sign. Independent of the rate constants.
pub fn three_reaction_exists(t: &ThreeReactionTemplate) -> Result<bool, EquilibriumError> {
    if signed_area(t.sources[0], t.sources[1], t.sources[2]).is_zero() {
        return Err(EquilibriumError::Degenerate(
            "source complexes are collinear".into(),
        ));
    }
    if t.vectors.iter().any(|(c, d)| c.is_zero() && d.is_zero()) {
        return Err(EquilibriumError::Degenerate("zero reaction vector".into()));
    }
    let spans = t.vectors.iter().enumerate().any(|(i, &(ax, ay))| {
        t.vectors[i + 1..]
            .iter()
            .any(|&(bx, by)| !(ax * by - ay * bx).is_zero())
    });
    if !spans {
        return Err(EquilibriumError::Degenerate(
            "reaction vectors do not span the plane".into(),
        ));
    }
    let cp = t.cross_products();
    Ok(cp.iter().all(|c| !c.is_zero())
        && cp[0].is_positive() == cp[1].is_positive()
        && cp[1].is_positive() == cp[2].is_positive())
}

/// A verified positive equilibrium with its residual
/// `max(|f|, |g|)` at the returned point.
#[derive(Clone, Copy, Debug)]
pub struct Equilibrium {
    pub x: f64,
    pub y: f64,
    pub residual: f64,
}

/// Options for [`solve_equilibrium`].
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Residual acceptance threshold, max-norm of the field.
    pub tol: f64,
    /// Newton iteration cap per start.
    pub max_iters: usize,
    /// Half-width of the multi-start grid in log coordinates.
    pub grid_radius: i32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-12,
            max_iters: 60,
            grid_radius: 3,
        }
    }
}

fn solve_2x2(a: [[f64; 2]; 2], rhs: [f64; 2]) -> Option<(f64, f64)> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    Some((
        (rhs[0] * a[1][1] - rhs[1] * a[0][1]) / det,
        (rhs[1] * a[0][0] - rhs[0] * a[1][0]) / det,
    ))
}

/// Solve the binomial equilibrium system
/// `lhs_i * kappa_a * x^{p} y^{q} = rhs_i * kappa_b * x^{p'} y^{q'}`
/// in log coordinates. Both `lhs/rhs` ratios must be positive.
fn binomial_solve(
    exps: [[f64; 2]; 2],
    logs: [f64; 2],
    net: &ReactionNetwork,
    tol: f64,
) -> Result<Equilibrium, EquilibriumError> {
    let (u, v) = solve_2x2(exps, logs).ok_or_else(|| {
        EquilibriumError::Degenerate("binomial exponent matrix is singular".into())
    })?;
    let (x, y) = (u.exp(), v.exp());
    let vf = net.vector_field();
    let eq = refine_newton(&vf, u, v, 8, tol).unwrap_or(Equilibrium {
        x,
        y,
        residual: f64::INFINITY,
    });
    let (f, g) = vf.eval_unchecked(eq.x, eq.y);
    let residual = f.abs().max(g.abs());
    if residual <= tol * vf.magnitude(eq.x, eq.y).max(1.0) {
        Ok(Equilibrium {
            x: eq.x,
            y: eq.y,
            residual,
        })
    } else {
        Err(EquilibriumError::Budget)
    }
}

/// Value and log-coordinate gradient of one field component together with
/// the same data for its absolute-term weight `W = sum |c_i| x^{e_i} y^{f_i}`.
fn component_with_weight(terms: &[Term], u: f64, v: f64) -> (f64, f64, f64, f64, f64, f64) {
    let (mut f, mut fu, mut fv) = (0.0, 0.0, 0.0);
    let (mut w, mut wu, mut wv) = (0.0, 0.0, 0.0);
    for t in terms {
        let a = rational_to_f64(t.ea);
        let b = rational_to_f64(t.eb);
        let val = t.coeff * (a * u + b * v).exp();
        f += val;
        fu += a * val;
        fv += b * val;
        let av = val.abs();
        w += av;
        wu += a * av;
        wv += b * av;
    }
    (f, fu, fv, w, wu, wv)
}

/// Damped Newton in log coordinates on the normalized residual `F / W`,
/// which is bounded and well scaled regardless of monomial dynamic range.
/// Converges when `max(|f|/Wf, |g|/Wg) <= tol`.
fn refine_newton(
    vf: &VectorField,
    mut u: f64,
    mut v: f64,
    iters: usize,
    tol: f64,
) -> Option<Equilibrium> {
    // Smooth merit: sum of squared normalized components.
    let merit = |u: f64, v: f64| -> Option<f64> {
        let (f, _, _, wf, _, _) = component_with_weight(vf.x_terms(), u, v);
        let (g, _, _, wg, _, _) = component_with_weight(vf.y_terms(), u, v);
        if !(f.is_finite() && g.is_finite() && wf > 0.0 && wg > 0.0) {
            return None;
        }
        Some((f / wf).powi(2) + (g / wg).powi(2))
    };
    let mut res = merit(u, v)?;
    for _ in 0..iters {
        if res <= tol * tol {
            break;
        }
        let (f, fu, fv, wf, wfu, wfv) = component_with_weight(vf.x_terms(), u, v);
        let (g, gu, gv, wg, wgu, wgv) = component_with_weight(vf.y_terms(), u, v);
        if wf <= 0.0 || wg <= 0.0 {
            return None;
        }
        let (h1, h2) = (f / wf, g / wg);
        // Quotient-rule Jacobian of the normalized residual.
        let a = [
            [(fu - h1 * wfu) / wf, (fv - h1 * wfv) / wf],
            [(gu - h2 * wgu) / wg, (gv - h2 * wgv) / wg],
        ];
        let (du, dv) = solve_2x2(a, [-h1, -h2])?;
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            if let Some(rn) = merit(u + step * du, v + step * dv) {
                if rn < res {
                    u += step * du;
                    v += step * dv;
                    res = rn;
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let (x, y) = (u.exp(), v.exp());
    if !(x.is_finite() && y.is_finite() && x > 0.0 && y > 0.0) {
        return None;
    }
    let (f, g) = vf.eval_unchecked(x, y);
    Some(Equilibrium {
        x,
        y,
        residual: f.abs().max(g.abs()),
    })
}

/// Find the positive equilibrium.
///
/// Chain and three-reaction networks go through the exact binomial route
/// (after checking the sign condition); everything else runs damped Newton in
/// `(log x, log y)` from a multi-start grid and returns the first root with
/// residual below `opts.tol`.
pub fn solve_equilibrium(
    net: &ReactionNetwork,
    opts: &SolveOptions,
) -> Result<Equilibrium, EquilibriumError> {
    if let Some(chain) = detect_chain(net) {
        if !chain_equilibrium_exists(&chain)? {
            return Err(EquilibriumError::NoEquilibrium(
                "chain sign condition fails".into(),
            ));
        }
        let h = SignedAreas::from_chain(&chain.complexes);
        let p = &chain.complexes;
        let s1 = rational_to_f64(h.h1);
        let s2 = rational_to_f64(h.h1 + h.h2);
        let s3 = rational_to_f64(h.h1 + h.h2 + h.h3);
        // (h1+h2+h3) k1 x^{a1} y^{b1} = h1 k3 x^{a3} y^{b3}
        // (h1+h2)    k1 x^{a1} y^{b1} = h1 k2 x^{a2} y^{b2}
        let exps = [
            [
                rational_to_f64(p[2].a - p[0].a),
                rational_to_f64(p[2].b - p[0].b),
            ],
            [
                rational_to_f64(p[1].a - p[0].a),
                rational_to_f64(p[1].b - p[0].b),
            ],
        ];
        let logs = [
            (s3 * chain.kappa[0] / (s1 * chain.kappa[2])).ln(),
            (s2 * chain.kappa[0] / (s1 * chain.kappa[1])).ln(),
        ];
        return binomial_solve(exps, logs, net, opts.tol);
    }
    if let Some(three) = detect_three_reactions(net) {
        if !three_reaction_exists(&three)? {
            return Err(EquilibriumError::NoEquilibrium(
                "cross products do not share a sign".into(),
            ));
        }
        let cp = three.cross_products().map(rational_to_f64);
        let s = &three.sources;
        // (c1 d2 - c2 d1) k1 x^{a1} y^{b1} = (c2 d3 - c3 d2) k3 x^{a3} y^{b3}
        // (c3 d1 - c1 d3) k1 x^{a1} y^{b1} = (c2 d3 - c3 d2) k2 x^{a2} y^{b2}
        let exps = [
            [
                rational_to_f64(s[2].a - s[0].a),
                rational_to_f64(s[2].b - s[0].b),
            ],
            [
                rational_to_f64(s[1].a - s[0].a),
                rational_to_f64(s[1].b - s[0].b),
            ],
        ];
        let logs = [
            (cp[2] * three.kappa[0] / (cp[0] * three.kappa[2])).ln(),
            (cp[1] * three.kappa[0] / (cp[0] * three.kappa[1])).ln(),
        ];
        return binomial_solve(exps, logs, net, opts.tol);
    }
    solve_general(&net.vector_field(), opts)
}

/// Damped Newton in log coordinates over the multi-start grid.
///
/// A root is accepted only when it is regular: iterates sliding towards the
/// boundary of the quadrant (where whole curves of the field vanish in the
/// limit) show up with a near-singular Jacobian and are rejected.
pub fn solve_general(
    vf: &VectorField,
    opts: &SolveOptions,
) -> Result<Equilibrium, EquilibriumError> {
    let r = opts.grid_radius;
    for u0 in -r..=r {
        for v0 in -r..=r {
            if let Some(eq) = refine_newton(vf, u0 as f64, v0 as f64, opts.max_iters, opts.tol) {
                let scale = vf.magnitude(eq.x, eq.y).max(1.0);
                if eq.residual > opts.tol * scale
                    || eq.x.ln().abs() > 25.0
                    || eq.y.ln().abs() > 25.0
                {
                    continue;
                }
                let j = crate::local::jacobian(vf, (eq.x, eq.y));
                let jscale = j
                    .matrix
                    .iter()
                    .flatten()
                    .fold(0.0f64, |m, e| m.max(e.abs()));
                if j.det.abs() > 1e-8 * jscale.powi(2) {
                    return Ok(eq);
                }
            }
        }
    }
    Err(EquilibriumError::NoEquilibrium(
        "no regular root found within the iteration budget".into(),
    ))
}

/// A system rescaled so that the equilibrium sits at `(1, 1)`.
///
/// `kbar[i] = kappa_i * x^{a_i} y^{b_i}` evaluated at the equilibrium,
/// `k = x/y`, and for chain and three-reaction templates `lambda` relates
/// `kbar` to the signed areas / cross products.
#[derive(Clone, Debug)]
pub struct ScaledSystem {
    pub field: VectorField,
    pub kbar: Vec<f64>,
    pub k: f64,
    pub lambda: Option<f64>,
}

/// Rescale by the equilibrium and multiply time by `x` so the scaled field
/// is again a sum of monomials with the same exponents.
pub fn scale_to_unit(net: &ReactionNetwork, eq: &Equilibrium) -> ScaledSystem {
    let (xb, yb) = (eq.x, eq.y);
    let k = xb / yb;
    let kbar: Vec<f64> = net
        .reactions()
        .iter()
        .map(|r| r.kappa * pow_rat(xb, r.source.a) * pow_rat(yb, r.source.b))
        .collect();
    let mut x_terms = Vec::new();
    let mut y_terms = Vec::new();
    for (r, &kb) in net.reactions().iter().zip(&kbar) {
        let (da, db) = r.vector();
        x_terms.push(Term::new(rational_to_f64(da) * kb, r.source.a, r.source.b));
        y_terms.push(Term::new(
            rational_to_f64(db) * kb * k,
            r.source.a,
            r.source.b,
        ));
    }
    let lambda = if let Some(chain) = detect_chain(net) {
        let h = SignedAreas::from_chain(&chain.complexes);
        let sums = [h.h1, h.h1 + h.h2, h.h1 + h.h2 + h.h3];
        sums.iter()
            .position(|s| !s.is_zero())
            .map(|i| kbar[i] / rational_to_f64(sums[i]))
    } else if let Some(three) = detect_three_reactions(net) {
        let cp = three.cross_products();
        cp.iter()
            .position(|c| !c.is_zero())
            .map(|i| kbar[i] / rational_to_f64(cp[i]))
    } else {
        None
    };
    ScaledSystem {
        field: VectorField::new(x_terms, y_terms),
        kbar,
        k,
        lambda,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_network;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rat(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn cx(n: (i64, i64), d: (i64, i64)) -> Complex {
        Complex::new(rat(n.0, n.1), rat(d.0, d.1))
    }

    #[test]
    fn signed_area_basic() {
        let p1 = Complex::from_ints(0, 0);
        let p2 = Complex::from_ints(1, 0);
        let p3 = Complex::from_ints(0, 1);
        assert_eq!(signed_area(p1, p2, p3), rat(1, 1));
        // collinear triple
        let p4 = Complex::from_ints(2, 0);
        assert!(signed_area(p1, p2, p4).is_zero());
        // antisymmetry and cyclic invariance
        assert_eq!(signed_area(p1, p2, p3), -signed_area(p2, p1, p3));
        assert_eq!(signed_area(p1, p2, p3), signed_area(p2, p3, p1));
    }

    /// Chain family with sources (0,0), (0,-q), (1,1/2), (0,1/2+r).
    fn chain_family(q: (i64, i64), r: (i64, i64)) -> ChainTemplate {
        ChainTemplate {
            complexes: [
                cx((0, 1), (0, 1)),
                cx((0, 1), (-q.0, q.1)),
                cx((1, 1), (1, 2)),
                Complex::new(rat(0, 1), rat(1, 2) + rat(r.0, r.1)),
            ],
            kappa: [1.0, 1.0, 1.0],
        }
    }

    #[test]
    fn chain_family_signed_areas() {
        let chain = chain_family((1, 4), (15, 8));
        let h = SignedAreas::from_chain(&chain.complexes);
        assert_eq!(h.h1, rat(-21, 8));
        assert_eq!(h.h2, rat(19, 8));
        assert!(h.h3.is_zero());
        assert!((h.h1 + h.h2 + h.h3 + h.h4).is_zero());
        assert!(chain_equilibrium_exists(&chain).unwrap());
    }

    #[test]
    fn chain_exists_negative_case() {
        // P4 placed so h1 > 0 but h1 + h2 < 0.
        let chain = ChainTemplate {
            complexes: [
                Complex::from_ints(0, 0),
                Complex::from_ints(1, 0),
                Complex::from_ints(1, 1),
                Complex::from_ints(5, -1),
            ],
            kappa: [1.0, 1.0, 1.0],
        };
        let h = SignedAreas::from_chain(&chain.complexes);
        assert!(h.h1.is_positive());
        assert!((h.h1 + h.h2).is_negative());
        assert!(!chain_equilibrium_exists(&chain).unwrap());
    }

    #[test]
    fn chain_collinear_errors() {
        let chain = ChainTemplate {
            complexes: [
                Complex::from_ints(0, 0),
                Complex::from_ints(1, 1),
                Complex::from_ints(2, 2),
                Complex::from_ints(0, 3),
            ],
            kappa: [1.0, 1.0, 1.0],
        };
        assert!(matches!(
            chain_equilibrium_exists(&chain),
            Err(EquilibriumError::Degenerate(_))
        ));
    }

    #[test]
    fn three_reaction_existence_depends_on_d() {
        // Sources (0,0), (0,-1), (a,b); vectors (0,-1), (1,-1), (-1,d).
        let make = |d: (i64, i64)| ThreeReactionTemplate {
            sources: [
                Complex::from_ints(0, 0),
                Complex::from_ints(0, -1),
                Complex::from_ints(1, 1),
            ],
            vectors: [
                (rat(0, 1), rat(-1, 1)),
                (rat(1, 1), rat(-1, 1)),
                (rat(-1, 1), rat(d.0, d.1)),
            ],
            kappa: [1.0, 1.0, 1.0],
        };
        assert!(three_reaction_exists(&make((2, 1))).unwrap());
        assert!(!three_reaction_exists(&make((1, 2))).unwrap());
    }

    #[test]
    fn three_reaction_caption_data() {
        // c = (1, -1, -2), d = (-1, 2, 1) with c2 = -1, d3 = 1.
        let t = ThreeReactionTemplate {
            sources: [
                Complex::from_ints(0, 0),
                Complex::from_ints(2, 1),
                Complex::from_ints(1, 2),
            ],
            vectors: [
                (rat(1, 1), rat(-1, 1)),
                (rat(-1, 1), rat(2, 1)),
                (rat(-2, 1), rat(1, 1)),
            ],
            kappa: [1.0, 1.0, 1.0],
        };
        let cp = t.cross_products();
        assert!(cp.iter().all(|c| c.is_positive()));
        assert!(three_reaction_exists(&t).unwrap());
    }

    #[test]
    fn three_reaction_zero_cross_product_fails() {
        // c2 d3 - c3 d2 = 0 with the others nonzero.
        let t = ThreeReactionTemplate {
            sources: [
                Complex::from_ints(0, 0),
                Complex::from_ints(1, 0),
                Complex::from_ints(0, 1),
            ],
            vectors: [
                (rat(1, 1), rat(1, 1)),
                (rat(1, 1), rat(0, 1)),
                (rat(2, 1), rat(0, 1)),
            ],
            kappa: [1.0, 1.0, 1.0],
        };
        assert!(!three_reaction_exists(&t).unwrap());
    }

    #[test]
    fn quadrangle_closed_form_equilibrium() {
        // kappa = (16, 1, 1, 1): closed form gives (8, 2).
        let net = parse_network("0 1 -> 1 0 @ 16\n1 0 -> 1 2 @ 1\n1 2 -> 0 3 @ 1\n0 3 -> 0 1 @ 1")
            .unwrap();
        let eq = solve_equilibrium(&net, &SolveOptions::default()).unwrap();
        assert!((eq.x - 8.0).abs() < 1e-10);
        assert!((eq.y - 2.0).abs() < 1e-10);
    }

    #[test]
    fn zigzag_equilibrium_and_nonexistence() {
        let net = crate::families::zigzag_network(1.0);
        let eq = solve_equilibrium(&net, &SolveOptions::default()).unwrap();
        assert!((eq.x - 1.0).abs() < 1e-12 && (eq.y - 1.0).abs() < 1e-12);
        let net = crate::families::zigzag_network(2.0);
        assert!(solve_equilibrium(&net, &SolveOptions::default()).is_err());
    }

    #[test]
    fn scale_identity_when_already_at_unit() {
        let net = crate::families::zigzag_network(1.0);
        let eq = solve_equilibrium(&net, &SolveOptions::default()).unwrap();
        let scaled = scale_to_unit(&net, &eq);
        assert!((scaled.k - 1.0).abs() < 1e-12);
        for (r, kb) in net.reactions().iter().zip(&scaled.kbar) {
            assert!((r.kappa - kb).abs() < 1e-12);
        }
        let (f, g) = scaled.field.evaluate(1.0, 1.0).unwrap();
        assert!(f.abs() < 1e-10 && g.abs() < 1e-10);
    }

    #[test]
    fn chain_scaling_recovers_lambda_and_family_form() {
        // q = 1/4, r = 15/8 with rates chosen so x/y = 4/3.
        let net =
            parse_network("0 0 -> 0 -1/4 @ 10.5\n0 -1/4 -> 1 1/2 @ 1\n1 1/2 -> 0 19/8 @ 0.75")
                .unwrap();
        let eq = solve_equilibrium(&net, &SolveOptions::default()).unwrap();
        assert!((eq.x / eq.y - 4.0 / 3.0).abs() < 1e-10);
        let scaled = scale_to_unit(&net, &eq);
        let lambda = scaled.lambda.unwrap();
        // kbar1 = lambda h1 etc.
        let chain = detect_chain(&net).unwrap();
        let h = SignedAreas::from_chain(&chain.complexes);
        assert!((scaled.kbar[0] - lambda * rational_to_f64(h.h1)).abs() < 1e-9);
        assert!((scaled.kbar[1] - lambda * rational_to_f64(h.h1 + h.h2)).abs() < 1e-9);
        // with lambda = -1/q = -4 the scaled x-equation is y^{-q} - x y^{1/2}
        assert!((lambda + 4.0).abs() < 1e-9);
        let (f, g) = scaled.field.evaluate(1.0, 1.0).unwrap();
        assert!(f.abs() < 1e-10 && g.abs() < 1e-10);
    }

    #[test]
    fn binomial_and_newton_agree_on_random_chains() {
        let mut rng = StdRng::seed_from_u64(42);
        let mut accepted = 0;
        while accepted < 1000 {
            let coord = |rng: &mut StdRng| rat(rng.gen_range(-6..=6), rng.gen_range(1..=2));
            let p: Vec<Complex> = (0..4)
                .map(|_| Complex::new(coord(&mut rng), coord(&mut rng)))
                .collect();
            if p.windows(2).any(|w| w[0] == w[1]) || p[0] == p[2] || p[0] == p[3] || p[1] == p[3] {
                continue;
            }
            let chain = ChainTemplate {
                complexes: [p[0], p[1], p[2], p[3]],
                kappa: [
                    rng.gen_range(0.2..5.0),
                    rng.gen_range(0.2..5.0),
                    rng.gen_range(0.2..5.0),
                ],
            };
            let reactions = vec![
                crate::network::Reaction {
                    source: p[0],
                    target: p[1],
                    kappa: chain.kappa[0],
                },
                crate::network::Reaction {
                    source: p[1],
                    target: p[2],
                    kappa: chain.kappa[1],
                },
                crate::network::Reaction {
                    source: p[2],
                    target: p[3],
                    kappa: chain.kappa[2],
                },
            ];
            let Ok(net) = ReactionNetwork::new(reactions) else {
                continue;
            };
            if detect_chain(&net).is_none() {
                continue;
            }
            let Ok(exists) = chain_equilibrium_exists(&chain) else {
                continue;
            };
            if !exists {
                assert!(matches!(
                    solve_equilibrium(&net, &SolveOptions::default()),
                    Err(EquilibriumError::NoEquilibrium(_))
                ));
                continue;
            }
            let eq = solve_equilibrium(&net, &SolveOptions::default()).unwrap();
            // The multi-start grid is sized for desk-scale systems; skip
            // chains whose equilibrium lies beyond its reliable basin.
            if eq.x.ln().abs() > 5.0 || eq.y.ln().abs() > 5.0 {
                continue;
            }
            accepted += 1;
            let newton = solve_general(&net.vector_field(), &SolveOptions::default())
                .unwrap_or_else(|e| {
                    panic!(
                        "newton failed on {:?} eq ({}, {}): {e}",
                        chain.complexes, eq.x, eq.y
                    )
                });
            assert!(
                (eq.x - newton.x).abs() <= 1e-8 * eq.x.abs()
                    && (eq.y - newton.y).abs() <= 1e-8 * eq.y.abs(),
                "binomial {:?} vs newton {:?}",
                (eq.x, eq.y),
                (newton.x, newton.y)
            );
            // Rescaling a verified equilibrium leaves at most 1e-10 residual
            // at (1, 1).
            let scaled = scale_to_unit(&net, &eq);
            let (f, g) = scaled.field.evaluate(1.0, 1.0).unwrap();
            let scale = scaled.field.magnitude(1.0, 1.0).max(1.0);
            assert!(f.abs().max(g.abs()) <= 1e-10 * scale);
        }
    }

    #[test]
    fn existence_is_rate_independent() {
        let mut rng = StdRng::seed_from_u64(7);
        let chain = chain_family((1, 4), (15, 8));
        let mut results = Vec::new();
        for _ in 0..100 {
            let mut c = chain.clone();
            c.kappa = [
                rng.gen_range(1e-2..1e2),
                rng.gen_range(1e-2..1e2),
                rng.gen_range(1e-2..1e2),
            ];
            results.push(chain_equilibrium_exists(&c).unwrap());
        }
        assert!(results.iter().all(|&b| b));
    }

    #[test]
    fn sign_test_matches_geometric_test() {
        let mut rng = StdRng::seed_from_u64(99);
        let mut tested = 0;
        while tested < 1000 {
            let coord = |rng: &mut StdRng| rat(rng.gen_range(-8..=8), rng.gen_range(1..=2));
            let p = [
                Complex::new(coord(&mut rng), coord(&mut rng)),
                Complex::new(coord(&mut rng), coord(&mut rng)),
                Complex::new(coord(&mut rng), coord(&mut rng)),
                Complex::new(coord(&mut rng), coord(&mut rng)),
            ];
            let chain = ChainTemplate {
                complexes: p,
                kappa: [1.0, 1.0, 1.0],
            };
            let (Ok(sign), Ok(geo)) = (
                chain_equilibrium_exists(&chain),
                chain_equilibrium_exists_geometric(&chain),
            ) else {
                continue;
            };
            // Skip quadruples within floating noise of the angle boundary.
            let h = SignedAreas::from_chain(&p);
            if (h.h1 + h.h2).is_zero() || h.h1.is_zero() || (h.h1 + h.h2 + h.h3).is_zero() {
                continue;
            }
            tested += 1;
            assert_eq!(sign, geo, "disagreement on {p:?}");
        }
    }
}
