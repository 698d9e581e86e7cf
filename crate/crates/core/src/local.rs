//! Local analysis at an equilibrium: Jacobian data, Taylor expansion and
//! focal values `L1..L4`.
//!
//! Focal values are reported in the return-map normalization: on a section
//! through the equilibrium parameterized by the x-deviation, the displacement
//! of the Poincare map expands as
//! `P(s) - s = L1 s^3 + ...` (and `L_k s^{2k+1}` once `L1..L_{k-1}` vanish).
//! They are computed by bringing the linear part to `omega * rotation` form
//! while keeping `u = x - x0` as the first coordinate, running the classical
//! Lyapunov-function recursion `Vdot = eta_2 r^4 + eta_3 r^6 + ...`, and
//! converting by `L_k = 2 pi eta_{k+1} / omega`. This normalization
//! reproduces the known closed forms for all families in the test corpus
//! with a single constant.

use num_rational::Rational64;
use thiserror::Error;

use crate::equilibrium::{ScaledSystem, ThreeReactionTemplate};
use crate::field::VectorField;
use crate::network::rational_to_f64;

/// Absolute tolerance below which the trace counts as zero.
pub const TRACE_TOL: f64 = 1e-9;
/// Absolute tolerance below which a focal value counts as zero.
pub const FOCAL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum LocalError {
    #[error("trace {0} is not within {TRACE_TOL} of zero")]
    TraceNotZero(f64),
    #[error("Jacobian determinant {0} is not positive")]
    DetNotPositive(f64),
    #[error("Taylor order {0} out of range (3..=12)")]
    BadOrder(usize),
    #[error("expansion center is not an equilibrium (|field| = {0:.3e})")]
    NotEquilibrium(f64),
    #[error("network does not match the expected template: {0}")]
    TemplateMismatch(String),
}

/// Jacobian matrix with trace and determinant.
#[derive(Clone, Copy, Debug)]
pub struct JacobianData {
    pub matrix: [[f64; 2]; 2],
    pub trace: f64,
    pub det: f64,
}

/// Analytic Jacobian of a monomial field:
/// `d/dx (c x^e y^f) = c e x^(e-1) y^f` summed per term.
pub fn jacobian(vf: &VectorField, at: (f64, f64)) -> JacobianData {
    let (x, y) = at;
    let mut m = [[0.0; 2]; 2];
    for (row, terms) in [vf.x_terms(), vf.y_terms()].into_iter().enumerate() {
        for t in terms {
            let ea = rational_to_f64(t.ea);
            let eb = rational_to_f64(t.eb);
            let base = t.coeff * crate::field::pow_rat(x, t.ea) * crate::field::pow_rat(y, t.eb);
            m[row][0] += base * ea / x;
            m[row][1] += base * eb / y;
        }
    }
    JacobianData {
        matrix: m,
        trace: m[0][0] + m[1][1],
        det: m[0][0] * m[1][1] - m[0][1] * m[1][0],
    }
}

/// Closed-form determinant for the three-reaction template at the scaled
/// equilibrium:
/// `det J = (1/lambda) K kbar1 kbar2 kbar3 [a1(b2-b3) + a2(b3-b1) + a3(b1-b2)]`.
pub fn det_three_reactions(
    scaled: &ScaledSystem,
    template: &ThreeReactionTemplate,
) -> Result<f64, LocalError> {
    let lambda = scaled
        .lambda
        .ok_or_else(|| LocalError::TemplateMismatch("scaled system has no lambda".into()))?;
    if scaled.kbar.len() != 3 {
        return Err(LocalError::TemplateMismatch(
            "expected three rate constants".into(),
        ));
    }
    let s = &template.sources;
    let a = [s[0].a, s[1].a, s[2].a].map(rational_to_f64);
    let b = [s[0].b, s[1].b, s[2].b].map(rational_to_f64);
    let bracket = a[0] * (b[1] - b[2]) + a[1] * (b[2] - b[0]) + a[2] * (b[0] - b[1]);
    Ok(scaled.k * scaled.kbar.iter().product::<f64>() * bracket / lambda)
}

/// Dense bivariate Taylor coefficients of a field about a point.
///
/// `c[m][n]` multiplies `(x - x0)^m (y - y0)^n` in the first component,
/// `d[m][n]` in the second. Coefficients are exact analytic mixed partials
/// over factorials; the only error is truncation.
#[derive(Clone, Debug)]
pub struct TaylorField {
    pub center: (f64, f64),
    pub order: usize,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
}

/// Generalized binomial coefficient `C(e, m)` for rational `e`.
fn gbinom(e: Rational64, m: usize) -> f64 {
    let ef = rational_to_f64(e);
    let mut out = 1.0;
    for i in 0..m {
        out *= (ef - i as f64) / (i as f64 + 1.0);
    }
    out
}

fn taylor_component(terms: &[crate::field::Term], x0: f64, y0: f64, order: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; order + 1]; order + 1];
    for t in terms {
        for m in 0..=order {
            let gm = gbinom(t.ea, m);
            if gm == 0.0 {
                continue;
            }
            let px = crate::field::pow_rat(x0, t.ea - Rational64::from_integer(m as i64));
            for n in 0..=(order - m) {
                let gn = gbinom(t.eb, n);
                if gn == 0.0 {
                    continue;
                }
                let py = crate::field::pow_rat(y0, t.eb - Rational64::from_integer(n as i64));
                c[m][n] += t.coeff * gm * gn * px * py;
            }
        }
    }
    c
}

/// Taylor-expand a monomial field about a point of the open quadrant.
pub fn taylor_expand(
    vf: &VectorField,
    at: (f64, f64),
    order: usize,
) -> Result<TaylorField, LocalError> {
    if !(3..=12).contains(&order) {
        return Err(LocalError::BadOrder(order));
    }
    Ok(TaylorField {
        center: at,
        order,
        c: taylor_component(vf.x_terms(), at.0, at.1, order),
        d: taylor_component(vf.y_terms(), at.0, at.1, order),
    })
}

impl TaylorField {
    /// Linear part as Jacobian data.
    pub fn linear(&self) -> JacobianData {
        let m = [[self.c[1][0], self.c[0][1]], [self.d[1][0], self.d[0][1]]];
        JacobianData {
            matrix: m,
            trace: m[0][0] + m[1][1],
            det: m[0][0] * m[1][1] - m[0][1] * m[1][0],
        }
    }

    /// Evaluate the truncated expansion at an offset from the center.
    pub fn evaluate(&self, dx: f64, dy: f64) -> (f64, f64) {
        let eval = |c: &Vec<Vec<f64>>| {
            let mut acc = 0.0;
            for m in 0..=self.order {
                for n in 0..=(self.order - m) {
                    acc += c[m][n] * dx.powi(m as i32) * dy.powi(n as i32);
                }
            }
            acc
        };
        (eval(&self.c), eval(&self.d))
    }
}

/// Focal values `L1..Ln` with the first index (1-based) whose value exceeds
/// [`FOCAL_TOL`], if any.
#[derive(Clone, Debug)]
pub struct FocalValues {
    pub values: Vec<f64>,
    pub first_nonzero: Option<(usize, f64)>,
}

// Homogeneous polynomials of degree d are stored as vectors of length d+1:
// entry j is the coefficient of u^(d-j) v^j.

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn d_du(a: &[f64]) -> Vec<f64> {
    let d = a.len() - 1;
    (0..d).map(|j| (d - j) as f64 * a[j]).collect()
}

fn d_dv(a: &[f64]) -> Vec<f64> {
    let d = a.len() - 1;
    (1..=d).map(|j| j as f64 * a[j]).collect()
}

/// Substitute `X = t11 u + t12 v`, `Y = t21 u + t22 v` into a triangular
/// coefficient array, collecting homogeneous parts per degree.
fn substitute_linear(c: &[Vec<f64>], t: [f64; 4], order: usize) -> Vec<Vec<f64>> {
    let [t11, t12, t21, t22] = t;
    let mut per_degree: Vec<Vec<f64>> = (0..=order).map(|d| vec![0.0; d + 1]).collect();
    let binom = |n: usize, k: usize| -> f64 {
        let mut out = 1.0;
        for i in 0..k {
            out *= (n - i) as f64 / (i + 1) as f64;
        }
        out
    };
    for m in 0..=order {
        for n in 0..=(order - m) {
            if c[m][n] == 0.0 {
                continue;
            }
            let xm: Vec<f64> = (0..=m)
                .map(|k| binom(m, k) * t11.powi((m - k) as i32) * t12.powi(k as i32))
                .collect();
            let yn: Vec<f64> = (0..=n)
                .map(|k| binom(n, k) * t21.powi((n - k) as i32) * t22.powi(k as i32))
                .collect();
            let prod = poly_mul(&xm, &yn);
            for (j, p) in prod.iter().enumerate() {
                per_degree[m + n][j] += c[m][n] * p;
            }
        }
    }
    per_degree
}

/// Project a homogeneous polynomial of degree d onto the trigonometric basis
/// `r^d (p_j cos j*th + q_j sin j*th)` by uniform sampling (exact for trig
/// polynomials at this sample count, up to roundoff).
fn fourier(poly: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d = poly.len() - 1;
    let n = 4 * (d + 2);
    let mut vals = vec![0.0; n];
    for (i, v) in vals.iter_mut().enumerate() {
        let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        let (s, c) = th.sin_cos();
        let mut acc = 0.0;
        for (j, &aj) in poly.iter().enumerate() {
            acc += aj * c.powi((d - j) as i32) * s.powi(j as i32);
        }
        *v = acc;
    }
    let mut p = vec![0.0; d + 1];
    let mut q = vec![0.0; d + 1];
    for j in 0..=d {
        let (mut pj, mut qj) = (0.0, 0.0);
        for (i, &v) in vals.iter().enumerate() {
            let th = 2.0 * std::f64::consts::PI * (i * j) as f64 / n as f64;
            pj += v * th.cos();
            qj += v * th.sin();
        }
        p[j] = pj * 2.0 / n as f64;
        q[j] = qj * 2.0 / n as f64;
    }
    p[0] /= 2.0;
    (p, q)
}

/// Rebuild the homogeneous polynomial of degree d from its trigonometric
/// coefficients: `r^d cos(j th) = (u^2+v^2)^((d-j)/2) Re (u+iv)^j`.
fn fourier_to_poly(p: &[f64], q: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d + 1];
    let r2 = [1.0, 0.0, 1.0];
    for j in 0..=d {
        if !(d - j).is_multiple_of(2) || (p[j] == 0.0 && q[j] == 0.0) {
            continue;
        }
        let mut re = vec![0.0; j + 1];
        let mut im = vec![0.0; j + 1];
        let mut binom = 1.0;
        for k in 0..=j {
            match k % 4 {
                0 => re[k] += binom,
                1 => im[k] += binom,
                2 => re[k] -= binom,
                _ => im[k] -= binom,
            }
            if k < j {
                binom *= (j - k) as f64 / (k + 1) as f64;
            }
        }
        let mut base: Vec<f64> = re
            .iter()
            .zip(&im)
            .map(|(r, i)| p[j] * r + q[j] * i)
            .collect();
        for _ in 0..((d - j) / 2) {
            base = poly_mul(&base, &r2);
        }
        for (o, b) in out.iter_mut().zip(&base) {
            *o += b;
        }
    }
    out
}

/// Lyapunov quantities `eta_2, eta_3, ...` of a field whose linear part at
/// the origin of `(u, v)` is `omega * rotation`. `field_u[d]`, `field_v[d]`
/// hold the homogeneous degree-d parts.
fn lyapunov_etas(field_u: &[Vec<f64>], field_v: &[Vec<f64>], omega: f64, count: usize) -> Vec<f64> {
    let top_degree = 2 * count + 2;
    let mut v_hom: Vec<Vec<f64>> = vec![Vec::new(); top_degree + 1];
    v_hom[2] = vec![0.5, 0.0, 0.5];
    let mut etas = Vec::with_capacity(count);
    for d in 3..=top_degree {
        let mut r = vec![0.0; d + 1];
        for k in 2..d {
            let j = d + 1 - k;
            if j < 2 || j >= field_u.len() || v_hom[k].is_empty() {
                continue;
            }
            let du = poly_mul(&d_du(&v_hom[k]), &field_u[j]);
            let dv = poly_mul(&d_dv(&v_hom[k]), &field_v[j]);
            for (ri, (a, b)) in r.iter_mut().zip(du.iter().zip(&dv)) {
                *ri += a + b;
            }
        }
        let (p, q) = fourier(&r);
        if d % 2 == 0 {
            etas.push(p[0]);
        }
        let mut pv = vec![0.0; d + 1];
        let mut qv = vec![0.0; d + 1];
        for j in 1..=d {
            pv[j] = q[j] / (omega * j as f64);
            qv[j] = -p[j] / (omega * j as f64);
        }
        v_hom[d] = fourier_to_poly(&pv, &qv, d);
    }
    etas
}

/// Focal values of a Taylor field at a weak focus.
///
/// Preconditions: the center is an equilibrium, `|trace| < TRACE_TOL` and
/// `det > 0`. `n` focal values need Taylor order at least `2n + 1`.
pub fn focal_values(tf: &TaylorField, n: usize) -> Result<FocalValues, LocalError> {
    assert!((1..=4).contains(&n), "focal depth must be 1..=4");
    let lin = tf.linear();
    if lin.det <= 0.0 {
        return Err(LocalError::DetNotPositive(lin.det));
    }
    if lin.trace.abs() >= TRACE_TOL {
        return Err(LocalError::TraceNotZero(lin.trace));
    }
    let consts = tf.c[0][0].abs().max(tf.d[0][0].abs());
    if consts > 1e-8 {
        return Err(LocalError::NotEquilibrium(consts));
    }
    let order = (2 * n + 1).min(tf.order);
    let omega = lin.det.sqrt();
    let a = lin.matrix[0][0];
    let b = lin.matrix[0][1];
    // Keep u = x - x0; v = -(a u + b (y - y0)) / omega brings the linear part
    // to (0, -omega; omega, 0). b != 0 whenever trace ~ 0 and det > 0.
    let t = [1.0, 0.0, -a / b, -omega / b];
    let fx = substitute_linear(&tf.c, t, order);
    let fy = substitute_linear(&tf.d, t, order);
    let field_u = fx.clone();
    let field_v: Vec<Vec<f64>> = fx
        .iter()
        .zip(&fy)
        .map(|(xu, yv)| {
            xu.iter()
                .zip(yv)
                .map(|(x, y)| -(a * x + b * y) / omega)
                .collect()
        })
        .collect();
    let count = (order - 1) / 2;
    let etas = lyapunov_etas(&field_u, &field_v, omega, count);
    let values: Vec<f64> = etas
        .iter()
        .take(n)
        .map(|e| 2.0 * std::f64::consts::PI * e / omega)
        .collect();
    let first_nonzero = values
        .iter()
        .position(|l| l.abs() > FOCAL_TOL)
        .map(|i| (i + 1, values[i]));
    Ok(FocalValues {
        values,
        first_nonzero,
    })
}

/// Hopf-type classification of an equilibrium.
#[derive(Clone, Debug, PartialEq)]
pub enum HopfClassification {
    /// Negative trace: asymptotically stable.
    Stable,
    /// Positive trace: repelling.
    Unstable,
    /// Zero trace, first nonzero focal value `L_order`.
    WeakFocus { order: usize, value: f64 },
    /// Zero trace and `L1..L4` all below tolerance. Not a proof of a center.
    CenterCandidate,
}

#[derive(Clone, Debug)]
pub struct HopfReport {
    pub trace: f64,
    pub det: f64,
    pub focal: Option<FocalValues>,
    pub classification: HopfClassification,
}

/// Classify an equilibrium of a field from the trace sign, falling back to
/// focal values `L1..L_depth` on the trace-zero locus.
pub fn hopf_classify_at(
    vf: &VectorField,
    at: (f64, f64),
    depth: usize,
) -> Result<HopfReport, LocalError> {
    let j = jacobian(vf, at);
    if j.det <= 0.0 {
        return Err(LocalError::DetNotPositive(j.det));
    }
    if j.trace.abs() >= TRACE_TOL {
        let classification = if j.trace < 0.0 {
            HopfClassification::Stable
        } else {
            HopfClassification::Unstable
        };
        return Ok(HopfReport {
            trace: j.trace,
            det: j.det,
            focal: None,
            classification,
        });
    }
    let depth = depth.clamp(1, 4);
    let tf = taylor_expand(vf, at, 2 * depth + 1)?;
    let focal = focal_values(&tf, depth)?;
    let classification = match focal.first_nonzero {
        Some((order, value)) => HopfClassification::WeakFocus { order, value },
        None => HopfClassification::CenterCandidate,
    };
    Ok(HopfReport {
        trace: j.trace,
        det: j.det,
        focal: Some(focal),
        classification,
    })
}

/// Classification of the scaled system at its equilibrium `(1, 1)`.
pub fn hopf_classify(scaled: &ScaledSystem, depth: usize) -> Result<HopfReport, LocalError> {
    hopf_classify_at(&scaled.field, (1.0, 1.0), depth)
}
