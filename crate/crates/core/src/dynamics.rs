//! Numerical dynamics in the open positive quadrant: adaptive integration,
//! Poincare return maps, limit-cycle detection, staged perturbation recipes
//! and the homoclinic probe for the reversible chain family.
//!
//! The integrator is an embedded Dormand-Prince 5(4) pair with PI step
//! control and fifth-order dense output. Positivity is enforced by step
//! rejection: a step whose stages or endpoint leave the open quadrant is
//! halved, and persistent underflow is reported as a boundary hit.

use thiserror::Error;

use crate::families;
use crate::field::VectorField;
use crate::local;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("no return to the section within the budget ({0:?})")]
    NoReturn(TrajectoryFlag),
    #[error("invalid parameters: {0}")]
    BadParameters(String),
    #[error("offset {0} is outside the section range")]
    OutsideRange(f64),
    #[error(transparent)]
    Local(#[from] local::LocalError),
}

/// Why an integration stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrajectoryFlag {
    /// Entered the `equilibrium_tol` ball around the supplied equilibrium.
    ConvergedToEquilibrium,
    /// A coordinate fell below `boundary_tol`, or steps underflowed against
    /// the quadrant boundary.
    HitBoundary,
    /// Reached `t_end`.
    HitTimeLimit,
    /// A coordinate exceeded `escape_bound`.
    Escaped,
}

/// An integrated orbit: strictly increasing times, all points in the open
/// quadrant, and the reason the integration stopped.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<(f64, f64)>,
    pub flag: TrajectoryFlag,
}

impl Trajectory {
    pub fn last(&self) -> (f64, (f64, f64)) {
        (*self.times.last().unwrap(), *self.points.last().unwrap())
    }

    /// CSV with header `t,x,y`, one row per accepted step.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,y\n");
        for (t, (x, y)) in self.times.iter().zip(&self.points) {
            out.push_str(&format!("{:.14e},{:.14e},{:.14e}\n", t, x, y));
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// When set, stop with `ConvergedToEquilibrium` inside this ball.
    pub equilibrium: Option<(f64, f64)>,
    pub equilibrium_tol: f64,
    pub boundary_tol: f64,
    pub escape_bound: f64,
    /// Record every accepted step (`false` keeps only the endpoints).
    pub record: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 5_000_000,
            equilibrium: None,
            equilibrium_tol: 1e-9,
            boundary_tol: 1e-9,
            escape_bound: 1e9,
            record: true,
        }
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const ER: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// One accepted step with dense output.
struct StepResult {
    t0: f64,
    h: f64,
    cont: [[f64; 2]; 5],
}

impl StepResult {
    fn dense(&self, t: f64) -> (f64, f64) {
        let s = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let s1 = 1.0 - s;
        let eval = |i: usize| {
            let c = &self.cont;
            c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])))
        };
        (eval(0), eval(1))
    }
}

struct Stepper<'f> {
    vf: &'f VectorField,
    t: f64,
    x: f64,
    y: f64,
    k1: (f64, f64),
    h: f64,
    facold: f64,
    rtol: f64,
    atol: f64,
}

enum StepOutcome {
    Accepted(StepResult),
    Rejected,
    Underflow,
}

impl<'f> Stepper<'f> {
    fn new(vf: &'f VectorField, t: f64, x: f64, y: f64, rtol: f64, atol: f64) -> Option<Self> {
        if x <= 0.0 || y <= 0.0 || x.is_nan() || y.is_nan() {
            return None;
        }
        let k1 = vf.eval_unchecked(x, y);
        if !k1.0.is_finite() || !k1.1.is_finite() {
            return None;
        }
        // Conservative initial step from the field magnitude.
        let scale = (k1.0.abs() / x.max(1e-6))
            .max(k1.1.abs() / y.max(1e-6))
            .max(1e-6);
        let h = (0.01 / scale).clamp(1e-10, 0.1);
        Some(Stepper {
            vf,
            t,
            x,
            y,
            k1,
            h,
            facold: 1e-4,
            rtol,
            atol,
        })
    }

    fn try_step(&mut self) -> StepOutcome {
        let h = self.h;
        let (x0, y0) = (self.x, self.y);
        let mut k = [[0.0f64; 2]; 7];
        k[0] = [self.k1.0, self.k1.1];
        let mut endpoint = (0.0, 0.0);
        for stage in 0..6 {
            let mut xs = x0;
            let mut ys = y0;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                xs += h * A[stage][j] * kj[0];
                ys += h * A[stage][j] * kj[1];
            }
            if !(xs > 0.0 && ys > 0.0 && xs.is_finite() && ys.is_finite()) {
                return self.reject();
            }
            let (fx, fy) = self.vf.eval_unchecked(xs, ys);
            if !fx.is_finite() || !fy.is_finite() {
                return self.reject();
            }
            k[stage + 1] = [fx, fy];
            if stage == 5 {
                // FSAL: the last stage point is the fifth-order endpoint.
                endpoint = (xs, ys);
            }
        }
        let (xn, yn) = endpoint;
        let mut err = 0.0f64;
        for i in 0..2 {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += ER[j] * kj[i];
            }
            e *= h;
            let sk = self.atol
                + self.rtol
                    * if i == 0 {
                        x0.abs().max(xn.abs())
                    } else {
                        y0.abs().max(yn.abs())
                    };
            err += (e / sk) * (e / sk);
        }
        let err = (err / 2.0).sqrt();
        let fac11 = err.powf(0.2);
        let fac = (fac11 / self.facold.powf(0.04) / 0.9).clamp(0.2, 5.0);
        if err <= 1.0 {
            self.facold = err.max(1e-4);
            let ydiff = [xn - x0, yn - y0];
            let bspl = [h * k[0][0] - ydiff[0], h * k[0][1] - ydiff[1]];
            let mut dsum = [0.0f64; 2];
            for i in 0..2 {
                for (j, kj) in k.iter().enumerate() {
                    dsum[i] += D[j] * kj[i];
                }
            }
            let cont = [
                [x0, y0],
                ydiff,
                bspl,
                [
                    ydiff[0] - h * k[6][0] - bspl[0],
                    ydiff[1] - h * k[6][1] - bspl[1],
                ],
                [h * dsum[0], h * dsum[1]],
            ];
            let result = StepResult {
                t0: self.t,
                h,
                cont,
            };
            self.t += h;
            self.x = xn;
            self.y = yn;
            self.k1 = (k[6][0], k[6][1]);
            self.h = h / fac;
            StepOutcome::Accepted(result)
        } else {
            self.h = h / (fac11 / 0.9).min(10.0);
            if self.h.abs() < 1e-14 * self.t.abs().max(1.0) {
                StepOutcome::Underflow
            } else {
                StepOutcome::Rejected
            }
        }
    }

    fn reject(&mut self) -> StepOutcome {
        self.h *= 0.5;
        if self.h.abs() < 1e-14 * self.t.abs().max(1.0) {
            StepOutcome::Underflow
        } else {
            StepOutcome::Rejected
        }
    }
}

/// Integrate from `x0` up to `t_end` (or an earlier stopping flag).
pub fn integrate(
    vf: &VectorField,
    x0: (f64, f64),
    t_end: f64,
    opts: &IntegrateOptions,
) -> Trajectory {
    let mut times = vec![0.0];
    let mut points = vec![x0];
    let Some(mut stepper) = Stepper::new(vf, 0.0, x0.0, x0.1, opts.rtol, opts.atol) else {
        return Trajectory {
            times,
            points,
            flag: TrajectoryFlag::HitBoundary,
        };
    };
    let mut flag = TrajectoryFlag::HitTimeLimit;
    let mut steps = 0;
    while stepper.t < t_end && steps < opts.max_steps {
        steps += 1;
        stepper.h = stepper.h.min(t_end - stepper.t);
        match stepper.try_step() {
            StepOutcome::Accepted(_) => {
                let p = (stepper.x, stepper.y);
                if opts.record {
                    times.push(stepper.t);
                    points.push(p);
                }
                if let Some(eq) = opts.equilibrium {
                    if (p.0 - eq.0).abs() < opts.equilibrium_tol
                        && (p.1 - eq.1).abs() < opts.equilibrium_tol
                    {
                        flag = TrajectoryFlag::ConvergedToEquilibrium;
                        break;
                    }
                }
                if p.0 < opts.boundary_tol || p.1 < opts.boundary_tol {
                    flag = TrajectoryFlag::HitBoundary;
                    break;
                }
                if p.0 > opts.escape_bound || p.1 > opts.escape_bound {
                    flag = TrajectoryFlag::Escaped;
                    break;
                }
            }
            StepOutcome::Rejected => {}
            StepOutcome::Underflow => {
                flag = TrajectoryFlag::HitBoundary;
                break;
            }
        }
    }
    if !opts.record || times.len() == 1 {
        times.push(stepper.t);
        points.push((stepper.x, stepper.y));
    }
    Trajectory {
        times,
        points,
        flag,
    }
}

/// A section ray from a base point (usually the equilibrium).
#[derive(Clone, Copy, Debug)]
pub struct PoincareSection {
    pub base: (f64, f64),
    /// Unit direction of the ray; offsets are measured along it.
    pub direction: (f64, f64),
    /// Offset range searched by the cycle detector, when fixed by the caller.
    pub s_range: Option<(f64, f64)>,
}

impl PoincareSection {
    /// Horizontal ray pointing right from `base`.
    pub fn horizontal(base: (f64, f64)) -> Self {
        PoincareSection {
            base,
            direction: (1.0, 0.0),
            s_range: None,
        }
    }

    fn point_at(&self, s: f64) -> (f64, f64) {
        (
            self.base.0 + s * self.direction.0,
            self.base.1 + s * self.direction.1,
        )
    }

    /// Signed perpendicular coordinate of `p` relative to the ray.
    fn crossing_value(&self, p: (f64, f64)) -> f64 {
        let (dx, dy) = (p.0 - self.base.0, p.1 - self.base.1);
        -self.direction.1 * dx + self.direction.0 * dy
    }

    fn radial_value(&self, p: (f64, f64)) -> f64 {
        let (dx, dy) = (p.0 - self.base.0, p.1 - self.base.1);
        self.direction.0 * dx + self.direction.1 * dy
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ReturnOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Time budget per return.
    pub t_budget: f64,
    pub boundary_tol: f64,
    pub escape_bound: f64,
}

impl Default for ReturnOptions {
    fn default() -> Self {
        ReturnOptions {
            rtol: 1e-12,
            atol: 1e-14,
            t_budget: 1e4,
            boundary_tol: 1e-9,
            escape_bound: 1e9,
        }
    }
}

/// First return of the orbit through `section.point_at(s)` to the section
/// ray, crossing in the same sense as the initial departure (so clockwise
/// and counterclockwise foci both have returns). The crossing time is
/// located by bisection on the dense output to `1e-12`.
pub fn return_map(
    vf: &VectorField,
    section: &PoincareSection,
    s: f64,
    opts: &ReturnOptions,
) -> Result<f64, DynamicsError> {
    if let Some((lo, hi)) = section.s_range {
        if s < lo || s > hi {
            return Err(DynamicsError::OutsideRange(s));
        }
    }
    let start = section.point_at(s);
    if !(start.0 > 0.0 && start.1 > 0.0) {
        return Err(DynamicsError::OutsideRange(s));
    }
    let mut stepper = Stepper::new(vf, 0.0, start.0, start.1, opts.rtol, opts.atol)
        .ok_or(DynamicsError::NoReturn(TrajectoryFlag::HitBoundary))?;
    // Crossing sense: sign of the perpendicular velocity at departure.
    let deriv = vf.eval_unchecked(start.0, start.1);
    let sense_raw = -section.direction.1 * deriv.0 + section.direction.0 * deriv.1;
    let sense = if sense_raw >= 0.0 { 1.0 } else { -1.0 };
    let mut c_prev = 0.0; // on the section at departure
    while stepper.t < opts.t_budget {
        match stepper.try_step() {
            StepOutcome::Accepted(step) => {
                let p = (stepper.x, stepper.y);
                let c_now = section.crossing_value(p);
                if c_prev * sense < 0.0 && c_now * sense >= 0.0 {
                    let (mut t_lo, mut t_hi) = (step.t0, step.t0 + step.h);
                    while t_hi - t_lo > 1e-12 {
                        let tm = 0.5 * (t_lo + t_hi);
                        let cm = section.crossing_value(step.dense(tm));
                        if cm * sense < 0.0 {
                            t_lo = tm;
                        } else {
                            t_hi = tm;
                        }
                    }
                    let pc = step.dense(0.5 * (t_lo + t_hi));
                    let radial = section.radial_value(pc);
                    if radial > 0.0 {
                        return Ok(radial);
                    }
                }
                c_prev = c_now;
                if p.0 < opts.boundary_tol || p.1 < opts.boundary_tol {
                    return Err(DynamicsError::NoReturn(TrajectoryFlag::HitBoundary));
                }
                if p.0 > opts.escape_bound || p.1 > opts.escape_bound {
                    return Err(DynamicsError::NoReturn(TrajectoryFlag::Escaped));
                }
            }
            StepOutcome::Rejected => {}
            StepOutcome::Underflow => {
                return Err(DynamicsError::NoReturn(TrajectoryFlag::HitBoundary));
            }
        }
    }
    Err(DynamicsError::NoReturn(TrajectoryFlag::HitTimeLimit))
}

/// Stability label of a section fixed point from its multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Neutral,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Neutral => "neutral",
        }
    }
}

/// A fixed point of the return map: a limit-cycle intersection.
#[derive(Clone, Copy, Debug)]
pub struct SectionFixedPoint {
    pub s: f64,
    pub multiplier: f64,
    pub stability: Stability,
}

/// Limit-cycle detection output: refined section fixed points plus the raw
/// displacement samples that located them.
#[derive(Clone, Debug)]
pub struct CycleReport {
    pub fixed_points: Vec<SectionFixedPoint>,
    pub displacement_samples: Vec<(f64, f64)>,
}

impl CycleReport {
    /// Deterministic JSON rendering.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\"fixed_points\":[");
        for (i, fp) in self.fixed_points.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "{{\"s\":{:.14e},\"multiplier\":{:.14e},\"stability\":\"{}\"}}",
                fp.s,
                fp.multiplier,
                fp.stability.as_str()
            ));
        }
        out.push_str("],\"displacement_samples\":[");
        for (i, (s, d)) in self.displacement_samples.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("[{:.14e},{:.14e}]", s, d));
        }
        out.push_str("]}");
        out
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CycleSearchOptions {
    pub grid_n: usize,
    /// Smallest offset sampled.
    pub s_min: f64,
    /// Hard cap for the automatic outer-offset probe.
    pub s_max_cap: f64,
    /// Displacements below this are treated as numerically zero.
    pub noise_floor: f64,
    pub ret: ReturnOptions,
}

impl Default for CycleSearchOptions {
    fn default() -> Self {
        CycleSearchOptions {
            grid_n: 200,
            s_min: 1e-3,
            s_max_cap: f64::INFINITY,
            noise_floor: 1e-9,
            ret: ReturnOptions::default(),
        }
    }
}

/// Sample the displacement `d(s) = P(s) - s` on a log grid, bracket its sign
/// changes, refine each root by bisection and classify the fixed points by
/// their multipliers. Finding no crossings returns an empty list, not an
/// error.
pub fn find_limit_cycles(
    vf: &VectorField,
    section: &PoincareSection,
    opts: &CycleSearchOptions,
) -> CycleReport {
    let (s_lo, s_hi) = match section.s_range {
        Some(range) => range,
        None => {
            // Probe outward until returns stop existing (or the cap, for
            // permanent systems where every offset returns).
            let mut s = opts.s_min;
            let mut last_good = None;
            let cap = opts
                .s_max_cap
                .min(20.0 * section.base.0.max(section.base.1).max(1.0));
            while s <= cap {
                if return_map(vf, section, s, &opts.ret).is_ok() {
                    last_good = Some(s);
                } else if last_good.is_some() {
                    break;
                }
                s *= 1.5;
            }
            match last_good {
                Some(hi) => (opts.s_min, hi),
                None => {
                    return CycleReport {
                        fixed_points: Vec::new(),
                        displacement_samples: Vec::new(),
                    }
                }
            }
        }
    };
    let n = opts.grid_n.max(2);
    let ratio = (s_hi / s_lo).max(1.0 + 1e-12);
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(n);
    for i in 0..n {
        let s = s_lo * ratio.powf(i as f64 / (n - 1) as f64);
        if let Ok(p) = return_map(vf, section, s, &opts.ret) {
            samples.push((s, p - s));
        }
    }
    let displacement =
        |s: f64| -> Option<f64> { return_map(vf, section, s, &opts.ret).ok().map(|p| p - s) };
    // Bracket sign changes among samples that clear the noise floor;
    // grid points landing right on a root must not mask the bracket.
    let strong: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|(_, d)| d.abs() > opts.noise_floor)
        .collect();
    let mut fixed_points = Vec::new();
    for w in strong.windows(2) {
        let (s0, d0) = w[0];
        let (s1, d1) = w[1];
        if d0.signum() == d1.signum() {
            continue;
        }
        let (mut lo, mut hi) = (s0, s1);
        let d_lo_sign = d0.signum();
        let mut ok = true;
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            match displacement(mid) {
                Some(dm) => {
                    if dm.signum() == d_lo_sign {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let s_star = 0.5 * (lo + hi);
        // Central-difference multiplier. The step starts at the nominal
        // 1e-5 * s and grows while the displacement difference is still in
        // the integrator noise, which happens at near-degenerate cycles.
        let mut h = 1e-5 * s_star;
        let mut multiplier = f64::NAN;
        while h < 0.25 * s_star.min(hi - lo + 0.25 * s_star) {
            match (
                return_map(vf, section, s_star + h, &opts.ret),
                return_map(vf, section, s_star - h, &opts.ret),
            ) {
                (Ok(pp), Ok(pm)) => {
                    multiplier = (pp - pm) / (2.0 * h);
                    if ((pp - (s_star + h)) - (pm - (s_star - h))).abs() > 1e-9 {
                        break;
                    }
                }
                _ => break,
            }
            h *= 10.0;
        }
        let stability = if multiplier < 1.0 - 1e-4 {
            Stability::Stable
        } else if multiplier > 1.0 + 1e-4 {
            Stability::Unstable
        } else if d_lo_sign > 0.0 {
            // Multiplier too close to 1 to classify; fall back on the
            // displacement-map sign transition across the root.
            Stability::Stable
        } else {
            Stability::Unstable
        };
        fixed_points.push(SectionFixedPoint {
            s: s_star,
            multiplier,
            stability,
        });
    }
    CycleReport {
        fixed_points,
        displacement_samples: samples,
    }
}

/// Families with a staged perturbation recipe for nested limit cycles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecipeFamily {
    /// The scaled quadrangle family: two stages from `(K0, 16 + 1/K0)`.
    QuadrangleThreeCycles,
    /// The scaled chain family: three stages from `(1/4, 15/8, 4/3)`.
    ChainThreeCycles,
}

/// Concrete parameters emitted by [`perturbation_recipe`].
#[derive(Clone, Copy, Debug)]
pub enum RecipeParams {
    Quadrangle { k: f64, gamma: f64 },
    Chain { q: f64, r: f64, k: f64 },
}

/// Root of the quadrangle family's first focal value on the trace-zero
/// curve, located by bisection with the implementation's own focal values.
pub fn quadrangle_l1_root() -> f64 {
    let l1 = |k: f64| -> f64 {
        let vf = families::quadrangle_scaled_field(k, 16.0 + 1.0 / k);
        let tf = local::taylor_expand(&vf, (1.0, 1.0), 3).unwrap();
        local::focal_values(&tf, 1).unwrap().values[0]
    };
    let (mut lo, mut hi) = (0.05, 0.09);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if l1(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Apply the staged perturbations that split nested limit cycles off the
/// degenerate equilibrium. Entries of `eps` are consumed stage by stage;
/// all-zero `eps` returns the critical point itself.
pub fn perturbation_recipe(family: RecipeFamily, eps: [f64; 3]) -> RecipeParams {
    match family {
        RecipeFamily::QuadrangleThreeCycles => {
            let k0 = quadrangle_l1_root();
            // Stage 1: shrink K, staying on the trace-zero curve (L1 < 0).
            let k = k0 - eps[0];
            // Stage 2: raise gamma off the curve (trace > 0).
            let gamma = 16.0 + 1.0 / k + eps[1];
            RecipeParams::Quadrangle { k, gamma }
        }
        RecipeFamily::ChainThreeCycles => {
            let (q0, _, _) = families::CHAIN_CRITICAL;
            // Stage 1: grow q along the L1-zero and trace-zero loci (L2 > 0).
            let q = q0 + eps[0];
            // Stage 2: shrink r, keeping the trace-zero relation (L1 < 0).
            let r = families::chain_r_on_l1_locus(q) - eps[1];
            // Stage 3: grow K (trace > 0).
            let k = families::chain_k_trace_zero(q, r) + eps[2];
            RecipeParams::Chain { q, r, k }
        }
    }
}

/// Output of the homoclinic probe on the reversible chain family.
#[derive(Clone, Copy, Debug)]
pub struct HomoclinicReport {
    /// The orbit launched near the origin along the outgoing toric ray
    /// crossed the diagonal `x = y`.
    pub crossed_diagonal: bool,
    /// Minimal distance to the origin along the reflected continuation of
    /// the orbit (equal to the minimal distance along the approach leg, by
    /// the diagonal symmetry of the norm).
    pub min_distance: f64,
    /// `min_distance` fell below the probe tolerance.
    pub returned: bool,
    /// How far the numerically continued orbit strays from the mirror of the
    /// approach leg shortly after the crossing. Small values corroborate
    /// that the reflected continuation is the true orbit.
    pub mirror_shadow_error: f64,
    /// `xdot < 0` held on the whole sampled segment `x = L`, `0 < y < L`.
    pub boundedness_ok: bool,
    /// The segment abscissa used for the boundedness check.
    pub l_bound: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct ProbeOptions {
    /// Launch abscissa on the toric ray.
    pub start_x: f64,
    /// Success radius around the origin.
    pub probe_tol: f64,
    pub t_budget: f64,
    pub rtol: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            start_x: 0.03,
            probe_tol: 0.05,
            t_budget: 1e3,
            rtol: 1e-11,
        }
    }
}

/// Launch an orbit of the scaled reversible chain near the origin on the
/// outgoing toric ray `x^p y^q = (p-q)/p` and watch it cross the diagonal
/// `x = y`. Past the crossing the true orbit is the mirror of the approach
/// leg (the field satisfies `ydot(x,y) = -xdot(y,x)`, so reflection plus
/// time reversal maps orbits to orbits); the probe reports the reflected
/// continuation's closest approach to the origin, together with a direct
/// numerical shadowing error for the first stretch after the crossing. The
/// outgoing manifold is transversally attracting, so plain forward
/// integration loses the inside/outside distinction to roundoff long before
/// the corner; the reflection argument is what makes the return observable.
/// Also verifies the trapping inequality `xdot < 0` on a vertical segment
/// `x = L` just beyond `(1 - p/q)^{1/(p+q)}`.
pub fn homoclinic_probe(
    p: f64,
    q: f64,
    opts: &ProbeOptions,
) -> Result<HomoclinicReport, DynamicsError> {
    if !(p > 0.0 && q < 0.0 && p + q > 0.0) {
        return Err(DynamicsError::BadParameters(format!(
            "need p > 0, q < 0, p + q > 0; got ({p}, {q})"
        )));
    }
    let vf = families::reversible_chain_field(p, q);
    debug_assert!(crate::global::field_is_reversible(&vf));
    let l_bound = (1.0 - p / q).powf(1.0 / (p + q)) * 1.01;
    let mut boundedness_ok = true;
    for i in 1..=200 {
        let y = l_bound * i as f64 / 201.0;
        let (fx, _) = vf.evaluate(l_bound, y).unwrap();
        if fx >= 0.0 {
            boundedness_ok = false;
            break;
        }
    }
    let x0 = opts.start_x;
    let y0 = ((p - q) / (p * x0.powf(p))).powf(1.0 / q);
    let int_opts = IntegrateOptions {
        rtol: opts.rtol,
        atol: 1e-15,
        boundary_tol: 1e-13,
        record: true,
        ..Default::default()
    };
    let traj = integrate(&vf, (x0, y0), opts.t_budget, &int_opts);
    let crossing_index = traj.points.iter().position(|&(x, y)| y >= x);
    let Some(ic) = crossing_index else {
        return Ok(HomoclinicReport {
            crossed_diagonal: false,
            min_distance: f64::INFINITY,
            returned: false,
            mirror_shadow_error: f64::INFINITY,
            boundedness_ok,
            l_bound,
        });
    };
    // Closest approach of the reflected continuation = closest approach of
    // the approach leg (the Euclidean norm is symmetric in x and y).
    let min_distance = traj.points[..=ic]
        .iter()
        .map(|&(x, y)| (x * x + y * y).sqrt())
        .fold(f64::INFINITY, f64::min);
    // Shadowing check: a pre-crossing sample A mirrors to a point swap(A) on
    // the continuation. Integrate onward from A and record how closely the
    // numerical orbit passes by swap(A).
    let t_cross = traj.times[ic];
    let ia = traj
        .times
        .iter()
        .position(|&t| t >= (t_cross - 1.0).max(t_cross * 0.5))
        .unwrap_or(0);
    let a = traj.points[ia];
    let mirror = (a.1, a.0);
    let horizon = 2.2 * (t_cross - traj.times[ia]).max(0.1);
    let shadow = integrate(&vf, a, horizon, &int_opts);
    let mirror_shadow_error = shadow
        .points
        .iter()
        .map(|&(x, y)| ((x - mirror.0).powi(2) + (y - mirror.1).powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min);
    Ok(HomoclinicReport {
        crossed_diagonal: true,
        min_distance,
        returned: min_distance < opts.probe_tol,
        mirror_shadow_error,
        boundedness_ok,
        l_bound,
    })
}
