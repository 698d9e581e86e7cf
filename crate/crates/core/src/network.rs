//! Planar reaction networks: complexes, reactions and structural invariants.
//!
//! A network is a directed graph whose vertices are points of the plane with
//! exact rational coordinates. Rate constants are positive reals. The
//! reaction vectors are required to span the plane, which makes the
//! deficiency formula `m - l - 2` applicable.

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::field::{Term, VectorField};

/// A complex `aX + bY`, stored as the exact rational point `(a, b)`.
///
/// Equality is exact rational equality of both coordinates; no floating
/// comparison is ever involved.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Complex {
    pub a: Rational64,
    pub b: Rational64,
}

impl Complex {
    pub fn new(a: Rational64, b: Rational64) -> Self {
        Complex { a, b }
    }

    /// Convenience constructor from integer stoichiometries.
    pub fn from_ints(a: i64, b: i64) -> Self {
        Complex {
            a: Rational64::from_integer(a),
            b: Rational64::from_integer(b),
        }
    }
}

impl std::fmt::Display for Complex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// A single reaction `source -> target` with rate constant `kappa`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reaction {
    pub source: Complex,
    pub target: Complex,
    pub kappa: f64,
}

impl Reaction {
    /// Reaction vector `target - source`, exact.
    pub fn vector(&self) -> (Rational64, Rational64) {
        (self.target.a - self.source.a, self.target.b - self.source.b)
    }
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("self-loop reaction at {0}")]
    SelfLoop(Complex),
    #[error("rate constant must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("reaction vectors do not span the plane")]
    SpanFailure,
    #[error("network needs at least one reaction")]
    Empty,
    #[error("{given} rate constants supplied for {expected} reactions")]
    RateCountMismatch { given: usize, expected: usize },
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: NetworkError,
    },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Structural reversibility data: `weakly_reversible`, the number of linkage
/// classes `l` and the number of absorbing strong components `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReversibilityClass {
    pub weakly_reversible: bool,
    pub linkage_classes: usize,
    pub terminal_components: usize,
}

/// A validated planar reaction network.
///
/// Immutable after construction; complexes are deduplicated by exact rational
/// equality and the span condition on the reaction vectors is checked with
/// exact cross products.
#[derive(Clone, Debug)]
pub struct ReactionNetwork {
    complexes: Vec<Complex>,
    reactions: Vec<Reaction>,
}

impl ReactionNetwork {
    pub fn new(reactions: Vec<Reaction>) -> Result<Self, NetworkError> {
        if reactions.is_empty() {
            return Err(NetworkError::Empty);
        }
        for r in &reactions {
            if r.source == r.target {
                return Err(NetworkError::SelfLoop(r.source));
            }
            if r.kappa <= 0.0 || r.kappa.is_nan() {
                return Err(NetworkError::NonPositiveRate(r.kappa));
            }
        }
        // Exact span check: some pair of reaction vectors has nonzero cross product.
        let spans = reactions.iter().enumerate().any(|(i, ri)| {
            let (ax, ay) = ri.vector();
            reactions[i + 1..].iter().any(|rj| {
                let (bx, by) = rj.vector();
                !(ax * by - ay * bx).is_zero()
            })
        });
        if !spans {
            return Err(NetworkError::SpanFailure);
        }
        let mut complexes: Vec<Complex> = Vec::new();
        for r in &reactions {
            for c in [r.source, r.target] {
                if !complexes.contains(&c) {
                    complexes.push(c);
                }
            }
        }
        complexes.sort();
        Ok(ReactionNetwork {
            complexes,
            reactions,
        })
    }

    pub fn complexes(&self) -> &[Complex] {
        &self.complexes
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    /// Number of complexes `m`.
    pub fn num_complexes(&self) -> usize {
        self.complexes.len()
    }

    /// Replace rate constants positionally. Entries beyond the reaction count
    /// are an error; fewer entries override only a prefix.
    pub fn with_rate_constants(&self, kappas: &[f64]) -> Result<Self, NetworkError> {
        if kappas.len() > self.reactions.len() {
            return Err(NetworkError::RateCountMismatch {
                given: kappas.len(),
                expected: self.reactions.len(),
            });
        }
        let mut reactions = self.reactions.clone();
        for (r, &k) in reactions.iter_mut().zip(kappas) {
            if k <= 0.0 || k.is_nan() {
                return Err(NetworkError::NonPositiveRate(k));
            }
            r.kappa = k;
        }
        ReactionNetwork::new(reactions)
    }

    fn complex_index(&self, c: &Complex) -> usize {
        self.complexes.iter().position(|x| x == c).unwrap()
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.complexes.len()];
        for r in &self.reactions {
            adj[self.complex_index(&r.source)].push(self.complex_index(&r.target));
        }
        adj
    }

    /// Number of linkage classes `l` (weakly connected components of the
    /// reaction graph, direction ignored).
    pub fn linkage_classes(&self) -> usize {
        let n = self.complexes.len();
        let mut undirected = vec![Vec::new(); n];
        for r in &self.reactions {
            let (i, j) = (self.complex_index(&r.source), self.complex_index(&r.target));
            undirected[i].push(j);
            undirected[j].push(i);
        }
        let mut seen = vec![false; n];
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(v) = stack.pop() {
                for &u in &undirected[v] {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
        }
        count
    }

    /// Deficiency `m - l - 2`.
    pub fn deficiency(&self) -> i64 {
        self.complexes.len() as i64 - self.linkage_classes() as i64 - 2
    }

    /// Strong components via Kosaraju; returns a component id per complex.
    fn strong_components(&self) -> (usize, Vec<usize>) {
        let n = self.complexes.len();
        let adj = self.adjacency();
        let mut radj = vec![Vec::new(); n];
        for (v, outs) in adj.iter().enumerate() {
            for &u in outs {
                radj[u].push(v);
            }
        }
        // First pass: finish order on the forward graph, iteratively.
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            seen[start] = true;
            while let Some(&mut (v, ref mut idx)) = stack.last_mut() {
                if *idx < adj[v].len() {
                    let u = adj[v][*idx];
                    *idx += 1;
                    if !seen[u] {
                        seen[u] = true;
                        stack.push((u, 0));
                    }
                } else {
                    order.push(v);
                    stack.pop();
                }
            }
        }
        // Second pass: mark components on the reversed graph.
        let mut comp = vec![usize::MAX; n];
        let mut ncomp = 0;
        for &start in order.iter().rev() {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = ncomp;
            while let Some(v) = stack.pop() {
                for &u in &radj[v] {
                    if comp[u] == usize::MAX {
                        comp[u] = ncomp;
                        stack.push(u);
                    }
                }
            }
            ncomp += 1;
        }
        (ncomp, comp)
    }

    /// Weak reversibility, linkage classes and absorbing strong components.
    ///
    /// The network is weakly reversible iff every edge stays inside a strong
    /// component; a strong component is absorbing iff no edge leaves it.
    pub fn reversibility_class(&self) -> ReversibilityClass {
        let (ncomp, comp) = self.strong_components();
        let mut leaves = vec![false; ncomp];
        let mut weakly_reversible = true;
        for r in &self.reactions {
            let ci = comp[self.complex_index(&r.source)];
            let cj = comp[self.complex_index(&r.target)];
            if ci != cj {
                weakly_reversible = false;
                leaves[ci] = true;
            }
        }
        let terminal_components = leaves.iter().filter(|&&x| !x).count();
        ReversibilityClass {
            weakly_reversible,
            linkage_classes: self.linkage_classes(),
            terminal_components,
        }
    }

    /// Mass-action vector field: for each reaction, the term
    /// `(target - source) * kappa * x^a * y^b` with `(a, b)` the source.
    /// Like monomials are merged and zero coefficients dropped.
    pub fn vector_field(&self) -> VectorField {
        let mut x_terms = Vec::new();
        let mut y_terms = Vec::new();
        for r in &self.reactions {
            let (da, db) = r.vector();
            let coeff_x = rational_to_f64(da) * r.kappa;
            let coeff_y = rational_to_f64(db) * r.kappa;
            x_terms.push(Term::new(coeff_x, r.source.a, r.source.b));
            y_terms.push(Term::new(coeff_y, r.source.a, r.source.b));
        }
        VectorField::new(x_terms, y_terms)
    }

    /// Shift every complex by `(alpha, beta)`. The structural invariants are
    /// unchanged; the vector field picks up the factor `x^alpha y^beta`.
    pub fn translate(&self, alpha: Rational64, beta: Rational64) -> ReactionNetwork {
        let reactions = self
            .reactions
            .iter()
            .map(|r| Reaction {
                source: Complex::new(r.source.a + alpha, r.source.b + beta),
                target: Complex::new(r.target.a + alpha, r.target.b + beta),
                kappa: r.kappa,
            })
            .collect();
        ReactionNetwork::new(reactions).expect("translation preserves validity")
    }
}

pub fn rational_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Parse a rational number written as an integer, a decimal, or `n/d`.
pub fn parse_rational(s: &str) -> Option<Rational64> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Rational64::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || frac_part.chars().any(|c| !c.is_ascii_digit()) {
            return None;
        }
        let negative = int_part.starts_with('-');
        let int_abs: i64 = match int_part {
            "" | "-" => 0,
            _ => int_part.trim_start_matches('-').parse().ok()?,
        };
        let denom = 10i64.checked_pow(frac_part.len() as u32)?;
        let frac: i64 = frac_part.parse().ok()?;
        let total = int_abs.checked_mul(denom)?.checked_add(frac)?;
        let signed = if negative { -total } else { total };
        return Some(Rational64::new(signed, denom));
    }
    s.parse::<i64>().ok().map(Rational64::from_integer)
}

/// Parse the network file format: one reaction per line,
/// `<a> <b> -> <a'> <b'> @ <kappa>`, `#` comments, blank lines ignored.
pub fn parse_network(text: &str) -> Result<ReactionNetwork, ParseError> {
    let mut reactions = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.split_once('#') {
            Some((head, _)) => head,
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        last_line = line_no;
        let syntax = |msg: &str| ParseError::Syntax {
            line: line_no,
            msg: msg.to_string(),
        };
        let (lhs, rest) = line
            .split_once("->")
            .ok_or_else(|| syntax("expected `->`"))?;
        let (rhs, rate) = rest
            .split_once('@')
            .ok_or_else(|| syntax("expected `@ <kappa>`"))?;
        let src: Vec<&str> = lhs.split_whitespace().collect();
        let dst: Vec<&str> = rhs.split_whitespace().collect();
        if src.len() != 2 || dst.len() != 2 {
            return Err(syntax("each side needs exactly two coordinates"));
        }
        // Downstream signed-area arithmetic is exact in i64; keep reduced
        // coordinates within a range whose products and cross sums fit.
        let coord = |s: &str| {
            let r = parse_rational(s).ok_or_else(|| syntax("bad coordinate"))?;
            if r.numer().unsigned_abs() > 1_000_000 || *r.denom() > 1_000_000 {
                return Err(syntax("coordinate exceeds the supported precision (1e6)"));
            }
            Ok(r)
        };
        let source = Complex::new(coord(src[0])?, coord(src[1])?);
        let target = Complex::new(coord(dst[0])?, coord(dst[1])?);
        let kappa_rat = parse_rational(rate.trim()).ok_or_else(|| syntax("bad rate constant"))?;
        if !kappa_rat.is_positive() {
            return Err(ParseError::Invalid {
                line: line_no,
                source: NetworkError::NonPositiveRate(rational_to_f64(kappa_rat)),
            });
        }
        let reaction = Reaction {
            source,
            target,
            kappa: rational_to_f64(kappa_rat),
        };
        if source == target {
            return Err(ParseError::Invalid {
                line: line_no,
                source: NetworkError::SelfLoop(source),
            });
        }
        reactions.push(reaction);
    }
    ReactionNetwork::new(reactions).map_err(|e| match e {
        NetworkError::Empty => ParseError::Syntax {
            line: last_line,
            msg: "no reactions found".to_string(),
        },
        other => ParseError::Network(other),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    pub(crate) const QUADRANGLE_CYCLE: &str =
        "0 1 -> 1 0 @ 1\n1 0 -> 1 2 @ 1\n1 2 -> 0 3 @ 1\n0 3 -> 0 1 @ 1";

    #[test]
    fn parses_quadrangle() {
        let net = parse_network(QUADRANGLE_CYCLE).unwrap();
        assert_eq!(net.num_complexes(), 4);
        assert_eq!(net.reactions().len(), 4);
        assert_eq!(net.deficiency(), 1);
    }

    #[test]
    fn rejects_self_loop() {
        let err = parse_network("0 0 -> 0 0 @ 1").unwrap_err();
        assert!(matches!(
            err,
            ParseError::Invalid {
                source: NetworkError::SelfLoop(_),
                ..
            }
        ));
    }

    #[test]
    fn rejects_non_spanning() {
        let err = parse_network("0 0 -> 1 0 @ 1\n1 0 -> 2 0 @ 2").unwrap_err();
        assert!(matches!(
            err,
            ParseError::Network(NetworkError::SpanFailure)
        ));
    }

    #[test]
    fn rejects_bad_rate() {
        let err = parse_network("0 0 -> 1 1 @ 0").unwrap_err();
        assert!(matches!(
            err,
            ParseError::Invalid {
                source: NetworkError::NonPositiveRate(_),
                ..
            }
        ));
        assert!(parse_network("0 0 -> 1 1 @ -2").is_err());
    }

    #[test]
    fn rejects_oversized_coordinates() {
        assert!(parse_network("0 1/10000000 -> 1 0 @ 1\n1 0 -> 0 0 @ 1").is_err());
        assert!(parse_network("0 28463/10000 -> 1 0 @ 1\n1 0 -> 0 0 @ 1").is_ok());
    }

    #[test]
    fn syntax_error_carries_line_number() {
        let err = parse_network("0 1 -> 1 0 @ 1\n1 0 -> oops").unwrap_err();
        match err {
            ParseError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn parses_rationals_and_decimals() {
        assert_eq!(parse_rational("3/2"), Some(rat(3, 2)));
        assert_eq!(parse_rational("-1/2"), Some(rat(-1, 2)));
        assert_eq!(parse_rational("1.5"), Some(rat(3, 2)));
        assert_eq!(parse_rational("-0.25"), Some(rat(-1, 4)));
        assert_eq!(parse_rational("7"), Some(rat(7, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn deficiency_examples() {
        // Shared-zero network {0 -> X, Y -> 0}: three complexes, one linkage class.
        let net = parse_network("0 0 -> 1 0 @ 1\n0 1 -> 0 0 @ 1").unwrap();
        assert_eq!(net.num_complexes(), 3);
        assert_eq!(net.linkage_classes(), 1);
        assert_eq!(net.deficiency(), 0);

        // Three separate reactions, six complexes, three components.
        let net = parse_network("0 0 -> 0 -1 @ 1\n2 1 -> 1 3 @ 1\n1 2 -> -1 3 @ 1").unwrap();
        assert_eq!(net.num_complexes(), 6);
        assert_eq!(net.linkage_classes(), 3);
        assert_eq!(net.deficiency(), 1);
    }

    #[test]
    fn reversibility_quadrangle() {
        let net = parse_network(QUADRANGLE_CYCLE).unwrap();
        let rc = net.reversibility_class();
        assert!(rc.weakly_reversible);
        assert_eq!(rc.linkage_classes, 1);
        assert_eq!(rc.terminal_components, 1);
    }

    #[test]
    fn reversibility_chain() {
        // A chain of three reactions: terminal complex has no out-edge.
        let net = parse_network("0 0 -> 0 -1 @ 1\n0 -1 -> 1 1/2 @ 1\n1 1/2 -> 0 19/8 @ 1").unwrap();
        let rc = net.reversibility_class();
        assert!(!rc.weakly_reversible);
        assert_eq!(rc.linkage_classes, 1);
        assert_eq!(rc.terminal_components, 1);
    }

    #[test]
    fn reversibility_zigzag() {
        let net = crate::families::zigzag_network(1.0);
        let rc = net.reversibility_class();
        assert!(!rc.weakly_reversible);
        assert_eq!(rc.linkage_classes, 1);
        assert_eq!(rc.terminal_components, 1);
        assert_eq!(net.deficiency(), 1);
    }

    #[test]
    fn randomized_structural_invariants() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(31);
        let mut tested = 0;
        while tested < 300 {
            let coord = |rng: &mut StdRng| rat(rng.gen_range(-3..=3), rng.gen_range(1..=2));
            let n_reactions = rng.gen_range(1..=5);
            let reactions: Vec<Reaction> = (0..n_reactions)
                .map(|_| Reaction {
                    source: Complex::new(coord(&mut rng), coord(&mut rng)),
                    target: Complex::new(coord(&mut rng), coord(&mut rng)),
                    kappa: rng.gen_range(0.1..10.0),
                })
                .collect();
            let Ok(net) = ReactionNetwork::new(reactions) else {
                continue;
            };
            tested += 1;
            // Deficiency is nonnegative and translation-invariant.
            assert!(net.deficiency() >= 0, "{net:?}");
            let shifted = net.translate(coord(&mut rng), coord(&mut rng));
            assert_eq!(net.deficiency(), shifted.deficiency());
            // Every linkage class contains at least one absorbing strong
            // component, so t >= l; weak reversibility forces equality.
            let rc = net.reversibility_class();
            assert!(rc.terminal_components >= rc.linkage_classes);
            if rc.weakly_reversible {
                assert_eq!(rc.terminal_components, rc.linkage_classes);
            }
            // Translated field equals the original times x^alpha y^beta.
            let (alpha, beta) = (coord(&mut rng), coord(&mut rng));
            let shifted = net.translate(alpha, beta);
            let (x, y) = (rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0));
            let (f0, g0) = net.vector_field().evaluate(x, y).unwrap();
            let (f1, g1) = shifted.vector_field().evaluate(x, y).unwrap();
            let m = crate::field::pow_rat(x, alpha) * crate::field::pow_rat(y, beta);
            let scale = f0.abs().max(g0.abs()).max(1.0);
            assert!((f1 - m * f0).abs() <= 1e-12 * scale * m.max(1.0));
            assert!((g1 - m * g0).abs() <= 1e-12 * scale * m.max(1.0));
        }
    }

    #[test]
    fn translation_preserves_structure() {
        let net = parse_network(QUADRANGLE_CYCLE).unwrap();
        let shifted = net.translate(rat(1, 1), rat(0, 1));
        assert_eq!(shifted.deficiency(), 1);
        assert_eq!(shifted.reversibility_class(), net.reversibility_class());
        // Identity shift gives the same complexes back.
        let same = net.translate(rat(0, 1), rat(0, 1));
        assert_eq!(same.complexes(), net.complexes());
    }
}
