//! Measured-node response functions as canonical multivariate polynomials.
//!
//! The output of a measured node, minus its own delayed excitation, is a
//! polynomial in the delayed excitations of its ancestors. This module
//! computes that polynomial in fully expanded canonical form, which makes
//! response equality decidable by structural comparison — the oracle behind
//! every identifiability statement in this crate. It also provides a direct
//! numeric evaluator for the same function that never expands anything,
//! which is what identification oracles run on.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

use crate::graph::{GraphError, NodeId};
use crate::poly::Poly;
use crate::rat::{format_rat, rat, rat_pow, Rat};
use crate::simulate::Network;

/// Default cap on expanded term counts; dense DAGs with high-degree edges
/// blow up combinatorially and this turns runaway expansion into an error.
pub const DEFAULT_TERM_CAP: usize = 1_000_000;

/// A delayed excitation variable: the input of `node`, `delay` steps before
/// the measurement instant. Inputs reach a measured node with at least one
/// hop, so `delay >= 1`; only relative delays are stored because the model
/// is time-invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DelayedInput {
    pub node: NodeId,
    pub delay: u32,
}

impl DelayedInput {
    /// Panics on `delay == 0`: such a variable cannot occur in any response.
    pub fn new(node: NodeId, delay: u32) -> Self {
        assert!(delay >= 1, "input delays start at 1");
        DelayedInput { node, delay }
    }
}

/// Shorthand constructor.
pub fn var(node: NodeId, delay: u32) -> DelayedInput {
    DelayedInput::new(node, delay)
}

impl fmt::Display for DelayedInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}[k-{}]", self.node, self.delay)
    }
}

/// Sparse assignment of values to variables; missing variables read as zero.
pub type Assignment = BTreeMap<DelayedInput, Rat>;

/// Product of variables with positive exponents; the empty product is the
/// constant monomial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(BTreeMap<DelayedInput, u32>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial::default()
    }

    pub fn var(v: DelayedInput) -> Self {
        Monomial(BTreeMap::from([(v, 1)]))
    }

    pub fn is_constant(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&DelayedInput, &u32)> {
        self.0.iter()
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (v, e) in &other.0 {
            *out.entry(*v).or_insert(0) += e;
        }
        Monomial(out)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_constant() {
            return write!(f, "1");
        }
        let mut first = true;
        for (v, e) in &self.0 {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResponseError {
    #[error("expanded response exceeds the term cap of {cap}")]
    SizeLimitExceeded { cap: usize },
    #[error("({from},{to}) is not an edge of the network")]
    NotAnEdge { from: NodeId, to: NodeId },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Canonical multivariate polynomial over delayed inputs: a sorted term map
/// with no zero coefficients, so structural equality is polynomial equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MPoly(BTreeMap<Monomial, Rat>);

impl MPoly {
    pub fn zero() -> Self {
        MPoly::default()
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = MPoly::zero();
        p.add_term(Monomial::unit(), c);
        p
    }

    pub fn var(v: DelayedInput) -> Self {
        let mut p = MPoly::zero();
        p.add_term(Monomial::var(v), Rat::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.0.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.0.iter()
    }

    pub fn constant_term(&self) -> Rat {
        self.0
            .get(&Monomial::unit())
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    pub fn variables(&self) -> BTreeSet<DelayedInput> {
        self.0
            .keys()
            .flat_map(|m| m.factors().map(|(v, _)| *v))
            .collect()
    }

    fn add_term(&mut self, mono: Monomial, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.0.entry(mono) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().clone() + coeff;
                if sum.is_zero() {
                    e.remove();
                } else {
                    e.insert(sum);
                }
            }
        }
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> MPoly {
        MPoly(self.0.iter().map(|(m, c)| (m.clone(), -c.clone())).collect())
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Rat) -> MPoly {
        if k.is_zero() {
            return MPoly::zero();
        }
        MPoly(self.0.iter().map(|(m, c)| (m.clone(), c * k)).collect())
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        self.mul_capped(other, usize::MAX)
            .expect("uncapped multiplication cannot exceed the cap")
    }

    /// Product that fails over once the accumulating term map passes `cap`.
    pub fn mul_capped(&self, other: &MPoly, cap: usize) -> Result<MPoly, ResponseError> {
        let mut out = MPoly::zero();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &other.0 {
                out.add_term(ma.mul(mb), ca * cb);
                if out.0.len() > cap {
                    return Err(ResponseError::SizeLimitExceeded { cap });
                }
            }
        }
        Ok(out)
    }

    /// Every variable `(j, d)` becomes `(j, d + s)`; coefficients unchanged.
    /// Relabelling only, so it commutes with all arithmetic.
    pub fn delay_shift(&self, s: u32) -> MPoly {
        if s == 0 {
            return self.clone();
        }
        MPoly(
            self.0
                .iter()
                .map(|(m, c)| {
                    let shifted = Monomial(
                        m.0.iter()
                            .map(|(v, e)| (DelayedInput::new(v.node, v.delay + s), *e))
                            .collect(),
                    );
                    (shifted, c.clone())
                })
                .collect(),
        )
    }

    /// Exact value at `assignment`; unassigned variables read as zero.
    pub fn eval(&self, assignment: &Assignment) -> Rat {
        let mut total = Rat::zero();
        'terms: for (m, c) in &self.0 {
            let mut prod = c.clone();
            for (v, e) in m.factors() {
                match assignment.get(v) {
                    Some(x) if !x.is_zero() => prod *= rat_pow(x, *e),
                    _ => continue 'terms,
                }
            }
            total += prod;
        }
        total
    }

    /// Substitutes the given variables and leaves the rest symbolic.
    pub fn partial_eval(&self, assignment: &Assignment) -> MPoly {
        let mut out = MPoly::zero();
        for (m, c) in &self.0 {
            let mut coeff = c.clone();
            let mut residual = BTreeMap::new();
            for (v, e) in m.factors() {
                match assignment.get(v) {
                    Some(x) => {
                        if x.is_zero() {
                            coeff = Rat::zero();
                            break;
                        }
                        coeff *= rat_pow(x, *e);
                    }
                    None => {
                        residual.insert(*v, *e);
                    }
                }
            }
            out.add_term(Monomial(residual), coeff);
        }
        out
    }

    /// Univariate polynomial in `v` obtained by zeroing every other
    /// variable. The constant term survives; terms mixing `v` with other
    /// variables are killed.
    pub fn restrict_to_single_input(&self, v: DelayedInput) -> Poly {
        let mut coeffs: Vec<Rat> = Vec::new();
        for (m, c) in &self.0 {
            let mut exp = 0usize;
            let mut pure = true;
            for (w, e) in m.factors() {
                if *w == v {
                    exp = *e as usize;
                } else {
                    pure = false;
                    break;
                }
            }
            if !pure {
                continue;
            }
            if coeffs.len() <= exp {
                coeffs.resize(exp + 1, Rat::zero());
            }
            coeffs[exp] += c;
        }
        Poly::new(coeffs)
    }

    /// Reads the polynomial as univariate in `v`; `None` when any other
    /// variable is present.
    pub fn as_univariate(&self, v: DelayedInput) -> Option<Poly> {
        if self.variables().iter().any(|w| *w != v) {
            return None;
        }
        Some(self.restrict_to_single_input(v))
    }
}

impl fmt::Display for MPoly {
    /// Canonical rendering: terms in map order, variables as `u{n}[k-{d}]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.0 {
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_constant() {
                write!(f, "{}", format_rat(&mag))?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", format_rat(&mag))?;
            }
        }
        Ok(())
    }
}

/// `f(arg)` for univariate `f` and multivariate `arg`, expanded by Horner,
/// guarded by the term cap.
pub fn compose_with_cap(f: &Poly, arg: &MPoly, cap: usize) -> Result<MPoly, ResponseError> {
    let mut acc = MPoly::zero();
    for c in f.coeffs().iter().rev() {
        acc = acc.mul_capped(arg, cap)?;
        acc.add_term(Monomial::unit(), c.clone());
    }
    Ok(acc)
}

/// Canonical response of `target`: what measurement of that node reveals
/// about the network, as a polynomial in ancestor excitations.
///
/// Built by structural recursion in topological order: sources respond with
/// zero, and each node adds every incoming edge function applied to the
/// neighbor's delay-2 excitation plus the neighbor's own response delayed by
/// one step.
pub fn build_response(net: &Network, target: NodeId) -> Result<MPoly, ResponseError> {
    build_response_with_cap(net, target, DEFAULT_TERM_CAP)
}

/// `build_response` with an explicit term cap.
pub fn build_response_with_cap(
    net: &Network,
    target: NodeId,
    cap: usize,
) -> Result<MPoly, ResponseError> {
    let g = net.graph();
    let mut needed = g.ancestors(target)?;
    needed.insert(target);
    let mut responses: BTreeMap<NodeId, MPoly> = BTreeMap::new();
    for &v in g.topological_order() {
        if !needed.contains(&v) {
            continue;
        }
        let mut acc = MPoly::zero();
        for &j in g.in_neighbors(v)? {
            let upstream = responses
                .get(&j)
                .expect("topological order visits ancestors first")
                .delay_shift(1);
            let arg = MPoly::var(DelayedInput::new(j, 2)).add(&upstream);
            let f = net.edge_fn(j, v).expect("in-neighbor edge exists");
            acc = acc.add(&compose_with_cap(f, &arg, cap)?);
            if acc.term_count() > cap {
                return Err(ResponseError::SizeLimitExceeded { cap });
            }
        }
        responses.insert(v, acc);
        if v == target {
            break;
        }
    }
    Ok(responses
        .remove(&target)
        .expect("target response was computed"))
}

/// Exact value of the response of `target` at `assignment`, computed by
/// direct recursion with no symbolic expansion. Agrees with
/// `build_response(..).eval(..)` everywhere; this is the cheap path that
/// identification oracles use on networks whose expanded response would be
/// enormous.
pub fn eval_network_response(
    net: &Network,
    target: NodeId,
    assignment: &Assignment,
) -> Result<Rat, GraphError> {
    net.graph().in_neighbors(target)?;
    let mut memo: HashMap<(NodeId, u32), Rat> = HashMap::new();
    Ok(eval_shifted(net, target, 0, assignment, &mut memo))
}

fn eval_shifted(
    net: &Network,
    node: NodeId,
    shift: u32,
    assignment: &Assignment,
    memo: &mut HashMap<(NodeId, u32), Rat>,
) -> Rat {
    if let Some(v) = memo.get(&(node, shift)) {
        return v.clone();
    }
    let mut sum = Rat::zero();
    for &j in net.graph().in_neighbors(node).expect("node id valid") {
        let direct = assignment
            .get(&DelayedInput::new(j, 2 + shift))
            .cloned()
            .unwrap_or_else(Rat::zero);
        let upstream = eval_shifted(net, j, shift + 1, assignment, memo);
        let f = net.edge_fn(j, node).expect("edge exists");
        sum += f.eval(&(direct + upstream));
    }
    memo.insert((node, shift), sum.clone());
    sum
}

/// Exact structural equality of canonical forms — no tolerance. Two
/// networks lead to the same measurement at a node exactly when this holds
/// for their responses there.
pub fn responses_equal(a: &MPoly, b: &MPoly) -> bool {
    a == b
}

/// Checks that, with every other variable frozen at random values, the
/// response of `i` as a function of the delay-2 excitation of in-neighbor
/// `j` has the shape `alpha + f(x + beta)` for the edge function `f` and
/// some constants. This single-variable shape is what makes delay-2
/// restrictions read off incoming edges and nothing else.
pub fn verify_edge_slice_shape<R: Rng + ?Sized>(
    net: &Network,
    i: NodeId,
    j: NodeId,
    rng: &mut R,
) -> Result<bool, ResponseError> {
    let f = net
        .edge_fn(j, i)
        .ok_or(ResponseError::NotAnEdge { from: j, to: i })?;
    let response = build_response(net, i)?;
    let slice_var = DelayedInput::new(j, 2);
    for _ in 0..3 {
        let mut background = Assignment::new();
        for v in response.variables() {
            if v != slice_var {
                let num = rng.random_range(-3i64..=3);
                let den = rng.random_range(1i64..=2);
                background.insert(v, crate::rat::ratio(num, den));
            }
        }
        let h = match response.partial_eval(&background).as_univariate(slice_var) {
            Some(h) => h,
            None => return Ok(false),
        };
        let ok = match f.degree() {
            None => false,
            Some(0) => h.degree().map_or(true, |d| d == 0),
            Some(1) => h.degree() == Some(1) && h.coeff(1) == f.coeff(1),
            Some(d) => {
                h.degree() == Some(d) && h.coeff(d) == f.coeff(d) && {
                    let beta = (h.coeff(d - 1) - f.coeff(d - 1)) / (rat(d as i64) * f.coeff(d));
                    let alpha = h.sub(&f.shift_argument(&beta));
                    alpha.degree().map_or(true, |dd| dd == 0)
                }
            }
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::poly::Poly;
    use crate::rat::ratio;

    /// Fork: 0->1 (square), 1->2 (identity), 0->2 (identity).
    fn fork_net() -> Network {
        let g = Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        Network::new(
            g,
            [
                ((0, 1), Poly::from_i64(&[0, 0, 1])),
                ((1, 2), Poly::x()),
                ((0, 2), Poly::x()),
            ]
            .into(),
        )
        .unwrap()
    }

    fn mono(factors: &[(NodeId, u32, u32)]) -> Monomial {
        let mut m = Monomial::unit();
        for &(n, d, e) in factors {
            for _ in 0..e {
                m = m.mul(&Monomial::var(var(n, d)));
            }
        }
        m
    }

    #[test]
    fn fork_response_expands_by_hand() {
        // F_2 = u1[k-2] + u0[k-3]^2 + u0[k-2]
        let f = build_response(&fork_net(), 2).unwrap();
        let mut expected = MPoly::var(var(1, 2));
        expected = expected.add(&MPoly::var(var(0, 2)));
        let mut sq = MPoly::zero();
        sq.add_term(mono(&[(0, 3, 2)]), rat(1));
        expected = expected.add(&sq);
        assert_eq!(f, expected);
    }

    #[test]
    fn source_response_is_zero() {
        let f = build_response(&fork_net(), 0).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn identity_path_response() {
        let g = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let net = Network::new(g, [((0, 1), Poly::x()), ((1, 2), Poly::x())].into()).unwrap();
        let f = build_response(&net, 2).unwrap();
        let expected = MPoly::var(var(1, 2)).add(&MPoly::var(var(0, 3)));
        assert_eq!(f, expected);
    }

    #[test]
    fn eval_response_examples() {
        let f = build_response(&fork_net(), 2).unwrap();
        let asgn = Assignment::from([(var(0, 3), rat(2))]);
        assert_eq!(f.eval(&asgn), rat(4));
        assert_eq!(f.eval(&Assignment::new()), rat(0));
        assert_eq!(MPoly::zero().eval(&asgn), rat(0));
    }

    #[test]
    fn restriction_reads_off_edges_only_at_delay_two() {
        let f = build_response(&fork_net(), 2).unwrap();
        assert_eq!(f.restrict_to_single_input(var(0, 2)), Poly::x());
        assert_eq!(f.restrict_to_single_input(var(1, 2)), Poly::x());
        // delay 3 exposes the two-hop composition, not an edge
        assert_eq!(
            f.restrict_to_single_input(var(0, 3)),
            Poly::from_i64(&[0, 0, 1])
        );
    }

    #[test]
    fn delay_shift_relabels() {
        let f = build_response(&fork_net(), 2).unwrap();
        let shifted = f.delay_shift(2);
        let expected: BTreeSet<_> = [var(1, 4), var(0, 4), var(0, 5)].into();
        assert_eq!(shifted.variables(), expected);
        assert_eq!(shifted.delay_shift(0), shifted);
    }

    #[test]
    fn variables_stay_within_ancestor_window() {
        let net = fork_net();
        let f = build_response(&net, 2).unwrap();
        let anc = net.graph().ancestors(2).unwrap();
        let max_delay = net.graph().max_depth_to(2).unwrap() as u32 + 1;
        for v in f.variables() {
            assert!(anc.contains(&v.node));
            assert!(v.delay >= 2 && v.delay <= max_delay);
        }
    }

    #[test]
    fn numeric_and_symbolic_evaluation_agree() {
        let net = fork_net();
        let f = build_response(&net, 2).unwrap();
        let assignments = [
            Assignment::new(),
            Assignment::from([(var(0, 2), rat(3)), (var(1, 2), ratio(1, 2))]),
            Assignment::from([(var(0, 3), rat(-2)), (var(1, 2), rat(1))]),
            Assignment::from([(var(0, 2), rat(1)), (var(0, 3), rat(2)), (var(1, 2), rat(3))]),
        ];
        for asgn in &assignments {
            assert_eq!(
                eval_network_response(&net, 2, asgn).unwrap(),
                f.eval(asgn),
                "mismatch at {asgn:?}"
            );
        }
    }

    #[test]
    fn term_cap_fires() {
        // chain of squarings doubles degree each hop; a tiny cap trips
        let g = Graph::new(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let sq = Poly::from_i64(&[0, 1, 1]);
        let net = Network::new(
            g,
            [((0, 1), sq.clone()), ((1, 2), sq.clone()), ((2, 3), sq)].into(),
        )
        .unwrap();
        match build_response_with_cap(&net, 3, 5) {
            Err(ResponseError::SizeLimitExceeded { cap: 5 }) => {}
            other => panic!("expected size limit, got {other:?}"),
        }
    }

    #[test]
    fn pretty_printer_golden() {
        let f = build_response(&fork_net(), 2).unwrap();
        assert_eq!(f.to_string(), "u0[k-2] + u0[k-3]^2 + u1[k-2]");
        assert_eq!(MPoly::zero().to_string(), "0");
        let p = MPoly::constant(ratio(-3, 2)).add(&MPoly::var(var(2, 4)).scale(&rat(2)));
        assert_eq!(p.to_string(), "-3/2 + 2*u2[k-4]");
    }

    #[test]
    fn slice_shape_holds_on_the_fork() {
        let net = fork_net();
        let mut rng = rand::rng();
        assert!(verify_edge_slice_shape(&net, 2, 1, &mut rng).unwrap());
        assert!(verify_edge_slice_shape(&net, 2, 0, &mut rng).unwrap());
        assert!(verify_edge_slice_shape(&net, 1, 0, &mut rng).unwrap());
        assert!(matches!(
            verify_edge_slice_shape(&net, 1, 2, &mut rng),
            Err(ResponseError::NotAnEdge { from: 2, to: 1 })
        ));
    }

    #[test]
    fn fz_networks_have_no_constant_term() {
        let f = build_response(&fork_net(), 2).unwrap();
        assert!(f.constant_term().is_zero());
    }
}
