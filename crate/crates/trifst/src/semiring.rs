//! Weight algebras for transducers.
//!
//! A semiring `(K, ⊕, ⊗, 0̄, 1̄)` supplies the two operations path algebra
//! needs: `⊗` accumulates weights along a path, `⊕` combines alternative
//! paths. Every instance shipped here is commutative, which composition
//! requires.
//!
//! Three instances are provided: [`TropicalWeight`] (min, +) for
//! shortest-distance style costs, [`ProbabilityWeight`] (+, ×) for path
//! probabilities and counting, and [`LogWeight`], the negated-log form of
//! the probability semiring whose `⊕` is a stable log-sum-exp. The log
//! instance exists because probability products underflow on long paths.

use std::fmt;

/// Runtime description of a semiring instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiringDescriptor<W> {
    pub name: &'static str,
    pub zero: W,
    pub one: W,
    pub is_idempotent: bool,
    pub is_commutative: bool,
}

/// A commutative semiring element.
///
/// Laws expected of implementations (exercised by the axiom tests):
/// `⊕` associative and commutative with identity `zero`; `⊗` associative
/// and commutative with identity `one`; `⊗` distributes over `⊕`; `zero`
/// annihilates `⊗`. Idempotent instances additionally satisfy
/// `a ⊕ a = a` exactly.
pub trait Semiring:
    Copy + Clone + fmt::Debug + fmt::Display + PartialEq + Send + Sync + 'static
{
    const NAME: &'static str;
    const IS_IDEMPOTENT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn plus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;

    /// Numeric form used by the text format.
    fn value(&self) -> f64;
    /// Inverse of [`Semiring::value`]; panics on values outside the carrier.
    fn from_value(v: f64) -> Self;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    /// Approximate equality: `|a − b| ≤ tol`, with equal infinities equal
    /// regardless of `tol`.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let (a, b) = (self.value(), other.value());
        if a == b {
            return true;
        }
        (a - b).abs() <= tol
    }

    fn descriptor() -> SemiringDescriptor<Self> {
        SemiringDescriptor {
            name: Self::NAME,
            zero: Self::zero(),
            one: Self::one(),
            is_idempotent: Self::IS_IDEMPOTENT,
            is_commutative: true,
        }
    }
}

/// Tropical semiring `(ℝ₊ ∪ {∞}, min, +, ∞, 0)`.
///
/// Values are restricted to non-negative costs plus `∞`, which keeps
/// Dijkstra-style shortest distance applicable.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TropicalWeight(f64);

impl TropicalWeight {
    /// Wraps a non-negative cost. Panics on negative or NaN input.
    pub fn new(cost: f64) -> Self {
        assert!(cost >= 0.0, "tropical weight must be non-negative, got {cost}");
        TropicalWeight(cost)
    }

    pub fn cost(&self) -> f64 {
        self.0
    }
}

impl Semiring for TropicalWeight {
    const NAME: &'static str = "tropical";
    const IS_IDEMPOTENT: bool = true;

    fn zero() -> Self {
        TropicalWeight(f64::INFINITY)
    }

    fn one() -> Self {
        TropicalWeight(0.0)
    }

    fn plus(&self, rhs: &Self) -> Self {
        TropicalWeight(self.0.min(rhs.0))
    }

    fn times(&self, rhs: &Self) -> Self {
        TropicalWeight(self.0 + rhs.0)
    }

    fn value(&self) -> f64 {
        self.0
    }

    fn from_value(v: f64) -> Self {
        TropicalWeight::new(v)
    }
}

impl fmt::Display for TropicalWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Probability semiring `(ℝ, +, ×, 0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProbabilityWeight(f64);

impl ProbabilityWeight {
    pub fn new(p: f64) -> Self {
        ProbabilityWeight(p)
    }

    pub fn probability(&self) -> f64 {
        self.0
    }
}

impl Semiring for ProbabilityWeight {
    const NAME: &'static str = "probability";
    const IS_IDEMPOTENT: bool = false;

    fn zero() -> Self {
        ProbabilityWeight(0.0)
    }

    fn one() -> Self {
        ProbabilityWeight(1.0)
    }

    fn plus(&self, rhs: &Self) -> Self {
        ProbabilityWeight(self.0 + rhs.0)
    }

    fn times(&self, rhs: &Self) -> Self {
        ProbabilityWeight(self.0 * rhs.0)
    }

    fn value(&self) -> f64 {
        self.0
    }

    fn from_value(v: f64) -> Self {
        ProbabilityWeight(v)
    }
}

impl fmt::Display for ProbabilityWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Log semiring: probabilities stored as `-ln p`, so `⊗` is addition and
/// `⊕` is `-ln(e^-a + e^-b)` computed in the stable log-sum-exp form.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LogWeight(f64);

impl LogWeight {
    pub fn new(neg_log: f64) -> Self {
        LogWeight(neg_log)
    }

    pub fn neg_log(&self) -> f64 {
        self.0
    }

    pub fn from_probability(p: f64) -> Self {
        LogWeight(-p.ln())
    }
}

impl Semiring for LogWeight {
    const NAME: &'static str = "log";
    const IS_IDEMPOTENT: bool = false;

    fn zero() -> Self {
        LogWeight(f64::INFINITY)
    }

    fn one() -> Self {
        LogWeight(0.0)
    }

    fn plus(&self, rhs: &Self) -> Self {
        let (lo, hi) = if self.0 <= rhs.0 {
            (self.0, rhs.0)
        } else {
            (rhs.0, self.0)
        };
        if lo.is_infinite() {
            return LogWeight(lo);
        }
        if hi.is_infinite() {
            return LogWeight(lo);
        }
        LogWeight(lo - (-(hi - lo)).exp().ln_1p())
    }

    fn times(&self, rhs: &Self) -> Self {
        LogWeight(self.0 + rhs.0)
    }

    fn value(&self) -> f64 {
        self.0
    }

    fn from_value(v: f64) -> Self {
        LogWeight(v)
    }
}

impl fmt::Display for LogWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-9;

    #[test]
    fn tropical_ops() {
        let a = TropicalWeight::new(3.0);
        let b = TropicalWeight::new(1.5);
        assert_eq!(a.plus(&b), TropicalWeight::new(1.5));
        assert_eq!(a.times(&b), TropicalWeight::new(4.5));
        assert_eq!(a.plus(&TropicalWeight::zero()), a);
    }

    #[test]
    fn probability_ops() {
        let a = ProbabilityWeight::new(0.25);
        let b = ProbabilityWeight::new(0.5);
        assert_eq!(a.plus(&b), ProbabilityWeight::new(0.75));
        assert_eq!(a.times(&b), ProbabilityWeight::new(0.125));
        assert_eq!(a.times(&ProbabilityWeight::zero()), ProbabilityWeight::zero());
    }

    #[test]
    fn approx_equal_cases() {
        assert!(ProbabilityWeight::new(0.0416).approx_eq(&ProbabilityWeight::new(0.0416000001), 1e-6));
        assert!(TropicalWeight::zero().approx_eq(&TropicalWeight::zero(), 0.0));
        assert!(!ProbabilityWeight::new(1.0).approx_eq(&ProbabilityWeight::new(1.1), 1e-6));
    }

    #[test]
    fn log_matches_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p: f64 = rng.gen_range(1e-6..1.0);
            let q: f64 = rng.gen_range(1e-6..1.0);
            let lp = LogWeight::from_probability(p);
            let lq = LogWeight::from_probability(q);
            let sum = (-lp.plus(&lq).neg_log()).exp();
            let prod = (-lp.times(&lq).neg_log()).exp();
            assert!((sum - (p + q)).abs() < 1e-9, "plus mismatch");
            assert!((prod - p * q).abs() < 1e-9, "times mismatch");
        }
    }

    #[test]
    fn log_zero_is_identity() {
        let a = LogWeight::from_probability(0.3);
        assert_eq!(a.plus(&LogWeight::zero()), a);
        assert_eq!(LogWeight::zero().plus(&a), a);
        assert_eq!(a.times(&LogWeight::zero()), LogWeight::zero());
    }

    fn axiom_suite<W: Semiring>(sample: impl Fn(&mut ChaCha8Rng) -> W) {
        let mut rng = ChaCha8Rng::seed_from_u64(0xA1);
        for _ in 0..1000 {
            let a = sample(&mut rng);
            let b = sample(&mut rng);
            let c = sample(&mut rng);
            // Associativity.
            assert!(a.plus(&b).plus(&c).approx_eq(&a.plus(&b.plus(&c)), TOL));
            assert!(a.times(&b).times(&c).approx_eq(&a.times(&b.times(&c)), TOL));
            // Commutativity.
            assert!(a.plus(&b).approx_eq(&b.plus(&a), TOL));
            assert!(a.times(&b).approx_eq(&b.times(&a), TOL));
            // Distributivity.
            assert!(a
                .times(&b.plus(&c))
                .approx_eq(&a.times(&b).plus(&a.times(&c)), TOL));
            // Identities and annihilator.
            assert!(a.plus(&W::zero()).approx_eq(&a, 0.0));
            assert!(a.times(&W::one()).approx_eq(&a, 0.0));
            assert!(a.times(&W::zero()).approx_eq(&W::zero(), 0.0));
            if W::IS_IDEMPOTENT {
                assert_eq!(a.plus(&a), a);
            }
        }
    }

    #[test]
    fn axioms_tropical() {
        axiom_suite::<TropicalWeight>(|rng| TropicalWeight::new(rng.gen_range(0.0..10.0)));
    }

    #[test]
    fn axioms_probability() {
        axiom_suite::<ProbabilityWeight>(|rng| ProbabilityWeight::new(rng.gen_range(-2.0..2.0)));
    }

    #[test]
    fn axioms_log() {
        axiom_suite::<LogWeight>(|rng| LogWeight::new(rng.gen_range(0.0..8.0)));
    }

    #[test]
    fn descriptors() {
        let d = TropicalWeight::descriptor();
        assert_eq!(d.name, "tropical");
        assert!(d.is_idempotent);
        assert!(d.is_commutative);
        assert_eq!(d.zero, TropicalWeight::zero());
        assert_eq!(d.one, TropicalWeight::one());
        assert!(!ProbabilityWeight::descriptor().is_idempotent);
    }
}
