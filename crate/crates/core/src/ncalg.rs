//! The free coefficient algebra generated by `δⁿ(aᵢ)` and `δⁿ([D,aⱼ])`.
//!
//! Elements are finite linear combinations of words (ordered products of
//! generators); the algebra is free — no relations between generators are
//! imposed here. Relations only enter when a trace model evaluates words.
//!
//! [`BFamily`] wraps a truncated jet in the family variable `z` whose
//! coefficients are algebra elements; it models holomorphic coefficient
//! families `b(z)`.

use crate::jetring::Jet;
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt::{self, Display};

/// Identifier of a declared algebra generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GenId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GenKind {
    /// A plain algebra element `a`.
    Plain,
    /// The bounded commutator `[D, a]`.
    BracketD,
}

/// A single generator `δⁿ(a)` or `δⁿ([D,a])`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    pub base: GenId,
    pub kind: GenKind,
    pub delta_power: u32,
}

impl Generator {
    pub fn plain(base: GenId) -> Self {
        Generator {
            base,
            kind: GenKind::Plain,
            delta_power: 0,
        }
    }

    pub fn bracket(base: GenId) -> Self {
        Generator {
            base,
            kind: GenKind::BracketD,
            delta_power: 0,
        }
    }

    pub fn delta(&self) -> Self {
        Generator {
            delta_power: self.delta_power + 1,
            ..*self
        }
    }
}

impl Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner = match self.kind {
            GenKind::Plain => format!("g{}", self.base.0),
            GenKind::BracketD => format!("[D,g{}]", self.base.0),
        };
        if self.delta_power == 0 {
            write!(f, "{inner}")
        } else {
            write!(f, "d{}({inner})", self.delta_power)
        }
    }
}

/// An ordered product of generators; the empty word is the unit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<Generator>);

impl Word {
    pub fn unit() -> Self {
        Word(Vec::new())
    }

    pub fn single(g: Generator) -> Self {
        Word(vec![g])
    }

    pub fn from_gens(gens: Vec<Generator>) -> Self {
        Word(gens)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[Generator] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn max_delta_power(&self) -> u32 {
        self.0.iter().map(|g| g.delta_power).max().unwrap_or(0)
    }

    fn with_delta_at(&self, i: usize) -> Word {
        let mut v = self.0.clone();
        v[i] = v[i].delta();
        Word(v)
    }
}

impl Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|g| g.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

/// A finite linear combination of words with scalar coefficients.
///
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct BElement<S: Scalar> {
    terms: BTreeMap<Word, S>,
}

impl<S: Scalar> BElement<S> {
    pub fn zero() -> Self {
        BElement {
            terms: BTreeMap::new(),
        }
    }

    pub fn unit() -> Self {
        BElement::from_word(Word::unit())
    }

    pub fn from_word(w: Word) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(w, S::one());
        BElement { terms }
    }

    pub fn from_gen(g: Generator) -> Self {
        BElement::from_word(Word::single(g))
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Word, S)>) -> Self {
        let mut e = BElement::zero();
        for (w, c) in it {
            e.accumulate(w, c);
        }
        e
    }

    fn accumulate(&mut self, w: Word, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&w) {
            Some(prev) => {
                let sum = prev + c;
                if !sum.is_zero() {
                    self.terms.insert(w, sum);
                }
            }
            None => {
                self.terms.insert(w, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &S)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, w: &Word) -> S {
        self.terms.get(w).cloned().unwrap_or_else(S::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.accumulate(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        BElement {
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return BElement::zero();
        }
        BElement {
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.clone(), c.clone() * s.clone()))
                .collect(),
        }
    }

    /// Free (noncommutative) product: words concatenate.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = BElement::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                out.accumulate(w1.concat(w2), c1.clone() * c2.clone());
            }
        }
        out
    }

    /// The derivation `δ = [|D|, ·]`, extended by the Leibniz rule.
    pub fn delta(&self) -> Self {
        let mut out = BElement::zero();
        for (w, c) in &self.terms {
            for i in 0..w.len() {
                out.accumulate(w.with_delta_at(i), c.clone());
            }
        }
        out
    }

    pub fn max_word_len(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn max_delta_power(&self) -> u32 {
        self.terms.keys().map(Word::max_delta_power).max().unwrap_or(0)
    }
}

impl<S: Scalar> Display for BElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| format!("({c})*{w}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A truncated jet in the family variable `z` with [`BElement`] coefficients:
/// `b(z) = Σ_m b_m z^m`, the computational stand-in for a holomorphic family
/// of coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct BFamily<S: Scalar> {
    coeffs: Vec<BElement<S>>,
}

impl<S: Scalar> BFamily<S> {
    pub fn constant(b: BElement<S>, len: usize) -> Self {
        let mut coeffs = vec![BElement::zero(); len.max(1)];
        coeffs[0] = b;
        BFamily { coeffs }
    }

    pub fn zero(len: usize) -> Self {
        BFamily {
            coeffs: vec![BElement::zero(); len.max(1)],
        }
    }

    pub fn unit(len: usize) -> Self {
        BFamily::constant(BElement::unit(), len)
    }

    pub fn from_coeffs(coeffs: Vec<BElement<S>>) -> Self {
        assert!(!coeffs.is_empty());
        BFamily { coeffs }
    }

    /// Truncation order of the jet.
    pub fn jet_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeff(&self, m: usize) -> BElement<S> {
        self.coeffs.get(m).cloned().unwrap_or_else(BElement::zero)
    }

    pub fn coeffs(&self) -> &[BElement<S>] {
        &self.coeffs
    }

    /// Value at `z = 0`.
    pub fn at_zero(&self) -> BElement<S> {
        self.coeffs[0].clone()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(BElement::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.len().min(other.len());
        BFamily {
            coeffs: (0..len)
                .map(|i| self.coeffs[i].add(&other.coeffs[i]))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        BFamily {
            coeffs: self.coeffs.iter().map(BElement::neg).collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        BFamily {
            coeffs: self.coeffs.iter().map(|b| b.scale(s)).collect(),
        }
    }

    /// Multiply by a scalar jet in `z` (same truncation semantics as jets).
    pub fn scale_jet(&self, j: &Jet<S>) -> Self {
        let len = self.len().min(j.len());
        let mut coeffs = vec![BElement::zero(); len];
        for m in 0..len {
            for i in 0..=m {
                let c = j.coeff(i);
                if c.is_zero() {
                    continue;
                }
                coeffs[m] = coeffs[m].add(&self.coeffs[m - i].scale(&c));
            }
        }
        BFamily { coeffs }
    }

    /// Cauchy product in `z` with free products of coefficients.
    pub fn mul(&self, other: &Self) -> Self {
        let len = self.len().min(other.len());
        let mut coeffs = vec![BElement::zero(); len];
        for i in 0..len {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..len - i {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].add(&self.coeffs[i].mul(&other.coeffs[j]));
            }
        }
        BFamily { coeffs }
    }

    /// `n`-th derivative in `z`, with the factorial bookkeeping
    /// `m!/(m-n)!`; the jet truncation drops by `n`.
    pub fn derivative(&self, n: usize) -> Self {
        if n == 0 {
            return self.clone();
        }
        if n >= self.len() {
            return BFamily::zero(1);
        }
        let mut coeffs = Vec::with_capacity(self.len() - n);
        for m in n..self.len() {
            // m! / (m-n)!
            let mut fac: i64 = 1;
            for i in (m - n + 1)..=m {
                fac *= i as i64;
            }
            coeffs.push(self.coeffs[m].scale(&S::from_int(fac)));
        }
        BFamily { coeffs }
    }

    /// Apply `δ` coefficient-wise.
    pub fn delta(&self) -> Self {
        BFamily {
            coeffs: self.coeffs.iter().map(BElement::delta).collect(),
        }
    }

    pub fn max_word_len(&self) -> usize {
        self.coeffs.iter().map(BElement::max_word_len).max().unwrap_or(0)
    }

    pub fn max_delta_power(&self) -> u32 {
        self.coeffs
            .iter()
            .map(BElement::max_delta_power)
            .max()
            .unwrap_or(0)
    }

    pub fn truncate(&self, len: usize) -> Self {
        let len = len.max(1).min(self.len());
        BFamily {
            coeffs: self.coeffs[..len].to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ExactC;

    fn gen(i: u32) -> Generator {
        Generator::plain(GenId(i))
    }

    #[test]
    fn delta_kills_unit() {
        let u: BElement<ExactC> = BElement::unit();
        assert!(u.delta().is_zero());
    }

    #[test]
    fn delta_increments_power() {
        let a: BElement<ExactC> = BElement::from_gen(gen(0));
        let d = a.delta();
        assert_eq!(d.num_terms(), 1);
        let (w, c) = d.terms().next().unwrap();
        assert_eq!(w.factors()[0].delta_power, 1);
        assert_eq!(c, &ExactC::one());
    }

    #[test]
    fn delta_leibniz_two_factors() {
        let a: BElement<ExactC> = BElement::from_gen(gen(0));
        let b = BElement::from_gen(gen(1));
        let ab = a.mul(&b);
        let lhs = ab.delta();
        let rhs = a.delta().mul(&b).add(&a.mul(&b.delta()));
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.num_terms(), 2);
    }

    #[test]
    fn delta_squared_of_product() {
        // δ²(ab) = δ²(a)b + 2δ(a)δ(b) + aδ²(b)
        let a: BElement<ExactC> = BElement::from_gen(gen(0));
        let b = BElement::from_gen(gen(1));
        let lhs = a.mul(&b).delta().delta();
        let rhs = a
            .delta()
            .delta()
            .mul(&b)
            .add(&a.delta().mul(&b.delta()).scale(&ExactC::from_int(2)))
            .add(&a.mul(&b.delta().delta()));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn unit_is_neutral() {
        let x: BElement<ExactC> = BElement::from_terms([
            (Word::single(gen(0)), ExactC::from_ratio(2, 3)),
            (Word::from_gens(vec![gen(1), gen(0)]), ExactC::from_int(-1)),
        ]);
        assert_eq!(BElement::unit().mul(&x), x);
        assert_eq!(x.mul(&BElement::unit()), x);
    }

    #[test]
    fn distributivity() {
        let w1: BElement<ExactC> = BElement::from_gen(gen(0));
        let w2 = BElement::from_gen(gen(1));
        let w3 = BElement::from_gen(gen(2));
        let lhs = w1.add(&w2).mul(&w3);
        let rhs = w1.mul(&w3).add(&w2.mul(&w3));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let a: BElement<ExactC> = BElement::from_gen(gen(0));
        let diff = a.sub(&a);
        assert!(diff.is_zero());
        assert_eq!(diff.num_terms(), 0);
    }

    #[test]
    fn family_derivative_polynomial() {
        // b(z) = b0 + b1 z + b2 z^2; second derivative is the constant 2*b2
        let b0: BElement<ExactC> = BElement::from_gen(gen(0));
        let b1 = BElement::from_gen(gen(1));
        let b2 = BElement::from_gen(gen(2));
        let fam = BFamily::from_coeffs(vec![b0.clone(), b1, b2.clone()]);
        assert_eq!(fam.derivative(0), fam);
        let d2 = fam.derivative(2);
        assert_eq!(d2.at_zero(), b2.scale(&ExactC::from_int(2)));
        assert!(d2.coeff(1).is_zero());

        let constant = BFamily::constant(b0, 4);
        assert!(constant.derivative(1).is_zero());
    }

    #[test]
    fn family_delta_commutes_with_derivative() {
        let b0: BElement<ExactC> = BElement::from_gen(gen(0));
        let b1 = BElement::from_gen(gen(1)).mul(&BElement::from_gen(gen(0)));
        let fam = BFamily::from_coeffs(vec![b0, b1]);
        assert_eq!(fam.delta().derivative(1), fam.derivative(1).delta());
    }
}
