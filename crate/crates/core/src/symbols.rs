//! Truncated log-polyhomogeneous symbol calculus.
//!
//! A [`Symbol`] is a truncated expansion
//!
//! ```text
//! A(z) ≃ Σ_{j<N} Σ_{l≤L} b_{j,l}(z) · |D|^{α(z)-j} · log^l|D|,
//! ```
//!
//! in right-normal form: coefficients from the free algebra on the left, a
//! single power of `|D|` with affine exponent `α(z) = a - q·z`, then log
//! factors. All operations return right-normal forms; the remainder of every
//! truncation is tracked through `remainder_re`.
//!
//! The two workhorse rules are the power commutation
//!
//! ```text
//! |D|^α A ≃ A |D|^α + Σ_{k≥1} c_{α,k} δᵏ(A) |D|^{α-k},
//! ```
//!
//! with `c_{α,k} = α(α-1)⋯(α-k+1)/k!`, and its `z`-derivative at zero
//!
//! ```text
//! log|D| A ≃ A log|D| + Σ_{k≥1} c'_{0,k} δᵏ(A) |D|^{-k},
//! ```
//!
//! where `c'_{0,k}` is obtained by exact jet differentiation of `c_{z,k}`.

use crate::jetring::{binom_at_jet, binom_jet, gamma_ratio_jet, Jet, JetError};
use crate::ncalg::{BElement, BFamily};
use crate::scalar::{pow_u, Scalar};
use std::collections::BTreeMap;
use std::fmt::{self, Display};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("word length limit exceeded: {got} > {limit}")]
    WordLenExceeded { limit: usize, got: usize },
    #[error("delta power limit exceeded: {got} > {limit}")]
    DeltaPowerExceeded { limit: u32, got: u32 },
    #[error("log degree limit exceeded: {got} > {limit}")]
    LogDegreeExceeded { limit: u32, got: u32 },
    #[error("symbol truncation insufficient: need {needed}, have {got}")]
    TruncationInsufficient { needed: u32, got: u32 },
    #[error("orders cannot be combined: offsets differ by non-integer {0}")]
    MixedOrder(String),
    #[error("operation requires a constant-order symbol (slope 0), got slope {0}")]
    NonConstantOrder(String),
    #[error("expansion bounds too small for truncation {trunc}: need max_n ≥ {need_n}, max_k ≥ {need_k}")]
    BoundsTooSmall { trunc: u32, need_n: u32, need_k: u32 },
    #[error("family derivative order {got} exceeds jet truncation {limit}")]
    DerivativeTooDeep { limit: usize, got: usize },
}

/// Affine order `α(z) = offset − slope·z`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineOrder<S: Scalar> {
    pub offset: S,
    pub slope: S,
}

impl<S: Scalar> AffineOrder<S> {
    pub fn new(offset: S, slope: S) -> Self {
        AffineOrder { offset, slope }
    }

    pub fn constant(offset: S) -> Self {
        AffineOrder::new(offset, S::zero())
    }

    /// The order `-q·z` of a weight power `|D|^{-qz}`.
    pub fn z_power(q: S) -> Self {
        AffineOrder::new(S::zero(), q)
    }

    pub fn add(&self, other: &Self) -> Self {
        AffineOrder::new(
            self.offset.clone() + other.offset.clone(),
            self.slope.clone() + other.slope.clone(),
        )
    }

    pub fn sub_int(&self, j: u32) -> Self {
        AffineOrder::new(self.offset.clone() - S::from_int(j as i64), self.slope.clone())
    }

    pub fn is_constant(&self) -> bool {
        self.slope.is_zero()
    }

    pub fn re_offset(&self) -> f64 {
        self.offset.to_c64().re
    }

    /// The exponent as a jet in `z` at 0: `[offset, -slope, 0, …]`.
    pub fn as_jet(&self, len: usize) -> Jet<S> {
        let mut c = vec![S::zero(); len.max(2)];
        c[0] = self.offset.clone();
        c[1] = -self.slope.clone();
        Jet::new(S::zero(), c)
    }
}

impl<S: Scalar> Display for AffineOrder<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.slope.is_zero() {
            write!(f, "{}", self.offset)
        } else {
            write!(f, "({}) - ({})z", self.offset, self.slope)
        }
    }
}

/// Configuration limits threaded through every expansion-generating
/// operation. Word growth in the free algebra is unbounded in principle;
/// these caps make truncation explicit instead of silent.
#[derive(Debug, Clone)]
pub struct CalcCtx {
    /// Length of coefficient jets in the family variable (`K+1`).
    pub jet_len: usize,
    pub max_word_len: usize,
    pub max_delta: u32,
    pub max_log: u32,
}

impl Default for CalcCtx {
    fn default() -> Self {
        CalcCtx {
            jet_len: 5,
            max_word_len: 6,
            max_delta: 8,
            max_log: 8,
        }
    }
}

impl CalcCtx {
    pub fn with_jet_len(mut self, len: usize) -> Self {
        self.jet_len = len;
        self
    }

    pub fn with_word_len(mut self, len: usize) -> Self {
        self.max_word_len = len;
        self
    }

    pub fn with_max_delta(mut self, d: u32) -> Self {
        self.max_delta = d;
        self
    }

    pub fn with_max_log(mut self, l: u32) -> Self {
        self.max_log = l;
        self
    }
}

fn check_limits<S: Scalar>(f: &BFamily<S>, ctx: &CalcCtx) -> Result<(), SymbolError> {
    let wl = f.max_word_len();
    if wl > ctx.max_word_len {
        return Err(SymbolError::WordLenExceeded {
            limit: ctx.max_word_len,
            got: wl,
        });
    }
    let dp = f.max_delta_power();
    if dp > ctx.max_delta {
        return Err(SymbolError::DeltaPowerExceeded {
            limit: ctx.max_delta,
            got: dp,
        });
    }
    Ok(())
}

/// `c'_{0,k} = ∂_α c_{α,k} |_{α=0}`, extracted from the binomial jet.
pub fn log_comm_coeff<S: Scalar>(k: u32) -> S {
    binom_jet::<S>(k, 2).coeff(1)
}

/// A truncated log-polyhomogeneous symbol in right-normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol<S: Scalar> {
    order: AffineOrder<S>,
    terms: BTreeMap<(u32, u32), BFamily<S>>,
    trunc: u32,
    remainder_re: f64,
}

impl<S: Scalar> Symbol<S> {
    fn empty(order: AffineOrder<S>, trunc: u32) -> Self {
        let remainder_re = order.re_offset() - trunc as f64;
        Symbol {
            order,
            terms: BTreeMap::new(),
            trunc,
            remainder_re,
        }
    }

    /// The multiplicative unit.
    pub fn unit(trunc: u32, ctx: &CalcCtx) -> Self {
        let mut s = Symbol::empty(AffineOrder::constant(S::zero()), trunc);
        s.terms.insert((0, 0), BFamily::unit(ctx.jet_len));
        s
    }

    /// A pure weight power `|D|^{α(z)}`.
    pub fn power(order: AffineOrder<S>, trunc: u32, ctx: &CalcCtx) -> Self {
        let mut s = Symbol::empty(order, trunc);
        s.terms.insert((0, 0), BFamily::unit(ctx.jet_len));
        s
    }

    /// The logarithm `log|D|` (a log-degree-1 unit term of order 0).
    pub fn log_weight(trunc: u32, ctx: &CalcCtx) -> Self {
        let mut s = Symbol::empty(AffineOrder::constant(S::zero()), trunc);
        s.terms.insert((0, 1), BFamily::unit(ctx.jet_len));
        s
    }

    /// A coefficient element `b` viewed as an order-0 symbol.
    pub fn from_element(b: BElement<S>, trunc: u32, ctx: &CalcCtx) -> Self {
        Symbol::from_family(BFamily::constant(b, ctx.jet_len), AffineOrder::constant(S::zero()), trunc)
    }

    /// `b(z)·|D|^{α(z)}` for a coefficient family `b(z)`.
    pub fn from_family(f: BFamily<S>, order: AffineOrder<S>, trunc: u32) -> Self {
        let mut s = Symbol::empty(order, trunc);
        if !f.is_zero() {
            s.terms.insert((0, 0), f);
        }
        s
    }

    pub fn zero(order: AffineOrder<S>, trunc: u32) -> Self {
        Symbol::empty(order, trunc)
    }

    pub fn order(&self) -> &AffineOrder<S> {
        &self.order
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn log_degree(&self) -> u32 {
        self.terms.keys().map(|&(_, l)| l).max().unwrap_or(0)
    }

    pub fn remainder_re(&self) -> f64 {
        self.remainder_re
    }

    /// The dropped remainder sits in an `ε`-slack order class whenever log
    /// factors are present.
    pub fn eps_slack(&self) -> bool {
        self.log_degree() > 0
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BFamily<S>)> {
        self.terms.iter()
    }

    pub fn term(&self, j: u32, l: u32) -> BFamily<S> {
        self.terms
            .get(&(j, l))
            .cloned()
            .unwrap_or_else(|| BFamily::zero(1))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(BFamily::is_zero)
    }

    fn insert(&mut self, j: u32, l: u32, f: BFamily<S>) {
        if j >= self.trunc || f.is_zero() {
            return;
        }
        match self.terms.remove(&(j, l)) {
            Some(prev) => {
                let sum = prev.add(&f);
                if !sum.is_zero() {
                    self.terms.insert((j, l), sum);
                }
            }
            None => {
                self.terms.insert((j, l), f);
            }
        }
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for f in out.terms.values_mut() {
            *f = f.neg();
        }
        out
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = self.clone();
        if s.is_zero() {
            out.terms.clear();
            return out;
        }
        for f in out.terms.values_mut() {
            *f = f.scale(s);
        }
        out
    }

    /// Multiply every coefficient family by a scalar jet in `z`.
    pub fn scale_jet(&self, j: &Jet<S>) -> Self {
        let mut out = self.clone();
        let mut dead = Vec::new();
        for (key, f) in out.terms.iter_mut() {
            *f = f.scale_jet(j);
            if f.is_zero() {
                dead.push(*key);
            }
        }
        for k in dead {
            out.terms.remove(&k);
        }
        out
    }

    /// Left-multiply by a coefficient family (stays right-normal).
    pub fn coeff_mul_left(&self, b: &BFamily<S>, ctx: &CalcCtx) -> Result<Self, SymbolError> {
        let mut out = Symbol::empty(self.order.clone(), self.trunc);
        for (&(j, l), f) in &self.terms {
            let prod = b.mul(f);
            check_limits(&prod, ctx)?;
            out.insert(j, l, prod);
        }
        Ok(out)
    }

    /// Apply `δ` to all coefficients. `δ` commutes with all weight powers
    /// and logs, so the expansion shape is unchanged.
    pub fn delta(&self, ctx: &CalcCtx) -> Result<Self, SymbolError> {
        let mut out = Symbol::empty(self.order.clone(), self.trunc);
        for (&(j, l), f) in &self.terms {
            let d = f.delta();
            check_limits(&d, ctx)?;
            out.insert(j, l, d);
        }
        Ok(out)
    }

    /// Multiply by `|D|^{β(z)}` on the right: exponents merge, nothing moves.
    pub fn mul_power_right(&self, extra: &AffineOrder<S>) -> Self {
        let mut out = self.clone();
        out.order = out.order.add(extra);
        out.remainder_re = out.order.re_offset() - out.trunc as f64;
        out
    }

    /// Add symbols whose affine orders differ by a non-negative integer
    /// offset step (slopes must agree exactly).
    pub fn add(&self, other: &Self) -> Result<Self, SymbolError> {
        if self.order.slope != other.order.slope {
            return Err(SymbolError::MixedOrder(format!(
                "slopes {} vs {}",
                self.order.slope, other.order.slope
            )));
        }
        let diff = self.order.offset.clone() - other.order.offset.clone();
        let d = diff
            .try_to_i64()
            .ok_or_else(|| SymbolError::MixedOrder(format!("{diff}")))?;
        if d < 0 {
            return other.add(self);
        }
        let d = d as u32;
        // other's terms sit d steps lower in the ladder of self
        let mut out = Symbol::empty(
            self.order.clone(),
            self.trunc.min(other.trunc.saturating_add(d)),
        );
        for (&(j, l), f) in &self.terms {
            out.insert(j, l, f.clone());
        }
        for (&(j, l), f) in &other.terms {
            out.insert(j + d, l, f.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SymbolError> {
        self.add(&other.neg())
    }

    /// Shift the declared offset up by an integer without changing the
    /// operator: `b|D|^{a-j}` becomes `b|D|^{(a+d)-(j+d)}`.
    pub fn lift_offset(&self, d: u32) -> Self {
        let mut out = Symbol::empty(
            AffineOrder::new(
                self.order.offset.clone() + S::from_int(d as i64),
                self.order.slope.clone(),
            ),
            self.trunc + d,
        );
        for (&(j, l), f) in &self.terms {
            out.insert(j + d, l, f.clone());
        }
        out
    }

    /// Whether two symbols represent the same expansion on their common
    /// valid range. The declared offset may differ by an integer (the ladder
    /// representation is not unique); slopes must agree exactly.
    pub fn same_expansion(&self, other: &Self) -> bool {
        if self.order.slope != other.order.slope {
            return false;
        }
        let diff = self.order.offset.clone() - other.order.offset.clone();
        let d = match diff.try_to_i64() {
            Some(d) => d,
            None => return false,
        };
        if d < 0 {
            return other.same_expansion(self);
        }
        let d = d as u32;
        let common = self.trunc.min(other.trunc.saturating_add(d));
        let keys: std::collections::BTreeSet<(u32, u32)> = self
            .terms
            .keys()
            .copied()
            .filter(|&(j, _)| j < common)
            .chain(
                other
                    .terms
                    .keys()
                    .filter(|&&(j, _)| j + d < common)
                    .map(|&(j, l)| (j + d, l)),
            )
            .collect();
        for (j, l) in keys {
            let a = self.term(j, l);
            let b = if j >= d {
                other.term(j - d, l)
            } else {
                BFamily::zero(1)
            };
            let len = a.len().min(b.len());
            for m in 0..len {
                if a.coeff(m) != b.coeff(m) {
                    return false;
                }
            }
            // coefficients beyond the common jet length must be absent
            for m in len..a.len() {
                if !a.coeff(m).is_zero() {
                    return false;
                }
            }
            for m in len..b.len() {
                if !b.coeff(m).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Deterministic term listing: ascending `j`, then `l`, then the word
    /// order inside each coefficient.
    pub fn pretty(&self) -> String {
        format!("{self}")
    }
}

impl<S: Scalar> Display for Symbol<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 + O(|D|^{})", self.remainder_re);
        }
        let mut first = true;
        for (&(j, l), fam) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mut coeffs = Vec::new();
            for (m, b) in fam.coeffs().iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                if m == 0 {
                    coeffs.push(format!("{b}"));
                } else {
                    coeffs.push(format!("z^{m}*({b})"));
                }
            }
            write!(f, "[{}]", coeffs.join(" + "))?;
            write!(f, "*|D|^({} - {})", self.order, j)?;
            if l > 0 {
                write!(f, "*log^{l}|D|")?;
            }
        }
        write!(f, " + O(|D|^{}{})", self.remainder_re, if self.eps_slack() { "+eps" } else { "" })
    }
}

/// Expansion of `log^l|D| · f` as `Σ g·|D|^{-j}·log^{l'}` with `l' ≤ l`.
fn push_logs<S: Scalar>(
    f: &BFamily<S>,
    l: u32,
    budget_j: u32,
    ctx: &CalcCtx,
) -> Result<Vec<(BFamily<S>, u32, u32)>, SymbolError> {
    if l == 0 {
        return Ok(vec![(f.clone(), 0, 0)]);
    }
    let inner = push_logs(f, l - 1, budget_j, ctx)?;
    let mut out = Vec::new();
    for (g, j1, l1) in inner {
        // one more log passes to the right: g·log + corrections
        out.push((g.clone(), j1, l1 + 1));
        let mut dk = g;
        for k in 1..=budget_j.saturating_sub(j1) {
            dk = dk.delta();
            if dk.is_zero() {
                break;
            }
            check_limits(&dk, ctx)?;
            let c: S = log_comm_coeff(k);
            out.push((dk.scale(&c), j1 + k, l1));
        }
    }
    Ok(out)
}

/// Right-normalised product of two symbols. Orders add; every weight power
/// and log factor of `a` is commuted through the coefficients of `b`.
pub fn sym_mul<S: Scalar>(
    a: &Symbol<S>,
    b: &Symbol<S>,
    trunc: u32,
    ctx: &CalcCtx,
) -> Result<Symbol<S>, SymbolError> {
    if a.trunc < trunc || b.trunc < trunc {
        return Err(SymbolError::TruncationInsufficient {
            needed: trunc,
            got: a.trunc.min(b.trunc),
        });
    }
    let order = a.order().add(b.order());
    let log_sum = a.log_degree() + b.log_degree();
    if log_sum > ctx.max_log {
        return Err(SymbolError::LogDegreeExceeded {
            limit: ctx.max_log,
            got: log_sum,
        });
    }
    let mut out = Symbol::empty(order, trunc);
    for (&(ja, la), fa) in a.terms() {
        for (&(jb, lb), fb) in b.terms() {
            let base = ja + jb;
            if base >= trunc {
                continue;
            }
            let exponent = a.order().sub_int(ja);
            for (g, j1, l1) in push_logs(fb, la, trunc - 1 - base, ctx)? {
                let exp_jet = exponent.as_jet(ctx.jet_len);
                let mut dk = g;
                let mut k = 0u32;
                loop {
                    if base + j1 + k >= trunc {
                        break;
                    }
                    if dk.is_zero() {
                        break;
                    }
                    if k > 0 {
                        check_limits(&dk, ctx)?;
                    }
                    let coeff_jet = binom_at_jet(k, &exp_jet);
                    let piece = fa.mul(&dk.scale_jet(&coeff_jet));
                    check_limits(&piece, ctx)?;
                    out.insert(base + j1 + k, l1 + lb, piece);
                    k += 1;
                    dk = dk.delta();
                }
            }
        }
    }
    Ok(out)
}

/// Right-normal form of `|D|^{exponent} · a`.
pub fn commute_power<S: Scalar>(
    exponent: &AffineOrder<S>,
    a: &Symbol<S>,
    trunc: u32,
    ctx: &CalcCtx,
) -> Result<Symbol<S>, SymbolError> {
    sym_mul(&Symbol::power(exponent.clone(), trunc, ctx), a, trunc, ctx)
}

/// The bracket `[log|D|, a]`: log degree is preserved, the order drops by 1.
pub fn commute_log<S: Scalar>(
    a: &Symbol<S>,
    ctx: &CalcCtx,
) -> Result<Symbol<S>, SymbolError> {
    let order = AffineOrder::new(
        a.order().offset.clone() - S::one(),
        a.order().slope.clone(),
    );
    let mut out = Symbol::empty(order, a.trunc);
    for (&(j, l), f) in a.terms() {
        let mut dk = f.clone();
        for k in 1..=(a.trunc - j) {
            dk = dk.delta();
            if dk.is_zero() {
                break;
            }
            check_limits(&dk, ctx)?;
            let c: S = log_comm_coeff(k);
            // |D|^{α-j-k} = |D|^{(α-1) - (j+k-1)}
            out.insert(j + k - 1, l, dk.scale(&c));
        }
    }
    Ok(out)
}

/// Literal commutator `ab − ba`.
pub fn sym_bracket<S: Scalar>(
    a: &Symbol<S>,
    b: &Symbol<S>,
    trunc: u32,
    ctx: &CalcCtx,
) -> Result<Symbol<S>, SymbolError> {
    sym_mul(a, b, trunc, ctx)?.sub(&sym_mul(b, a, trunc, ctx)?)
}

/// The conjugation family `σ(z)(b) = |D|^{-z} b |D|^{z}`, expanded as
/// `Σ_k c_{-z,k} δᵏ(b) |D|^{-k}` with jet-valued coefficients.
pub fn sigma_conj<S: Scalar>(
    b: &Symbol<S>,
    ctx: &CalcCtx,
) -> Result<Symbol<S>, SymbolError> {
    let arg = AffineOrder::z_power(S::one()).as_jet(ctx.jet_len); // -z
    let mut out = Symbol::empty(b.order().clone(), b.trunc);
    for (&(j, l), f) in b.terms() {
        let mut dk = f.clone();
        for k in 0..(b.trunc - j) {
            if dk.is_zero() {
                break;
            }
            if k > 0 {
                check_limits(&dk, ctx)?;
            }
            let cj = binom_at_jet(k, &arg);
            out.insert(j + k, l, dk.scale_jet(&cj));
            dk = dk.delta();
        }
    }
    Ok(out)
}

/// `Lⁿ(b)` for `L = [log|D|, ·]`.
pub fn log_ad_power<S: Scalar>(
    b: &Symbol<S>,
    n: u32,
    ctx: &CalcCtx,
) -> Result<Symbol<S>, SymbolError> {
    let mut out = b.clone();
    for _ in 0..n {
        out = commute_log(&out, ctx)?;
    }
    Ok(out)
}

/// `∂ⁿ_z A(z) |_{z=0}` as a constant-order symbol. Differentiating the
/// weight power contributes `(-q)^l log^l|D|` factors, so the log degree can
/// grow by up to `n`.
pub fn family_derivative_at_zero<S: Scalar>(
    a: &Symbol<S>,
    n: u32,
    ctx: &CalcCtx,
) -> Result<Symbol<S>, SymbolError> {
    // n must stay within the stored jet truncation of every coefficient;
    // beyond it the derivative of a truncated family is not determined
    if let Some(min_order) = a.terms().map(|(_, f)| f.jet_order()).min() {
        if n as usize > min_order {
            return Err(SymbolError::DerivativeTooDeep {
                limit: min_order,
                got: n as usize,
            });
        }
    }
    let q = a.order().slope.clone();
    let log_bound = a.log_degree() + n;
    if log_bound > ctx.max_log {
        return Err(SymbolError::LogDegreeExceeded {
            limit: ctx.max_log,
            got: log_bound,
        });
    }
    let mut out = Symbol::empty(AffineOrder::constant(a.order().offset.clone()), a.trunc);
    for (&(j, l), f) in a.terms() {
        for l2 in 0..=n {
            // C(n, l2) (-q)^{l2} ∂^{n-l2} f(0)
            let mut binom: i64 = 1;
            for i in 0..l2 {
                binom = binom * (n - i) as i64 / (i as i64 + 1);
            }
            let factor = S::from_int(binom) * pow_u(&(-q.clone()), l2);
            if factor.is_zero() {
                continue;
            }
            let d = f.derivative((n - l2) as usize).at_zero();
            if d.is_zero() {
                continue;
            }
            out.insert(
                j,
                l + l2,
                BFamily::constant(d, ctx.jet_len).scale(&factor),
            );
        }
    }
    Ok(out)
}

/// `∂ⁿ_z (A(z)·|D|^{q z}) |_{z=0}`: the slope-compensated derivative, which
/// only differentiates the coefficient jets and keeps log degrees fixed.
pub fn folded_derivative_at_zero<S: Scalar>(
    a: &Symbol<S>,
    n: u32,
    ctx: &CalcCtx,
) -> Result<Symbol<S>, SymbolError> {
    let q = a.order().slope.clone();
    let folded = a.mul_power_right(&AffineOrder::z_power(-q));
    family_derivative_at_zero(&folded, n, ctx)
}

/// `(|D|+P)^{-z}` for a zero-order perturbation `P`, truncated at `trunc`.
///
/// Terms are indexed by the factor count `n ≥ 1` and multi-exponents
/// `k = (k₁..k_n)`; each contributes
///
/// ```text
/// (-1)^{|k|+n} · Γ(z+|k|+n)/Γ(z) · δ^{k₁}(P)⋯δ^{k_n}(P) |D|^{-z-|k|-n}
///              / (k! (k₁+1)(k₁+k₂+2)⋯(k₁+⋯+k_n+n)),
/// ```
///
/// with the Gamma ratio realised as the rising-factorial jet, which vanishes
/// at `z=0` for `|k|+n ≥ 1` (so the `z⁰` jet coefficient of the family is
/// the unit symbol).
pub fn perturbed_power<S: Scalar>(
    p: &Symbol<S>,
    trunc: u32,
    max_n: u32,
    max_k: u32,
    ctx: &CalcCtx,
) -> Result<Symbol<S>, SymbolError> {
    if !p.order().is_constant() {
        return Err(SymbolError::NonConstantOrder(format!("{}", p.order().slope)));
    }
    if trunc >= 2 && (max_n < trunc - 1 || (trunc >= 3 && max_k < trunc - 2)) {
        return Err(SymbolError::BoundsTooSmall {
            trunc,
            need_n: trunc - 1,
            need_k: trunc.saturating_sub(2),
        });
    }
    // cache δ^i(P); compositions only request i ≤ trunc-2
    let depth_cap = trunc.saturating_sub(1) as usize;
    let k_needed = max_k.min(trunc.saturating_sub(2));
    let mut deltas: Vec<Symbol<S>> = Vec::with_capacity(k_needed as usize + 1);
    deltas.push(p.clone());
    for _ in 0..k_needed {
        let last = deltas.last().unwrap().delta(ctx)?;
        deltas.push(last);
    }

    let mut acc = Symbol::power(AffineOrder::z_power(S::one()), trunc, ctx);

    // enumerate factor counts and multi-exponents with |k| + n ≤ trunc - 1
    let mut stack: Vec<u32> = Vec::new();
    for n_fac in 1..=max_n.min(depth_cap as u32) {
        stack.clear();
        enumerate_compositions(n_fac, max_k, depth_cap as u32, &mut stack, &mut |ks| {
            let m: u32 = ks.iter().sum::<u32>() + n_fac;
            // product of delta factors
            let mut prod = deltas[ks[0] as usize].clone();
            for &ki in &ks[1..] {
                prod = sym_mul(&prod, &deltas[ki as usize], trunc, ctx)?;
            }
            // combinatorial denominator: k! (k₁+1)(k₁+k₂+2)⋯
            let mut denom: i64 = 1;
            let mut partial: i64 = 0;
            for (i, &ki) in ks.iter().enumerate() {
                let mut fac: i64 = 1;
                for t in 1..=ki as i64 {
                    fac *= t;
                }
                denom *= fac;
                partial += ki as i64 + 1;
                denom *= partial;
                let _ = i;
            }
            let sign = if m % 2 == 0 { 1 } else { -1 };
            let gamma = gamma_ratio_jet::<S>(m, ctx.jet_len);
            let term = prod
                .mul_power_right(&AffineOrder::new(S::from_int(-(m as i64)), S::one()))
                .scale_jet(&gamma)
                .scale(&S::from_ratio(sign, denom));
            acc = acc.add(&term)?;
            Ok(())
        })?;
    }
    Ok(acc)
}

/// Enumerate multi-exponents `(k₁..k_{n_fac})` with `Σkᵢ + n_fac ≤ depth_cap`.
fn enumerate_compositions<F>(
    n_fac: u32,
    max_k: u32,
    depth_cap: u32,
    stack: &mut Vec<u32>,
    f: &mut F,
) -> Result<(), SymbolError>
where
    F: FnMut(&[u32]) -> Result<(), SymbolError>,
{
    let used: u32 = stack.iter().sum::<u32>() + n_fac;
    if used > depth_cap {
        return Ok(());
    }
    if stack.len() == n_fac as usize {
        return f(stack);
    }
    for k in 0..=max_k {
        if used + k > depth_cap {
            break;
        }
        stack.push(k);
        enumerate_compositions(n_fac, max_k, depth_cap, stack, f)?;
        stack.pop();
    }
    Ok(())
}

/// `log(|D|+P) − log|D|` as an order-0, log-degree-0 symbol.
///
/// Computed as `X + Σ_{k=2}^{m_ch} H_k(log|D|, X)` where
/// `X = log(1+|D|^{-1}P) = Σ_i (-1)^{i-1} (|D|^{-1}P)^i / i` and `H_k` are
/// the homogeneous Lie components of `log(e^A e^B) - A - B`, evaluated with
/// `ad_{log|D|} = [log|D|, ·]`. Every `H_k` has true order ≤ -k, so degrees
/// beyond the truncation are dropped provably.
pub fn log_difference<S: Scalar>(
    p: &Symbol<S>,
    trunc: u32,
    m_ch: u32,
    ctx: &CalcCtx,
) -> Result<Symbol<S>, SymbolError> {
    if !p.order().is_constant() {
        return Err(SymbolError::NonConstantOrder(format!("{}", p.order().slope)));
    }
    let dinv_p = commute_power(&AffineOrder::constant(S::from_int(-1)), p, trunc, ctx)?;
    // Mercator series for log(1 + |D|^{-1}P); the i-th power has order -i
    let mut x = dinv_p.clone();
    let mut power = dinv_p.clone();
    for i in 2..trunc.max(2) {
        power = sym_mul(&power, &dinv_p, trunc, ctx)?;
        if power.is_zero() {
            break;
        }
        let sign = if i % 2 == 0 { -1 } else { 1 };
        x = x.add(&power.scale(&S::from_ratio(sign, i as i64)))?;
    }

    let mut acc = x.clone();
    for k in 2..=m_ch.min(trunc.saturating_sub(1)) {
        let h = bch_homogeneous(&x, k, trunc, ctx)?;
        if !h.is_zero() {
            acc = acc.add(&h)?;
        }
    }
    // declare the result at order 0 (its leading coefficient ladder starts
    // at j = 1)
    let lift = acc
        .order()
        .offset
        .clone()
        .try_to_i64()
        .expect("integer offset ladder");
    Ok(acc.lift_offset((-lift).max(0) as u32))
}

/// Degree-`k` homogeneous component of `log(e^A e^B) − A − B` via the Dynkin
/// expansion, with `A = log|D|` and `B = x`.
fn bch_homogeneous<S: Scalar>(
    x: &Symbol<S>,
    k: u32,
    trunc: u32,
    ctx: &CalcCtx,
) -> Result<Symbol<S>, SymbolError> {
    debug_assert!(k >= 2);
    // start from zero at the deepest plausible offset; reconciliation in
    // `add` lifts as needed
    let mut acc: Option<Symbol<S>> = None;
    let mut blocks: Vec<(u32, u32)> = Vec::new();
    bch_blocks(x, k, trunc, ctx, &mut blocks, 0, &mut acc)?;
    Ok(acc.unwrap_or_else(|| Symbol::zero(AffineOrder::constant(S::zero()), trunc)))
}

fn bch_blocks<S: Scalar>(
    x: &Symbol<S>,
    k: u32,
    trunc: u32,
    ctx: &CalcCtx,
    blocks: &mut Vec<(u32, u32)>,
    used: u32,
    acc: &mut Option<Symbol<S>>,
) -> Result<(), SymbolError> {
    if used == k && !blocks.is_empty() {
        return bch_eval_monomial(x, blocks, trunc, ctx, acc);
    }
    if used >= k {
        return Ok(());
    }
    for r in 0..=(k - used) {
        for s in 0..=(k - used - r) {
            if r + s == 0 {
                continue;
            }
            blocks.push((r, s));
            bch_blocks(x, k, trunc, ctx, blocks, used + r + s, acc)?;
            blocks.pop();
        }
    }
    Ok(())
}

fn bch_eval_monomial<S: Scalar>(
    x: &Symbol<S>,
    blocks: &[(u32, u32)],
    trunc: u32,
    ctx: &CalcCtx,
    acc: &mut Option<Symbol<S>>,
) -> Result<(), SymbolError> {
    let n = blocks.len();
    let (r_last, s_last) = blocks[n - 1];
    // ops applied left-to-right over the core; the core consumes one letter
    let mut ops: Vec<(u32, u32)> = blocks[..n - 1].to_vec();
    let core_is_log;
    if s_last >= 1 {
        ops.push((r_last, s_last - 1));
        core_is_log = false;
    } else {
        // tail ad_A^{r-1}(A) vanishes unless r == 1
        if r_last != 1 {
            return Ok(());
        }
        core_is_log = true;
    }
    // quick vanish: ad_B(B) = 0 when the innermost op is an x-bracket on x
    let mut value = if core_is_log {
        Symbol::log_weight(trunc, ctx)
    } else {
        x.clone()
    };
    for &(r, s) in ops.iter().rev() {
        for _ in 0..s {
            value = sym_bracket(x, &value, trunc, ctx)?;
            if value.is_zero() {
                return Ok(());
            }
        }
        for _ in 0..r {
            value = commute_log(&value, ctx)?;
            if value.is_zero() {
                return Ok(());
            }
        }
    }
    // Dynkin weight: (-1)^{n-1}/n · 1/(k · Π rᵢ! sᵢ!)
    let k: u32 = blocks.iter().map(|&(r, s)| r + s).sum();
    let mut denom: i64 = k as i64 * n as i64;
    for &(r, s) in blocks {
        for t in 1..=r as i64 {
            denom *= t;
        }
        for t in 1..=s as i64 {
            denom *= t;
        }
    }
    let sign = if (n - 1) % 2 == 0 { 1 } else { -1 };
    let term = value.scale(&S::from_ratio(sign, denom));
    if term.is_zero() {
        return Ok(());
    }
    *acc = Some(match acc.take() {
        None => term,
        Some(a) => a.add(&term)?,
    });
    Ok(())
}

/// A product expression over primitive factors, used to state and test
/// right-normalisation.
#[derive(Debug, Clone)]
pub enum Factor<S: Scalar> {
    Coeff(BFamily<S>),
    Power(AffineOrder<S>),
    Log,
}

/// Right-normalise an arbitrary product of primitive factors.
pub fn normalize_product<S: Scalar>(
    factors: &[Factor<S>],
    trunc: u32,
    ctx: &CalcCtx,
) -> Result<Symbol<S>, SymbolError> {
    let mut acc = Symbol::unit(trunc, ctx);
    for f in factors.iter().rev() {
        acc = match f {
            Factor::Coeff(b) => acc.coeff_mul_left(b, ctx)?,
            Factor::Power(p) => commute_power(p, &acc, trunc, ctx)?,
            Factor::Log => sym_mul(&Symbol::log_weight(trunc, ctx), &acc, trunc, ctx)?,
        };
    }
    Ok(acc)
}

/// Re-expand an already-normal symbol through the normaliser (idempotence
/// witness).
pub fn renormalize<S: Scalar>(a: &Symbol<S>, ctx: &CalcCtx) -> Result<Symbol<S>, SymbolError> {
    let mut acc = Symbol::zero(a.order().clone(), a.trunc());
    for (&(j, l), fam) in a.terms() {
        let mut factors = vec![
            Factor::Coeff(fam.clone()),
            Factor::Power(a.order().sub_int(j)),
        ];
        for _ in 0..l {
            factors.push(Factor::Log);
        }
        let t = normalize_product(&factors, a.trunc(), ctx)?;
        acc = acc.add(&t)?;
    }
    Ok(acc)
}
