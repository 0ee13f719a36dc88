//! Meromorphic trace germs and the residue calculus built on them.
//!
//! A [`TraceModel`] supplies the Laurent germ of `w ↦ Tr(word·|D|^{-w})` at
//! any requested center, together with the dimension spectrum and the pole
//! multiplicity bound `k`. [`trace_germ`] assembles from those word germs
//! the germ of `z ↦ Tr(A(z))` for a holomorphic symbol family of affine
//! order `α(z) = a - q·z`:
//!
//! * a term `b(z)|D|^{α(z)-j}` is evaluated by recentring the word germ
//!   through the substitution `w = q·z - (a - j)`;
//! * a `log^l|D|` factor acts as `(-∂_w)^l` on the word germ.
//!
//! On top of the germs sit the residue functionals
//! `τ_j(A) = Res^{j+1}_0 Tr(A|D|^{-z})` (the finite part for `j = -1`), the
//! higher-residue identity for holomorphic families, the weight-perturbation
//! and commutator discrepancy checks, and the canonical trace on operators
//! whose order stays clear of `-Sd`.

use crate::jetring::{Jet, JetError, LaurentJet};
use crate::ncalg::Word;
use crate::report::{CheckReport, Tolerance};
use crate::scalar::{pow_u, Scalar};
use crate::symbols::{
    commute_log, family_derivative_at_zero, log_ad_power, log_difference, perturbed_power,
    sym_bracket, sym_mul, AffineOrder, CalcCtx, Symbol, SymbolError,
};
use thiserror::Error;

pub mod synthetic;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("family trace requires a non-constant affine order")]
    ConstantOrder,
    #[error("operator expected: order slope must be zero, got {0}")]
    OperatorExpected(String),
    #[error("positive order slope required for the residue identity, got {0}")]
    SlopeNotPositive(String),
    #[error("truncation {got} insufficient near z0: need more than {needed}")]
    InsufficientTruncation { needed: f64, got: u32 },
    #[error("canonical trace undefined: order {order} lies in -Sd")]
    OrderInDimensionSpectrum { order: String },
    #[error("model contract violated: {0}")]
    ModelContract(String),
    #[error("unknown generator g{0} in this model")]
    UnknownGenerator(u32),
    #[error("mode cutoff {cutoff} too small: band support needs {need}")]
    CutoffTooSmall { cutoff: usize, need: usize },
    #[error("asymptotic depth {have} insufficient for requested accuracy: need {need}")]
    AsymDepth { need: usize, have: usize },
    #[error("log-free family required for this identity")]
    LogTermsUnsupported,
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("backend unsupported here: {0}")]
    Backend(String),
}

/// Contract delivering meromorphic word-trace germs and the spectral data
/// the residue calculus relies on.
pub trait TraceModel<S: Scalar>: Sync {
    /// Laurent germ of `w ↦ Tr(word·|D|^{-w})` at `center`, carrying
    /// coefficients up to exponent `k_top`. Pole order must not exceed
    /// `pole_bound + 1`.
    fn word_trace(
        &self,
        w: &Word,
        center: &S,
        pole_bound: u32,
        k_top: usize,
    ) -> Result<LaurentJet<S>, TraceError>;

    /// Membership in the dimension spectrum Sd.
    fn sd_contains(&self, s: &S) -> bool;

    /// Explicit listing of Sd on a real window (for scans and reports).
    fn sd_window(&self, re_lo: f64, re_hi: f64) -> Vec<S>;

    /// Degree of summability (the `n` controlling the convergence
    /// half-plane `Re(z) > n`).
    fn summability(&self) -> f64;

    /// Pole multiplicity bound `k`: germs have pole order at most `k+1`.
    fn pole_bound(&self) -> u32;
}

/// Germ of a meromorphically extended family trace, with its audit trail.
#[derive(Debug, Clone)]
pub struct MeroTrace<S: Scalar> {
    pub germ: LaurentJet<S>,
    /// Per-term partial germs; they sum to `germ`.
    pub contributions: Vec<(String, LaurentJet<S>)>,
    /// Real part of the order of the dropped remainder at the center.
    pub dropped_order: f64,
}

/// Jet of `z ↦ z^m` at an arbitrary center.
fn monomial_jet<S: Scalar>(m: usize, center: &S, len: usize) -> Jet<S> {
    let mut coeffs = vec![S::zero(); len];
    if center.is_zero() {
        if m < len {
            coeffs[m] = S::one();
        }
        return Jet::new(center.clone(), coeffs);
    }
    // binomial expansion of (center + t)^m
    let mut binom = S::one();
    let mut cpow = pow_u(center, m as u32);
    let cinv = S::one().checked_div(center).expect("nonzero center");
    for i in 0..=m.min(len - 1) {
        coeffs[i] = binom.clone() * cpow.clone();
        if i < m {
            binom = binom * S::from_ratio((m - i) as i64, i as i64 + 1);
            cpow = cpow * cinv.clone();
        }
    }
    Jet::new(center.clone(), coeffs)
}

/// Assemble the Laurent germ of `z ↦ Tr(A(z))` at `z0` from the model's
/// word-trace germs, term by term.
pub fn trace_germ<S: Scalar, M: TraceModel<S> + ?Sized>(
    a: &Symbol<S>,
    z0: &S,
    model: &M,
    k_top: usize,
) -> Result<MeroTrace<S>, TraceError> {
    let q = a.order().slope.clone();
    if q.is_zero() {
        return Err(TraceError::ConstantOrder);
    }
    let k = model.pole_bound();
    let qz0 = q.clone() * z0.clone();
    let needed = a.order().re_offset() - qz0.to_c64().re + model.summability();
    if (a.trunc() as f64) <= needed {
        return Err(TraceError::InsufficientTruncation {
            needed,
            got: a.trunc(),
        });
    }

    let mut germ = LaurentJet::zero(z0.clone(), k_top);
    let mut contributions = Vec::new();
    let poly_len = k_top + (k as usize + 1) + 2;
    for (&(j, l), fam) in a.terms() {
        // substitution w = q·z - (a - j); at z0 the word germ sits at w0
        let w0 = qz0.clone() - a.order().offset.clone() + S::from_int(j as i64);
        let shift = S::from_int(j as i64) - a.order().offset.clone();
        // collect each word's coefficient polynomial in z as a jet at z0,
        // so the model is asked for one germ per word
        let mut polys: std::collections::BTreeMap<&Word, Jet<S>> = std::collections::BTreeMap::new();
        for (m, belt) in fam.coeffs().iter().enumerate() {
            if belt.is_zero() {
                continue;
            }
            let zm = monomial_jet(m, z0, poly_len);
            for (word, coeff) in belt.terms() {
                let scaled = zm.scale(coeff);
                match polys.get_mut(word) {
                    Some(p) => *p = p.add(&scaled)?,
                    None => {
                        polys.insert(word, scaled);
                    }
                }
            }
        }
        for (word, poly) in polys {
            let raw = model.word_trace(word, &w0, k, k_top + l as usize + 1)?;
            if raw.pole_order() > (k + 1) as usize {
                return Err(TraceError::ModelContract(format!(
                    "word germ pole order {} exceeds k+1 = {}",
                    raw.pole_order(),
                    k + 1
                )));
            }
            let mut g = raw;
            for _ in 0..l {
                g = g.derivative().neg();
            }
            let g = g.recenter_affine(&q, &shift)?;
            let part = g.mul_jet(&poly)?.truncate_top(k_top as i64);
            germ = germ.add(&part)?;
            contributions.push((format!("j={j} l={l} [{word}]"), part));
        }
    }
    if a.log_degree() == 0 && germ.pole_order() > (k + 1) as usize {
        return Err(TraceError::ModelContract(format!(
            "assembled germ pole order {} exceeds k+1 = {}",
            germ.pole_order(),
            k + 1
        )));
    }
    Ok(MeroTrace {
        germ,
        contributions,
        dropped_order: a.remainder_re() - qz0.to_c64().re,
    })
}

fn require_operator<S: Scalar>(a: &Symbol<S>) -> Result<(), TraceError> {
    if !a.order().is_constant() {
        return Err(TraceError::OperatorExpected(format!("{}", a.order().slope)));
    }
    Ok(())
}

/// `τ_j(A) = Res^{j+1}_0 Tr(A|D|^{-z})`; `j = -1` reads the finite part.
/// Reads zero for `j` beyond the model's pole bound.
pub fn tau<S: Scalar, M: TraceModel<S> + ?Sized>(
    j: i64,
    a: &Symbol<S>,
    model: &M,
) -> Result<S, TraceError> {
    if j < -1 {
        return Err(TraceError::BadParameter(format!("tau index {j} < -1")));
    }
    require_operator(a)?;
    let fam = a.mul_power_right(&AffineOrder::z_power(S::one()));
    let mt = trace_germ(&fam, &S::zero(), model, 2)?;
    Ok(mt.germ.residue(j))
}

/// `τ_j` with the weight `|D|` replaced by `|D| + P`; `pert` is the
/// expansion of `(|D|+P)^{-z}` (see [`standard_perturbation`]).
pub fn tau_perturbed<S: Scalar, M: TraceModel<S> + ?Sized>(
    j: i64,
    a: &Symbol<S>,
    pert: &Symbol<S>,
    model: &M,
    ctx: &CalcCtx,
) -> Result<S, TraceError> {
    if j < -1 {
        return Err(TraceError::BadParameter(format!("tau index {j} < -1")));
    }
    require_operator(a)?;
    let trunc = a.trunc().min(pert.trunc());
    let prod = sym_mul(a, pert, trunc, ctx)?;
    let mt = trace_germ(&prod, &S::zero(), model, 2)?;
    Ok(mt.germ.residue(j))
}

/// Higher-residue identity for a holomorphic family of order `a - q·z`,
/// `q > 0`:
///
/// ```text
/// Res^{j+1}_0 Tr(A(z)) = Σ_{n=0}^{k-j} τ_{j+n}(∂ⁿ_z(A(z)|D|^{qz})|₀) / (q^{j+n+1} n!)
/// ```
///
/// Both sides are computed from the same truncated family, so the identity
/// holds up to the arithmetic error of the backend.
pub fn residue_theorem_check<S: Scalar, M: TraceModel<S> + ?Sized>(
    a: &Symbol<S>,
    j: i64,
    model: &M,
    ctx: &CalcCtx,
    tol: Tolerance,
    name: impl Into<String>,
) -> Result<CheckReport, TraceError> {
    let k = model.pole_bound() as i64;
    if j < -1 || j > k {
        return Err(TraceError::BadParameter(format!(
            "residue index {j} outside [-1, {k}]"
        )));
    }
    if a.log_degree() > 0 {
        return Err(TraceError::LogTermsUnsupported);
    }
    let q = a.order().slope.clone();
    if q.to_c64().re <= 0.0 || q.to_c64().im != 0.0 {
        return Err(TraceError::SlopeNotPositive(format!("{q}")));
    }

    let depth = (k + 2) as usize;
    let lhs = trace_germ(a, &S::zero(), model, depth)?.germ.residue(j);

    let folded = a.mul_power_right(&AffineOrder::z_power(-q.clone()));
    let mut rhs = S::zero();
    let mut fact: i64 = 1;
    for n in 0..=(k - j) as u32 {
        if n > 0 {
            fact *= n as i64;
        }
        let b_n = family_derivative_at_zero(&folded, n, ctx)?;
        let t = tau(j + n as i64, &b_n, model)?;
        let denom = pow_u(&q, (j + n as i64 + 1) as u32) * S::from_int(fact);
        rhs = rhs + t.checked_div(&denom).expect("nonzero q and factorial");
    }
    Ok(CheckReport::compare(
        name,
        format!("higher-residue identity, j={j}"),
        &lhs,
        &rhs,
        tol,
    ))
}

/// Weight-discrepancy identity for `j ∈ [-1, k-1]`:
///
/// ```text
/// τ_j^{|D|+P}(A) - τ_j(A) = Σ_{n=1}^{k-j} τ_{j+n}(A·∂ⁿ_z((|D|+P)^{-z}|D|^z)|₀) / n!
/// ```
pub fn weight_discrepancy_check<S: Scalar, M: TraceModel<S> + ?Sized>(
    j: i64,
    a: &Symbol<S>,
    pert: &Symbol<S>,
    model: &M,
    ctx: &CalcCtx,
    tol: Tolerance,
    name: impl Into<String>,
) -> Result<CheckReport, TraceError> {
    let k = model.pole_bound() as i64;
    if j < -1 || j > k - 1 {
        return Err(TraceError::BadParameter(format!(
            "discrepancy index {j} outside [-1, {}]",
            k - 1
        )));
    }
    let lhs = tau_perturbed(j, a, pert, model, ctx)? - tau(j, a, model)?;

    let folded = pert.mul_power_right(&AffineOrder::z_power(S::from_int(-1)));
    let mut rhs = S::zero();
    let mut fact: i64 = 1;
    for n in 1..=(k - j) as u32 {
        fact *= n as i64;
        let d_n = family_derivative_at_zero(&folded, n, ctx)?;
        let prod = sym_mul(a, &d_n, a.trunc().min(d_n.trunc()), ctx)?;
        let t = tau(j + n as i64, &prod, model)?;
        rhs = rhs + t.checked_div(&S::from_int(fact)).expect("factorial");
    }
    Ok(CheckReport::compare(
        name,
        format!("weight-discrepancy identity, j={j}"),
        &lhs,
        &rhs,
        tol,
    ))
}

/// `τ_k` is invariant under zero-order weight perturbations.
pub fn tau_top_invariance_check<S: Scalar, M: TraceModel<S> + ?Sized>(
    a: &Symbol<S>,
    pert: &Symbol<S>,
    model: &M,
    ctx: &CalcCtx,
    tol: Tolerance,
    name: impl Into<String>,
) -> Result<CheckReport, TraceError> {
    let k = model.pole_bound() as i64;
    let lhs = tau_perturbed(k, a, pert, model, ctx)?;
    let rhs = tau(k, a, model)?;
    Ok(CheckReport::compare(
        name,
        format!("top residue τ_{k} ignores the perturbation"),
        &lhs,
        &rhs,
        tol,
    ))
}

/// The `k = 0` form of the weight discrepancy, verified against the
/// logarithm difference:
///
/// ```text
/// τ_{-1}^{|D|+P}(A) - τ_{-1}(A) = τ_0(A·(log|D| - log(|D|+P)))
/// ```
///
/// (`∂_z((|D|+P)^{-z}|D|^z)|₀` is minus the logarithm difference.)
pub fn weight_logform_check<S: Scalar, M: TraceModel<S> + ?Sized>(
    a: &Symbol<S>,
    p: &Symbol<S>,
    pert: &Symbol<S>,
    ch_depth: u32,
    model: &M,
    ctx: &CalcCtx,
    tol: Tolerance,
    name: impl Into<String>,
) -> Result<CheckReport, TraceError> {
    let lhs = tau_perturbed(-1, a, pert, model, ctx)? - tau(-1, a, model)?;
    let ld = log_difference(p, p.trunc(), ch_depth, ctx)?;
    let prod = sym_mul(a, &ld, a.trunc().min(ld.trunc()), ctx)?;
    let rhs = -tau(0, &prod, model)?;
    Ok(CheckReport::compare(
        name,
        "weight discrepancy at k=0 via the logarithm difference",
        &lhs,
        &rhs,
        tol,
    ))
}

/// Commutator-discrepancy identity for `j ∈ [-1, k-1]`:
///
/// ```text
/// τ_j([A,B]) = Σ_{n=1}^{k-j} (-1)^{n+1} τ_{j+n}(A·Lⁿ(B)) / n!
/// ```
///
/// with `L = [log|D|, ·]`. Valid on models whose word traces come from an
/// honest operator trace (cyclicity enters the derivation), such as the
/// circle model — not on arbitrary germ assignments.
pub fn commutator_discrepancy_check<S: Scalar, M: TraceModel<S> + ?Sized>(
    j: i64,
    a: &Symbol<S>,
    b: &Symbol<S>,
    model: &M,
    ctx: &CalcCtx,
    tol: Tolerance,
    name: impl Into<String>,
) -> Result<CheckReport, TraceError> {
    let k = model.pole_bound() as i64;
    if j < -1 || j > k - 1 {
        return Err(TraceError::BadParameter(format!(
            "discrepancy index {j} outside [-1, {}]",
            k - 1
        )));
    }
    let trunc = a.trunc().min(b.trunc());
    let bracket = sym_bracket(a, b, trunc, ctx)?;
    let lhs = tau(j, &bracket, model)?;

    let mut rhs = S::zero();
    let mut fact: i64 = 1;
    for n in 1..=(k - j) as u32 {
        fact *= n as i64;
        let ln_b = log_ad_power(b, n, ctx)?;
        let prod = sym_mul(a, &ln_b, trunc.min(ln_b.trunc()), ctx)?;
        let t = tau(j + n as i64, &prod, model)?;
        let sign = if n % 2 == 1 { 1 } else { -1 };
        rhs = rhs + t.checked_div(&S::from_int(sign * fact)).expect("factorial");
    }
    Ok(CheckReport::compare(
        name,
        format!("commutator-discrepancy identity, j={j}"),
        &lhs,
        &rhs,
        tol,
    ))
}

/// `τ_k` vanishes on commutators.
pub fn tau_top_commutator_check<S: Scalar, M: TraceModel<S> + ?Sized>(
    a: &Symbol<S>,
    b: &Symbol<S>,
    model: &M,
    ctx: &CalcCtx,
    tol: Tolerance,
    name: impl Into<String>,
) -> Result<CheckReport, TraceError> {
    let k = model.pole_bound() as i64;
    let trunc = a.trunc().min(b.trunc());
    let bracket = sym_bracket(a, b, trunc, ctx)?;
    let lhs = tau(k, &bracket, model)?;
    Ok(CheckReport::compare(
        name,
        format!("top residue τ_{k} vanishes on commutators"),
        &lhs,
        &S::zero(),
        tol,
    ))
}

/// The canonical trace `τ_{-1}(A)` on operators whose order avoids `-Sd`.
///
/// Errors with [`TraceError::OrderInDimensionSpectrum`] when the gate
/// fails; verifies as a side condition that the germ at zero is pole-free
/// (equivalently, all `τ_j`, `j ≥ 0`, vanish there).
pub fn canonical_trace<S: Scalar, M: TraceModel<S> + ?Sized>(
    a: &Symbol<S>,
    model: &M,
) -> Result<S, TraceError> {
    require_operator(a)?;
    let order = a.order().offset.clone();
    if model.sd_contains(&-order.clone()) {
        return Err(TraceError::OrderInDimensionSpectrum {
            order: format!("{order}"),
        });
    }
    let fam = a.mul_power_right(&AffineOrder::z_power(S::one()));
    let mt = trace_germ(&fam, &S::zero(), model, 2)?;
    if mt.germ.pole_order() > 0 {
        return Err(TraceError::ModelContract(format!(
            "germ at zero has pole order {} despite order {} outside -Sd",
            mt.germ.pole_order(),
            order
        )));
    }
    Ok(mt.germ.residue(-1))
}

/// The canonical trace vanishes on commutators whose combined order avoids
/// `-Sd`. Returns a skipped report when the order gate fails.
pub fn canonical_commutator_check<S: Scalar, M: TraceModel<S> + ?Sized>(
    a: &Symbol<S>,
    b: &Symbol<S>,
    model: &M,
    ctx: &CalcCtx,
    tol: Tolerance,
    name: impl Into<String>,
) -> Result<CheckReport, TraceError> {
    let name = name.into();
    let total = a.order().offset.clone() + b.order().offset.clone();
    if model.sd_contains(&-total.clone()) {
        return Ok(CheckReport::skip(
            name,
            "canonical trace on commutators",
            format!("gated: combined order {total} lies in -Sd"),
        ));
    }
    let trunc = a.trunc().min(b.trunc());
    let bracket = sym_bracket(a, b, trunc, ctx)?;
    let lhs = canonical_trace(&bracket, model)?;
    Ok(CheckReport::compare(
        name,
        "canonical trace vanishes on commutators",
        &lhs,
        &S::zero(),
        tol,
    ))
}

/// The canonical trace is insensitive to zero-order weight perturbations.
pub fn canonical_invariance_check<S: Scalar, M: TraceModel<S> + ?Sized>(
    a: &Symbol<S>,
    pert: &Symbol<S>,
    model: &M,
    ctx: &CalcCtx,
    tol: Tolerance,
    name: impl Into<String>,
) -> Result<CheckReport, TraceError> {
    let name = name.into();
    let order = a.order().offset.clone();
    if model.sd_contains(&-order.clone()) {
        return Ok(CheckReport::skip(
            name,
            "canonical trace weight invariance",
            format!("gated: order {order} lies in -Sd"),
        ));
    }
    let lhs = tau_perturbed(-1, a, pert, model, ctx)?;
    let rhs = canonical_trace(a, model)?;
    Ok(CheckReport::compare(
        name,
        "canonical trace weight invariance",
        &lhs,
        &rhs,
        tol,
    ))
}

/// The perturbation family `(|D|+P)^{-z}` with enumeration bounds wide
/// enough for the requested truncation.
pub fn standard_perturbation<S: Scalar>(
    p: &Symbol<S>,
    trunc: u32,
    ctx: &CalcCtx,
) -> Result<Symbol<S>, TraceError> {
    Ok(perturbed_power(p, trunc, trunc.max(1), trunc.max(1), ctx)?)
}

/// `L(A) = [log|D|, A]`, re-exported at the trace layer.
pub fn log_bracket<S: Scalar>(a: &Symbol<S>, ctx: &CalcCtx) -> Result<Symbol<S>, TraceError> {
    Ok(commute_log(a, ctx)?)
}

#[cfg(test)]
mod tests;
