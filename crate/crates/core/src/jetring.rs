//! Truncated Taylor jets and Laurent jets in one complex variable.
//!
//! A [`Jet`] stores the coefficients `c_0..c_K` of a Taylor expansion at a
//! center; a [`LaurentJet`] extends the exponent range down to `-pole_order`.
//! Arithmetic between two jets truncates to the smaller truncation order, so
//! every stored coefficient of a result is fully determined by the inputs.
//!
//! The module also provides the two special coefficient jets the calculus
//! needs everywhere: generalised binomial jets `α ↦ α(α-1)⋯(α-k+1)/k!` and
//! rising-factorial jets `z ↦ z(z+1)⋯(z+m-1)`.

use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("jet centers differ: {0} vs {1}")]
    CenterMismatch(String, String),
    #[error("division by zero in jet arithmetic")]
    DivisionByZero,
    #[error("laurent truncation insufficient: product depth would be negative")]
    TruncationInsufficient,
}

/// Taylor jet `Σ_{m=0}^{K} c_m (z - center)^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<S: Scalar> {
    center: S,
    coeffs: Vec<S>,
}

impl<S: Scalar> Jet<S> {
    pub fn new(center: S, coeffs: Vec<S>) -> Self {
        assert!(!coeffs.is_empty(), "jet needs at least one coefficient");
        Jet { center, coeffs }
    }

    pub fn constant(value: S, center: S, len: usize) -> Self {
        let mut coeffs = vec![S::zero(); len.max(1)];
        coeffs[0] = value;
        Jet { center, coeffs }
    }

    pub fn zero(center: S, len: usize) -> Self {
        Jet::constant(S::zero(), center, len)
    }

    pub fn one(center: S, len: usize) -> Self {
        Jet::constant(S::one(), center, len)
    }

    /// The identity function `z` as a jet at `center`.
    pub fn variable(center: S, len: usize) -> Self {
        let mut j = Jet::constant(center.clone(), center, len);
        if j.coeffs.len() > 1 {
            j.coeffs[1] = S::one();
        }
        j
    }

    pub fn center(&self) -> &S {
        &self.center
    }

    /// Truncation order `K`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeff(&self, m: usize) -> S {
        self.coeffs.get(m).cloned().unwrap_or_else(S::zero)
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Value at the center, `c_0`.
    pub fn value(&self) -> S {
        self.coeffs[0].clone()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    fn check_center(&self, other: &Self) -> Result<(), JetError> {
        if self.center != other.center {
            return Err(JetError::CenterMismatch(
                format!("{}", self.center),
                format!("{}", other.center),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, JetError> {
        self.check_center(other)?;
        let len = self.len().min(other.len());
        let coeffs = (0..len)
            .map(|i| self.coeffs[i].clone() + other.coeffs[i].clone())
            .collect();
        Ok(Jet::new(self.center.clone(), coeffs))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, JetError> {
        self.add(&other.neg())
    }

    /// Cauchy product, truncated to the smaller truncation order.
    pub fn mul(&self, other: &Self) -> Result<Self, JetError> {
        self.check_center(other)?;
        let len = self.len().min(other.len());
        let mut coeffs = vec![S::zero(); len];
        for (i, a) in self.coeffs.iter().take(len).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(len - i).enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Ok(Jet::new(self.center.clone(), coeffs))
    }

    pub fn neg(&self) -> Self {
        Jet::new(
            self.center.clone(),
            self.coeffs.iter().map(|c| -c.clone()).collect(),
        )
    }

    pub fn scale(&self, s: &S) -> Self {
        Jet::new(
            self.center.clone(),
            self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
        )
    }

    /// Derivative with respect to the variable; drops the truncation by one.
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Jet::zero(self.center.clone(), 1);
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| c.clone() * S::from_int(i as i64 + 1))
            .collect();
        Jet::new(self.center.clone(), coeffs)
    }

    pub fn truncate(&self, len: usize) -> Self {
        let len = len.max(1).min(self.coeffs.len());
        Jet::new(self.center.clone(), self.coeffs[..len].to_vec())
    }

    /// Extend with zero coefficients (the jet must be known exact to this
    /// depth by construction, e.g. a polynomial).
    pub fn pad_to(&self, len: usize) -> Self {
        if len <= self.coeffs.len() {
            return self.clone();
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(len, S::zero());
        Jet::new(self.center.clone(), coeffs)
    }
}

/// Laurent jet `Σ_{e=-p}^{K} c_e (z - center)^e` with `p = pole_order`.
///
/// Normalisation trims leading zero coefficients so that the coefficient of
/// `(z-center)^{-p}` is nonzero whenever `p > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentJet<S: Scalar> {
    center: S,
    pole: usize,
    /// `coeffs[i]` is the coefficient of `(z - center)^(i - pole)`.
    coeffs: Vec<S>,
}

impl<S: Scalar> LaurentJet<S> {
    pub fn new(center: S, pole: usize, coeffs: Vec<S>) -> Self {
        assert!(
            coeffs.len() > pole,
            "laurent jet must reach exponent 0 (len {} pole {})",
            coeffs.len(),
            pole
        );
        let mut l = LaurentJet {
            center,
            pole,
            coeffs,
        };
        l.normalize();
        l
    }

    pub fn zero(center: S, k_top: usize) -> Self {
        LaurentJet {
            center,
            pole: 0,
            coeffs: vec![S::zero(); k_top + 1],
        }
    }

    pub fn from_jet(j: &Jet<S>) -> Self {
        LaurentJet {
            center: j.center().clone(),
            pole: 0,
            coeffs: j.coeffs().to_vec(),
        }
    }

    fn normalize(&mut self) {
        while self.pole > 0 && self.coeffs.first().map_or(false, Scalar::is_zero) {
            self.coeffs.remove(0);
            self.pole -= 1;
        }
    }

    pub fn center(&self) -> &S {
        &self.center
    }

    pub fn pole_order(&self) -> usize {
        self.pole
    }

    /// Highest stored exponent.
    pub fn k_top(&self) -> i64 {
        self.coeffs.len() as i64 - 1 - self.pole as i64
    }

    pub fn coeff_at(&self, exponent: i64) -> S {
        let idx = exponent + self.pole as i64;
        if idx < 0 || idx >= self.coeffs.len() as i64 {
            return S::zero();
        }
        self.coeffs[idx as usize].clone()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    /// `Res^{j+1}`: coefficient of `(z-center)^{-(j+1)}`. `j = -1` reads the
    /// finite part; exponents beyond the pole order read zero.
    pub fn residue(&self, j: i64) -> S {
        assert!(j >= -1, "residue order must be >= -1");
        self.coeff_at(-(j + 1))
    }

    fn check_center(&self, other: &Self) -> Result<(), JetError> {
        if self.center != other.center {
            return Err(JetError::CenterMismatch(
                format!("{}", self.center),
                format!("{}", other.center),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, JetError> {
        self.check_center(other)?;
        let pole = self.pole.max(other.pole);
        let k_top = self.k_top().min(other.k_top());
        let mut coeffs = Vec::with_capacity((pole as i64 + k_top + 1).max(1) as usize);
        let mut e = -(pole as i64);
        while e <= k_top {
            coeffs.push(self.coeff_at(e) + other.coeff_at(e));
            e += 1;
        }
        Ok(LaurentJet::new(self.center.clone(), pole, coeffs))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, JetError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        LaurentJet {
            center: self.center.clone(),
            pole: self.pole,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut l = LaurentJet {
            center: self.center.clone(),
            pole: self.pole,
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
        };
        l.normalize();
        l
    }

    /// Product of Laurent data. Pole orders add; the reliable top exponent is
    /// `min(K₁ - p₂, K₂ - p₁)`.
    pub fn mul(&self, other: &Self) -> Result<Self, JetError> {
        self.check_center(other)?;
        let pole = self.pole + other.pole;
        let k_top = (self.k_top() - other.pole as i64).min(other.k_top() - self.pole as i64);
        if k_top < -(pole as i64) {
            return Err(JetError::TruncationInsufficient);
        }
        let size = (pole as i64 + k_top + 1) as usize;
        let mut coeffs = vec![S::zero(); size];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ea = i as i64 - self.pole as i64;
            for (j, b) in other.coeffs.iter().enumerate() {
                let e = ea + (j as i64 - other.pole as i64);
                if e > k_top {
                    break;
                }
                let idx = (e + pole as i64) as usize;
                coeffs[idx] = coeffs[idx].clone() + a.clone() * b.clone();
            }
        }
        Ok(LaurentJet::new(self.center.clone(), pole, coeffs))
    }

    pub fn mul_jet(&self, j: &Jet<S>) -> Result<Self, JetError> {
        self.mul(&LaurentJet::from_jet(j))
    }

    /// Derivative in the expansion variable.
    pub fn derivative(&self) -> Self {
        let pole = self.pole + 1;
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            let e = i as i64 - self.pole as i64;
            coeffs.push(c.clone() * S::from_int(e));
        }
        // exponent e maps to e-1; the e=0 entry becomes a zero at exponent -1
        if coeffs.len() == pole {
            coeffs.push(S::zero());
        }
        LaurentJet::new(self.center.clone(), pole, coeffs)
    }

    pub fn truncate_top(&self, k_top: i64) -> Self {
        let k = k_top.min(self.k_top());
        assert!(k >= -(self.pole as i64));
        let len = (self.pole as i64 + k + 1) as usize;
        LaurentJet::new(self.center.clone(), self.pole, self.coeffs[..len].to_vec())
    }

    /// Substitute `w = q·z + s` into a germ in `w` at `w₀`; the result is a
    /// germ in `z` at `(w₀ - s)/q`. Coefficient of degree `e` scales by `qᵉ`.
    pub fn recenter_affine(&self, q: &S, s: &S) -> Result<Self, JetError> {
        let q_inv = S::one().checked_div(q).ok_or(JetError::DivisionByZero)?;
        let new_center = (self.center.clone() - s.clone()) * q_inv.clone();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        // powers q^e for e = -pole .. k_top
        let mut p = crate::scalar::pow_u(&q_inv, self.pole as u32);
        for c in &self.coeffs {
            coeffs.push(c.clone() * p.clone());
            p = p * q.clone();
        }
        Ok(LaurentJet::new(new_center, self.pole, coeffs))
    }
}

/// Generalised binomial coefficient as a jet: `c_{α,k} = α(α-1)⋯(α-k+1)/k!`
/// evaluated along the jet `arg` in place of `α`.
pub fn binom_at_jet<S: Scalar>(k: u32, arg: &Jet<S>) -> Jet<S> {
    let mut acc = Jet::one(arg.center().clone(), arg.len());
    for i in 0..k {
        let shifted = arg
            .add(&Jet::constant(
                S::from_int(-(i as i64)),
                arg.center().clone(),
                arg.len(),
            ))
            .expect("same center");
        acc = acc.mul(&shifted).expect("same center");
        acc = acc.scale(&S::from_ratio(1, i as i64 + 1));
    }
    acc
}

/// Taylor jet at 0 of `α ↦ c_{α,k}`.
pub fn binom_jet<S: Scalar>(k: u32, len: usize) -> Jet<S> {
    binom_at_jet(k, &Jet::variable(S::zero(), len))
}

/// Rising factorial `z(z+1)⋯(z+m-1)` as a jet at 0; the ratio of Gamma
/// values `Γ(z+m)/Γ(z)`. `m = 0` gives the constant 1.
pub fn gamma_ratio_jet<S: Scalar>(m: u32, len: usize) -> Jet<S> {
    let var = Jet::variable(S::zero(), len);
    let mut acc = Jet::one(S::zero(), len);
    for i in 0..m {
        let shifted = var
            .add(&Jet::constant(S::from_int(i as i64), S::zero(), len))
            .expect("same center");
        acc = acc.mul(&shifted).expect("same center");
    }
    acc
}
