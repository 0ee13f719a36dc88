//! A synthetic trace model with prescribed rational germs.
//!
//! Each word is deterministically assigned a fixed meromorphic function
//! with rational coefficients: simple to triple poles on a finite integer
//! window plus a quadratic polynomial part. Germ requests at any center all
//! come from that one global function, so linearity and recentring
//! consistency hold by construction — exactly the contract the jet-level
//! residue identities need. With exact scalars this turns the identity
//! checks into coefficient-exact tests, and it witnesses pole multiplicity
//! bounds `k > 0` that the circle model does not reach.
//!
//! Cyclicity of the underlying trace is *not* modelled here, so the
//! commutator-discrepancy identity is out of scope for this model.

use super::{TraceError, TraceModel};
use crate::jetring::LaurentJet;
use crate::ncalg::{GenKind, Word};
use crate::scalar::Scalar;

/// Trace model with hashed rational germ data.
#[derive(Debug, Clone)]
pub struct SynthModel {
    /// Pole multiplicity bound `k`; germs carry poles up to order `k+1`.
    pub k: u32,
    /// Dimension spectrum: integers `≤ sd_max`.
    pub sd_max: i64,
    /// Active poles live in `[pole_lo, sd_max]`.
    pub pole_lo: i64,
    pub summability: f64,
}

impl Default for SynthModel {
    fn default() -> Self {
        SynthModel {
            k: 2,
            sd_max: 1,
            pole_lo: -6,
            summability: 1.0,
        }
    }
}

fn fnv(word: &Word, salt: i64) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |b: u64| {
        h ^= b;
        h = h.wrapping_mul(0x100000001b3);
    };
    for g in word.factors() {
        eat(g.base.0 as u64 + 1);
        eat(match g.kind {
            GenKind::Plain => 2,
            GenKind::BracketD => 3,
        });
        eat(g.delta_power as u64 + 5);
    }
    eat(salt as u64 ^ 0x9e3779b97f4a7c15);
    h
}

fn hashed_ratio<S: Scalar>(h: u64) -> S {
    let numer = (h % 9) as i64 - 4;
    let denom = ((h >> 4) % 3) as i64 + 1;
    S::from_ratio(numer, denom)
}

impl SynthModel {
    /// Germ at `center` of `Σ c_i (s - p)^{-m}` plus the polynomial part.
    fn germ_of_word<S: Scalar>(
        &self,
        w: &Word,
        center: &S,
        k_top: usize,
    ) -> Result<LaurentJet<S>, TraceError> {
        let len = k_top + 1;
        let mut germ = LaurentJet::zero(center.clone(), k_top);

        for p in self.pole_lo..=self.sd_max {
            let mult = 1 + (fnv(w, p) % (self.k as u64 + 1)) as u32;
            for m in 1..=mult {
                let c: S = hashed_ratio(fnv(w, 1000 * p + m as i64));
                if c.is_zero() {
                    continue;
                }
                let dist = center.clone() - S::from_int(p);
                let part = if dist.is_zero() {
                    // germ is centred on the pole
                    let mut coeffs = vec![S::zero(); m as usize + k_top + 1];
                    coeffs[0] = c;
                    LaurentJet::new(center.clone(), m as usize, coeffs)
                } else {
                    // Taylor coefficients of (s-p)^{-m} at the center
                    let inv = S::one()
                        .checked_div(&dist)
                        .expect("nonzero distance");
                    let mut coeffs = vec![S::zero(); len];
                    let mut t = crate::scalar::pow_u(&inv, m);
                    for (i, slot) in coeffs.iter_mut().enumerate() {
                        *slot = c.clone() * t.clone();
                        t = t * inv.clone() * S::from_ratio(-(m as i64 + i as i64), i as i64 + 1);
                    }
                    LaurentJet::new(center.clone(), 0, coeffs)
                };
                germ = germ.add(&part)?;
            }
        }

        // quadratic polynomial part evaluated around the center
        let p0: S = hashed_ratio(fnv(w, -11));
        let p1: S = hashed_ratio(fnv(w, -12));
        let p2: S = hashed_ratio(fnv(w, -13));
        let mut coeffs = vec![S::zero(); len];
        coeffs[0] = p0
            + p1.clone() * center.clone()
            + p2.clone() * center.clone() * center.clone();
        if len > 1 {
            coeffs[1] = p1 + S::from_int(2) * p2.clone() * center.clone();
        }
        if len > 2 {
            coeffs[2] = p2;
        }
        germ = germ.add(&LaurentJet::new(center.clone(), 0, coeffs))?;
        Ok(germ)
    }
}

impl<S: Scalar> TraceModel<S> for SynthModel {
    fn word_trace(
        &self,
        w: &Word,
        center: &S,
        pole_bound: u32,
        k_top: usize,
    ) -> Result<LaurentJet<S>, TraceError> {
        let germ = self.germ_of_word(w, center, k_top)?;
        if germ.pole_order() > (pole_bound + 1) as usize {
            return Err(TraceError::ModelContract(format!(
                "synthetic germ pole order {} exceeds {}",
                germ.pole_order(),
                pole_bound + 1
            )));
        }
        Ok(germ)
    }

    fn sd_contains(&self, s: &S) -> bool {
        match s.try_to_i64() {
            Some(n) => n <= self.sd_max,
            None => false,
        }
    }

    fn sd_window(&self, re_lo: f64, re_hi: f64) -> Vec<S> {
        let lo = re_lo.ceil() as i64;
        let hi = re_hi.floor().min(self.sd_max as f64) as i64;
        (lo..=hi).map(S::from_int).collect()
    }

    fn summability(&self) -> f64 {
        self.summability
    }

    fn pole_bound(&self) -> u32 {
        self.k
    }
}
