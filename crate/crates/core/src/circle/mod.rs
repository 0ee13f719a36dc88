//! The circle model: trigonometric polynomials acting on Fourier modes with
//! the weight `|D| = √(1+n²)`.
//!
//! Generators are Fourier multipliers `e^{ikθ}` (pure mode shifts) and
//! their `D`-brackets; `δ = [|D|, ·]` acts on a shift-`k` band by
//! multiplying its entries by `√(1+(n+k)²) - √(1+n²)`. Every word is a
//! single band, so its trace against `|D|^{-s}` is a one-dimensional mode
//! sum
//!
//! ```text
//! Z_w(s) = Σ_{n∈ℤ} d(n) (1+n²)^{-s/2},
//! ```
//!
//! continued meromorphically by an exact split: the head `|n| ≤ N₀` is
//! summed as a jet, the tails expand `d(±ν)` in exact rational powers of
//! `1/ν` and `(1+ν²)^{-s/2}` binomially, leaving Riemann zeta germs
//! `ζ(s+t)`. All poles are simple and sit on the integer lattice `≤ 1`;
//! which lattice points actually occur is decided by exact-rational
//! coefficient cancellations, so pole orders are structural, not numeric.

pub mod oracle;
pub mod zeta;

use crate::jetring::{binom_at_jet, Jet, LaurentJet};
use crate::ncalg::{BElement, GenId, GenKind, Word};
use crate::scalar::{Backend, ExactC, F64C, Scalar};
use crate::zetatrace::{TraceError, TraceModel};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeMap;
use zeta::{power_jet, zeta_germ};

/// Truncated asymptotic series `Σ c_e n^e` with exact rational
/// coefficients, powers descending from `top` to `floor`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatSeries {
    top: i64,
    floor: i64,
    /// `coeffs[i]` is the coefficient of `n^(top - i)`.
    coeffs: Vec<BigRational>,
}

impl RatSeries {
    fn constant(c: BigRational, floor: i64) -> Self {
        let mut s = RatSeries {
            top: 0,
            floor,
            coeffs: vec![BigRational::zero(); (-floor + 1) as usize],
        };
        s.coeffs[0] = c;
        s
    }

    pub fn coeff(&self, power: i64) -> BigRational {
        if power > self.top || power < self.floor {
            return BigRational::zero();
        }
        self.coeffs[(self.top - power) as usize].clone()
    }

    pub fn top(&self) -> i64 {
        self.top
    }

    pub fn floor(&self) -> i64 {
        self.floor
    }

    fn normalize(&mut self) {
        while self.top > self.floor && self.coeffs.first().map_or(false, Zero::is_zero) {
            self.coeffs.remove(0);
            self.top -= 1;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let top = self.top.max(other.top);
        let floor = self.floor.max(other.floor);
        let mut coeffs = Vec::with_capacity((top - floor + 1) as usize);
        let mut e = top;
        while e >= floor {
            coeffs.push(self.coeff(e) + other.coeff(e));
            e -= 1;
        }
        let mut s = RatSeries { top, floor, coeffs };
        s.normalize();
        s
    }

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::from_integer(1.into())))
    }

    fn scale(&self, c: &BigRational) -> Self {
        RatSeries {
            top: self.top,
            floor: self.floor,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Product; the reliable floor is `max(f₁+t₂, f₂+t₁)`.
    fn mul(&self, other: &Self) -> Self {
        let top = self.top + other.top;
        let floor = (self.floor + other.top).max(other.floor + self.top);
        let mut coeffs = vec![BigRational::zero(); (top - floor + 1).max(1) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ea = self.top - i as i64;
            for (j, b) in other.coeffs.iter().enumerate() {
                let e = ea + other.top - j as i64;
                if e < floor {
                    break;
                }
                let idx = (top - e) as usize;
                coeffs[idx] = &coeffs[idx] + &(a * b);
            }
        }
        let mut s = RatSeries { top, floor, coeffs };
        s.normalize();
        s
    }

    fn pow(&self, e: u32, floor: i64) -> Self {
        let mut acc = RatSeries::constant(BigRational::from_integer(1.into()), floor);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Asymptotic expansion of `√(1+(n+c)²)` in descending powers of `n`
/// (`n → +∞`), with exact rational coefficients:
/// `Σ_m C(1/2,m) Σ_i C(1-2m,i) cⁱ n^{1-2m-i}`.
fn sqrt_band_series(c: &BigRational, floor: i64) -> RatSeries {
    let mut out = RatSeries {
        top: 1,
        floor,
        coeffs: vec![BigRational::zero(); (1 - floor + 1) as usize],
    };
    let mut half_binom = BigRational::from_integer(1.into()); // C(1/2, m)
    let mut m: i64 = 0;
    while 1 - 2 * m >= floor {
        let mut inner_binom = BigRational::from_integer(1.into()); // C(1-2m, i)
        let mut c_pow = BigRational::from_integer(1.into());
        let mut i: i64 = 0;
        while 1 - 2 * m - i >= floor {
            let e = 1 - 2 * m - i;
            let idx = (out.top - e) as usize;
            out.coeffs[idx] = &out.coeffs[idx] + &(&half_binom * &inner_binom * &c_pow);
            inner_binom = inner_binom * rat(1 - 2 * m - i, i + 1);
            c_pow = c_pow * c;
            i += 1;
        }
        half_binom = half_binom * (rat(1, 2) - BigRational::from_integer(m.into()))
            / BigRational::from_integer((m + 1).into());
        m += 1;
    }
    out.normalize();
    out
}

/// A single generator's contribution to a word's diagonal: band mode,
/// delta power, bracket scalar, and the cumulative shift it is evaluated
/// at.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FactorData {
    pub(crate) mode: i64,
    pub(crate) delta_power: u32,
    pub(crate) bracket_scale: i64,
    pub(crate) shift: i64,
}

/// Banded operator on the truncated mode space `-cutoff..cutoff`.
///
/// `bands[k][c]` is the matrix entry in row `n+k`, column `n`, where
/// `n = c - cutoff`.
#[derive(Debug, Clone)]
pub struct BandedOp {
    pub cutoff: usize,
    pub bands: BTreeMap<i64, Vec<f64>>,
}

impl BandedOp {
    pub fn zero(cutoff: usize) -> Self {
        BandedOp {
            cutoff,
            bands: BTreeMap::new(),
        }
    }

    pub fn identity(cutoff: usize) -> Self {
        let dim = 2 * cutoff + 1;
        let mut bands = BTreeMap::new();
        bands.insert(0, vec![1.0; dim]);
        BandedOp { cutoff, bands }
    }

    pub fn dim(&self) -> usize {
        2 * self.cutoff + 1
    }

    fn in_range(&self, mode: i64) -> bool {
        mode.unsigned_abs() as usize <= self.cutoff
    }

    pub fn entry(&self, row_mode: i64, col_mode: i64) -> f64 {
        if !self.in_range(row_mode) || !self.in_range(col_mode) {
            return 0.0;
        }
        match self.bands.get(&(row_mode - col_mode)) {
            Some(v) => v[(col_mode + self.cutoff as i64) as usize],
            None => 0.0,
        }
    }

    fn set_band(&mut self, offset: i64, values: Vec<f64>) {
        if values.iter().any(|&v| v != 0.0) {
            self.bands.insert(offset, values);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.cutoff, other.cutoff);
        let mut out = self.clone();
        for (&k, v) in &other.bands {
            let dim = self.dim();
            let slot = out.bands.entry(k).or_insert_with(|| vec![0.0; dim]);
            for (a, b) in slot.iter_mut().zip(v) {
                *a += b;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        BandedOp {
            cutoff: self.cutoff,
            bands: self
                .bands
                .iter()
                .map(|(&k, v)| (k, v.iter().map(|x| x * s).collect()))
                .collect(),
        }
    }

    /// Operator product; bands convolve.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cutoff, other.cutoff);
        let dim = self.dim();
        let co = self.cutoff as i64;
        let mut out = BandedOp::zero(self.cutoff);
        for (&k1, v1) in &self.bands {
            for (&k2, v2) in &other.bands {
                let k = k1 + k2;
                let slot = out.bands.entry(k).or_insert_with(|| vec![0.0; dim]);
                for c in 0..dim {
                    let n = c as i64 - co;
                    // (self · other) e_n = self (v2[n] e_{n+k2})
                    let mid = n + k2;
                    if mid.unsigned_abs() as usize > self.cutoff
                        || (n + k).unsigned_abs() as usize > self.cutoff
                    {
                        continue;
                    }
                    slot[c] += v1[(mid + co) as usize] * v2[c];
                }
            }
        }
        out.bands.retain(|_, v| v.iter().any(|&x| x != 0.0));
        out
    }

    /// Commutator with the diagonal weight `√(1+n²)`.
    pub fn commutator_with_weight(&self) -> Self {
        let co = self.cutoff as i64;
        let mut out = BandedOp::zero(self.cutoff);
        for (&k, v) in &self.bands {
            let mut w = vec![0.0; self.dim()];
            for (c, &x) in v.iter().enumerate() {
                let n = c as i64 - co;
                if (n + k).unsigned_abs() as usize > self.cutoff {
                    continue;
                }
                w[c] = (weight(n + k) - weight(n)) * x;
            }
            out.set_band(k, w);
        }
        out
    }

    /// `Tr(self · |D|^{-s})` on the truncated space (a plain finite sum).
    pub fn weighted_trace(&self, s: Complex64) -> Complex64 {
        let co = self.cutoff as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        if let Some(v) = self.bands.get(&0) {
            for (c, &x) in v.iter().enumerate() {
                let n = c as i64 - co;
                acc += x * (-s * weight(n).ln()).exp();
            }
        }
        acc
    }

    /// Largest entry difference against `other` on modes at distance
    /// `margin` from the cutoff boundary.
    pub fn interior_max_diff(&self, other: &Self, margin: usize) -> f64 {
        assert_eq!(self.cutoff, other.cutoff);
        let co = self.cutoff as i64;
        let lim = co - margin as i64;
        let mut worst = 0.0f64;
        let keys: std::collections::BTreeSet<i64> = self
            .bands
            .keys()
            .chain(other.bands.keys())
            .copied()
            .collect();
        for k in keys {
            for n in -lim..=lim {
                if (n + k).abs() > lim {
                    continue;
                }
                let d = (self.entry(n + k, n) - other.entry(n + k, n)).abs();
                worst = worst.max(d);
            }
        }
        worst
    }
}

pub fn weight(n: i64) -> f64 {
    (1.0 + (n * n) as f64).sqrt()
}

/// The circle spectral model.
#[derive(Debug, Clone)]
pub struct CircleModel {
    pub mode_cutoff: usize,
    pub asym_order: usize,
    pub em_depth: usize,
    pub head_split: i64,
    pub backend: Backend,
    gens: BTreeMap<u32, i64>,
}

impl CircleModel {
    /// Standard model with generators `g0 = e^{iθ}` and `g1 = e^{-iθ}`.
    pub fn new(
        mode_cutoff: usize,
        asym_order: usize,
        em_depth: usize,
        backend: Backend,
    ) -> Result<Self, TraceError> {
        if backend == Backend::Exact {
            return Err(TraceError::Backend(
                "circle trace germs involve transcendental constants; use the float backend"
                    .into(),
            ));
        }
        let mut gens = BTreeMap::new();
        gens.insert(0, 1);
        gens.insert(1, -1);
        Ok(CircleModel {
            mode_cutoff,
            asym_order,
            em_depth,
            head_split: 32,
            backend,
            gens,
        })
    }

    pub fn with_generator(mut self, id: u32, mode: i64) -> Self {
        self.gens.insert(id, mode);
        self
    }

    pub fn mode_of(&self, id: GenId) -> Result<i64, TraceError> {
        self.gens
            .get(&id.0)
            .copied()
            .ok_or(TraceError::UnknownGenerator(id.0))
    }

    pub(crate) fn factor_data(&self, w: &Word) -> Result<Vec<FactorData>, TraceError> {
        let mut out = Vec::with_capacity(w.len());
        let mut shift = 0i64;
        // rightmost factor acts first at shift 0
        for g in w.factors().iter().rev() {
            let mode = self.mode_of(g.base)?;
            let bracket_scale = match g.kind {
                GenKind::Plain => 1,
                GenKind::BracketD => mode,
            };
            out.push(FactorData {
                mode,
                delta_power: g.delta_power,
                bracket_scale,
                shift,
            });
            shift += mode;
        }
        Ok(out)
    }

    pub fn net_shift(&self, w: &Word) -> Result<i64, TraceError> {
        Ok(self.factor_data(w)?.iter().map(|f| f.mode).sum())
    }

    /// The word's diagonal value `d(n)` (band entry at column `n`).
    pub fn diag_value(&self, w: &Word, n: i64) -> Result<f64, TraceError> {
        let mut acc = 1.0;
        for f in self.factor_data(w)? {
            let x = n + f.shift;
            let mut v = f.bracket_scale as f64;
            for _ in 0..f.delta_power {
                v *= weight(x + f.mode) - weight(x);
            }
            acc *= v;
        }
        Ok(acc)
    }

    /// Matrix realisation of a word on the truncated mode space.
    ///
    /// Words realise as a single band at the net shift; entries vanish
    /// where an intermediate mode would leave the truncation.
    pub fn realize(&self, w: &Word) -> Result<BandedOp, TraceError> {
        let data = self.factor_data(w)?;
        let net: i64 = data.iter().map(|f| f.mode).sum();
        let co = self.mode_cutoff as i64;
        let max_excursion = data
            .iter()
            .map(|f| f.shift.abs().max((f.shift + f.mode).abs()))
            .max()
            .unwrap_or(0);
        if max_excursion > co {
            return Err(TraceError::CutoffTooSmall {
                cutoff: self.mode_cutoff,
                need: max_excursion as usize,
            });
        }
        let dim = 2 * self.mode_cutoff + 1;
        let mut vals = vec![0.0; dim];
        'col: for (c, slot) in vals.iter_mut().enumerate() {
            let n = c as i64 - co;
            // every intermediate mode must stay on the truncated space
            for f in &data {
                let x = n + f.shift;
                if x.abs() > co || (x + f.mode).abs() > co {
                    continue 'col;
                }
            }
            *slot = self.diag_value(w, n)?;
        }
        let mut op = BandedOp::zero(self.mode_cutoff);
        op.set_band(net, vals);
        Ok(op)
    }

    /// Realise a full algebra element (sum of words, real coefficients).
    pub fn realize_element(&self, b: &BElement<F64C>) -> Result<BandedOp, TraceError> {
        let mut acc = BandedOp::zero(self.mode_cutoff);
        for (w, c) in b.terms() {
            let cc = c.to_c64();
            if cc.im != 0.0 {
                return Err(TraceError::Backend(
                    "matrix realisation requires real coefficients".into(),
                ));
            }
            acc = acc.add(&self.realize(w)?.scale(cc.re));
        }
        Ok(acc)
    }

    /// Signed asymptotic expansions of the word's diagonal for
    /// `n → +∞` and `n → -∞`, with exact rational coefficients.
    pub fn diag_asymptotics(
        &self,
        w: &Word,
        depth: usize,
    ) -> Result<(RatSeries, RatSeries), TraceError> {
        let floor = -(depth as i64);
        let data = self.factor_data(w)?;
        let mut plus = RatSeries::constant(BigRational::from_integer(1.into()), floor);
        let mut minus = plus.clone();
        for f in &data {
            let scale = BigRational::from_integer(f.bracket_scale.into());
            // n → +∞ branch: factor at x = n + shift
            let p = sqrt_band_series(&BigRational::from_integer((f.shift + f.mode).into()), floor)
                .sub(&sqrt_band_series(
                    &BigRational::from_integer(f.shift.into()),
                    floor,
                ))
                .pow(f.delta_power, floor)
                .scale(&scale);
            plus = plus.mul(&p);
            // n → -∞ branch: evaluate at n = -ν, using evenness of √(1+x²)
            let m = sqrt_band_series(
                &BigRational::from_integer((-f.shift - f.mode).into()),
                floor,
            )
            .sub(&sqrt_band_series(
                &BigRational::from_integer((-f.shift).into()),
                floor,
            ))
            .pow(f.delta_power, floor)
            .scale(&scale);
            minus = minus.mul(&m);
        }
        Ok((plus, minus))
    }

    /// Meromorphic germ of `s ↦ Σ_n d(n)(1+n²)^{-s/2}` at `center`.
    fn word_germ(
        &self,
        w: &Word,
        center: Complex64,
        k_top: usize,
    ) -> Result<LaurentJet<F64C>, TraceError> {
        if self.net_shift(w)? != 0 {
            return Ok(LaurentJet::zero(center, k_top));
        }
        let len = k_top + 2;
        let n0 = self.head_split;
        let depth = self.asym_order;

        // exact head
        let mut head = Jet::zero(center, len);
        for n in -n0..=n0 {
            let d = self.diag_value(w, n)?;
            if d == 0.0 {
                continue;
            }
            head = head
                .add(&power_jet(weight(n), 0.0, center, len).scale(&Complex64::new(d, 0.0)))
                .unwrap();
        }
        let mut germ = LaurentJet::from_jet(&head.truncate(k_top + 1));

        // combined tail coefficients
        let (plus, minus) = self.diag_asymptotics(w, depth)?;
        let combined = plus.add(&minus);
        if combined.top > 0 {
            return Err(TraceError::ModelContract(
                "word diagonal grows with n".into(),
            ));
        }

        // accuracy estimate for the dropped expansion orders
        let tail_exp = center.re + depth as f64 - 1.0;
        if tail_exp <= 1.0 {
            return Err(TraceError::AsymDepth {
                need: (2.5 - center.re).ceil().max(0.0) as usize + 1,
                have: depth,
            });
        }
        let last = combined
            .coeff(-(depth as i64))
            .to_f64()
            .unwrap_or(f64::NAN)
            .abs();
        let est = (last + 1.0) * (n0 as f64).powf(-tail_exp) / tail_exp;
        if !(est < 1e-10) {
            return Err(TraceError::AsymDepth {
                need: depth + 4,
                have: depth,
            });
        }

        let exact_center = if center.im == 0.0 {
            BigRational::from_float(center.re)
        } else {
            None
        };

        for t in 0..=(depth as i64) {
            // E_t(s) = Σ_{r+2m=t} c_r · C(-s/2, m), exact in s when the
            // center is real
            let e_t: Jet<F64C> = match &exact_center {
                Some(c0) => {
                    let half = ExactC::from_ratio(-1, 2);
                    let c0x = ExactC::new(c0.clone(), BigRational::zero());
                    let mut arg_coeffs = vec![<ExactC as Scalar>::zero(); len];
                    arg_coeffs[0] = c0x * half.clone();
                    arg_coeffs[1] = half;
                    let arg = Jet::new(<ExactC as Scalar>::zero(), arg_coeffs);
                    let mut acc = Jet::zero(<ExactC as Scalar>::zero(), len);
                    for m in 0..=(t / 2) {
                        let r = t - 2 * m;
                        let c_r = combined.coeff(-r);
                        if c_r.is_zero() {
                            continue;
                        }
                        let b = binom_at_jet(m as u32, &arg)
                            .scale(&ExactC::new(c_r, BigRational::zero()));
                        acc = acc.add(&b).unwrap();
                    }
                    if acc.is_zero() {
                        continue;
                    }
                    Jet::new(center, acc.coeffs().iter().map(|c| c.to_c64()).collect())
                }
                None => {
                    let mut arg_coeffs = vec![Complex64::new(0.0, 0.0); len];
                    arg_coeffs[0] = -center / 2.0;
                    arg_coeffs[1] = Complex64::new(-0.5, 0.0);
                    let arg = Jet::new(center, arg_coeffs);
                    let mut acc = Jet::zero(center, len);
                    for m in 0..=(t / 2) {
                        let r = t - 2 * m;
                        let c_r = combined.coeff(-r).to_f64().unwrap_or(0.0);
                        if c_r == 0.0 {
                            continue;
                        }
                        let b = binom_at_jet(m as u32, &arg).scale(&Complex64::new(c_r, 0.0));
                        acc = acc.add(&b).unwrap();
                    }
                    if acc.is_zero() {
                        continue;
                    }
                    acc
                }
            };

            // S_t(s) = ζ(s+t) - Σ_{ν≤N₀} ν^{-s-t}, as a germ in s
            let zg = zeta_germ(center + t as f64, k_top + 1, self.em_depth)
                .recenter_affine(&Complex64::new(1.0, 0.0), &Complex64::new(t as f64, 0.0))
                .unwrap();
            let mut partial = Jet::zero(center, len);
            for nu in 1..=n0 {
                partial = partial
                    .add(&power_jet(nu as f64, t as f64, center, len))
                    .unwrap();
            }
            let s_t = zg.sub(&LaurentJet::from_jet(&partial)).unwrap();
            germ = germ
                .add(&s_t.mul_jet(&e_t).unwrap().truncate_top(k_top as i64))
                .unwrap();
        }
        Ok(germ)
    }
}

impl TraceModel<F64C> for CircleModel {
    fn word_trace(
        &self,
        w: &Word,
        center: &F64C,
        pole_bound: u32,
        k_top: usize,
    ) -> Result<LaurentJet<F64C>, TraceError> {
        let germ = self.word_germ(w, *center, k_top)?;
        if germ.pole_order() > (pole_bound + 1) as usize {
            return Err(TraceError::ModelContract(format!(
                "circle germ pole order {} exceeds {}",
                germ.pole_order(),
                pole_bound + 1
            )));
        }
        Ok(germ)
    }

    fn sd_contains(&self, s: &F64C) -> bool {
        s.im == 0.0 && s.re.fract() == 0.0 && s.re <= 1.0
    }

    fn sd_window(&self, re_lo: f64, re_hi: f64) -> Vec<F64C> {
        let hi = re_hi.floor().min(1.0) as i64;
        let lo = re_lo.ceil() as i64;
        (lo..=hi).map(|n| Complex64::new(n as f64, 0.0)).collect()
    }

    fn summability(&self) -> f64 {
        1.0
    }

    fn pole_bound(&self) -> u32 {
        0
    }
}

#[cfg(test)]
mod tests;
