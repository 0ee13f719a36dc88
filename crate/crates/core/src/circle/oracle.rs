//! Independent continuation oracle for circle word traces.
//!
//! This route shares no expansion machinery with the model's own
//! continuation: it evaluates the mode sum directly up to a split point and
//! handles the tails by Euler–Maclaurin summation, with the boundary
//! integral continued in closed form after the substitution `t = 1/u`:
//!
//! ```text
//! ∫_N^∞ d(t)(1+t²)^{-s/2} dt = Σ_r χ_r(s) · N^{-(s-1+r)} / (s-1+r),
//! ```
//!
//! where `χ(u,s) = d(1/u)(1+u²)^{-s/2}` is analytic at `u = 0`. Poles come
//! only from the explicit `1/(s-1+r)` factors. All series work here uses a
//! local f64 power-series helper, not the exact-rational asymptotics of the
//! main route.
//!
//! For perturbed weights the oracle goes through a dense symmetric
//! eigendecomposition of the truncated `|D| + P`.

use super::{weight, BandedOp, CircleModel};
use crate::jetring::{Jet, LaurentJet};
use crate::ncalg::Word;
use crate::scalar::F64C;
use crate::zetatrace::TraceError;
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::zeta::BERNOULLI;

/// Truncated power series over f64 complex coefficients.
#[derive(Debug, Clone)]
struct Ps(Vec<Complex64>);

impl Ps {
    fn zero(len: usize) -> Self {
        Ps(vec![Complex64::new(0.0, 0.0); len])
    }

    fn constant(v: f64, len: usize) -> Self {
        let mut p = Ps::zero(len);
        p.0[0] = Complex64::new(v, 0.0);
        p
    }

    /// The affine series `v0 + Δ`.
    fn variable(v0: f64, len: usize) -> Self {
        let mut p = Ps::constant(v0, len);
        if len > 1 {
            p.0[1] = Complex64::new(1.0, 0.0);
        }
        p
    }

    fn len(&self) -> usize {
        self.0.len()
    }

    fn add(&self, o: &Ps) -> Ps {
        Ps(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    fn sub(&self, o: &Ps) -> Ps {
        Ps(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    fn scale(&self, c: Complex64) -> Ps {
        Ps(self.0.iter().map(|a| a * c).collect())
    }

    fn mul(&self, o: &Ps) -> Ps {
        let len = self.len().min(o.len());
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for i in 0..len {
            if self.0[i].norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..len - i {
                out[i + j] += self.0[i] * o.0[j];
            }
        }
        Ps(out)
    }

    /// Square root with positive real leading coefficient.
    fn sqrt(&self) -> Ps {
        let len = self.len();
        let mut s = vec![Complex64::new(0.0, 0.0); len];
        s[0] = self.0[0].sqrt();
        for k in 1..len {
            let mut acc = self.0[k];
            for i in 1..k {
                acc -= s[i] * s[k - i];
            }
            s[k] = acc / (2.0 * s[0]);
        }
        Ps(s)
    }

    /// Natural log of a series with positive real leading coefficient:
    /// integrate `u'/u`.
    fn ln(&self) -> Ps {
        let len = self.len();
        // d = u'/u by series division
        let mut d = vec![Complex64::new(0.0, 0.0); len];
        for k in 0..len - 1 {
            let mut acc = (k as f64 + 1.0) * self.0[k + 1];
            for i in 0..k {
                acc -= d[i] * self.0[k - i];
            }
            d[k] = acc / self.0[0];
        }
        let mut l = vec![Complex64::new(0.0, 0.0); len];
        l[0] = self.0[0].ln();
        for k in 1..len {
            l[k] = d[k - 1] / k as f64;
        }
        Ps(l)
    }

    /// Exponential.
    fn exp(&self) -> Ps {
        let len = self.len();
        let mut e = vec![Complex64::new(0.0, 0.0); len];
        e[0] = self.0[0].exp();
        for k in 1..len {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 1..=k {
                acc += i as f64 * self.0[i] * e[k - i];
            }
            e[k] = acc / k as f64;
        }
        Ps(e)
    }

    fn pow_int(&self, e: u32) -> Ps {
        let mut acc = Ps::constant(1.0, self.len());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Divide by the series variable (requires a vanishing constant term).
    fn shift_down(&self) -> Ps {
        debug_assert!(self.0[0].norm() < 1e-9);
        let mut v = self.0[1..].to_vec();
        v.push(Complex64::new(0.0, 0.0));
        Ps(v)
    }
}

/// `(1+x²)`-style band factor as a series in the expansion variable, where
/// `x = base + Δ + c`.
fn one_plus_sq(base: f64, c: f64, len: usize) -> Ps {
    let x = Ps::variable(base + c, len);
    x.mul(&x).add(&Ps::constant(1.0, len))
}

/// The word diagonal `d_±(t)` as a power series in `Δt` at `t = t0`.
/// `branch` is `+1` for `d(t)` and `-1` for `d(-t)`.
fn diag_series(
    model: &CircleModel,
    w: &Word,
    t0: f64,
    branch: i64,
    len: usize,
) -> Result<Ps, TraceError> {
    let mut acc = Ps::constant(1.0, len);
    for f in model.factor_data(w)? {
        let (c_hi, c_lo) = if branch > 0 {
            ((f.shift + f.mode) as f64, f.shift as f64)
        } else {
            // d(-t): √(1+(t - c)²) by evenness
            ((-f.shift - f.mode) as f64, (-f.shift) as f64)
        };
        let diff = one_plus_sq(t0, c_hi, len)
            .sqrt()
            .sub(&one_plus_sq(t0, c_lo, len).sqrt());
        acc = acc.mul(&diff.pow_int(f.delta_power)).scale(Complex64::new(
            f.bracket_scale as f64,
            0.0,
        ));
    }
    Ok(acc)
}

/// `d_±(1/u)` as a series in `u` at 0 (analytic there).
fn diag_series_at_infinity(
    model: &CircleModel,
    w: &Word,
    branch: i64,
    len: usize,
) -> Result<Ps, TraceError> {
    let mut acc = Ps::constant(1.0, len);
    for f in model.factor_data(w)? {
        let (c_hi, c_lo) = if branch > 0 {
            ((f.shift + f.mode) as f64, f.shift as f64)
        } else {
            ((-f.shift - f.mode) as f64, (-f.shift) as f64)
        };
        // √(1+(1/u + c)²) = √(u² + (1+cu)²) / u
        let sq = |c: f64| {
            let u = Ps::variable(0.0, len);
            let lin = Ps::constant(1.0, len).add(&u.scale(Complex64::new(c, 0.0)));
            u.mul(&u).add(&lin.mul(&lin)).sqrt()
        };
        let diff = sq(c_hi).sub(&sq(c_lo)).shift_down();
        acc = acc.mul(&diff.pow_int(f.delta_power)).scale(Complex64::new(
            f.bracket_scale as f64,
            0.0,
        ));
    }
    Ok(acc)
}

/// `(1+v²)^{-s/2}` with `v` the series variable, as a vector over the
/// s-jet index of series in `v`: entry `j` is `(1+v²)^{-s0/2} (-L/2)^j/j!`
/// with `L = ln(1+v²)`.
fn weight_power_tower(v_sq_plus_1: &Ps, s0: Complex64, s_len: usize) -> Vec<Ps> {
    let l = v_sq_plus_1.ln();
    let base = l.scale(-s0 / 2.0).exp();
    let mut tower = Vec::with_capacity(s_len);
    let mut cur = base;
    for j in 0..s_len {
        if j > 0 {
            cur = cur.mul(&l).scale(Complex64::new(-0.5 / j as f64, 0.0));
        }
        tower.push(cur.clone());
    }
    tower
}

/// Hurwitz-style tail `Σ_{ν>N} d_±(ν)(1+ν²)^{-s/2}` as a Laurent germ in
/// `s` at `s0`, by Euler–Maclaurin with the boundary integral continued in
/// closed form.
fn tail_germ(
    model: &CircleModel,
    w: &Word,
    branch: i64,
    s0: Complex64,
    k_top: usize,
) -> Result<LaurentJet<F64C>, TraceError> {
    let n_split: f64 = 40.0;
    let s_len = k_top + 2;
    let em_terms = model.em_depth.min(12);
    let t_len = 2 * em_terms + 2;

    // boundary data at t = N
    let d_t = diag_series(model, w, n_split, branch, t_len)?;
    let one_plus_t2 = {
        let t = Ps::variable(n_split, t_len);
        t.mul(&t).add(&Ps::constant(1.0, t_len))
    };
    let tower = weight_power_tower(&one_plus_t2, s0, s_len);

    // -g(N)/2 - Σ B_{2i}/(2i)! g^{(2i-1)}(N), per s-jet index
    let mut corr = vec![Complex64::new(0.0, 0.0); s_len];
    for (j, slot) in corr.iter_mut().enumerate() {
        let g_j = d_t.mul(&tower[j]);
        let mut acc = -0.5 * g_j.0[0];
        let mut fact = 1.0f64; // (2i)!
        let mut deriv_fact = 1.0f64; // (2i-1)!
        for i in 1..=em_terms {
            fact *= (2 * i - 1) as f64 * (2 * i) as f64;
            deriv_fact = 1.0;
            for r in 1..(2 * i) {
                deriv_fact *= r as f64;
            }
            let (bn, bd) = BERNOULLI[i - 1];
            let b = bn as f64 / bd as f64;
            acc -= b / fact * g_j.0[2 * i - 1] * deriv_fact;
        }
        *slot = acc;
    }
    let mut germ = LaurentJet::from_jet(&Jet::new(s0, corr).truncate(k_top + 1));

    // continued boundary integral
    let r_len = 18 + k_top;
    let d_u = diag_series_at_infinity(model, w, branch, r_len)?;
    let one_plus_u2 = {
        let u = Ps::variable(0.0, r_len);
        u.mul(&u).add(&Ps::constant(1.0, r_len))
    };
    let tower_u = weight_power_tower(&one_plus_u2, s0, s_len);
    let chi: Vec<Ps> = tower_u.iter().map(|t| d_u.mul(t)).collect();

    let ln_n = n_split.ln();
    for r in 0..r_len {
        // s-jet of χ_r
        let coeffs: Vec<Complex64> = (0..s_len).map(|j| chi[j].0[r]).collect();
        if coeffs.iter().all(|c| c.norm() == 0.0) {
            continue;
        }
        let chi_jet = Jet::new(s0, coeffs);
        // N^{-(s-1+r)} jet
        let scale = (-(s0 - 1.0 + r as f64) * ln_n).exp();
        let mut pow_coeffs = Vec::with_capacity(s_len);
        let mut term = scale;
        for i in 0..s_len {
            pow_coeffs.push(term);
            term = term * Complex64::new(-ln_n, 0.0) / (i as f64 + 1.0);
        }
        let pow_jet = Jet::new(s0, pow_coeffs);
        // 1/(s-1+r): explicit pole when s0 = 1-r
        let recip = if s0.im == 0.0 && s0.re == 1.0 - r as f64 {
            let mut c = vec![Complex64::new(0.0, 0.0); s_len + 1];
            c[0] = Complex64::new(1.0, 0.0);
            LaurentJet::new(s0, 1, c)
        } else {
            let d = s0 - 1.0 + r as f64;
            let inv = 1.0 / d;
            let mut c = Vec::with_capacity(s_len);
            let mut t = inv;
            for _ in 0..s_len {
                c.push(t);
                t = -t * inv;
            }
            LaurentJet::from_jet(&Jet::new(s0, c))
        };
        let piece = recip
            .mul_jet(&pow_jet)
            .unwrap()
            .mul_jet(&chi_jet)
            .unwrap()
            .truncate_top(k_top as i64);
        germ = germ.add(&piece).unwrap();
    }
    Ok(germ)
}

/// Meromorphic germ of the word trace at `center`, computed by the
/// independent route. Words with nonzero net shift give the zero germ.
pub fn oracle_trace(
    model: &CircleModel,
    w: &Word,
    center: Complex64,
    k_top: usize,
) -> Result<LaurentJet<F64C>, TraceError> {
    if model.net_shift(w)? != 0 {
        return Ok(LaurentJet::zero(center, k_top));
    }
    let n_split: i64 = 40;
    let s_len = k_top + 2;
    let mut head = Jet::zero(center, s_len);
    for n in -n_split..=n_split {
        let d = model.diag_value(w, n)?;
        if d == 0.0 {
            continue;
        }
        let ln = weight(n).ln();
        let scale = (-center * ln).exp() * d;
        let mut coeffs = Vec::with_capacity(s_len);
        let mut term = scale;
        for i in 0..s_len {
            coeffs.push(term);
            term = term * Complex64::new(-ln, 0.0) / (i as f64 + 1.0);
        }
        head = head.add(&Jet::new(center, coeffs)).unwrap();
    }
    let mut germ = LaurentJet::from_jet(&head.truncate(k_top + 1));
    germ = germ.add(&tail_germ(model, w, 1, center, k_top)?).unwrap();
    germ = germ.add(&tail_germ(model, w, -1, center, k_top)?).unwrap();
    Ok(germ)
}

/// `Tr(A · (|D|+P)^{-z})` by dense symmetric eigendecomposition of the
/// truncated perturbed weight. `A` and `P` must be real and `P` symmetric.
pub fn perturbed_eigen_trace(
    a: &BandedOp,
    p: &BandedOp,
    z: Complex64,
) -> Result<Complex64, TraceError> {
    assert_eq!(a.cutoff, p.cutoff);
    let co = p.cutoff as i64;
    let dim = p.dim();
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for n in -co..=co {
        m[((n + co) as usize, (n + co) as usize)] = weight(n);
    }
    for (&k, v) in &p.bands {
        for (c, &x) in v.iter().enumerate() {
            let n = c as i64 - co;
            let row = n + k;
            if row.abs()
                <= co
            {
                m[((row + co) as usize, c)] += x;
            }
        }
    }
    let asym = (&m - &m.transpose()).abs().max();
    if asym > 1e-12 {
        return Err(TraceError::Backend(format!(
            "perturbed weight must be symmetric (asymmetry {asym:.2e})"
        )));
    }
    let eig = m.symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(TraceError::ModelContract(format!(
            "perturbed weight not positive: min eigenvalue {min:.3e}"
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        let v = eig.eigenvectors.column(i);
        // w = A v via the bands
        let mut dot = 0.0f64;
        for (&k, band) in &a.bands {
            for c in 0..dim {
                let n = c as i64 - co;
                let row = n + k;
                if row.abs() > co {
                    continue;
                }
                dot += v[(row + co) as usize] * band[c] * v[c];
            }
        }
        acc += dot * (-z * eig.eigenvalues[i].ln()).exp();
    }
    Ok(acc)
}
