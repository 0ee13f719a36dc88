use super::oracle::{oracle_trace, perturbed_eigen_trace};
use super::*;
use crate::ncalg::Generator;
use crate::zetatrace::trace_germ;
use num_traits::ToPrimitive;

fn model() -> CircleModel {
    CircleModel::new(256, 12, 12, Backend::Float).unwrap()
}

fn u() -> Generator {
    Generator::plain(GenId(0))
}

fn v() -> Generator {
    Generator::plain(GenId(1))
}

fn w(gens: Vec<Generator>) -> Word {
    Word::from_gens(gens)
}

#[test]
fn exact_backend_is_rejected() {
    assert!(matches!(
        CircleModel::new(64, 10, 10, Backend::Exact),
        Err(TraceError::Backend(_))
    ));
}

#[test]
fn unit_word_realizes_as_identity() {
    let m = model();
    let op = m.realize(&Word::unit()).unwrap();
    assert_eq!(op.entry(0, 0), 1.0);
    assert_eq!(op.entry(5, 5), 1.0);
    assert_eq!(op.entry(1, 0), 0.0);
}

#[test]
fn delta_band_entries() {
    // δ(e^{iθ}) has entries √(1+(n+1)²) - √(1+n²) on the +1 band
    let m = model();
    let op = m.realize(&w(vec![u().delta()])).unwrap();
    for n in [-3i64, 0, 7] {
        let expect = weight(n + 1) - weight(n);
        assert!((op.entry(n + 1, n) - expect).abs() < 1e-15);
    }
}

#[test]
fn bracket_generator_scales_by_mode() {
    let m = model();
    let plain = m.realize(&w(vec![v()])).unwrap();
    let bracket = m.realize(&w(vec![Generator::bracket(GenId(1))])).unwrap();
    for n in [-2i64, 0, 4] {
        assert!((bracket.entry(n - 1, n) + plain.entry(n - 1, n)).abs() < 1e-15);
    }
}

#[test]
fn delta_consistency_with_matrix_commutator() {
    // realize(δ(w)) must equal [diag √(1+n²), realize(w)] on interior modes
    let m = model();
    for word in [
        w(vec![u()]),
        w(vec![v()]),
        w(vec![u(), v()]),
        w(vec![u().delta(), v()]),
        w(vec![u(), u()]),
    ] {
        let realized = m.realize(&word).unwrap();
        let lhs = m
            .realize_element(&crate::ncalg::BElement::<F64C>::from_word(word.clone()).delta())
            .unwrap();
        let rhs = realized.commutator_with_weight();
        let margin = 4;
        assert!(
            lhs.interior_max_diff(&rhs, margin) < 1e-10,
            "word {word}: diff {}",
            lhs.interior_max_diff(&rhs, margin)
        );
    }
}

#[test]
fn cutoff_too_small_is_reported() {
    let m = CircleModel::new(2, 10, 10, Backend::Float)
        .unwrap()
        .with_generator(7, 5);
    let word = w(vec![Generator::plain(GenId(7))]);
    assert!(matches!(
        m.realize(&word),
        Err(TraceError::CutoffTooSmall { .. })
    ));
}

#[test]
fn unknown_generator_is_reported() {
    let m = model();
    assert!(matches!(
        m.realize(&w(vec![Generator::plain(GenId(42))])),
        Err(TraceError::UnknownGenerator(42))
    ));
}

#[test]
fn diag_asymptotics_unit_word() {
    let m = model();
    let (plus, minus) = m.diag_asymptotics(&Word::unit(), 8).unwrap();
    assert_eq!(plus.coeff(0), rat(1, 1));
    assert_eq!(minus.coeff(0), rat(1, 1));
    for r in 1..8 {
        assert!(plus.coeff(-r).is_zero());
    }
}

#[test]
fn diag_asymptotics_delta_pair_leading_term() {
    // δ(e^{iθ})·δ(e^{-iθ}): d(n) = (√(1+(n+1)²)-√(1+n²))·(√(1+n²)-√(1+(n+1)²))
    //                             = -(√(1+(n+1)²)-√(1+n²))², leading -1
    let m = model();
    let word = w(vec![u().delta(), v().delta()]);
    let (plus, _minus) = m.diag_asymptotics(&word, 8).unwrap();
    assert_eq!(plus.coeff(0), rat(-1, 1));
    // numeric agreement with the actual diagonal far out
    let d = m.diag_value(&word, 4000).unwrap();
    let mut approx = 0.0;
    for r in 0..8 {
        approx += plus.coeff(-r).to_f64().unwrap() * (4000.0f64).powi(-(r as i32));
    }
    assert!((d - approx).abs() < 1e-12, "d={d} approx={approx}");
}

#[test]
fn parity_cancellation_between_branches() {
    let m = model();
    // even total δ-power: odd combined coefficients vanish exactly
    let even = w(vec![v().delta(), u().delta()]);
    let (p, mi) = m.diag_asymptotics(&even, 9).unwrap();
    let comb = p.add(&mi);
    for r in (1..9).step_by(2) {
        assert!(comb.coeff(-r).is_zero(), "odd coefficient {r} survived");
    }
    // odd total δ-power: even combined coefficients vanish exactly
    let odd = w(vec![u().delta(), v()]);
    let (p, mi) = m.diag_asymptotics(&odd, 9).unwrap();
    let comb = p.add(&mi);
    for r in (0..9).step_by(2) {
        assert!(comb.coeff(-r).is_zero(), "even coefficient {r} survived");
    }
}

#[test]
fn weight_trace_residue_at_one() {
    // Σ (1+n²)^{-w/2} has a simple pole at w = 1 with residue 2
    let m = model();
    let g = m
        .word_germ(&Word::unit(), Complex64::new(1.0, 0.0), 3)
        .unwrap();
    assert_eq!(g.pole_order(), 1);
    assert!((g.coeff_at(-1).re - 2.0).abs() < 1e-10, "{}", g.coeff_at(-1).re);
    assert!(g.coeff_at(-1).im.abs() < 1e-12);
}

#[test]
fn weight_trace_residue_at_minus_one() {
    let m = model();
    let g = m
        .word_germ(&Word::unit(), Complex64::new(-1.0, 0.0), 3)
        .unwrap();
    assert_eq!(g.pole_order(), 1);
    assert!((g.coeff_at(-1).re - 1.0).abs() < 1e-10, "{}", g.coeff_at(-1).re);
}

#[test]
fn weight_trace_value_at_zero_vanishes() {
    // 1 + 2ζ(0) = 0
    let m = model();
    let g = m
        .word_germ(&Word::unit(), Complex64::new(0.0, 0.0), 3)
        .unwrap();
    assert_eq!(g.pole_order(), 0);
    assert!(g.coeff_at(0).norm() < 1e-10, "{}", g.coeff_at(0));
}

#[test]
fn weight_trace_matches_convergent_sum() {
    // Tr(|D|^{-4}) by direct summation
    let m = model();
    let g = m
        .word_germ(&Word::unit(), Complex64::new(4.0, 0.0), 1)
        .unwrap();
    let mut direct = 0.0;
    for n in 1..2_000_000i64 {
        direct += (1.0 + (n * n) as f64).powi(-2);
    }
    let direct = 1.0 + 2.0 * direct;
    assert!((g.coeff_at(0).re - direct).abs() < 1e-9);
}

#[test]
fn nonzero_net_shift_gives_zero_germ() {
    let m = model();
    let g = m
        .word_germ(&w(vec![u()]), Complex64::new(2.0, 0.0), 2)
        .unwrap();
    assert!(g.is_zero());
}

#[test]
fn pole_simplicity_across_scanned_centers() {
    let m = model();
    let words = [
        Word::unit(),
        w(vec![u(), v()]),
        w(vec![u().delta(), v()]),
        w(vec![u().delta(), v().delta()]),
    ];
    for word in &words {
        for c in [1.0, 0.0, -1.0, -2.0, -3.0] {
            let g = m.word_germ(word, Complex64::new(c, 0.0), 2).unwrap();
            assert!(g.pole_order() <= 1, "word {word} center {c}");
        }
    }
}

#[test]
fn oracle_agrees_in_convergence_region() {
    let m = model();
    let words = [
        Word::unit(),
        w(vec![u(), v()]),
        w(vec![u().delta(), v()]),
        w(vec![u().delta(), v().delta()]),
        w(vec![u(), u(), v(), v()]),
    ];
    for word in &words {
        for &(re, im) in &[(2.5, 0.0), (3.0, 0.7), (4.5, -0.3), (6.0, 0.0)] {
            let c = Complex64::new(re, im);
            let a = m.word_germ(word, c, 1).unwrap();
            let b = oracle_trace(&m, word, c, 1).unwrap();
            let denom = a.coeff_at(0).norm().max(1e-30);
            let rel = (a.coeff_at(0) - b.coeff_at(0)).norm() / denom;
            assert!(rel < 1e-10, "word {word} at {c}: rel {rel:.3e}");
        }
    }
}

#[test]
fn oracle_agrees_at_continuation_points() {
    let m = model();
    let word = w(vec![u().delta(), v().delta()]);
    for c in [1.0, 0.5, 0.0, -0.5, -1.0] {
        let a = m.word_germ(&word, Complex64::new(c, 0.0), 2).unwrap();
        let b = oracle_trace(&m, &word, Complex64::new(c, 0.0), 2).unwrap();
        assert_eq!(a.pole_order(), b.pole_order(), "center {c}");
        for e in -(a.pole_order() as i64)..=1 {
            let diff = (a.coeff_at(e) - b.coeff_at(e)).norm();
            assert!(diff < 1e-9, "word at {c}, exp {e}: diff {diff:.3e}");
        }
    }
}

#[test]
fn oracle_reproduces_unit_word_residues() {
    let m = model();
    let g1 = oracle_trace(&m, &Word::unit(), Complex64::new(1.0, 0.0), 2).unwrap();
    assert_eq!(g1.pole_order(), 1);
    assert!((g1.coeff_at(-1).re - 2.0).abs() < 1e-10);
    let gm1 = oracle_trace(&m, &Word::unit(), Complex64::new(-1.0, 0.0), 2).unwrap();
    assert!((gm1.coeff_at(-1).re - 1.0).abs() < 1e-10);
    let g0 = oracle_trace(&m, &Word::unit(), Complex64::new(0.0, 0.0), 2).unwrap();
    assert!(g0.coeff_at(0).norm() < 1e-10);
}

#[test]
fn finite_matrix_trace_is_cyclic() {
    // Tr(B·A·F) = Tr(A·F·B) for the truncated matrices, F = |D|^{-s}
    let m = model();
    let a = m.realize(&w(vec![u().delta()])).unwrap();
    let b = m.realize(&w(vec![v()])).unwrap();
    let s = Complex64::new(3.0, 0.4);
    let co = m.mode_cutoff as i64;
    let f = {
        let mut diag = vec![0.0; 2 * m.mode_cutoff + 1];
        for (c, slot) in diag.iter_mut().enumerate() {
            let n = c as i64 - co;
            // real part only used in this sanity check
            *slot = (-(s.re) * weight(n).ln()).exp();
        }
        let mut op = BandedOp::zero(m.mode_cutoff);
        op.set_band(0, diag);
        op
    };
    let lhs = b.mul(&a).mul(&f);
    let rhs = a.mul(&f).mul(&b);
    let tl = lhs.bands.get(&0).map(|v| v.iter().sum::<f64>()).unwrap_or(0.0);
    let tr = rhs.bands.get(&0).map(|v| v.iter().sum::<f64>()).unwrap_or(0.0);
    assert!((tl - tr).abs() < 1e-12 * tl.abs().max(1.0));
}

#[test]
fn eigen_oracle_matches_germ_route_unperturbed() {
    // with P = 0 the dense route is a plain truncated eigensum; the germ
    // route continues the full sum, so they agree up to the cutoff tail
    let m = CircleModel::new(96, 12, 12, Backend::Float).unwrap();
    let z = Complex64::new(6.0, 0.0);
    let a_op = m.realize(&w(vec![u(), v()])).unwrap();
    let p_op = BandedOp::zero(96);
    let dense = perturbed_eigen_trace(&a_op, &p_op, z).unwrap();
    let germ = m.word_germ(&w(vec![u(), v()]), z, 1).unwrap();
    let rel = (germ.coeff_at(0) - dense).norm() / dense.norm();
    assert!(rel < 1e-9, "rel {rel:.3e}");
}

#[test]
fn eigen_oracle_matches_symbolic_expansion_for_scalar_shift() {
    // P = c·1 commutes with everything: the expansion collapses to the
    // plain binomial series Σ C(-z,n) cⁿ |D|^{-z-n}, converging like cⁿ,
    // and the dense eigenvalues are exactly √(1+n²)+c
    use crate::ncalg::BElement;
    use crate::symbols::{CalcCtx, Symbol};
    use crate::zetatrace::standard_perturbation;

    let m = CircleModel::new(128, 12, 12, Backend::Float).unwrap();
    let ctx = CalcCtx::default().with_jet_len(10).with_max_delta(16);
    let c = 0.02;
    let trunc = 8;
    let p_elt = BElement::<F64C>::unit().scale(&Complex64::new(c, 0.0));
    let p_sym = Symbol::from_element(p_elt.clone(), trunc, &ctx);
    let pert = standard_perturbation(&p_sym, trunc, &ctx).unwrap();

    let z = Complex64::new(6.0, 0.0);
    let symbolic = trace_germ(&pert, &z, &m, 1).unwrap().germ.coeff_at(0);

    let a_op = m.realize(&Word::unit()).unwrap();
    let p_op = m.realize_element(&p_elt).unwrap();
    let dense = perturbed_eigen_trace(&a_op, &p_op, z).unwrap();
    let rel = (symbolic - dense).norm() / dense.norm();
    assert!(rel < 1e-8, "symbolic {symbolic} dense {dense} rel {rel:.3e}");
}

#[test]
fn eigen_oracle_against_cosine_perturbation_is_consistent() {
    // for a genuine band perturbation the expansion terms at Re z = 6 grow
    // until |k|+n ≈ z / ln(1/ρ) with ρ = √2-1, so a depth-7 truncation
    // carries a visible remainder; this check documents magnitude-level
    // agreement, while the sharp gates are the truncation-exact identity
    // checks and the exact cross-validation of the two expansion routes
    use crate::ncalg::BElement;
    use crate::symbols::{CalcCtx, Symbol};
    use crate::zetatrace::standard_perturbation;

    let m = CircleModel::new(96, 12, 12, Backend::Float).unwrap();
    let ctx = CalcCtx::default().with_jet_len(9).with_word_len(10).with_max_delta(16);
    let eps = 0.02;
    let trunc = 7;
    let p_elt = BElement::<F64C>::from_word(w(vec![u()]))
        .scale(&Complex64::new(eps / 2.0, 0.0))
        .add(&BElement::from_word(w(vec![v()])).scale(&Complex64::new(eps / 2.0, 0.0)));
    let p_sym = Symbol::from_element(p_elt.clone(), trunc, &ctx);
    let pert = standard_perturbation(&p_sym, trunc, &ctx).unwrap();

    let z = Complex64::new(6.0, 0.0);
    let symbolic = trace_germ(&pert, &z, &m, 1).unwrap().germ.coeff_at(0);

    let a_op = m.realize(&Word::unit()).unwrap();
    let p_op = m.realize_element(&p_elt).unwrap();
    let dense = perturbed_eigen_trace(&a_op, &p_op, z).unwrap();
    let rel = (symbolic - dense).norm() / dense.norm();
    assert!(rel < 2e-3, "symbolic {symbolic} dense {dense} rel {rel:.3e}");
}
