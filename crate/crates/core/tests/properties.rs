use nalgebra::DVector;
use proptest::prelude::*;

use slicecalc::calculus::{
    omega_calc, s_resolvent_left, s_resolvent_right, ContourSpec, SectorSpec,
};
use slicecalc::linalg::{ModuleVector, RightLinearOperator};
use slicecalc::relations::LinearRelation;
use slicecalc::slice::{make_polynomial, make_real_polynomial, Side};
use slicecalc::{CliffordElement, ImaginaryUnit, Paravector};

/// Blade product by bitmask: sign from the number of swaps needed to sort
/// the concatenated index word, squares contribute `-1`.
fn blade_product(a: u32, b: u32) -> (f64, u32) {
    let mut swaps = 0;
    let mut x = a >> 1;
    while x != 0 {
        swaps += (x & b).count_ones();
        x >>= 1;
    }
    let squares = (a & b).count_ones();
    let sign = if (swaps + squares).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    (sign, a ^ b)
}

fn masks(n: usize) -> Vec<u32> {
    CliffordElement::basis_labels(n)
        .iter()
        .map(|word| word.iter().fold(0u32, |m, &i| m | 1 << (i - 1)))
        .collect()
}

fn oracle_mul(a: &CliffordElement, b: &CliffordElement) -> Vec<f64> {
    let n = a.n();
    let m = masks(n);
    let pos = |mask: u32| m.iter().position(|&x| x == mask).unwrap();
    let mut out = vec![0.0; 1 << n];
    for (i, &x) in a.coeffs().iter().enumerate() {
        for (j, &y) in b.coeffs().iter().enumerate() {
            let (sign, mask) = blade_product(m[i], m[j]);
            out[pos(mask)] += sign * x * y;
        }
    }
    out
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn element(n: usize) -> impl Strategy<Value = CliffordElement> {
    prop::collection::vec(-2.0f64..2.0, 1 << n)
        .prop_map(move |c| CliffordElement::from_coeffs(n, c).unwrap())
}

fn paravector(n: usize) -> impl Strategy<Value = Paravector> {
    (-2.0f64..2.0, prop::collection::vec(-2.0f64..2.0, n))
        .prop_map(|(s0, v)| Paravector::new(s0, v).unwrap())
}

fn operator(n: usize, d: usize) -> impl Strategy<Value = RightLinearOperator> {
    prop::collection::vec(element(n), d * d).prop_map(move |e| {
        RightLinearOperator::new(e.chunks(d).map(|r| r.to_vec()).collect()).unwrap()
    })
}

fn module_vector(n: usize, d: usize) -> impl Strategy<Value = ModuleVector> {
    prop::collection::vec(element(n), d).prop_map(|e| ModuleVector::new(e).unwrap())
}

fn sized_element() -> impl Strategy<Value = (CliffordElement, CliffordElement, CliffordElement)> {
    (1usize..=4).prop_flat_map(|n| (element(n), element(n), element(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_matches_blade_oracle((a, b, _) in sized_element()) {
        let got = a.mul(&b).unwrap();
        prop_assert!(max_diff(got.coeffs(), &oracle_mul(&a, &b)) < 1e-12);
    }

    #[test]
    fn product_is_associative((a, b, c) in sized_element()) {
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(max_diff(left.coeffs(), right.coeffs()) < 1e-11);
    }

    #[test]
    fn generators_anticommute(n in 1usize..=5) {
        for i in 1..=n {
            let ei = CliffordElement::generator(n, i).unwrap();
            let sq = ei.mul(&ei).unwrap();
            prop_assert!(max_diff(sq.coeffs(), CliffordElement::scalar(n, -1.0).coeffs()) == 0.0);
            for j in (i + 1)..=n {
                let ej = CliffordElement::generator(n, j).unwrap();
                let sum = &ei.mul(&ej).unwrap() + &ej.mul(&ei).unwrap();
                prop_assert!(sum.coeffs().iter().all(|&x| x == 0.0));
            }
        }
    }

    #[test]
    fn conjugation_reverses_products((a, b, _) in sized_element()) {
        let lhs = a.mul(&b).unwrap().conj();
        let rhs = b.conj().mul(&a.conj()).unwrap();
        prop_assert!(max_diff(lhs.coeffs(), rhs.coeffs()) < 1e-12);
        prop_assert!(max_diff(a.conj().conj().coeffs(), a.coeffs()) == 0.0);
    }

    #[test]
    fn paravector_norm_is_multiplicative(
        (s, t) in (1usize..=3).prop_flat_map(|n| (paravector(n), paravector(n)))
    ) {
        let (se, te) = (s.to_element(), t.to_element());
        let prod = se.mul(&te).unwrap();
        prop_assert!((prod.abs() - s.abs() * t.abs()).abs() < 1e-12 * (1.0 + prod.abs()));
        let sq = se.mul(&se.conj()).unwrap();
        prop_assert!((sq.scalar_part() - s.abs() * s.abs()).abs() < 1e-12 * (1.0 + sq.abs()));
        prop_assert!(max_diff(&sq.coeffs()[1..], &vec![0.0; sq.coeffs().len() - 1]) < 1e-12);
    }

    #[test]
    fn regular_matrices_represent_products((a, b, _) in sized_element()) {
        let b_vec = DVector::from_column_slice(b.coeffs());
        let left = a.left_matrix() * &b_vec;
        prop_assert!(max_diff(left.as_slice(), a.mul(&b).unwrap().coeffs()) < 1e-12);
        let right = a.right_matrix() * &b_vec;
        prop_assert!(max_diff(right.as_slice(), b.mul(&a).unwrap().coeffs()) < 1e-12);
    }
}

fn sized_operator_pair() -> impl Strategy<
    Value = (
        RightLinearOperator,
        RightLinearOperator,
        ModuleVector,
        CliffordElement,
    ),
> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(n, d)| {
        (
            operator(n, d),
            operator(n, d),
            module_vector(n, d),
            element(n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operators_are_right_linear((t, _, v, a) in sized_operator_pair()) {
        let lhs = t.apply(&v.scale_right(&a).unwrap()).unwrap();
        let rhs = t.apply(&v).unwrap().scale_right(&a).unwrap();
        prop_assert!(max_diff(lhs.embed().as_slice(), rhs.embed().as_slice()) < 1e-11);
    }

    #[test]
    fn entrywise_action_matches_embedding((t, _, v, _) in sized_operator_pair()) {
        let d = t.d();
        let n = t.n();
        let mut expect = Vec::new();
        for i in 0..d {
            let mut acc = CliffordElement::zero(n);
            for j in 0..d {
                acc = &acc + &t.entry(i, j).mul(&v.entries()[j]).unwrap();
            }
            expect.extend_from_slice(acc.coeffs());
        }
        let got = t.embedding() * v.embed();
        prop_assert!(max_diff(got.as_slice(), &expect) < 1e-11);
    }

    #[test]
    fn embedding_is_multiplicative((t, s, _, _) in sized_operator_pair()) {
        let ts = t.compose(&s).unwrap();
        let prod = t.embedding() * s.embedding();
        prop_assert!((ts.embedding() - prod).amax() < 1e-11);
        let back = RightLinearOperator::from_embedding(t.n(), t.d(), ts.embedding()).unwrap();
        prop_assert!(back.distance(&ts).unwrap() < 1e-12);
    }

    #[test]
    fn graphs_round_trip((t, s, _, a) in sized_operator_pair()) {
        let gt = LinearRelation::from_operator(&t, None).unwrap();
        let gs = LinearRelation::from_operator(&s, None).unwrap();
        let scale = 1.0 + t.norm();
        prop_assert!(gt.to_operator().unwrap().distance(&t).unwrap() < 1e-10 * scale);
        let (gram, stab) = gt.invariant_residuals();
        prop_assert!(gram < 1e-12 && stab < 1e-10);

        let sum = gt.sum(&gs).unwrap();
        let direct = LinearRelation::from_operator(&t.add(&s).unwrap(), None).unwrap();
        prop_assert!(sum.distance(&direct).unwrap() < 1e-9);

        let comp = gt.compose(&gs).unwrap();
        let direct = LinearRelation::from_operator(&t.compose(&s).unwrap(), None).unwrap();
        prop_assert!(comp.distance(&direct).unwrap() < 1e-9);

        let scaled = gt.scale_left(&a).unwrap();
        let direct = LinearRelation::from_operator(&t.scale_left(&a).unwrap(), None).unwrap();
        prop_assert!(scaled.distance(&direct).unwrap() < 1e-9);

        prop_assert!(gt.closure().rel_eq(&gt));
        prop_assert!(gt.inverse().inverse().rel_eq(&gt));
    }

    #[test]
    fn left_polynomials_evaluate_termwise(
        (coeffs, s) in (1usize..=3).prop_flat_map(|n| (prop::collection::vec(element(n), 1..4), paravector(n)))
    ) {
        let n = s.n;
        let se = s.to_element();
        let mut left = CliffordElement::zero(n);
        let mut right = CliffordElement::zero(n);
        let mut power = CliffordElement::one(n);
        for c in &coeffs {
            left = &left + &power.mul(c).unwrap();
            right = &right + &c.mul(&power).unwrap();
            power = power.mul(&se).unwrap();
        }
        let f = make_polynomial(coeffs.clone(), Side::Left).unwrap();
        let g = make_polynomial(coeffs, Side::Right).unwrap();
        let scale = 1.0 + left.abs() + right.abs();
        prop_assert!(max_diff(f.eval(&s).unwrap().coeffs(), left.coeffs()) < 1e-11 * scale);
        prop_assert!(max_diff(g.eval(&s).unwrap().coeffs(), right.coeffs()) < 1e-11 * scale);
    }

    #[test]
    fn left_slice_values_follow_from_one_slice(
        (coeffs, x, y, i, j) in (2usize..=3).prop_flat_map(|n| (
            prop::collection::vec(element(n), 1..4),
            -2.0f64..2.0,
            0.1f64..2.0,
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(-1.0f64..1.0, n),
        ))
    ) {
        prop_assume!(i.iter().map(|v| v * v).sum::<f64>() > 0.01);
        prop_assume!(j.iter().map(|v| v * v).sum::<f64>() > 0.01);
        let f = make_polynomial(coeffs, Side::Left).unwrap();
        let (iu, ju) = (ImaginaryUnit::normalized(i).unwrap(), ImaginaryUnit::normalized(j).unwrap());
        let n = iu.n();
        let plus = f.eval_on_slice(x, y, &iu);
        let minus = f.eval_on_slice(x, -y, &iu);
        let ji = ju.to_element().mul(&iu.to_element()).unwrap();
        let one = CliffordElement::one(n);
        let half = 0.5;
        let a = (&one - &ji).scale(half);
        let b = (&one + &ji).scale(half);
        let rebuilt = &a.mul(&plus).unwrap() + &b.mul(&minus).unwrap();
        let direct = f.eval_on_slice(x, y, &ju);
        prop_assert!(max_diff(rebuilt.coeffs(), direct.coeffs()) < 1e-10 * (1.0 + direct.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn resolvents_match_series_far_out(t in operator(2, 2), s in paravector(2), grow in 3.0f64..6.0) {
        let tn = t.norm();
        let factor = grow * tn / s.abs().max(1e-3);
        let s = Paravector::new(s.s0 * factor + 1e-3, s.v.iter().map(|v| v * factor).collect()).unwrap();
        let sinv = s.to_element().inverse().unwrap();
        let d = t.d();
        let mut left = RightLinearOperator::zero(2, d);
        let mut right = RightLinearOperator::zero(2, d);
        let mut tk = RightLinearOperator::identity(2, d);
        let mut power = sinv.clone();
        for _ in 0..80 {
            let p = RightLinearOperator::diagonal(vec![power.clone(); d]).unwrap();
            left = left.add(&tk.compose(&p).unwrap()).unwrap();
            right = right.add(&p.compose(&tk).unwrap()).unwrap();
            tk = tk.compose(&t).unwrap();
            power = power.mul(&sinv).unwrap();
        }
        let scale = 1.0 / s.abs();
        prop_assert!(s_resolvent_left(&t, &s).unwrap().distance(&left).unwrap() < 1e-10 * scale);
        prop_assert!(s_resolvent_right(&t, &s).unwrap().distance(&right).unwrap() < 1e-10 * scale);
    }

    #[test]
    fn scalar_operator_calculus_is_evaluation(x in 0.3f64..5.0, negative in any::<bool>(), j in 1usize..=2) {
        let x = if negative { -x } else { x };
        let t = RightLinearOperator::scalar(2, 1, x);
        let q = make_real_polynomial(2, &[1.0, 0.0, 1.0]).unwrap();
        let f = make_real_polynomial(2, &[0.0, 1.0]).unwrap();
        let f = slicecalc::slice::make_rational(&f, &q.mul_intrinsic(&q, slicecalc::slice::ProductOrder::FG).unwrap(), 1.2).unwrap();
        let cfg = ContourSpec::new(SectorSpec::new(0.5, 0.8, 1.2).unwrap(), ImaginaryUnit::basis(2, j).unwrap());
        let expect = x / (1.0 + x * x).powi(2);
        for side in [Side::Left, Side::Right] {
            let got = omega_calc(&f, &t, &cfg, side).unwrap();
            let value = got.entry(0, 0);
            prop_assert!((value.scalar_part() - expect).abs() < 1e-9);
            prop_assert!(value.coeffs()[1..].iter().all(|c| c.abs() < 1e-9));
        }
    }
}
