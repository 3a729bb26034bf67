use algknow::model::Answer;
use algknow::reliability::reliability;
use algknow::scenarios::{self, random_model, RandomOptions};
use algknow::semantics::Evaluator;
use algknow::syntax::{parse_formula, AgentId, EvBound, Formula};
use algknow::{Rational, Scalar, Structure, StructureF32, StructureF64};

fn close<T: Scalar>(x: &T, exact: &Rational) -> bool {
    (x.to_f64() - exact.to_f64()).abs() <= 1e-9_f64.max(T::tolerance().to_f64())
}

fn weights_agree<T: Scalar>(n: &algknow::model::ProbabilisticStructure<T>, exact: &Structure, f: &Formula) {
    let (e, ex) = (Evaluator::new(n), Evaluator::new(exact));
    let a = AgentId(1);
    for label in exact.labels(a).unwrap() {
        let s1 = ex.evidence_space(a, f, label).unwrap();
        let s2 = e.evidence_space(a, f, label).unwrap();
        for ob in Answer::ALL {
            for h in 0..2 {
                assert!(close(&s2.lower_weight(ob, h), &s1.lower_weight(ob, h)));
                assert!(close(&s2.upper_weight(ob, h), &s1.upper_weight(ob, h)));
            }
        }
    }
    for s in 0..exact.state_count() {
        for v in 0..exact.derandomizers().len() {
            for bound in [EvBound::Lower, EvBound::Upper] {
                let x = e.ev_value(a, f, s, v, bound).unwrap();
                assert!(close(&x, &ex.ev_value(a, f, s, v, bound).unwrap()));
            }
        }
    }
}

#[test]
fn worked_examples_in_floating_point() {
    let cases: Vec<(Structure, &str)> = vec![
        (scenarios::coin_structure(), "dh"),
        (scenarios::sensor_structure(14, 10).unwrap(), "wall10"),
        (scenarios::primality_structure(15).unwrap(), "prime"),
        (scenarios::bpp_structure(), "p"),
    ];
    for (exact, q) in cases {
        let f = parse_formula(q).unwrap();
        let f64s: StructureF64 = exact.convert();
        let f32s: StructureF32 = exact.convert();
        weights_agree(&f64s, &exact, &f);
        weights_agree(&f32s, &exact, &f);
        let r = reliability(&exact, AgentId(1), &f).unwrap();
        let r64 = reliability(&f64s, AgentId(1), &f).unwrap();
        assert!(close(&r64.alpha_star, &r.alpha_star) && close(&r64.beta_star, &r.beta_star));
        assert_eq!(r64.complete, r.complete);
        assert_eq!(r64.respects_negation, r.respects_negation);
    }
}

#[test]
fn random_structures_in_floating_point() {
    for seed in 0..100 {
        let m = random_model(seed, &RandomOptions::default());
        let exact: Structure = m.structure();
        let approx: StructureF64 = m.structure();
        let (e, ea) = (Evaluator::new(&exact), Evaluator::new(&approx));
        let x = Formula::alg_knows(1, m.query.clone());
        for s in 0..exact.state_count() {
            assert!(close(&ea.probability(s, &x).unwrap(), &e.probability(s, &x).unwrap()));
            for v in 0..exact.derandomizers().len() {
                assert_eq!(ea.holds(s, v, &x).unwrap(), e.holds(s, v, &x).unwrap());
                assert_eq!(ea.holds(s, v, &m.query).unwrap(), e.holds(s, v, &m.query).unwrap());
            }
        }
        weights_agree(&approx, &exact, &m.query);
    }
}

#[test]
fn tolerances() {
    assert!(Rational::tolerance() == Rational::from_ratio(0, 1));
    assert!(f64::tolerance() > 0.0 && f32::tolerance() > f64::tolerance() as f32);
    assert!((0.1f64 + 0.2).eq_tol(&0.3));
    assert!(!Rational::from_ratio(1, 3).eq_tol(&Rational::from_ratio(333_333, 1_000_000)));
    assert!(Rational::from_ratio(1, 3).in_unit_interval());
    assert!(!Rational::from_ratio(4, 3).in_unit_interval());
}
