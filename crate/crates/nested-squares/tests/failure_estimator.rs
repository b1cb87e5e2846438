use nsq::failure::*;
use nsq::NsqError;
use num_bigint::BigInt;
use num_rational::BigRational;

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[test]
fn p1_is_p_and_p2_is_binomial() {
    let p1 = p_n(1, 4).unwrap();
    assert_eq!(p1, RationalPoly::p(4));
    let p2 = p_n(2, 4).unwrap();
    assert_eq!(p2.coefficients(), &[q(0), q(2), q(-1), q(0), q(0)]);
}

#[test]
fn p6_quadratic_is_minus_15() {
    assert_eq!(quadratic_coefficient(&p_n(6, 4).unwrap()).unwrap(), q(-15));
}

#[test]
fn zero_gates_rejected() {
    assert!(matches!(p_n(0, 4), Err(NsqError::InvalidArgument(_))));
}

#[test]
fn quadratic_needs_order_two() {
    let p = p_n(2, 1).unwrap();
    assert!(matches!(quadratic_coefficient(&p), Err(NsqError::OrderTooLow { have: 1, need: 2 })));
    assert!(summary(1).is_err());
}

#[test]
fn p_none_collapses_to_single_powers() {
    let one_minus_p = RationalPoly::one(6).sub(&RationalPoly::p(6));
    assert_eq!(p_none_common(6).unwrap(), one_minus_p.pow(28));
    assert_eq!(p_none_present(6).unwrap(), one_minus_p.pow(36));
    assert_eq!(quadratic_coefficient(&one_minus_p.pow(28)).unwrap(), q(378));
}

#[test]
fn quadratic_coefficients_are_341_and_537() {
    let ec = e_common(DEFAULT_ORDER, SingleTerm::Exact).unwrap();
    let ep = e_present(DEFAULT_ORDER).unwrap();
    assert_eq!(quadratic_coefficient(&ec).unwrap(), q(341));
    assert_eq!(quadratic_coefficient(&ep).unwrap(), q(537));
    // no constant or linear term: single failures are all caught
    for f in [&ec, &ep] {
        assert_eq!(f.coefficients()[0], q(0));
        assert_eq!(f.coefficients()[1], q(0));
    }
    assert_eq!(ec.eval(0.0), 0.0);
}

#[test]
fn printed_denominator_gives_293() {
    let ec = e_common(DEFAULT_ORDER, SingleTerm::Printed).unwrap();
    assert_eq!(quadratic_coefficient(&ec).unwrap(), q(293));
}

#[test]
fn summary_reports_exact_strings() {
    let s = summary(DEFAULT_ORDER).unwrap();
    assert_eq!(s.common_quadratic, "341");
    assert_eq!(s.present_quadratic, "537");
    assert_eq!(s.printed_common_quadratic, "293");
    assert!((s.overhead_ratio - 537.0 / 341.0).abs() < 1e-15);
    let json = serde_json::to_value(&s).unwrap();
    assert_eq!(json["common_quadratic"], "341");
}

#[test]
fn series_match_closed_forms() {
    let order = 12;
    let ec = e_common(order, SingleTerm::Exact).unwrap();
    let el = e_common(order, SingleTerm::Printed).unwrap();
    let ep = e_present(order).unwrap();
    for p in [1e-3, 1e-4] {
        for (series, closed) in [
            (ec.eval(p), e_common_at(p, SingleTerm::Exact)),
            (el.eval(p), e_common_at(p, SingleTerm::Printed)),
            (ep.eval(p), e_present_at(p)),
        ] {
            assert!(((series - closed) / closed).abs() < 1e-9, "p = {p}: {series} vs {closed}");
        }
    }
}

#[test]
fn inverse_round_trips() {
    let x = RationalPoly::one(5).sub(&p_n(3, 5).unwrap());
    assert_eq!(x.mul(&x.inverse().unwrap()), RationalPoly::one(5));
    assert!(RationalPoly::p(5).inverse().is_err());
}

#[test]
fn curves_increase_and_present_stays_above() {
    let ps: Vec<f64> = (1..=100).map(|i| 0.05 * i as f64 / 100.0).collect();
    let mut last = (0.0, 0.0);
    for &p in &ps {
        let (a, b) = (e_common_at(p, SingleTerm::Exact), e_present_at(p));
        assert!(a > last.0 && b > last.1, "not increasing at p = {p}");
        assert!(a <= b, "p = {p}: {a} > {b}");
        last = (a, b);
    }
    let csv = sweep_csv(&ps);
    assert_eq!(csv.lines().count(), 101);
    assert_eq!(csv.lines().next().unwrap(), "p,e_common,e_present,ratio");
}
