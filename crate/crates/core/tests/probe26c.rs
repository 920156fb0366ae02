use modparam::curve::EllipticCurve;
use modparam::modpoly::{self, expr::parse_expression, CurveSystem};

fn show(tag: &str, jr: &modparam::modpoly::jtools::JRational) {
    println!("{} num = {:?}", tag, jr.num.iter().map(|r| r.to_string()).collect::<Vec<_>>());
    println!("{} den = {:?}", tag, jr.den.iter().map(|r| r.to_string()).collect::<Vec<_>>());
}

#[test]
#[ignore]
fn probe_al_twists() {
    let e = EllipticCurve::new([1, -1, 1, -3, 3], 26, Some("26b1")).unwrap();
    let sys = CurveSystem::new(&e, 26, 192).unwrap();
    let f = parse_expression("Y/(X-1)", &e).unwrap();
    let g = parse_expression("(Y+6)/(X-3)", &e).unwrap();
    let mf = modpoly::build_modular_function(&sys, &f).unwrap();
    let mg = modpoly::build_modular_function(&sys, &g).unwrap();
    let bound = 9;
    // W2 twists
    let f2 = modpoly::atkin_lehner_apply(&mf, 2).unwrap();
    show("A40(F.W2)", &modpoly::coefficient_recognized(&f2, 40, bound).unwrap());
    show("A41(F.W2)", &modpoly::trace_recognized(&f2, bound).unwrap());
    let g2 = modpoly::atkin_lehner_apply(&mg, 2).unwrap();
    show("B41(G.W2)", &modpoly::trace_recognized(&g2, bound).unwrap());
    // W13 twists
    let f13 = modpoly::atkin_lehner_apply(&mf, 13).unwrap();
    show("A41(F.W13)", &modpoly::trace_recognized(&f13, bound).unwrap());
    let g13 = modpoly::atkin_lehner_apply(&mg, 13).unwrap();
    show("B40(G.W13)", &modpoly::coefficient_recognized(&g13, 40, bound).unwrap());
    show("B41(G.W13)", &modpoly::trace_recognized(&g13, bound).unwrap());
}
