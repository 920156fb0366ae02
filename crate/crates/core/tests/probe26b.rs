use modparam::curve::EllipticCurve;
use modparam::modpoly::{self, expr::parse_expression, jtools::j_recognize, CurveSystem};

#[test]
#[ignore]
fn probe_b40_convention() {
    let e = EllipticCurve::new([1, -1, 1, -3, 3], 26, Some("26b1")).unwrap();
    let sys = CurveSystem::new(&e, 26, 192).unwrap();
    let g33 = parse_expression("(Y+6)/(X-3)", &e).unwrap();
    let mg = modpoly::build_modular_function(&sys, &g33).unwrap();
    let p2 = mg.power_sum(2).unwrap();
    let jr = j_recognize(&p2, 10).unwrap();
    println!("p2 num = {:?}", jr.num.iter().map(|r| r.to_string()).collect::<Vec<_>>());
    println!("p2 den = {:?}", jr.den.iter().map(|r| r.to_string()).collect::<Vec<_>>());
    // paper: j^3 - 3214 j^2 + 2726620 j - 274323456 over (j - 1728)
}
