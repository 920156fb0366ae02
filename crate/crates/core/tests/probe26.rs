use modparam::curve::{AffinePoint, EllipticCurve};
use modparam::modpoly::{self, expr::parse_expression, CurveSystem};
use modparam::surd::QuadSurd;

#[test]
#[ignore]
fn probe_26b1() {
    let e = EllipticCurve::new([1, -1, 1, -3, 3], 26, Some("26b1")).unwrap();
    let t0 = std::time::Instant::now();
    let sys = CurveSystem::new(&e, 26, 192).unwrap();
    println!("system built in {:?}; index {}", t0.elapsed(), sys.index());
    for exp in &sys.expansions {
        println!("cusp {:?} width {} case {:?}", exp.data.cusp.label(), exp.data.width, exp.case);
    }
    // Example 3.1: F = (Y+2)/(X-1), trace = (-j^2+54688j-37627200)/(j-54000)
    let f = parse_expression("(Y+2)/(X-1)", &e).unwrap();
    let mf = modpoly::build_modular_function(&sys, &f).unwrap();
    let jr = modpoly::trace_recognized(&mf, mf.default_degree_bound()).unwrap();
    println!("Ex3.1 trace num = {:?}", jr.num.iter().map(|r| r.to_string()).collect::<Vec<_>>());
    println!("Ex3.1 trace den = {:?}", jr.den.iter().map(|r| r.to_string()).collect::<Vec<_>>());
    println!("elapsed {:?}", t0.elapsed());
    // Example 3.3: F = Y/(X-1), G = (Y+6)/(X-3)
    let f33 = parse_expression("Y/(X-1)", &e).unwrap();
    let mf33 = modpoly::build_modular_function(&sys, &f33).unwrap();
    let a41 = modpoly::trace_recognized(&mf33, mf33.default_degree_bound()).unwrap();
    println!("A41 num = {:?}", a41.num.iter().map(|r| r.to_string()).collect::<Vec<_>>());
    println!("A41 den = {:?}", a41.den.iter().map(|r| r.to_string()).collect::<Vec<_>>());
    let g33 = parse_expression("(Y+6)/(X-3)", &e).unwrap();
    let mg33 = modpoly::build_modular_function(&sys, &g33).unwrap();
    let b40 = modpoly::coefficient_recognized(&mg33, 40, mg33.default_degree_bound()).unwrap();
    println!("B40 num = {:?}", b40.num.iter().map(|r| r.to_string()).collect::<Vec<_>>());
    println!("B40 den = {:?}", b40.den.iter().map(|r| r.to_string()).collect::<Vec<_>>());
    println!("elapsed {:?}", t0.elapsed());
    // preimages: (1,0) from disc -12; (1,-2) from disc -16; (3,2) from disc -4
    for (pt, form, name) in [
        (AffinePoint::from_ints(1, 0), (1i64, 0i64, 3i64), "(1,0) disc -12"),
        (AffinePoint::from_ints(1, -2), (1, 0, 4), "(1,-2) disc -16"),
        (AffinePoint::from_ints(3, 2), (1, 0, 1), "(3,2) disc -4"),
    ] {
        let cm = QuadSurd::from_ints(form.0, form.1, form.2);
        match modpoly::preimage_search(&sys, &pt, &cm) {
            Ok(hits) => {
                for (z, _) in &hits {
                    println!("{} -> surd ({}, {}, {}) disc {}", name, z.a, z.b, z.c, z.disc());
                }
            }
            Err(e) => println!("{} -> error {:?}", name, e),
        }
    }
    println!("total elapsed {:?}", t0.elapsed());
}
