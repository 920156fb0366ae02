use modparam::curve::EllipticCurve;
use modparam::modpoly::{modular_degree, CurveSystem};

#[test]
#[ignore]
fn probe_degrees() {
    let t0 = std::time::Instant::now();
    for (a, n, label, _expect) in [
        ([0i64, -1, 1, -10, -20], 11u64, "11a1", 1u64),
        ([1, 0, 1, 4, -6], 14, "14a1", 1),
        ([1, 0, 1, -36, -70], 14, "14a2", 2),
    ] {
        let e = EllipticCurve::new(a, n, Some(label)).unwrap();
        let sys = CurveSystem::new(&e, 8, 320).unwrap();
        let d = modular_degree(&sys);
        println!("{}: degree = {:?} ({:?})", label, d, t0.elapsed());
    }
}

#[test]
#[ignore]
fn probe_degrees_96_48() {
    let t0 = std::time::Instant::now();
    for (a, n, label) in [
        ([0i64, 1, 0, -384, 2772], 48u64, "48a5"),
        ([0, 1, 0, -32, 60], 96, "96a3"),
    ] {
        let e = EllipticCurve::new(a, n, Some(label)).unwrap();
        let sys = CurveSystem::new_numeric(&e, 320).unwrap();
        println!("{}: system {:?}", label, t0.elapsed());
        let d = modular_degree(&sys);
        println!("{}: degree = {:?} ({:?})", label, d, t0.elapsed());
    }
}
