use modparam::arith::float::Complex;
use modparam::periods::moebius;
use modparam::gamma0::coset_reps;

#[test]
#[ignore]
fn probe_worst_point() {
    let n = 14i64;
    let s = 5i64;
    let phi1 = 0.618_033_988_749_894_9_f64;
    let phi2 = 0.381_966_011_250_105_1_f64;
    let x = -0.47 + 0.94 * ((s as f64 * phi1) % 1.0);
    let y = 0.78 + 0.5 * ((s as f64 * phi2) % 1.0);
    let z = Complex::from_f64s(x, y, 256);
    let m = coset_reps(14)[23];
    let gz = moebius(&z, m);
    let (mut zx, mut zy) = gz.to_f64s();
    println!("start ({}, {})", zx, zy);
    // manual exhaustive reduction
    loop {
        zx -= zx.round();
        let kmax = (1.0 / (n as f64 * zy)).floor() as i64 + 1;
        let mut best: Option<(i64, i64, f64)> = None;
        for k in 1..=kmax {
            let c = n * k;
            let d0 = (-(c as f64) * zx).round() as i64;
            for d in (d0 - 4)..=(d0 + 4) {
                if num_gcd(c, d) != 1 { continue; }
                let nr = (c as f64 * zx + d as f64).powi(2) + (c as f64 * zy).powi(2);
                if nr < 0.9999 && best.map_or(true, |(_,_,b)| nr < b) {
                    best = Some((c, d, nr));
                }
            }
        }
        match best {
            Some((c, d, nr)) => {
                // z -> (az+b)/(cz+d)
                let g = num_gcd(c, d);
                assert_eq!(g, 1);
                // complete
                let (_, a, b) = ext_gcd(d, -c);
                let (nx, ny) = moeb(zx, zy, a, b, c, d);
                println!("apply c={} d={} nr={} -> ({}, {})", c, d, nr, nx, ny);
                zx = nx; zy = ny;
            }
            None => break,
        }
    }
    println!("final Im {}", zy);
    fn num_gcd(a: i64, b: i64) -> i64 { if b == 0 { a.abs() } else { num_gcd(b, a % b) } }
    fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
        if b == 0 { (a.abs(), a.signum(), 0) } else { let (g, x, y) = ext_gcd(b, a % b); (g, y, x - (a / b) * y) }
    }
    fn moeb(x: f64, y: f64, a: i64, b: i64, c: i64, d: i64) -> (f64, f64) {
        let den = (c as f64 * x + d as f64).powi(2) + (c as f64 * y).powi(2);
        (((a as f64 * x + b as f64) * (c as f64 * x + d as f64) + a as f64 * c as f64 * y * y) / den,
         y / den)
    }
}
