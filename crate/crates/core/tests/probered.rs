use modparam::arith::float::Complex;
use modparam::param::gamma0_reduce;
use modparam::periods::moebius;
use modparam::gamma0::coset_reps;

#[test]
#[ignore]
fn probe_reduction_quality() {
    let n = 14u64;
    let floor = 3f64.sqrt() / (2.0 * n as f64);
    let mut worst = f64::INFINITY;
    let mut worst_data = (0usize, 0usize);
    for (si, s) in (0..12).enumerate() {
        let phi1 = 0.618_033_988_749_894_9_f64;
        let phi2 = 0.381_966_011_250_105_1_f64;
        let x = -0.47 + 0.94 * ((s as f64 * phi1) % 1.0);
        let y = 0.78 + 0.5 * ((s as f64 * phi2) % 1.0);
        let z = Complex::from_f64s(x, y, 256);
        for (ti, m) in coset_reps(n).iter().enumerate() {
            let gz = moebius(&z, *m);
            let (zr, _) = gamma0_reduce(n, &gz);
            let im = zr.im.to_f64();
            if im < worst {
                worst = im;
                worst_data = (si, ti);
            }
        }
    }
    println!("floor = {}, worst reduced Im = {} at {:?}", floor, worst, worst_data);
}
