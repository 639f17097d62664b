use exitsim::bm_exit::{exit_side_cdf, exit_time_cdf};
use exitsim::oracle::{binomial_z, ks_critical_value, ks_one_sample, ks_two_sample};
use exitsim::{cond_bm, exit_bm, Purpose, Side, StreamKey};
use rand::Rng;

const N: usize = 20_000;

fn triples() -> Vec<(f64, f64, f64)> {
    let mut r = StreamKey::new(Purpose::Test).arm(1).rng(7);
    (0..5)
        .map(|_| {
            let l = r.random_range(-3.0..3.0);
            let u = l + r.random_range(0.2..4.0);
            let x = l + (u - l) * r.random_range(0.05..0.95);
            (x, l, u)
        })
        .collect()
}

#[test]
fn side_and_time_laws_on_random_intervals() {
    for (i, (x, l, u)) in triples().into_iter().enumerate() {
        let mut r = StreamKey::new(Purpose::Test).arm(2).replication(i as u64).rng(1);
        let mut times = Vec::with_capacity(N);
        let mut upper = 0;
        for _ in 0..N {
            let s = exit_bm(&mut r, x, l, u).unwrap();
            assert!(s.time > 0.0);
            assert_eq!(s.location, if s.side == Side::Upper { u } else { l });
            upper += (s.side == Side::Upper) as u64;
            times.push(s.time);
        }
        let z = binomial_z(upper, N as u64, (x - l) / (u - l)).unwrap();
        assert!(z.abs() < 3.0, "({x}, {l}, {u}): z = {z}");
        let ks = ks_one_sample(&mut times, |t| exit_time_cdf(x, l, u, t).unwrap()).unwrap();
        assert!(ks.statistic < ks_critical_value(N, 0.01), "({x}, {l}, {u}): D = {}", ks.statistic);
    }
}

#[test]
fn time_law_given_side() {
    let (x, l, u) = (0.3, 0.0, 1.0);
    let mut r = StreamKey::new(Purpose::Test).arm(3).rng(1);
    let (mut lower, mut upper) = (Vec::new(), Vec::new());
    for _ in 0..N {
        let s = exit_bm(&mut r, x, l, u).unwrap();
        match s.side {
            Side::Lower => lower.push(s.time),
            Side::Upper => upper.push(s.time),
        }
    }
    for (side, sample, mass) in [(Side::Lower, &mut lower, 0.7), (Side::Upper, &mut upper, 0.3)] {
        let n = sample.len();
        let ks = ks_one_sample(sample, |t| exit_side_cdf(x, l, u, t, side).unwrap() / mass).unwrap();
        assert!(ks.statistic < ks_critical_value(n, 0.01), "{side:?}: D = {}", ks.statistic);
    }
}

#[test]
fn brownian_scaling() {
    // tau from (c x, c l, c u) is c^2 times tau from (x, l, u) in law
    let c = 3.0;
    let mut r = StreamKey::new(Purpose::Test).arm(4).rng(1);
    let mut small: Vec<f64> = (0..N).map(|_| c * c * exit_bm(&mut r, 0.2, -0.5, 1.0).unwrap().time).collect();
    let mut large: Vec<f64> = (0..N).map(|_| exit_bm(&mut r, 0.2 * c, -0.5 * c, c).unwrap().time).collect();
    let ks = ks_two_sample(&mut small, &mut large).unwrap();
    assert!(ks.p_value > 0.01, "p = {}", ks.p_value);
}

#[test]
fn conditioned_position_stays_inside() {
    let mut r = StreamKey::new(Purpose::Test).arm(5).rng(1);
    for &t in &[1e-6, 1e-3, 0.05, 0.5, 3.0] {
        for _ in 0..2_000 {
            let y = cond_bm(&mut r, 0.9, 0.0, 1.0, t).unwrap();
            assert!(y > 0.0 && y < 1.0, "t = {t}: {y}");
        }
    }
}
