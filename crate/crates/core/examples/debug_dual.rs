//! Scratch driver for the dual-norm solver on random families.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use widthlab::balls::{Ball, BallIntersection};
use widthlab::exponents::Exponent;
use widthlab::norms::{dual_norm, DualNormOptions};

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let pools = [1.0, 1.5, 2.0, 3.0, 4.0, 8.0, f64::INFINITY];
    let mut worst = 0.0f64;
    for case in 0..200 {
        let dim = rng.gen_range(2..=10usize);
        let r = rng.gen_range(2..=3usize);
        let mut picks: Vec<f64> = Vec::new();
        while picks.len() < r {
            let p = pools[rng.gen_range(0..pools.len())];
            if !picks.contains(&p) {
                picks.push(p);
            }
        }
        let balls: Vec<Ball> = picks
            .iter()
            .map(|p| Ball::new(Exponent::new(*p).unwrap(), 0.25 + 2.0 * rng.gen::<f64>()).unwrap())
            .collect();
        let set = BallIntersection::new(dim, balls.clone()).unwrap();
        let z: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let res = dual_norm(&z, &set, &DualNormOptions::default());
        if res.gap > worst {
            worst = res.gap;
        }
        if res.gap > 1e-8 {
            println!("case {case} dim {dim} gap {:.3e}", res.gap);
            println!("  balls: {:?}", balls.iter().map(|b| (b.p.p(), b.radius)).collect::<Vec<_>>());
            println!("  canon: {:?}", set.canonicalize().balls().iter().map(|b| (b.p.p(), b.radius)).collect::<Vec<_>>());
            println!("  z = {z:?}");
            println!("  upper {} lower {}", res.value, res.witness_value);
        }
        if !set.membership(&res.witness).unwrap() {
            println!("case {case}: witness infeasible");
            println!("  balls: {:?}", balls.iter().map(|b| (b.p.p(), b.radius)).collect::<Vec<_>>());
            println!("  z = {z:?}");
            println!("  witness = {:?}", res.witness);
            for b in set.balls() {
                let n = widthlab::norms::lp_norm(&res.witness, b.p);
                println!("  |y|_{} = {} vs nu = {} (ratio {})", b.p.p(), n, b.radius, n / b.radius);
            }
        }
        let x: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let _ = x;
    }
    println!("worst gap: {worst:.3e}");
}
