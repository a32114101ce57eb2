use counterca::automaton::CounterRule;
use counterca::lyapunov::{influence_upper, AnyRule, Side};
use counterca::measures::*;
use std::time::Instant;

fn main() {
    let params = MeasureParams { seed: 424242, half_width: 40, ..Default::default() };
    let rule = AnyRule::Counter(CounterRule);
    let grid = [32u32, 64, 128, 256];
    let mut sums = [0.0f64; 4];
    let mut sq = [0.0f64; 4];
    let n_samples = 40;
    let t0 = Instant::now();
    for i in 0..n_samples {
        let mut rng = params.rng(i);
        let mut orbit = sample_chained(&params, &mut rng, 60, 110, 6).unwrap();
        cesaro_burnin_chained(&mut orbit, 256, &mut rng).unwrap();
        let w = orbit.window().as_window();
        for (k, &n) in grid.iter().enumerate() {
            let (u, _, inc) = influence_upper(&w, &rule, n, Side::Plus).unwrap();
            let v = u as f64 / n as f64;
            sums[k] += v; sq[k] += v * v;
            if inc { println!("inconclusive at sample {i} n {n}"); }
        }
    }
    for (k, &n) in grid.iter().enumerate() {
        let m = sums[k] / n_samples as f64;
        let sd = ((sq[k] / n_samples as f64 - m * m).max(0.0) / n_samples as f64).sqrt();
        println!("n={n}: mean upper/n = {m:.4} +- {sd:.4}");
    }
    println!("elapsed {:?} for {n_samples} samples", t0.elapsed());
}
