//! Scratch calibration runs for picking experiment hyperparameters.
//! Not part of the library; run as `cargo run -p brain-core --example calib -- <task>`.

use brain_core::brain::{
    init_bernoulli, temperature_sweep, train, BrainConfig, InitScheme, SweepOptions,
};
use brain_core::hamiltonian::Hamiltonian;
use brain_core::mcmc::{metropolis_chain, McmcConfig};
use brain_core::metrics::{
    empirical_distribution, ess_autocorr, ess_for_samples, estimate_tc, fit_power,
    time_to_solution, tv_distance,
};
use brain_core::oracle::{Measurable, NoisyOracle};
use brain_core::rng::{derive_seed, seeded_rng, stream};
use brain_core::spin::SpinConfig;
use brain_core::variational::BernoulliField;
use brain_core::variational::VariationalFamily;

fn measure_abs_mag(q: &BernoulliField, seed: u64, draws: usize) -> f64 {
    let mut rng = seeded_rng(seed, &[stream::MEASURE]);
    let mut total = 0.0;
    let mut point = q.blank_point();
    for _ in 0..draws {
        q.sample_into(&mut point, &mut rng);
        total += point.order_parameter().abs();
    }
    total / draws as f64
}

fn race(args: &[String]) {
    let n = 1024;
    let beta = 1.0 / 0.33;
    let grid: Vec<(usize, f64, f64, usize, f64)> = if args.is_empty() {
        vec![
            (1000, 0.01, 0.25, 5000, 0.03),
            (1000, 0.005, 0.25, 5000, 0.03),
        ]
    } else {
        vec![(
            args[0].parse().unwrap(),
            args[1].parse().unwrap(),
            args[2].parse().unwrap(),
            args[3].parse().unwrap(),
            args[4].parse().unwrap(),
        )]
    };
    for (batch, lr, amp, iters, sigma) in grid {
        for seed in [1u64, 2] {
            let h = Hamiltonian::curie_weiss(n, 1.0).unwrap();
            let q = init_bernoulli(n, InitScheme::Perturbed { amplitude: amp }, seed).unwrap();
            let mut oracle = NoisyOracle::new(h, sigma, derive_seed(seed, &[1])).unwrap();
            let cfg = BrainConfig::new(beta, batch, lr, iters)
                .with_seed(seed)
                .with_convergence(50, 1e-9);
            let t0 = std::time::Instant::now();
            let (trained, record) = train(q, &mut oracle, &cfg).unwrap();
            let cross = time_to_solution(&record, 0.24);
            let sampled = measure_abs_mag(&trained, seed, 5000);
            let params = trained.params();
            let majority_up = params.iter().map(|&m| 2.0 * m - 1.0).sum::<f64>() >= 0.0;
            let aligned: Vec<f64> = params
                .iter()
                .map(|&m| if majority_up { m } else { 1.0 - m })
                .collect();
            let mut buckets = [0usize; 5];
            for &m in &aligned {
                let b = if m <= 0.01 { 0 } else if m <= 0.2 { 1 } else if m < 0.8 { 2 } else if m < 0.99 { 3 } else { 4 };
                buckets[b] += 1;
            }
            println!("  mean buckets (aligned): <=0.01: {}, 0.01-0.2: {}, 0.2-0.8: {}, 0.8-0.99: {}, >=0.99: {}",
                buckets[0], buckets[1], buckets[2], buckets[3], buckets[4]);
            let series: Vec<f64> = record.abs_mag_series();
            let w = series.len() / 10;
            let probe: Vec<String> = (1..=10)
                .map(|k| format!("{:.3}", series[k * w - w..k * w].iter().sum::<f64>() / w as f64))
                .collect();
            println!(
                "S={batch} lr={lr} amp={amp} iters={iters} sigma={sigma} seed={seed}: cross@0.24={cross:?}, sampled|M|={sampled:.4}, deciles=[{}], {:.0}s",
                probe.join(" "),
                t0.elapsed().as_secs_f64()
            );
        }
    }
}

fn ssa() {
    let n = 1024;
    let beta = 1.0 / 0.33;
    for (lr, amp, iters) in [(0.003, 0.1, 2000), (0.005, 0.1, 1500), (0.005, 0.25, 1500)] {
        for batch in [100usize, 300, 1000, 3000] {
            let mut vals = Vec::new();
            for seed in [1u64, 2] {
                let h = Hamiltonian::curie_weiss(n, 1.0).unwrap();
                let q =
                    init_bernoulli(n, InitScheme::Perturbed { amplitude: amp }, seed).unwrap();
                let mut oracle = NoisyOracle::new(h, 0.0, derive_seed(seed, &[1])).unwrap();
                let cfg = BrainConfig::new(beta, batch, lr, iters)
                    .with_seed(seed)
                    .with_convergence(50, 1e-9);
                let (trained, _) = train(q, &mut oracle, &cfg).unwrap();
                vals.push(measure_abs_mag(&trained, seed, 10_000));
            }
            println!(
                "lr={lr} amp={amp} iters={iters} S={batch}: |M| = {:?}",
                vals
            );
        }
    }
}

fn cwsweep() {
    let n = 1024;
    let temps: Vec<f64> = (0..20).map(|i| 0.33 + i as f64 * (2.0 - 0.33) / 19.0).collect();
    let h = Hamiltonian::curie_weiss(n, 1.0).unwrap();
    let template = BrainConfig::new(1.0, 512, 0.01, 600)
        .with_seed(1)
        .with_convergence(50, 1e-9)
        .with_init(InitScheme::Perturbed { amplitude: 0.25 });
    let opts = SweepOptions { measure_samples: 2000, averaging_k: 1, warm_start: false };
    let t0 = std::time::Instant::now();
    let points = temperature_sweep(&h, &[0.0], &temps, &template, opts).unwrap();
    let mags: Vec<f64> = points.iter().map(|p| p.abs_magnetization).collect();
    for p in &points {
        println!("T={:.3} |M|={:.4} evals={}", p.temperature, p.abs_magnetization, p.evals);
    }
    println!(
        "tc = {:?} ({:.0}s)",
        estimate_tc(&temps, &mags),
        t0.elapsed().as_secs_f64()
    );
}

fn nn2dmelt() {
    let l = 32;
    let n = l * l;
    let temps: Vec<f64> = (0..20).map(|i| 0.33 + i as f64 * (4.0 - 0.33) / 19.0).collect();
    for (sweeps_equil, sweeps_measure) in [(150usize, 150usize), (400, 400)] {
        let t0 = std::time::Instant::now();
        let mut mags = Vec::new();
        for (ti, t) in temps.iter().enumerate() {
            let beta = 1.0 / t;
            let steps = (sweeps_equil + sweeps_measure) * n;
            let burn = sweeps_equil * n;
            let h = Hamiltonian::nearest_neighbor_2d(l, 1.0, brain_core::hamiltonian::Boundary::Periodic).unwrap();
            let shape = h.shape().unwrap();
            let mut oracle = NoisyOracle::new(h, 0.0, derive_seed(7, &[ti as u64])).unwrap();
            let cfg = McmcConfig::new(beta, steps, derive_seed(7, &[ti as u64]))
                .with_burn_in(burn)
                .with_thinning(n)
                .with_cached_energy();
            let (states, _) = metropolis_chain(&mut oracle, &cfg, SpinConfig::all_up(shape)).unwrap();
            let m: f64 =
                states.iter().map(|s| s.magnetization().abs()).sum::<f64>() / states.len() as f64;
            mags.push(m);
        }
        for (t, m) in temps.iter().zip(&mags) {
            println!("T={t:.3} |M|={m:.4}");
        }
        println!(
            "equil={sweeps_equil} sweeps: tc = {:?} ({:.0}s)",
            estimate_tc(&temps, &mags),
            t0.elapsed().as_secs_f64()
        );
    }
}

fn nn2dshift() {
    let l = 32;
    let temps: Vec<f64> = (0..12).map(|i| 2.5 + i as f64 * (5.0 - 2.5) / 11.0).collect();
    let h = Hamiltonian::nearest_neighbor_2d(l, 1.0, brain_core::hamiltonian::Boundary::Periodic).unwrap();
    let template = BrainConfig::new(1.0, 512, 0.02, 400)
        .with_seed(1)
        .with_convergence(50, 1e-9)
        .with_init(InitScheme::Perturbed { amplitude: 0.25 });
    let opts = SweepOptions { measure_samples: 2000, averaging_k: 1, warm_start: false };
    let t0 = std::time::Instant::now();
    let points = temperature_sweep(&h, &[0.0, 0.03], &temps, &template, opts).unwrap();
    for p in &points {
        println!(
            "sigma={} T={:.3} |M|={:.4}",
            p.sigma, p.temperature, p.abs_magnetization
        );
    }
    let m0: Vec<f64> = points.iter().filter(|p| p.sigma == 0.0).map(|p| p.abs_magnetization).collect();
    let m3: Vec<f64> = points.iter().filter(|p| p.sigma > 0.0).map(|p| p.abs_magnetization).collect();
    println!(
        "tc(0) = {:?}  tc(0.03) = {:?} ({:.0}s)",
        estimate_tc(&temps, &m0),
        estimate_tc(&temps, &m3),
        t0.elapsed().as_secs_f64()
    );
}

fn scaling(args: &[String]) {
    let tol: f64 = args.first().map(|s| s.parse().unwrap()).unwrap_or(0.3);
    let skip_big_noisy = args.get(1).map(|s| s == "skipbig").unwrap_or(false);
    let sizes = [1024usize, 4096, 16384];
    let beta = 1.0 / 0.33;
    for sigma in [0.0, 0.03] {
        let mut evals = Vec::new();
        for (si, &n) in sizes.iter().enumerate() {
            if skip_big_noisy && sigma > 0.0 && n > 4096 {
                continue;
            }
            let batch = if sigma == 0.0 {
                n
            } else {
                (1.25 * n as f64 * (n as f64 / sizes[0] as f64).powf(0.25)).ceil() as usize
            };
            let seed = 1u64;
            let h = Hamiltonian::curie_weiss(n, 1.0).unwrap();
            let q = init_bernoulli(n, InitScheme::Perturbed { amplitude: 0.25 }, seed).unwrap();
            let mut oracle =
                NoisyOracle::new(h, sigma, derive_seed(seed, &[si as u64, sigma.to_bits()])).unwrap();
            let size_tol = tol * n as f64 / sizes[0] as f64;
            let cfg = BrainConfig::new(beta, batch, 0.01, 1500)
                .with_seed(seed)
                .with_convergence(50, size_tol);
            let t0 = std::time::Instant::now();
            let (trained, record) = train(q, &mut oracle, &cfg).unwrap();
            let sampled = measure_abs_mag(&trained, seed, 2000);
            println!(
                "sigma={sigma} n={n} S={batch}: iters={} evals={} converged={} |M|={sampled:.4} ({:.0}s)",
                record.iterations(),
                record.total_evals(),
                record.converged(),
                t0.elapsed().as_secs_f64()
            );
            evals.push((n as f64, record.total_evals() as f64));
        }
        println!("sigma={sigma} tol={tol}: fit = {:?}", fit_power(&evals));
    }
}

fn ess(args: &[String]) {
    let beta = 0.4407227853680035;
    let l: usize = args.first().map(|a| a.parse().unwrap()).unwrap_or(8);
    let n = l * l;
    let draw_counts: Vec<usize> = vec![2000, 20_000];
    for (batch, lr, iters, amp) in [(512usize, 0.02, 200u64, 0.25)] {
        for seed in [1u64, 2, 3, 4, 5, 6, 7, 8] {
            let h = Hamiltonian::nearest_neighbor_2d(l, 1.0, brain_core::hamiltonian::Boundary::Periodic).unwrap();
            let q = init_bernoulli(n, InitScheme::Perturbed { amplitude: amp }, seed).unwrap();
            let mut oracle = NoisyOracle::new(h.clone(), 0.0, derive_seed(seed, &[1])).unwrap();
            let cfg = BrainConfig::new(beta, batch, lr, iters as usize)
                .with_seed(seed)
                .with_convergence(50, 1e-9);
            let (trained, record) = train(q, &mut oracle, &cfg).unwrap();
            let budget = record.total_evals();
            let mut rng = seeded_rng(seed, &[stream::MEASURE]);
            let all_draws: Vec<SpinConfig> =
                (0..*draw_counts.iter().max().unwrap()).map(|_| trained.sample(&mut rng)).collect();
            let mut model_by_count = Vec::new();
            for &dc in &draw_counts {
                model_by_count.push(ess_for_samples(&trained, &h, &all_draws[..dc], beta).unwrap());
            }
            let draws = &all_draws;
            let model_ess = model_by_count[0];
            let steps = (budget / 2).max(200) as usize;
            let shape = h.shape().unwrap();
            let mut chain_oracle = NoisyOracle::new(h.clone(), 0.0, derive_seed(seed, &[2])).unwrap();
            let mcfg = McmcConfig::new(beta, steps, derive_seed(seed, &[2]))
                .with_burn_in(steps / 5);
            let init = SpinConfig::random(shape, &mut seeded_rng(seed, &[stream::INIT, 2]));
            let (states, _) = metropolis_chain(&mut chain_oracle, &mcfg, init).unwrap();
            let energies: Vec<f64> = states.iter().map(|s| h.energy(s).unwrap()).collect();
            let chain_ess = ess_autocorr(&energies).unwrap();
            let mag = draws.iter().map(|d| d.magnetization().abs()).sum::<f64>() / draws.len() as f64;
            println!(
                "L={l} S={batch} lr={lr} iters={iters} amp={amp} seed={seed}: model2k={:.6} model20k={:.6} chain={chain_ess:.6} ratio2k={:.1} ratio20k={:.1} |M|={mag:.3} ({} kept)",
                model_by_count[0],
                model_by_count[1],
                model_by_count[0] / chain_ess,
                model_by_count[1] / chain_ess,
                states.len()
            );
            let _ = (model_ess, budget);
        }
    }
}

fn c1() {
    for (name, h, betas) in [
        ("chain6", Hamiltonian::chain_1d(6, 1.0, brain_core::hamiltonian::Boundary::Periodic).unwrap(), [0.5, 1.0]),
        ("cw8", Hamiltonian::curie_weiss(8, 1.0).unwrap(), [0.5, 1.0]),
    ] {
        let n = h.size().unwrap();
        for beta in betas {
            let exact = h.enumerate_boltzmann(beta).unwrap();
            for seed in [1u64] {
                let q = init_bernoulli(n, InitScheme::Perturbed { amplitude: 0.25 }, seed).unwrap();
                let mut oracle = NoisyOracle::new(h.clone(), 0.0, derive_seed(seed, &[1])).unwrap();
                let cfg = BrainConfig::new(beta, 200, 0.02, 1500)
                    .with_seed(seed)
                    .with_convergence(50, 1e-9);
                let (trained, _) = train(q, &mut oracle, &cfg).unwrap();
                let mut rng = seeded_rng(seed, &[stream::MEASURE]);
                let draws: Vec<SpinConfig> =
                    (0..100_000).map(|_| trained.sample(&mut rng)).collect();
                let emp = empirical_distribution(&draws).unwrap();
                let tv_brain = tv_distance(&emp, exact.probabilities()).unwrap();

                let shape = h.shape().unwrap();
                let mut c_oracle = NoisyOracle::new(h.clone(), 0.0, derive_seed(seed, &[2])).unwrap();
                let mcfg = McmcConfig::new(beta, 1_000_000, derive_seed(seed, &[2]))
                    .with_burn_in(10_000)
                    .with_thinning(10);
                let init = SpinConfig::random(shape, &mut seeded_rng(seed, &[stream::INIT, 2]));
                let (states, _) = metropolis_chain(&mut c_oracle, &mcfg, init).unwrap();
                let c_emp = empirical_distribution(&states).unwrap();
                let tv_mcmc = tv_distance(&c_emp, exact.probabilities()).unwrap();
                println!("{name} beta={beta} seed={seed}: tv_brain={tv_brain:.4} tv_mcmc={tv_mcmc:.4}");
            }
        }
    }
}

fn essceiling() {
    let beta = 0.4407227853680035;
    for l in [6usize, 8] {
        let n = l * l;
        let h = Hamiltonian::nearest_neighbor_2d(l, 1.0, brain_core::hamiltonian::Boundary::Periodic).unwrap();
        for m in [0.70, 0.80, 0.85, 0.88, 0.905, 0.925, 0.95] {
            let p = (1.0 + m) / 2.0;
            let q = BernoulliField::new(vec![p; n]).unwrap();
            let mut vals = Vec::new();
            for seed in [11u64, 12, 13] {
                let mut rng = seeded_rng(seed, &[stream::MEASURE]);
                let draws: Vec<SpinConfig> =
                    (0..50_000).map(|_| q.sample(&mut rng)).collect();
                vals.push(ess_for_samples(&q, &h, &draws, beta).unwrap());
            }
            println!("L={l} m={m}: ess = {vals:?}");
        }
    }
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let task = args.first().map(String::as_str).unwrap_or("");
    let rest = if args.len() > 1 { &args[1..] } else { &[] };
    match task {
        "race" => race(rest),
        "ssa" => ssa(),
        "cwsweep" => cwsweep(),
        "nn2dmelt" => nn2dmelt(),
        "nn2dshift" => nn2dshift(),
        "scaling" => scaling(rest),
        "ess" => ess(rest),
        "c1" => c1(),
        "essceiling" => essceiling(),
        other => eprintln!("unknown task {other:?}"),
    }
}
