//! Desk-scale acceptance gates, one test per numbered criterion.
//!
//! Each test measures the behavior it gates, prints exactly one
//! `criterion NN (...): PASS|FAIL — ...` line with the measured values next
//! to the pinned tolerances, and then asserts. Criteria that the factorized
//! family or the plain stochastic-gradient estimator cannot reach at these
//! budgets are left to fail honestly; the printed line and the assertion
//! message carry the measured margin, and the per-case numbers make the
//! structural reason visible (e.g. a product distribution cannot match a
//! correlated Boltzmann distribution in total variation even when its
//! magnetization is right).
//!
//! Conventions shared by the tests:
//! - seeds are small integers; oracle, solver, measurement, and chain-init
//!   randomness use the core seed streams, with chain-side streams derived
//!   through an extra tag so solver and chain never share a stream;
//! - "fidelity" is |M| against the ferromagnetic optimum of 1;
//! - a chain's settled |M| is the mean of the last tenth of its trace.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use brain_core::brain::{batch_gradient, init_bernoulli, noise_variance_delta};
use brain_core::hamiltonian::{Boundary, Hamiltonian};
use brain_core::mcmc::{
    averaged_metropolis, metropolis_chain, parallel_tempering, McmcConfig, PtConfig,
};
use brain_core::metrics::{
    empirical_distribution, ess_autocorr, ess_for_samples, estimate_tc, fidelity, fit_power,
    log_weight_ess, time_to_solution, tv_distance,
};
use brain_core::rng::{derive_seed, seeded_rng, stream};
use brain_core::spin::{Shape, SpinConfig};
use brain_core::{temperature_sweep, train, BrainConfig, InitScheme, SweepOptions};
use brain_core::{BernoulliField, NoisyOracle, VariationalFamily};

/// Extra tag separating chain-side derived seeds from solver-side ones.
const CHAIN_TAG: u64 = 2;

fn cw(n: usize) -> Hamiltonian {
    Hamiltonian::curie_weiss(n, 1.0).unwrap()
}

fn nn2d(l: usize) -> Hamiltonian {
    Hamiltonian::nearest_neighbor_2d(l, 1.0, Boundary::Periodic).unwrap()
}

fn oracle(h: &Hamiltonian, sigma: f64, seed: u64) -> NoisyOracle {
    NoisyOracle::new(h.clone(), sigma, derive_seed(seed, &[stream::ORACLE])).unwrap()
}

fn chain_oracle(h: &Hamiltonian, sigma: f64, seed: u64) -> NoisyOracle {
    NoisyOracle::new(h.clone(), sigma, derive_seed(seed, &[stream::ORACLE, CHAIN_TAG])).unwrap()
}

fn random_init(h: &Hamiltonian, seed: u64) -> SpinConfig {
    let mut rng = seeded_rng(seed, &[stream::INIT, CHAIN_TAG]);
    SpinConfig::random(h.shape().unwrap(), &mut rng)
}

/// Mean |M| over fresh draws from a trained field, on a dedicated stream.
fn measured_abs_mag(q: &BernoulliField, seed: u64, draws: usize) -> f64 {
    let mut rng = seeded_rng(seed, &[stream::MEASURE]);
    let mut x = q.blank_point();
    let mut sum = 0.0;
    for _ in 0..draws {
        q.sample_into(&mut x, &mut rng);
        sum += x.magnetization().abs();
    }
    sum / draws as f64
}

/// Mean of the last tenth of a series (the settled level of a trace).
fn tail_mean(series: &[f64]) -> f64 {
    let tail = (series.len() / 10).max(1);
    let slice = &series[series.len() - tail..];
    slice.iter().sum::<f64>() / tail as f64
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn median(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    s[s.len() / 2]
}

// ---------------------------------------------------------------------------
// Criterion 1: exact-sampler correctness on enumerable systems.
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_exact_sampler_tv() {
    const TV_GATE: f64 = 0.05;
    const CHAIN_STEPS: usize = 1_000_000;
    const CHAIN_BURN: usize = 10_000;
    const CHAIN_THIN: usize = 10;
    const MODEL_DRAWS: usize = 100_000;
    let started = Instant::now();

    let systems: Vec<(&str, Hamiltonian)> = vec![
        ("chain6", Hamiltonian::chain_1d(6, 1.0, Boundary::Periodic).unwrap()),
        ("cw8", cw(8)),
    ];
    let seed = 1u64;
    let mut lines = Vec::new();
    let mut worst_chain: f64 = 0.0;
    let mut worst_model: f64 = 0.0;
    for (name, h) in &systems {
        for &beta in &[0.5, 1.0] {
            let exact = h.enumerate_boltzmann(beta).unwrap();

            let mcmc_cfg = McmcConfig::new(beta, CHAIN_STEPS, derive_seed(seed, &[CHAIN_TAG]))
                .with_burn_in(CHAIN_BURN)
                .with_thinning(CHAIN_THIN);
            let mut ch_oracle = chain_oracle(h, 0.0, seed);
            let (kept, _) = metropolis_chain(&mut ch_oracle, &mcmc_cfg, random_init(h, seed)).unwrap();
            let chain_emp = empirical_distribution(&kept).unwrap();
            let tv_chain = tv_distance(&chain_emp, exact.probabilities()).unwrap();

            let n = h.size().unwrap();
            let q0 = init_bernoulli(n, InitScheme::Perturbed { amplitude: 0.25 }, seed).unwrap();
            let brain_cfg = BrainConfig::new(beta, 200, 0.02, 1500)
                .with_seed(seed)
                .with_convergence(50, 1e-9);
            let mut tr_oracle = oracle(h, 0.0, seed);
            let (trained, _) = train(q0, &mut tr_oracle, &brain_cfg).unwrap();
            let mut rng = seeded_rng(seed, &[stream::MEASURE]);
            let mut x = trained.blank_point();
            let draws: Vec<SpinConfig> = (0..MODEL_DRAWS)
                .map(|_| {
                    trained.sample_into(&mut x, &mut rng);
                    x.clone()
                })
                .collect();
            let model_emp = empirical_distribution(&draws).unwrap();
            let tv_model = tv_distance(&model_emp, exact.probabilities()).unwrap();

            worst_chain = worst_chain.max(tv_chain);
            worst_model = worst_model.max(tv_model);
            lines.push(format!(
                "{name} beta={beta}: TV(chain)={tv_chain:.4} TV(model)={tv_model:.4}"
            ));
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst_chain <= TV_GATE && worst_model <= TV_GATE && elapsed <= 120.0;
    println!(
        "criterion 01 (exact-sampler TV): {} — worst chain TV {:.4}, worst trained-model TV {:.4} \
         (gate ≤ {TV_GATE}); {}; {:.0}s (cap 120s)",
        if pass { "PASS" } else { "FAIL" },
        worst_chain,
        worst_model,
        lines.join("; "),
        elapsed,
    );
    assert!(
        pass,
        "a factorized product field cannot match a correlated Boltzmann distribution in total \
         variation: worst chain TV {worst_chain:.4}, worst model TV {worst_model:.4}, gate {TV_GATE} \
         ({})",
        lines.join("; ")
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: gradient correctness against finite differences and
// enumeration.
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_gradient_correctness() {
    const REL_GATE: f64 = 1e-5;
    const FD_CASES: usize = 100;
    const FD_STEP: f64 = 1e-6;
    const BATCHES: usize = 100_000;
    const BATCH_SIZE: usize = 16;
    let started = Instant::now();

    // Part 1: per-coordinate score and entropy gradient vs. central
    // finite differences of log q and entropy.
    let mut rng = seeded_rng(2024, &[stream::SOLVER]);
    let mut worst_score_rel: f64 = 0.0;
    let mut worst_entropy_rel: f64 = 0.0;
    for _ in 0..FD_CASES {
        let n = 8;
        let q = BernoulliField::perturbed(n, 0.4, &mut rng).unwrap();
        let mut x = q.blank_point();
        q.sample_into(&mut x, &mut rng);

        let mut score = vec![0.0; n];
        q.accumulate_weighted_score(&x, 1.0, &mut score).unwrap();
        let neg_entropy_grad = q.neg_entropy_gradient();
        let means = q.means().to_vec();
        for j in 0..n {
            let mut up = means.clone();
            let mut dn = means.clone();
            up[j] += FD_STEP;
            dn[j] -= FD_STEP;
            let q_up = BernoulliField::new(up).unwrap();
            let q_dn = BernoulliField::new(dn).unwrap();
            let fd_score =
                (q_up.log_prob(&x).unwrap() - q_dn.log_prob(&x).unwrap()) / (2.0 * FD_STEP);
            let rel = (fd_score - score[j]).abs() / score[j].abs().max(1e-9);
            worst_score_rel = worst_score_rel.max(rel);

            let fd_neg_entropy = (-q_up.entropy() + q_dn.entropy()) / (2.0 * FD_STEP);
            let rel_h = (fd_neg_entropy - neg_entropy_grad[j]).abs()
                / neg_entropy_grad[j].abs().max(1e-9);
            worst_entropy_rel = worst_entropy_rel.max(rel_h);
        }
    }

    // Part 2: the batch estimator, averaged over many noiseless batches on
    // an enumerable system, against its enumeration-exact expectation.
    // With the batch-mean baseline the energy term's expectation carries the
    // standard (1 - 1/S) shrinkage — that exact expectation is the target;
    // the deviation from the unshrunk gradient is reported alongside.
    let h = cw(8);
    let n = 8;
    let beta = 1.0;
    let q = {
        let mut init_rng = seeded_rng(7, &[stream::INIT]);
        BernoulliField::perturbed(n, 0.25, &mut init_rng).unwrap()
    };
    let exact = h.enumerate_boltzmann(beta).unwrap();
    let mut energy_grad = vec![0.0; n]; // E_q[beta E * score]
    for i in 0..exact.num_states() {
        let x = exact.config(i);
        let e = exact.energies()[i];
        let qp = q.log_prob(&x).unwrap().exp();
        let mut score = vec![0.0; n];
        q.accumulate_weighted_score(&x, 1.0, &mut score).unwrap();
        for j in 0..n {
            energy_grad[j] += qp * beta * e * score[j];
        }
    }
    let neg_entropy_grad = q.neg_entropy_gradient();
    let shrink = 1.0 - 1.0 / BATCH_SIZE as f64;
    let estimator_target: Vec<f64> = (0..n)
        .map(|j| shrink * energy_grad[j] + neg_entropy_grad[j])
        .collect();
    let plain_grad: Vec<f64> = (0..n).map(|j| energy_grad[j] + neg_entropy_grad[j]).collect();

    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    let mut batch_rng = seeded_rng(77, &[stream::SOLVER]);
    let mut x = q.blank_point();
    for _ in 0..BATCHES {
        let mut samples = Vec::with_capacity(BATCH_SIZE);
        let mut rewards = Vec::with_capacity(BATCH_SIZE);
        for _ in 0..BATCH_SIZE {
            q.sample_into(&mut x, &mut batch_rng);
            rewards.push(beta * h.energy(&x).unwrap());
            samples.push(x.clone());
        }
        let g = batch_gradient(&q, &samples, &rewards).unwrap();
        for j in 0..n {
            sum[j] += g[j];
            sum_sq[j] += g[j] * g[j];
        }
    }
    let b = BATCHES as f64;
    let mut worst_z: f64 = 0.0;
    let mut worst_plain_z: f64 = 0.0;
    for j in 0..n {
        let m = sum[j] / b;
        let var = (sum_sq[j] / b - m * m).max(0.0);
        let se = (var / b).sqrt();
        worst_z = worst_z.max((m - estimator_target[j]).abs() / se);
        worst_plain_z = worst_plain_z.max((m - plain_grad[j]).abs() / se);
    }

    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst_score_rel <= REL_GATE && worst_entropy_rel <= REL_GATE && worst_z <= 3.0
        && elapsed <= 300.0;
    println!(
        "criterion 02 (gradient correctness): {} — score fd rel err {:.2e}, entropy fd rel err \
         {:.2e} (gate ≤ {REL_GATE:.0e}); batch estimator vs exact expectation worst z {:.2} over \
         {BATCHES} batches of {BATCH_SIZE} (gate ≤ 3; vs unshrunk gradient z {:.1}, showing the \
         documented (1-1/S) energy-term shrinkage of the batch-mean baseline); {:.0}s (cap 300s)",
        if pass { "PASS" } else { "FAIL" },
        worst_score_rel,
        worst_entropy_rel,
        worst_z,
        worst_plain_z,
        elapsed,
    );
    assert!(
        pass,
        "gradient checks: score rel {worst_score_rel:.2e}, entropy rel {worst_entropy_rel:.2e}, \
         estimator z {worst_z:.2}, elapsed {elapsed:.0}s"
    );
}

// ---------------------------------------------------------------------------
// Criteria 3 and 4: the noisy-oracle headline — resilience and acceleration
// on the fully connected 1024-spin model at T = 0.33, sigma = 0.03.
// ---------------------------------------------------------------------------

const HEADLINE_N: usize = 1024;
const HEADLINE_BETA: f64 = 1.0 / 0.33;
const HEADLINE_SIGMA: f64 = 0.03;
const HEADLINE_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
/// One million oracle evaluations; the plain chain measures proposal and
/// current state each step, so this is 500k steps.
const CHAIN_BUDGET_EVALS: u64 = 1_000_000;

fn headline_chain(seed: u64) -> (f64, brain_core::RunRecord) {
    let h = cw(HEADLINE_N);
    let steps = (CHAIN_BUDGET_EVALS / 2) as usize;
    let cfg = McmcConfig::new(HEADLINE_BETA, steps, derive_seed(seed, &[CHAIN_TAG]))
        .with_thinning(100);
    let mut ora = chain_oracle(&h, HEADLINE_SIGMA, seed);
    let (_, record) = metropolis_chain(&mut ora, &cfg, random_init(&h, seed)).unwrap();
    let settled = tail_mean(&record.abs_mag_series());
    (settled, record)
}

#[test]
fn criterion_03_noise_resilience() {
    const BRAIN_GATE: f64 = 0.95;
    const CHAIN_GATE: f64 = 0.60;
    // Quality-oriented training: a large batch dilutes the per-sample score
    // kicks that set the stationary spread below full order.
    const BATCH: usize = 10_000;
    const LEARNING_RATE: f64 = 0.005;
    const ITERS: usize = 600;
    let started = Instant::now();

    let h = cw(HEADLINE_N);
    let mut brain_fids = Vec::new();
    let mut chain_fids = Vec::new();
    for &seed in &HEADLINE_SEEDS {
        let q0 = init_bernoulli(HEADLINE_N, InitScheme::Perturbed { amplitude: 0.25 }, seed)
            .unwrap();
        let cfg = BrainConfig::new(HEADLINE_BETA, BATCH, LEARNING_RATE, ITERS)
            .with_seed(seed)
            .with_convergence(50, 1e-9);
        let mut ora = oracle(&h, HEADLINE_SIGMA, seed);
        let (trained, _) = train(q0, &mut ora, &cfg).unwrap();
        brain_fids.push(fidelity(measured_abs_mag(&trained, seed, 5000)));

        let (settled, _) = headline_chain(seed);
        chain_fids.push(fidelity(settled));
    }
    let brain_mean = mean(&brain_fids);
    let chain_mean = mean(&chain_fids);
    let elapsed = started.elapsed().as_secs_f64();
    let pass = brain_mean >= BRAIN_GATE && chain_mean <= CHAIN_GATE && elapsed <= 900.0;
    println!(
        "criterion 03 (noise resilience): {} — trained-model mean fidelity {:.4} (gate ≥ \
         {BRAIN_GATE}, per-seed {:?}), chain mean fidelity {:.4} (gate ≤ {CHAIN_GATE}, per-seed \
         {:?}) after {CHAIN_BUDGET_EVALS} evaluations; {:.0}s (cap 900s)",
        if pass { "PASS" } else { "FAIL" },
        brain_mean,
        brain_fids.iter().map(|f| (f * 1e4).round() / 1e4).collect::<Vec<_>>(),
        chain_mean,
        chain_fids.iter().map(|f| (f * 1e4).round() / 1e4).collect::<Vec<_>>(),
        elapsed,
    );
    assert!(
        pass,
        "trained-model mean fidelity {brain_mean:.4} vs gate {BRAIN_GATE} (the plain-gradient \
         sampling noise floor leaves the stationary spread short of full order at any batch \
         size/learning rate this budget affords), chain mean {chain_mean:.4} vs gate {CHAIN_GATE}, \
         elapsed {elapsed:.0}s"
    );
}

#[test]
fn criterion_04_acceleration() {
    const RATIO_GATE: f64 = 20.0;
    // Speed-oriented training: small batches and a hot learning rate cross
    // the chain's settled level quickly; the stationary quality that costs
    // is criterion 3's subject, the crossing speed is this one's.
    const BATCH: usize = 1000;
    const LEARNING_RATE: f64 = 0.02;
    const ITERS: usize = 800;
    let started = Instant::now();

    let h = cw(HEADLINE_N);
    let mut ratios = Vec::new();
    let mut details = Vec::new();
    for &seed in &HEADLINE_SEEDS {
        let (settled, _) = headline_chain(seed);

        let q0 = init_bernoulli(HEADLINE_N, InitScheme::Perturbed { amplitude: 0.25 }, seed)
            .unwrap();
        let cfg = BrainConfig::new(HEADLINE_BETA, BATCH, LEARNING_RATE, ITERS)
            .with_seed(seed)
            .with_convergence(50, 1e-9);
        let mut ora = oracle(&h, HEADLINE_SIGMA, seed);
        let (_, record) = train(q0, &mut ora, &cfg).unwrap();
        let tts = time_to_solution(&record, settled);
        let ratio = tts.map_or(0.0, |t| CHAIN_BUDGET_EVALS as f64 / t as f64);
        details.push(format!(
            "seed {seed}: chain settles at |M|={settled:.3}, training crossed at {} evals, \
             ratio {ratio:.0}",
            tts.map_or("-".into(), |t| t.to_string()),
        ));
        ratios.push(ratio);
    }
    let med = median(&ratios);
    let elapsed = started.elapsed().as_secs_f64();
    let pass = med >= RATIO_GATE && elapsed <= 900.0;
    println!(
        "criterion 04 (acceleration): {} — median evaluation-count ratio {:.0} (gate ≥ \
         {RATIO_GATE}; chain budget {CHAIN_BUDGET_EVALS} over training's crossing of the chain's \
         settled |M|); {}; {:.0}s (cap 900s)",
        if pass { "PASS" } else { "FAIL" },
        med,
        details.join("; "),
        elapsed,
    );
    assert!(pass, "median ratio {med:.1} vs gate {RATIO_GATE}, elapsed {elapsed:.0}s");
}

// ---------------------------------------------------------------------------
// Criterion 5: phase transitions — mean-field and lattice critical
// temperatures, and the upward shift of the apparent transition under noise.
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_phase_transitions() {
    const CW_TC: (f64, f64) = (0.72, 1.02); // 0.87 ± 0.15
    const NN2D_TC: (f64, f64) = (1.9, 2.5); // 2.2 ± 0.3
    let started = Instant::now();
    let seed = 1u64;

    // (a) Fully connected 1024-spin model: trained-model sweep over 20
    // uniform temperatures.
    let h = cw(HEADLINE_N);
    let temps: Vec<f64> = (0..20).map(|i| 0.33 + i as f64 * (2.0 - 0.33) / 19.0).collect();
    let template = BrainConfig::new(1.0, 512, 0.01, 600)
        .with_seed(seed)
        .with_convergence(50, 1e-9);
    let options = SweepOptions {
        measure_samples: 2000,
        averaging_k: 1,
        warm_start: false,
    };
    let points = temperature_sweep(&h, &[0.0], &temps, &template, options).unwrap();
    let mags: Vec<f64> = points.iter().map(|p| p.abs_magnetization).collect();
    let cw_tc = estimate_tc(&temps, &mags).unwrap();

    // (b) 32x32 periodic lattice: aligned-start Metropolis melting curve,
    // 400 equilibration + 400 measurement sweeps per grid point.
    let l = 32;
    let lat = nn2d(l);
    let n = l * l;
    let lat_temps: Vec<f64> = (0..20).map(|i| 0.33 + i as f64 * (4.0 - 0.33) / 19.0).collect();
    let mut lat_mags = Vec::new();
    for (ti, &t) in lat_temps.iter().enumerate() {
        let cfg = McmcConfig::new(1.0 / t, 800 * n, derive_seed(seed, &[CHAIN_TAG, ti as u64]))
            .with_burn_in(400 * n)
            .with_thinning(n)
            .with_cached_energy();
        let mut ora = chain_oracle(&lat, 0.0, derive_seed(seed, &[ti as u64]));
        let (kept, _) = metropolis_chain(&mut ora, &cfg, SpinConfig::all_up(lat.shape().unwrap()))
            .unwrap();
        lat_mags.push(mean(
            &kept.iter().map(|s| s.magnetization().abs()).collect::<Vec<_>>(),
        ));
    }
    let lat_tc = estimate_tc(&lat_temps, &lat_mags).unwrap();

    // (c) Apparent-transition shift under oracle noise: trained-model sweeps
    // of the same lattice at sigma = 0 and 0.03 on a grid above the true
    // transition (the model's own ordering edge lives there), sign-gated.
    let shift_temps: Vec<f64> = (0..12).map(|i| 2.5 + i as f64 * (5.0 - 2.5) / 11.0).collect();
    let shift_template = BrainConfig::new(1.0, 512, 0.02, 400)
        .with_seed(seed)
        .with_convergence(50, 1e-9);
    let shift_points =
        temperature_sweep(&lat, &[0.0, 0.03], &shift_temps, &shift_template, options).unwrap();
    let tc_of = |sigma: f64| {
        let mags: Vec<f64> = shift_points
            .iter()
            .filter(|p| p.sigma == sigma)
            .map(|p| p.abs_magnetization)
            .collect();
        estimate_tc(&shift_temps, &mags).unwrap()
    };
    let tc_clean = tc_of(0.0);
    let tc_noisy = tc_of(0.03);

    let elapsed = started.elapsed().as_secs_f64();
    let pass = (CW_TC.0..=CW_TC.1).contains(&cw_tc)
        && (NN2D_TC.0..=NN2D_TC.1).contains(&lat_tc)
        && tc_noisy > tc_clean
        && elapsed <= 1800.0;
    println!(
        "criterion 05 (phase transitions): {} — fully connected Tc {:.3} (gate {:?}), lattice \
         melting Tc {:.3} (gate {:?}), apparent transition under noise {:.3} vs {:.3} clean \
         (gate: shifts upward); {:.0}s (cap 1800s)",
        if pass { "PASS" } else { "FAIL" },
        cw_tc,
        CW_TC,
        lat_tc,
        NN2D_TC,
        tc_noisy,
        tc_clean,
        elapsed,
    );
    assert!(
        pass,
        "cw tc {cw_tc:.3} in {CW_TC:?}, lattice tc {lat_tc:.3} in {NN2D_TC:?}, shift \
         {tc_clean:.3} -> {tc_noisy:.3}, elapsed {elapsed:.0}s"
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: parallel tempering's failure under measurement noise.
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_parallel_tempering_failure() {
    const COLD_ORDER_GATE: f64 = 0.9;
    const NOISY_DISORDER_GATE: f64 = 0.3;
    let started = Instant::now();
    let seed = 1u64;
    let h = cw(HEADLINE_N);
    let cfg = PtConfig {
        replicas: 10,
        temp_min: 0.33,
        temp_max: 2.0,
        swap_interval: 1000,
        steps: 40_000,
        seed: derive_seed(seed, &[CHAIN_TAG]),
    };

    let run_at = |sigma: f64| {
        parallel_tempering(
            |replica| {
                NoisyOracle::new(
                    h.clone(),
                    sigma,
                    derive_seed(seed, &[stream::ORACLE, CHAIN_TAG, replica as u64]),
                )
            },
            &cfg,
        )
        .unwrap()
    };

    let clean = run_at(0.0);
    let coldest_clean = clean.replicas[0].mean_abs_magnetization;
    let noisy = run_at(HEADLINE_SIGMA);
    let noisy_max = noisy
        .replicas
        .iter()
        .map(|r| r.mean_abs_magnetization)
        .fold(f64::NEG_INFINITY, f64::max);

    let elapsed = started.elapsed().as_secs_f64();
    let pass =
        coldest_clean >= COLD_ORDER_GATE && noisy_max <= NOISY_DISORDER_GATE && elapsed <= 600.0;
    println!(
        "criterion 06 (replica-exchange failure mode): {} — noiseless coldest replica |M| {:.4} \
         (gate ≥ {COLD_ORDER_GATE}), noisy max-over-replicas |M| {:.4} (gate ≤ \
         {NOISY_DISORDER_GATE}); swap acceptance {:.2} clean / {:.2} noisy; {:.0}s (cap 600s)",
        if pass { "PASS" } else { "FAIL" },
        coldest_clean,
        noisy_max,
        clean.swap_acceptance_rate(),
        noisy.swap_acceptance_rate(),
        elapsed,
    );
    assert!(
        pass,
        "coldest clean {coldest_clean:.4} (gate {COLD_ORDER_GATE}), noisy max {noisy_max:.4} \
         (gate {NOISY_DISORDER_GATE}), elapsed {elapsed:.0}s"
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: measurement averaging restores the chain.
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_energy_averaging() {
    const K50_GATE: f64 = 0.90;
    const K1_GATE: f64 = 0.60;
    const STEPS: usize = 30_000;
    let started = Instant::now();
    let h = cw(HEADLINE_N);
    let seeds = [1u64, 2, 3];

    let settled_at = |k: u32| {
        let mags: Vec<f64> = seeds
            .iter()
            .map(|&seed| {
                let cfg = McmcConfig::new(
                    HEADLINE_BETA,
                    STEPS,
                    derive_seed(seed, &[CHAIN_TAG, k as u64]),
                )
                .with_thinning(30)
                .with_cached_energy();
                let mut ora = NoisyOracle::with_averaging(
                    h.clone(),
                    HEADLINE_SIGMA,
                    derive_seed(seed, &[stream::ORACLE, CHAIN_TAG, k as u64]),
                    k,
                )
                .unwrap();
                let (_, record) = averaged_metropolis(&mut ora, &cfg, random_init(&h, seed)).unwrap();
                tail_mean(&record.abs_mag_series())
            })
            .collect();
        mean(&mags)
    };

    let m50 = settled_at(50);
    let m1 = settled_at(1);
    let elapsed = started.elapsed().as_secs_f64();
    let pass = m50 >= K50_GATE && m1 <= K1_GATE && elapsed <= 600.0;
    println!(
        "criterion 07 (energy averaging): {} — 50-fold averaged chain settles at |M| {:.4} (gate \
         ≥ {K50_GATE}), unaveraged at {:.4} (gate ≤ {K1_GATE}); {STEPS} steps, 3 seeds; {:.0}s \
         (cap 600s)",
        if pass { "PASS" } else { "FAIL" },
        m50,
        m1,
        elapsed,
    );
    assert!(pass, "k=50 |M| {m50:.4} (gate {K50_GATE}), k=1 |M| {m1:.4} (gate {K1_GATE})");
}

// ---------------------------------------------------------------------------
// Criterion 8: the closed-form noise-variance delta matches Monte Carlo.
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_variance_proposition() {
    const TRIALS: usize = 1_000_000;
    const SIGMA: f64 = 0.1;
    const BETA: f64 = 1.25;
    let started = Instant::now();

    // Frozen batch: 8 samples from a perturbed field over the 8-spin fully
    // connected model, with exact energies and per-coordinate scores.
    let h = cw(8);
    let n = 8;
    let s = 8;
    let q = {
        let mut rng = seeded_rng(3, &[stream::INIT]);
        BernoulliField::perturbed(n, 0.25, &mut rng).unwrap()
    };
    let mut rng = seeded_rng(3, &[stream::SOLVER]);
    let mut x = q.blank_point();
    let mut energies = Vec::with_capacity(s);
    let mut scores: Vec<Vec<f64>> = vec![Vec::with_capacity(s); n];
    for _ in 0..s {
        q.sample_into(&mut x, &mut rng);
        energies.push(h.energy(&x).unwrap());
        let mut sc = vec![0.0; n];
        q.accumulate_weighted_score(&x, 1.0, &mut sc).unwrap();
        for j in 0..n {
            scores[j].push(sc[j]);
        }
    }

    // Monte Carlo over fresh noise realizations: per coordinate, the
    // variance of the unbaselined estimator minus the baselined one,
    // estimated pairwise per realization so one standard error covers the
    // difference.
    let mut noise_rng = seeded_rng(3, &[stream::ORACLE]);
    let inv_s = 1.0 / s as f64;
    let mut g_plain = vec![vec![0.0f64; TRIALS]; n];
    let mut g_base = vec![vec![0.0f64; TRIALS]; n];
    let normal = rand_distr::Normal::new(0.0, SIGMA).unwrap();
    for t in 0..TRIALS {
        let mut rewards = [0.0f64; 8];
        let mut rbar = 0.0;
        for i in 0..s {
            let noisy = energies[i] + rand_distr::Distribution::sample(&normal, &mut noise_rng);
            rewards[i] = BETA * noisy;
            rbar += rewards[i];
        }
        rbar *= inv_s;
        for j in 0..n {
            let mut acc_plain = 0.0;
            let mut acc_base = 0.0;
            for i in 0..s {
                acc_plain += scores[j][i] * rewards[i];
                acc_base += scores[j][i] * (rewards[i] - rbar);
            }
            g_plain[j][t] = acc_plain * inv_s;
            g_base[j][t] = acc_base * inv_s;
        }
    }

    let mut worst_z: f64 = 0.0;
    let mut details = Vec::new();
    for j in 0..n {
        let analytic = noise_variance_delta(&scores[j], &energies, SIGMA, BETA).unwrap();
        let mp = mean(&g_plain[j]);
        let mb = mean(&g_base[j]);
        let diffs: Vec<f64> = (0..TRIALS)
            .map(|t| {
                let a = g_plain[j][t] - mp;
                let b = g_base[j][t] - mb;
                a * a - b * b
            })
            .collect();
        let mc = mean(&diffs);
        let var = diffs.iter().map(|d| (d - mc) * (d - mc)).sum::<f64>() / (TRIALS - 1) as f64;
        let se = (var / TRIALS as f64).sqrt();
        let z = (mc - analytic).abs() / se;
        worst_z = worst_z.max(z);
        if j < 2 {
            details.push(format!("coord {j}: analytic {analytic:.3e}, mc {mc:.3e} ± {se:.1e}"));
        }
    }

    // Exact-zero cases: no noise, and a batch whose scores sum to zero.
    let zero_sigma = noise_variance_delta(&scores[0], &energies, 0.0, BETA).unwrap();
    let zero_sum =
        noise_variance_delta(&[1.0, -1.0, 2.0, -2.0], &[0.5, 1.5, -0.25, 2.0], SIGMA, BETA)
            .unwrap();

    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst_z <= 3.0 && zero_sigma == 0.0 && zero_sum == 0.0 && elapsed <= 120.0;
    println!(
        "criterion 08 (variance proposition): {} — worst |analytic − mc|/se = {:.2} over {} \
         coordinates, {TRIALS} noise draws ({}); sigma=0 case {zero_sigma}, zero-sum-scores case \
         {zero_sum} (both must be exactly 0); {:.0}s (cap 120s)",
        if pass { "PASS" } else { "FAIL" },
        worst_z,
        n,
        details.join("; "),
        elapsed,
    );
    assert!(
        pass,
        "worst z {worst_z:.2} (gate 3), zero cases {zero_sigma}/{zero_sum}, elapsed {elapsed:.0}s"
    );
}

// ---------------------------------------------------------------------------
// Criterion 9: evaluations-to-convergence scaling and the noise penalty.
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_scaling_trend() {
    const SIZES: [usize; 3] = [1024, 4096, 16384];
    const EXPONENT_BAND: (f64, f64) = (0.7, 1.3);
    /// Stopping tolerance at the anchor size; grows linearly with size so
    /// the rule tracks the same per-spin resolution everywhere (the loss is
    /// extensive while the batch schedule keeps its moving-average noise
    /// roughly size-independent).
    const ANCHOR_TOL: f64 = 0.3;
    let started = Instant::now();
    let seed = 1u64;

    let mut exponents = Vec::new();
    let mut all_converged = true;
    let mut details = Vec::new();
    for &sigma in &[0.0, HEADLINE_SIGMA] {
        let mut points = Vec::new();
        for (si, &n) in SIZES.iter().enumerate() {
            let batch = if sigma == 0.0 {
                n
            } else {
                // The oracle noise rides on the full energy, which is
                // extensive, so the batch must outgrow the system for the
                // gradient signal to keep up.
                (1.25 * n as f64 * (n as f64 / SIZES[0] as f64).powf(0.25)).ceil() as usize
            };
            let h = cw(n);
            let run_seed = derive_seed(seed, &[si as u64, sigma.to_bits()]);
            let q0 =
                init_bernoulli(n, InitScheme::Perturbed { amplitude: 0.25 }, run_seed).unwrap();
            let cfg = BrainConfig::new(HEADLINE_BETA, batch, 0.01, 1500)
                .with_seed(run_seed)
                .with_convergence(50, ANCHOR_TOL * n as f64 / SIZES[0] as f64);
            let mut ora = oracle(&h, sigma, run_seed);
            let (_, record) = train(q0, &mut ora, &cfg).unwrap();
            all_converged &= record.converged();
            details.push(format!(
                "sigma={sigma} n={n}: {} iters, {} evals{}",
                record.iterations(),
                record.total_evals(),
                if record.converged() { "" } else { " (hit cap)" },
            ));
            points.push((n as f64, record.total_evals() as f64));
        }
        let (_, exponent) = fit_power(&points).unwrap();
        exponents.push(exponent);
    }

    let elapsed = started.elapsed().as_secs_f64();
    let in_band = (EXPONENT_BAND.0..=EXPONENT_BAND.1).contains(&exponents[0]);
    let pass = in_band && exponents[1] > exponents[0] && all_converged && elapsed <= 2700.0;
    println!(
        "criterion 09 (scaling trend): {} — noiseless exponent {:.3} (gate within \
         {EXPONENT_BAND:?}), noisy exponent {:.3} (gate: strictly larger); {}; {:.0}s (cap 2700s)",
        if pass { "PASS" } else { "FAIL" },
        exponents[0],
        exponents[1],
        details.join("; "),
        elapsed,
    );
    assert!(
        pass,
        "noiseless exponent {:.3}, noisy {:.3}, all converged {all_converged}, elapsed \
         {elapsed:.0}s",
        exponents[0],
        exponents[1]
    );
}

// ---------------------------------------------------------------------------
// Criterion 10: batch-size ablation — monotone quality with a plateau.
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_sample_size_ablation() {
    const BATCHES: [usize; 4] = [100, 300, 1000, 3000];
    const PLATEAU_GATE: f64 = 0.99;
    const LEARNING_RATE: f64 = 0.002;
    const ITERS: usize = 4000;
    let started = Instant::now();
    let h = cw(HEADLINE_N);
    let seeds = [1u64, 2, 3];

    let mut means = Vec::new();
    for (bi, &batch) in BATCHES.iter().enumerate() {
        let mags: Vec<f64> = seeds
            .iter()
            .map(|&seed| {
                let run_seed = derive_seed(seed, &[bi as u64]);
                let q0 =
                    init_bernoulli(HEADLINE_N, InitScheme::Perturbed { amplitude: 0.25 }, run_seed)
                        .unwrap();
                let cfg = BrainConfig::new(HEADLINE_BETA, batch, LEARNING_RATE, ITERS)
                    .with_seed(run_seed)
                    .with_convergence(50, 1e-9);
                let mut ora = oracle(&h, 0.0, run_seed);
                let (trained, _) = train(q0, &mut ora, &cfg).unwrap();
                measured_abs_mag(&trained, run_seed, 2000)
            })
            .collect();
        means.push(mean(&mags));
    }

    let monotone = means.windows(2).all(|w| w[1] >= w[0]);
    let plateau = means[2].min(means[3]);
    let elapsed = started.elapsed().as_secs_f64();
    let pass = monotone && plateau >= PLATEAU_GATE && elapsed <= 900.0;
    println!(
        "criterion 10 (batch-size ablation): {} — mean final |M| {:?} over batches {:?} \
         (gates: monotone nondecreasing = {monotone}, plateau from 1000 up ≥ {PLATEAU_GATE}, \
         measured {plateau:.4}); {:.0}s (cap 900s)",
        if pass { "PASS" } else { "FAIL" },
        means.iter().map(|m| (m * 1e4).round() / 1e4).collect::<Vec<_>>(),
        BATCHES,
        elapsed,
    );
    assert!(
        pass,
        "means {means:?}, monotone {monotone}, plateau {plateau:.4} vs gate {PLATEAU_GATE} (the \
         per-sample update kicks bound the stationary spread away from full order at the pinned \
         batch sizes), elapsed {elapsed:.0}s"
    );
}

// ---------------------------------------------------------------------------
// Criterion 11: effective-sample-size advantage of the trained model.
// ---------------------------------------------------------------------------

#[test]
fn criterion_11_ess_comparison() {
    const RATIO_GATE: f64 = 10.0;
    const DRAWS: usize = 2000;
    let started = Instant::now();
    let l = 8;
    let n = l * l;
    let beta = 0.4407;
    let h = nn2d(l);
    let seeds = [1u64, 2, 3, 4, 5];

    let mut ratios = Vec::new();
    let mut details = Vec::new();
    for &seed in &seeds {
        let q0 = init_bernoulli(n, InitScheme::Perturbed { amplitude: 0.25 }, seed).unwrap();
        let cfg = BrainConfig::new(beta, 512, 0.02, 200)
            .with_seed(seed)
            .with_convergence(50, 1e-9);
        let mut ora = oracle(&h, 0.0, seed);
        let (trained, record) = train(q0, &mut ora, &cfg).unwrap();
        let budget = record.total_evals();

        let mut rng = seeded_rng(seed, &[stream::MEASURE]);
        let mut x = trained.blank_point();
        let draws: Vec<SpinConfig> = (0..DRAWS)
            .map(|_| {
                trained.sample_into(&mut x, &mut rng);
                x.clone()
            })
            .collect();
        let model_ess = ess_for_samples(&trained, &h, &draws, beta).unwrap();

        // The chain gets the training run's full oracle budget: two
        // measurements per step, burn-in a fifth, no thinning, and its
        // effective sample size comes from the integrated autocorrelation
        // of the exact post-burn-in energy trace.
        let steps = (budget / 2) as usize;
        let chain_cfg = McmcConfig::new(beta, steps, derive_seed(seed, &[CHAIN_TAG]))
            .with_burn_in(steps / 5);
        let mut ch_oracle = chain_oracle(&h, 0.0, seed);
        let (kept, _) = metropolis_chain(&mut ch_oracle, &chain_cfg, random_init(&h, seed)).unwrap();
        let energies: Vec<f64> = kept.iter().map(|s| h.energy(s).unwrap()).collect();
        let chain_ess = ess_autocorr(&energies).unwrap();

        let ratio = model_ess / chain_ess;
        details.push(format!(
            "seed {seed}: model {model_ess:.4} vs chain {chain_ess:.5} ({budget} evals) = {ratio:.0}x"
        ));
        ratios.push(ratio);
    }
    let med = median(&ratios);

    // Exact properties of the importance-weight estimator: (0,1] bounds on
    // arbitrary inputs, and bit-exact shift invariance when the shift is
    // exactly representable against the weights (lattice-valued log-weights,
    // power-of-two shift).
    let mut prop_rng = seeded_rng(11, &[stream::MEASURE]);
    let mut bounds_ok = true;
    let mut shift_ok = true;
    for _ in 0..200 {
        let k = 1 + (rand::Rng::random::<u32>(&mut prop_rng) % 64) as usize;
        let weights: Vec<f64> = (0..k)
            .map(|_| {
                let grid: i32 = rand::Rng::random_range(&mut prop_rng, -(1 << 20)..(1 << 20));
                grid as f64 / (1 << 20) as f64
            })
            .collect();
        let e = log_weight_ess(&weights).unwrap();
        bounds_ok &= e > 0.0 && e <= 1.0;
        let shifted: Vec<f64> = weights.iter().map(|a| a + 512.0).collect();
        shift_ok &= log_weight_ess(&shifted).unwrap() == e;
    }

    let elapsed = started.elapsed().as_secs_f64();
    let pass = med >= RATIO_GATE && bounds_ok && shift_ok && elapsed <= 600.0;
    println!(
        "criterion 11 (effective sample size): {} — median normalized-ESS ratio {:.0} over {} \
         seeds (gate ≥ {RATIO_GATE}; {DRAWS} fresh draws vs a matched-budget chain); bounds in \
         (0,1]: {bounds_ok}, exact shift invariance: {shift_ok}; {}; {:.0}s (cap 600s)",
        if pass { "PASS" } else { "FAIL" },
        med,
        seeds.len(),
        details.join("; "),
        elapsed,
    );
    assert!(
        pass,
        "median ratio {med:.1} (gate {RATIO_GATE}), bounds {bounds_ok}, shift {shift_ok}, \
         elapsed {elapsed:.0}s"
    );
}

// ---------------------------------------------------------------------------
// Criterion 12: bundled configs are bytewise reproducible.
// ---------------------------------------------------------------------------

#[test]
fn criterion_12_determinism() {
    let started = Instant::now();
    let configs_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    // Desk configs are the gate; the `full/` variants are the documented
    // long-running scripts. The heavy configs run as a single seed — the
    // rerun contract is per-seed, and this keeps the check inside a test
    // budget.
    let single_seed: &[&str] =
        &["cw_sweep", "convergence_race", "ess_compare", "sample_size_ablation", "scaling"];

    let mut names: Vec<PathBuf> = fs::read_dir(&configs_dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension().and_then(|x| x.to_str()) == Some("toml")).then_some(p)
        })
        .collect();
    names.sort();
    assert!(names.len() >= 11, "expected the full desk config set, found {}", names.len());

    let tmp = tempfile::tempdir().unwrap();
    let mut checked_files = 0;
    let mut diffs = Vec::new();
    for config in &names {
        let stem = config.file_stem().unwrap().to_str().unwrap().to_owned();
        let out_dir = tmp.path().join(&stem);
        let mut args = vec![
            "run".to_owned(),
            config.to_str().unwrap().to_owned(),
            "--out".to_owned(),
            out_dir.to_str().unwrap().to_owned(),
        ];
        if single_seed.contains(&stem.as_str()) {
            args.push("--seed".to_owned());
            args.push("1".to_owned());
        }
        let run = |args: &[String]| {
            let out = std::process::Command::new(env!("CARGO_BIN_EXE_brain"))
                .args(args)
                .output()
                .unwrap();
            assert!(
                out.status.success(),
                "{stem} failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        };
        run(&args);
        let snapshot: Vec<(String, Vec<u8>)> = {
            let mut files: Vec<_> = fs::read_dir(&out_dir)
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            files.sort();
            files
                .iter()
                .map(|p| {
                    (
                        p.file_name().unwrap().to_str().unwrap().to_owned(),
                        fs::read(p).unwrap(),
                    )
                })
                .collect()
        };
        run(&args);
        for (name, before) in &snapshot {
            let after = fs::read(out_dir.join(name)).unwrap();
            if &after != before {
                diffs.push(format!("{stem}/{name}"));
            }
            checked_files += 1;
        }
    }

    let elapsed = started.elapsed().as_secs_f64();
    let pass = diffs.is_empty();
    println!(
        "criterion 12 (determinism): {} — {} artifacts across {} bundled configs byte-compared \
         after a same-seed rerun{}; {:.0}s",
        if pass { "PASS" } else { "FAIL" },
        checked_files,
        names.len(),
        if pass {
            ", all identical".to_owned()
        } else {
            format!(", differing: {}", diffs.join(", "))
        },
        elapsed,
    );
    assert!(pass, "non-reproducible artifacts: {}", diffs.join(", "));
}
