use spinvar::optimizers::{GradientConfig, QnspsaConfig, SpsaConfig};
use spinvar::problems::build_mgm;
use spinvar::vqa::{vqe_run, Ansatz, OptimizerChoice, RunConfig, Simulator, VqaResult};
use spinvar::{MgmParams, NoiseConfig};

fn strip_time(mut r: VqaResult) -> VqaResult {
    r.trace.wall_time_s = 0.0;
    r
}

fn noisy_run(opt: OptimizerChoice, threads: usize) -> VqaResult {
    let h = build_mgm(&MgmParams::new(4)).unwrap();
    let ansatz = Ansatz::efficient_su2(4, 1).unwrap();
    let mut cfg = RunConfig::new("mgm", opt, 6, 42);
    cfg.simulator = Simulator::Sampled {
        shots: 512,
        noise: NoiseConfig::nisq(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    strip_time(pool.install(|| vqe_run(&h, &ansatz, &cfg)).unwrap())
}

#[test]
fn noisy_runs_do_not_depend_on_thread_count() {
    for opt in [
        OptimizerChoice::Spsa(SpsaConfig::default()),
        OptimizerChoice::Qnspsa(QnspsaConfig::default()),
    ] {
        assert_eq!(noisy_run(opt.clone(), 1), noisy_run(opt, 4));
    }
}

#[test]
fn different_seeds_differ() {
    let h = build_mgm(&MgmParams::new(4)).unwrap();
    let ansatz = Ansatz::efficient_su2(4, 1).unwrap();
    let a = RunConfig::new("mgm", OptimizerChoice::Grad(GradientConfig::default()), 3, 1);
    let b = RunConfig { seed: 2, ..a.clone() };
    let ra = vqe_run(&h, &ansatz, &a).unwrap();
    let rb = vqe_run(&h, &ansatz, &b).unwrap();
    assert_ne!(ra.trace.final_theta, rb.trace.final_theta);
}

#[test]
fn noiseless_vqe_reaches_the_ground_energy() {
    let h = build_mgm(&MgmParams::new(4)).unwrap();
    let ansatz = Ansatz::efficient_su2(4, 5).unwrap();
    let mut cfg = RunConfig::new("mgm", OptimizerChoice::Grad(GradientConfig::default()), 500, 0);
    cfg.exact_energy = Some(-4.1);
    let r = vqe_run(&h, &ansatz, &cfg).unwrap();
    assert!((r.best_energy + 4.1).abs() < 1e-6, "{}", r.best_energy);
    assert_eq!(r.converged, Some(true));
    let values: Vec<f64> = r.trace.records.iter().map(|x| x.best_objective).collect();
    assert!(values.windows(2).all(|w| w[1] <= w[0]));
}
