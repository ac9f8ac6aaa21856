// scratch calibration harness (not shipped)
use club_cascade_cli::config::{AlgorithmKind, AlphaSpec, BetaSpec, ExperimentConfig, InitSpec, Scenario};
use club_cascade_cli::runner::run_replay;

fn base(horizon: u64, beta: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.scenario = Scenario::Replay;
    cfg.u = 200;
    cfg.l = 1000;
    cfg.t = horizon;
    cfg.stride = horizon;
    cfg.beta = BetaSpec::Value(beta);
    cfg.seeds = (0..3).collect();
    cfg.threads = 2;
    cfg
}

fn mean_final(cfg: &ExperimentConfig) -> f64 {
    let records = run_replay(cfg).unwrap();
    let finals: Vec<f64> = records.iter().filter(|r| r.t == cfg.t).map(|r| r.metric).collect();
    finals.iter().sum::<f64>() / finals.len() as f64
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let horizon: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    for beta in [1.0, 3.0] {
        let mut cfg = base(horizon, beta);
        cfg.algorithms = vec![AlgorithmKind::SingleCluster, AlgorithmKind::PerUser];
        let records = run_replay(&cfg).unwrap();
        for algo in [AlgorithmKind::SingleCluster, AlgorithmKind::PerUser] {
            let finals: Vec<f64> = records.iter().filter(|r| r.algorithm == algo && r.t == horizon).map(|r| r.metric).collect();
            println!("beta {beta} {algo}: {:.0}", finals.iter().sum::<f64>() / finals.len() as f64);
        }
        for alpha in [0.5, 0.65, 0.8, 1.0] {
            let mut cfg = base(horizon, beta);
            cfg.algorithms = vec![AlgorithmKind::Club];
            cfg.alpha = AlphaSpec::Value(alpha);
            println!("beta {beta} club alpha {alpha} complete: {:.0}", mean_final(&cfg));
            let mut cfg2 = base(horizon, beta);
            cfg2.algorithms = vec![AlgorithmKind::Club];
            cfg2.alpha = AlphaSpec::Value(alpha);
            cfg2.init = InitSpec::ErdosRenyi { p: 0.2, seed: 1 };
            println!("beta {beta} club alpha {alpha} er(0.2): {:.0}", mean_final(&cfg2));
        }
    }
}
